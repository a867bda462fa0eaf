#pragma once

#include <stdexcept>

#include "sunit/numeric.hpp"

namespace sunit {

/// Residue in Z/T with the modulus carried alongside the value.
class ModInt {
 public:
  ModInt() : value_(0), modulus_(0) {}
  ModInt(Int value, Int modulus) : modulus_(std::move(modulus)) {
    if (modulus_ <= 0) throw std::invalid_argument("ModInt: modulus must be positive");
    value_ = mod_floor(value, modulus_);
  }

  const Int& value() const { return value_; }
  const Int& modulus() const { return modulus_; }
  bool is_zero() const { return value_ == 0; }

  ModInt operator+(const ModInt& o) const {
    check(o);
    return ModInt(value_ + o.value_, modulus_);
  }
  ModInt operator-(const ModInt& o) const {
    check(o);
    return ModInt(value_ - o.value_, modulus_);
  }
  ModInt operator*(const ModInt& o) const {
    check(o);
    return ModInt(value_ * o.value_, modulus_);
  }
  ModInt operator-() const { return ModInt(-value_, modulus_); }

  ModInt inverse() const { return ModInt(mod_inverse(value_, modulus_), modulus_); }

  ModInt pow(Int e) const {
    if (e < 0) return inverse().pow(-e);
    ModInt r(1, modulus_), b = *this;
    while (e > 0) {
      if ((e & 1) != 0) r = r * b;
      b = b * b;
      e >>= 1;
    }
    return r;
  }

  bool operator==(const ModInt& o) const { return modulus_ == o.modulus_ && value_ == o.value_; }
  bool operator!=(const ModInt& o) const { return !(*this == o); }

 private:
  void check(const ModInt& o) const {
    if (modulus_ != o.modulus_) throw std::invalid_argument("ModInt: modulus mismatch");
  }
  Int value_;
  Int modulus_;
};

}  // namespace sunit
