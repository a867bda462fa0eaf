#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <unordered_map>
#include <queue>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "sunit/intlinalg.hpp"
#include "sunit/numeric.hpp"

namespace sunit {

using Symbol = std::vector<int>;  // entries in [-(p-1), p-1]

/// Alphabet Sigma_p^d with a fixed mixed-radix symbol indexing.
struct Alphabet {
  int p = 2;
  int d = 1;
  long long size() const {
    long long s = 1;
    for (int i = 0; i < d; ++i) s *= 2 * p - 1;
    return s;
  }
  long long index(const Symbol& sym) const {
    long long idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * (2 * p - 1) + (sym[i] + p - 1);
    return idx;
  }
  Symbol symbol(long long idx) const {
    Symbol s(d);
    for (int i = d - 1; i >= 0; --i) {
      s[i] = static_cast<int>(idx % (2 * p - 1)) - (p - 1);
      idx /= (2 * p - 1);
    }
    return s;
  }
  long long zero_index() const {
    Symbol z(d, 0);
    return index(z);
  }
  std::vector<Symbol> all_symbols() const {
    std::vector<Symbol> out;
    out.reserve(size());
    for (long long a = 0; a < size(); ++a) out.push_back(symbol(a));
    return out;
  }
};

/// DFA over Sigma_p^d with total transition function.
struct PAutomaton {
  Alphabet alphabet;
  int n_states = 0;
  int initial = 0;
  std::vector<bool> accepting;
  std::vector<std::vector<int>> delta;  // delta[state][symbol index]

  int add_state(bool acc = false) {
    accepting.push_back(acc);
    delta.emplace_back(alphabet.size(), -1);
    return n_states++;
  }
  void set_transition(int from, const Symbol& sym, int to) { delta[from][alphabet.index(sym)] = to; }
  int step(int q, long long sym_idx) const { return delta[q][sym_idx]; }

  /// Sends every missing transition to a fresh dead state.
  void make_total() {
    bool need = false;
    for (const auto& row : delta)
      for (int t : row) need |= (t < 0);
    if (!need) return;
    int dead = add_state(false);
    for (auto& row : delta)
      for (auto& t : row)
        if (t < 0) t = dead;
  }
};

inline IntVec eval_word(const std::vector<Symbol>& w, int p, int d) {
  IntVec v(d, 0);
  Int pw = 1;
  for (const auto& sym : w) {
    for (int i = 0; i < d; ++i) v[i] += pw * sym[i];
    pw *= p;
  }
  return v;
}

namespace pauto_detail {

struct CarryBox {
  int d;
  long long K;            // entries in [-K, K]
  long long radix() const { return 2 * K + 1; }
  long long count() const {
    long long c = 1;
    for (int i = 0; i < d; ++i) c *= radix();
    return c;
  }
  long long index(const std::vector<long long>& v) const {
    long long idx = 0;
    for (int i = 0; i < d; ++i) idx = idx * radix() + (v[i] + K);
    return idx;
  }
  std::vector<long long> tuple(long long idx) const {
    std::vector<long long> v(d);
    for (int i = d - 1; i >= 0; --i) {
      v[i] = idx % radix() - K;
      idx /= radix();
    }
    return v;
  }
  bool inside(const std::vector<long long>& v) const {
    for (long long x : v)
      if (x < -K || x > K) return false;
    return true;
  }
};

}  // namespace pauto_detail

// ---------------------------------------------------------------------------
// Emptiness, reachability, window enumeration.

inline bool is_empty(const PAutomaton& A) {
  std::vector<bool> seen(A.n_states, false);
  std::queue<int> q;
  q.push(A.initial);
  seen[A.initial] = true;
  while (!q.empty()) {
    int s = q.front();
    q.pop();
    if (A.accepting[s]) return false;
    for (long long a = 0; a < A.alphabet.size(); ++a) {
      int t = A.step(s, a);
      if (t >= 0 && !seen[t]) {
        seen[t] = true;
        q.push(t);
      }
    }
  }
  return true;
}

/// Memoized value-membership oracle: decides x in VS(A) by reachability over
/// (state, remaining value) pairs. Remainders with max-norm > 1 strictly
/// shrink, so the recursion is a DAG outside the [-1,1]^d core, which is
/// computed once by fixpoint.
class ValueOracle {
 public:
  explicit ValueOracle(const PAutomaton& A) : A_(A), syms_(A.alphabet.all_symbols()) {
    int d = A_.alphabet.d;
    core_box_ = pauto_detail::CarryBox{d, 1};
    core_.assign(static_cast<size_t>(A_.n_states) * core_box_.count(), false);
    // fixpoint on the core: member(q, r) = (r = 0 and accepting) or exists v
    std::vector<long long> r2(d);
    bool changed = true;
    std::vector<long long> zero(d, 0);
    for (int q = 0; q < A_.n_states; ++q)
      if (A_.accepting[q]) core_[id(q, core_box_.index(zero))] = true;
    while (changed) {
      changed = false;
      for (int q = 0; q < A_.n_states; ++q)
        for (long long k = 0; k < core_box_.count(); ++k) {
          if (core_[id(q, k)]) continue;
          auto r = core_box_.tuple(k);
          bool found = false;
          for (size_t a = 0; a < syms_.size() && !found; ++a) {
            int t = A_.step(q, static_cast<long long>(a));
            if (t < 0) continue;
            bool ok = true;
            for (int i = 0; i < d && ok; ++i) {
              long long num = r[i] - syms_[a][i];
              if (num % A_.alphabet.p != 0) ok = false;
              else r2[i] = num / A_.alphabet.p;
            }
            if (ok && core_[id(t, core_box_.index(r2))]) found = true;
          }
          if (found) {
            core_[id(q, k)] = true;
            changed = true;
          }
        }
    }
  }

  bool member_from(int q, const std::vector<long long>& r) {
    if (core_box_.inside(r)) return core_[id(q, core_box_.index(r))];
    long long packed = pack(q, r);
    if (packed >= 0) {
      auto it = memo_.find(packed);
      if (it != memo_.end()) return it->second;
    } else {
      auto it = slow_memo_.find({q, r});
      if (it != slow_memo_.end()) return it->second;
    }
    int d = A_.alphabet.d, p = A_.alphabet.p;
    bool zero = true;
    for (long long c : r) zero &= (c == 0);
    bool res = zero && A_.accepting[q];
    std::vector<long long> r2(d);
    for (size_t a = 0; a < syms_.size() && !res; ++a) {
      int t = A_.step(q, static_cast<long long>(a));
      if (t < 0) continue;
      bool ok = true;
      for (int i = 0; i < d && ok; ++i) {
        long long num = r[i] - syms_[a][i];
        if (num % p != 0) ok = false;
        else r2[i] = num / p;
      }
      if (ok && member_from(t, r2)) res = true;
    }
    if (packed >= 0) memo_.emplace(packed, res);
    else slow_memo_.emplace(std::make_pair(q, r), res);
    return res;
  }

  bool member(const IntVec& x) {
    std::vector<long long> r(x.size());
    for (size_t i = 0; i < x.size(); ++i) {
      if (x[i] > (Int(1) << 56) || x[i] < -(Int(1) << 56))
        throw std::invalid_argument("ValueOracle: value out of supported range");
      r[i] = x[i].convert_to<long long>();
    }
    return member_from(A_.initial, r);
  }

 private:
  size_t id(int q, long long k) const { return static_cast<size_t>(q) * core_box_.count() + k; }
  // exact mixed-radix packing when every coordinate is small enough; -1 when
  // the key would not fit (the exact slow map takes over)
  long long pack(int q, const std::vector<long long>& r) const {
    int d = static_cast<int>(r.size());
    int bits = d > 0 ? 52 / d : 52;
    long long lim = 1LL << (bits - 1);
    if (q < 0 || q >= (1LL << (62 - bits * d))) return -1;  // would overflow the key
    long long key = q;
    for (long long c : r) {
      if (c <= -lim || c >= lim) return -1;
      key = (key << bits) | (c + lim);
    }
    return key;
  }
  const PAutomaton& A_;
  std::vector<Symbol> syms_;
  pauto_detail::CarryBox core_box_{1, 1};
  std::vector<bool> core_;
  std::unordered_map<long long, bool> memo_;
  std::map<std::pair<int, std::vector<long long>>, bool> slow_memo_;
};

inline bool value_member(const PAutomaton& A, const IntVec& x) { return ValueOracle(A).member(x); }

/// All accepted values inside [-B, B]^d, exactly.
inline std::set<IntVec> enumerate_window(const PAutomaton& A, long B) {
  std::set<IntVec> out;
  int d = A.alphabet.d;
  ValueOracle oracle(A);
  IntVec x(d, -B);
  while (true) {
    if (oracle.member(x)) out.insert(x);
    int i = 0;
    for (i = 0; i < d; ++i) {
      x[i] += 1;
      if (x[i] <= B) break;
      x[i] = -B;
    }
    if (i == d) break;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Linear-condition automata (saturated: acceptance depends on eval only).

/// Automaton for { x : c.x = b } over Sigma_p^d.
inline PAutomaton affine_equality_automaton(const IntVec& c, const Int& b, int p) {
  int d = static_cast<int>(c.size());
  PAutomaton A;
  A.alphabet = {p, d};
  std::map<Int, int> states;
  std::vector<Int> todo;
  auto state_of = [&](const Int& s) {
    auto it = states.find(s);
    if (it != states.end()) return it->second;
    int id = A.add_state(s == 0);
    states.emplace(s, id);
    todo.push_back(s);
    return id;
  };
  A.initial = state_of(b);
  while (!todo.empty()) {
    Int s = todo.back();
    todo.pop_back();
    int from = states[s];
    for (long long a = 0; a < A.alphabet.size(); ++a) {
      Symbol sym = A.alphabet.symbol(a);
      Int cw = 0;
      for (int i = 0; i < d; ++i) cw += c[i] * sym[i];
      Int num = s - cw;
      if (num % p != 0) continue;  // dead
      A.delta[from][a] = state_of(num / p);
      from = states[s];  // add_state may have re-allocated nothing; keep id
    }
  }
  A.make_total();
  return A;
}

/// Automaton for { x : c.x = r mod t }, t >= 1.
inline PAutomaton congruence_automaton(const IntVec& c, const Int& r, const Int& t, int p) {
  int d = static_cast<int>(c.size());
  PAutomaton A;
  A.alphabet = {p, d};
  if (t == 1) {  // everything
    int q0 = A.add_state(true);
    for (long long a = 0; a < A.alphabet.size(); ++a) A.delta[q0][a] = q0;
    A.initial = q0;
    return A;
  }
  Int rr = mod_floor(r, t);
  std::map<std::pair<Int, Int>, int> states;  // (acc residue, p^i mod t)
  std::vector<std::pair<Int, Int>> todo;
  auto state_of = [&](const Int& s, const Int& q) {
    auto key = std::make_pair(s, q);
    auto it = states.find(key);
    if (it != states.end()) return it->second;
    int id = A.add_state(s == rr);
    states.emplace(key, id);
    todo.push_back(key);
    return id;
  };
  A.initial = state_of(0, 1);
  while (!todo.empty()) {
    auto [s, qq] = todo.back();
    todo.pop_back();
    int from = states[{s, qq}];
    for (long long a = 0; a < A.alphabet.size(); ++a) {
      Symbol sym = A.alphabet.symbol(a);
      Int cw = 0;
      for (int i = 0; i < d; ++i) cw += c[i] * sym[i];
      A.delta[from][a] = state_of(mod_floor(s + qq * cw, t), mod_floor(qq * p, t));
    }
  }
  return A;
}

inline PAutomaton universal_automaton(int p, int d) {
  PAutomaton A;
  A.alphabet = {p, d};
  int q0 = A.add_state(true);
  for (long long a = 0; a < A.alphabet.size(); ++a) A.delta[q0][a] = q0;
  A.initial = q0;
  return A;
}

inline PAutomaton empty_automaton(int p, int d) {
  PAutomaton A;
  A.alphabet = {p, d};
  int q0 = A.add_state(false);
  for (long long a = 0; a < A.alphabet.size(); ++a) A.delta[q0][a] = q0;
  A.initial = q0;
  return A;
}


/// Restricts to reachable states and merges equivalent ones (Moore partition
/// refinement). Keeps value semantics; used to tame subset constructions.
inline PAutomaton minimize_dfa(PAutomaton A) {
  A.make_total();
  int n = A.n_states;
  const long long nsym = A.alphabet.size();
  // reachable trim
  std::vector<int> remap(n, -1);
  std::vector<int> order;
  {
    std::queue<int> q;
    q.push(A.initial);
    remap[A.initial] = 0;
    order.push_back(A.initial);
    while (!q.empty()) {
      int s = q.front();
      q.pop();
      for (long long a = 0; a < nsym; ++a) {
        int t = A.step(s, a);
        if (t >= 0 && remap[t] < 0) {
          remap[t] = static_cast<int>(order.size());
          order.push_back(t);
          q.push(t);
        }
      }
    }
  }
  int m = static_cast<int>(order.size());
  std::vector<std::vector<int>> delta(m, std::vector<int>(nsym));
  std::vector<bool> acc(m);
  for (int i = 0; i < m; ++i) {
    acc[i] = A.accepting[order[i]];
    for (long long a = 0; a < nsym; ++a) delta[i][a] = remap[A.delta[order[i]][a]];
  }
  // partition refinement
  std::vector<int> cls(m);
  for (int i = 0; i < m; ++i) cls[i] = acc[i] ? 1 : 0;
  int n_classes = 2;
  bool changed = true;
  while (changed) {
    changed = false;
    std::map<std::vector<int>, int> sig_to_class;
    std::vector<int> next(m);
    for (int i = 0; i < m; ++i) {
      std::vector<int> sig;
      sig.reserve(nsym + 1);
      sig.push_back(cls[i]);
      for (long long a = 0; a < nsym; ++a) sig.push_back(cls[delta[i][a]]);
      auto it = sig_to_class.find(sig);
      if (it == sig_to_class.end()) it = sig_to_class.emplace(std::move(sig), static_cast<int>(sig_to_class.size())).first;
      next[i] = it->second;
    }
    if (static_cast<int>(sig_to_class.size()) != n_classes) changed = true;
    n_classes = static_cast<int>(sig_to_class.size());
    cls = std::move(next);
  }
  PAutomaton out;
  out.alphabet = A.alphabet;
  for (int c = 0; c < n_classes; ++c) out.add_state(false);
  for (int i = 0; i < m; ++i) {
    out.accepting[cls[i]] = acc[i];
    for (long long a = 0; a < nsym; ++a) out.delta[cls[i]][a] = cls[delta[i][a]];
  }
  out.initial = cls[0];
  return out;
}

/// Already closed under appending zero digits?
inline bool zero_extension_closed(const PAutomaton& A) {
  long long z = A.alphabet.zero_index();
  for (int q = 0; q < A.n_states; ++q)
    if (A.accepting[q]) {
      int t = A.step(q, z);
      if (t < 0 || !A.accepting[t]) return false;
    }
  return true;
}

/// L(A) extended by trailing zero digits (the value set is unchanged): needed
/// so digit-by-digit simulations can run past the end of a witness word.
inline PAutomaton pad_trailing_zeros(const PAutomaton& A) {
  if (zero_extension_closed(A)) return A;
  PAutomaton out;
  out.alphabet = A.alphabet;
  const long long nsym = A.alphabet.size();
  const long long z = A.alphabet.zero_index();
  // states (q, b) with q in Q ∪ {dead}, b = "read only zeros since an
  // accepting state was visited"; the b-track survives dead original deltas
  const int DEAD = A.n_states;
  auto id = [&](int q, int b) { return 2 * q + b; };
  for (int q = 0; q <= DEAD; ++q) {
    bool acc = q < DEAD && A.accepting[q];
    out.add_state(acc);   // (q, 0)
    out.add_state(true);  // (q, 1)
  }
  for (int q = 0; q <= DEAD; ++q) {
    bool from_acc = q < DEAD && A.accepting[q];
    for (long long a = 0; a < nsym; ++a) {
      int t = (q < DEAD) ? A.step(q, a) : -1;
      if (t < 0) t = DEAD;
      out.delta[id(q, 0)][a] = (a == z && from_acc) ? id(t, 1) : id(t, 0);
      out.delta[id(q, 1)][a] = (a == z) ? id(t, 1) : id(t, 0);
    }
  }
  out.initial = id(A.initial, 0);
  return out;
}

// Plain product; sound on value sets when at least one factor is saturated
// (acceptance a function of the evaluation alone).
enum class BoolKind { Intersect, Union, Difference };

namespace pauto_detail {

inline PAutomaton dfa_product(const PAutomaton& A, const PAutomaton& B, BoolKind kind) {
  if (A.alphabet.p != B.alphabet.p || A.alphabet.d != B.alphabet.d)
    throw std::invalid_argument("dfa_product: alphabet mismatch");
  PAutomaton C;
  C.alphabet = A.alphabet;
  std::map<std::pair<int, int>, int> states;
  std::vector<std::pair<int, int>> todo;
  auto accept = [&](int qa, int qb) {
    switch (kind) {
      case BoolKind::Intersect: return A.accepting[qa] && B.accepting[qb];
      case BoolKind::Union: return A.accepting[qa] || B.accepting[qb];
      case BoolKind::Difference: return A.accepting[qa] && !B.accepting[qb];
    }
    return false;
  };
  auto state_of = [&](int qa, int qb) {
    auto key = std::make_pair(qa, qb);
    auto it = states.find(key);
    if (it != states.end()) return it->second;
    int id = C.add_state(accept(qa, qb));
    states.emplace(key, id);
    todo.push_back(key);
    return id;
  };
  C.initial = state_of(A.initial, B.initial);
  while (!todo.empty()) {
    auto [qa, qb] = todo.back();
    todo.pop_back();
    int from = states[{qa, qb}];
    for (long long a = 0; a < C.alphabet.size(); ++a)
      C.delta[from][a] = state_of(A.step(qa, a), B.step(qb, a));
  }
  return C;
}

}  // namespace pauto_detail

// ---------------------------------------------------------------------------
// Value saturation: A* accepts exactly the words whose evaluation lies in the
// value set of A. Signed digits make representations non-unique; this is the
// two-sided digit normalization that makes boolean ops exact on sets.

namespace pauto_detail {

// Acc(q, kappa): some word x with delta(q, x) accepting and eval(x) = kappa,
// for kappa in the carry box. Backward fixpoint.
inline std::vector<bool> acceptance_closure(const PAutomaton& A, const CarryBox& box) {
  int p = A.alphabet.p, d = A.alphabet.d;
  std::vector<bool> acc(static_cast<size_t>(A.n_states) * box.count(), false);
  auto id = [&](int q, long long kidx) { return static_cast<size_t>(q) * box.count() + kidx; };
  bool changed = true;
  // base: kappa = 0 at accepting states
  std::vector<long long> zero(d, 0);
  for (int q = 0; q < A.n_states; ++q)
    if (A.accepting[q]) acc[id(q, box.index(zero))] = true;
  while (changed) {
    changed = false;
    for (int q = 0; q < A.n_states; ++q) {
      for (long long kidx = 0; kidx < box.count(); ++kidx) {
        if (acc[id(q, kidx)]) continue;
        auto kappa = box.tuple(kidx);
        bool found = false;
        for (long long a = 0; a < A.alphabet.size() && !found; ++a) {
          Symbol sym = A.alphabet.symbol(a);
          std::vector<long long> k2(d);
          bool ok = true;
          for (int i = 0; i < d && ok; ++i) {
            long long num = kappa[i] - sym[i];
            if (num % p != 0) ok = false;
            else k2[i] = num / p;
          }
          if (!ok || !box.inside(k2)) continue;
          int t = A.step(q, a);
          if (t >= 0 && acc[id(t, box.index(k2))]) found = true;
        }
        if (found) {
          acc[id(q, kidx)] = true;
          changed = true;
        }
      }
    }
  }
  return acc;
}

}  // namespace pauto_detail

inline PAutomaton value_saturate(const PAutomaton& A_in) {
  PAutomaton A = pad_trailing_zeros(minimize_dfa(A_in));
  int p = A.alphabet.p, d = A.alphabet.d;
  pauto_detail::CarryBox box{d, 1};  // |kappa + v - u| <= 2p-1, so carries stay in [-1, 1]
  std::vector<bool> acc = pauto_detail::acceptance_closure(A, box);
  auto accid = [&](int q, long long kidx) { return static_cast<size_t>(q) * box.count() + kidx; };

  const long long bc = box.count();
  const long long nsym = A.alphabet.size();
  std::vector<Symbol> syms = A.alphabet.all_symbols();
  std::vector<std::vector<long long>> tuples(bc);
  for (long long k = 0; k < bc; ++k) tuples[k] = box.tuple(k);

  // per-atom successor lists, indexed by the read symbol u
  const size_t n_atoms = static_cast<size_t>(A.n_states) * bc;
  std::vector<std::vector<std::vector<int>>> succ(n_atoms, std::vector<std::vector<int>>(nsym));
  std::vector<long long> k2(d);
  for (int q = 0; q < A.n_states; ++q) {
    for (long long kidx = 0; kidx < bc; ++kidx) {
      const auto& kappa = tuples[kidx];
      for (long long b = 0; b < nsym; ++b) {
        int t = A.step(q, b);
        if (t < 0) continue;
        const Symbol& v = syms[b];
        // u must equal kappa + v mod p per coordinate: at most 2 digits each
        std::vector<std::vector<int>> uopts(d);
        for (int i = 0; i < d; ++i) {
          long long base = kappa[i] + v[i];
          long long r0 = ((base % p) + p) % p;
          for (long long u = r0 - p; u <= p - 1; u += p)
            if (u >= -(p - 1)) uopts[i].push_back(static_cast<int>(u));
        }
        Symbol u(d);
        std::vector<size_t> pick(d, 0);
        while (true) {
          bool ok = true;
          for (int i = 0; i < d && ok; ++i) {
            u[i] = uopts[i][pick[i]];
            k2[i] = (kappa[i] + v[i] - u[i]) / p;
            if (k2[i] < -box.K || k2[i] > box.K) ok = false;
          }
          if (ok)
            succ[accid(q, kidx)][A.alphabet.index(u)].push_back(static_cast<int>(accid(t, box.index(k2))));
          int i = 0;
          for (; i < d; ++i) {
            if (++pick[i] < uopts[i].size()) break;
            pick[i] = 0;
          }
          if (i == d) break;
        }
      }
    }
  }
  std::vector<bool> atom_accepts(n_atoms, false);
  for (int q = 0; q < A.n_states; ++q)
    for (long long kidx = 0; kidx < bc; ++kidx) {
      auto kappa = tuples[kidx];
      for (auto& x : kappa) x = -x;
      if (box.inside(kappa)) atom_accepts[accid(q, kidx)] = acc[accid(q, box.index(kappa))];
    }

  PAutomaton out;
  out.alphabet = A.alphabet;
  std::map<std::vector<int>, int> states;
  std::vector<std::vector<int>> todo;
  auto state_of = [&](std::vector<int> S) {
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
    auto it = states.find(S);
    if (it != states.end()) return it->second;
    bool ok = false;
    for (int atom : S) ok |= atom_accepts[atom];
    int id = out.add_state(ok);
    states.emplace(S, id);
    todo.push_back(std::move(S));
    return id;
  };
  std::vector<long long> zero(d, 0);
  out.initial = state_of({static_cast<int>(accid(A.initial, box.index(zero)))});
  while (!todo.empty()) {
    std::vector<int> S = todo.back();
    todo.pop_back();
    int from = states[S];
    for (long long a = 0; a < nsym; ++a) {
      std::vector<int> T;
      for (int atom : S) {
        const auto& lst = succ[atom][a];
        T.insert(T.end(), lst.begin(), lst.end());
      }
      out.delta[from][a] = state_of(std::move(T));
    }
    if (out.n_states > 2000000) throw std::logic_error("value_saturate: state explosion");
  }
  return minimize_dfa(out);
}

/// Boolean operations on the evaluated value sets. The semantics are on
/// value sets, so the right operand is first normalized to value-deterministic
/// form where acceptance must depend on the evaluation alone (intersection and
/// difference); the left operand's own representations already witness its
/// values, and unions need no normalization at all.
inline PAutomaton boolean_op(BoolKind kind, const PAutomaton& A, const PAutomaton& B) {
  if (kind == BoolKind::Union)
    return minimize_dfa(pauto_detail::dfa_product(minimize_dfa(A), minimize_dfa(B), kind));
  PAutomaton Bs = value_saturate(B);
  return minimize_dfa(pauto_detail::dfa_product(minimize_dfa(A), Bs, kind));
}

/// Variant for inputs that are already saturated (accept every representation
/// of every value they contain); skips the normalization.
inline PAutomaton boolean_op_saturated(BoolKind kind, const PAutomaton& A, const PAutomaton& B) {
  return minimize_dfa(pauto_detail::dfa_product(A, B, kind));
}

// ---------------------------------------------------------------------------
// Linear images and direct products.

/// { phi(x) : x in VS(A) } for an integer matrix phi (n x d). Lazy subset
/// construction over (state, carry) atoms: only atoms reachable from the
/// initial subset are expanded.
inline PAutomaton linear_image(const PAutomaton& A_in, const IntMat& phi) {
  PAutomaton A = pad_trailing_zeros(A_in);
  int p = A.alphabet.p, d = A.alphabet.d;
  int n = static_cast<int>(phi.size());
  for (const auto& row : phi)
    if (static_cast<int>(row.size()) != d) throw std::invalid_argument("linear_image: shape mismatch");
  std::vector<std::vector<long long>> phi_ll(n, std::vector<long long>(d));
  long long Cphi = 0;
  for (int i = 0; i < n; ++i) {
    long long srow = 0;
    for (int j = 0; j < d; ++j) {
      phi_ll[i][j] = phi[i][j].convert_to<long long>();
      srow += phi_ll[i][j] < 0 ? -phi_ll[i][j] : phi_ll[i][j];
    }
    Cphi = std::max(Cphi, srow);
  }
  pauto_detail::CarryBox box{n, Cphi + 1};
  const long long bc = box.count();
  Alphabet out_alpha{p, n};
  const long long nout = out_alpha.size(), nin = A.alphabet.size();
  std::vector<Symbol> in_syms = A.alphabet.all_symbols();
  std::vector<std::vector<long long>> phiv(nin, std::vector<long long>(n, 0));
  for (long long b = 0; b < nin; ++b)
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < d; ++j) phiv[b][i] += phi_ll[i][j] * in_syms[b][j];
  std::vector<std::vector<long long>> tuples(bc);
  for (long long k = 0; k < bc; ++k) tuples[k] = box.tuple(k);
  auto accid = [&](int q, long long kidx) { return static_cast<size_t>(q) * bc + kidx; };
  const size_t total_atoms = static_cast<size_t>(A.n_states) * bc;

  // AccImg(q, y): some accepted tail from q has phi(eval) = y. Reachability
  // along (q, y) -> (delta(q, b), (y - phi v_b)/p) to an accepting (q0, 0),
  // resolved by DFS with a global true-memo and per-query visited set.
  std::vector<char> acc_state(total_atoms, 0);  // 0 unknown, 1 true
  std::vector<long long> zero(n, 0);
  for (int q = 0; q < A.n_states; ++q)
    if (A.accepting[q]) acc_state[accid(q, box.index(zero))] = 1;
  std::vector<long long> scratch(n);
  auto acc_query = [&](size_t atom0) {
    if (acc_state[atom0]) return true;
    std::set<size_t> visited;
    std::vector<size_t> stack = {atom0};
    std::vector<size_t> trail;
    visited.insert(atom0);
    bool found = false;
    while (!stack.empty() && !found) {
      size_t cur = stack.back();
      stack.pop_back();
      trail.push_back(cur);
      int q = static_cast<int>(cur / bc);
      const auto& y = tuples[cur % bc];
      for (long long b = 0; b < nin && !found; ++b) {
        int t = A.step(q, b);
        if (t < 0) continue;
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
          long long num = y[i] - phiv[b][i];
          if (num % p != 0) ok = false;
          else scratch[i] = num / p;
        }
        if (!ok || !box.inside(scratch)) continue;
        size_t nxt = accid(t, box.index(scratch));
        if (acc_state[nxt]) found = true;
        else if (visited.insert(nxt).second) stack.push_back(nxt);
      }
    }
    (void)trail;
    if (found) acc_state[atom0] = 1;
    return found;
  };

  // lazy per-atom successor lists by output symbol
  std::vector<std::vector<std::vector<int>>> succ(total_atoms);
  std::vector<char> have(total_atoms, 0);
  auto ensure = [&](size_t atom) {
    if (have[atom]) return;
    have[atom] = 1;
    succ[atom].assign(nout, {});
    int q = static_cast<int>(atom / bc);
    const auto& kappa = tuples[atom % bc];
    std::vector<long long> k2(n);
    for (long long b = 0; b < nin; ++b) {
      int t = A.step(q, b);
      if (t < 0) continue;
      int uopt[16][2];
      int unum[16];
      for (int i = 0; i < n; ++i) {
        long long base = kappa[i] + phiv[b][i];
        long long r0 = ((base % p) + p) % p;
        unum[i] = 0;
        for (long long u = r0 - p; u <= p - 1; u += p)
          if (u >= -(p - 1)) uopt[i][unum[i]++] = static_cast<int>(u);
      }
      Symbol u(n);
      int pick[16];
      for (int i = 0; i < n; ++i) pick[i] = 0;
      while (true) {
        bool ok = true;
        for (int i = 0; i < n && ok; ++i) {
          u[i] = uopt[i][pick[i]];
          k2[i] = (kappa[i] + phiv[b][i] - u[i]) / p;
          if (k2[i] < -box.K || k2[i] > box.K) ok = false;
        }
        if (ok) succ[atom][out_alpha.index(u)].push_back(static_cast<int>(accid(t, box.index(k2))));
        int i = 0;
        for (; i < n; ++i) {
          if (++pick[i] < unum[i]) break;
          pick[i] = 0;
        }
        if (i == n) break;
      }
    }
  };

  PAutomaton out;
  out.alphabet = out_alpha;
  std::map<std::vector<int>, int> states;
  std::vector<std::vector<int>> todo;
  auto state_of = [&](std::vector<int> S) {
    std::sort(S.begin(), S.end());
    S.erase(std::unique(S.begin(), S.end()), S.end());
    auto it = states.find(S);
    if (it != states.end()) return it->second;
    bool ok = false;
    for (int atom : S) {
      // acceptance needs an accepted tail with image evaluation -kappa
      auto y = tuples[atom % bc];
      for (auto& x : y) x = -x;
      if (!box.inside(y)) continue;
      size_t neg = accid(static_cast<int>(atom / bc), box.index(y));
      if (acc_query(neg)) {
        ok = true;
        break;
      }
    }
    int id = out.add_state(ok);
    states.emplace(S, id);
    todo.push_back(std::move(S));
    return id;
  };
  out.initial = state_of({static_cast<int>(accid(A.initial, box.index(zero)))});
  while (!todo.empty()) {
    std::vector<int> S = todo.back();
    todo.pop_back();
    int from = states[S];
    for (int atom : S) ensure(static_cast<size_t>(atom));
    for (long long a = 0; a < nout; ++a) {
      std::vector<int> T;
      for (int atom : S) {
        const auto& lst = succ[atom][a];
        T.insert(T.end(), lst.begin(), lst.end());
      }
      out.delta[from][a] = state_of(std::move(T));
    }
    if (out.n_states > 2000000) throw std::logic_error("linear_image: state explosion");
  }
  return minimize_dfa(out);
}

/// Direct product of value sets: VS(A) x VS(B) over Sigma_p^{dA+dB}. Inputs
/// are padded with trailing zeros so witnesses of different lengths align.
inline PAutomaton automaton_product(const PAutomaton& A_in, const PAutomaton& B_in) {
  if (A_in.alphabet.p != B_in.alphabet.p) throw std::invalid_argument("automaton_product: base mismatch");
  PAutomaton A = pad_trailing_zeros(A_in);
  PAutomaton B = pad_trailing_zeros(B_in);
  int p = A.alphabet.p, da = A.alphabet.d, db = B.alphabet.d;
  PAutomaton C;
  C.alphabet = {p, da + db};
  std::map<std::pair<int, int>, int> states;
  std::vector<std::pair<int, int>> todo;
  auto state_of = [&](int qa, int qb) {
    auto key = std::make_pair(qa, qb);
    auto it = states.find(key);
    if (it != states.end()) return it->second;
    int id = C.add_state(A.accepting[qa] && B.accepting[qb]);
    states.emplace(key, id);
    todo.push_back(key);
    return id;
  };
  C.initial = state_of(A.initial, B.initial);
  std::vector<Symbol> syms = C.alphabet.all_symbols();
  while (!todo.empty()) {
    auto [qa, qb] = todo.back();
    todo.pop_back();
    int from = states[{qa, qb}];
    for (long long a = 0; a < C.alphabet.size(); ++a) {
      const Symbol& sym = syms[a];
      Symbol sa(sym.begin(), sym.begin() + da), sb(sym.begin() + da, sym.end());
      int ta = A.step(qa, A.alphabet.index(sa));
      int tb = B.step(qb, B.alphabet.index(sb));
      if (ta < 0 || tb < 0) {
        C.delta[from][a] = -1;
        continue;
      }
      C.delta[from][a] = state_of(ta, tb);
    }
  }
  C.make_total();
  return minimize_dfa(C);
}

/// Automaton whose value set is the subgroup generated by the given vectors.
inline PAutomaton automaton_for_subgroup(const std::vector<IntVec>& gens, int p, int d) {
  // x in H iff U x lands in the diagonal lattice of the Smith form.
  if (gens.empty()) {
    // the trivial subgroup {0}
    PAutomaton A = universal_automaton(p, d);
    IntVec c(d, 0);
    for (int i = 0; i < d; ++i) {
      c.assign(d, 0);
      c[i] = 1;
      A = pauto_detail::dfa_product(A, affine_equality_automaton(c, 0, p), BoolKind::Intersect);
    }
    return A;
  }
  size_t m = gens.size();
  IntMat G(d, IntVec(m, 0));
  for (size_t j = 0; j < m; ++j)
    for (int i = 0; i < d; ++i) G[i][j] = gens[j][i];
  SmithResult s = smith_normal_form(G);
  PAutomaton A = universal_automaton(p, d);
  for (int i = 0; i < d; ++i) {
    IntVec row = s.U[i];
    Int di = (static_cast<size_t>(i) < std::min<size_t>(d, m)) ? s.D[i][i] : Int(0);
    PAutomaton cond = (di == 0) ? affine_equality_automaton(row, 0, p)
                                : congruence_automaton(row, 0, di < 0 ? Int(-di) : di, p);
    A = pauto_detail::dfa_product(A, cond, BoolKind::Intersect);
  }
  return A;
}

// ---------------------------------------------------------------------------
// SCC machinery.

struct SCCDecomposition {
  std::vector<int> component;             // state -> component id (DAG topological: edges go up)
  std::vector<std::vector<int>> members;  // component id -> states, discovery order
  std::vector<std::set<int>> dag_edges;   // component -> successor components
};

inline SCCDecomposition scc_decompose(const PAutomaton& A) {
  int n = A.n_states;
  std::vector<int> index(n, -1), low(n, 0), comp(n, -1);
  std::vector<bool> on_stack(n, false);
  std::vector<int> stk;
  SCCDecomposition out;
  out.component.assign(n, -1);
  int counter = 0;
  // iterative Tarjan, deterministic by state/symbol order
  struct Frame {
    int v;
    long long edge;
  };
  for (int root = 0; root < n; ++root) {
    if (index[root] != -1) continue;
    std::vector<Frame> call;
    call.push_back({root, 0});
    index[root] = low[root] = counter++;
    stk.push_back(root);
    on_stack[root] = true;
    while (!call.empty()) {
      Frame& f = call.back();
      if (f.edge < A.alphabet.size()) {
        int w = A.step(f.v, f.edge);
        ++f.edge;
        if (w < 0) continue;
        if (index[w] == -1) {
          index[w] = low[w] = counter++;
          stk.push_back(w);
          on_stack[w] = true;
          call.push_back({w, 0});
        } else if (on_stack[w]) {
          low[f.v] = std::min(low[f.v], index[w]);
        }
      } else {
        if (low[f.v] == index[f.v]) {
          std::vector<int> members;
          while (true) {
            int w = stk.back();
            stk.pop_back();
            on_stack[w] = false;
            members.push_back(w);
            if (w == f.v) break;
          }
          std::sort(members.begin(), members.end());
          int cid = static_cast<int>(out.members.size());
          for (int w : members) out.component[w] = cid;
          out.members.push_back(std::move(members));
        }
        int v = f.v;
        call.pop_back();
        if (!call.empty()) low[call.back().v] = std::min(low[call.back().v], low[v]);
      }
    }
  }
  out.dag_edges.assign(out.members.size(), {});
  for (int v = 0; v < n; ++v)
    for (long long a = 0; a < A.alphabet.size(); ++a) {
      int w = A.step(v, a);
      if (w >= 0 && out.component[v] != out.component[w])
        out.dag_edges[out.component[v]].insert(out.component[w]);
    }
  return out;
}

// ---------------------------------------------------------------------------
// Path-length semilinear sets.

struct SemiLinearSet {
  std::vector<long long> finite;                          // isolated lengths
  std::vector<std::pair<long long, long long>> progressions;  // (offset, period)

  bool contains(long long n) const {
    for (long long f : finite)
      if (f == n) return true;
    for (auto [o, pr] : progressions)
      if (n >= o && (n - o) % pr == 0) return true;
    return false;
  }
  bool empty() const { return finite.empty() && progressions.empty(); }
  bool is_finite() const { return progressions.empty(); }

  /// Rewrites every progression with the common period L (a multiple of all).
  SemiLinearSet with_period(long long L) const {
    SemiLinearSet out;
    out.finite = finite;
    for (auto [o, pr] : progressions)
      for (long long i = 0; i < L / pr; ++i) out.progressions.push_back({o + i * pr, L});
    return out;
  }
};

/// {len(pi) : pi a path from W to V}, as a finite part plus progressions with
/// a single common period.
inline SemiLinearSet path_length_set(const PAutomaton& A, int W, int V, long long cap = 4096) {
  int n = A.n_states;
  // boolean adjacency
  std::vector<std::vector<bool>> adj(n, std::vector<bool>(n, false));
  for (int q = 0; q < n; ++q)
    for (long long a = 0; a < A.alphabet.size(); ++a) {
      int t = A.step(q, a);
      if (t >= 0) adj[q][t] = true;
    }
  std::vector<std::vector<std::vector<bool>>> powers;  // powers[m] = adj^m
  std::vector<std::vector<bool>> cur(n, std::vector<bool>(n, false));
  for (int i = 0; i < n; ++i) cur[i][i] = true;
  powers.push_back(cur);
  long long preperiod = -1, period = -1;
  for (long long m = 1; m <= cap; ++m) {
    std::vector<std::vector<bool>> next(n, std::vector<bool>(n, false));
    for (int i = 0; i < n; ++i)
      for (int k = 0; k < n; ++k)
        if (powers.back()[i][k])
          for (int j = 0; j < n; ++j)
            if (adj[k][j]) next[i][j] = true;
    // lasso detection
    for (long long prev = 0; prev < static_cast<long long>(powers.size()); ++prev) {
      if (powers[prev] == next) {
        preperiod = prev;
        period = m - prev;
        break;
      }
    }
    powers.push_back(std::move(next));
    if (preperiod >= 0) break;
  }
  if (preperiod < 0) throw std::logic_error("path_length_set: lasso cap exceeded");
  SemiLinearSet out;
  for (long long m = 0; m < preperiod; ++m)
    if (powers[m][W][V]) out.finite.push_back(m);
  for (long long m = preperiod; m < preperiod + period; ++m)
    if (powers[m][W][V]) out.progressions.push_back({m, period});
  return out;
}

// ---------------------------------------------------------------------------
// Induced partitions of {1..K} from equal-length cycle pairs.

struct Partition {
  std::vector<std::vector<int>> blocks;  // disjoint cover of {0..K-1} (0-based)

  static Partition singletons(int K) {
    Partition P;
    for (int i = 0; i < K; ++i) P.blocks.push_back({i});
    return P;
  }
  static Partition one_block(int K) {
    Partition P;
    P.blocks.emplace_back();
    for (int i = 0; i < K; ++i) P.blocks[0].push_back(i);
    return P;
  }
  int block_of(int i) const {
    for (size_t b = 0; b < blocks.size(); ++b)
      for (int x : blocks[b])
        if (x == i) return static_cast<int>(b);
    return -1;
  }
  bool operator==(const Partition& o) const { return blocks == o.blocks; }

  static Partition from_pairs(int K, const std::vector<std::vector<bool>>& together) {
    // union-find over the "co-blocked" relation (it is transitive here)
    std::vector<int> parent(K);
    for (int i = 0; i < K; ++i) parent[i] = i;
    std::function<int(int)> find = [&](int x) { return parent[x] == x ? x : parent[x] = find(parent[x]); };
    for (int i = 0; i < K; ++i)
      for (int j = i + 1; j < K; ++j)
        if (together[i][j]) parent[find(i)] = find(j);
    std::map<int, std::vector<int>> groups;
    for (int i = 0; i < K; ++i) groups[find(i)].push_back(i);
    Partition P;
    for (auto& [root, mem] : groups) P.blocks.push_back(mem);
    std::sort(P.blocks.begin(), P.blocks.end());
    return P;
  }
};

enum class NoCycleConvention { Singletons, OneBlock };

namespace pauto_detail {

// Automaton over Sigma_p^{1+KN} accepting {(p^{len C}, eval(C)) : C in L(W,W)}.
inline PAutomaton cycle_value_automaton(const PAutomaton& A, int W) {
  int p = A.alphabet.p, d = A.alphabet.d;
  PAutomaton B;
  B.alphabet = {p, 1 + d};
  // states: 0..n-1 = cycling copies of A's states, n = done
  for (int q = 0; q < A.n_states; ++q) B.add_state(false);
  int done = B.add_state(true);
  B.initial = W;
  for (int q = 0; q < A.n_states; ++q) {
    for (long long a = 0; a < A.alphabet.size(); ++a) {
      int t = A.step(q, a);
      if (t < 0) continue;
      Symbol sym = A.alphabet.symbol(a);
      Symbol ext(1 + d);
      ext[0] = 0;
      for (int i = 0; i < d; ++i) ext[1 + i] = sym[i];
      B.delta[q][B.alphabet.index(ext)] = t;
    }
  }
  // closing the cycle emits the top digit of p^len
  Symbol close(1 + d, 0);
  close[0] = 1;
  B.delta[W][B.alphabet.index(close)] = done;
  Symbol zero(1 + d, 0);
  B.delta[done][B.alphabet.index(zero)] = done;
  B.make_total();
  return B;
}

}  // namespace pauto_detail

/// The finest partition of {1..K} realized by equal-length cycle pairs at W:
/// i, j are co-blocked iff (L_ji - L_ji) ∩ ({0} x Z^N) is trivial. States on
/// no nonempty cycle get the stated convention (flagged at this API).
inline Partition state_partition(const PAutomaton& A, int W, int K, int N,
                                 NoCycleConvention convention = NoCycleConvention::Singletons) {
  if (A.alphabet.d != K * N) throw std::invalid_argument("state_partition: dimension mismatch");
  int p = A.alphabet.p;
  // Is W on a nonempty cycle? (reach W from W in >= 1 step)
  {
    std::vector<bool> seen(A.n_states, false);
    std::queue<int> q;
    for (long long a = 0; a < A.alphabet.size(); ++a) {
      int t = A.step(W, a);
      if (t >= 0 && !seen[t]) {
        seen[t] = true;
        q.push(t);
      }
    }
    bool on_cycle = seen[W];
    while (!q.empty() && !on_cycle) {
      int s = q.front();
      q.pop();
      for (long long a = 0; a < A.alphabet.size(); ++a) {
        int t = A.step(s, a);
        if (t >= 0 && !seen[t]) {
          seen[t] = true;
          q.push(t);
        }
      }
      on_cycle = seen[W];
    }
    if (!on_cycle)
      return convention == NoCycleConvention::Singletons ? Partition::singletons(K)
                                                         : Partition::one_block(K);
  }

  PAutomaton cyc = pauto_detail::cycle_value_automaton(A, W);
  std::vector<std::vector<bool>> together(K, std::vector<bool>(K, false));
  for (int i = 0; i < K; ++i) together[i][i] = true;
  for (int i = 0; i < K; ++i) {
    for (int j = i + 1; j < K; ++j) {
      // L_ji = {(p^len, eval_j - eval_i)} via a linear image
      IntMat phi(1 + N, IntVec(1 + K * N, 0));
      phi[0][0] = 1;
      for (int b = 0; b < N; ++b) {
        phi[1 + b][1 + j * N + b] = 1;
        phi[1 + b][1 + i * N + b] = -1;
      }
      PAutomaton Lji = linear_image(cyc, phi);
      // difference set L - L
      PAutomaton prod = automaton_product(Lji, Lji);
      IntMat psi(1 + N, IntVec(2 * (1 + N), 0));
      for (int b = 0; b < 1 + N; ++b) {
        psi[b][b] = 1;
        psi[b][1 + N + b] = -1;
      }
      PAutomaton diff = linear_image(prod, psi);
      // intersect with {0} x Z^N and subtract the origin
      std::vector<IntVec> slice_gens;
      for (int b = 0; b < N; ++b) {
        IntVec g(1 + N, 0);
        g[1 + b] = 1;
        slice_gens.push_back(g);
      }
      PAutomaton slice = automaton_for_subgroup(slice_gens, p, 1 + N);
      PAutomaton inter = boolean_op_saturated(BoolKind::Intersect, diff, slice);
      PAutomaton origin = automaton_for_subgroup({}, p, 1 + N);
      PAutomaton residue = boolean_op_saturated(BoolKind::Difference, inter, origin);
      together[i][j] = together[j][i] = is_empty(residue);
    }
  }
  return Partition::from_pairs(K, together);
}

// ---------------------------------------------------------------------------
// Text format: `p:`/`d:`/`states:`/`initial:`/`accepting:` headers and one
// transition per line `state (d1,...,dk) state`.

inline std::string automaton_to_text(const PAutomaton& A) {
  std::ostringstream os;
  os << "p: " << A.alphabet.p << "\n";
  os << "d: " << A.alphabet.d << "\n";
  os << "states: " << A.n_states << "\n";
  os << "initial: " << A.initial << "\n";
  os << "accepting:";
  for (int q = 0; q < A.n_states; ++q)
    if (A.accepting[q]) os << " " << q;
  os << "\n";
  for (int q = 0; q < A.n_states; ++q)
    for (long long a = 0; a < A.alphabet.size(); ++a) {
      int t = A.step(q, a);
      if (t < 0) continue;
      Symbol sym = A.alphabet.symbol(a);
      os << q << " (";
      for (int i = 0; i < A.alphabet.d; ++i) {
        if (i) os << ",";
        os << sym[i];
      }
      os << ") " << t << "\n";
    }
  return os.str();
}

inline PAutomaton automaton_from_text(const std::string& text) {
  PAutomaton A;
  std::istringstream is(text);
  std::string line;
  int p = 0, d = 0, nstates = 0;
  std::vector<int> acc;
  int initial = 0;
  std::vector<std::tuple<int, Symbol, int>> transitions;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::istringstream ls(line);
    std::string head;
    ls >> head;
    if (head == "p:") ls >> p;
    else if (head == "d:") ls >> d;
    else if (head == "states:") ls >> nstates;
    else if (head == "initial:") ls >> initial;
    else if (head == "accepting:") {
      int q;
      while (ls >> q) acc.push_back(q);
    } else {
      int from = std::stoi(head);
      std::string symtxt;
      ls >> symtxt;
      int to;
      ls >> to;
      Symbol sym;
      std::string cur;
      for (char c : symtxt) {
        if (c == '(' ) continue;
        if (c == ',' || c == ')') {
          if (!cur.empty()) sym.push_back(std::stoi(cur));
          cur.clear();
        } else cur += c;
      }
      transitions.emplace_back(from, sym, to);
    }
  }
  A.alphabet = {p, d};
  for (int q = 0; q < nstates; ++q) A.add_state(false);
  for (int q : acc) A.accepting[q] = true;
  A.initial = initial;
  for (auto& [from, sym, to] : transitions) A.set_transition(from, sym, to);
  return A;
}

}  // namespace sunit
