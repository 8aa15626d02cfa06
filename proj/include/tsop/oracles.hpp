#pragma once

#include <set>
#include <stdexcept>
#include <vector>

#include <tsop/automaton.hpp>
#include <tsop/object_spec.hpp>
#include <tsop/protocol.hpp>
#include <tsop/semantics.hpp>

// Brute-force reference oracles for the test suite. Everything here works by
// direct enumeration and stays independent of the SemSet and automaton
// implementations it is used to check. Not part of the production surface.

namespace tsop::oracle {

using Trace = std::vector<int>;           // a string of tag indices
using Multiset = std::vector<unsigned>;   // counts per tag

namespace detail {

inline void interleave(const Trace& u, const Trace& v, std::size_t i, std::size_t j, Trace& acc,
                       std::set<Trace>& out) {
  if (i == u.size() && j == v.size()) {
    out.insert(acc);
    return;
  }
  if (i < u.size()) {
    acc.push_back(u[i]);
    interleave(u, v, i + 1, j, acc, out);
    acc.pop_back();
  }
  if (j < v.size()) {
    acc.push_back(v[j]);
    interleave(u, v, i, j + 1, acc, out);
    acc.pop_back();
  }
}

inline std::set<Trace> strings_of(const Protocol& e, unsigned max_len) {
  switch (e.kind()) {
    case Protocol::Kind::kZero:
      return {};
    case Protocol::Kind::kOne:
      return {Trace{}};
    case Protocol::Kind::kAtom:
      return max_len >= 1 ? std::set<Trace>{Trace{e.tag()}} : std::set<Trace>{};
    case Protocol::Kind::kStar: {
      std::set<Trace> out;
      Trace t;
      for (unsigned n = 0; n <= max_len; ++n) {
        out.insert(t);
        t.push_back(e.tag());
      }
      return out;
    }
    case Protocol::Kind::kSum: {
      std::set<Trace> out = strings_of(e.left(), max_len);
      std::set<Trace> right = strings_of(e.right(), max_len);
      out.insert(right.begin(), right.end());
      return out;
    }
    case Protocol::Kind::kShuffle: {
      std::set<Trace> out;
      std::set<Trace> left = strings_of(e.left(), max_len);
      std::set<Trace> right = strings_of(e.right(), max_len);
      for (const Trace& u : left) {
        for (const Trace& v : right) {
          if (u.size() + v.size() > max_len) continue;
          Trace acc;
          interleave(u, v, 0, 0, acc, out);
        }
      }
      return out;
    }
  }
  return {};
}

}  // namespace detail

// Every trace of E with length <= max_len, enumerated from the string
// equations directly (stars expanded up to max_len repetitions, shuffles by
// interleaving) and projected to multisets.
inline std::set<Multiset> trace_oracle(const Protocol& e, const Signature& signature,
                                       unsigned max_len) {
  if (max_len > 8) throw std::invalid_argument("trace_oracle: max_len must be <= 8");
  std::set<Multiset> out;
  for (const Trace& t : detail::strings_of(e, max_len)) {
    Multiset m(static_cast<std::size_t>(signature.size()), 0);
    for (int tag : t) ++m[static_cast<std::size_t>(tag)];
    out.insert(std::move(m));
  }
  return out;
}

// The concrete multisets denoted by a SemSet, restricted to at most max_len
// total messages (omega components range over 0..max_len).
inline std::set<Multiset> concretize(const SemSet& sem, unsigned max_len) {
  std::set<Multiset> out;
  for (const GenVector& v : sem.vectors()) {
    Multiset base(v.size(), 0);
    unsigned fixed = 0;
    std::vector<std::size_t> omegas;
    bool feasible = true;
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i].is_omega()) {
        omegas.push_back(i);
      } else {
        base[i] = v[i].finite();
        fixed += v[i].finite();
        if (fixed > max_len) { feasible = false; break; }
      }
    }
    if (!feasible) continue;
    // Distribute the remaining budget over the omega positions.
    std::vector<Multiset> partial{base};
    for (std::size_t o : omegas) {
      std::vector<Multiset> next;
      for (const Multiset& m : partial) {
        unsigned used = 0;
        for (unsigned c : m) used += c;
        for (unsigned k = 0; used + k <= max_len; ++k) {
          Multiset grown = m;
          grown[o] = k;
          next.push_back(std::move(grown));
        }
      }
      partial = std::move(next);
    }
    out.insert(partial.begin(), partial.end());
  }
  return out;
}

// All legal counter tuples: the full finite counter space filtered by
// compatibility with some semantics vector. Independent of the BFS builder.
inline std::set<CounterTuple> legal_states_oracle(const ObjectSpec& spec) {
  SemSet sem = semantics(spec.protocol, spec.signature.size());
  std::vector<Bound> bounds;
  for (int t = 0; t < spec.signature.size(); ++t)
    bounds.push_back(bound(spec.protocol, t, spec.signature));

  std::set<CounterTuple> out;
  CounterTuple current(static_cast<std::size_t>(spec.signature.size()));
  auto compatible = [&](const CounterTuple& tuple) {
    for (const GenVector& v : sem.vectors()) {
      bool ok = true;
      for (std::size_t t = 0; t < tuple.size(); ++t) {
        if (tuple[t].is_dollar()) {
          if (!v[t].is_omega()) { ok = false; break; }
        } else if (!v[t].is_omega() && static_cast<unsigned>(tuple[t].exact()) > v[t].finite()) {
          ok = false;
          break;
        }
      }
      if (ok) return true;
    }
    return false;
  };
  auto enumerate = [&](auto&& self, std::size_t t) -> void {
    if (t == current.size()) {
      if (compatible(current)) out.insert(current);
      return;
    }
    if (bounds[t].is_unbounded()) {
      current[t] = CounterVal(0);
      self(self, t + 1);
      current[t] = CounterVal::dollar();
      self(self, t + 1);
    } else {
      for (unsigned k = 0; k <= bounds[t].max_count(); ++k) {
        current[t] = CounterVal(static_cast<int>(k));
        self(self, t + 1);
      }
    }
    current[t] = CounterVal(0);
  };
  enumerate(enumerate, 0);
  return out;
}

}  // namespace tsop::oracle
