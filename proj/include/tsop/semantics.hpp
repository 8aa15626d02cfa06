#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <tsop/protocol.hpp>

// Finite representation of a protocol's trace language, up to permutation:
// a canonical antichain of generalized count vectors, one count per tag,
// where a count is either an exact natural or omega ("any number").

namespace tsop {

// A per-tag message count: exact, or omega meaning any count >= 0.
class GenCount {
 public:
  constexpr GenCount() = default;
  explicit constexpr GenCount(std::uint32_t n) : raw_(n) {}

  static constexpr GenCount omega() { return GenCount(kOmega); }

  bool is_omega() const { return raw_ == kOmega; }

  std::uint32_t finite() const { return raw_; }  // meaningful only when !is_omega()

  GenCount operator+(GenCount other) const {
    if (is_omega() || other.is_omega()) return omega();
    return GenCount(raw_ + other.raw_);
  }

  bool can_decrement() const { return is_omega() || raw_ >= 1; }

  GenCount decremented() const { return is_omega() ? omega() : GenCount(raw_ - 1); }

  // Omega sorts after every finite count.
  friend auto operator<=>(const GenCount&, const GenCount&) = default;

 private:
  static constexpr std::uint32_t kOmega = std::numeric_limits<std::uint32_t>::max();
  std::uint32_t raw_ = 0;
};

// One generalized multiset of messages: counts indexed by tag.
using GenVector = std::vector<GenCount>;

// v is subsumed by w when every concrete multiset denoted by v is denoted by w.
inline bool subsumed_by(const GenVector& v, const GenVector& w) {
  for (std::size_t i = 0; i < v.size(); ++i)
    if (!(v[i] == w[i] || w[i].is_omega())) return false;
  return true;
}

// Canonical finite denotation of a well-formed protocol: an antichain of
// generalized count vectors, kept sorted. Equality decides language equality.
class SemSet {
 public:
  SemSet() = default;

  static SemSet of(std::vector<GenVector> vectors) {
    SemSet s;
    s.vectors_ = std::move(vectors);
    s.normalize();
    return s;
  }

  bool empty() const { return vectors_.empty(); }
  std::size_t size() const { return vectors_.size(); }
  const std::vector<GenVector>& vectors() const { return vectors_; }

  bool contains(const GenVector& v) const {
    return std::binary_search(vectors_.begin(), vectors_.end(), v);
  }

  SemSet unioned(const SemSet& other) const {
    std::vector<GenVector> out = vectors_;
    out.insert(out.end(), other.vectors_.begin(), other.vectors_.end());
    return of(std::move(out));
  }

  SemSet shuffled(const SemSet& other) const {
    std::vector<GenVector> out;
    out.reserve(vectors_.size() * other.vectors_.size());
    for (const GenVector& u : vectors_) {
      for (const GenVector& v : other.vectors_) {
        GenVector w(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) w[i] = u[i] + v[i];
        out.push_back(std::move(w));
      }
    }
    return of(std::move(out));
  }

  // Remove one occurrence of `tag` from every vector that has one; vectors
  // without any are dropped.
  SemSet derived(int tag) const {
    auto t = static_cast<std::size_t>(tag);
    std::vector<GenVector> out;
    for (const GenVector& v : vectors_) {
      if (!v[t].can_decrement()) continue;
      GenVector w = v;
      w[t] = w[t].decremented();
      out.push_back(std::move(w));
    }
    return of(std::move(out));
  }

  friend bool operator==(const SemSet& a, const SemSet& b) = default;

 private:
  void normalize() {
    std::sort(vectors_.begin(), vectors_.end());
    vectors_.erase(std::unique(vectors_.begin(), vectors_.end()), vectors_.end());
    std::vector<GenVector> kept;
    kept.reserve(vectors_.size());
    for (std::size_t i = 0; i < vectors_.size(); ++i) {
      bool drop = false;
      for (std::size_t j = 0; j < vectors_.size() && !drop; ++j)
        if (i != j && subsumed_by(vectors_[i], vectors_[j])) drop = true;
      if (!drop) kept.push_back(vectors_[i]);
    }
    vectors_ = std::move(kept);
  }

  std::vector<GenVector> vectors_;  // sorted antichain
};

// sem(E) over a signature of `n` tags. Precondition: well_formed(E).
inline SemSet semantics(const Protocol& e, int n) {
  auto width = static_cast<std::size_t>(n);
  switch (e.kind()) {
    case Protocol::Kind::kZero:
      return SemSet();
    case Protocol::Kind::kOne:
      return SemSet::of({GenVector(width)});
    case Protocol::Kind::kAtom: {
      GenVector v(width);
      v[static_cast<std::size_t>(e.tag())] = GenCount(1);
      return SemSet::of({std::move(v)});
    }
    case Protocol::Kind::kStar: {
      GenVector v(width);
      v[static_cast<std::size_t>(e.tag())] = GenCount::omega();
      return SemSet::of({std::move(v)});
    }
    case Protocol::Kind::kSum:
      return semantics(e.left(), n).unioned(semantics(e.right(), n));
    case Protocol::Kind::kShuffle:
      return semantics(e.left(), n).shuffled(semantics(e.right(), n));
  }
  return SemSet();
}

inline SemSet sem_derivative(const SemSet& s, int tag) { return s.derived(tag); }

inline bool is_empty(const Protocol& e, const Signature& signature) {
  return semantics(e, signature.size()).empty();
}

inline bool equiv(const Protocol& e, const Protocol& f, const Signature& signature) {
  return semantics(e, signature.size()) == semantics(f, signature.size());
}

// How often a tag may occur across the traces of a protocol.
class Bound {
 public:
  static Bound unbounded() { return Bound(true, 0); }
  static Bound finite(std::uint32_t n) { return Bound(false, n); }

  bool is_unbounded() const { return unbounded_; }
  std::uint32_t max_count() const { return n_; }  // meaningful only when bounded

  std::string to_string() const {
    return unbounded_ ? "unbounded" : std::to_string(n_) + "-bounded";
  }

  friend bool operator==(const Bound&, const Bound&) = default;

 private:
  Bound(bool u, std::uint32_t n) : unbounded_(u), n_(n) {}
  bool unbounded_;
  std::uint32_t n_;
};

// A tag is unbounded when it occurs starred; otherwise the bound is the
// largest count the tag reaches in any trace. Undefined for empty protocols.
inline Bound bound(const Protocol& e, int tag, const Signature& signature) {
  SemSet sem = semantics(e, signature.size());
  if (sem.empty())
    throw SpecError("bound of '" + signature.name(tag) + "' is undefined: protocol is empty");
  if (occurs_starred(e, tag)) return Bound::unbounded();
  std::uint32_t max = 0;
  for (const GenVector& v : sem.vectors()) {
    const GenCount& c = v[static_cast<std::size_t>(tag)];
    if (c.is_omega())
      throw std::logic_error("well-formedness violated: omega count for unstarred tag");
    max = std::max(max, c.finite());
  }
  return Bound::finite(max);
}

}  // namespace tsop
