// SPDX-License-Identifier: Apache-2.0
//
// Exact arithmetic in V = F_p^n.
//
// A point is a flat index in [0, p^n) whose base-p little-endian digits are its
// coordinates. Subspaces are kept as a canonical reduced row-echelon basis; the
// element list, a second echelon form used for coset reduction, and the dual
// coordinate map are derived once at construction and shared between copies.
#pragma once

#include <algorithm>
#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fpreg/error.hpp"

namespace fpreg {

inline constexpr std::uint64_t kMaxPoints = 10'000'000;
inline constexpr int kMaxPrime = 13;
inline constexpr int kMaxDimension = 12;

struct Point {
  std::uint32_t index = 0;
  auto operator<=>(const Point&) const = default;
};

inline bool is_prime(int p) {
  if (p < 2) return false;
  for (int d = 2; d * d <= p; ++d)
    if (p % d == 0) return false;
  return true;
}

class Space {
 public:
  Space(int p, int n) : p_(p), n_(n) {
    require_input(p >= 3 && p <= kMaxPrime && is_prime(p),
                  "p must be an odd prime in [3, " + std::to_string(kMaxPrime) + "], got " +
                      std::to_string(p));
    require_input(n >= 1 && n <= kMaxDimension,
                  "n must lie in [1, " + std::to_string(kMaxDimension) + "], got " +
                      std::to_string(n));
    std::uint64_t size = 1;
    weights_.resize(n + 1);
    for (int i = 0; i <= n; ++i) {
      weights_[i] = static_cast<std::uint32_t>(std::min<std::uint64_t>(size, UINT32_MAX));
      if (i < n) size *= static_cast<std::uint64_t>(p);
    }
    require_input(size <= kMaxPoints, "space F_" + std::to_string(p) + "^" + std::to_string(n) +
                                          " has " + std::to_string(size) +
                                          " points, above the cap of " +
                                          std::to_string(kMaxPoints));
    size_ = static_cast<std::uint32_t>(size);
    for (int c = 1; c < p; ++c)
      for (int d = 1; d < p; ++d)
        if (c * d % p == 1) inverse_[c] = d;
  }

  int p() const { return p_; }
  int n() const { return n_; }
  std::uint32_t size() const { return size_; }
  std::uint32_t weight(int coordinate) const { return weights_[coordinate]; }

  bool operator==(const Space& o) const { return p_ == o.p_ && n_ == o.n_; }

  bool valid(Point x) const { return x.index < size_; }
  void check(Point x) const {
    require_input(valid(x), "point index " + std::to_string(x.index) + " outside [0, " +
                                std::to_string(size_) + ")");
  }

  int digit(Point x, int coordinate) const {
    return static_cast<int>(x.index / weights_[coordinate] % static_cast<std::uint32_t>(p_));
  }

  std::vector<int> digits(Point x) const {
    check(x);
    std::vector<int> out(n_);
    std::uint32_t v = x.index;
    for (int i = 0; i < n_; ++i) {
      out[i] = static_cast<int>(v % p_);
      v /= p_;
    }
    return out;
  }

  Point point(std::span<const int> digits) const {
    require_input(static_cast<int>(digits.size()) == n_,
                  "expected " + std::to_string(n_) + " digits, got " +
                      std::to_string(digits.size()));
    std::uint32_t index = 0;
    for (int i = n_ - 1; i >= 0; --i) {
      require_input(digits[i] >= 0 && digits[i] < p_,
                    "digit " + std::to_string(digits[i]) + " not in [0, " + std::to_string(p_) +
                        ")");
      index = index * p_ + static_cast<std::uint32_t>(digits[i]);
    }
    return Point{index};
  }

  // Linear combination c1*a + c2*b, coordinatewise mod p.
  Point combine(int c1, Point a, int c2, Point b) const {
    const auto up = static_cast<std::uint32_t>(p_);
    const auto k1 = static_cast<std::uint32_t>(((c1 % p_) + p_) % p_);
    const auto k2 = static_cast<std::uint32_t>(((c2 % p_) + p_) % p_);
    std::uint32_t x = a.index, y = b.index, out = 0;
    for (int i = 0; i < n_; ++i) {
      out += ((x % up) * k1 + (y % up) * k2) % up * weights_[i];
      x /= up;
      y /= up;
    }
    return Point{out};
  }

  Point add(Point a, Point b) const { return combine(1, a, 1, b); }
  Point sub(Point a, Point b) const { return combine(1, a, p_ - 1, b); }
  Point neg(Point a) const { return combine(p_ - 1, a, 0, a); }
  Point scale(int c, Point a) const { return combine(c, a, 0, a); }
  Point half(Point a) const { return scale(inverse_[2], a); }
  Point midpoint(Point a, Point b) const { return combine(inverse_[2], a, inverse_[2], b); }

  // Integer residue of sum a_i b_i mod p; the character is e(pairing / p).
  int pairing(Point a, Point b) const {
    const auto up = static_cast<std::uint32_t>(p_);
    std::uint32_t x = a.index, y = b.index, acc = 0;
    for (int i = 0; i < n_; ++i) {
      acc += (x % up) * (y % up);
      x /= up;
      y /= up;
    }
    return static_cast<int>(acc % up);
  }

  int inverse(int c) const {
    c = ((c % p_) + p_) % p_;
    require_input(c != 0, "zero has no inverse mod p");
    return inverse_[c];
  }

 private:
  int p_;
  int n_;
  std::uint32_t size_ = 0;
  std::vector<std::uint32_t> weights_;
  int inverse_[kMaxPrime + 1] = {};
};

inline void require_same_space(const Space& a, const Space& b) {
  require_input(a == b, "objects live in different spaces: F_" + std::to_string(a.p()) + "^" +
                            std::to_string(a.n()) + " vs F_" + std::to_string(b.p()) + "^" +
                            std::to_string(b.n()));
}

// ---------------------------------------------------------------------------
// Linear algebra over GF(p) on dense integer rows.

namespace gf {

using Matrix = std::vector<std::vector<int>>;

// Reduced row-echelon form with columns visited in `order`; returns the pivot
// column of each surviving row. Zero rows are dropped.
inline std::vector<int> rref(Matrix& m, int p, std::span<const int> order, const Space& space) {
  std::vector<int> pivots;
  std::size_t row = 0;
  for (int col : order) {
    std::size_t sel = row;
    while (sel < m.size() && m[sel][col] == 0) ++sel;
    if (sel == m.size()) continue;
    std::swap(m[row], m[sel]);
    const int inv = space.inverse(m[row][col]);
    for (int& x : m[row]) x = x * inv % p;
    for (std::size_t r = 0; r < m.size(); ++r) {
      if (r == row || m[r][col] == 0) continue;
      const int f = m[r][col];
      for (std::size_t c = 0; c < m[r].size(); ++c) m[r][c] = ((m[r][c] - f * m[row][c]) % p + p) % p;
    }
    pivots.push_back(col);
    if (++row == m.size()) break;
  }
  m.resize(row);
  return pivots;
}

// Basis of {x : M x = 0} for an m-by-cols matrix.
inline Matrix nullspace(Matrix m, int cols, int p, const Space& space) {
  std::vector<int> order(cols);
  for (int c = 0; c < cols; ++c) order[c] = c;
  const auto pivots = rref(m, p, order, space);
  std::vector<bool> is_pivot(cols, false);
  for (int c : pivots) is_pivot[c] = true;
  Matrix basis;
  for (int f = 0; f < cols; ++f) {
    if (is_pivot[f]) continue;
    std::vector<int> x(cols, 0);
    x[f] = 1;
    for (std::size_t r = 0; r < pivots.size(); ++r) x[pivots[r]] = (p - m[r][f]) % p;
    basis.push_back(std::move(x));
  }
  return basis;
}

}  // namespace gf

// ---------------------------------------------------------------------------

class DenseSubset {
 public:
  explicit DenseSubset(Space space) : space_(std::move(space)), mask_(space_.size(), 0) {}

  DenseSubset(Space space, std::vector<std::uint8_t> mask)
      : space_(std::move(space)), mask_(std::move(mask)) {
    require_input(mask_.size() == space_.size(), "mask length does not match the space");
    for (std::uint32_t i = 0; i < mask_.size(); ++i) {
      if (mask_[i]) {
        mask_[i] = 1;
        members_.push_back(Point{i});
      }
    }
  }

  static DenseSubset from_members(const Space& space, std::span<const Point> members) {
    std::vector<std::uint8_t> mask(space.size(), 0);
    for (Point x : members) {
      space.check(x);
      mask[x.index] = 1;
    }
    return DenseSubset(space, std::move(mask));
  }

  static DenseSubset full(const Space& space) {
    return DenseSubset(space, std::vector<std::uint8_t>(space.size(), 1));
  }

  const Space& space() const { return space_; }
  bool contains(Point x) const { return x.index < mask_.size() && mask_[x.index] != 0; }
  std::uint64_t size() const { return members_.size(); }
  bool empty() const { return members_.empty(); }
  const std::vector<Point>& members() const& { return members_; }
  std::vector<Point> members() && { return std::move(members_); }
  const std::vector<std::uint8_t>& mask() const& { return mask_; }
  std::vector<std::uint8_t> mask() && { return std::move(mask_); }

  bool operator==(const DenseSubset& o) const { return space_ == o.space_ && mask_ == o.mask_; }

 private:
  Space space_;
  std::vector<std::uint8_t> mask_;
  std::vector<Point> members_;
};

class Subspace {
 public:
  // Canonical basis of span(vectors): reduced echelon form whose pivot in each
  // row is that row's lowest nonzero coordinate.
  static Subspace span(const Space& space, std::span<const Point> vectors) {
    gf::Matrix m;
    m.reserve(vectors.size());
    for (Point v : vectors) m.push_back(space.digits(v));
    return Subspace(space, std::move(m));
  }

  static Subspace from_rows(const Space& space, gf::Matrix rows) {
    for (const auto& r : rows) (void)space.point(r);  // validates digits and length
    return Subspace(space, std::move(rows));
  }

  static Subspace whole(const Space& space) {
    std::vector<Point> units;
    for (int i = 0; i < space.n(); ++i) units.push_back(Point{space.weight(i)});
    return span(space, units);
  }

  static Subspace zero(const Space& space) { return Subspace(space, {}); }

  const Space& space() const { return d_->space; }
  int dim() const { return static_cast<int>(d_->rows.size()); }
  std::uint32_t size() const { return static_cast<std::uint32_t>(d_->elements.size()); }
  // |V/H|
  std::uint32_t index() const { return space().size() / size(); }
  const gf::Matrix& rows() const { return d_->rows; }
  const std::vector<Point>& basis() const& { return d_->basis; }
  std::vector<Point> basis() && { return d_->basis; }
  const std::vector<int>& pivots() const { return d_->pivots; }
  // Coordinates left untouched by coset reduction, ascending.
  const std::vector<int>& free_coordinates() const { return d_->free_coordinates; }

  // Elements in coefficient order: entry c is sum_k c_k * basis[k] where c_k is
  // base-p digit k of c. This is the coordinatization H ~ F_p^dim.
  const std::vector<Point>& elements() const& { return d_->elements; }
  std::vector<Point> elements() && { return d_->elements; }

  bool contains(Point x) const {
    if (!space().valid(x)) return false;
    return reduce(x).index == 0;
  }

  // Coefficient index of h in elements(); h must lie in H.
  std::uint32_t coordinates(Point h) const {
    const int p = space().p();
    std::uint32_t c = 0;
    for (int k = dim() - 1; k >= 0; --k)
      c = c * p + static_cast<std::uint32_t>(space().digit(h, d_->pivots[k]));
    return c;
  }

  // Minimal flat index in the coset v + H.
  Point reduce(Point v) const {
    const Space& s = space();
    for (std::size_t k = 0; k < d_->top_rows.size(); ++k) {
      const int c = s.digit(v, d_->top_pivots[k]);
      if (c != 0) v = s.combine(1, v, s.p() - c, d_->top_basis[k]);
    }
    return v;
  }

  // Position of the coset v + H among coset representatives in increasing order.
  std::uint32_t coset_position(Point v) const {
    const Point r = reduce(v);
    std::uint32_t pos = 0;
    const auto& free = d_->free_coordinates;
    for (int i = static_cast<int>(free.size()) - 1; i >= 0; --i)
      pos = pos * space().p() + static_cast<std::uint32_t>(space().digit(r, free[i]));
    return pos;
  }

  // Characters of H are indexed by V/H^perp ~ F_p^dim through
  // eta_k = <basis_k, xi>. Returns the flat index of eta.
  std::uint32_t dual_index(Point xi) const {
    const Space& s = space();
    std::uint32_t e = 0;
    for (int k = dim() - 1; k >= 0; --k)
      e = e * s.p() + static_cast<std::uint32_t>(s.pairing(d_->basis[k], xi));
    return e;
  }

  // Minimal-index frequency xi with the given dual index: eta_k placed at the
  // pivot coordinate of row k, zeros elsewhere.
  Point dual_rep(std::uint32_t eta) const {
    const Space& s = space();
    std::uint32_t out = 0;
    for (int k = 0; k < dim(); ++k) {
      out += (eta % s.p()) * s.weight(d_->pivots[k]);
      eta /= s.p();
    }
    return Point{out};
  }

  bool operator==(const Subspace& o) const {
    return space() == o.space() && rows() == o.rows();
  }

  bool is_subspace_of(const Subspace& o) const {
    return std::all_of(basis().begin(), basis().end(), [&](Point b) { return o.contains(b); });
  }

 private:
  struct Data {
    explicit Data(Space s) : space(std::move(s)) {}
    Space space;
    gf::Matrix rows;
    std::vector<int> pivots;
    std::vector<Point> basis;
    std::vector<Point> elements;
    std::vector<Point> top_basis;
    gf::Matrix top_rows;
    std::vector<int> top_pivots;
    std::vector<int> free_coordinates;
  };

  Subspace(const Space& space, gf::Matrix m) {
    auto d = std::make_shared<Data>(space);
    const int n = space.n();
    const int p = space.p();
    std::vector<int> low(n), high(n);
    for (int i = 0; i < n; ++i) {
      low[i] = i;
      high[i] = n - 1 - i;
    }
    d->top_rows = m;
    d->pivots = gf::rref(m, p, low, space);
    d->rows = std::move(m);
    d->top_pivots = gf::rref(d->top_rows, p, high, space);
    for (const auto& r : d->rows) d->basis.push_back(space.point(r));
    for (const auto& r : d->top_rows) d->top_basis.push_back(space.point(r));
    std::vector<bool> pivot(n, false);
    for (int c : d->top_pivots) pivot[c] = true;
    for (int i = 0; i < n; ++i)
      if (!pivot[i]) d->free_coordinates.push_back(i);

    std::uint64_t size = 1;
    for (std::size_t k = 0; k < d->basis.size(); ++k) size *= p;
    d->elements.reserve(size);
    d->elements.push_back(Point{0});
    for (std::size_t k = 0; k < d->basis.size(); ++k) {
      const std::size_t block = d->elements.size();
      for (int c = 1; c < p; ++c)
        for (std::size_t j = 0; j < block; ++j)
          d->elements.push_back(space.combine(1, d->elements[j], c, d->basis[k]));
    }
    d_ = std::move(d);
  }

  std::shared_ptr<const Data> d_;
};

// Canonical coset representatives of V/H: the minimal index in each coset,
// listed in increasing order. These are exactly the points whose digits vanish
// at the top-pivot coordinates of H.
class CosetSystem {
 public:
  explicit CosetSystem(Subspace h) : h_(std::move(h)) {
    const Space& s = h_.space();
    const auto& free = h_.free_coordinates();
    reps_.reserve(h_.index());
    for (std::uint32_t i = 0; i < h_.index(); ++i) {
      std::uint32_t c = i, idx = 0;
      for (int f : free) {
        idx += (c % s.p()) * s.weight(f);
        c /= s.p();
      }
      reps_.push_back(Point{idx});
    }
  }

  const Subspace& subspace() const { return h_; }
  const std::vector<Point>& reps() const& { return reps_; }
  std::vector<Point> reps() && { return std::move(reps_); }
  std::uint32_t count() const { return static_cast<std::uint32_t>(reps_.size()); }
  std::uint32_t position(Point v) const { return h_.coset_position(v); }
  Point rep_of(Point v) const { return h_.reduce(v); }

 private:
  Subspace h_;
  std::vector<Point> reps_;
};

inline CosetSystem coset_representatives(const Subspace& h) { return CosetSystem(h); }

// H' = {x in H : <x, xi> = 0 for every xi}.
inline Subspace annihilator_within(const Subspace& h, std::span<const Point> frequencies) {
  const Space& s = h.space();
  gf::Matrix constraints;
  for (Point xi : frequencies) {
    s.check(xi);
    std::vector<int> row(h.dim());
    bool nonzero = false;
    for (int k = 0; k < h.dim(); ++k) {
      row[k] = s.pairing(h.basis()[k], xi);
      nonzero |= row[k] != 0;
    }
    if (nonzero) constraints.push_back(std::move(row));
  }
  if (constraints.empty()) return h;
  const auto kernel = gf::nullspace(std::move(constraints), h.dim(), s.p(), s);
  std::vector<Point> vectors;
  for (const auto& c : kernel) {
    Point x{0};
    for (int k = 0; k < h.dim(); ++k)
      if (c[k] != 0) x = s.combine(1, x, c[k], h.basis()[k]);
    vectors.push_back(x);
  }
  return Subspace::span(s, vectors);
}

// A_H^v = (A + v) ∩ H, i.e. the h in H with h - v in A.
inline DenseSubset localize(const DenseSubset& a, const Subspace& h, Point v) {
  const Space& s = a.space();
  require_same_space(s, h.space());
  s.check(v);
  std::vector<std::uint8_t> mask(s.size(), 0);
  for (Point x : h.elements())
    if (a.contains(s.sub(x, v))) mask[x.index] = 1;
  return DenseSubset(s, std::move(mask));
}

// |A_H^v| for every coset representative v (indexed by coset position).
// a + v lies in H exactly when v lies in the coset of -a.
inline std::vector<std::uint64_t> localization_sizes(const DenseSubset& a, const CosetSystem& cosets) {
  const Space& s = a.space();
  require_same_space(s, cosets.subspace().space());
  std::vector<std::uint64_t> counts(cosets.count(), 0);
  for (Point x : a.members()) ++counts[cosets.position(s.neg(x))];
  return counts;
}

}  // namespace fpreg
