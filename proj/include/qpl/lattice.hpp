#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <functional>
#include <initializer_list>
#include <optional>
#include <string>
#include <vector>

namespace qpl {

inline constexpr int kMaxDim = 4;

/// Point of Z^d, 1 <= d <= kMaxDim. Unused trailing coordinates are kept at zero so
/// the defaulted ordering is lexicographic for points of equal dimension.
class LatticePoint {
 public:
  LatticePoint() = default;
  explicit LatticePoint(int dim);
  LatticePoint(std::initializer_list<int> coords);
  explicit LatticePoint(const std::vector<int>& coords);

  static LatticePoint constant(int dim, int value);

  int dim() const noexcept { return dim_; }
  int operator[](int i) const noexcept { return c_[i]; }
  int& operator[](int i) noexcept { return c_[i]; }

  /// Sup-norm |n| = max_i |n_i|.
  int sup_norm() const noexcept;
  int l1_norm() const noexcept;
  std::vector<int> to_vector() const;

  LatticePoint& operator+=(const LatticePoint& o);
  LatticePoint& operator-=(const LatticePoint& o);
  friend LatticePoint operator+(LatticePoint a, const LatticePoint& b) { return a += b; }
  friend LatticePoint operator-(LatticePoint a, const LatticePoint& b) { return a -= b; }
  LatticePoint operator-() const;

  friend auto operator<=>(const LatticePoint&, const LatticePoint&) = default;
  friend bool operator==(const LatticePoint&, const LatticePoint&) = default;

 private:
  int dim_ = 0;
  std::array<int, kMaxDim> c_{};
};

std::string to_string(const LatticePoint& p);

struct LatticePointHash {
  std::size_t operator()(const LatticePoint& p) const noexcept;
};

/// max_i |p_i - q_i|; throws InputError on dimension mismatch.
int sup_distance(const LatticePoint& p, const LatticePoint& q);

/// Axis-aligned box [lo, hi] of lattice points (inclusive). Empty when lo_i > hi_i for some i.
struct Box {
  LatticePoint lo;
  LatticePoint hi;

  static Box cube(const LatticePoint& center, int radius);
  int dim() const noexcept { return lo.dim(); }
  bool empty() const noexcept;
  bool contains(const LatticePoint& p) const noexcept;
  std::int64_t volume() const noexcept;
  Box intersect(const Box& o) const;
  bool subset_of(const Box& o) const noexcept;
};

/// Calls fn on every point of the box in lexicographic order.
void for_each_point(const Box& box, const std::function<void(const LatticePoint&)>& fn);

/// Finite subset of Z^d stored in lexicographic order with O(1) membership and
/// index lookup. The lexicographic order is the row/column order of every matrix
/// indexed by the set.
class PointSet {
 public:
  PointSet() = default;
  explicit PointSet(std::vector<LatticePoint> points);
  static PointSet from_box(const Box& box);

  std::size_t size() const noexcept { return points_.size(); }
  bool empty() const noexcept { return points_.empty(); }
  int dim() const noexcept { return points_.empty() ? 0 : points_.front().dim(); }
  const std::vector<LatticePoint>& points() const noexcept { return points_; }
  const LatticePoint& operator[](std::size_t i) const { return points_[i]; }
  auto begin() const noexcept { return points_.begin(); }
  auto end() const noexcept { return points_.end(); }

  bool contains(const LatticePoint& p) const noexcept { return index_of(p) >= 0; }
  /// Position of p in the lexicographic order, or -1.
  std::ptrdiff_t index_of(const LatticePoint& p) const noexcept;
  /// Bounding box; empty box for the empty set.
  const Box& bounds() const noexcept { return bounds_; }

  PointSet translated(const LatticePoint& t) const;
  PointSet unite(const PointSet& o) const;
  PointSet minus(const PointSet& o) const;
  PointSet intersect(const PointSet& o) const;
  bool subset_of(const PointSet& o) const;

  /// FNV-1a over the coordinates in lexicographic order, as 16 hex digits.
  std::string hash() const;

  friend bool operator==(const PointSet& a, const PointSet& b) { return a.points_ == b.points_; }

 private:
  void build_index();

  std::vector<LatticePoint> points_;
  Box bounds_;
  std::vector<std::int32_t> dense_;  // bounding-box lookup table, or empty
  std::vector<std::pair<LatticePoint, std::int32_t>> sparse_;  // sorted fallback
};

enum class Sign : std::uint8_t { None, Lt, Gt };

using SignPattern = std::vector<Sign>;

int active_count(const SignPattern& s);
std::string to_string(const SignPattern& s);
SignPattern parse_sign_pattern(const std::string& text);

/// center + ([-N,N]^d minus the corner {q : q_i carve_i 0 for every active i}).
struct ElementaryRegion {
  LatticePoint center;
  int size = 0;
  std::optional<SignPattern> carve;

  int dim() const noexcept { return center.dim(); }
  bool contains(const LatticePoint& p) const noexcept;
  /// True when p lies in the carved corner (relative to this region's center).
  bool in_corner(const LatticePoint& p) const noexcept;
  Box bounding_box() const { return Box::cube(center, size); }
  PointSet points() const;
  std::size_t cardinality() const;
  ElementaryRegion translated(const LatticePoint& t) const;

  friend bool operator==(const ElementaryRegion&, const ElementaryRegion&) = default;
};

/// All of E_N^0: the cube first, then one carved region per sign pattern with at least
/// two active entries, patterns ordered lexicographically with None < Lt < Gt.
std::vector<ElementaryRegion> enumerate_elementary_regions(int size, int dim);

struct RegionMetrics {
  int diam_a = 0;
  int dist_a_b = 0;
};

/// Sup-norm diameter of A and dist(A, B) = min over pairs. Throws InputError when A is
/// empty. dist is reported as INT_MAX when B is empty.
RegionMetrics region_metrics(const PointSet& a, const PointSet& b);
int diameter(const PointSet& a);
/// dist(p, B); INT_MAX for empty B.
int distance_to_set(const LatticePoint& p, const PointSet& b);

/// W in E_M with k in W, W inside domain and dist(k, domain \ W) >= M/2. Candidates
/// are tried cube first, then carved shapes in enumeration order; within a shape,
/// translates by increasing sup-distance of the center from k.
std::optional<ElementaryRegion> find_window(const LatticePoint& k, const PointSet& domain, int M);

/// Checks the three window postconditions directly.
bool is_window(const ElementaryRegion& w, const LatticePoint& k, const PointSet& domain, int M);

// ---------------------------------------------------------------------------------
// Region adjustment near the boundary of an elementary region.

struct GeometryParams {
  /// Exponent of the inner box radius, ceil(N_bar^eta); 0 selects 1/(10d).
  double inner_exponent = 0.0;

  double exponent_for(int dim) const { return inner_exponent > 0.0 ? inner_exponent : 1.0 / (10.0 * dim); }
};

/// ceil(x^eta) with a guard against round-off at exact integer powers.
int ceil_power(double x, double eta);

struct RegionPair {
  ElementaryRegion outer;  ///< Lambda_new, an element of E_{N_tilde}
  PointSet inner;          ///< bar Lambda_new
  int case_id = 0;         ///< 1, 2 or 3 as in the construction
  bool promoted = false;   ///< case 2 geometry that needed a collar
};

struct AdjustResult {
  std::optional<RegionPair> pair;
  std::string violated;  ///< set when infeasible
  /// Pair meeting every condition except the diameter cap on the inner set, when that cap
  /// is the only obstruction.
  std::optional<RegionPair> relaxed;
  explicit operator bool() const noexcept { return pair.has_value(); }
};

/// Shrinks n + [-N_bar, N_bar]^d into Q and fattens the inner box near the boundary of Q
/// so that every residual point has an N1-window.
AdjustResult adjust_region(const LatticePoint& n, const ElementaryRegion& Q, int N_bar, int N1,
                           const GeometryParams& params = {});

/// Independent exhaustive checker of the adjusted pair. Returns the list of violated
/// conditions (empty when the pair is valid).
std::vector<std::string> verify_region_pair(const LatticePoint& n, const ElementaryRegion& Q, int N_bar,
                                            int N1, const RegionPair& pair, const GeometryParams& params = {});

/// Lower end of the admissible outer sizes, max(ceil(N_bar/4), 4*N1).
int outer_size_floor(int N_bar, int N1);

}  // namespace qpl
