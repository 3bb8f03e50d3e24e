#include "qpl/lattice.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <map>
#include <mutex>
#include <set>
#include <sstream>

#include "qpl/errors.hpp"

namespace qpl {

// ---------------------------------------------------------------------------------
// LatticePoint

LatticePoint::LatticePoint(int dim) : dim_(dim) {
  if (dim < 1 || dim > kMaxDim) throw InputError("lattice dimension must be in [1, " + std::to_string(kMaxDim) + "]");
}

LatticePoint::LatticePoint(std::initializer_list<int> coords) : LatticePoint(static_cast<int>(coords.size())) {
  std::copy(coords.begin(), coords.end(), c_.begin());
}

LatticePoint::LatticePoint(const std::vector<int>& coords) : LatticePoint(static_cast<int>(coords.size())) {
  std::copy(coords.begin(), coords.end(), c_.begin());
}

LatticePoint LatticePoint::constant(int dim, int value) {
  LatticePoint p(dim);
  for (int i = 0; i < dim; ++i) p.c_[i] = value;
  return p;
}

int LatticePoint::sup_norm() const noexcept {
  int m = 0;
  for (int i = 0; i < dim_; ++i) m = std::max(m, std::abs(c_[i]));
  return m;
}

int LatticePoint::l1_norm() const noexcept {
  int s = 0;
  for (int i = 0; i < dim_; ++i) s += std::abs(c_[i]);
  return s;
}

std::vector<int> LatticePoint::to_vector() const { return {c_.begin(), c_.begin() + dim_}; }

LatticePoint& LatticePoint::operator+=(const LatticePoint& o) {
  if (o.dim_ != dim_) throw InputError("lattice point dimension mismatch");
  for (int i = 0; i < dim_; ++i) c_[i] += o.c_[i];
  return *this;
}

LatticePoint& LatticePoint::operator-=(const LatticePoint& o) {
  if (o.dim_ != dim_) throw InputError("lattice point dimension mismatch");
  for (int i = 0; i < dim_; ++i) c_[i] -= o.c_[i];
  return *this;
}

LatticePoint LatticePoint::operator-() const {
  LatticePoint p = *this;
  for (int i = 0; i < dim_; ++i) p.c_[i] = -c_[i];
  return p;
}

std::string to_string(const LatticePoint& p) {
  std::ostringstream os;
  os << '(';
  for (int i = 0; i < p.dim(); ++i) os << (i ? "," : "") << p[i];
  os << ')';
  return os.str();
}

std::size_t LatticePointHash::operator()(const LatticePoint& p) const noexcept {
  std::uint64_t h = 1469598103934665603ull;
  for (int i = 0; i < p.dim(); ++i) {
    h ^= static_cast<std::uint32_t>(p[i]);
    h *= 1099511628211ull;
  }
  return static_cast<std::size_t>(h);
}

int sup_distance(const LatticePoint& p, const LatticePoint& q) {
  if (p.dim() != q.dim()) throw InputError("sup_distance: dimension mismatch");
  int m = 0;
  for (int i = 0; i < p.dim(); ++i) m = std::max(m, std::abs(p[i] - q[i]));
  return m;
}

// ---------------------------------------------------------------------------------
// Box

Box Box::cube(const LatticePoint& center, int radius) {
  return {center - LatticePoint::constant(center.dim(), radius), center + LatticePoint::constant(center.dim(), radius)};
}

bool Box::empty() const noexcept {
  for (int i = 0; i < lo.dim(); ++i)
    if (lo[i] > hi[i]) return true;
  return lo.dim() == 0;
}

bool Box::contains(const LatticePoint& p) const noexcept {
  for (int i = 0; i < lo.dim(); ++i)
    if (p[i] < lo[i] || p[i] > hi[i]) return false;
  return true;
}

std::int64_t Box::volume() const noexcept {
  if (empty()) return 0;
  std::int64_t v = 1;
  for (int i = 0; i < lo.dim(); ++i) v *= static_cast<std::int64_t>(hi[i] - lo[i] + 1);
  return v;
}

Box Box::intersect(const Box& o) const {
  Box b = *this;
  for (int i = 0; i < lo.dim(); ++i) {
    b.lo[i] = std::max(lo[i], o.lo[i]);
    b.hi[i] = std::min(hi[i], o.hi[i]);
  }
  return b;
}

bool Box::subset_of(const Box& o) const noexcept {
  if (empty()) return true;
  for (int i = 0; i < lo.dim(); ++i)
    if (lo[i] < o.lo[i] || hi[i] > o.hi[i]) return false;
  return true;
}

void for_each_point(const Box& box, const std::function<void(const LatticePoint&)>& fn) {
  if (box.empty()) return;
  const int d = box.dim();
  LatticePoint p = box.lo;
  while (true) {
    fn(p);
    int i = d - 1;
    while (i >= 0) {
      if (++p[i] <= box.hi[i]) break;
      p[i] = box.lo[i];
      --i;
    }
    if (i < 0) return;
  }
}

// ---------------------------------------------------------------------------------
// PointSet

namespace {
constexpr std::int64_t kDenseIndexLimit = std::int64_t{1} << 24;
}

PointSet::PointSet(std::vector<LatticePoint> points) : points_(std::move(points)) {
  if (!points_.empty()) {
    const int d = points_.front().dim();
    for (const auto& p : points_)
      if (p.dim() != d) throw InputError("PointSet: mixed dimensions");
  }
  std::sort(points_.begin(), points_.end());
  points_.erase(std::unique(points_.begin(), points_.end()), points_.end());
  build_index();
}

PointSet PointSet::from_box(const Box& box) {
  std::vector<LatticePoint> pts;
  pts.reserve(static_cast<std::size_t>(box.volume()));
  for_each_point(box, [&](const LatticePoint& p) { pts.push_back(p); });
  return PointSet(std::move(pts));
}

void PointSet::build_index() {
  dense_.clear();
  sparse_.clear();
  if (points_.empty()) {
    bounds_ = Box{};
    return;
  }
  const int d = points_.front().dim();
  bounds_ = Box{points_.front(), points_.front()};
  for (const auto& p : points_)
    for (int i = 0; i < d; ++i) {
      bounds_.lo[i] = std::min(bounds_.lo[i], p[i]);
      bounds_.hi[i] = std::max(bounds_.hi[i], p[i]);
    }
  const std::int64_t vol = bounds_.volume();
  if (vol <= kDenseIndexLimit && vol <= 64 * static_cast<std::int64_t>(points_.size()) + 4096) {
    dense_.assign(static_cast<std::size_t>(vol), -1);
    for (std::size_t k = 0; k < points_.size(); ++k) {
      std::int64_t off = 0;
      for (int i = 0; i < d; ++i) off = off * (bounds_.hi[i] - bounds_.lo[i] + 1) + (points_[k][i] - bounds_.lo[i]);
      dense_[static_cast<std::size_t>(off)] = static_cast<std::int32_t>(k);
    }
  } else {
    sparse_.reserve(points_.size());
    for (std::size_t k = 0; k < points_.size(); ++k) sparse_.emplace_back(points_[k], static_cast<std::int32_t>(k));
  }
}

std::ptrdiff_t PointSet::index_of(const LatticePoint& p) const noexcept {
  if (points_.empty() || p.dim() != bounds_.dim() || !bounds_.contains(p)) return -1;
  if (!dense_.empty()) {
    std::int64_t off = 0;
    for (int i = 0; i < p.dim(); ++i) off = off * (bounds_.hi[i] - bounds_.lo[i] + 1) + (p[i] - bounds_.lo[i]);
    return dense_[static_cast<std::size_t>(off)];
  }
  auto it = std::lower_bound(sparse_.begin(), sparse_.end(), p,
                             [](const auto& e, const LatticePoint& q) { return e.first < q; });
  return (it != sparse_.end() && it->first == p) ? it->second : -1;
}

PointSet PointSet::translated(const LatticePoint& t) const {
  std::vector<LatticePoint> pts;
  pts.reserve(points_.size());
  for (const auto& p : points_) pts.push_back(p + t);
  return PointSet(std::move(pts));
}

PointSet PointSet::unite(const PointSet& o) const {
  std::vector<LatticePoint> pts;
  pts.reserve(size() + o.size());
  std::set_union(begin(), end(), o.begin(), o.end(), std::back_inserter(pts));
  return PointSet(std::move(pts));
}

PointSet PointSet::minus(const PointSet& o) const {
  std::vector<LatticePoint> pts;
  std::set_difference(begin(), end(), o.begin(), o.end(), std::back_inserter(pts));
  return PointSet(std::move(pts));
}

PointSet PointSet::intersect(const PointSet& o) const {
  std::vector<LatticePoint> pts;
  std::set_intersection(begin(), end(), o.begin(), o.end(), std::back_inserter(pts));
  return PointSet(std::move(pts));
}

bool PointSet::subset_of(const PointSet& o) const {
  return std::all_of(begin(), end(), [&](const LatticePoint& p) { return o.contains(p); });
}

std::string PointSet::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  auto mix = [&h](std::uint32_t v) {
    for (int b = 0; b < 4; ++b) {
      h ^= (v >> (8 * b)) & 0xffu;
      h *= 1099511628211ull;
    }
  };
  for (const auto& p : points_)
    for (int i = 0; i < p.dim(); ++i) mix(static_cast<std::uint32_t>(p[i]));
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

// ---------------------------------------------------------------------------------
// Elementary regions

int active_count(const SignPattern& s) {
  return static_cast<int>(std::count_if(s.begin(), s.end(), [](Sign c) { return c != Sign::None; }));
}

std::string to_string(const SignPattern& s) {
  std::string out;
  for (Sign c : s) out += c == Sign::Lt ? '<' : c == Sign::Gt ? '>' : '.';
  return out;
}

SignPattern parse_sign_pattern(const std::string& text) {
  SignPattern s;
  for (char c : text) {
    if (c == '<') s.push_back(Sign::Lt);
    else if (c == '>') s.push_back(Sign::Gt);
    else if (c == '.') s.push_back(Sign::None);
    else throw InputError("sign pattern accepts only '<', '>' and '.'");
  }
  return s;
}

bool ElementaryRegion::in_corner(const LatticePoint& p) const noexcept {
  if (!carve) return false;
  for (int i = 0; i < center.dim(); ++i) {
    const int q = p[i] - center[i];
    switch ((*carve)[i]) {
      case Sign::Lt:
        if (!(q < 0)) return false;
        break;
      case Sign::Gt:
        if (!(q > 0)) return false;
        break;
      case Sign::None:
        break;
    }
  }
  return true;
}

bool ElementaryRegion::contains(const LatticePoint& p) const noexcept {
  if (p.dim() != center.dim()) return false;
  for (int i = 0; i < center.dim(); ++i)
    if (std::abs(p[i] - center[i]) > size) return false;
  return !in_corner(p);
}

PointSet ElementaryRegion::points() const {
  std::vector<LatticePoint> pts;
  pts.reserve(static_cast<std::size_t>(bounding_box().volume()));
  for_each_point(bounding_box(), [&](const LatticePoint& p) {
    if (!in_corner(p)) pts.push_back(p);
  });
  return PointSet(std::move(pts));
}

std::size_t ElementaryRegion::cardinality() const {
  std::size_t count = 0;
  for_each_point(bounding_box(), [&](const LatticePoint& p) { count += in_corner(p) ? 0 : 1; });
  return count;
}

ElementaryRegion ElementaryRegion::translated(const LatticePoint& t) const {
  ElementaryRegion r = *this;
  r.center += t;
  return r;
}

std::vector<ElementaryRegion> enumerate_elementary_regions(int size, int dim) {
  if (size < 1) throw InputError("elementary region size must be >= 1");
  const LatticePoint origin(dim);
  std::vector<ElementaryRegion> out{{origin, size, std::nullopt}};
  int total = 1;
  for (int i = 0; i < dim; ++i) total *= 3;
  for (int code = 0; code < total; ++code) {
    SignPattern s(dim);
    int c = code;
    for (int i = dim - 1; i >= 0; --i) {
      s[i] = static_cast<Sign>(c % 3);
      c /= 3;
    }
    if (active_count(s) >= 2) out.push_back({origin, size, s});
  }
  return out;
}

// ---------------------------------------------------------------------------------
// Metrics and windows

int diameter(const PointSet& a) {
  if (a.empty()) throw InputError("diameter of an empty set");
  int m = 0;
  for (int i = 0; i < a.dim(); ++i) m = std::max(m, a.bounds().hi[i] - a.bounds().lo[i]);
  return m;
}

int distance_to_set(const LatticePoint& p, const PointSet& b) {
  int best = INT_MAX;
  for (const auto& q : b) {
    best = std::min(best, sup_distance(p, q));
    if (best == 0) break;
  }
  return best;
}

RegionMetrics region_metrics(const PointSet& a, const PointSet& b) {
  if (a.empty()) throw InputError("region_metrics: first set is empty");
  if (!b.empty() && a.dim() != b.dim()) throw InputError("region_metrics: dimension mismatch");
  RegionMetrics m;
  m.diam_a = diameter(a);
  m.dist_a_b = INT_MAX;
  for (const auto& p : a) {
    m.dist_a_b = std::min(m.dist_a_b, distance_to_set(p, b));
    if (m.dist_a_b == 0) break;
  }
  return m;
}

namespace {

int largest_below_half(int M) { return (M + 1) / 2 - 1; }

struct WindowCatalog {
  std::vector<ElementaryRegion> shapes;
  std::vector<LatticePoint> offsets;
};

const WindowCatalog& window_catalog(int M, int dim) {
  static std::mutex mu;
  static std::map<std::pair<int, int>, WindowCatalog> cache;
  std::lock_guard lock(mu);
  auto [it, inserted] = cache.try_emplace({M, dim});
  if (inserted) {
    it->second.shapes = enumerate_elementary_regions(M, dim);
    for_each_point(Box::cube(LatticePoint(dim), M), [&](const LatticePoint& t) { it->second.offsets.push_back(t); });
    std::stable_sort(it->second.offsets.begin(), it->second.offsets.end(),
                     [](const LatticePoint& a, const LatticePoint& b) { return a.sup_norm() < b.sup_norm(); });
  }
  return it->second;
}

}  // namespace

bool is_window(const ElementaryRegion& w, const LatticePoint& k, const PointSet& domain, int M) {
  if (w.size != M || !w.contains(k)) return false;
  bool ok = true;
  for_each_point(w.bounding_box(), [&](const LatticePoint& p) {
    if (ok && !w.in_corner(p) && !domain.contains(p)) ok = false;
  });
  if (!ok) return false;
  for_each_point(Box::cube(k, largest_below_half(M)), [&](const LatticePoint& p) {
    if (ok && domain.contains(p) && !w.contains(p)) ok = false;
  });
  return ok;
}

std::optional<ElementaryRegion> find_window(const LatticePoint& k, const PointSet& domain, int M) {
  if (M < 1) throw InputError("find_window: M must be >= 1");
  if (!domain.contains(k)) throw InputError("find_window: k is not in the domain");
  const auto& cat = window_catalog(M, k.dim());
  for (const auto& shape : cat.shapes) {
    for (const auto& t : cat.offsets) {
      ElementaryRegion w = shape.translated(k + t);
      if (is_window(w, k, domain, M)) return w;
    }
  }
  return std::nullopt;
}

// ---------------------------------------------------------------------------------
// Region adjustment

int ceil_power(double x, double eta) {
  const double v = std::pow(x, eta);
  const double r = std::round(v);
  if (std::abs(v - r) < 1e-9 * std::max(1.0, r)) return static_cast<int>(r);
  return static_cast<int>(std::ceil(v));
}

int outer_size_floor(int N_bar, int N1) { return std::max((N_bar + 3) / 4, 4 * N1); }

namespace {

bool box_in_region(const Box& b, const ElementaryRegion& Q) {
  if (!b.subset_of(Q.bounding_box())) return false;
  if (!Q.carve) return true;
  // The box meets the corner iff every active half-space meets the box.
  for (int i = 0; i < Q.dim(); ++i) {
    const Sign s = (*Q.carve)[i];
    if (s == Sign::Lt && b.lo[i] >= Q.center[i]) return true;
    if (s == Sign::Gt && b.hi[i] <= Q.center[i]) return true;
  }
  return false;
}

/// dist(box, inner boundary of Q) for a box contained in Q.
int distance_to_boundary(const Box& b, const PointSet& Qpts) {
  int best = INT_MAX;
  const int d = b.dim();
  for (const auto& p : Qpts) {
    bool boundary = false;
    for_each_point(Box::cube(p, 1), [&](const LatticePoint& q) {
      if (!boundary && !Qpts.contains(q)) boundary = true;
    });
    if (!boundary) continue;
    int dist = 0;
    for (int i = 0; i < d; ++i) dist = std::max({dist, b.lo[i] - p[i], p[i] - b.hi[i]});
    best = std::min(best, dist);
  }
  return best;
}

std::vector<ElementaryRegion> outer_candidates(const LatticePoint& n, const ElementaryRegion& Q, int N_bar, int Nt) {
  const int d = n.dim();
  const int h = largest_below_half(Nt);
  const Box C = Q.bounding_box();
  LatticePoint lo(d), hi(d), base(d);
  for (int i = 0; i < d; ++i) {
    lo[i] = std::max({C.lo[i] + Nt, n[i] - (N_bar - Nt), std::min(C.hi[i], n[i] + h) - Nt});
    hi[i] = std::min({C.hi[i] - Nt, n[i] + (N_bar - Nt), std::max(C.lo[i], n[i] - h) + Nt});
    if (lo[i] > hi[i]) return {};
    base[i] = std::clamp(n[i], lo[i], hi[i]);
  }
  if (!Q.carve) return {{base, Nt, std::nullopt}};

  std::vector<ElementaryRegion> out;
  std::optional<LatticePoint> best_cube;
  for (int i = 0; i < d; ++i) {
    const Sign s = (*Q.carve)[i];
    if (s == Sign::None) continue;
    int a = lo[i], b = hi[i];
    if (s == Sign::Lt) a = std::max(a, Q.center[i] + Nt);
    else b = std::min(b, Q.center[i] - Nt);
    if (a > b) continue;
    LatticePoint m = base;
    m[i] = std::clamp(n[i], a, b);
    if (!best_cube || (m - n).sup_norm() < (*best_cube - n).sup_norm()) best_cube = m;
  }
  if (best_cube) out.push_back({*best_cube, Nt, std::nullopt});

  LatticePoint m = base;
  bool aligned = true;
  for (int i = 0; i < d && aligned; ++i) {
    if ((*Q.carve)[i] == Sign::None) continue;
    if (Q.center[i] < lo[i] || Q.center[i] > hi[i]) aligned = false;
    m[i] = Q.center[i];
  }
  if (aligned) out.push_back({m, Nt, Q.carve});
  return out;
}

bool residual_has_windows(const PointSet& residual, int N1) {
  return std::all_of(residual.begin(), residual.end(),
                     [&](const LatticePoint& k) { return find_window(k, residual, N1).has_value(); });
}

struct InnerAttempt {
  std::optional<RegionPair> pair;
  std::string violated;
  std::optional<RegionPair> relaxed;
};

InnerAttempt build_inner(const ElementaryRegion& Q, const PointSet& Qpts, const ElementaryRegion& outer,
                         const PointSet& core, const Box& lam_bar, int N1, double eta) {
  const int d = outer.dim();
  const PointSet outer_pts = outer.points();
  if (!core.subset_of(outer_pts))
    return {std::nullopt, "nesting: inner box does not fit in the outer region", std::nullopt};

  const bool inside = box_in_region(lam_bar, Q);
  const int boundary_dist = inside ? distance_to_boundary(lam_bar, Qpts) : -1;
  const int case_id = boundary_dist >= 2 * N1 ? 2 : 3;
  const int diam_cap = 4 * ceil_power(outer.size, eta);

  const Box cb = core.bounds();
  const Box ob = outer.bounding_box();
  std::vector<std::array<int, 2>> gaps(d);
  std::set<int> thresholds{0};
  for (int i = 0; i < d; ++i) {
    gaps[i] = {cb.lo[i] - ob.lo[i], ob.hi[i] - cb.hi[i]};
    thresholds.insert(gaps[i][0] + 1);
    thresholds.insert(gaps[i][1] + 1);
  }

  for (int t : thresholds) {
    Box ext = cb;
    for (int i = 0; i < d; ++i) {
      if (gaps[i][0] < t) ext.lo[i] = ob.lo[i];
      if (gaps[i][1] < t) ext.hi[i] = ob.hi[i];
    }
    std::vector<LatticePoint> pts;
    for_each_point(ext, [&](const LatticePoint& p) {
      if (outer.contains(p)) pts.push_back(p);
    });
    PointSet inner = PointSet(std::move(pts)).unite(core);
    if (!residual_has_windows(outer_pts.minus(inner), N1)) continue;
    const int diam = diameter(inner);
    RegionPair pair{outer, std::move(inner), case_id, case_id == 2 && t > 0};
    if (pair.promoted) pair.case_id = 3;
    if (diam > diam_cap)
      return {std::nullopt,
              "inner_diameter: diam(inner) = " + std::to_string(diam) + " exceeds 4*ceil(N_tilde^eta) = " +
                  std::to_string(diam_cap) + " (outer size " + std::to_string(outer.size) + ")",
              std::move(pair)};
    return {std::move(pair), {}, std::nullopt};
  }
  return {std::nullopt, "residual_windows: no collar leaves every residual point an N1-window", std::nullopt};
}

}  // namespace

AdjustResult adjust_region(const LatticePoint& n, const ElementaryRegion& Q, int N_bar, int N1,
                           const GeometryParams& params) {
  if (n.dim() != Q.dim()) throw InputError("adjust_region: dimension mismatch");
  if (!Q.contains(n)) throw InputError("adjust_region: n is not in Q");
  if (N_bar < 1 || N1 < 1) throw InputError("adjust_region: sizes must be >= 1");

  const int d = n.dim();
  const double eta = params.exponent_for(d);
  const int r = ceil_power(N_bar, eta);
  const Box lam = Box::cube(n, N_bar);
  const Box lam_bar = Box::cube(n, r);
  const int size_floor = outer_size_floor(N_bar, N1);
  if (size_floor > N_bar)
    return {std::nullopt, "outer_size: size floor max(N_bar/4, 4*N1) = " + std::to_string(size_floor) +
                              " exceeds N_bar = " + std::to_string(N_bar), std::nullopt};

  const PointSet Qpts = Q.points();
  std::vector<LatticePoint> core_pts;
  for_each_point(lam_bar, [&](const LatticePoint& p) {
    if (Q.contains(p)) core_pts.push_back(p);
  });
  const PointSet core(std::move(core_pts));

  if (box_in_region(lam, Q)) {
    ElementaryRegion outer{n, N_bar, std::nullopt};
    const PointSet residual = outer.points().minus(core);
    if (!residual_has_windows(residual, N1))
      return {std::nullopt, "residual_windows: residual of the unshrunk cube lacks N1-windows", std::nullopt};
    const int diam_cap = 4 * ceil_power(N_bar, eta);
    if (diameter(core) > diam_cap) return {std::nullopt, "inner_diameter: inner box exceeds 4*ceil(N_bar^eta)", std::nullopt};
    return {RegionPair{outer, core, 1, false}, {}, std::nullopt};
  }

  std::string last = "placement: no elementary region of admissible size fits in Q around n";
  std::optional<RegionPair> relaxed;
  for (int Nt = N_bar; Nt >= size_floor; --Nt) {
    for (const auto& outer : outer_candidates(n, Q, N_bar, Nt)) {
      InnerAttempt attempt = build_inner(Q, Qpts, outer, core, lam_bar, N1, eta);
      if (attempt.pair) return {std::move(attempt.pair), {}, std::nullopt};
      if (attempt.relaxed && (!relaxed || diameter(attempt.relaxed->inner) < diameter(relaxed->inner)))
        relaxed = std::move(attempt.relaxed);
      last = attempt.violated;
    }
  }
  if (relaxed) last = "inner_diameter: smallest inner diameter found is " + std::to_string(diameter(relaxed->inner)) +
                      ", cap 4*ceil(N_tilde^eta) = " + std::to_string(4 * ceil_power(relaxed->outer.size, eta));
  return {std::nullopt, last, std::move(relaxed)};
}

// ---------------------------------------------------------------------------------
// Exhaustive checker. Uses std::set membership and full scans only, so that it shares
// no lookup machinery with the construction above.

namespace {

bool naive_window_exists(const LatticePoint& k, const std::set<LatticePoint>& domain, int M) {
  const int d = k.dim();
  for (const auto& shape : enumerate_elementary_regions(M, d)) {
    bool found = false;
    for_each_point(Box::cube(k, M), [&](const LatticePoint& c) {
      if (found) return;
      const ElementaryRegion w = shape.translated(c);
      if (!w.contains(k)) return;
      for (const auto& p : w.points())
        if (!domain.count(p)) return;
      for (const auto& p : domain)
        if (!w.contains(p) && 2 * sup_distance(k, p) < M) return;
      found = true;
    });
    if (found) return true;
  }
  return false;
}

}  // namespace

std::vector<std::string> verify_region_pair(const LatticePoint& n, const ElementaryRegion& Q, int N_bar, int N1,
                                            const RegionPair& pair, const GeometryParams& params) {
  std::vector<std::string> bad;
  const int d = n.dim();
  const double eta = params.exponent_for(d);
  const int Nt = pair.outer.size;
  const int r = ceil_power(N_bar, eta);

  if (Nt < outer_size_floor(N_bar, N1) || Nt > N_bar) bad.push_back("outer_size: outer size outside [floor, N_bar]");

  const PointSet outer = pair.outer.points();
  const std::set<LatticePoint> outer_set(outer.begin(), outer.end());
  const std::set<LatticePoint> inner_set(pair.inner.begin(), pair.inner.end());

  // nesting
  for (const auto& p : outer)
    if (sup_distance(p, n) > N_bar) {
      bad.push_back("nesting: outer region leaves n + Lambda at " + to_string(p));
      break;
    }
  for (const auto& p : pair.inner)
    if (!outer_set.count(p)) {
      bad.push_back("nesting: inner set leaves the outer region at " + to_string(p));
      break;
    }
  for (const auto& p : Q.points())
    if (sup_distance(p, n) <= r && !inner_set.count(p)) {
      bad.push_back("nesting: (n + bar Lambda) & Q not contained in inner at " + to_string(p));
      break;
    }

  // placement
  if (!outer_set.count(n)) bad.push_back("placement: n not in outer region");
  for (const auto& p : outer)
    if (!Q.contains(p)) {
      bad.push_back("placement: outer region leaves Q at " + to_string(p));
      break;
    }
  for (const auto& p : Q.points())
    if (!outer_set.count(p) && 2 * sup_distance(n, p) < Nt) {
      bad.push_back("placement: dist(n, Q \\ outer) < N_tilde/2 at " + to_string(p));
      break;
    }

  // inner_diameter
  int diam = 0;
  for (const auto& p : pair.inner)
    for (const auto& q : pair.inner) diam = std::max(diam, sup_distance(p, q));
  if (diam > 4 * ceil_power(Nt, eta))
    bad.push_back("inner_diameter: diam(inner) = " + std::to_string(diam) + " > " + std::to_string(4 * ceil_power(Nt, eta)));

  // residual_windows
  std::set<LatticePoint> residual;
  for (const auto& p : outer)
    if (!inner_set.count(p)) residual.insert(p);
  for (const auto& k : residual)
    if (!naive_window_exists(k, residual, N1)) {
      bad.push_back("residual_windows: no N1-window at " + to_string(k));
      break;
    }
  (void)d;
  return bad;
}

}  // namespace qpl
