#include <doctest.h>

#include <climits>
#include <random>

#include "qpl/errors.hpp"
#include "qpl/io.hpp"
#include "qpl/lattice.hpp"

using namespace qpl;

namespace {

bool brute_in_region(const ElementaryRegion& r, const LatticePoint& p) {
  bool in_corner = r.carve.has_value();
  for (int i = 0; i < r.dim(); ++i) {
    const int q = p[i] - r.center[i];
    if (q < -r.size || q > r.size) return false;
    if (!r.carve) continue;
    const Sign s = (*r.carve)[i];
    if (s == Sign::Lt && !(q < 0)) in_corner = false;
    if (s == Sign::Gt && !(q > 0)) in_corner = false;
  }
  return !in_corner;
}

bool brute_window(const ElementaryRegion& w, const LatticePoint& k, const PointSet& domain, int M) {
  if (w.size != M || !brute_in_region(w, k)) return false;
  int dist = INT_MAX;
  for (const auto& p : domain) {
    if (brute_in_region(w, p)) continue;
    int s = 0;
    for (int i = 0; i < k.dim(); ++i) s = std::max(s, std::abs(p[i] - k[i]));
    dist = std::min(dist, s);
  }
  for_each_point(w.bounding_box(), [&](const LatticePoint& p) {
    if (brute_in_region(w, p) && !domain.contains(p)) dist = -1;
  });
  return dist >= 0 && 2 * dist >= M;
}

PointSet square(int d, int N) { return PointSet::from_box(Box::cube(LatticePoint(d), N)); }

}  // namespace

TEST_SUITE("lattice_geometry") {
  TEST_CASE("sup distance") {
    CHECK(sup_distance({0, 0}, {0, 0}) == 0);
    CHECK(sup_distance({1, -3}, {2, 4}) == 7);
    CHECK(sup_distance(LatticePoint{5}, LatticePoint{-5}) == 10);
    CHECK_THROWS_AS(sup_distance(LatticePoint{1}, LatticePoint{1, 2}), InputError);
  }

  TEST_CASE("elementary region counts") {
    CHECK(enumerate_elementary_regions(1, 1).size() == 1);
    CHECK(enumerate_elementary_regions(2, 2).size() == 5);
    CHECK(enumerate_elementary_regions(1, 3).size() == 21);
    CHECK_FALSE(enumerate_elementary_regions(2, 2).front().carve.has_value());
  }

  TEST_CASE("cardinality matches brute force") {
    for (int d = 1; d <= 3; ++d)
      for (int N = 1; N <= 3; ++N)
        for (const auto& r : enumerate_elementary_regions(N, d)) {
          std::size_t n = 0;
          for_each_point(r.bounding_box(), [&](const LatticePoint& p) { n += brute_in_region(r, p) ? 1 : 0; });
          CHECK(r.cardinality() == n);
          CHECK(r.points().size() == n);
        }
  }

  TEST_CASE("sign pattern text round trip") {
    const SignPattern s = parse_sign_pattern("<.>");
    CHECK(active_count(s) == 2);
    CHECK(to_string(s) == "<.>");
    CHECK_THROWS_AS(parse_sign_pattern("<x"), InputError);
  }

  TEST_CASE("diameter and distance") {
    const PointSet origin({LatticePoint(2)});
    const auto m = region_metrics(origin, origin);
    CHECK(m.diam_a == 0);
    CHECK(m.dist_a_b == 0);
    CHECK(diameter(square(2, 2)) == 4);
    CHECK(region_metrics(origin, PointSet({LatticePoint{3, 1}})).dist_a_b == 3);
    CHECK(region_metrics(origin, PointSet()).dist_a_b == INT_MAX);
    CHECK_THROWS_AS(diameter(PointSet()), InputError);
  }

  TEST_CASE("point set algebra") {
    const PointSet a = square(1, 3), b = square(1, 1);
    CHECK(a.minus(b).size() == 4);
    CHECK(a.intersect(b) == b);
    CHECK(b.subset_of(a));
    CHECK(a.unite(b) == a);
    CHECK(a.index_of(LatticePoint{-3}) == 0);
    CHECK(a.index_of(LatticePoint{9}) == -1);
    CHECK(a.translated(LatticePoint{2}).contains(LatticePoint{5}));
    CHECK(a.hash() == PointSet(a.points()).hash());
    CHECK(a.hash() != b.hash());
  }

  TEST_CASE("find window examples") {
    const PointSet dom = square(2, 10);
    const auto w = find_window({0, 0}, dom, 2);
    REQUIRE(w.has_value());
    CHECK(*w == ElementaryRegion{{0, 0}, 2, std::nullopt});

    const auto c = find_window({10, 10}, dom, 2);
    REQUIRE(c.has_value());
    CHECK(brute_window(*c, {10, 10}, dom, 2));
    CHECK(is_window(*c, {10, 10}, dom, 2));

    CHECK_FALSE(find_window(LatticePoint{0}, PointSet({LatticePoint{0}}), 2).has_value());
  }

  TEST_CASE("find window results verify exhaustively") {
    std::mt19937_64 rng(5);
    for (int trial = 0; trial < 6; ++trial) {
      std::vector<LatticePoint> pts;
      std::bernoulli_distribution keep(0.85);
      for_each_point(Box::cube(LatticePoint(2), 7), [&](const LatticePoint& p) {
        if (keep(rng)) pts.push_back(p);
      });
      const PointSet dom(pts);
      for (const auto& k : dom) {
        const auto w = find_window(k, dom, 2);
        if (w) CHECK(brute_window(*w, k, dom, 2));
      }
    }
  }

  TEST_CASE("adjust region cases") {
    const ElementaryRegion Q{LatticePoint{0}, 40, std::nullopt};
    const auto c1 = adjust_region(LatticePoint{0}, Q, 20, 1);
    REQUIRE(c1);
    CHECK(c1.pair->case_id == 1);
    CHECK(c1.pair->outer == ElementaryRegion{LatticePoint{0}, 20, std::nullopt});
    CHECK(c1.pair->inner == square(1, 2));

    const auto c2 = adjust_region(LatticePoint{30}, Q, 20, 1);
    REQUIRE(c2);
    CHECK(c2.pair->case_id == 2);
    CHECK(c2.pair->inner == square(1, 2).translated(LatticePoint{30}));

    const auto c3 = adjust_region(LatticePoint{39}, Q, 20, 1);
    REQUIRE(c3);
    CHECK(c3.pair->case_id == 3);
    for (int k = 37; k <= 40; ++k) CHECK(c3.pair->inner.contains(LatticePoint{k}));

    for (const auto* r : {&c1, &c2, &c3}) {
      const LatticePoint n = r == &c1 ? LatticePoint{0} : r == &c2 ? LatticePoint{30} : LatticePoint{39};
      CHECK(verify_region_pair(n, Q, 20, 1, *r->pair).empty());
    }
  }

  TEST_CASE("adjust region names the violated condition") {
    const ElementaryRegion Q{LatticePoint{0}, 40, std::nullopt};
    const auto r = adjust_region(LatticePoint{0}, Q, 6, 4);
    CHECK_FALSE(r);
    CHECK(r.violated.rfind("outer_size", 0) == 0);
  }

  TEST_CASE("adjusted pairs pass the independent checker") {
    std::mt19937_64 rng(11);
    for (int d = 1; d <= 2; ++d) {
      const int N = d == 1 ? 40 : 16;
      const int N_bar = d == 1 ? 20 : 12;
      const ElementaryRegion Q{LatticePoint(d), N, std::nullopt};
      std::uniform_int_distribution<int> c(-N, N);
      for (int t = 0; t < 12; ++t) {
        LatticePoint n(d);
        for (int i = 0; i < d; ++i) n[i] = c(rng);
        const auto r = adjust_region(n, Q, N_bar, 1);
        if (r) CHECK(verify_region_pair(n, Q, N_bar, 1, *r.pair).empty());
        else CHECK_FALSE(r.violated.empty());
      }
    }
  }

  TEST_CASE("adjust region is translation equivariant") {
    const ElementaryRegion Q{{0, 0}, 14, parse_sign_pattern("<>")};
    const LatticePoint t{5, -3};
    for (const LatticePoint n : {LatticePoint{0, 0}, LatticePoint{12, 0}, LatticePoint{-13, -2}, LatticePoint{4, -14}}) {
      if (!Q.contains(n)) continue;
      const auto a = adjust_region(n, Q, 12, 1);
      const auto b = adjust_region(n + t, Q.translated(t), 12, 1);
      REQUIRE(a.pair.has_value() == b.pair.has_value());
      if (!a) continue;
      CHECK(b.pair->outer == a.pair->outer.translated(t));
      CHECK(b.pair->inner == a.pair->inner.translated(t));
    }
  }

  TEST_CASE("region json shape") {
    const ElementaryRegion r{{1, 2}, 3, parse_sign_pattern("<>")};
    const Json j = region_to_json(r);
    CHECK(j.contains("center"));
    CHECK(j.contains("size"));
    CHECK(j.contains("carve"));
    CHECK(j.at("points_hash") == r.points().hash());
    CHECK(region_from_json(j) == r);
    CHECK(region_to_json(ElementaryRegion{{0}, 2, std::nullopt}).at("carve").is_null());
    Json bad = j;
    bad["points_hash"] = "0000000000000000";
    CHECK_THROWS_AS(region_from_json(bad), InputError);
  }
}
