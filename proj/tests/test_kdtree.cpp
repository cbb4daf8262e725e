#include <algorithm>
#include <cmath>
#include <limits>

#include "doctest.h"
#include "lodom/errors.hpp"
#include "lodom/kdtree.hpp"
#include "support.hpp"

using namespace lodom;
using namespace lodom::test;

namespace {

std::vector<Vec3> random_points(std::mt19937_64& g, std::size_t n, double scale) {
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back(random_vec(g, scale));
  return pts;
}

// Coordinates on a coarse lattice, so distance ties are common.
std::vector<Vec3> lattice_points(std::mt19937_64& g, std::size_t n) {
  std::uniform_int_distribution<int> d(-4, 4);
  std::vector<Vec3> pts;
  for (std::size_t i = 0; i < n; ++i) pts.emplace_back(d(g), d(g), d(g));
  return pts;
}

}  // namespace

TEST_CASE("empty or non-finite input is rejected") {
  const std::vector<Vec3> none;
  CHECK_THROWS_AS(KdTree{none}, DataError);
  const std::vector<Vec3> bad{Vec3(0, 0, 0), Vec3(std::nan(""), 0, 0)};
  CHECK_THROWS_AS(KdTree{bad}, DataError);
}

TEST_CASE("single point answers every query") {
  const std::vector<Vec3> pts{Vec3(1, 2, 3)};
  const KdTree tree = build_index(pts);
  auto g = rng(1);
  for (int i = 0; i < 50; ++i) {
    const Vec3 q = random_vec(g, 100);
    const auto nb = tree.nearest(q);
    REQUIRE(nb);
    CHECK(nb->index == 0);
    CHECK(nb->distance == doctest::Approx((q - pts[0]).norm()));
  }
}

TEST_CASE("cube corners are equidistant from the center") {
  std::vector<Vec3> pts;
  for (int i = 0; i < 8; ++i) pts.emplace_back(i & 1 ? 1 : -1, i & 2 ? 1 : -1, i & 4 ? 1 : -1);
  const KdTree tree(pts);
  const auto nb = tree.nearest(Vec3::Zero());
  REQUIRE(nb);
  CHECK(nb->distance == doctest::Approx(std::sqrt(3.0)));
  // Smallest index wins the eight-way tie.
  CHECK(nb->index == 0);
}

TEST_CASE("radius cut") {
  auto g = rng(2);
  const std::vector<Vec3> pts = random_points(g, 200, 1.0);
  const KdTree tree(pts);
  const auto on = nearest(tree, pts[17], 1.0);
  REQUIRE(on);
  CHECK(on->distance == 0.0);
  CHECK(tree.point(on->index) == pts[17]);
  // Every point lies within the unit cube, so this query is > 5 m away.
  CHECK_FALSE(nearest(tree, Vec3(7.0, 7.0, 7.0), 1.0));
  const Vec3 far(1.0 + 5.0, 0, 0);
  const auto [bi, bd] = brute_nearest(pts, far);
  CHECK_FALSE(tree.nearest(far, bd - 1e-9));
  const auto at = tree.nearest(far, bd + 1e-12);
  REQUIRE(at);
  CHECK(at->index == bi);
}

TEST_CASE("nearest equals a linear scan") {
  auto g = rng(3);
  for (int inst = 0; inst < 40; ++inst) {
    std::uniform_int_distribution<std::size_t> sz(1, 2000);
    const std::vector<Vec3> pts =
        inst % 3 == 0 ? lattice_points(g, sz(g)) : random_points(g, sz(g), 10.0);
    const KdTree tree(pts);
    for (int qi = 0; qi < 100; ++qi) {
      const Vec3 q = inst % 3 == 0 ? Vec3(std::round(uniform(g, -5, 5)), std::round(uniform(g, -5, 5)),
                                          std::round(uniform(g, -5, 5)))
                                    : random_vec(g, 12.0);
      const auto [bi, bd] = brute_nearest(pts, q);
      const auto nb = tree.nearest(q);
      REQUIRE(nb);
      CHECK(nb->index == bi);
      CHECK(nb->distance == bd);
      const double r = uniform(g, 0.0, 3.0);
      const auto cut = tree.nearest(q, r);
      if (bd <= r) {
        REQUIRE(cut);
        CHECK(cut->index == bi);
      } else {
        CHECK_FALSE(cut);
      }
    }
  }
}

TEST_CASE("knn equals a sorted scan") {
  auto g = rng(4);
  for (int inst = 0; inst < 20; ++inst) {
    const std::vector<Vec3> pts = inst % 2 ? lattice_points(g, 500) : random_points(g, 800, 5.0);
    const KdTree tree(pts);
    for (int qi = 0; qi < 30; ++qi) {
      const Vec3 q = random_vec(g, 5.0);
      std::vector<std::pair<double, std::size_t>> all;
      for (std::size_t i = 0; i < pts.size(); ++i) all.emplace_back((pts[i] - q).norm(), i);
      std::sort(all.begin(), all.end());
      const std::size_t k = 1 + qi % 25;
      const auto got = tree.knn(q, k);
      REQUIRE(got.size() == k);
      for (std::size_t j = 0; j < k; ++j) {
        CHECK(got[j].index == all[j].second);
        CHECK(got[j].distance == doctest::Approx(all[j].first).epsilon(1e-12));
      }
    }
  }
  const std::vector<Vec3> few{Vec3(0, 0, 0), Vec3(1, 0, 0)};
  CHECK(KdTree(few).knn(Vec3::Zero(), 5).size() == 2);
}

TEST_CASE("same input builds the same answers") {
  auto g = rng(5);
  const std::vector<Vec3> pts = lattice_points(g, 1500);
  const KdTree a(pts);
  const KdTree b(pts);
  for (int i = 0; i < 200; ++i) {
    const Vec3 q = random_vec(g, 5.0);
    CHECK(a.nearest(q)->index == b.nearest(q)->index);
  }
  for (std::size_t i = 0; i < pts.size(); ++i) CHECK(a.point(i) == pts[i]);
}
