#include <random>
#include <set>

#include "doctest.h"
#include "epicoord/frontier.hpp"
#include "oracles.hpp"

using namespace epicoord;

namespace {

FrontierSet set_of(std::initializer_list<Vec2> pts) {
  FrontierSet s;
  int i = 0;
  for (Vec2 p : pts) s.cells.push_back({i++, p});
  return s;
}

// Random frontier set on integer-ish coordinates so that exact score ties actually occur.
FrontierSet random_set(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n(1, 40), c(-10, 10);
  FrontierSet s;
  std::set<std::pair<int, int>> used;
  const int count = n(rng);
  for (int i = 0; i < count; ++i) {
    const int x = c(rng), y = c(rng);
    if (!used.insert({x, y}).second) continue;
    s.cells.push_back({(y + 10) * 21 + (x + 10), {x + 0.5, y + 0.5}});
  }
  std::sort(s.cells.begin(), s.cells.end(), [](auto& a, auto& b) { return a.index < b.index; });
  return s;
}

}  // namespace

TEST_SUITE("frontier") {
  TEST_CASE("a 3x3 free block inside unknown gives its 8 ring cells") {
    const GridGeometry g(5.0, 5.0, 1.0);
    BeliefMap b = BeliefMap::unknown(g);
    for (int cy = 1; cy <= 3; ++cy)
      for (int cx = 1; cx <= 3; ++cx) b.cells[g.index({cx, cy})] = Cell::Free;
    const FrontierSet f = extract_frontiers(b);
    std::vector<int> got;
    for (const auto& c : f.cells) got.push_back(c.index);
    std::vector<int> expect;
    for (int cy = 1; cy <= 3; ++cy)
      for (int cx = 1; cx <= 3; ++cx)
        if (!(cx == 2 && cy == 2)) expect.push_back(cy * 5 + cx);
    CHECK(got == expect);
  }

  TEST_CASE("fully known maps have no frontier") {
    const GridGeometry g(4.0, 4.0, 1.0);
    BeliefMap b = BeliefMap::unknown(g);
    std::fill(b.cells.begin(), b.cells.end(), Cell::Free);
    b.cells[5] = Cell::Occupied;
    CHECK(extract_frontiers(b).empty());
    CHECK_FALSE(select_frontier(extract_frontiers(b), {}, {}).has_value());
  }

  TEST_CASE("dispersion picks the frontier opposite the peers") {
    const FrontierSet f = set_of({{5, 0}, {-5, 0}, {0, 5}});
    const std::vector<Vec2> peers{{10, 0}};
    const auto best = select_frontier(f, {0, 0, 0}, peers);
    REQUIRE(best);
    CHECK(best->center == Vec2{-5, 0});
  }

  TEST_CASE("repulsion picks the frontier away from the repeller") {
    const FrontierSet f = set_of({{-4, 0}, {9, 0}});
    const auto best = select_repulsive_frontier(f, {5, 0, 0}, {0, 0});
    REQUIRE(best);
    CHECK(best->center == Vec2{9, 0});
  }

  TEST_CASE("without a usable direction the nearest frontier wins") {
    const FrontierSet f = set_of({{4, 0}, {1, 1}, {-3, 0}});
    const auto a = select_frontier(f, {0, 0, 0}, {});
    REQUIRE(a);
    CHECK(a->center == Vec2{1, 1});
    const auto b = select_repulsive_frontier(f, {0, 0, 0}, {0, 0});
    REQUIRE(b);
    CHECK(b->center == Vec2{1, 1});
  }

  TEST_CASE("dispersion selection equals brute-force argmin on 1000 sets") {
    std::mt19937_64 rng(99);
    std::uniform_int_distribution<int> c(-12, 12), np(1, 4);
    for (int trial = 0; trial < 1000; ++trial) {
      const FrontierSet f = random_set(rng);
      const Pose self{static_cast<double>(c(rng)) + 0.5, static_cast<double>(c(rng)) + 0.5, 0.0};
      std::vector<Vec2> peers;
      const int n = np(rng);
      for (int k = 0; k < n; ++k) peers.push_back({static_cast<double>(c(rng)), static_cast<double>(c(rng))});
      Vec2 d{};
      for (Vec2 p : peers) d = d + (p - self.position());
      d = (1.0 / n) * d;
      const auto got = select_frontier(f, self, peers);
      REQUIRE(got);
      if (d.norm() == 0.0) continue;  // nearest-frontier fallback, covered above
      const Vec2 dir{d.x / d.norm(), d.y / d.norm()};
      CHECK(got->index == *oracle::brute_argmin(f.cells, self.position(), dir));
    }
  }

  TEST_CASE("repulsive selection equals brute-force argmin on 1000 sets") {
    std::mt19937_64 rng(100);
    std::uniform_int_distribution<int> c(-12, 12);
    for (int trial = 0; trial < 1000; ++trial) {
      const FrontierSet f = random_set(rng);
      const Pose self{static_cast<double>(c(rng)) + 0.5, static_cast<double>(c(rng)), 0.0};
      const Vec2 rep{static_cast<double>(c(rng)), static_cast<double>(c(rng))};
      const auto got = select_repulsive_frontier(f, self, rep);
      REQUIRE(got);
      const Vec2 d = rep - self.position();
      const Vec2 dir{d.x / d.norm(), d.y / d.norm()};
      CHECK(got->index == *oracle::brute_argmin(f.cells, self.position(), dir));
    }
  }
}
