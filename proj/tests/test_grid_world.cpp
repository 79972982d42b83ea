#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "epicoord/error.hpp"
#include "epicoord/grid_world.hpp"

using namespace epicoord;

namespace {

WorldMap random_world(std::mt19937_64& rng, int n_obstacles) {
  WorldMap w = WorldMap::open(40.0, 30.0, 1.0, {1.5, 1.5}, 1.0);
  std::uniform_real_distribution<double> ux(4.0, 36.0), uy(4.0, 26.0), side(1.0, 4.0);
  for (int i = 0; i < n_obstacles; ++i) w.add_square_obstacle({ux(rng), uy(rng)}, side(rng));
  return w;
}

}  // namespace

TEST_SUITE("grid_world") {
  TEST_CASE("cell index is cy * nx + cx and round-trips") {
    const GridGeometry g(12.0, 7.0, 0.5);
    CHECK(g.nx() == 24);
    CHECK(g.ny() == 14);
    for (int cy = 0; cy < g.ny(); ++cy) {
      for (int cx = 0; cx < g.nx(); ++cx) {
        const int idx = g.index({cx, cy});
        CHECK(idx == cy * 24 + cx);
        CHECK(g.coord(idx) == CellCoord{cx, cy});
        const Vec2 c = g.center(idx);
        CHECK(g.index_of(c) == idx);
      }
    }
    CHECK_FALSE(g.index_of({12.0, 1.0}).has_value());
    CHECK_FALSE(g.index_of({-0.01, 1.0}).has_value());
  }

  TEST_CASE("square obstacles mark cells whose centers fall inside") {
    WorldMap w = WorldMap::open(10.0, 10.0, 1.0, {0.5, 0.5}, 1.0);
    w.add_square_obstacle({5.0, 5.0}, 2.0);
    int occupied = 0;
    for (std::size_t i = 0; i < w.cells.size(); ++i) {
      const Vec2 c = w.grid.center(static_cast<int>(i));
      const bool inside = std::abs(c.x - 5.0) <= 1.0 && std::abs(c.y - 5.0) <= 1.0;
      CHECK((w.cells[i] == Cell::Occupied) == inside);
      occupied += inside;
    }
    CHECK(occupied == 4);
  }

  TEST_CASE("world validation") {
    WorldMap w = WorldMap::open(10.0, 10.0, 1.0, {5.0, 5.0}, 1.0);
    CHECK_NOTHROW(w.validate());
    w.add_square_obstacle({5.0, 5.0}, 2.0);
    CHECK_THROWS_AS(w.validate(), ConfigError);
    WorldMap v = WorldMap::open(10.0, 10.0, 1.0, {1.0, 1.0}, 0.0);
    CHECK_THROWS_AS(v.validate(), ConfigError);
  }

  TEST_CASE("a peer 5 m ahead in the open is seen at its true pose") {
    const WorldMap w = WorldMap::open(50.0, 50.0, 1.0, {40.0, 40.0}, 1.0);
    const std::vector<Pose> poses{{0.0, 0.0, 0.0}, {5.0, 0.0, 1.0}};
    const SensorScan s = sense(w, poses, 0, 20.0, 360);
    REQUIRE(s.robots_seen.size() == 1);
    CHECK(s.robots_seen[0].id == 1);
    CHECK(s.robots_seen[0].pose == poses[1]);
    CHECK_FALSE(s.task_seen.has_value());
  }

  TEST_CASE("a wall hides peers and the task; sensing outside the world throws") {
    WorldMap w = WorldMap::open(50.0, 50.0, 1.0, {20.0, 10.0}, 1.0);
    for (int y = 0; y < 50; ++y) w.add_square_obstacle({10.5, y + 0.5}, 0.9);
    const std::vector<Pose> poses{{5.0, 10.0, 0.0}, {15.0, 10.0, 0.0}};
    const SensorScan s = sense(w, poses, 0, 20.0, 360);
    CHECK(s.robots_seen.empty());
    CHECK_FALSE(s.task_seen.has_value());
    for (const auto& rc : s.revealed) CHECK(w.grid.coord(rc.index).cx <= 10);
    const std::vector<Pose> outside{{-1.0, 10.0, 0.0}};
    CHECK_THROWS_AS(sense(w, outside, 0, 20.0, 360), InvalidStateError);
  }

  TEST_CASE("traversal visits a 4-connected chain covering densely sampled points") {
    const GridGeometry g(40.0, 30.0, 1.0);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> ux(0.01, 39.99), uy(0.01, 29.99);
    for (int trial = 0; trial < 500; ++trial) {
      const Vec2 a{ux(rng), uy(rng)};
      const Vec2 b{ux(rng), uy(rng)};
      std::vector<CellCoord> seen;
      traverse_cells(g, a, b, [&](CellCoord c) {
        seen.push_back(c);
        return true;
      });
      REQUIRE(!seen.empty());
      CHECK(seen.front() == g.coord_of(a));
      CHECK(seen.back() == g.coord_of(b));
      for (std::size_t i = 1; i < seen.size(); ++i) {
        CHECK(std::abs(seen[i].cx - seen[i - 1].cx) + std::abs(seen[i].cy - seen[i - 1].cy) == 1);
      }
      std::set<int> visited;
      for (auto c : seen) visited.insert(g.index(c));
      for (int s = 0; s <= 4000; ++s) {
        const double t = s / 4000.0;
        const Vec2 p = a + t * (b - a);
        const double fx = p.x - std::floor(p.x), fy = p.y - std::floor(p.y);
        if (fx < 1e-6 || fx > 1 - 1e-6 || fy < 1e-6 || fy > 1 - 1e-6) continue;  // on a cell border
        CHECK(visited.count(g.index(g.coord_of(p))) == 1);
      }
    }
  }

  TEST_CASE("line of sight is symmetric") {
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> ux(0.01, 39.99), uy(0.01, 29.99);
    for (int k = 0; k < 20; ++k) {
      const WorldMap w = random_world(rng, 8);
      for (int trial = 0; trial < 100; ++trial) {
        const Vec2 a{ux(rng), uy(rng)};
        const Vec2 b{ux(rng), uy(rng)};
        CHECK(line_of_sight(w.grid, w.cells, a, b) == line_of_sight(w.grid, w.cells, b, a));
      }
    }
  }

  TEST_CASE("ray casting reveals deduplicated, truthful cells within range") {
    std::mt19937_64 rng(3);
    const WorldMap w = random_world(rng, 10);
    const Vec2 origin{2.5, 2.5};
    const auto cells = cast_rays(w.grid, w.cells, origin, 20.0, 360);
    std::set<int> idx;
    for (const auto& rc : cells) {
      CHECK(idx.insert(rc.index).second);
      CHECK(rc.state == w.cells[rc.index]);
      CHECK(distance(w.grid.center(rc.index), origin) <= 20.0 + 1.0);
    }
    CHECK(idx.count(*w.grid.index_of(origin)) == 1);
  }

  TEST_CASE("scan integration commutes") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> ux(0.5, 39.5), uy(0.5, 29.5), th(-3.0, 3.0);
    for (int trial = 0; trial < 50; ++trial) {
      const WorldMap w = random_world(rng, 6);
      std::vector<Pose> poses;
      while (poses.size() < 2) {
        const Pose p{ux(rng), uy(rng), th(rng)};
        if (w.is_free(p.position())) poses.push_back(p);
      }
      const SensorScan a = sense(w, poses, 0, 15.0, 180);
      const SensorScan b = sense(w, poses, 1, 15.0, 180);
      const BeliefMap empty = BeliefMap::unknown(w.grid);
      const BeliefMap ab = integrate_scan(integrate_scan(empty, a), b);
      const BeliefMap ba = integrate_scan(integrate_scan(empty, b), a);
      CHECK(ab == ba);
      for (std::size_t i = 0; i < ab.cells.size(); ++i) {
        if (ab.cells[i] != Cell::Unknown) CHECK(ab.cells[i] == w.cells[i]);
      }
    }
  }

  TEST_CASE("known cells are never overwritten") {
    const GridGeometry g(5.0, 5.0, 1.0);
    BeliefMap b = BeliefMap::unknown(g);
    b.cells[3] = Cell::Occupied;
    const std::vector<RevealedCell> rc{{3, Cell::Free}, {4, Cell::Free}};
    integrate_cells(b, rc);
    CHECK(b.cells[3] == Cell::Occupied);
    CHECK(b.cells[4] == Cell::Free);
    CHECK(b.unknown_count() == 23);
  }

  TEST_CASE("PGM export") {
    const GridGeometry g(3.0, 2.0, 1.0);
    std::vector<Cell> cells{Cell::Free, Cell::Occupied, Cell::Unknown, Cell::Free, Cell::Free, Cell::Free};
    const std::string pgm = to_pgm(g, cells);
    CHECK(pgm.rfind("P2\n3 2\n255\n", 0) == 0);
    // row 0 of the image is the top of the arena (cy = 1)
    CHECK(pgm.find("255 255 255\n255 0 128") != std::string::npos);
  }
}
