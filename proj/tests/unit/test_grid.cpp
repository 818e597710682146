#include <doctest.h>

#include <set>
#include <stdexcept>

#include "ifsm/grid.hpp"
#include "ifsm/rng.hpp"

using namespace ifsm;

TEST_SUITE("grid") {

TEST_CASE("time grid indexing") {
  const TimeGrid g(10.0, 1000);
  CHECK(g.dt() == doctest::Approx(0.01));
  CHECK(g.n_points() == 1001);
  CHECK(g.index_of(2.5) == 250);
  CHECK(g.contains(0.37));
  CHECK_FALSE(g.contains(0.375));
  CHECK_FALSE(g.contains(10.01));
  CHECK_THROWS_AS(g.index_of(0.375), std::invalid_argument);
  CHECK(time_indices(g, {0.0, 10.0}) == std::vector<std::size_t>{0, 1000});
}

TEST_CASE("spatial grid: zero on a cell boundary, clamped lookup") {
  const SpatialGrid x(3.0, 30);
  CHECK(x.n_cells() == 60);
  CHECK(x.cell_lo(30) == 0.0);
  CHECK(x.cell_lo(0) == doctest::Approx(-3.0));
  CHECK(x.cell_hi(59) == doctest::Approx(3.0));
  CHECK(x.cell_of(0.05) == 30);
  CHECK(x.cell_of(-0.05) == 29);
  CHECK(x.cell_of(-100.0) == 0);
  CHECK(x.cell_of(100.0) == 59);
  CHECK(x.clip(4.0) == 3.0);
  CHECK(x.overlap(30, 0.05, 2.0) == doctest::Approx(0.05));
  CHECK(x.overlap(10, 0.0, 1.0) == 0.0);
  const auto y = SpatialGrid::with_spacing(1.05, 0.1);
  CHECK(y.dx() == doctest::Approx(0.1));
  CHECK(y.half_width() >= 1.05);
  CHECK_THROWS(SpatialGrid(-1.0, 10));
}

TEST_CASE("rng: seeds and substreams are reproducible and distinct") {
  SeededRng a(7), b(7), c(8);
  CHECK(a() == b());
  CHECK(SeededRng(7)() != c());
  std::set<std::uint64_t> firsts;
  const SeededRng root(7);
  for (std::uint64_t s = 0; s < 1000; ++s) {
    auto sub = root.substream(s);
    firsts.insert(sub());
  }
  CHECK(firsts.size() == 1000);
  CHECK(root.substream(3).substream(4)() == SeededRng(7).substream(3).substream(4)());
  CHECK(stream_id({1, 2}) != stream_id({2, 1}));
  SeededRng u(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = u.uniform01();
    CHECK((v > 0.0 && v < 1.0));
  }
}

}
