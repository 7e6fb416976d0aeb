#include "doctest.h"

#include "pfr/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <tuple>
#include <vector>

using namespace pfr;

namespace {

using Triple = std::tuple<double, double, int>;

std::set<Triple> as_set(const std::vector<ParetoPoint> &pts) {
  std::set<Triple> out;
  for (const ParetoPoint &p : pts) out.insert({p.memory, p.error, p.config_id});
  return out;
}

// Quadratic reference: keep p unless something strictly dominates it, and
// collapse exact coordinate ties to the lowest id.
std::set<Triple> dominance_oracle(const std::vector<ParetoPoint> &pts) {
  std::set<Triple> out;
  for (const ParetoPoint &p : pts) {
    bool keep = true;
    for (const ParetoPoint &q : pts) {
      const bool strict = q.memory <= p.memory && q.error <= p.error &&
                          (q.memory < p.memory || q.error < p.error);
      const bool tie_lower =
          q.memory == p.memory && q.error == p.error && q.config_id < p.config_id;
      if (strict || tie_lower) {
        keep = false;
        break;
      }
    }
    if (keep) out.insert({p.memory, p.error, p.config_id});
  }
  return out;
}

// Dominated area as a union of corner rectangles, by coordinate compression.
double union_area(const std::vector<ParetoPoint> &pts, const HyperBound &bound) {
  std::vector<double> xs{bound.memory};
  std::vector<double> ys{bound.error};
  for (const ParetoPoint &p : pts) {
    xs.push_back(p.memory);
    ys.push_back(p.error);
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  std::sort(ys.begin(), ys.end());
  ys.erase(std::unique(ys.begin(), ys.end()), ys.end());
  double area = 0.0;
  for (std::size_t i = 0; i + 1 < xs.size(); ++i)
    for (std::size_t j = 0; j + 1 < ys.size(); ++j) {
      bool covered = false;
      for (const ParetoPoint &p : pts)
        if (p.memory <= xs[i] && p.error <= ys[j]) {
          covered = true;
          break;
        }
      if (covered) area += (xs[i + 1] - xs[i]) * (ys[j + 1] - ys[j]);
    }
  return area;
}

std::vector<ParetoPoint> random_points(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> count(1, 25);
  std::uniform_int_distribution<int> grid(0, 10);
  std::vector<ParetoPoint> pts;
  const int n = count(rng);
  for (int i = 0; i < n; ++i)
    pts.push_back({grid(rng) / 10.0, grid(rng) / 10.0, i}); // coarse grid forces ties
  return pts;
}

} // namespace

TEST_CASE("pareto_front keeps exactly the non-dominated points") {
  SUBCASE("hand-sized examples") {
    ParetoFront one = pareto_front({{0.4, 0.2, 7}});
    REQUIRE(one.size() == 1);
    CHECK(one.points[0].config_id == 7);

    ParetoFront f =
        pareto_front({{1, 3, 0}, {2, 2, 1}, {3, 1, 2}, {2, 3, 3}});
    REQUIRE(f.size() == 3);
    CHECK(f.points[0].config_id == 0);
    CHECK(f.points[1].config_id == 1);
    CHECK(f.points[2].config_id == 2);

    ParetoFront tie = pareto_front({{1, 1, 5}, {1, 1, 2}, {1, 1, 9}});
    REQUIRE(tie.size() == 1);
    CHECK(tie.points[0].config_id == 2);

    const std::vector<ParetoPoint> none;
    const std::vector<ParetoPoint> bad = {{std::nan(""), 0.0, 0}};
    CHECK_THROWS_AS((void)pareto_front(none), std::invalid_argument);
    CHECK_THROWS_AS((void)pareto_front(bad), std::invalid_argument);
  }

  SUBCASE("agrees with the quadratic dominance oracle") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::vector<ParetoPoint> pts = random_points(seed);
      ParetoFront f = pareto_front(pts);
      f.validate();
      CHECK(as_set(f.points) == dominance_oracle(pts));
      for (std::size_t i = 1; i < f.size(); ++i) {
        CHECK(f.points[i].memory > f.points[i - 1].memory);
        CHECK(f.points[i].error < f.points[i - 1].error);
      }
    }
  }

  SUBCASE("idempotent and order independent") {
    std::vector<ParetoPoint> pts = random_points(424);
    ParetoFront f = pareto_front(pts);
    CHECK(as_set(pareto_front(f.points).points) == as_set(f.points));
    std::mt19937_64 rng(17);
    std::shuffle(pts.begin(), pts.end(), rng);
    CHECK(as_set(pareto_front(pts).points) == as_set(f.points));
  }
}

TEST_CASE("memory normalization") {
  std::vector<ParetoPoint> pts = {{2, 0.5, 0}, {3, 0.4, 1}, {4, 0.1, 2}};
  std::vector<ParetoPoint> out = normalize_memory(pts, 2.0, 4.0);
  CHECK(out[0].memory == 0.0);
  CHECK(out[1].memory == 0.5);
  CHECK(out[2].memory == 1.0);
  CHECK(out[1].error == 0.4);
  CHECK(out[1].config_id == 1);

  ParetoFront f = pareto_front(pts);
  ParetoFront nf = normalize_memory(f, 2.0, 4.0);
  CHECK(nf.points[0].memory == 0.0);
  CHECK(nf.points[2].memory == 1.0);

  CHECK_THROWS_AS((void)normalize_memory(pts, 4.0, 4.0), std::invalid_argument);
  CHECK_THROWS_AS((void)normalize_memory(pts, 5.0, 4.0), std::invalid_argument);
}

TEST_CASE("convergence distance") {
  ParetoFront truth = pareto_front({{3, 4, 0}});

  ParetoFront same = pareto_front({{0.2, 0.9, 0}, {0.5, 0.3, 1}});
  CHECK(convergence(same, same) == 0.0);

  ParetoFront est1 = pareto_front({{0, 0, 0}});
  CHECK(convergence(est1, truth) == doctest::Approx(5.0).epsilon(1e-14));

  ParetoFront est2 = pareto_front({{0, 4.5, 0}, {3, 0, 1}});
  // nearest-truth distances 3.0410... and 4, averaged
  const double d0 = std::sqrt(9.0 + 0.25);
  CHECK(convergence(est2, truth) == doctest::Approx((d0 + 4.0) / 2.0).epsilon(1e-14));

  // directional: measured from the first argument's points
  CHECK(convergence(truth, est2) == doctest::Approx(d0).epsilon(1e-14));

  CHECK_THROWS_AS((void)convergence(ParetoFront{}, truth), std::invalid_argument);
  CHECK_THROWS_AS((void)convergence(truth, ParetoFront{}), std::invalid_argument);
}

TEST_CASE("hypervolume and front difference") {
  const HyperBound bound{2.0, 2.0};
  ParetoFront truth = pareto_front({{0, 1, 0}, {1, 0, 1}});
  ParetoFront est = pareto_front({{1, 1, 0}});

  CHECK(hypervolume(truth, bound) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(hypervolume(est, bound) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(hyperdiff(est, truth, bound) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(hyperdiff(truth, truth, bound) == 0.0);

  SUBCASE("dropping a point never grows the volume") {
    for (std::uint64_t seed = 0; seed < 30; ++seed) {
      ParetoFront f = pareto_front(random_points(1000 + seed));
      const double full = hypervolume(f, HyperBound{});
      for (std::size_t drop = 0; drop < f.size(); ++drop) {
        if (f.size() == 1) break;
        ParetoFront sub;
        for (std::size_t i = 0; i < f.size(); ++i)
          if (i != drop) sub.points.push_back(f.points[i]);
        CHECK(hypervolume(sub, HyperBound{}) <= full + 1e-14);
      }
    }
  }

  SUBCASE("matches the rectangle-union oracle") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      std::vector<ParetoPoint> pts = random_points(2000 + seed);
      ParetoFront f = pareto_front(pts);
      const HyperBound b{1.0, 1.0};
      CHECK(hypervolume(f, b) == doctest::Approx(union_area(pts, b)).epsilon(1e-12));
    }
  }

  SUBCASE("bound must dominate the front") {
    ParetoFront f = pareto_front({{0.5, 3.0, 0}});
    const HyperBound unit{1.0, 1.0};
    CHECK_THROWS_AS((void)hypervolume(f, unit), std::invalid_argument);
    CHECK_THROWS_AS((void)hypervolume(ParetoFront{}, HyperBound{}), std::invalid_argument);
  }
}

TEST_CASE("configuration choosers") {
  ParetoFront f = pareto_front({{1, 3, 10}, {2, 2, 11}, {3, 1, 12}});

  SUBCASE("frontier point under the cap") {
    CHECK(choose_config(f, 2.5).config_id == 11);
    CHECK(choose_config(f, 2.0).config_id == 11);
    CHECK(choose_config(f, 100.0).config_id == 12);
    CHECK_THROWS_AS((void)choose_config(f, 0.5), std::runtime_error);
  }

  SUBCASE("random high-memory baseline") {
    std::vector<ParetoPoint> pts = {{1, 5, 0}, {2, 3, 1}, {3, 9, 2}};
    for (std::uint64_t seed = 0; seed < 20; ++seed)
      CHECK(choose_random_high_memory(pts, 2.5, seed).config_id == 1);

    std::vector<ParetoPoint> tied = {{1, 0.1, 0}, {2, 3, 1}, {2, 9, 2}};
    int first = 0;
    const std::uint64_t trials = 1000;
    for (std::uint64_t seed = 0; seed < trials; ++seed) {
      const int id = choose_random_high_memory(tied, 3.0, seed).config_id;
      CHECK((id == 1 || id == 2));
      if (id == 1) ++first;
    }
    CHECK(std::abs(first / static_cast<double>(trials) - 0.5) <= 0.05);

    CHECK_THROWS_AS((void)choose_random_high_memory(pts, 0.5, 0), std::runtime_error);
  }
}
