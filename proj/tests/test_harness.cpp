#include "doctest.h"

#include "pfr/harness.hpp"
#include "pfr/rng.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

using namespace pfr;

namespace {

struct Rank3Fixture {
  Eigen::MatrixXd train; // n x d, entries inside [0.3, 0.9]
  Eigen::VectorXd fresh; // one more dataset from the same factor model
};

// Exactly rank 3: a constant component plus two small random factors, so
// every value stays well inside [0, 1] and prediction clipping is a no-op.
Rank3Fixture rank3_fixture(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  Eigen::MatrixXd G(3, n + 1), W(3, d);
  for (Eigen::Index i = 0; i <= n; ++i) {
    G(0, i) = 1.0;
    G(1, i) = 2.0 * unit_uniform(rng) - 1.0;
    G(2, i) = 2.0 * unit_uniform(rng) - 1.0;
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    W(0, j) = 0.6;
    W(1, j) = 0.15 * (2.0 * unit_uniform(rng) - 1.0);
    W(2, j) = 0.15 * (2.0 * unit_uniform(rng) - 1.0);
  }
  Eigen::MatrixXd all = G.transpose() * W;
  return {all.topRows(n), all.row(n).transpose()};
}

Eigen::VectorXd spread_memories(Eigen::Index d) {
  Eigen::VectorXd m(d);
  for (Eigen::Index j = 0; j < d; ++j) m(j) = 1.0 + static_cast<double>((7 * j) % 13) + 0.01 * static_cast<double>(j);
  return m;
}

std::vector<int> front_ids(const ParetoFront &f) {
  std::vector<int> ids;
  for (const ParetoPoint &p : f.points) ids.push_back(p.config_id);
  return ids;
}

ObservationMask full_mask(Eigen::Index n, Eigen::Index d) {
  ObservationMask m;
  m.observed = ArrayXXb::Constant(n, d, true);
  return m;
}

SplitRecord make_record(const std::string &ds, const std::string &tech, std::uint64_t seed,
                        double conv, double hyper, double rel, double chosen_err) {
  SplitRecord r;
  r.dataset = ds;
  r.technique = tech;
  r.seed = seed;
  r.budget = 3;
  r.convergence = conv;
  r.hyperdiff = hyper;
  r.relative_error = rel;
  r.chosen_true_error = chosen_err;
  return r;
}

} // namespace

TEST_CASE("evaluation settings") {
  const char *romans[] = {"I", "II", "III", "IV", "V", "VI"};
  const char *digits[] = {"1", "2", "3", "4", "5", "6"};
  for (int i = 0; i < 6; ++i) {
    LoocvSetting a = make_setting(romans[i]);
    LoocvSetting b = make_setting(digits[i]);
    CHECK(a.name() == romans[i]);
    CHECK(b.name() == romans[i]);
    CHECK(a.memory_cap == (i % 2 == 1));
  }
  CHECK(make_setting("iv").scheme == ObservationScheme::Uniform);
  CHECK(make_setting("iv").memory_cap);
  CHECK(make_setting("V").scheme == ObservationScheme::Nonuniform);

  CHECK_THROWS_AS((void)make_setting("VII"), std::invalid_argument);
  CHECK_THROWS_AS((void)make_setting(""), std::invalid_argument);
  CHECK_THROWS_AS((void)make_setting("III", 0.0), std::invalid_argument);
  CHECK_THROWS_AS((void)make_setting("III", 1.5), std::invalid_argument);
  CHECK_THROWS_AS((void)make_setting("V", 0.2, 0.0), std::invalid_argument);
}

TEST_CASE("measured-memory share") {
  Eigen::VectorXd m(4);
  m << 1, 2, 3, 4;
  const IndexList T = {0, 1, 2, 3};

  CHECK(memory_fraction(T, T, m) == 1.0);
  CHECK(memory_fraction({}, T, m) == 0.0);
  CHECK(memory_fraction({3}, T, m) == doctest::Approx(0.4).epsilon(1e-15));
  const IndexList ends = {0, 3};
  CHECK(memory_fraction(ends, T, m) == doctest::Approx(0.5).epsilon(1e-15));

  SUBCASE("grows under inclusion") {
    double prev = 0.0;
    IndexList S;
    for (Eigen::Index j : T) {
      S.push_back(j);
      const double f = memory_fraction(S, T, m);
      CHECK(f > prev);
      prev = f;
    }
  }

  SUBCASE("input validation") {
    const IndexList empty_T;
    CHECK_THROWS_AS((void)memory_fraction({0}, empty_T, m), std::invalid_argument);
    IndexList outside = {0, 7};
    CHECK_THROWS_AS((void)memory_fraction(outside, T, m), std::invalid_argument);
    IndexList oob = {0, 9};
    CHECK_THROWS_AS((void)memory_fraction({}, oob, m), std::out_of_range);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(4);
    CHECK_THROWS_AS((void)memory_fraction({}, T, zero), std::invalid_argument);
  }
}

TEST_CASE("meta-training estimate") {
  const Eigen::Index n = 6, d = 9;
  Rank3Fixture fx = rank3_fixture(n, d, 31);
  std::mt19937_64 rng(32);
  Eigen::MatrixXd M(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) M(i, j) = 1.0 + unit_uniform(rng);

  ImputeConfig tiny;
  tiny.lambda = 1e-9;
  tiny.stages = 5;
  tiny.tol = 1e-9;
  PartialMatrix obs = apply_mask(fx.train, full_mask(n, d));

  SUBCASE("full observation reproduces the matrix and its frontiers") {
    MetaTrainResult res = meta_train_estimate(obs, M, tiny, 3, false, &fx.train);
    CHECK((res.completed - fx.train).cwiseAbs().maxCoeff() < 1e-7);
    CHECK((res.estimate - fx.train).cwiseAbs().maxCoeff() < 1e-7);
    REQUIRE(res.fronts.size() == static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) {
      std::vector<ParetoPoint> pts;
      for (Eigen::Index j = 0; j < d; ++j)
        pts.push_back({M(i, j), fx.train(i, j), static_cast<int>(j)});
      CHECK(front_ids(res.fronts[static_cast<std::size_t>(i)]) == front_ids(pareto_front(pts)));
    }
    REQUIRE(res.row_relative_error.size() == static_cast<std::size_t>(n));
    for (double r : res.row_relative_error) CHECK(r < 1e-7);
  }

  SUBCASE("ground truth is optional") {
    MetaTrainResult res = meta_train_estimate(obs, M, tiny, 3, false);
    CHECK(res.row_relative_error.empty());
  }

  SUBCASE("guards") {
    Eigen::MatrixXd M_bad(n, d + 1);
    M_bad.setOnes();
    CHECK_THROWS_AS((void)meta_train_estimate(obs, M_bad, tiny, 3, false), std::invalid_argument);

    ObservationMask holed = full_mask(n, d);
    holed.observed.row(2).setConstant(false);
    PartialMatrix sparse = apply_mask(fx.train, holed);
    CHECK_THROWS_AS((void)meta_train_estimate(sparse, M, tiny, 3, false), std::invalid_argument);

    // weighted completion refuses a mask without probabilities
    CHECK_THROWS_AS((void)meta_train_estimate(obs, M, tiny, 3, true), std::invalid_argument);
  }
}

TEST_CASE("meta-test pipeline") {
  const Eigen::Index n = 8, d = 10;
  Rank3Fixture fx = rank3_fixture(n, d, 77);
  Eigen::VectorXd m_new = spread_memories(d);
  const Oracle oracle = [&fx](Eigen::Index j) { return fx.fresh(j); };

  std::vector<ParetoPoint> true_pts;
  for (Eigen::Index j = 0; j < d; ++j)
    true_pts.push_back({m_new(j), fx.fresh(j), static_cast<int>(j)});
  const ParetoFront true_front = pareto_front(true_pts);

  SUBCASE("a dataset inside the factor model is recovered exactly") {
    for (Technique tech : {Technique::EdMf, Technique::QrMf, Technique::RandomMf, Technique::BoMf,
                           Technique::BoFull}) {
      MetaTestResult res =
          meta_test_pipeline(fx.train, m_new, tech, 4, std::nullopt, oracle, 3, GpConfig{}, 5);
      CHECK(res.estimate.selected.size() == 4);
      CHECK(res.feasible.size() == static_cast<std::size_t>(d));
      CHECK((res.estimate.e_hat - fx.fresh).cwiseAbs().maxCoeff() < 1e-7);
      CHECK(front_ids(res.front) == front_ids(true_front));
      CHECK(res.chosen.config_id == true_front.points.back().config_id);
    }
  }

  SUBCASE("an exhaustive budget copies every measurement") {
    MetaTestResult res = meta_test_pipeline(fx.train, m_new, Technique::EdMf, d, std::nullopt,
                                            oracle, 3, GpConfig{}, 0);
    CHECK(res.estimate.selected.size() == static_cast<std::size_t>(d));
    CHECK((res.estimate.e_hat - fx.fresh).cwiseAbs().maxCoeff() == 0.0);

    // budgets beyond the feasible count clamp to it
    MetaTestResult big = meta_test_pipeline(fx.train, m_new, Technique::RandomMf, 50, std::nullopt,
                                            oracle, 3, GpConfig{}, 0);
    CHECK(big.estimate.selected.size() == static_cast<std::size_t>(d));
  }

  SUBCASE("the cap restricts measuring but not the frontier") {
    // memory ordered against error, so every configuration is on the front
    // and the best errors sit above the cap
    std::vector<Eigen::Index> order(static_cast<std::size_t>(d));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](Eigen::Index a, Eigen::Index b) { return fx.fresh(a) > fx.fresh(b); });
    Eigen::VectorXd m_rank(d);
    for (std::size_t pos = 0; pos < order.size(); ++pos)
      m_rank(order[pos]) = 1.0 + static_cast<double>(pos);
    const double cap = 5.5;

    MetaTestResult res =
        meta_test_pipeline(fx.train, m_rank, Technique::EdMf, 4, cap, oracle, 3, GpConfig{}, 0);
    CHECK(res.feasible.size() == 5);
    for (Eigen::Index j : res.feasible) CHECK(m_rank(j) <= cap);
    for (Eigen::Index j : res.estimate.selected) CHECK(m_rank(j) <= cap);
    CHECK(res.chosen.memory <= cap);
    CHECK(res.front.size() == static_cast<std::size_t>(d));
    CHECK(res.front.points.back().memory > cap); // prediction reaches past the cap
    CHECK(res.chosen.config_id == order[4]);     // best error among the feasible five
  }

  SUBCASE("guards") {
    CHECK_THROWS_AS((void)meta_test_pipeline(fx.train, m_new, Technique::EdMf, 2, std::nullopt,
                                             oracle, 3, GpConfig{}, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)meta_test_pipeline(fx.train, m_new, Technique::EdMf, 4, 0.5, oracle, 3,
                                             GpConfig{}, 0),
                    std::runtime_error);
    Eigen::VectorXd two_cheap = m_new;
    two_cheap.setConstant(10.0);
    two_cheap(0) = 1.0;
    two_cheap(1) = 2.0;
    CHECK_THROWS_AS((void)meta_test_pipeline(fx.train, two_cheap, Technique::EdMf, 4, 5.0, oracle,
                                             3, GpConfig{}, 0),
                    std::runtime_error);
    Eigen::MatrixXd holed = fx.train;
    holed(0, 0) = std::nan("");
    CHECK_THROWS_AS((void)meta_test_pipeline(holed, m_new, Technique::EdMf, 4, std::nullopt,
                                             oracle, 3, GpConfig{}, 0),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)meta_test_pipeline(Eigen::MatrixXd(), m_new, Technique::EdMf, 4,
                                             std::nullopt, oracle, 3, GpConfig{}, 0),
                    std::invalid_argument);
  }
}

TEST_CASE("leave-one-out on an exhaustively measured toy") {
  MeasurementMatrix E, M;
  E.kind = MatrixKind::Error;
  E.values.resize(3, 4);
  E.values << 0.9, 0.2, 0.6, 0.4, //
      0.1, 0.8, 0.3, 0.7,         //
      0.5, 0.6, 0.2, 0.9;
  M.kind = MatrixKind::Memory;
  M.values.resize(3, 4);
  for (Eigen::Index i = 0; i < 3; ++i)
    for (Eigen::Index j = 0; j < 4; ++j)
      M.values(i, j) = (1.0 + 0.1 * static_cast<double>(i)) * static_cast<double>(j + 1);
  E.row_ids = {"a", "b", "c"};
  M.row_ids = E.row_ids;
  E.col_ids = {7, 8, 9, 10};
  M.col_ids = E.col_ids;

  // the completion shrinks singular values by lambda, so the embeddings stay
  // rank 2 only while every train block clears it with margin
  for (Eigen::Index i = 0; i < 3; ++i) {
    Eigen::MatrixXd block(2, 4);
    Eigen::Index r = 0;
    for (Eigen::Index row = 0; row < 3; ++row)
      if (row != i) block.row(r++) = E.values.row(row);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(block);
    REQUIRE(svd.singularValues()(1) > 0.15);
  }

  const std::vector<Technique> all = {Technique::EdMf, Technique::QrMf, Technique::RandomMf,
                                      Technique::BoMf, Technique::BoFull};
  RunReport rep = run_meta_loocv(E, M, make_setting("I"), all, {4}, {0, 1}, 2);

  CHECK(rep.setting == "I");
  CHECK(!rep.memory_cap.has_value());
  REQUIRE(rep.records.size() == 3 * 5 * 2);

  const std::map<std::string, int> want_chosen = {{"a", 8}, {"b", 7}, {"c", 9}};
  const std::map<std::string, double> want_err = {{"a", 0.2}, {"b", 0.1}, {"c", 0.2}};
  for (const SplitRecord &rec : rep.records) {
    CHECK(rec.convergence == 0.0);
    CHECK(rec.hyperdiff == 0.0);
    CHECK(rec.relative_error == 0.0);
    // the numerator sums memories in selection order, so allow rounding ulps
    CHECK(rec.memory_fraction == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rec.selected.size() == 4);
    const std::set<int> got(rec.selected.begin(), rec.selected.end());
    const std::set<int> want = {7, 8, 9, 10};
    CHECK(got == want);
    CHECK(rec.chosen_config == want_chosen.at(rec.dataset));
    CHECK(rec.chosen_true_error == want_err.at(rec.dataset));
  }

  REQUIRE(rep.aggregates.size() == 5);
  for (const AggregateRow &row : rep.aggregates) {
    CHECK(row.budget == 4);
    CHECK(row.convergence_mean == 0.0);
    CHECK(row.convergence_se == 0.0);
    CHECK(row.hyperdiff_mean == 0.0);
    CHECK(row.memory_fraction_mean == doctest::Approx(1.0).epsilon(1e-12));
  }

  SUBCASE("identical reruns") {
    RunReport again = run_meta_loocv(E, M, make_setting("I"), all, {4}, {0, 1}, 2);
    REQUIRE(again.records.size() == rep.records.size());
    for (std::size_t r = 0; r < rep.records.size(); ++r) {
      CHECK(again.records[r].dataset == rep.records[r].dataset);
      CHECK(again.records[r].technique == rep.records[r].technique);
      CHECK(again.records[r].seed == rep.records[r].seed);
      CHECK(again.records[r].selected == rep.records[r].selected);
      CHECK(again.records[r].chosen_config == rep.records[r].chosen_config);
      CHECK(again.records[r].relative_error == rep.records[r].relative_error);
    }
  }

  SUBCASE("input guards") {
    MeasurementMatrix wrong = E;
    CHECK_THROWS_AS((void)run_meta_loocv(wrong, E, make_setting("I"), all, {4}, {0}, 2),
                    std::invalid_argument);
    std::vector<int> low_budget = {1};
    CHECK_THROWS_AS((void)run_meta_loocv(E, M, make_setting("I"), all, low_budget, {0}, 2),
                    std::invalid_argument);
    std::vector<Technique> none;
    CHECK_THROWS_AS((void)run_meta_loocv(E, M, make_setting("I"), none, {4}, {0}, 2),
                    std::invalid_argument);
  }
}

TEST_CASE("capped uniform-sampling smoke run") {
  auto [E, M] = synth_lowrank(20, 30, 3, 0.01, 7);
  const std::vector<Technique> mf = {Technique::EdMf, Technique::QrMf, Technique::RandomMf};
  RunReport rep = run_meta_loocv(E, M, make_setting("IV"), mf, {3, 5}, {0, 1}, 3);

  REQUIRE(rep.memory_cap.has_value());
  CHECK(*rep.memory_cap == median_entry(M.values));
  REQUIRE(rep.records.size() == 20 * 3 * 2 * 2);

  std::map<std::string, Eigen::Index> row_of;
  for (std::size_t i = 0; i < E.row_ids.size(); ++i)
    row_of[E.row_ids[i]] = static_cast<Eigen::Index>(i);
  for (const SplitRecord &rec : rep.records) {
    const Eigen::Index i = row_of.at(rec.dataset);
    CHECK(rec.selected.size() == static_cast<std::size_t>(rec.budget));
    for (int id : rec.selected) CHECK(M.values(i, id) <= *rep.memory_cap);
    CHECK(M.values(i, rec.chosen_config) <= *rep.memory_cap);
    CHECK(rec.memory_fraction > 0.0);
    CHECK(rec.memory_fraction <= 1.0);
    CHECK(std::isfinite(rec.convergence));
    CHECK(rec.convergence >= 0.0);
    CHECK(std::isfinite(rec.hyperdiff));
    CHECK(std::isfinite(rec.relative_error));
    CHECK(rec.chosen_true_error >= 0.0);
    CHECK(rec.chosen_true_error <= 1.0);
  }
  CHECK(rep.aggregates.size() == 3 * 2);

  SUBCASE("ratios against the design baseline") {
    std::vector<RelativePerformanceEntry> rel = relative_performance(rep);
    CHECK(rel.size() == 20 * 2 * 2 * 4); // datasets x other techniques x budgets x metrics
    for (const RelativePerformanceEntry &e : rel) {
      CHECK(e.technique != "ed-mf");
      if (!e.baseline_zero) CHECK(std::isfinite(e.ratio));
    }
  }
}

TEST_CASE("synthetic benchmark generator") {
  auto [E, M] = synth_lowrank(20, 30, 3, 0.0, 11);
  CHECK(E.rows() == 20);
  CHECK(E.cols() == 30);
  CHECK(E.values.minCoeff() > 0.0);
  CHECK(E.values.maxCoeff() < 1.0);
  CHECK(M.values.minCoeff() > 0.0);
  CHECK(E.row_ids[0] == "ds000");
  CHECK(E.row_ids[19] == "ds019");
  CHECK(std::set<int>(E.col_ids.begin(), E.col_ids.end()).size() == 30);

  SUBCASE("deterministic per seed") {
    auto [E2, M2] = synth_lowrank(20, 30, 3, 0.0, 11);
    CHECK(E2.values == E.values);
    CHECK(M2.values == M.values);
    auto [E3, M3] = synth_lowrank(20, 30, 3, 0.0, 12);
    (void)M3;
    CHECK(E3.values != E.values);
  }

  SUBCASE("noiseless logits are exactly low rank") {
    Eigen::MatrixXd logit(20, 30);
    for (Eigen::Index i = 0; i < 20; ++i)
      for (Eigen::Index j = 0; j < 30; ++j)
        logit(i, j) = std::log(E.values(i, j) / (1.0 - E.values(i, j)));
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(logit);
    CHECK(svd.singularValues()(2) > 1e-3);
    CHECK(svd.singularValues()(3) < 1e-9);
  }

  SUBCASE("noisy benchmark keeps most spectral mass in few directions") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      auto [En, Mn] = synth_lowrank(87, 99, 5, 0.01, seed);
      (void)Mn;
      Eigen::BDCSVD<Eigen::MatrixXd> svd(En.values);
      CHECK(explained_variance(svd.singularValues(), 5) > 0.7);
    }
  }

  SUBCASE("memory spans the configuration grid") {
    std::vector<PrecisionConfig> grid = standard_config_grid();
    REQUIRE(grid.size() == 99);
    std::set<int> ids;
    for (const PrecisionConfig &c : grid) {
      ids.insert(c.id);
      c.format_a.validate();
      c.format_b.validate();
    }
    CHECK(ids.size() == 99);
  }

  SUBCASE("guards") {
    CHECK_THROWS_AS((void)synth_lowrank(0, 30, 3, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)synth_lowrank(20, 30, 0, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)synth_lowrank(20, 30, 21, 0.0, 1), std::invalid_argument);
    CHECK_THROWS_AS((void)synth_lowrank(20, 30, 3, -0.1, 1), std::invalid_argument);
  }
}

TEST_CASE("median entry") {
  Eigen::MatrixXd odd(1, 3);
  odd << 3, 1, 2;
  CHECK(median_entry(odd) == 2.0);
  Eigen::MatrixXd even(2, 2);
  even << 1, 2, 3, 10;
  CHECK(median_entry(even) == 2.5);
  CHECK_THROWS_AS((void)median_entry(Eigen::MatrixXd()), std::invalid_argument);
}

TEST_CASE("relative performance against a baseline") {
  RunReport rep;
  rep.techniques = {"ed-mf", "random-mf"};
  rep.budgets = {3};
  rep.records.push_back(make_record("x", "ed-mf", 0, 0.2, 0.1, 0.05, 0.5));
  rep.records.push_back(make_record("x", "ed-mf", 1, 0.4, 0.1, 0.05, 0.5));
  rep.records.push_back(make_record("x", "random-mf", 0, 0.6, 0.3, 0.05, 0.5));
  rep.records.push_back(make_record("x", "random-mf", 1, 0.6, 0.3, 0.05, 0.5));
  rep.records.push_back(make_record("y", "ed-mf", 0, 0.0, 0.0, 0.1, 0.5));
  rep.records.push_back(make_record("y", "random-mf", 0, 0.0, 0.3, 0.2, 0.5));

  std::vector<RelativePerformanceEntry> rel = relative_performance(rep, "ed-mf");
  REQUIRE(rel.size() == 8); // 2 datasets x 1 technique x 1 budget x 4 metrics

  auto find = [&rel](const std::string &ds, const std::string &metric) {
    for (const RelativePerformanceEntry &e : rel)
      if (e.dataset == ds && e.metric == metric) return e;
    throw std::logic_error("entry not found");
  };

  // seed means: 0.3 for the baseline, 0.6 for the variant
  CHECK(find("x", "convergence").ratio == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(find("x", "hyperdiff").ratio == doctest::Approx(3.0).epsilon(1e-12));
  CHECK(find("x", "relative_error").ratio == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!find("x", "convergence").baseline_zero);

  const RelativePerformanceEntry tie = find("y", "convergence");
  CHECK(tie.baseline_zero);
  CHECK(tie.exact_tie);
  const RelativePerformanceEntry loss = find("y", "hyperdiff");
  CHECK(loss.baseline_zero);
  CHECK(!loss.exact_tie);

  CHECK_THROWS_AS((void)relative_performance(rep, "bo-full"), std::invalid_argument);
}
