#include "pfr/harness.hpp"

#include "pfr/rng.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <iterator>
#include <limits>
#include <stdexcept>
#include <unordered_map>

namespace pfr {

namespace {

constexpr const char *kMetricNames[] = {"convergence", "hyperdiff", "relative_error",
                                        "chosen_true_error"};
constexpr int kMetricCount = 4;

Eigen::VectorXd measure_all(const Oracle &oracle, const IndexList &S) {
  Eigen::VectorXd e(S.size());
  for (std::size_t t = 0; t < S.size(); ++t) e(static_cast<Eigen::Index>(t)) = oracle(S[t]);
  return e;
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd &Y, const IndexList &S) {
  Eigen::MatrixXd out(Y.rows(), static_cast<Eigen::Index>(S.size()));
  for (std::size_t t = 0; t < S.size(); ++t) out.col(static_cast<Eigen::Index>(t)) = Y.col(S[t]);
  return out;
}

// Shared pipeline body; the model is passed in so callers holding many
// (technique, budget) cells per factorization do the SVD once.
MetaTestResult meta_test_on_model(const EmbeddingModel &model, const Eigen::MatrixXd &E_train,
                                  const Eigen::VectorXd &m_new, Technique technique,
                                  Eigen::Index budget, std::optional<double> m_max,
                                  const Oracle &oracle, const GpConfig &gp, std::uint64_t seed) {
  const Eigen::Index d = model.Y.cols();
  const Eigen::Index k = model.Y.rows();
  if (m_new.size() != d) throw std::invalid_argument("memory row length mismatch");
  if (budget < k) throw std::invalid_argument("budget below the embedding rank");
  if (!oracle) throw std::invalid_argument("null measurement oracle");

  MetaTestResult out;
  for (Eigen::Index j = 0; j < d; ++j)
    if (!m_max || m_new(j) <= *m_max) out.feasible.push_back(j);
  if (out.feasible.empty()) throw std::runtime_error("no configuration within the memory cap");
  if (static_cast<Eigen::Index>(out.feasible.size()) < k)
    throw std::runtime_error("fewer feasible configurations than the embedding rank");
  const Eigen::Index l = std::min<Eigen::Index>(budget, out.feasible.size());

  MetaTestEstimate &est = out.estimate;
  switch (technique) {
  case Technique::EdMf:
    est.selected = greedy_ed({model.Y, out.feasible, l});
    est.e_obs = measure_all(oracle, est.selected);
    break;
  case Technique::QrMf:
    est.selected = qr_pivot_select(E_train, out.feasible, l);
    est.e_obs = measure_all(oracle, est.selected);
    break;
  case Technique::RandomMf:
    est.selected = select_random_rank_feasible(model.Y, out.feasible, l, seed);
    est.e_obs = measure_all(oracle, est.selected);
    break;
  case Technique::BoMf: {
    auto picked = bo_select(model.Y, out.feasible, l, oracle, gp, seed, k);
    est.selected = std::move(picked.first);
    est.e_obs = std::move(picked.second);
    break;
  }
  case Technique::BoFull: {
    auto picked = bo_select(E_train, out.feasible, l, oracle, gp, seed, k);
    est.selected = std::move(picked.first);
    est.e_obs = std::move(picked.second);
    break;
  }
  }

  est.x_new = embed_new(gather_columns(model.Y, est.selected), est.e_obs);
  est.e_hat = predict(model.Y, est.x_new).cwiseMax(0.0).cwiseMin(1.0);
  for (std::size_t t = 0; t < est.selected.size(); ++t)
    est.e_hat(est.selected[t]) = est.e_obs(static_cast<Eigen::Index>(t));

  std::vector<ParetoPoint> pts(static_cast<std::size_t>(d));
  for (Eigen::Index j = 0; j < d; ++j)
    pts[static_cast<std::size_t>(j)] = {m_new(j), est.e_hat(j), static_cast<int>(j)};
  out.front = pareto_front(pts);
  out.chosen = choose_config(out.front, m_max ? *m_max : std::numeric_limits<double>::infinity());
  return out;
}

double sample_sd(const std::vector<double> &v, double mean) {
  if (v.size() < 2) return 0.0;
  double acc = 0.0;
  for (double x : v) acc += (x - mean) * (x - mean);
  return std::sqrt(acc / static_cast<double>(v.size() - 1));
}

} // namespace

std::string LoocvSetting::name() const {
  switch (scheme) {
  case ObservationScheme::Full:
    return memory_cap ? "II" : "I";
  case ObservationScheme::Uniform:
    return memory_cap ? "IV" : "III";
  case ObservationScheme::Nonuniform:
    return memory_cap ? "VI" : "V";
  }
  throw std::logic_error("unknown observation scheme");
}

void LoocvSetting::validate() const {
  if (!(ratio > 0.0 && ratio <= 1.0)) throw std::invalid_argument("sampling ratio must be in (0, 1]");
  if (!(p_max > 0.0 && p_max <= 1.0)) throw std::invalid_argument("p_max must be in (0, 1]");
}

LoocvSetting make_setting(const std::string &label, double ratio, double p_max,
                          double cap_override) {
  LoocvSetting s;
  s.ratio = ratio;
  s.p_max = p_max;
  s.cap_override = cap_override;
  std::string u;
  for (char c : label) u.push_back(static_cast<char>(std::toupper(static_cast<unsigned char>(c))));
  if (u == "I" || u == "1") {
    s.scheme = ObservationScheme::Full;
  } else if (u == "II" || u == "2") {
    s.scheme = ObservationScheme::Full;
    s.memory_cap = true;
  } else if (u == "III" || u == "3") {
    s.scheme = ObservationScheme::Uniform;
  } else if (u == "IV" || u == "4") {
    s.scheme = ObservationScheme::Uniform;
    s.memory_cap = true;
  } else if (u == "V" || u == "5") {
    s.scheme = ObservationScheme::Nonuniform;
  } else if (u == "VI" || u == "6") {
    s.scheme = ObservationScheme::Nonuniform;
    s.memory_cap = true;
  } else {
    throw std::invalid_argument("unknown setting label: " + label);
  }
  s.validate();
  return s;
}

double median_entry(const Eigen::MatrixXd &M) {
  if (M.size() == 0) throw std::invalid_argument("median of an empty matrix");
  std::vector<double> v(M.data(), M.data() + M.size());
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  if (n % 2 == 1) return v[n / 2];
  return 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double memory_fraction(const IndexList &S, const IndexList &T, const Eigen::VectorXd &m_new) {
  if (T.empty()) throw std::invalid_argument("empty feasible set");
  double denom = 0.0;
  for (Eigen::Index t : T) {
    if (t < 0 || t >= m_new.size()) throw std::out_of_range("feasible index out of range");
    denom += m_new(t);
  }
  if (!(denom > 0.0)) throw std::invalid_argument("feasible memory must be positive");
  double num = 0.0;
  for (Eigen::Index s : S) {
    if (std::find(T.begin(), T.end(), s) == T.end())
      throw std::invalid_argument("selection outside the feasible set");
    num += m_new(s);
  }
  return num / denom;
}

MetaTrainResult meta_train_estimate(const PartialMatrix &E_obs, const Eigen::MatrixXd &M,
                                    const ImputeConfig &cfg, Eigen::Index rank, bool weighted,
                                    const Eigen::MatrixXd *truth) {
  const Eigen::Index n = E_obs.values.rows(), d = E_obs.values.cols();
  if (M.rows() != n || M.cols() != d) throw std::invalid_argument("memory matrix shape mismatch");
  if (truth && (truth->rows() != n || truth->cols() != d))
    throw std::invalid_argument("ground truth shape mismatch");
  for (Eigen::Index i = 0; i < n; ++i)
    if (!E_obs.mask.observed.row(i).any())
      throw std::invalid_argument("dataset row without any observed cell");

  MetaTrainResult out;
  if (weighted) {
    if (!E_obs.mask.has_probs())
      throw std::invalid_argument("weighted completion needs sampling probabilities");
    out.completed = weighted_softimpute(E_obs, E_obs.mask.probs, cfg);
  } else {
    out.completed = softimpute(E_obs, cfg);
  }
  out.estimate = truncated_factorize(out.completed, rank).reconstruct();

  const Eigen::MatrixXd clipped = out.estimate.cwiseMax(0.0).cwiseMin(1.0);
  out.fronts.reserve(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<ParetoPoint> pts(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j)
      pts[static_cast<std::size_t>(j)] = {M(i, j), clipped(i, j), static_cast<int>(j)};
    out.fronts.push_back(pareto_front(pts));
  }
  if (truth) {
    out.row_relative_error.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
      out.row_relative_error.push_back(
          relative_error(Eigen::VectorXd(out.estimate.row(i)), Eigen::VectorXd(truth->row(i))));
  }
  return out;
}

MetaTestResult meta_test_pipeline(const Eigen::MatrixXd &E_train, const Eigen::VectorXd &m_new,
                                  Technique technique, Eigen::Index budget,
                                  std::optional<double> m_max, const Oracle &oracle,
                                  Eigen::Index rank, const GpConfig &gp, std::uint64_t seed) {
  if (E_train.size() == 0) throw std::invalid_argument("empty training matrix");
  if (!E_train.allFinite()) throw std::invalid_argument("training matrix must be fully observed");
  const EmbeddingModel model = truncated_factorize(E_train, rank);
  return meta_test_on_model(model, E_train, m_new, technique, budget, m_max, oracle, gp, seed);
}

RunReport run_meta_loocv(const MeasurementMatrix &E, const MeasurementMatrix &M,
                         const LoocvSetting &setting, const std::vector<Technique> &techniques,
                         const std::vector<int> &budgets, const std::vector<std::uint64_t> &seeds,
                         Eigen::Index rank, const ImputeConfig &impute, const GpConfig &gp) {
  if (E.kind != MatrixKind::Error || M.kind != MatrixKind::Memory)
    throw std::invalid_argument("expected an error matrix and a memory matrix");
  E.validate();
  E.require_full();
  M.validate();
  M.require_full();
  if (E.rows() != M.rows() || E.cols() != M.cols())
    throw std::invalid_argument("error and memory shapes differ");
  if (E.rows() < 2) throw std::invalid_argument("leave-one-out needs at least two datasets");
  setting.validate();
  impute.validate();
  if (techniques.empty()) throw std::invalid_argument("no techniques given");
  if (budgets.empty()) throw std::invalid_argument("no budgets given");
  if (seeds.empty()) throw std::invalid_argument("no seeds given");
  for (int b : budgets)
    if (b < rank) throw std::invalid_argument("budget below the embedding rank");

  const Eigen::Index n = E.rows(), d = E.cols();

  RunReport rep;
  rep.setting = setting.name();
  for (Technique t : techniques) rep.techniques.push_back(technique_name(t));
  rep.budgets = budgets;
  rep.seeds = seeds;
  rep.rank = static_cast<int>(rank);
  rep.impute = impute;
  rep.gp = gp;
  std::optional<double> cap;
  if (setting.memory_cap)
    cap = setting.cap_override > 0.0 ? setting.cap_override : median_entry(M.values);
  rep.memory_cap = cap;
  rep.records.reserve(static_cast<std::size_t>(n) * seeds.size() * techniques.size() *
                      budgets.size());

  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::MatrixXd E_train(n - 1, d), M_train(n - 1, d);
    Eigen::Index r = 0;
    for (Eigen::Index row = 0; row < n; ++row) {
      if (row == i) continue;
      E_train.row(r) = E.values.row(row);
      M_train.row(r) = M.values.row(row);
      ++r;
    }
    const Eigen::VectorXd m_new = M.values.row(i).transpose();
    const Eigen::VectorXd e_true = E.values.row(i).transpose();
    const double m_lo = m_new.minCoeff(), m_hi = m_new.maxCoeff();

    std::vector<ParetoPoint> true_pts(static_cast<std::size_t>(d));
    for (Eigen::Index j = 0; j < d; ++j)
      true_pts[static_cast<std::size_t>(j)] = {m_new(j), e_true(j), static_cast<int>(j)};
    const ParetoFront true_front = normalize_memory(pareto_front(true_pts), m_lo, m_hi);

    const Oracle oracle = [&e_true](Eigen::Index j) { return e_true(j); };

    // Seed-independent work is hoisted out of the seed loop: the fully
    // observed completion for settings I/II and the sampling probabilities
    // for V/VI.
    Eigen::MatrixXd completed_full;
    EmbeddingModel model_full;
    if (setting.scheme == ObservationScheme::Full) {
      ObservationMask all;
      all.observed = ArrayXXb::Constant(n - 1, d, true);
      completed_full = softimpute(apply_mask(E_train, all), impute);
      model_full = truncated_factorize(completed_full, rank);
    }
    Eigen::MatrixXd P;
    if (setting.scheme == ObservationScheme::Nonuniform)
      P = nonuniform_probs(M_train, setting.p_max);

    for (std::uint64_t s : seeds) {
      const std::uint64_t split_seed = s ^ static_cast<std::uint64_t>(i);
      const std::uint64_t mask_seed = mix_seed(split_seed, 1);
      const std::uint64_t select_seed = mix_seed(split_seed, 2);

      Eigen::MatrixXd completed_local;
      EmbeddingModel model_local;
      const Eigen::MatrixXd *completed = &completed_full;
      const EmbeddingModel *model = &model_full;
      if (setting.scheme == ObservationScheme::Uniform) {
        const ObservationMask mask = uniform_mask(n - 1, d, setting.ratio, mask_seed);
        completed_local = softimpute(apply_mask(E_train, mask), impute);
      } else if (setting.scheme == ObservationScheme::Nonuniform) {
        const ObservationMask mask = sample_mask(P, mask_seed);
        completed_local = weighted_softimpute(apply_mask(E_train, mask), P, impute);
      }
      if (setting.scheme != ObservationScheme::Full) {
        model_local = truncated_factorize(completed_local, rank);
        completed = &completed_local;
        model = &model_local;
      }

      for (std::size_t ti = 0; ti < techniques.size(); ++ti) {
        for (int budget : budgets) {
          const MetaTestResult res = meta_test_on_model(*model, *completed, m_new,
                                                        techniques[ti], budget, cap, oracle, gp,
                                                        select_seed);
          const ParetoFront est_front = normalize_memory(res.front, m_lo, m_hi);

          SplitRecord rec;
          rec.seed = s;
          rec.dataset = E.row_ids[static_cast<std::size_t>(i)];
          rec.technique = rep.techniques[ti];
          rec.budget = budget;
          rec.selected.reserve(res.estimate.selected.size());
          for (Eigen::Index j : res.estimate.selected)
            rec.selected.push_back(E.col_ids[static_cast<std::size_t>(j)]);
          rec.memory_fraction = memory_fraction(res.estimate.selected, res.feasible, m_new);
          rec.convergence = convergence(est_front, true_front);
          rec.hyperdiff = hyperdiff(est_front, true_front, HyperBound{1.0, 1.0});
          rec.relative_error = relative_error(res.estimate.e_hat, e_true);
          rec.chosen_config = E.col_ids[static_cast<std::size_t>(res.chosen.config_id)];
          rec.chosen_true_error = e_true(res.chosen.config_id);
          rep.records.push_back(std::move(rec));
        }
      }
    }
  }

  // Aggregate each metric: first the per-dataset mean over seeds, then mean
  // and standard error of those per-dataset values.
  const std::size_t nt = techniques.size(), nb = budgets.size();
  const std::size_t nds = static_cast<std::size_t>(n);
  std::unordered_map<std::string, std::size_t> ds_index;
  for (std::size_t i = 0; i < nds; ++i) ds_index.emplace(E.row_ids[i], i);
  std::vector<std::vector<double>> sums(nt * nb * nds, std::vector<double>(kMetricCount + 1, 0.0));
  std::vector<std::size_t> counts(nt * nb * nds, 0);
  auto cell = [&](std::size_t ti, std::size_t bi, std::size_t di) {
    return (ti * nb + bi) * nds + di;
  };
  for (const SplitRecord &rec : rep.records) {
    const std::size_t ti = static_cast<std::size_t>(
        std::find(rep.techniques.begin(), rep.techniques.end(), rec.technique) -
        rep.techniques.begin());
    const std::size_t bi = static_cast<std::size_t>(
        std::find(budgets.begin(), budgets.end(), rec.budget) - budgets.begin());
    const std::size_t di = ds_index.at(rec.dataset);
    auto &acc = sums[cell(ti, bi, di)];
    acc[0] += rec.convergence;
    acc[1] += rec.hyperdiff;
    acc[2] += rec.relative_error;
    acc[3] += rec.chosen_true_error;
    acc[4] += rec.memory_fraction;
    ++counts[cell(ti, bi, di)];
  }
  for (std::size_t ti = 0; ti < nt; ++ti) {
    for (std::size_t bi = 0; bi < nb; ++bi) {
      std::vector<std::vector<double>> per_ds(kMetricCount + 1, std::vector<double>(nds));
      for (std::size_t di = 0; di < nds; ++di) {
        const std::size_t c = counts[cell(ti, bi, di)];
        for (int m = 0; m <= kMetricCount; ++m)
          per_ds[static_cast<std::size_t>(m)][di] =
              sums[cell(ti, bi, di)][static_cast<std::size_t>(m)] / static_cast<double>(c);
      }
      auto mean_of = [&](int m) {
        double acc = 0.0;
        for (double x : per_ds[static_cast<std::size_t>(m)]) acc += x;
        return acc / static_cast<double>(nds);
      };
      AggregateRow row;
      row.technique = rep.techniques[ti];
      row.budget = budgets[bi];
      row.convergence_mean = mean_of(0);
      row.convergence_se = sample_sd(per_ds[0], row.convergence_mean) / std::sqrt(double(nds));
      row.hyperdiff_mean = mean_of(1);
      row.hyperdiff_se = sample_sd(per_ds[1], row.hyperdiff_mean) / std::sqrt(double(nds));
      row.relative_error_mean = mean_of(2);
      row.relative_error_se = sample_sd(per_ds[2], row.relative_error_mean) / std::sqrt(double(nds));
      row.chosen_true_error_mean = mean_of(3);
      row.chosen_true_error_se =
          sample_sd(per_ds[3], row.chosen_true_error_mean) / std::sqrt(double(nds));
      row.memory_fraction_mean = mean_of(4);
      rep.aggregates.push_back(std::move(row));
    }
  }
  return rep;
}

std::vector<RelativePerformanceEntry> relative_performance(const RunReport &report,
                                                           const std::string &baseline) {
  if (std::find(report.techniques.begin(), report.techniques.end(), baseline) ==
      report.techniques.end())
    throw std::invalid_argument("baseline technique absent from the report: " + baseline);

  // Per-dataset seed means, keyed by dataset|technique|budget.
  std::vector<std::string> datasets;
  std::unordered_map<std::string, std::array<double, kMetricCount>> sums;
  std::unordered_map<std::string, std::size_t> counts;
  auto key = [](const std::string &ds, const std::string &tech, int budget) {
    return ds + "|" + tech + "|" + std::to_string(budget);
  };
  for (const SplitRecord &rec : report.records) {
    if (std::find(datasets.begin(), datasets.end(), rec.dataset) == datasets.end())
      datasets.push_back(rec.dataset);
    auto &acc = sums[key(rec.dataset, rec.technique, rec.budget)];
    acc[0] += rec.convergence;
    acc[1] += rec.hyperdiff;
    acc[2] += rec.relative_error;
    acc[3] += rec.chosen_true_error;
    ++counts[key(rec.dataset, rec.technique, rec.budget)];
  }
  auto mean_at = [&](const std::string &ds, const std::string &tech, int budget, int m) {
    const std::string k = key(ds, tech, budget);
    auto it = sums.find(k);
    if (it == sums.end()) throw std::logic_error("missing records for " + k);
    return it->second[static_cast<std::size_t>(m)] / static_cast<double>(counts.at(k));
  };

  std::vector<RelativePerformanceEntry> out;
  for (const std::string &ds : datasets) {
    for (const std::string &tech : report.techniques) {
      if (tech == baseline) continue;
      for (int budget : report.budgets) {
        for (int m = 0; m < kMetricCount; ++m) {
          RelativePerformanceEntry e;
          e.dataset = ds;
          e.technique = tech;
          e.budget = budget;
          e.metric = kMetricNames[m];
          const double v = mean_at(ds, tech, budget, m);
          const double b = mean_at(ds, baseline, budget, m);
          if (b == 0.0) {
            e.baseline_zero = true;
            e.exact_tie = (v == 0.0);
            e.ratio = 0.0;
          } else {
            e.ratio = v / b;
          }
          out.push_back(std::move(e));
        }
      }
    }
  }
  return out;
}

std::vector<PrecisionConfig> standard_config_grid() {
  static constexpr int kA[][2] = {{3, 1}, {3, 2}, {3, 3}, {3, 4}, {4, 1}, {4, 2},
                                  {4, 3}, {4, 4}, {5, 1}, {5, 2}, {5, 3}};
  static constexpr int kB[][2] = {{6, 7}, {6, 9}, {6, 11}, {7, 7}, {7, 9},
                                  {7, 11}, {8, 7}, {8, 9}, {8, 11}};
  std::vector<PrecisionConfig> grid;
  grid.reserve(std::size(kA) * std::size(kB));
  int id = 0;
  for (const auto &a : kA)
    for (const auto &b : kB)
      grid.push_back({id++, PrecisionFormat{a[0], a[1], -1}, PrecisionFormat{b[0], b[1], -1}});
  return grid;
}

std::pair<MeasurementMatrix, MeasurementMatrix> synth_lowrank(Eigen::Index n, Eigen::Index d,
                                                              Eigen::Index rank, double noise_sd,
                                                              std::uint64_t seed) {
  if (n < 1 || d < 1) throw std::invalid_argument("matrix dimensions must be positive");
  if (rank < 1 || rank > std::min(n, d))
    throw std::invalid_argument("rank must be in [1, min(n, d)]");
  if (noise_sd < 0.0) throw std::invalid_argument("noise_sd must be nonnegative");

  std::mt19937_64 rng(seed);
  const double scale = 1.0 / std::sqrt(static_cast<double>(rank));
  Eigen::MatrixXd A(rank, n), B(rank, d);
  for (Eigen::Index r = 0; r < rank; ++r)
    for (Eigen::Index i = 0; i < n; ++i) A(r, i) = scale * unit_normal(rng);
  for (Eigen::Index r = 0; r < rank; ++r)
    for (Eigen::Index j = 0; j < d; ++j) B(r, j) = scale * unit_normal(rng);
  Eigen::MatrixXd L = A.transpose() * B;
  if (noise_sd > 0.0)
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < d; ++j) L(i, j) += noise_sd * unit_normal(rng);

  Eigen::MatrixXd Ev(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      Ev(i, j) = std::min(1.0, std::max(0.0, 1.0 / (1.0 + std::exp(-L(i, j)))));

  const std::vector<PrecisionConfig> grid = standard_config_grid();
  Eigen::MatrixXd Mv(n, d);
  for (Eigen::Index i = 0; i < n; ++i) {
    // Per-dataset model scale. The band is kept narrow so that under a
    // global median cap every dataset still has several feasible configs.
    const double f = 1.0 + 0.1 * unit_uniform(rng);
    ArchitectureDescriptor arch;
    arch.weight_count = std::llround(11000000.0 * f);
    arch.activation_elements_per_sample = std::llround(2000000.0 * f);
    arch.batch_size = 32;
    arch.optimizer_state_multiplier = 2.0;
    for (Eigen::Index j = 0; j < d; ++j)
      Mv(i, j) = memory_bytes(grid[static_cast<std::size_t>(j) % grid.size()], arch).total_bytes;
  }

  MeasurementMatrix E, M;
  E.kind = MatrixKind::Error;
  E.values = std::move(Ev);
  M.kind = MatrixKind::Memory;
  M.values = std::move(Mv);
  for (Eigen::Index i = 0; i < n; ++i) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "ds%03lld", static_cast<long long>(i));
    E.row_ids.emplace_back(buf);
    M.row_ids.emplace_back(buf);
  }
  for (Eigen::Index j = 0; j < d; ++j) {
    E.col_ids.push_back(static_cast<int>(j));
    M.col_ids.push_back(static_cast<int>(j));
  }
  E.validate();
  M.validate();
  return {std::move(E), std::move(M)};
}

} // namespace pfr
