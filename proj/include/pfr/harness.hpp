#pragma once

#include "pfr/completion.hpp"
#include "pfr/formats.hpp"
#include "pfr/matrix.hpp"
#include "pfr/pareto.hpp"
#include "pfr/selection.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace pfr {

enum class ObservationScheme { Full, Uniform, Nonuniform };

// One leave-one-out evaluation regime: how the meta-training block is
// observed, and whether meta-test measurements are memory-capped. The six
// combinations are conventionally numbered I..VI:
//   I   full,        no cap      II  full,        cap
//   III uniform,     no cap      IV  uniform,     cap
//   V   nonuniform,  no cap      VI  nonuniform,  cap
struct LoocvSetting {
  ObservationScheme scheme = ObservationScheme::Full;
  double ratio = 0.2;        // uniform sampling rate
  double p_max = 0.5;        // ceiling for cheap-cells-first sampling
  bool memory_cap = false;
  double cap_override = -1.0; // > 0 replaces the median-of-M default

  std::string name() const;
  void validate() const;
};

// Accepts "I".."VI" or "1".."6".
LoocvSetting make_setting(const std::string &label, double ratio = 0.2, double p_max = 0.5,
                          double cap_override = -1.0);

struct SplitRecord {
  std::uint64_t seed = 0;
  std::string dataset;
  std::string technique;
  int budget = 0;
  std::vector<int> selected; // measured configuration ids, in selection order
  double memory_fraction = 0.0;
  double convergence = 0.0;
  double hyperdiff = 0.0;
  double relative_error = 0.0;
  int chosen_config = 0;
  double chosen_true_error = 0.0;
};

struct AggregateRow {
  std::string technique;
  int budget = 0;
  double convergence_mean = 0.0, convergence_se = 0.0;
  double hyperdiff_mean = 0.0, hyperdiff_se = 0.0;
  double relative_error_mean = 0.0, relative_error_se = 0.0;
  double chosen_true_error_mean = 0.0, chosen_true_error_se = 0.0;
  double memory_fraction_mean = 0.0;
};

struct RunReport {
  std::string setting;
  std::vector<std::string> techniques;
  std::vector<int> budgets;
  std::vector<std::uint64_t> seeds;
  int rank = 3;
  ImputeConfig impute;
  GpConfig gp;
  std::optional<double> memory_cap; // resolved cap in bytes, when the setting has one
  std::vector<SplitRecord> records;       // split-major, then seed, technique, budget
  std::vector<AggregateRow> aggregates;   // means and standard errors across datasets
};

// Meta-training estimate: complete the observed block, truncate to the given
// rank, and build one frontier per dataset against its memory row. Rows of
// `truth`, when given, yield per-row relative errors of the estimate.
struct MetaTrainResult {
  Eigen::MatrixXd completed; // completion output
  Eigen::MatrixXd estimate;  // rank-truncated reconstruction
  std::vector<ParetoFront> fronts;
  std::vector<double> row_relative_error; // empty without ground truth
};

MetaTrainResult meta_train_estimate(const PartialMatrix &E_obs, const Eigen::MatrixXd &M,
                                    const ImputeConfig &cfg, Eigen::Index rank, bool weighted,
                                    const Eigen::MatrixXd *truth = nullptr);

// Meta-test for one new dataset: factorize the training matrix, restrict to
// configurations within the cap, select measurements with the given
// technique, embed the dataset from the measured errors, predict the rest
// (predictions clipped to [0, 1], measured cells kept verbatim), and pick
// the highest-memory frontier point within the cap. The frontier spans all
// configurations; the cap restricts measuring, not predicting.
struct MetaTestResult {
  MetaTestEstimate estimate;
  IndexList feasible;
  ParetoFront front;   // estimated frontier, raw memory coordinates
  ParetoPoint chosen;  // config_id holds the column index
};

MetaTestResult meta_test_pipeline(const Eigen::MatrixXd &E_train, const Eigen::VectorXd &m_new,
                                  Technique technique, Eigen::Index budget,
                                  std::optional<double> m_max, const Oracle &oracle,
                                  Eigen::Index rank = 3, const GpConfig &gp = {},
                                  std::uint64_t seed = 0);

// Leave-one-dataset-out benchmark over techniques x budgets x seeds.
RunReport run_meta_loocv(const MeasurementMatrix &E, const MeasurementMatrix &M,
                         const LoocvSetting &setting, const std::vector<Technique> &techniques,
                         const std::vector<int> &budgets, const std::vector<std::uint64_t> &seeds,
                         Eigen::Index rank = 3, const ImputeConfig &impute = {},
                         const GpConfig &gp = {});

// Measured-memory share: sum of m over S divided by the sum over T.
double memory_fraction(const IndexList &S, const IndexList &T, const Eigen::VectorXd &m_new);

// Per-dataset metric ratios against a baseline technique. A zero baseline
// cannot be divided through; such entries carry baseline_zero (and
// exact_tie when the numerator is zero too) instead of a ratio.
struct RelativePerformanceEntry {
  std::string dataset;
  std::string technique;
  int budget = 0;
  std::string metric;
  double ratio = 0.0;
  bool baseline_zero = false;
  bool exact_tie = false;
};

std::vector<RelativePerformanceEntry> relative_performance(const RunReport &report,
                                                           const std::string &baseline = "ed-mf");

// Synthetic benchmark pair: E = sigmoid(A^T B + noise) clipped to [0, 1]
// with A (rank x n) and B (rank x d) of N(0, 1/rank) entries, and M from the
// memory model over a standard format grid with per-dataset activation
// scale. Deterministic per seed.
std::pair<MeasurementMatrix, MeasurementMatrix> synth_lowrank(Eigen::Index n, Eigen::Index d,
                                                              Eigen::Index rank, double noise_sd,
                                                              std::uint64_t seed);

// The 99-configuration grid used for synthetic memory matrices: 11 low-bit
// weight/activation formats crossed with 9 wider optimizer formats.
std::vector<PrecisionConfig> standard_config_grid();

// Median over all entries, the default memory cap.
double median_entry(const Eigen::MatrixXd &M);

} // namespace pfr
