#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

namespace pfr {

using ArrayXXb = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

enum class MatrixKind { Error, Memory };

// Datasets on rows, configurations on columns.
struct MeasurementMatrix {
  MatrixKind kind = MatrixKind::Error;
  Eigen::MatrixXd values;
  std::vector<std::string> row_ids;
  std::vector<int> col_ids;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }

  // Id vectors must match the shape; non-missing cells must lie in [0, 1]
  // for error matrices and be strictly positive for memory matrices.
  void validate() const;
  // Additionally rejects any missing (NaN) cell.
  void require_full() const;
};

// Set of observed cells, optionally with the sampling probability that
// produced each cell (needed by the inverse-propensity-weighted completer).
struct ObservationMask {
  ArrayXXb observed;   // n x d
  Eigen::MatrixXd probs; // 0x0 when no probabilities attached

  Eigen::Index rows() const { return observed.rows(); }
  Eigen::Index cols() const { return observed.cols(); }
  bool has_probs() const { return probs.size() > 0; }
  Eigen::Index count() const { return observed.count(); }
  void validate() const; // probs shape matches and P in (0,1] on observed cells
};

// A matrix with explicit missing cells: unobserved entries hold NaN and the
// mask says which cells are real. Zero-filling happens only inside the
// completion update, never in the stored data.
struct PartialMatrix {
  Eigen::MatrixXd values;
  ObservationMask mask;

  Eigen::Index rows() const { return values.rows(); }
  Eigen::Index cols() const { return values.cols(); }
};

PartialMatrix apply_mask(const Eigen::MatrixXd &E, const ObservationMask &mask);

// Bernoulli mask with the given per-cell inclusion probabilities; cells are
// drawn in row-major order so a seed fully determines the result. The
// probabilities are recorded on the mask.
ObservationMask sample_mask(const Eigen::MatrixXd &P, std::uint64_t seed);

// Constant-probability special case of sample_mask.
ObservationMask uniform_mask(Eigen::Index n, Eigen::Index d, double ratio, std::uint64_t seed);

// Cheap-cells-first sampling probabilities: P_ij = p_max * F(1/M_ij) where F
// is the empirical CDF of all inverse memory entries (ties share the maximal
// rank, so the cheapest cell always gets exactly p_max).
Eigen::MatrixXd nonuniform_probs(const Eigen::MatrixXd &M, double p_max);

// Kendall tau-a: (concordant - discordant) / (n choose 2); tied pairs count
// for neither.
double kendall_tau(const Eigen::VectorXd &u, const Eigen::VectorXd &v);

double relative_error(const Eigen::VectorXd &estimate, const Eigen::VectorXd &truth);
double relative_error(const Eigen::MatrixXd &estimate, const Eigen::MatrixXd &truth);

// Fraction of squared spectral mass in the top k singular values.
double explained_variance(const Eigen::VectorXd &singular_values, Eigen::Index k);

} // namespace pfr
