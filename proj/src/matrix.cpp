#include "pfr/matrix.hpp"

#include "pfr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pfr {

void MeasurementMatrix::validate() const {
  if (static_cast<Eigen::Index>(row_ids.size()) != rows())
    throw std::invalid_argument("matrix: row id count does not match shape");
  if (static_cast<Eigen::Index>(col_ids.size()) != cols())
    throw std::invalid_argument("matrix: column id count does not match shape");
  for (Eigen::Index i = 0; i < rows(); ++i)
    for (Eigen::Index j = 0; j < cols(); ++j) {
      const double v = values(i, j);
      if (std::isnan(v)) continue;
      if (std::isinf(v)) throw std::invalid_argument("matrix: infinite entry");
      if (kind == MatrixKind::Error && (v < 0.0 || v > 1.0))
        throw std::invalid_argument("matrix: error entries must lie in [0, 1]");
      if (kind == MatrixKind::Memory && v <= 0.0)
        throw std::invalid_argument("matrix: memory entries must be positive");
    }
}

void MeasurementMatrix::require_full() const {
  validate();
  if (values.hasNaN()) throw std::invalid_argument("matrix: missing entries where a fully observed matrix is required");
}

void ObservationMask::validate() const {
  if (!has_probs()) return;
  if (probs.rows() != rows() || probs.cols() != cols())
    throw std::invalid_argument("mask: probability shape does not match");
  for (Eigen::Index i = 0; i < rows(); ++i)
    for (Eigen::Index j = 0; j < cols(); ++j)
      if (observed(i, j) && !(probs(i, j) > 0.0 && probs(i, j) <= 1.0))
        throw std::invalid_argument("mask: observed cells need probabilities in (0, 1]");
}

PartialMatrix apply_mask(const Eigen::MatrixXd &E, const ObservationMask &mask) {
  if (E.rows() != mask.rows() || E.cols() != mask.cols())
    throw std::invalid_argument("apply_mask: shapes disagree");
  mask.validate();
  PartialMatrix out;
  out.mask = mask;
  out.values = Eigen::MatrixXd::Constant(E.rows(), E.cols(), std::numeric_limits<double>::quiet_NaN());
  for (Eigen::Index i = 0; i < E.rows(); ++i)
    for (Eigen::Index j = 0; j < E.cols(); ++j)
      if (mask.observed(i, j)) {
        if (std::isnan(E(i, j))) throw std::invalid_argument("apply_mask: mask selects a missing cell");
        out.values(i, j) = E(i, j);
      }
  return out;
}

ObservationMask sample_mask(const Eigen::MatrixXd &P, std::uint64_t seed) {
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      if (!(P(i, j) >= 0.0 && P(i, j) <= 1.0))
        throw std::invalid_argument("sample_mask: probabilities must lie in [0, 1]");
  ObservationMask mask;
  mask.observed = ArrayXXb::Constant(P.rows(), P.cols(), false);
  mask.probs = P;
  std::mt19937_64 rng(seed);
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      mask.observed(i, j) = unit_uniform(rng) < P(i, j);
  return mask;
}

ObservationMask uniform_mask(Eigen::Index n, Eigen::Index d, double ratio, std::uint64_t seed) {
  if (n <= 0 || d <= 0) throw std::invalid_argument("uniform_mask: empty shape");
  return sample_mask(Eigen::MatrixXd::Constant(n, d, ratio), seed);
}

Eigen::MatrixXd nonuniform_probs(const Eigen::MatrixXd &M, double p_max) {
  if (!(p_max > 0.0 && p_max <= 1.0))
    throw std::invalid_argument("nonuniform_probs: p_max must lie in (0, 1]");
  const Eigen::Index n = M.rows(), d = M.cols();
  if (n * d == 0) throw std::invalid_argument("nonuniform_probs: empty matrix");
  std::vector<double> inv;
  inv.reserve(static_cast<std::size_t>(n * d));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      if (!(M(i, j) > 0.0)) throw std::invalid_argument("nonuniform_probs: memory entries must be positive");
      inv.push_back(1.0 / M(i, j));
    }
  std::sort(inv.begin(), inv.end());
  Eigen::MatrixXd P(n, d);
  const double total = static_cast<double>(inv.size());
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) {
      const double x = 1.0 / M(i, j);
      const auto rank = std::upper_bound(inv.begin(), inv.end(), x) - inv.begin();
      P(i, j) = p_max * static_cast<double>(rank) / total;
    }
  return P;
}

double kendall_tau(const Eigen::VectorXd &u, const Eigen::VectorXd &v) {
  const Eigen::Index n = u.size();
  if (v.size() != n) throw std::invalid_argument("kendall_tau: lengths disagree");
  if (n < 2) throw std::invalid_argument("kendall_tau: need at least two entries");
  long long concordant = 0, discordant = 0;
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const double du = u(i) - u(j);
      const double dv = v(i) - v(j);
      const double s = du * dv;
      if (s > 0.0) ++concordant;
      else if (s < 0.0) ++discordant;
    }
  const double pairs = static_cast<double>(n) * static_cast<double>(n - 1) / 2.0;
  return static_cast<double>(concordant - discordant) / pairs;
}

double relative_error(const Eigen::VectorXd &estimate, const Eigen::VectorXd &truth) {
  if (estimate.size() != truth.size()) throw std::invalid_argument("relative_error: lengths disagree");
  const double denom = truth.norm();
  if (denom == 0.0) throw std::invalid_argument("relative_error: reference has zero norm");
  return (estimate - truth).norm() / denom;
}

double relative_error(const Eigen::MatrixXd &estimate, const Eigen::MatrixXd &truth) {
  if (estimate.rows() != truth.rows() || estimate.cols() != truth.cols())
    throw std::invalid_argument("relative_error: shapes disagree");
  const double denom = truth.norm();
  if (denom == 0.0) throw std::invalid_argument("relative_error: reference has zero norm");
  return (estimate - truth).norm() / denom;
}

double explained_variance(const Eigen::VectorXd &singular_values, Eigen::Index k) {
  if (k < 1 || k > singular_values.size())
    throw std::invalid_argument("explained_variance: k out of range");
  const double total = singular_values.squaredNorm();
  if (total == 0.0) return 1.0;
  return singular_values.head(k).squaredNorm() / total;
}

} // namespace pfr
