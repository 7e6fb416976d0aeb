#include "pfr/completion.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pfr {

void ImputeConfig::validate() const {
  if (!(lambda >= 0.0)) throw std::invalid_argument("impute: lambda must be >= 0");
  if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("impute: decay must lie in (0, 1)");
  if (stages < 1) throw std::invalid_argument("impute: need at least one stage");
  if (max_iters < 1) throw std::invalid_argument("impute: max_iters must be positive");
  if (!(tol > 0.0)) throw std::invalid_argument("impute: tol must be positive");
}

std::vector<double> ImputeConfig::schedule() const {
  validate();
  std::vector<double> lams(static_cast<std::size_t>(stages));
  for (int i = 1; i <= stages; ++i)
    lams[static_cast<std::size_t>(i - 1)] = lambda * std::pow(decay, static_cast<double>(i - stages));
  lams.back() = lambda;
  return lams;
}

Eigen::MatrixXd soft_threshold_svd(const Eigen::MatrixXd &A, double lam) {
  if (!(lam >= 0.0)) throw std::invalid_argument("soft_threshold_svd: lambda must be >= 0");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd &s = svd.singularValues();
  Eigen::Index r = 0;
  while (r < s.size() && s(r) > lam) ++r;
  if (r == 0) return Eigen::MatrixXd::Zero(A.rows(), A.cols());
  const Eigen::VectorXd shrunk = s.head(r).array() - lam;
  return svd.matrixU().leftCols(r) * shrunk.asDiagonal() * svd.matrixV().leftCols(r).transpose();
}

namespace {

// Soft threshold computed through the Gram matrix of the shorter side. A
// symmetric eigensolve is several times cheaper than a direct SVD at the
// iterate shapes seen here, and the squaring costs accuracy only near the
// machine floor, far below any threshold the schedule produces. Kept
// components never divide by zero: sigma > lam >= 0 is strict.
Eigen::MatrixXd svt_via_gram(const Eigen::MatrixXd &Z, double lam) {
  const Eigen::Index n = Z.rows(), d = Z.cols();
  const bool wide = n <= d;
  Eigen::MatrixXd G;
  if (wide)
    G.noalias() = Z * Z.transpose();
  else
    G.noalias() = Z.transpose() * Z;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(G);
  const Eigen::VectorXd &ev = eig.eigenvalues(); // ascending
  const Eigen::Index s = ev.size();
  Eigen::Index lo = s;
  while (lo > 0 && std::sqrt(std::max(ev(lo - 1), 0.0)) > lam) --lo;
  const Eigen::Index r = s - lo;
  if (r == 0) return Eigen::MatrixXd::Zero(n, d);
  Eigen::VectorXd scale(r);
  for (Eigen::Index t = 0; t < r; ++t) {
    const double sigma = std::sqrt(ev(lo + t));
    scale(t) = (sigma - lam) / sigma;
  }
  const Eigen::MatrixXd B = eig.eigenvectors().rightCols(r);
  Eigen::MatrixXd out(n, d);
  if (wide)
    out.noalias() = B * (scale.asDiagonal() * (B.transpose() * Z));
  else
    out.noalias() = (Z * B) * scale.asDiagonal() * B.transpose();
  return out;
}

// Shared proximal loop. For the plain completer `weights` is empty and the
// step is the classic fill-then-shrink update; with weights it becomes a
// gradient step of length 1/w_max on the weighted least-squares term.
Eigen::MatrixXd impute_loop(const PartialMatrix &observed, const Eigen::MatrixXd &weights,
                            double w_max, const ImputeConfig &cfg, ImputeDiagnostics *diag) {
  const Eigen::Index n = observed.rows(), d = observed.cols();
  if (n == 0 || d == 0) throw std::invalid_argument("softimpute: empty matrix");
  if (observed.mask.rows() != n || observed.mask.cols() != d)
    throw std::invalid_argument("softimpute: mask shape disagrees");
  if (observed.mask.count() == 0) throw std::invalid_argument("softimpute: no observed cells");
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      if (observed.mask.observed(i, j) && std::isnan(observed.values(i, j)))
        throw std::invalid_argument("softimpute: observed cell holds NaN");

  const bool weighted = weights.size() > 0;
  if (diag) diag->stages.clear();

  Eigen::MatrixXd Ehat = Eigen::MatrixXd::Zero(n, d);
  Eigen::MatrixXd Z(n, d);
  for (double lam : cfg.schedule()) {
    const double thresh = weighted ? lam / w_max : lam;
    if (diag) diag->stages.push_back({lam, {}});
    for (int it = 0; it < cfg.max_iters; ++it) {
      Z = Ehat;
      for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < d; ++j)
          if (observed.mask.observed(i, j)) {
            const double r = observed.values(i, j) - Ehat(i, j);
            Z(i, j) += weighted ? weights(i, j) / w_max * r : r;
          }
      Eigen::MatrixXd next = svt_via_gram(Z, thresh);
      const double denom = std::max(Ehat.norm(), 1e-12);
      const double rel = (next - Ehat).norm() / denom;
      Ehat = std::move(next);
      if (diag) {
        double fit = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
          for (Eigen::Index j = 0; j < d; ++j)
            if (observed.mask.observed(i, j)) {
              const double r = observed.values(i, j) - Ehat(i, j);
              fit += (weighted ? weights(i, j) : 1.0) * r * r;
            }
        Eigen::BDCSVD<Eigen::MatrixXd> svd(Ehat);
        diag->stages.back().objective.push_back(0.5 * fit + lam * svd.singularValues().sum());
      }
      if (rel < cfg.tol) break;
    }
  }
  return Ehat;
}

} // namespace

Eigen::MatrixXd softimpute(const PartialMatrix &observed, const ImputeConfig &cfg,
                           ImputeDiagnostics *diag) {
  cfg.validate();
  return impute_loop(observed, Eigen::MatrixXd(), 1.0, cfg, diag);
}

Eigen::MatrixXd weighted_softimpute(const PartialMatrix &observed, const Eigen::MatrixXd &P,
                                    const ImputeConfig &cfg, ImputeDiagnostics *diag) {
  cfg.validate();
  if (P.rows() != observed.rows() || P.cols() != observed.cols())
    throw std::invalid_argument("weighted_softimpute: probability shape disagrees");
  Eigen::MatrixXd weights = Eigen::MatrixXd::Zero(P.rows(), P.cols());
  double w_max = 0.0;
  for (Eigen::Index i = 0; i < P.rows(); ++i)
    for (Eigen::Index j = 0; j < P.cols(); ++j)
      if (observed.mask.observed(i, j)) {
        if (!(P(i, j) > 0.0 && P(i, j) <= 1.0))
          throw std::invalid_argument("weighted_softimpute: observed cells need P in (0, 1]");
        weights(i, j) = 1.0 / P(i, j);
        w_max = std::max(w_max, weights(i, j));
      }
  return impute_loop(observed, weights, w_max, cfg, diag);
}

EmbeddingModel truncated_factorize(const Eigen::MatrixXd &E, Eigen::Index k) {
  const Eigen::Index r = std::min(E.rows(), E.cols());
  if (k < 1 || k > r) throw std::invalid_argument("truncated_factorize: rank out of range");
  Eigen::BDCSVD<Eigen::MatrixXd> svd(E, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd root = svd.singularValues().head(k).cwiseSqrt();
  EmbeddingModel model;
  model.rank = k;
  model.X = root.asDiagonal() * svd.matrixU().leftCols(k).transpose();
  model.Y = root.asDiagonal() * svd.matrixV().leftCols(k).transpose();
  return model;
}

} // namespace pfr
