#pragma once

#include "pfr/matrix.hpp"

#include <vector>

namespace pfr {

// Regularization path for the completer. The path is geometric: it starts at
// lambda / decay^(stages-1), shrinks by `decay` each stage, and ends exactly
// at `lambda`. Each stage runs the proximal iteration to `tol` (relative
// Frobenius change of the estimate) or `max_iters`, warm-starting from the
// previous stage.
struct ImputeConfig {
  double lambda = 0.1;
  double decay = 0.7;
  int stages = 10;
  int max_iters = 500;
  double tol = 1e-5;

  std::vector<double> schedule() const;
  void validate() const;
};

// Objective values per inner iteration, one trace per stage. For the plain
// completer the objective is 0.5*||P_obs(E - Ehat)||_F^2 + lambda*||Ehat||_*;
// the weighted completer weights the residuals by 1/P_ij.
struct StageTrace {
  double lambda = 0.0;
  std::vector<double> objective;
};

struct ImputeDiagnostics {
  std::vector<StageTrace> stages;
};

// Singular value soft-thresholding: SVD A = U diag(s) V^T, shrink each
// singular value to max(s - lam, 0), reconstruct.
Eigen::MatrixXd soft_threshold_svd(const Eigen::MatrixXd &A, double lam);

// Nuclear-norm-regularized completion: repeat
//   filled <- observed cells from E, everything else from Ehat
//   Ehat   <- soft_threshold_svd(filled, lambda_i)
// over the decreasing lambda schedule.
Eigen::MatrixXd softimpute(const PartialMatrix &observed, const ImputeConfig &cfg,
                           ImputeDiagnostics *diag = nullptr);

// Inverse-propensity-weighted variant: each observed residual is weighted by
// w_ij = 1/P_ij. One proximal step uses step size 1/w_max, i.e.
//   Z    <- Ehat + (W/w_max) . P_obs(E - Ehat)
//   Ehat <- soft_threshold_svd(Z, lambda_i / w_max)
// With constant probabilities this is the plain iteration with lambda
// uniformly rescaled by that probability.
Eigen::MatrixXd weighted_softimpute(const PartialMatrix &observed, const Eigen::MatrixXd &P,
                                    const ImputeConfig &cfg, ImputeDiagnostics *diag = nullptr);

// Rank-k factorization E ~ X^T Y with X = sqrt(S_k) U_k^T (k x n) and
// Y = sqrt(S_k) V_k^T (k x d); columns of Y are the configuration embeddings.
struct EmbeddingModel {
  Eigen::Index rank = 0;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Y;

  Eigen::MatrixXd reconstruct() const { return X.transpose() * Y; }
};

EmbeddingModel truncated_factorize(const Eigen::MatrixXd &E, Eigen::Index k);

} // namespace pfr
