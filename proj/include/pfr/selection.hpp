#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <utility>
#include <vector>

namespace pfr {

using IndexList = std::vector<Eigen::Index>;
using Oracle = std::function<double(Eigen::Index)>;

// GP hyperparameters for the Bayesian-optimization selectors.
struct GpConfig {
  double length_scale = 20.0;
  double noise_var = 1.0;
  double xi = 0.01;
};

// Measurement selection instance: configuration embeddings (columns of Y),
// the feasible configurations T, and the measurement budget l (>= rank).
struct SelectionProblem {
  Eigen::MatrixXd Y; // k x d
  IndexList feasible;
  Eigen::Index budget = 0;
};

// What the meta-test pipeline produces for one new dataset.
struct MetaTestEstimate {
  IndexList selected;     // measured configurations, in selection order
  Eigen::VectorXd x_new;  // k-dim embedding of the new dataset
  Eigen::VectorXd e_obs;  // measured errors, aligned with `selected`
  Eigen::VectorXd e_hat;  // predicted error for every configuration
};

// First l pivot columns of the column-pivoted QR of A restricted to T,
// mapped back to original indices.
IndexList qr_pivot_select(const Eigen::MatrixXd &A, const IndexList &T, Eigen::Index l);

// Initialization for the greedy design: the first k pivots of Y restricted
// to T. Throws if those columns do not reach rank k (message names the
// achieved rank), since the greedy update needs a nonsingular start.
IndexList qr_pivot_init(const Eigen::MatrixXd &Y, const IndexList &T);

// Greedy D-optimal selection: starting from the QR pivots, repeatedly add
// the feasible column maximizing y^T X_t^{-1} y (the determinant-lemma gain),
// maintaining X_t^{-1} by rank-1 updates. Ties break to the lowest index.
IndexList greedy_ed(const SelectionProblem &problem);

// (X + y y^T)^{-1} from X^{-1} via Sherman-Morrison. Throws when the
// denominator 1 + y^T X^{-1} y is within 1e-12 of zero.
Eigen::MatrixXd sherman_morrison_update(const Eigen::MatrixXd &X_inv, const Eigen::VectorXd &y);

// Least-squares embedding of a new dataset from measurements e_obs at the
// columns Y_S (k x |S|): minimizes ||Y_S^T x - e_obs||. Needs |S| >= k and
// full row rank.
Eigen::VectorXd embed_new(const Eigen::MatrixXd &Y_S, const Eigen::VectorXd &e_obs);

// Predicted error for every configuration: Y^T x_new.
Eigen::VectorXd predict(const Eigen::MatrixXd &Y, const Eigen::VectorXd &x_new);

// l distinct indices from T, uniformly without replacement.
IndexList select_random(const IndexList &T, Eigen::Index l, std::uint64_t seed);

// Same, but resamples (up to max_retries) until Y restricted to the sample
// has full rank, so the least-squares embedding is well posed.
IndexList select_random_rank_feasible(const Eigen::MatrixXd &Y, const IndexList &T,
                                      Eigen::Index l, std::uint64_t seed, int max_retries = 100);

struct GpPosterior {
  double mean = 0.0;
  double var = 0.0;
};

// Gaussian-process regression with an RBF kernel
// k(a,b) = exp(-||a-b||^2 / (2 length_scale^2)) and observation noise
// noise_var (a 1e-10 jitter stands in when noise_var is zero).
class GpModel {
public:
  // points: one training input per column; values: one target per point.
  GpModel(const Eigen::MatrixXd &points, const Eigen::VectorXd &values, const GpConfig &cfg);
  GpPosterior posterior(const Eigen::VectorXd &query) const;

private:
  Eigen::MatrixXd points_;
  Eigen::VectorXd alpha_;
  Eigen::LLT<Eigen::MatrixXd> llt_;
  GpConfig cfg_;
};

GpPosterior gp_posterior(const Eigen::MatrixXd &points, const Eigen::VectorXd &values,
                         const Eigen::VectorXd &query, const GpConfig &cfg);

// Expected improvement for minimization with exploration margin xi:
// with I = best - mean - xi, EI = I*Phi(I/sd) + sd*phi(I/sd) (and max(I, 0)
// when sd = 0).
double expected_improvement(double mean, double stddev, double best, double xi);

// Sequential Bayesian optimization over the feasible columns of `features`:
// init_size random starts, then argmax-EI acquisitions until l measurements.
// Returns the selection order and the measured values.
std::pair<IndexList, Eigen::VectorXd> bo_select(const Eigen::MatrixXd &features,
                                                const IndexList &T, Eigen::Index l,
                                                const Oracle &oracle, const GpConfig &cfg,
                                                std::uint64_t seed, Eigen::Index init_size);

enum class Technique { EdMf, QrMf, RandomMf, BoMf, BoFull };

Technique parse_technique(const std::string &name);
std::string technique_name(Technique t);

} // namespace pfr
