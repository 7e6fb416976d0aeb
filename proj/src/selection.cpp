#include "pfr/selection.hpp"

#include "pfr/rng.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace pfr {

namespace {

// Relative floor on QR diagonal entries when deciding whether columns are
// usably independent. Default Eigen thresholds sit at machine precision,
// which lets a column set pass as rank k here and still produce a design
// matrix whose inversion is meaningless (condition ~ 1/eps^2).
constexpr double kRankThreshold = 1e-7;

void check_feasible(const IndexList &T, Eigen::Index d) {
  if (T.empty()) throw std::invalid_argument("selection: feasible set is empty");
  std::set<Eigen::Index> seen;
  for (Eigen::Index j : T) {
    if (j < 0 || j >= d) throw std::invalid_argument("selection: feasible index out of range");
    if (!seen.insert(j).second) throw std::invalid_argument("selection: feasible indices repeat");
  }
}

Eigen::MatrixXd gather_columns(const Eigen::MatrixXd &A, const IndexList &idx) {
  Eigen::MatrixXd out(A.rows(), static_cast<Eigen::Index>(idx.size()));
  for (std::size_t p = 0; p < idx.size(); ++p) out.col(static_cast<Eigen::Index>(p)) = A.col(idx[p]);
  return out;
}

IndexList select_random_stream(std::mt19937_64 &rng, const IndexList &T, Eigen::Index l) {
  IndexList pool = T;
  const auto m = static_cast<Eigen::Index>(pool.size());
  for (Eigen::Index i = 0; i < l; ++i) {
    const auto j = i + static_cast<Eigen::Index>(uniform_below(rng, static_cast<std::uint64_t>(m - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  pool.resize(static_cast<std::size_t>(l));
  return pool;
}

} // namespace

IndexList qr_pivot_select(const Eigen::MatrixXd &A, const IndexList &T, Eigen::Index l) {
  check_feasible(T, A.cols());
  if (l < 1 || l > static_cast<Eigen::Index>(T.size()))
    throw std::invalid_argument("qr_pivot_select: pivot count out of range");
  const Eigen::MatrixXd At = gather_columns(A, T);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(At);
  const auto &perm = qr.colsPermutation().indices();
  IndexList out(static_cast<std::size_t>(l));
  for (Eigen::Index p = 0; p < l; ++p) out[static_cast<std::size_t>(p)] = T[static_cast<std::size_t>(perm(p))];
  return out;
}

IndexList qr_pivot_init(const Eigen::MatrixXd &Y, const IndexList &T) {
  const Eigen::Index k = Y.rows();
  check_feasible(T, Y.cols());
  if (static_cast<Eigen::Index>(T.size()) < k)
    throw std::invalid_argument("qr_pivot_init: fewer feasible columns than the rank");
  const Eigen::MatrixXd Yt = gather_columns(Y, T);
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Yt);
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < k)
    throw std::runtime_error("qr_pivot_init: feasible columns reach rank " + std::to_string(qr.rank()) +
                             " but rank " + std::to_string(k) + " is required");
  const auto &perm = qr.colsPermutation().indices();
  IndexList out(static_cast<std::size_t>(k));
  for (Eigen::Index p = 0; p < k; ++p) out[static_cast<std::size_t>(p)] = T[static_cast<std::size_t>(perm(p))];
  return out;
}

Eigen::MatrixXd sherman_morrison_update(const Eigen::MatrixXd &X_inv, const Eigen::VectorXd &y) {
  if (X_inv.rows() != X_inv.cols()) throw std::invalid_argument("sherman_morrison: matrix must be square");
  if (y.size() != X_inv.rows()) throw std::invalid_argument("sherman_morrison: dimension mismatch");
  const Eigen::VectorXd u = X_inv * y;
  const Eigen::RowVectorXd vt = y.transpose() * X_inv;
  const double denom = 1.0 + y.dot(u);
  if (std::fabs(denom) < 1e-12) throw std::runtime_error("sherman_morrison: update denominator is numerically zero");
  return X_inv - (u * vt) / denom;
}

IndexList greedy_ed(const SelectionProblem &problem) {
  const Eigen::Index k = problem.Y.rows();
  const Eigen::Index d = problem.Y.cols();
  const Eigen::Index l = problem.budget;
  check_feasible(problem.feasible, d);
  if (l < k) throw std::invalid_argument("greedy_ed: budget below the embedding rank");
  if (l > static_cast<Eigen::Index>(problem.feasible.size()))
    throw std::invalid_argument("greedy_ed: budget exceeds the feasible set");

  IndexList S = qr_pivot_init(problem.Y, problem.feasible);
  IndexList scan = problem.feasible; // ties break to the lowest index
  std::sort(scan.begin(), scan.end());
  std::vector<bool> in_S(static_cast<std::size_t>(d), false);
  for (Eigen::Index j : S) in_S[static_cast<std::size_t>(j)] = true;

  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(k, k);
  for (Eigen::Index j : S) X += problem.Y.col(j) * problem.Y.col(j).transpose();
  Eigen::FullPivLU<Eigen::MatrixXd> lu(X);
  if (!lu.isInvertible()) throw std::runtime_error("greedy_ed: initial design matrix is singular");
  Eigen::MatrixXd X_inv = lu.inverse();

  while (static_cast<Eigen::Index>(S.size()) < l) {
    Eigen::Index best = -1;
    double best_gain = -1.0;
    for (Eigen::Index j : scan) {
      if (in_S[static_cast<std::size_t>(j)]) continue;
      const double gain = problem.Y.col(j).dot(X_inv * problem.Y.col(j));
      if (gain > best_gain) {
        best_gain = gain;
        best = j;
      }
    }
    X_inv = sherman_morrison_update(X_inv, problem.Y.col(best));
    S.push_back(best);
    in_S[static_cast<std::size_t>(best)] = true;
  }
  return S;
}

Eigen::VectorXd embed_new(const Eigen::MatrixXd &Y_S, const Eigen::VectorXd &e_obs) {
  const Eigen::Index k = Y_S.rows();
  const Eigen::Index s = Y_S.cols();
  if (e_obs.size() != s) throw std::invalid_argument("embed_new: measurement count disagrees");
  if (s < k) throw std::invalid_argument("embed_new: need at least rank-many measurements");
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(Y_S.transpose());
  qr.setThreshold(kRankThreshold);
  if (qr.rank() < k)
    throw std::runtime_error("embed_new: measured columns reach rank " + std::to_string(qr.rank()) +
                             " but rank " + std::to_string(k) + " is required");
  return qr.solve(e_obs);
}

Eigen::VectorXd predict(const Eigen::MatrixXd &Y, const Eigen::VectorXd &x_new) {
  if (x_new.size() != Y.rows()) throw std::invalid_argument("predict: embedding dimension disagrees");
  return Y.transpose() * x_new;
}

IndexList select_random(const IndexList &T, Eigen::Index l, std::uint64_t seed) {
  if (T.empty()) throw std::invalid_argument("select_random: feasible set is empty");
  if (l < 1 || l > static_cast<Eigen::Index>(T.size()))
    throw std::invalid_argument("select_random: budget out of range");
  std::mt19937_64 rng(seed);
  return select_random_stream(rng, T, l);
}

IndexList select_random_rank_feasible(const Eigen::MatrixXd &Y, const IndexList &T,
                                      Eigen::Index l, std::uint64_t seed, int max_retries) {
  if (l < Y.rows()) throw std::invalid_argument("select_random_rank_feasible: budget below the rank");
  std::mt19937_64 rng(seed);
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    IndexList S = select_random_stream(rng, T, l);
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(gather_columns(Y, S));
    qr.setThreshold(kRankThreshold);
    if (qr.rank() == Y.rows()) return S;
  }
  throw std::runtime_error("select_random_rank_feasible: no full-rank sample within retry budget");
}

GpModel::GpModel(const Eigen::MatrixXd &points, const Eigen::VectorXd &values, const GpConfig &cfg)
    : points_(points), cfg_(cfg) {
  const Eigen::Index m = points.cols();
  if (m == 0) throw std::invalid_argument("gp: need at least one training point");
  if (values.size() != m) throw std::invalid_argument("gp: value count disagrees");
  if (!(cfg.length_scale > 0.0)) throw std::invalid_argument("gp: length scale must be positive");
  if (cfg.noise_var < 0.0) throw std::invalid_argument("gp: noise variance must be >= 0");
  const double ls2 = 2.0 * cfg.length_scale * cfg.length_scale;
  Eigen::MatrixXd K(m, m);
  for (Eigen::Index i = 0; i < m; ++i)
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double k = std::exp(-(points.col(i) - points.col(j)).squaredNorm() / ls2);
      K(i, j) = k;
      K(j, i) = k;
    }
  const double ridge = cfg.noise_var > 0.0 ? cfg.noise_var : 1e-10;
  K.diagonal().array() += ridge;
  llt_.compute(K);
  if (llt_.info() != Eigen::Success) throw std::runtime_error("gp: kernel matrix is not positive definite");
  alpha_ = llt_.solve(values);
}

GpPosterior GpModel::posterior(const Eigen::VectorXd &query) const {
  if (query.size() != points_.rows()) throw std::invalid_argument("gp: query dimension disagrees");
  const double ls2 = 2.0 * cfg_.length_scale * cfg_.length_scale;
  const Eigen::Index m = points_.cols();
  Eigen::VectorXd kvec(m);
  for (Eigen::Index i = 0; i < m; ++i)
    kvec(i) = std::exp(-(points_.col(i) - query).squaredNorm() / ls2);
  GpPosterior post;
  post.mean = kvec.dot(alpha_);
  post.var = std::max(0.0, 1.0 - kvec.dot(llt_.solve(kvec)));
  return post;
}

GpPosterior gp_posterior(const Eigen::MatrixXd &points, const Eigen::VectorXd &values,
                         const Eigen::VectorXd &query, const GpConfig &cfg) {
  return GpModel(points, values, cfg).posterior(query);
}

double expected_improvement(double mean, double stddev, double best, double xi) {
  if (stddev < 0.0) throw std::invalid_argument("expected_improvement: negative deviation");
  const double imp = best - mean - xi;
  if (stddev == 0.0) return std::max(imp, 0.0);
  const double z = imp / stddev;
  const double cdf = 0.5 * std::erfc(-z / std::sqrt(2.0));
  const double pdf = std::exp(-0.5 * z * z) / std::sqrt(2.0 * 3.14159265358979323846);
  return imp * cdf + stddev * pdf;
}

std::pair<IndexList, Eigen::VectorXd> bo_select(const Eigen::MatrixXd &features,
                                                const IndexList &T, Eigen::Index l,
                                                const Oracle &oracle, const GpConfig &cfg,
                                                std::uint64_t seed, Eigen::Index init_size) {
  check_feasible(T, features.cols());
  if (init_size < 1) throw std::invalid_argument("bo_select: init size must be positive");
  if (l < init_size) throw std::invalid_argument("bo_select: budget below the initial design");
  if (l > static_cast<Eigen::Index>(T.size())) throw std::invalid_argument("bo_select: budget exceeds the feasible set");

  IndexList S = select_random(T, init_size, seed);
  std::vector<double> measured;
  for (Eigen::Index j : S) measured.push_back(oracle(j));
  IndexList scan = T; // ties break to the lowest index
  std::sort(scan.begin(), scan.end());
  std::vector<bool> in_S(static_cast<std::size_t>(features.cols()), false);
  for (Eigen::Index j : S) in_S[static_cast<std::size_t>(j)] = true;

  while (static_cast<Eigen::Index>(S.size()) < l) {
    const Eigen::MatrixXd pts = gather_columns(features, S);
    Eigen::VectorXd vals = Eigen::Map<const Eigen::VectorXd>(measured.data(),
                                                             static_cast<Eigen::Index>(measured.size()));
    const GpModel gp(pts, vals, cfg);
    const double best_val = vals.minCoeff();

    Eigen::Index best = -1;
    double best_ei = -1.0;
    for (Eigen::Index j : scan) {
      if (in_S[static_cast<std::size_t>(j)]) continue;
      const GpPosterior post = gp.posterior(features.col(j));
      const double ei = expected_improvement(post.mean, std::sqrt(post.var), best_val, cfg.xi);
      if (ei > best_ei) {
        best_ei = ei;
        best = j;
      }
    }
    S.push_back(best);
    in_S[static_cast<std::size_t>(best)] = true;
    measured.push_back(oracle(best));
  }
  Eigen::VectorXd e_obs = Eigen::Map<const Eigen::VectorXd>(measured.data(),
                                                            static_cast<Eigen::Index>(measured.size()));
  return {S, e_obs};
}

Technique parse_technique(const std::string &name) {
  if (name == "ed-mf") return Technique::EdMf;
  if (name == "qr-mf") return Technique::QrMf;
  if (name == "random-mf") return Technique::RandomMf;
  if (name == "bo-mf") return Technique::BoMf;
  if (name == "bo-full") return Technique::BoFull;
  throw std::invalid_argument("unknown technique: " + name);
}

std::string technique_name(Technique t) {
  switch (t) {
  case Technique::EdMf: return "ed-mf";
  case Technique::QrMf: return "qr-mf";
  case Technique::RandomMf: return "random-mf";
  case Technique::BoMf: return "bo-mf";
  case Technique::BoFull: return "bo-full";
  }
  throw std::invalid_argument("unknown technique enum");
}

} // namespace pfr
