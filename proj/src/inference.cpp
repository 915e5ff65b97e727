#include "statrom/inference.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "statrom/optimize.hpp"
#include "statrom/sobol.hpp"

namespace statrom {

Matrix stabilized(const Matrix& C) {
  if (C.rows() != C.cols()) throw std::invalid_argument("stabilized: matrix not square");
  Matrix out = C;
  const double eps = 1e-10 * (C.trace() / std::max<Eigen::Index>(C.rows(), 1));
  out.diagonal().array() += eps;
  return out;
}

Matrix discrepancy_covariance(const Hyperparameters& hp, const Matrix& sensor_pts) {
  MaternKernel k;
  k.nu = 2.5;
  k.sigma = hp.sigma_d;
  k.ell = hp.ell_d;
  return kernel_matrix(k, sensor_pts);
}

namespace {

void check_data(const ChannelData& data, Eigen::Index n) {
  if (data.P.rows() != data.Y.rows() || data.P.cols() != n)
    throw std::invalid_argument("inference: P shape mismatch");
  if (data.sensor_pts.rows() != data.Y.rows())
    throw std::invalid_argument("inference: sensor point count mismatch");
  if (data.Y.cols() < 1) throw std::invalid_argument("inference: no readings");
}

Matrix noise_covariance(const ChannelData& data, const Hyperparameters& hp) {
  Matrix C = discrepancy_covariance(hp, data.sensor_pts);
  C.diagonal().array() += data.sigma_e * data.sigma_e;
  return stabilized(C);
}

}  // namespace

Posterior condition_statfem(const Vector& mu_u, const Matrix& C_u, const ChannelData& data,
                            const Hyperparameters& hp) {
  check_data(data, mu_u.size());
  const Eigen::Index n = mu_u.size();
  const double n_o = static_cast<double>(data.Y.cols());
  const Matrix C_us = stabilized(C_u);
  const Matrix C_de = noise_covariance(data, hp);

  Eigen::LDLT<Matrix> de(C_de);
  Eigen::LDLT<Matrix> cu(C_us);
  if (de.info() != Eigen::Success || cu.info() != Eigen::Success)
    throw std::runtime_error("condition_statfem: covariance factorization failed");

  const Matrix Pd = Matrix(data.P);
  const Matrix WP = de.solve(Pd);                        // (C_d + C_e)^-1 P
  const Matrix Cu_inv = cu.solve(Matrix::Identity(n, n));
  Matrix H = hp.rho * hp.rho * n_o * Pd.transpose() * WP + Cu_inv;
  H = 0.5 * (H + H.transpose()).eval();

  Eigen::LDLT<Matrix> hf(H);
  if (hf.info() != Eigen::Success)
    throw std::runtime_error("condition_statfem: information matrix factorization failed");

  const Vector y_sum = data.Y.rowwise().sum();
  const Vector rhs = hp.rho * Pd.transpose() * de.solve(y_sum) + cu.solve(mu_u);

  Posterior post;
  post.hp = hp;
  post.mean = hf.solve(rhs);
  post.cov = hf.solve(Matrix::Identity(n, n));
  post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
  return post;
}

Posterior condition_statrom(const Vector& mu_u, const Matrix& C_u, const Vector& mu_dr,
                            const Matrix& C_dr, const ChannelData& data,
                            const Hyperparameters& hp) {
  check_data(data, mu_u.size());
  if (mu_dr.size() != mu_u.size() || C_dr.rows() != C_u.rows())
    throw std::invalid_argument("condition_statrom: error-field size mismatch");
  const double n_o = static_cast<double>(data.Y.cols());
  const double r = hp.rho;
  const Matrix C_us = stabilized(C_u);
  const Matrix C_de = noise_covariance(data, hp);

  const Matrix Pd = Matrix(data.P);
  const Matrix PCu = Pd * C_us;                 // n_y x n
  const Matrix PCdrPt = Pd * C_dr * Pd.transpose();
  Matrix G = r * r * n_o * PCu * Pd.transpose() + r * r * PCdrPt + C_de;
  G = 0.5 * (G + G.transpose()).eval();
  Eigen::LDLT<Matrix> gf(G);
  if (gf.info() != Eigen::Success)
    throw std::runtime_error("condition_statrom: gain matrix factorization failed");

  const Vector y_sum = data.Y.rowwise().sum();
  const Vector resid = y_sum - r * n_o * (Pd * mu_u + Pd * mu_dr);

  Posterior post;
  post.hp = hp;
  post.mean = mu_u + r * PCu.transpose() * gf.solve(resid);
  post.cov = C_us - r * r * n_o * PCu.transpose() * gf.solve(PCu);
  post.cov = 0.5 * (post.cov + post.cov.transpose()).eval();
  return post;
}

double log_marginal_likelihood(const Vector& mu_u, const Matrix& C_u, const Vector& mu_dr,
                               const Matrix& C_dr, const ChannelData& data,
                               const Hyperparameters& hp) {
  check_data(data, mu_u.size());
  const bool with_rom_error = mu_dr.size() > 0;
  const double r = hp.rho;
  const Matrix Pd = Matrix(data.P);
  const Matrix C_us = stabilized(C_u);

  Matrix K = r * r * Pd * C_us * Pd.transpose() + noise_covariance(data, hp);
  Vector mean = r * Pd * mu_u;
  if (with_rom_error) {
    K += r * r * Pd * C_dr * Pd.transpose();
    mean += r * Pd * mu_dr;
  }
  K = 0.5 * (K + K.transpose()).eval();
  Eigen::LDLT<Matrix> kf(K);
  if (kf.info() != Eigen::Success) return -1e300;
  const Vector d = kf.vectorD();
  if ((d.array() <= 0.0).any()) return -1e300;
  const double logdet = d.array().log().sum();

  const double n_y = static_cast<double>(data.Y.rows());
  double total = 0.0;
  for (Eigen::Index i = 0; i < data.Y.cols(); ++i) {
    const Vector resid = data.Y.col(i) - mean;
    total += -0.5 * (n_y * std::log(2.0 * M_PI) + logdet + resid.dot(kf.solve(resid)));
  }
  return total;
}

Hyperparameters learn_hyperparameters(const Vector& mu_u, const Matrix& C_u,
                                      const Vector& mu_dr, const Matrix& C_dr,
                                      const ChannelData& data, const HyperBounds& bounds,
                                      int restarts, std::uint64_t seed) {
  check_data(data, mu_u.size());
  if (restarts < 1) throw std::invalid_argument("learn_hyperparameters: restarts >= 1");

  Vector lo(3), hi(3);
  lo << std::log(bounds.rho_lo), std::log(bounds.sigma_d_lo), std::log(bounds.ell_d_lo);
  hi << std::log(bounds.rho_hi), std::log(bounds.sigma_d_hi), std::log(bounds.ell_d_hi);

  // objective: negative marginal log-likelihood in log-parameters; the
  // sensor-level covariance pieces P C P^T are precomputed outside since
  // they do not depend on the hyperparameters.
  const Matrix Pd = Matrix(data.P);
  const Matrix PCuPt = Pd * stabilized(C_u) * Pd.transpose();
  const bool with_rom_error = mu_dr.size() > 0;
  const Matrix PCdrPt =
      with_rom_error ? Matrix(Pd * C_dr * Pd.transpose()) : Matrix::Zero(Pd.rows(), Pd.rows());
  Vector Pmu = Pd * mu_u;
  if (with_rom_error) Pmu += Pd * mu_dr;

  const double n_y = static_cast<double>(data.Y.rows());
  auto objective = [&](const Vector& x) -> double {
    Hyperparameters hp;
    hp.rho = std::exp(x(0));
    hp.sigma_d = std::exp(x(1));
    hp.ell_d = std::exp(x(2));
    const double r = hp.rho;
    Matrix K = r * r * (PCuPt + PCdrPt) + noise_covariance(data, hp);
    K = 0.5 * (K + K.transpose()).eval();
    Eigen::LDLT<Matrix> kf(K);
    if (kf.info() != Eigen::Success) return 1e300;
    const Vector dv = kf.vectorD();
    if ((dv.array() <= 0.0).any()) return 1e300;
    const double logdet = dv.array().log().sum();
    double total = 0.0;
    for (Eigen::Index i = 0; i < data.Y.cols(); ++i) {
      const Vector resid = data.Y.col(i) - r * Pmu;
      total += 0.5 * (n_y * std::log(2.0 * M_PI) + logdet + resid.dot(kf.solve(resid)));
    }
    return total;
  };

  // deterministic restart points: box center, then shifted quasi-random fill
  std::vector<Vector> starts;
  starts.push_back(0.5 * (lo + hi));
  if (restarts > 1) {
    const Matrix u = sobol_uniform(3, restarts - 1, seed);
    for (int i = 0; i < restarts - 1; ++i)
      starts.push_back(lo + (u.row(i).transpose().array() * (hi - lo).array()).matrix());
  }

  BoxMinResult best;
  best.f = std::numeric_limits<double>::infinity();
  for (const Vector& x0 : starts) {
    const BoxMinResult r = minimize_box(objective, x0, lo, hi, 150, 1e-10);
    if (r.f < best.f) best = r;
  }

  Hyperparameters hp;
  hp.rho = std::exp(best.x(0));
  hp.sigma_d = std::exp(best.x(1));
  hp.ell_d = std::exp(best.x(2));
  hp.converged = best.converged;
  return hp;
}

Predictive predict(const Posterior& post, const Vector& mu_dr, const Matrix& C_dr,
                   const SparseMatrix& P_eval, const Matrix& eval_pts, double sigma_e) {
  if (P_eval.cols() != post.mean.size())
    throw std::invalid_argument("predict: operator/posterior size mismatch");
  const bool with_rom_error = mu_dr.size() > 0;
  const double r = post.hp.rho;
  const Matrix Pd = Matrix(P_eval);

  Predictive out;
  out.mean = r * Pd * post.mean;
  out.cov = r * r * Pd * post.cov * Pd.transpose();
  if (with_rom_error) {
    out.mean += r * Pd * mu_dr;
    out.cov += Pd * C_dr * Pd.transpose();
  }
  out.cov += discrepancy_covariance(post.hp, eval_pts);
  if (sigma_e > 0.0) out.cov.diagonal().array() += sigma_e * sigma_e;
  out.cov = 0.5 * (out.cov + out.cov.transpose()).eval();
  return out;
}

}  // namespace statrom
