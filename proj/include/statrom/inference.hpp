#pragma once

#include <cstdint>

#include "statrom/stochastic.hpp"

namespace statrom {

/// Model-data fusion for one real channel (complex problems run the real and
/// imaginary parts independently; each channel learns its own
/// hyperparameters). All covariances entering an inverse are stabilized with
/// a 1e-10 trace-scaled diagonal shift, applied once to the source matrix so
/// different algebraic routes through the same quantities agree to rounding.

struct Hyperparameters {
  double rho = 1.0;      // model-reality scaling
  double sigma_d = 0.1;  // model-discrepancy amplitude
  double ell_d = 1.0;    // model-discrepancy length scale
  bool converged = true;
};

struct HyperBounds {
  double rho_lo = 1e-2, rho_hi = 1e2;
  double sigma_d_lo = 1e-8, sigma_d_hi = 1e2;
  double ell_d_lo = 1e-3, ell_d_hi = 10.0;  // scale by the domain diameter
};

/// One channel of sensor readings: Y columns are repeated observations of
/// the same n_y sensors, P interpolates nodal fields to the sensors.
struct ChannelData {
  Matrix Y;           // n_y x n_o
  SparseMatrix P;     // n_y x n
  Matrix sensor_pts;  // n_y x dim
  double sigma_e = 0.0;
};

/// C + 1e-10 (trace(C)/n) I, the stabilization used on every inverted
/// covariance. Exposed so oracle-style tests can condition the exact same
/// matrices.
Matrix stabilized(const Matrix& C);

/// Model-discrepancy kernel: Matern 5/2 over the sensor locations.
Matrix discrepancy_covariance(const Hyperparameters& hp, const Matrix& sensor_pts);

struct Posterior {
  Vector mean;
  Matrix cov;
  Hyperparameters hp;
};

/// Classical update (information form): Gaussian prior N(mu_u, C_u) on the
/// nodal field, readings y_i = rho P u + d + e.
Posterior condition_statfem(const Vector& mu_u, const Matrix& C_u, const ChannelData& data,
                            const Hyperparameters& hp);

/// ROM-aware update (gain form): readings y_i = rho P (u + d_r) + d + e with
/// the ROM-error field d_r ~ N(mu_dr, C_dr) entering mean and covariance.
/// Never inverts the prior covariance, so rank-deficient sampling priors are
/// fine.
Posterior condition_statrom(const Vector& mu_u, const Matrix& C_u, const Vector& mu_dr,
                            const Matrix& C_dr, const ChannelData& data,
                            const Hyperparameters& hp);

/// Sum over readings of log N(y_i | rho P (mu_u + mu_dr),
/// rho^2 P (C_u + C_dr) P^T + C_d + C_e). Pass empty mu_dr/C_dr for the
/// classical variant.
double log_marginal_likelihood(const Vector& mu_u, const Matrix& C_u, const Vector& mu_dr,
                               const Matrix& C_dr, const ChannelData& data,
                               const Hyperparameters& hp);

/// Maximize the marginal likelihood over (rho, sigma_d, ell_d) in log space
/// within the bounds; deterministic multi-start (box center plus seeded
/// quasi-random points). converged reflects the best run's optimizer status.
Hyperparameters learn_hyperparameters(const Vector& mu_u, const Matrix& C_u,
                                      const Vector& mu_dr, const Matrix& C_dr,
                                      const ChannelData& data, const HyperBounds& bounds,
                                      int restarts, std::uint64_t seed);

struct Predictive {
  Vector mean;
  Matrix cov;
};

/// Push a posterior through the observation operator P_eval. True-process
/// density: mean rho P (mu + mu_dr), covariance rho^2 P C P^T + P C_dr P^T +
/// C_d(eval points). With observation noise added (sigma_e > 0) this is the
/// predictive density of new readings.
Predictive predict(const Posterior& post, const Vector& mu_dr, const Matrix& C_dr,
                   const SparseMatrix& P_eval, const Matrix& eval_pts, double sigma_e);

}  // namespace statrom
