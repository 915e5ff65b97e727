#pragma once

#include <cstdint>
#include <optional>

#include "statrom/adjoint_error.hpp"
#include "statrom/inference.hpp"
#include "statrom/rom.hpp"

namespace statrom {

/// Problem description consumed by the offline/online pipeline: mesh,
/// material randomness (log-normal KL field or deterministic), and the
/// Gaussian of the assembled (discrete) right-hand-side vector.
struct Problem {
  Mesh mesh;
  double c = 343.0;
  double beta = 0.0;
  double omega_bar = 2.0 * M_PI * 100.0;
  bool kappa_random = false;
  Vector mu_log_kappa;        // nodal log-mean of the material field
  MaternKernel kappa_kernel;  // covariance of log kappa (used when random)
  double kl_tau = 0.95;
  Gaussian rhs;               // discrete load Gaussian (already assembled)
  bool real_valued = true;    // solution confined to the real channel
};

/// Deterministic, platform-independent scalar RNG (splitmix64 + Box-Muller)
/// used wherever plain pseudo-random numbers are needed, so identical seeds
/// give identical bytes everywhere.
class DeterministicRng {
public:
  explicit DeterministicRng(std::uint64_t seed) : state_(seed) {}
  std::uint64_t next_u64();
  double uniform();  // in (0, 1)
  double gauss();

private:
  std::uint64_t state_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

struct SampleModel {
  std::shared_ptr<const HelmholtzSystem> sys;  // shared when kappa is deterministic
  ComplexVector rhs;                           // constrained per-sample load
  RomBasis basis;
  ReducedSystem red;
};

struct OfflineModel {
  Problem prob;
  int order = 0;
  Recurrence rec = Recurrence::second_derivative;
  std::uint64_t seed = 0;
  KLExpansion kl;                    // empty when kappa deterministic
  bool shared_system = false;
  std::vector<SampleModel> samples;
  std::vector<AdjointSet> adjoints;  // one entry if shared_system, else per sample
  Matrix train_pts;
};

/// Sample the stochastic inputs with a digitally shifted Sobol rule, build
/// the per-sample reduced bases at omega_bar and the reduced adjoint sets at
/// the training points. When the material field is deterministic the system
/// matrix, its factorization and the adjoint set are shared across samples.
OfflineModel offline(const Problem& prob, int m, int n_samples, const Matrix& train_pts,
                     std::uint64_t seed, Recurrence rec = Recurrence::second_derivative,
                     int jobs = 1);

/// Training-point layouts: equally spaced interior points in 1d, a Sobol
/// fill of the domain (outside the scatterer, margin off the walls) in 2d.
Matrix training_points(const Mesh& mesh, int n_train, std::uint64_t seed, double margin = 0.05);

struct PriorEnsemble {
  ComplexMatrix lifted;    // kept samples x n nodal solutions
  std::vector<int> kept;   // sample indices that solved
  Gaussian prior;
  int skipped = 0;
};

/// Reduced solves of the whole ensemble at omega plus ensemble moments.
/// Samples whose reduced matrix is singular at omega are skipped; more than
/// 5% skipped is an error.
PriorEnsemble forward_prior(const OfflineModel& model, double omega, int jobs = 1);

/// Full-order solves of the same ensemble (classical baseline / reference).
ComplexMatrix fom_ensemble(const OfflineModel& model, double omega, int jobs = 1);

enum class SigmaMode { mean_variance, raw };

/// Pointwise adjoint indicators averaged over the ensemble, regressed onto
/// the mesh. The GP noise per training point is the complex sample variance,
/// divided by the sample count in mean_variance mode.
ErrorField estimate_errors(const OfflineModel& model, double omega, const PriorEnsemble& ens,
                           SigmaMode mode = SigmaMode::mean_variance, int jobs = 1);

struct Observations {
  Matrix Y_re, Y_im;  // n_y x n_o
  Matrix sensor_pts;  // n_y x dim
  double sigma_e = 0.0;
};

/// Noisy sensor readings of a (data-mesh) solution at the sensor points:
/// y_i = P u + sigma_e * independent Gaussian noise per channel and reading.
Observations synthesize_observations(const Mesh& data_mesh, const ComplexVector& u_data,
                                     const Matrix& sensor_pts, int n_obs, double sigma_e,
                                     std::uint64_t seed);

struct InferenceOptions {
  HyperBounds bounds;
  int restarts = 3;
  std::uint64_t seed = 0;
  bool with_error_estimator = true;
  bool fullorder = false;  // also run the classical update on full-order solves
  SigmaMode sigma_mode = SigmaMode::mean_variance;
  int jobs = 1;
};

/// Posteriors and full-field true-process predictive for one method and
/// channel pair; the imaginary channel stays empty for real-valued problems.
struct MethodOutput {
  Posterior post_re, post_im;
  Predictive pred_re, pred_im;
  ComplexVector field_mean;  // predictive mean as a complex nodal field
};

struct RunResult {
  double omega = 0.0;
  PriorEnsemble ensemble;
  ErrorField errors;
  MethodOutput statrom;    // ROM prior + error-aware update
  MethodOutput classical;  // ROM prior + classical update
  std::optional<MethodOutput> fullorder;
};

RunResult online(const OfflineModel& model, double omega, const Observations& obs,
                 const InferenceOptions& opts);

}  // namespace statrom
