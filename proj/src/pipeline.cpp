#include "statrom/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <functional>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "statrom/sobol.hpp"

namespace statrom {

std::uint64_t DeterministicRng::next_u64() {
  state_ += 0x9e3779b97f4a7c15ull;
  std::uint64_t z = state_;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

double DeterministicRng::uniform() {
  return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1p-53;
}

double DeterministicRng::gauss() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  const double u1 = uniform(), u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  spare_ = r * std::sin(2.0 * M_PI * u2);
  have_spare_ = true;
  return r * std::cos(2.0 * M_PI * u2);
}

namespace {

// deterministic work partition: slot i always computes item i
void parallel_for(int n, int jobs, const std::function<void(int)>& fn) {
  jobs = std::max(1, jobs);
  if (jobs == 1 || n < 2) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  std::vector<std::exception_ptr> errors(jobs);
  for (int t = 0; t < jobs; ++t)
    pool.emplace_back([&, t] {
      try {
        for (int i = next.fetch_add(1); i < n; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[t] = std::current_exception();
      }
    });
  for (auto& th : pool) th.join();
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
}

}  // namespace

Matrix training_points(const Mesh& mesh, int n_train, std::uint64_t seed, double margin) {
  if (n_train < 1) throw std::invalid_argument("training_points: need at least one point");
  if (mesh.dim == 1) {
    const double lo = mesh.nodes.col(0).minCoeff(), hi = mesh.nodes.col(0).maxCoeff();
    Matrix pts(n_train, 1);
    for (int i = 0; i < n_train; ++i)
      pts(i, 0) = lo + (hi - lo) * (i + 1.0) / (n_train + 1.0);
    return pts;
  }
  // 2d: quasi-random fill, rejecting points near walls or inside the hole
  const double x_lo = mesh.nodes.col(0).minCoeff(), x_hi = mesh.nodes.col(0).maxCoeff();
  const double y_lo = mesh.nodes.col(1).minCoeff(), y_hi = mesh.nodes.col(1).maxCoeff();
  const double mx = margin * (x_hi - x_lo), my = margin * (y_hi - y_lo);
  Matrix pts(n_train, 2);
  int found = 0, offset = 0;
  while (found < n_train) {
    const int batch = 4 * (n_train - found) + 16;
    const Matrix u = sobol_uniform(2, offset + batch, seed);
    for (int i = offset; i < offset + batch && found < n_train; ++i) {
      Vector p(2);
      p(0) = x_lo + mx + (x_hi - x_lo - 2 * mx) * u(i, 0);
      p(1) = y_lo + my + (y_hi - y_lo - 2 * my) * u(i, 1);
      try {
        locate_point(mesh, p);
      } catch (const std::exception&) {
        continue;  // inside the hole (or outside): reject
      }
      pts.row(found++) = p.transpose();
    }
    offset += batch;
    if (offset > 100000)
      throw std::runtime_error("training_points: rejection sampling failed to fill");
  }
  return pts;
}

OfflineModel offline(const Problem& prob, int m, int n_samples, const Matrix& train_pts,
                     std::uint64_t seed, Recurrence rec, int jobs) {
  if (n_samples < 1) throw std::invalid_argument("offline: need at least one sample");
  if (m < 1) throw std::invalid_argument("offline: order must be >= 1");
  OfflineModel model;
  model.prob = prob;
  model.order = m;
  model.rec = rec;
  model.seed = seed;
  model.train_pts = train_pts;
  model.shared_system = !prob.kappa_random;

  if (prob.kappa_random) {
    model.kl = kl_expansion(prob.mesh.nodes, prob.mu_log_kappa, prob.kappa_kernel, prob.kl_tau);
  }
  const int m_kl = prob.kappa_random ? model.kl.m() : 0;
  const GaussianSampler rhs_sampler = make_sampler(prob.rhs);
  const int dim = m_kl + std::max(rhs_sampler.input_dim(), 0);
  if (dim < 1) throw std::invalid_argument("offline: problem has no stochastic inputs");
  const Matrix Z = sobol_gaussian(dim, n_samples, seed);

  std::shared_ptr<const HelmholtzSystem> shared_sys;
  std::shared_ptr<const LuFactors> shared_lu;
  if (model.shared_system) {
    Vector kappa = prob.mu_log_kappa.array().exp();
    shared_sys = std::make_shared<const HelmholtzSystem>(
        assemble_system(prob.mesh, kappa, prob.c, prob.beta));
    shared_lu = std::make_shared<const LuFactors>(system_matrix(*shared_sys, prob.omega_bar));
  }

  model.samples.resize(n_samples);
  parallel_for(n_samples, jobs, [&](int i) {
    SampleModel& s = model.samples[i];
    std::shared_ptr<const LuFactors> lu;
    if (model.shared_system) {
      s.sys = shared_sys;
      lu = shared_lu;
    } else {
      const Vector xi = Z.row(i).head(m_kl).transpose();
      const Vector kappa = kl_realize(model.kl, xi);
      s.sys = std::make_shared<const HelmholtzSystem>(
          assemble_system(prob.mesh, kappa, prob.c, prob.beta));
      lu = std::make_shared<const LuFactors>(system_matrix(*s.sys, prob.omega_bar));
    }
    const Vector zf = Z.row(i).tail(rhs_sampler.input_dim()).transpose();
    s.rhs = constrain(*s.sys, draw(rhs_sampler, zf));
    s.basis = build_basis(*s.sys, s.rhs, prob.omega_bar, m, lu, /*adjoint=*/false, rec);
    s.red = reduce(*s.sys, s.basis, s.rhs);
  });

  if (model.shared_system) {
    model.adjoints.push_back(build_adjoint_set(*shared_sys, prob.mesh, train_pts,
                                               prob.omega_bar, m, shared_lu, rec));
  } else {
    model.adjoints.resize(n_samples);
    parallel_for(n_samples, jobs, [&](int i) {
      model.adjoints[i] = build_adjoint_set(*model.samples[i].sys, prob.mesh, train_pts,
                                            prob.omega_bar, m, model.samples[i].basis.lu, rec);
    });
  }
  return model;
}

PriorEnsemble forward_prior(const OfflineModel& model, double omega, int jobs) {
  const int n = static_cast<int>(model.samples.size());
  const Eigen::Index N = model.prob.mesh.n_nodes();
  ComplexMatrix all(n, N);
  std::vector<char> ok(n, 0);
  parallel_for(n, jobs, [&](int i) {
    try {
      const ComplexVector u_r = solve_reduced(model.samples[i].red, omega);
      all.row(i) = lift(model.samples[i].basis, u_r).transpose();
      ok[i] = 1;
    } catch (const std::exception&) {
      ok[i] = 0;
    }
  });

  PriorEnsemble ens;
  for (int i = 0; i < n; ++i)
    if (ok[i]) ens.kept.push_back(i);
  ens.skipped = n - static_cast<int>(ens.kept.size());
  if (ens.skipped > n / 20) {
    std::ostringstream msg;
    msg << "forward_prior: " << ens.skipped << "/" << n
        << " reduced solves singular at omega = " << omega;
    throw std::runtime_error(msg.str());
  }
  ens.lifted.resize(ens.kept.size(), N);
  for (std::size_t r = 0; r < ens.kept.size(); ++r) ens.lifted.row(r) = all.row(ens.kept[r]);
  ens.prior = sample_moments(ens.lifted);
  return ens;
}

ComplexMatrix fom_ensemble(const OfflineModel& model, double omega, int jobs) {
  const int n = static_cast<int>(model.samples.size());
  const Eigen::Index N = model.prob.mesh.n_nodes();
  ComplexMatrix out(n, N);
  if (model.shared_system) {
    const LuFactors lu(system_matrix(*model.samples[0].sys, omega));
    parallel_for(n, jobs, [&](int i) {
      out.row(i) = lu.solve(model.samples[i].rhs).transpose();
    });
  } else {
    parallel_for(n, jobs, [&](int i) {
      out.row(i) =
          solve_fom(*model.samples[i].sys, omega, model.samples[i].rhs).transpose();
    });
  }
  return out;
}

ErrorField estimate_errors(const OfflineModel& model, double omega, const PriorEnsemble& ens,
                           SigmaMode mode, int jobs) {
  const int nk = static_cast<int>(ens.kept.size());
  const Eigen::Index nt = model.train_pts.rows();
  if (nk < 2) throw std::runtime_error("estimate_errors: ensemble too small");

  // indicators d[sample][point]
  ComplexMatrix d(nk, nt);
  if (model.shared_system) {
    // one system matrix and one dual per point serve every sample
    const SparseComplexMatrix A = system_matrix(*model.samples[ens.kept[0]].sys, omega);
    const AdjointSet& adj = model.adjoints[0];
    ComplexMatrix Q(model.prob.mesh.n_nodes(), nt);
    parallel_for(static_cast<int>(nt), jobs, [&](int l) {
      Q.col(l) = reduced_dual_solution(A, adj.bases[l], adj.extractors[l]);
    });
    parallel_for(nk, jobs, [&](int r) {
      const SampleModel& s = model.samples[ens.kept[r]];
      const ComplexVector resid = s.rhs - A * ComplexVector(ens.lifted.row(r).transpose());
      for (Eigen::Index l = 0; l < nt; ++l) d(r, l) = Q.col(l).dot(resid);
    });
  } else {
    parallel_for(nk, jobs, [&](int r) {
      const int i = ens.kept[r];
      const SampleModel& s = model.samples[i];
      const AdjointSet& adj = model.adjoints[i];
      const SparseComplexMatrix A = system_matrix(*s.sys, omega);
      const ComplexVector u = ens.lifted.row(r).transpose();
      for (Eigen::Index l = 0; l < nt; ++l)
        d(r, l) = reduced_adjoint_error(A, adj.bases[l], adj.extractors[l], s.rhs, u);
    });
  }

  ComplexVector d_mean = d.colwise().mean().transpose();
  Vector noise(nt);
  for (Eigen::Index l = 0; l < nt; ++l) {
    double acc = 0.0;
    for (int r = 0; r < nk; ++r) acc += std::norm(d(r, l) - d_mean(l));
    double var = acc / std::max(1, nk - 1);  // complex sample variance
    if (mode == SigmaMode::mean_variance) var /= nk;
    noise(l) = var;
  }
  return regress_error_field(model.prob.mesh, model.train_pts, d_mean, noise, omega,
                             model.prob.c);
}

Observations synthesize_observations(const Mesh& data_mesh, const ComplexVector& u_data,
                                     const Matrix& sensor_pts, int n_obs, double sigma_e,
                                     std::uint64_t seed) {
  if (n_obs < 1) throw std::invalid_argument("synthesize_observations: n_obs >= 1");
  if (sigma_e < 0) throw std::invalid_argument("synthesize_observations: sigma_e >= 0");
  const SparseMatrix P = interpolation_matrix(data_mesh, sensor_pts);
  const ComplexVector at_sensors = P.cast<Complex>() * u_data;
  Observations obs;
  obs.sensor_pts = sensor_pts;
  obs.sigma_e = sigma_e;
  const Eigen::Index n_y = sensor_pts.rows();
  obs.Y_re.resize(n_y, n_obs);
  obs.Y_im.resize(n_y, n_obs);
  DeterministicRng rng(seed);
  for (int j = 0; j < n_obs; ++j)
    for (Eigen::Index i = 0; i < n_y; ++i) {
      obs.Y_re(i, j) = at_sensors(i).real() + sigma_e * rng.gauss();
      obs.Y_im(i, j) = at_sensors(i).imag() + sigma_e * rng.gauss();
    }
  return obs;
}

namespace {

// full-field true-process predictive without the sandwich through an
// explicit identity operator
MethodOutput finalize_method(const Posterior& post_re, const Posterior* post_im,
                             const Vector& mu_dr_re, const Vector& mu_dr_im,
                             const Matrix* C_dr, const Mesh& mesh) {
  MethodOutput out;
  out.post_re = post_re;
  const bool with_dr = mu_dr_re.size() > 0;

  auto channel_pred = [&](const Posterior& post, const Vector& mu_dr) {
    Predictive pred;
    const double r = post.hp.rho;
    pred.mean = r * post.mean;
    pred.cov = r * r * post.cov;
    if (with_dr) {
      pred.mean += r * mu_dr;
      pred.cov += *C_dr;
    }
    pred.cov += discrepancy_covariance(post.hp, mesh.nodes);
    pred.cov = 0.5 * (pred.cov + pred.cov.transpose()).eval();
    return pred;
  };

  out.pred_re = channel_pred(post_re, mu_dr_re);
  out.field_mean = ComplexVector::Zero(mesh.n_nodes());
  out.field_mean.real() = out.pred_re.mean;
  if (post_im) {
    out.post_im = *post_im;
    out.pred_im = channel_pred(*post_im, mu_dr_im);
    out.field_mean.imag() = out.pred_im.mean;
  }
  return out;
}

}  // namespace

RunResult online(const OfflineModel& model, double omega, const Observations& obs,
                 const InferenceOptions& opts) {
  RunResult run;
  run.omega = omega;
  run.ensemble = forward_prior(model, omega, opts.jobs);
  const Mesh& mesh = model.prob.mesh;
  const Eigen::Index N = mesh.n_nodes();

  if (opts.with_error_estimator) {
    run.errors = estimate_errors(model, omega, run.ensemble, opts.sigma_mode, opts.jobs);
  } else {
    run.errors.mean = ComplexVector::Zero(N);
    run.errors.cov = Matrix::Zero(N, N);
  }

  ChannelData ch_re, ch_im;
  ch_re.P = ch_im.P = interpolation_matrix(mesh, obs.sensor_pts);
  ch_re.sensor_pts = ch_im.sensor_pts = obs.sensor_pts;
  ch_re.sigma_e = ch_im.sigma_e = obs.sigma_e;
  ch_re.Y = obs.Y_re;
  ch_im.Y = obs.Y_im;

  const Gaussian& prior = run.ensemble.prior;
  const Vector mu_re = prior.mean.real(), mu_im = prior.mean.imag();
  const Vector dr_re = run.errors.mean.real(), dr_im = run.errors.mean.imag();
  const Vector empty;
  const Matrix empty_cov;
  const bool complex_run = !model.prob.real_valued;

  // ROM prior + error-aware update
  {
    Hyperparameters hp_re = learn_hyperparameters(mu_re, prior.cov, dr_re, run.errors.cov,
                                                  ch_re, opts.bounds, opts.restarts, opts.seed);
    Posterior p_re = condition_statrom(mu_re, prior.cov, dr_re, run.errors.cov, ch_re, hp_re);
    if (complex_run) {
      Hyperparameters hp_im =
          learn_hyperparameters(mu_im, prior.cov, dr_im, run.errors.cov, ch_im, opts.bounds,
                                opts.restarts, opts.seed + 1);
      Posterior p_im = condition_statrom(mu_im, prior.cov, dr_im, run.errors.cov, ch_im, hp_im);
      run.statrom = finalize_method(p_re, &p_im, dr_re, dr_im, &run.errors.cov, mesh);
    } else {
      run.statrom = finalize_method(p_re, nullptr, dr_re, dr_im, &run.errors.cov, mesh);
    }
  }

  // ROM prior + classical update
  {
    Hyperparameters hp_re = learn_hyperparameters(mu_re, prior.cov, empty, empty_cov, ch_re,
                                                  opts.bounds, opts.restarts, opts.seed);
    Posterior p_re = condition_statfem(mu_re, prior.cov, ch_re, hp_re);
    if (complex_run) {
      Hyperparameters hp_im = learn_hyperparameters(mu_im, prior.cov, empty, empty_cov, ch_im,
                                                    opts.bounds, opts.restarts, opts.seed + 1);
      Posterior p_im = condition_statfem(mu_im, prior.cov, ch_im, hp_im);
      run.classical = finalize_method(p_re, &p_im, empty, empty, nullptr, mesh);
    } else {
      run.classical = finalize_method(p_re, nullptr, empty, empty, nullptr, mesh);
    }
  }

  // classical update on full-order solves
  if (opts.fullorder) {
    const ComplexMatrix fom = fom_ensemble(model, omega, opts.jobs);
    const Gaussian fprior = sample_moments(fom);
    const Vector fmu_re = fprior.mean.real(), fmu_im = fprior.mean.imag();
    Hyperparameters hp_re = learn_hyperparameters(fmu_re, fprior.cov, empty, empty_cov, ch_re,
                                                  opts.bounds, opts.restarts, opts.seed);
    Posterior p_re = condition_statfem(fmu_re, fprior.cov, ch_re, hp_re);
    if (complex_run) {
      Hyperparameters hp_im = learn_hyperparameters(fmu_im, fprior.cov, empty, empty_cov,
                                                    ch_im, opts.bounds, opts.restarts,
                                                    opts.seed + 1);
      Posterior p_im = condition_statfem(fmu_im, fprior.cov, ch_im, hp_im);
      run.fullorder = finalize_method(p_re, &p_im, empty, empty, nullptr, mesh);
    } else {
      run.fullorder = finalize_method(p_re, nullptr, empty, empty, nullptr, mesh);
    }
  }
  return run;
}

}  // namespace statrom
