#include "statrom/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <stdexcept>

#include "statrom/sobol.hpp"

namespace statrom {

namespace fs = std::filesystem;

namespace {

std::uint64_t seed_of(const Config& cfg) {
  return static_cast<std::uint64_t>(cfg.get_int("seed", 1));
}

int jobs_of(const Config& cfg) { return cfg.get_int("jobs", 1); }

Recurrence recurrence_of(const Config& cfg) {
  return recurrence_from_string(cfg.get_string("recurrence", "second-derivative"));
}

SigmaMode sigma_mode_of(const Config& cfg) {
  const std::string s = cfg.get_string("adj_sigma_mode", "mean_variance");
  if (s == "mean_variance") return SigmaMode::mean_variance;
  if (s == "raw") return SigmaMode::raw;
  throw std::runtime_error("adj_sigma_mode must be mean_variance or raw, got '" + s + "'");
}

InferenceOptions inference_options(const Config& cfg, double diameter) {
  InferenceOptions o;
  o.bounds.rho_lo = cfg.get_double("rho_lo", o.bounds.rho_lo);
  o.bounds.rho_hi = cfg.get_double("rho_hi", o.bounds.rho_hi);
  o.bounds.sigma_d_lo = cfg.get_double("sigma_d_lo", o.bounds.sigma_d_lo);
  o.bounds.sigma_d_hi = cfg.get_double("sigma_d_hi", o.bounds.sigma_d_hi);
  o.bounds.ell_d_lo = cfg.get_double("ell_d_lo", 1e-3 * diameter);
  o.bounds.ell_d_hi = cfg.get_double("ell_d_hi", 10.0 * diameter);
  o.restarts = cfg.get_int("restarts", 3);
  o.seed = seed_of(cfg);
  o.sigma_mode = sigma_mode_of(cfg);
  o.jobs = jobs_of(cfg);
  return o;
}

fs::path out_dir(const Config& cfg) {
  fs::path dir(cfg.get_string("out", "out"));
  fs::create_directories(dir);
  return dir;
}

void require_problem(const Config& cfg, const std::string& expected) {
  const std::string p = cfg.get_string("problem", expected);
  if (p != expected)
    throw std::runtime_error("this command runs the '" + expected + "' problem, config says '" +
                             p + "'");
}

double elapsed_s(const std::chrono::steady_clock::time_point& t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ensemble mean of the full-order rows actually kept by the reduced run
ComplexVector kept_mean(const ComplexMatrix& fom, const std::vector<int>& kept) {
  ComplexVector mu = ComplexVector::Zero(fom.cols());
  for (int i : kept) mu += fom.row(i).transpose();
  return mu / static_cast<double>(kept.size());
}

std::vector<double> frequency_grid(const Config& cfg) {
  const double lo = cfg.get_double("freq_min_hz", 40.0);
  const double hi = cfg.get_double("freq_max_hz", 620.0);
  const int n = cfg.get_int("freq_count", 30);
  if (n < 1) throw std::runtime_error("empty frequency grid (freq_count < 1)");
  if (hi < lo) throw std::runtime_error("freq_max_hz < freq_min_hz");
  std::vector<double> f(n);
  for (int i = 0; i < n; ++i) f[i] = n == 1 ? lo : lo + (hi - lo) * i / (n - 1.0);
  return f;
}

std::string xml_escape(const std::string& s) {
  std::string out;
  for (char ch : s) {
    if (ch == '&') out += "&amp;";
    else if (ch == '<') out += "&lt;";
    else if (ch == '>') out += "&gt;";
    else out += ch;
  }
  return out;
}

}  // namespace

Problem build_problem_1d(const Config& cfg) {
  Problem p;
  p.mesh = build_interval_mesh(cfg.get_int("n_elements", 100), cfg.get_double("length", 1.0));
  p.c = cfg.get_double("c", 343.0);
  p.beta = cfg.get_double("beta", 0.0);
  p.omega_bar = 2.0 * M_PI * cfg.get_double("omega_bar_hz", 100.0);
  p.kappa_random = true;
  p.mu_log_kappa =
      Vector::Constant(p.mesh.n_nodes(), cfg.get_double("mu_log_kappa", 0.0));
  p.kappa_kernel.nu = cfg.get_double("kappa_nu", 0.5);
  p.kappa_kernel.sigma = cfg.get_double("kappa_sigma", std::sqrt(5e-2));
  p.kappa_kernel.ell = cfg.get_double("kappa_ell", 0.3);
  p.kl_tau = cfg.get_double("kl_tau", 0.95);
  p.real_valued = true;

  // scalar Gaussian flux through the left boundary; the boundary "integral"
  // of a point source is the point value, so the covariance is one entry
  const double fg_mean = cfg.get_double("fg_mean", M_PI * M_PI / 50.0);
  const double fg_sigma = cfg.get_double("fg_sigma", 0.02);
  p.rhs.mean =
      assemble_neumann(p.mesh, ComplexVector::Constant(p.mesh.n_nodes(), fg_mean));
  p.rhs.cov = Matrix::Zero(p.mesh.n_nodes(), p.mesh.n_nodes());
  for (const auto& b : p.mesh.boundary)
    if (b.tag == BoundaryTag::neumann_g) p.rhs.cov(b.nodes[0], b.nodes[0]) = fg_sigma * fg_sigma;
  p.rhs.complex_field = false;
  return p;
}

Problem build_problem_2d(const Config& cfg, double omega) {
  Problem p;
  p.mesh = build_scatterer_mesh(cfg.get_double("side", 1.0), cfg.get_double("circle_x", 0.5),
                                cfg.get_double("circle_y", 0.5),
                                cfg.get_double("circle_radius", 0.25), cfg.get_int("grid_n", 32));
  p.c = cfg.get_double("c", 343.0);
  p.beta = cfg.get_double("beta", 1.0);
  p.omega_bar = 2.0 * M_PI * cfg.get_double("omega_bar_hz", 250.0);
  p.kappa_random = false;
  p.mu_log_kappa = Vector::Zero(p.mesh.n_nodes());
  p.real_valued = false;

  MaternKernel kf;
  kf.nu = cfg.get_double("f_nu", 1.5);
  kf.sigma = cfg.get_double("f_sigma", 0.8);
  kf.ell = cfg.get_double("f_ell", 0.6);
  const double k = omega / p.c;
  ComplexVector fbar(p.mesh.n_nodes());
  for (Eigen::Index i = 0; i < fbar.size(); ++i)
    fbar(i) = std::exp(Complex(0.0, k * p.mesh.nodes(i, 0)));
  p.rhs = discrete_forcing(p.mesh.nodes, basis_integrals(p.mesh), fbar, kf,
                           /*complex_field=*/true);
  p.rhs.mean = assemble_load(p.mesh, fbar);  // consistent load for the mean part
  return p;
}

TruthField make_truth_1d(const Config& cfg, double omega) {
  TruthField t;
  const int n_el = cfg.get_int("data_refine", 10) * cfg.get_int("n_elements", 100);
  t.mesh = build_interval_mesh(n_el, cfg.get_double("length", 1.0));
  const Vector kappa =
      Vector::Constant(t.mesh.n_nodes(), std::exp(cfg.get_double("mu_log_kappa", 0.0)));
  const HelmholtzSystem sys =
      assemble_system(t.mesh, kappa, cfg.get_double("c", 343.0), cfg.get_double("beta", 0.0));
  const ComplexVector g =
      ComplexVector::Constant(t.mesh.n_nodes(), cfg.get_double("fg_mean", M_PI * M_PI / 50.0));
  t.field = solve_fom(sys, omega, constrain(sys, assemble_neumann(t.mesh, g)));
  return t;
}

TruthField make_truth_2d(const Config& cfg, double omega, std::uint64_t seed) {
  TruthField t;
  t.mesh = build_scatterer_mesh(cfg.get_double("side", 1.0), cfg.get_double("circle_x", 0.5),
                                cfg.get_double("circle_y", 0.5),
                                cfg.get_double("circle_radius", 0.25),
                                cfg.get_int("data_grid_n", 37));
  const double c = cfg.get_double("c", 343.0);
  const double k = omega / c;
  const Eigen::Index n = t.mesh.n_nodes();

  // one seeded draw of the stochastic forcing part on the data mesh
  MaternKernel kf;
  kf.nu = cfg.get_double("f_nu", 1.5);
  kf.sigma = cfg.get_double("f_sigma", 0.8);
  kf.ell = cfg.get_double("f_ell", 0.6);
  Gaussian s;
  s.mean = ComplexVector::Zero(n);
  s.cov = kernel_matrix(kf, t.mesh.nodes);
  s.complex_field = true;
  const GaussianSampler sampler = make_sampler(s);
  DeterministicRng rng(seed);
  Vector z(sampler.input_dim());
  for (Eigen::Index i = 0; i < z.size(); ++i) z(i) = rng.gauss();
  const ComplexVector xi = draw(sampler, z);

  // incident wave plus the sample modulated orthogonally to it
  ComplexVector f(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double x = t.mesh.nodes(i, 0), y = t.mesh.nodes(i, 1);
    f(i) = std::exp(Complex(0.0, k * x)) +
           Complex(xi(i).real() * (0.8 * std::cos(4.5 * M_PI * y) + 1.0),
                   xi(i).imag() * (0.8 * std::sin(4.5 * M_PI * y) + 1.0));
  }
  const HelmholtzSystem sys =
      assemble_system(t.mesh, Vector::Ones(n), c, cfg.get_double("beta", 1.0));
  t.field = solve_fom(sys, omega, constrain(sys, assemble_load(t.mesh, f)));
  return t;
}

Matrix sensor_points_1d(double length, int n) {
  if (n < 1) throw std::invalid_argument("sensor_points_1d: n >= 1");
  Matrix pts(n, 1);
  if (n == 1) {
    pts(0, 0) = 0.5 * length;
    return pts;
  }
  for (int i = 0; i < n; ++i) pts(i, 0) = length * i / (n - 1.0);
  return pts;
}

Matrix sensor_points_2d(const Config& cfg, int n, std::uint64_t seed) {
  if (n < 1) throw std::invalid_argument("sensor_points_2d: n >= 1");
  const double side = cfg.get_double("side", 1.0);
  const double cx = cfg.get_double("circle_x", 0.5), cy = cfg.get_double("circle_y", 0.5);
  const double radius = cfg.get_double("circle_radius", 0.25);
  const double margin = cfg.get_double("sensor_margin", 0.1);
  if (2.0 * margin >= side) throw std::invalid_argument("sensor_points_2d: margin too large");
  Matrix pts(n, 2);
  int found = 0, offset = 0;
  while (found < n) {
    const int batch = 4 * (n - found) + 16;
    const Matrix u = sobol_uniform(2, offset + batch, seed);
    for (int i = offset; i < offset + batch && found < n; ++i) {
      const double px = margin + (side - 2.0 * margin) * u(i, 0);
      const double py = margin + (side - 2.0 * margin) * u(i, 1);
      if (std::hypot(px - cx, py - cy) < radius + margin) continue;  // too close to the rim
      pts(found, 0) = px;
      pts(found, 1) = py;
      ++found;
    }
    offset += batch;
    if (offset > 100000)
      throw std::runtime_error("sensor_points_2d: rejection sampling failed to fill");
  }
  return pts;
}

namespace {

void require_nested(const OfflineModel& model, const char* who) {
  for (const auto& s : model.samples)
    if (s.sys->beta != 0.0 && s.sys->D_bc.nonZeros() > 0)
      throw std::invalid_argument(std::string(who) + ": damped bases are not nested");
}

}  // namespace

OfflineModel truncate_model(const OfflineModel& model, int r) {
  if (r < 1 || r > model.order) throw std::invalid_argument("truncate_model: bad order");
  require_nested(model, "truncate_model");
  OfflineModel out = model;
  out.order = r;
  for (auto& s : out.samples) {
    const int rr = std::min<int>(r, static_cast<int>(s.basis.V.cols()));
    s.basis = truncate(s.basis, rr);
    s.red = truncate(s.red, rr);
  }
  return out;
}

OfflineModel truncate_adjoints(const OfflineModel& model, int r) {
  if (r < 1) throw std::invalid_argument("truncate_adjoints: bad order");
  require_nested(model, "truncate_adjoints");
  OfflineModel out = model;
  for (auto& adj : out.adjoints)
    for (auto& b : adj.bases) b = truncate(b, std::min<int>(r, static_cast<int>(b.V.cols())));
  return out;
}

std::vector<std::pair<int, int>> parse_obs_configs(const std::string& spec) {
  std::vector<std::pair<int, int>> out;
  std::istringstream ss(spec);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    const auto colon = tok.find(':');
    if (colon == std::string::npos)
      throw std::runtime_error("obs_config_set entry '" + tok + "' is not sensors:observations");
    const int ns = std::stoi(tok.substr(0, colon));
    const int no = std::stoi(tok.substr(colon + 1));
    if (ns < 1 || no < 1)
      throw std::runtime_error("obs_config_set entry '" + tok + "' must be positive");
    out.emplace_back(ns, no);
  }
  if (out.empty()) throw std::runtime_error("obs_config_set is empty");
  return out;
}

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.16e", v);
  return buf;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows) {
  std::string body;
  for (std::size_t j = 0; j < header.size(); ++j)
    body += (j ? "," : "") + header[j];
  body += '\n';
  for (const auto& row : rows) {
    if (row.size() != header.size())
      throw std::runtime_error("write_csv: row width does not match header");
    for (std::size_t j = 0; j < row.size(); ++j)
      body += (j ? "," : "") + row[j];
    body += '\n';
  }
  const fs::path p(path);
  if (!p.parent_path().empty()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out.write(body.data(), static_cast<std::streamsize>(body.size()));
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

std::string line_chart_svg(const std::string& title, const std::vector<std::string>& header,
                           const std::vector<std::vector<double>>& rows) {
  if (header.size() < 2) throw std::runtime_error("line_chart_svg: need x plus one series");
  if (rows.empty()) throw std::runtime_error("line_chart_svg: no data rows");
  for (const auto& r : rows)
    if (r.size() != header.size()) throw std::runtime_error("line_chart_svg: ragged rows");

  const double W = 640, H = 420, ml = 80, mr = 170, mt = 34, mb = 50;
  double xmin = rows[0][0], xmax = rows[0][0];
  double ymin = rows[0][1], ymax = rows[0][1];
  for (const auto& r : rows) {
    xmin = std::min(xmin, r[0]);
    xmax = std::max(xmax, r[0]);
    for (std::size_t j = 1; j < r.size(); ++j) {
      ymin = std::min(ymin, r[j]);
      ymax = std::max(ymax, r[j]);
    }
  }
  const bool logy = ymin > 0.0 && ymax / ymin > 100.0;
  if (xmax == xmin) xmax = xmin + 1.0;
  double tlo = logy ? std::log10(ymin) : ymin;
  double thi = logy ? std::log10(ymax) : ymax;
  if (thi == tlo) thi = tlo + 1.0;
  const auto px = [&](double x) { return ml + (W - ml - mr) * (x - xmin) / (xmax - xmin); };
  const auto py = [&](double y) {
    const double t = logy ? std::log10(y) : y;
    return H - mb - (H - mt - mb) * (t - tlo) / (thi - tlo);
  };
  const auto num = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.2f", v);
    return std::string(buf);
  };
  const auto label = [](double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.3g", v);
    return std::string(buf);
  };
  static const char* kPalette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#17becf", "#7f7f7f"};

  std::ostringstream svg;
  svg << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n"
      << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H
      << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
      << "<rect width=\"" << W << "\" height=\"" << H << "\" fill=\"white\"/>\n"
      << "<text x=\"" << num(ml) << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">"
      << xml_escape(title) << "</text>\n";

  // frame and ticks
  svg << "<rect x=\"" << num(ml) << "\" y=\"" << num(mt) << "\" width=\"" << num(W - ml - mr)
      << "\" height=\"" << num(H - mt - mb)
      << "\" fill=\"none\" stroke=\"#333333\" stroke-width=\"1\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = xmin + (xmax - xmin) * i / 4.0;
    svg << "<line x1=\"" << num(px(x)) << "\" y1=\"" << num(H - mb) << "\" x2=\"" << num(px(x))
        << "\" y2=\"" << num(H - mb + 5) << "\" stroke=\"#333333\"/>\n"
        << "<text x=\"" << num(px(x)) << "\" y=\"" << num(H - mb + 18)
        << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"middle\">" << label(x)
        << "</text>\n";
  }
  if (logy) {
    const int d0 = static_cast<int>(std::ceil(tlo - 1e-9));
    const int d1 = static_cast<int>(std::floor(thi + 1e-9));
    for (int d = d0; d <= d1; ++d) {
      const double y = py(std::pow(10.0, d));
      svg << "<line x1=\"" << num(ml) << "\" y1=\"" << num(y) << "\" x2=\"" << num(W - mr)
          << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n"
          << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(y + 4)
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">1e" << d
          << "</text>\n";
    }
  } else {
    for (int i = 0; i <= 4; ++i) {
      const double v = tlo + (thi - tlo) * i / 4.0;
      const double y = py(v);
      svg << "<line x1=\"" << num(ml) << "\" y1=\"" << num(y) << "\" x2=\"" << num(W - mr)
          << "\" y2=\"" << num(y) << "\" stroke=\"#dddddd\"/>\n"
          << "<text x=\"" << num(ml - 6) << "\" y=\"" << num(y + 4)
          << "\" font-family=\"sans-serif\" font-size=\"11\" text-anchor=\"end\">" << label(v)
          << "</text>\n";
    }
  }
  svg << "<text x=\"" << num((ml + W - mr) / 2.0) << "\" y=\"" << num(H - 8)
      << "\" font-family=\"sans-serif\" font-size=\"12\" text-anchor=\"middle\">"
      << xml_escape(header[0]) << "</text>\n";

  for (std::size_t j = 1; j < header.size(); ++j) {
    const char* color = kPalette[(j - 1) % (sizeof(kPalette) / sizeof(kPalette[0]))];
    svg << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (const auto& r : rows) svg << num(px(r[0])) << "," << num(py(r[j])) << " ";
    svg << "\"/>\n";
    const double ly = mt + 16.0 * static_cast<double>(j);
    svg << "<line x1=\"" << num(W - mr + 10) << "\" y1=\"" << num(ly - 4) << "\" x2=\""
        << num(W - mr + 30) << "\" y2=\"" << num(ly - 4) << "\" stroke=\"" << color
        << "\" stroke-width=\"2\"/>\n"
        << "<text x=\"" << num(W - mr + 35) << "\" y=\"" << num(ly)
        << "\" font-family=\"sans-serif\" font-size=\"11\">" << xml_escape(header[j])
        << "</text>\n";
  }
  svg << "</svg>\n";
  return svg.str();
}

int cmd_converge_rom(const Config& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  require_problem(cfg, "helmholtz1d");
  const int m_max = cfg.get_int("m_max", 15);
  const double omega = 2.0 * M_PI * cfg.get_double("freq_hz", 460.0);
  const Problem prob = build_problem_1d(cfg);
  const double k = omega / prob.c;
  const int jobs = jobs_of(cfg);

  const OfflineModel model = offline(prob, m_max, cfg.get_int("qmc_samples", 256),
                                     Matrix(0, 1), seed_of(cfg), recurrence_of(cfg), jobs);
  const ComplexMatrix fom = fom_ensemble(model, omega, jobs);

  std::vector<std::vector<std::string>> rows;
  for (int m = 1; m <= m_max; ++m) {
    const PriorEnsemble ens = forward_prior(truncate_model(model, m), omega, jobs);
    const ComplexVector ref = kept_mean(fom, ens.kept);
    const double err =
        hk1_norm(prob.mesh, k, ens.prior.mean - ref) / hk1_norm(prob.mesh, k, ref);
    rows.push_back({std::to_string(m), format_number(err)});
    std::cout << "m = " << m << "  hk1 rel error = " << err << '\n';
  }
  const fs::path path = out_dir(cfg) / "rom_convergence.csv";
  write_csv(path.string(), {"m", "hk1_rel_error"}, rows);
  std::cout << "wrote " << path.string() << " (" << elapsed_s(t0) << " s)\n";
  return 0;
}

int cmd_sweep(const Config& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  require_problem(cfg, "helmholtz1d");
  std::vector<int> m_set = cfg.get_int_list("m_set", {5, 10, 15});
  const std::vector<double> freqs = frequency_grid(cfg);
  const Problem prob = build_problem_1d(cfg);
  const int jobs = jobs_of(cfg);
  const int m_max = *std::max_element(m_set.begin(), m_set.end());

  const OfflineModel model = offline(prob, m_max, cfg.get_int("qmc_samples", 256),
                                     Matrix(0, 1), seed_of(cfg), recurrence_of(cfg), jobs);
  std::vector<OfflineModel> truncated;
  for (int m : m_set) truncated.push_back(truncate_model(model, m));

  std::vector<std::string> header{"freq_hz"};
  for (int m : m_set) header.push_back("err_m" + std::to_string(m));
  std::vector<std::vector<std::string>> rows;
  for (double f : freqs) {
    const double omega = 2.0 * M_PI * f;
    const double k = omega / prob.c;
    const ComplexMatrix fom = fom_ensemble(model, omega, jobs);
    std::vector<std::string> row{format_number(f)};
    for (std::size_t j = 0; j < m_set.size(); ++j) {
      const PriorEnsemble ens = forward_prior(truncated[j], omega, jobs);
      const ComplexVector ref = kept_mean(fom, ens.kept);
      row.push_back(format_number(hk1_norm(prob.mesh, k, ens.prior.mean - ref) /
                                  hk1_norm(prob.mesh, k, ref)));
    }
    rows.push_back(row);
  }
  const fs::path path = out_dir(cfg) / "frequency_sweep.csv";
  write_csv(path.string(), header, rows);
  std::cout << "wrote " << path.string() << " (" << elapsed_s(t0) << " s)\n";
  return 0;
}

int cmd_statrom_converge(const Config& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  require_problem(cfg, "helmholtz1d");
  const std::vector<int> m_set = cfg.get_int_list("m_set", {4, 5, 6, 7, 8, 10, 12, 15});
  const double omega = 2.0 * M_PI * cfg.get_double("freq_hz", 460.0);
  const Problem prob = build_problem_1d(cfg);
  const double k = omega / prob.c;
  const double length = cfg.get_double("length", 1.0);
  const int jobs = jobs_of(cfg);
  const std::uint64_t seed = seed_of(cfg);

  const TruthField truth = make_truth_1d(cfg, omega);
  const double ref_norm = hk1_norm(truth.mesh, k, truth.field);
  const Matrix sensors = sensor_points_1d(length, cfg.get_int("n_sensors", 11));
  const Observations obs =
      synthesize_observations(truth.mesh, truth.field, sensors, cfg.get_int("n_obs", 20),
                              cfg.get_double("sigma_e", 1e-3), seed + 7);
  const Matrix train = training_points(prob.mesh, cfg.get_int("n_training", 12), seed);
  const int m_max = *std::max_element(m_set.begin(), m_set.end());
  const OfflineModel model = offline(prob, m_max, cfg.get_int("qmc_samples", 256), train, seed,
                                     recurrence_of(cfg), jobs);
  std::cout << "offline done (" << elapsed_s(t0) << " s)\n";

  InferenceOptions opts = inference_options(cfg, length);
  const auto rel_err = [&](const ComplexVector& field) {
    return hk1_error(truth.mesh, truth.field, prob.mesh, field, k) / ref_norm;
  };

  double err_full = 0.0;
  bool have_full = false;
  std::vector<std::vector<std::string>> rows;
  for (int m : m_set) {
    opts.fullorder = !have_full;
    const RunResult run = online(truncate_model(model, m), omega, obs, opts);
    if (run.fullorder) {
      err_full = rel_err(run.fullorder->field_mean);
      have_full = true;
    }
    const double err_cl = rel_err(run.classical.field_mean);
    const double err_sr = rel_err(run.statrom.field_mean);
    rows.push_back({std::to_string(m), format_number(err_cl), format_number(err_sr),
                    format_number(err_full)});
    std::cout << "m = " << m << "  classical = " << err_cl << "  statrom = " << err_sr
              << "  fullorder = " << err_full << '\n';
  }
  const fs::path path = out_dir(cfg) / "posterior_convergence.csv";
  write_csv(path.string(), {"m", "err_classical", "err_statrom", "err_fullorder"}, rows);
  std::cout << "wrote " << path.string() << " (" << elapsed_s(t0) << " s)\n";
  return 0;
}

int cmd_scatter2d(const Config& cfg) {
  const auto t0 = std::chrono::steady_clock::now();
  require_problem(cfg, "scatter2d");
  const double freq = cfg.get_double("freq_hz", 360.0);
  const double omega = 2.0 * M_PI * freq;
  const int m = cfg.get_int("m", 12);
  const int jobs = jobs_of(cfg);
  const std::uint64_t seed = seed_of(cfg);
  const double side = cfg.get_double("side", 1.0);

  const Problem prob = build_problem_2d(cfg, omega);
  std::cout << "prior mesh: " << prob.mesh.n_nodes() << " nodes, "
            << prob.mesh.n_nodes() - static_cast<Eigen::Index>(dirichlet_nodes(prob.mesh).size())
            << " free\n";
  const Matrix train = training_points(prob.mesh, cfg.get_int("n_training", 200), seed);
  const OfflineModel model = offline(prob, m, cfg.get_int("qmc_samples", 256), train, seed,
                                     recurrence_of(cfg), jobs);
  std::cout << "offline done (" << elapsed_s(t0) << " s)\n";

  const TruthField truth = make_truth_2d(cfg, omega, seed + 11);
  std::cout << "data mesh: " << truth.mesh.n_nodes() << " nodes, "
            << truth.mesh.n_nodes() - static_cast<Eigen::Index>(dirichlet_nodes(truth.mesh).size())
            << " free\n";
  // snapped circle rims differ slightly between the meshes; a loose locate
  // tolerance keeps rim nodes inside
  const SparseMatrix Pt = interpolation_matrix(truth.mesh, prob.mesh.nodes, 1e-3);
  const ComplexVector truth_p = Pt.cast<Complex>() * truth.field;
  const double norm_re = truth_p.real().norm(), norm_im = truth_p.imag().norm();

  InferenceOptions opts = inference_options(cfg, side * std::sqrt(2.0));
  opts.fullorder = true;
  const auto configs = parse_obs_configs(cfg.get_string("obs_config_set", "5:20,30:50,80:200"));

  std::vector<std::vector<std::string>> rows;
  for (std::size_t j = 0; j < configs.size(); ++j) {
    const auto [ns, no] = configs[j];
    const Matrix sensors = sensor_points_2d(cfg, ns, seed + 100 + j);
    const Observations obs =
        synthesize_observations(truth.mesh, truth.field, sensors, no,
                                cfg.get_double("sigma_e", 1e-3), seed + 200 + j);
    const RunResult run = online(model, omega, obs, opts);
    const auto add = [&](const std::string& method, const MethodOutput& mo) {
      const double err_re = (mo.field_mean.real() - truth_p.real()).norm() / norm_re;
      const double err_im = (mo.field_mean.imag() - truth_p.imag()).norm() / norm_im;
      rows.push_back({format_number(freq), std::to_string(ns), std::to_string(no), method,
                      format_number(err_re), format_number(err_im),
                      format_number(mo.post_re.hp.sigma_d), format_number(mo.post_im.hp.sigma_d)});
      std::cout << ns << " sensors / " << no << " obs  " << method << "  err_re = " << err_re
                << "  err_im = " << err_im << '\n';
    };
    add("fom", *run.fullorder);
    add("wo_est", run.classical);
    add("with_est", run.statrom);
  }
  const fs::path path = out_dir(cfg) / "scattering_table.csv";
  write_csv(path.string(),
            {"freq_hz", "n_sensors", "n_obs", "method", "err_re", "err_im", "sigma_d_re",
             "sigma_d_im"},
            rows);
  std::cout << "wrote " << path.string() << " (" << elapsed_s(t0) << " s)\n";
  return 0;
}

int cmd_gen_data(const Config& cfg) {
  const std::string problem = cfg.get_string("problem", "helmholtz1d");
  const std::uint64_t seed = seed_of(cfg);
  TruthField truth;
  Matrix sensors;
  std::uint64_t obs_seed;
  if (problem == "helmholtz1d") {
    const double omega = 2.0 * M_PI * cfg.get_double("freq_hz", 460.0);
    truth = make_truth_1d(cfg, omega);
    sensors = sensor_points_1d(cfg.get_double("length", 1.0), cfg.get_int("n_sensors", 11));
    obs_seed = seed + 7;  // same stream the 1d study consumes
  } else if (problem == "scatter2d") {
    const double omega = 2.0 * M_PI * cfg.get_double("freq_hz", 360.0);
    truth = make_truth_2d(cfg, omega, seed + 11);
    sensors = sensor_points_2d(cfg, cfg.get_int("n_sensors", 5), seed + 100);
    obs_seed = seed + 200;
  } else {
    throw std::runtime_error("unknown problem '" + problem + "'");
  }
  const Observations obs = synthesize_observations(
      truth.mesh, truth.field, sensors, cfg.get_int("n_obs", 20),
      cfg.get_double("sigma_e", 1e-3), obs_seed);

  const fs::path dir = out_dir(cfg);
  const int dim = truth.mesh.dim;
  std::vector<std::string> coord_header = dim == 1 ? std::vector<std::string>{"x"}
                                                   : std::vector<std::string>{"x", "y"};

  const auto reference_rows = [&](bool imag) {
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index i = 0; i < truth.mesh.n_nodes(); ++i) {
      std::vector<std::string> row{std::to_string(i)};
      for (int d = 0; d < dim; ++d) row.push_back(format_number(truth.mesh.nodes(i, d)));
      row.push_back(format_number(imag ? truth.field(i).imag() : truth.field(i).real()));
      rows.push_back(row);
    }
    return rows;
  };
  std::vector<std::string> ref_header{"node"};
  ref_header.insert(ref_header.end(), coord_header.begin(), coord_header.end());
  ref_header.push_back("value");
  write_csv((dir / "reference_re.csv").string(), ref_header, reference_rows(false));
  write_csv((dir / "reference_im.csv").string(), ref_header, reference_rows(true));

  std::vector<std::vector<std::string>> sensor_rows;
  for (Eigen::Index i = 0; i < sensors.rows(); ++i) {
    std::vector<std::string> row;
    for (int d = 0; d < dim; ++d) row.push_back(format_number(sensors(i, d)));
    sensor_rows.push_back(row);
  }
  write_csv((dir / "sensors.csv").string(), coord_header, sensor_rows);

  const auto reading_rows = [&](const Matrix& Y) {
    std::vector<std::vector<std::string>> rows;
    for (Eigen::Index i = 0; i < Y.rows(); ++i) {
      std::vector<std::string> row;
      for (Eigen::Index j = 0; j < Y.cols(); ++j) row.push_back(format_number(Y(i, j)));
      rows.push_back(row);
    }
    return rows;
  };
  std::vector<std::string> obs_header;
  for (Eigen::Index j = 0; j < obs.Y_re.cols(); ++j)
    obs_header.push_back("obs_" + std::to_string(j));
  write_csv((dir / "readings_re.csv").string(), obs_header, reading_rows(obs.Y_re));
  write_csv((dir / "readings_im.csv").string(), obs_header, reading_rows(obs.Y_im));
  std::cout << "wrote reference, sensor and reading files to " << dir.string() << '\n';
  return 0;
}

int cmd_plot(const Config& cfg) {
  const fs::path dir(cfg.get_string("out", "out"));
  if (!fs::is_directory(dir)) throw std::runtime_error("output directory not found: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.is_regular_file() && e.path().extension() == ".csv") files.push_back(e.path());
  std::sort(files.begin(), files.end());
  if (files.empty()) throw std::runtime_error("no CSV files in " + dir.string());

  int plotted = 0;
  for (const auto& file : files) {
    std::ifstream in(file);
    if (!in) throw std::runtime_error("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + file.string());
    const auto split = [](const std::string& s) {
      std::vector<std::string> cells;
      std::istringstream ss(s);
      std::string tok;
      while (std::getline(ss, tok, ',')) cells.push_back(tok);
      return cells;
    };
    const std::vector<std::string> header = split(line);
    std::vector<std::vector<double>> rows;
    bool numeric = true;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      std::vector<double> row;
      for (const auto& cell : split(line)) {
        char* end = nullptr;
        const double v = std::strtod(cell.c_str(), &end);
        if (end != cell.c_str() + cell.size() || cell.empty()) {
          numeric = false;
          break;
        }
        row.push_back(v);
      }
      if (!numeric) break;
      rows.push_back(row);
    }
    if (rows.empty() && numeric) throw std::runtime_error("empty CSV: " + file.string());
    if (!numeric) {
      std::cout << "skipping " << file.filename().string() << " (non-numeric columns)\n";
      continue;
    }
    const std::string svg = line_chart_svg(file.stem().string(), header, rows);
    fs::path out = file;
    out.replace_extension(".svg");
    std::ofstream os(out, std::ios::binary);
    os.write(svg.data(), static_cast<std::streamsize>(svg.size()));
    if (!os) throw std::runtime_error("write failed for " + out.string());
    ++plotted;
    std::cout << "wrote " << out.string() << '\n';
  }
  std::cout << plotted << " plot(s) written\n";
  return 0;
}

}  // namespace statrom
