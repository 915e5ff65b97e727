#pragma once

#include <string>
#include <utility>
#include <vector>

#include "statrom/config.hpp"
#include "statrom/pipeline.hpp"

namespace statrom {

/// Experiment harness behind the CLI: problem builders for the two study
/// configurations, synthetic ground-truth generation, and the commands that
/// emit the CSV tables (and SVG renderings of them).

/// Interval problem: random log-normal material field, random inhomogeneous
/// Neumann forcing at the left boundary, sound-hard right boundary. Real
/// valued (no impedance damping).
Problem build_problem_1d(const Config& cfg);

/// Square domain with a circular sound-soft scatterer, absorbing outer
/// boundary, deterministic unit material. The forcing is an incident plane
/// wave exp(ikx) at the given evaluation frequency plus a complex Matern
/// random field; omega only sets the incident wavenumber, not the expansion
/// point.
Problem build_problem_2d(const Config& cfg, double omega);

struct TruthField {
  Mesh mesh;           // fine data mesh
  ComplexVector field;
};

/// Data-generating reference: full-order solve at omega on a refined mesh
/// (data_refine x n_elements elements) with the mean material and forcing.
TruthField make_truth_1d(const Config& cfg, double omega);

/// 2d reference on the finer data mesh: one seeded draw xi of the stochastic
/// forcing part, modulated orthogonally to the incident wave,
/// f = fbar + re(xi) (0.8 cos(4.5 pi y) + 1) + i im(xi) (0.8 sin(4.5 pi y) + 1),
/// then a full-order solve. The modulation is the deliberate model
/// misspecification of the scattering study.
TruthField make_truth_2d(const Config& cfg, double omega, std::uint64_t seed);

/// n equally spaced sensors on [0, length], endpoints included.
Matrix sensor_points_1d(double length, int n);

/// n quasi-random sensors inside the square, at least sensor_margin away
/// from the walls and from the scatterer rim so the same coordinates are
/// strictly interior to both the prior and the data mesh.
Matrix sensor_points_2d(const Config& cfg, int n, std::uint64_t seed);

/// Leading-r view of an offline model: truncates every primal basis and
/// reduced system but keeps the adjoint bases at their built order, so a
/// low-order prior can still be paired with an accurate error indicator.
/// Valid for undamped problems only (nested bases); throws when the model
/// has an impedance term.
OfflineModel truncate_model(const OfflineModel& model, int r);

/// Counterpart for the indicator-quality studies: truncates only the
/// adjoint bases and leaves the primal ones alone.
OfflineModel truncate_adjoints(const OfflineModel& model, int r);

/// "5:20,30:50,80:200" -> {(5,20),(30,50),(80,200)} sensor/observation pairs.
std::vector<std::pair<int, int>> parse_obs_configs(const std::string& spec);

/// 17-significant-digit decimal form used in every CSV cell.
std::string format_number(double v);

/// Whole-file CSV write (header + rows, LF endings); nothing is written on
/// failure part-way, so emitted files are always complete.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<std::string>>& rows);

/// Minimal static line chart: column 0 is the x axis, every further column a
/// series. The y axis switches to log scale when all values are positive and
/// span more than two decades. Output is self-contained SVG.
std::string line_chart_svg(const std::string& title, const std::vector<std::string>& header,
                           const std::vector<std::vector<double>>& rows);

/// Commands behind the CLI verbs; each writes CSV into cfg "out" and returns
/// 0 (errors are thrown). See the CLI help for the config keys they read.
int cmd_converge_rom(const Config& cfg);
int cmd_sweep(const Config& cfg);
int cmd_statrom_converge(const Config& cfg);
int cmd_scatter2d(const Config& cfg);
int cmd_gen_data(const Config& cfg);
int cmd_plot(const Config& cfg);

}  // namespace statrom
