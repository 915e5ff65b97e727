#include "statrom/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace statrom {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

}  // namespace

const std::vector<std::string>& Config::known_keys() {
  static const std::vector<std::string> keys = {
      // problem
      "problem", "c", "beta", "n_elements", "length", "side", "circle_x", "circle_y",
      "circle_radius", "grid_n", "mu_log_kappa",
      // frequencies
      "freq_hz", "freq_min_hz", "freq_max_hz", "freq_count", "omega_bar_hz",
      // reduced model
      "m", "m_max", "m_set", "recurrence",
      // stochastic model
      "qmc_samples", "kl_tau", "kappa_sigma", "kappa_ell", "kappa_nu", "fg_mean", "fg_sigma",
      "f_sigma", "f_ell", "f_nu",
      // data generation
      "n_sensors", "n_obs", "sigma_e", "data_refine", "data_grid_n", "sensor_margin",
      "obs_config_set",
      // error estimator
      "n_training", "adj_sigma_mode",
      // inference
      "restarts", "rho_lo", "rho_hi", "sigma_d_lo", "sigma_d_hi", "ell_d_lo", "ell_d_hi",
      // run control
      "seed", "jobs", "out",
  };
  return keys;
}

Config Config::parse(const std::string& text) {
  Config cfg;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error("config line " + std::to_string(lineno) + ": bad section");
      continue;  // sections are cosmetic
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error("config line " + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": empty key or value");
    const auto& known = known_keys();
    if (std::find(known.begin(), known.end(), key) == known.end())
      throw std::runtime_error("config line " + std::to_string(lineno) + ": unknown key '" +
                               key + "'");
    if (cfg.kv_.count(key))
      throw std::runtime_error("config line " + std::to_string(lineno) + ": duplicate key '" +
                               key + "'");
    cfg.kv_[key] = value;
  }
  return cfg;
}

Config Config::load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

bool Config::has(const std::string& key) const { return kv_.count(key) > 0; }

void Config::set(const std::string& key, const std::string& value) {
  const auto& known = known_keys();
  if (std::find(known.begin(), known.end(), key) == known.end())
    throw std::runtime_error("config: unknown key '" + key + "'");
  kv_[key] = value;
}

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  const auto it = kv_.find(key);
  return it == kv_.end() ? fallback : it->second;
}

double Config::get_double(const std::string& key, double fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::size_t pos = 0;
  const double v = std::stod(it->second, &pos);
  if (pos != it->second.size())
    throw std::runtime_error("config: key '" + key + "' is not a number");
  return v;
}

int Config::get_int(const std::string& key, int fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::size_t pos = 0;
  const int v = std::stoi(it->second, &pos);
  if (pos != it->second.size())
    throw std::runtime_error("config: key '" + key + "' is not an integer");
  return v;
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  if (it->second == "true" || it->second == "1") return true;
  if (it->second == "false" || it->second == "0") return false;
  throw std::runtime_error("config: key '" + key + "' is not a boolean");
}

std::vector<double> Config::get_list(const std::string& key,
                                     const std::vector<double>& fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<double> out;
  std::istringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stod(trim(tok)));
  if (out.empty()) throw std::runtime_error("config: key '" + key + "' is an empty list");
  return out;
}

std::vector<int> Config::get_int_list(const std::string& key,
                                      const std::vector<int>& fallback) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) return fallback;
  std::vector<int> out;
  std::istringstream ss(it->second);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(std::stoi(trim(tok)));
  if (out.empty()) throw std::runtime_error("config: key '" + key + "' is an empty list");
  return out;
}

std::string Config::require_string(const std::string& key) const {
  const auto it = kv_.find(key);
  if (it == kv_.end()) throw std::runtime_error("config: missing required key '" + key + "'");
  return it->second;
}

}  // namespace statrom
