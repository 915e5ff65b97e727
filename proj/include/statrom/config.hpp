#pragma once

#include <map>
#include <string>
#include <vector>

namespace statrom {

/// Flat key = value configuration. Section headers in brackets are accepted
/// for readability but carry no namespace: keys are globally unique. '#'
/// starts a comment. Unknown or duplicate keys are errors, so typos fail
/// loudly instead of silently running defaults.
class Config {
public:
  static Config parse(const std::string& text);
  static Config load(const std::string& path);

  bool has(const std::string& key) const;
  void set(const std::string& key, const std::string& value);

  std::string get_string(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key, double fallback) const;
  int get_int(const std::string& key, int fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::vector<double> get_list(const std::string& key, const std::vector<double>& fallback) const;
  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) const;

  std::string require_string(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return kv_; }

  /// All keys the pipelines understand; parse() rejects anything else.
  static const std::vector<std::string>& known_keys();

private:
  std::map<std::string, std::string> kv_;
};

}  // namespace statrom
