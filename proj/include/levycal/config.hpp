#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>

#include "levycal/adaptive.hpp"
#include "levycal/models.hpp"
#include "levycal/pricing.hpp"

namespace levycal {

/// Flat `key = value` text; `#` starts a comment.
class KeyValueConfig {
 public:
  static KeyValueConfig parse(const std::string& text);
  static KeyValueConfig load(const std::filesystem::path& path);

  bool has(const std::string& key) const { return values_.count(key) > 0; }
  std::optional<std::string> get(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  int integer(const std::string& key, int fallback) const;
  bool flag(const std::string& key, bool fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  /// Throws InputError naming the first key outside `known`.
  void reject_unknown(const std::set<std::string>& known) const;
  const std::map<std::string, std::string>& values() const { return values_; }

 private:
  std::map<std::string, std::string> values_;
};

struct CutoffMode {
  enum class Kind { Oracle, Fixed, Adaptive };
  Kind kind = Kind::Adaptive;
  /// Cutoff for `fixed:<U>`.
  double U = 0.0;
};

/// `oracle`, `adaptive` or `fixed:<U>`.
CutoffMode parse_cutoff_mode(const std::string& text);

/// Everything the command-line tool reads from a config file.
struct Settings {
  AdaptiveConfig adaptive;
  CutoffMode cutoff;
  /// Variance gamma model, when `model = vg`.
  std::optional<VGParams> model;
  double T = 0.25;
  double r = 0.0;
  DesignSpec design;
  std::uint64_t seed = 1;
  int reps = 200;
  int workers = 1;
  /// Cutoff grid for oracle mode and the benchmarks.
  double U_min = 0.5, U_max = 60.0;
  int U_count = 60;
};

Settings load_settings(const KeyValueConfig& config);
std::set<std::string> settings_keys();

}  // namespace levycal
