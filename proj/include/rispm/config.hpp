#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace rispm {

/// One parsed config value: scalar number, string, boolean, or a list.
struct ConfigValue {
  std::variant<double, std::string, bool, std::vector<double>, std::vector<std::string>> value;
  std::size_t line = 0;
};

/// Flat key-value view of a sectioned `key = value` config file; keys are
/// "section.key" paths. Tracks consumption so unknown keys can be reported.
class ParsedConfig {
 public:
  static ParsedConfig parse_file(const std::string& path);
  static ParsedConfig parse_text(const std::string& text, const std::string& origin);

  bool has(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  /// Number that also accepts the literal `inf`.
  double number_or_inf(const std::string& key, double fallback) const;
  std::string text(const std::string& key, const std::string& fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::vector<double> number_list(const std::string& key) const;
  std::vector<std::string> text_list(const std::string& key) const;

  /// Power in watts: plain numbers are watts, strings accept "X dBm" / "X W".
  double power_watts(const std::string& key, double fallback) const;
  /// Linear gain: plain numbers pass through, strings accept "X dB".
  double linear_gain(const std::string& key, double fallback) const;

  /// Throws if any key was never read.
  void ensure_all_consumed() const;

 private:
  std::string origin_;
  std::map<std::string, ConfigValue> values_;
  mutable std::map<std::string, bool> consumed_;

  const ConfigValue* find(const std::string& key) const;
  [[noreturn]] void fail(const std::string& key, const std::string& why) const;
};

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);
double db_to_linear(double db);

}  // namespace rispm
