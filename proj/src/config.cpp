#include "rispm/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace rispm {

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }
double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }
double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

bool parse_number(const std::string& s, double& out) {
  if (s == "inf") {
    out = std::numeric_limits<double>::infinity();
    return true;
  }
  std::size_t used = 0;
  try {
    out = std::stod(s, &used);
  } catch (...) {
    return false;
  }
  return used == s.size();
}

// "20 dBm" / "-80dBm" / "0.1 W" -> watts
bool parse_power_text(const std::string& s, double& out) {
  const std::string t = trim(s);
  auto ends_with = [&](const std::string& suffix) {
    if (t.size() < suffix.size()) return false;
    for (std::size_t i = 0; i < suffix.size(); ++i)
      if (std::tolower(static_cast<unsigned char>(t[t.size() - suffix.size() + i])) !=
          std::tolower(static_cast<unsigned char>(suffix[i])))
        return false;
    return true;
  };
  if (ends_with("dbm")) {
    double v;
    if (!parse_number(trim(t.substr(0, t.size() - 3)), v)) return false;
    out = dbm_to_watts(v);
    return true;
  }
  if (ends_with("w")) {
    double v;
    if (!parse_number(trim(t.substr(0, t.size() - 1)), v)) return false;
    out = v;
    return true;
  }
  return parse_number(t, out);
}

bool parse_gain_text(const std::string& s, double& out) {
  const std::string t = trim(s);
  if (t.size() > 2) {
    const std::string tail = t.substr(t.size() - 2);
    if ((tail == "dB" || tail == "db" || tail == "DB")) {
      double v;
      if (!parse_number(trim(t.substr(0, t.size() - 2)), v)) return false;
      out = db_to_linear(v);
      return true;
    }
  }
  return parse_number(t, out);
}

}  // namespace

ParsedConfig ParsedConfig::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("config: cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_text(buf.str(), path);
}

ParsedConfig ParsedConfig::parse_text(const std::string& text, const std::string& origin) {
  ParsedConfig cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line;
  std::string section;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                 ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    const std::string raw = trim(line.substr(eq + 1));
    if (key.empty() || raw.empty())
      throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": empty key or value");

    ConfigValue value;
    value.line = lineno;
    if (raw.front() == '[') {
      if (raw.back() != ']')
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": unterminated list");
      std::vector<double> nums;
      std::vector<std::string> strs;
      bool is_string_list = false;
      std::string item;
      std::istringstream items(raw.substr(1, raw.size() - 2));
      while (std::getline(items, item, ',')) {
        item = trim(item);
        if (item.empty()) continue;
        if (item.front() == '"') {
          if (item.size() < 2 || item.back() != '"')
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": unterminated string in list");
          strs.push_back(item.substr(1, item.size() - 2));
          is_string_list = true;
        } else {
          double v;
          if (!parse_number(item, v))
            throw std::runtime_error(origin + ":" + std::to_string(lineno) +
                                     ": bad list item '" + item + "'");
          nums.push_back(v);
        }
      }
      if (is_string_list && !nums.empty())
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": mixed list types");
      if (is_string_list)
        value.value = strs;
      else
        value.value = nums;
    } else if (raw.front() == '"') {
      if (raw.size() < 2 || raw.back() != '"')
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": unterminated string");
      value.value = raw.substr(1, raw.size() - 2);
    } else if (raw == "true" || raw == "false") {
      value.value = (raw == "true");
    } else {
      double v;
      if (!parse_number(raw, v))
        throw std::runtime_error(origin + ":" + std::to_string(lineno) + ": bad value '" + raw +
                                 "' (quote strings)");
      value.value = v;
    }
    const std::string path_key = section.empty() ? key : section + "." + key;
    cfg.values_[path_key] = value;
    cfg.consumed_[path_key] = false;
  }
  return cfg;
}

const ConfigValue* ParsedConfig::find(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) return nullptr;
  consumed_[key] = true;
  return &it->second;
}

void ParsedConfig::fail(const std::string& key, const std::string& why) const {
  const auto it = values_.find(key);
  const std::string where =
      it != values_.end() ? origin_ + ":" + std::to_string(it->second.line) : origin_;
  throw std::runtime_error(where + ": key '" + key + "' " + why);
}

bool ParsedConfig::has(const std::string& key) const { return values_.count(key) != 0; }

double ParsedConfig::number(const std::string& key, double fallback) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) return fallback;
  if (const double* d = std::get_if<double>(&v->value)) {
    if (std::isinf(*d)) fail(key, "must be finite");
    return *d;
  }
  fail(key, "must be a number");
}

double ParsedConfig::number_or_inf(const std::string& key, double fallback) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) return fallback;
  if (const double* d = std::get_if<double>(&v->value)) return *d;
  if (const std::string* s = std::get_if<std::string>(&v->value)) {
    double out;
    if (parse_number(*s, out)) return out;
  }
  fail(key, "must be a number or inf");
}

std::string ParsedConfig::text(const std::string& key, const std::string& fallback) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) return fallback;
  if (const std::string* s = std::get_if<std::string>(&v->value)) return *s;
  fail(key, "must be a quoted string");
}

bool ParsedConfig::boolean(const std::string& key, bool fallback) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) return fallback;
  if (const bool* b = std::get_if<bool>(&v->value)) return *b;
  fail(key, "must be true or false");
}

std::vector<double> ParsedConfig::number_list(const std::string& key) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) return {};
  if (const auto* l = std::get_if<std::vector<double>>(&v->value)) return *l;
  if (const double* d = std::get_if<double>(&v->value)) return {*d};
  fail(key, "must be a list of numbers");
}

std::vector<std::string> ParsedConfig::text_list(const std::string& key) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) return {};
  if (const auto* l = std::get_if<std::vector<std::string>>(&v->value)) return *l;
  if (const std::string* s = std::get_if<std::string>(&v->value)) return {*s};
  fail(key, "must be a list of strings");
}

double ParsedConfig::power_watts(const std::string& key, double fallback) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) return fallback;
  if (const double* d = std::get_if<double>(&v->value)) return *d;
  if (const std::string* s = std::get_if<std::string>(&v->value)) {
    double out;
    if (parse_power_text(*s, out)) return out;
  }
  fail(key, "must be watts or a string like \"20 dBm\"");
}

double ParsedConfig::linear_gain(const std::string& key, double fallback) const {
  const ConfigValue* v = find(key);
  if (v == nullptr) return fallback;
  if (const double* d = std::get_if<double>(&v->value)) return *d;
  if (const std::string* s = std::get_if<std::string>(&v->value)) {
    double out;
    if (parse_gain_text(*s, out)) return out;
  }
  fail(key, "must be linear or a string like \"30 dB\"");
}

void ParsedConfig::ensure_all_consumed() const {
  for (const auto& [key, value] : values_) {
    if (!consumed_.at(key))
      throw std::runtime_error(origin_ + ":" + std::to_string(value.line) + ": unknown key '" +
                               key + "'");
  }
}

}  // namespace rispm
