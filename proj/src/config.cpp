#include "kpss/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <limits>
#include <ostream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>

#include "kpss/errors.hpp"

namespace kpss {

namespace {

namespace pt = boost::property_tree;

std::string dotted(const std::string& section, const std::string& key) {
  return section + "." + key;
}

// Maps section.key to its line in the source text, for diagnostics only.
std::map<std::string, int> index_lines(const std::string& text) {
  std::map<std::string, int> lines;
  std::istringstream in(text);
  std::string line;
  std::string section;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    boost::algorithm::trim(line);
    if (line.empty() || line[0] == ';' || line[0] == '#') continue;
    if (line.front() == '[' && line.back() == ']') {
      section = boost::algorithm::trim_copy(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) continue;
    lines.emplace(dotted(section, boost::algorithm::trim_copy(line.substr(0, eq))), number);
  }
  return lines;
}

double parse_double(const std::string& raw, bool& ok) {
  const std::string text = boost::algorithm::trim_copy(raw);
  ok = true;
  if (text == "inf" || text == "+inf") return std::numeric_limits<double>::infinity();
  if (text == "-inf") return -std::numeric_limits<double>::infinity();
  double value = 0.0;
  const char* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  ok = ec == std::errc() && ptr == end && !text.empty();
  return value;
}

}  // namespace

Config Config::from_string(const std::string& text, const std::string& source) {
  Config config;
  config.source_ = source;
  std::istringstream in(text);
  try {
    pt::ini_parser::read_ini(in, config.tree_);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError(source + ":" + std::to_string(e.line()) + ": " + e.message());
  }
  for (const auto& [name, node] : config.tree_) {
    if (node.empty() && !node.data().empty()) {
      throw ConfigError(source + ": key '" + name + "' must appear inside a [section]");
    }
  }
  config.lines_ = index_lines(text);
  return config;
}

Config Config::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return from_string(buffer.str(), path);
}

void Config::set(const std::string& dotted_key, const std::string& value) {
  const auto dot = dotted_key.find('.');
  if (dot == std::string::npos || dot == 0 || dot + 1 == dotted_key.size()) {
    throw ConfigError("override '" + dotted_key + "': expected section.key");
  }
  tree_.put(pt::ptree::path_type(dotted_key, '.'), value);
  lines_.erase(dotted_key);
}

bool Config::has_section(const std::string& section) const {
  return tree_.get_child_optional(pt::ptree::path_type(section, '.')).has_value();
}

bool Config::has(const std::string& section, const std::string& key) const {
  return tree_.get_optional<std::string>(pt::ptree::path_type(dotted(section, key), '.'))
      .has_value();
}

std::string Config::where(const std::string& section, const std::string& key) const {
  const auto it = lines_.find(dotted(section, key));
  if (it == lines_.end()) return source_ + ": " + dotted(section, key);
  return source_ + ":" + std::to_string(it->second) + ": " + dotted(section, key);
}

std::string Config::get_string(const std::string& section, const std::string& key) const {
  const auto value =
      tree_.get_optional<std::string>(pt::ptree::path_type(dotted(section, key), '.'));
  if (!value) throw ConfigError(source_ + ": missing required key " + dotted(section, key));
  return boost::algorithm::trim_copy(*value);
}

std::string Config::get_string(const std::string& section, const std::string& key,
                               const std::string& fallback) const {
  return has(section, key) ? get_string(section, key) : fallback;
}

double Config::get_double(const std::string& section, const std::string& key) const {
  const std::string raw = get_string(section, key);
  bool ok = false;
  const double value = parse_double(raw, ok);
  if (!ok) throw ConfigError(where(section, key) + ": expected a number, got '" + raw + "'");
  return value;
}

double Config::get_double(const std::string& section, const std::string& key,
                          double fallback) const {
  return has(section, key) ? get_double(section, key) : fallback;
}

std::int64_t Config::get_int(const std::string& section, const std::string& key) const {
  const double value = get_double(section, key);
  if (!(std::abs(value) < 9.0e15) || value != std::floor(value)) {
    throw ConfigError(where(section, key) + ": expected an integer");
  }
  return static_cast<std::int64_t>(value);
}

std::int64_t Config::get_int(const std::string& section, const std::string& key,
                             std::int64_t fallback) const {
  return has(section, key) ? get_int(section, key) : fallback;
}

std::uint64_t Config::get_uint(const std::string& section, const std::string& key,
                               std::uint64_t fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = get_string(section, key);
  std::uint64_t value = 0;
  const char* end = raw.data() + raw.size();
  const auto [ptr, ec] = std::from_chars(raw.data(), end, value);
  if (ec != std::errc() || ptr != end || raw.empty()) {
    throw ConfigError(where(section, key) + ": expected a non-negative integer, got '" + raw + "'");
  }
  return value;
}

bool Config::get_bool(const std::string& section, const std::string& key, bool fallback) const {
  if (!has(section, key)) return fallback;
  const std::string raw = boost::algorithm::to_lower_copy(get_string(section, key));
  if (raw == "true" || raw == "yes" || raw == "1") return true;
  if (raw == "false" || raw == "no" || raw == "0") return false;
  throw ConfigError(where(section, key) + ": expected true or false, got '" + raw + "'");
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key) const {
  const std::string raw = get_string(section, key);
  std::vector<std::string> parts;
  boost::algorithm::split(parts, raw, boost::algorithm::is_any_of(","));
  std::vector<double> values;
  for (const auto& part : parts) {
    bool ok = false;
    const double v = parse_double(part, ok);
    if (!ok) {
      throw ConfigError(where(section, key) + ": bad list entry '" +
                        boost::algorithm::trim_copy(part) + "'");
    }
    values.push_back(v);
  }
  return values;
}

std::vector<double> Config::get_list(const std::string& section, const std::string& key,
                                     const std::vector<double>& fallback) const {
  return has(section, key) ? get_list(section, key) : fallback;
}

void Config::require_known_keys(const std::string& section,
                                const std::vector<std::string>& allowed) const {
  const auto child = tree_.get_child_optional(pt::ptree::path_type(section, '.'));
  if (!child) return;
  for (const auto& [key, node] : *child) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw ConfigError(where(section, key) + ": unknown key");
    }
  }
}

void Config::require_known_sections(const std::vector<std::string>& allowed) const {
  for (const auto& [name, node] : tree_) {
    if (std::find(allowed.begin(), allowed.end(), name) == allowed.end()) {
      throw ConfigError(source_ + ": unknown section [" + name + "]");
    }
  }
}

void Config::write_comments(std::ostream& out, const std::vector<std::string>& skip) const {
  for (const auto& [section, node] : tree_) {
    out << "# [" << section << "]\n";
    for (const auto& [key, value] : node) {
      if (std::find(skip.begin(), skip.end(), dotted(section, key)) != skip.end()) continue;
      out << "# " << key << " = " << boost::algorithm::trim_copy(value.data()) << "\n";
    }
  }
}

}  // namespace kpss
