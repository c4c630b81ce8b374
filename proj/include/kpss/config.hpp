#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <boost/property_tree/ptree.hpp>

namespace kpss {

/// INI-style experiment configuration (`[section]` headers, `key = value`
/// lines, `;` or `#` comments). Every lookup failure raises ConfigError naming
/// the source, line and field.
class Config {
 public:
  static Config from_file(const std::string& path);
  static Config from_string(const std::string& text, const std::string& source = "<string>");

  /// Sets or replaces `section.key`, as done by command-line overrides.
  void set(const std::string& dotted_key, const std::string& value);

  [[nodiscard]] bool has(const std::string& section, const std::string& key) const;
  [[nodiscard]] bool has_section(const std::string& section) const;

  [[nodiscard]] std::string get_string(const std::string& section, const std::string& key) const;
  [[nodiscard]] std::string get_string(const std::string& section, const std::string& key,
                                       const std::string& fallback) const;
  [[nodiscard]] double get_double(const std::string& section, const std::string& key) const;
  [[nodiscard]] double get_double(const std::string& section, const std::string& key,
                                  double fallback) const;
  [[nodiscard]] std::int64_t get_int(const std::string& section, const std::string& key) const;
  [[nodiscard]] std::int64_t get_int(const std::string& section, const std::string& key,
                                     std::int64_t fallback) const;
  [[nodiscard]] std::uint64_t get_uint(const std::string& section, const std::string& key,
                                       std::uint64_t fallback) const;
  [[nodiscard]] bool get_bool(const std::string& section, const std::string& key,
                              bool fallback) const;
  /// Comma-separated list of reals.
  [[nodiscard]] std::vector<double> get_list(const std::string& section,
                                             const std::string& key) const;
  [[nodiscard]] std::vector<double> get_list(const std::string& section, const std::string& key,
                                             const std::vector<double>& fallback) const;

  /// Rejects keys outside `allowed` in `section`.
  void require_known_keys(const std::string& section, const std::vector<std::string>& allowed) const;
  /// Rejects sections outside `allowed`.
  void require_known_sections(const std::vector<std::string>& allowed) const;

  /// "source:line: section.key" (line omitted for keys set by override).
  [[nodiscard]] std::string where(const std::string& section, const std::string& key) const;

  /// Writes the configuration as `# `-prefixed INI lines, skipping `skip` keys.
  void write_comments(std::ostream& out, const std::vector<std::string>& skip = {}) const;

  [[nodiscard]] const std::string& source() const { return source_; }

 private:
  boost::property_tree::ptree tree_;
  std::string source_;
  std::map<std::string, int> lines_;
};

}  // namespace kpss
