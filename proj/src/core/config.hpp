#pragma once

#include <map>
#include <string>
#include <vector>

namespace bdb {

// Flat INI-style key-value config:
//   [model]
//   eta = 1.0      # comment
// Keys are addressed as "section.key". Parsing and typed access throw
// ConfigError with the offending key and line number.
class Config {
public:
  static Config parse_file(const std::string& path);
  static Config parse_string(const std::string& text, const std::string& origin = "<string>");

  bool has(const std::string& key) const;

  double get_double(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;

  // Keys present in the file but never read; used to reject typos.
  std::vector<std::string> unread_keys() const;

  const std::map<std::string, std::string>& entries() const { return values_; }

private:
  struct Raw {
    std::string value;
    int line = 0;
  };
  const Raw& lookup(const std::string& key) const;

  std::string origin_;
  std::map<std::string, Raw> raw_;
  std::map<std::string, std::string> values_;
  mutable std::map<std::string, bool> read_;
};

}  // namespace bdb
