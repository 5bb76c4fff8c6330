#include "core/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "core/errors.hpp"

namespace bdb {
namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

}  // namespace

Config Config::parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path);
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_string(ss.str(), path);
}

Config Config::parse_string(const std::string& text, const std::string& origin) {
  Config cfg;
  cfg.origin_ = origin;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::size_t comment = line.find_first_of("#;");
    if (comment != std::string::npos) line = line.substr(0, comment);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']')
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty())
        throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty section name");
      continue;
    }
    const std::size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
    if (section.empty())
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": key `" + key +
                        "` outside any [section]");
    const std::string full = section + "." + key;
    if (cfg.raw_.count(full))
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key `" + full + "`");
    cfg.raw_[full] = Raw{value, lineno};
    cfg.values_[full] = value;
  }
  return cfg;
}

bool Config::has(const std::string& key) const { return raw_.count(key) != 0; }

const Config::Raw& Config::lookup(const std::string& key) const {
  auto it = raw_.find(key);
  if (it == raw_.end()) throw ConfigError("missing key `" + key + "` in " + origin_);
  read_[key] = true;
  return it->second;
}

double Config::get_double(const std::string& key) const {
  const Raw& r = lookup(key);
  try {
    std::size_t pos = 0;
    const double v = std::stod(r.value, &pos);
    if (pos != r.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(r.line) + ": expected a number for `" +
                      key + "`, got `" + r.value + "`");
  }
}

double Config::get_double(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long Config::get_int(const std::string& key) const {
  const Raw& r = lookup(key);
  try {
    std::size_t pos = 0;
    const long v = std::stol(r.value, &pos);
    if (pos != r.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError(origin_ + ":" + std::to_string(r.line) + ": expected an integer for `" +
                      key + "`, got `" + r.value + "`");
  }
}

long Config::get_int(const std::string& key, long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

bool Config::get_bool(const std::string& key) const {
  const Raw& r = lookup(key);
  std::string v = r.value;
  std::transform(v.begin(), v.end(), v.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (v == "true" || v == "1" || v == "yes" || v == "on") return true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return false;
  throw ConfigError(origin_ + ":" + std::to_string(r.line) + ": expected a boolean for `" + key +
                    "`, got `" + r.value + "`");
}

bool Config::get_bool(const std::string& key, bool fallback) const {
  return has(key) ? get_bool(key) : fallback;
}

std::string Config::get_string(const std::string& key) const { return lookup(key).value; }

std::string Config::get_string(const std::string& key, const std::string& fallback) const {
  return has(key) ? get_string(key) : fallback;
}

std::vector<std::string> Config::unread_keys() const {
  std::vector<std::string> out;
  for (const auto& [key, raw] : raw_) {
    (void)raw;
    if (!read_.count(key)) out.push_back(key);
  }
  return out;
}

}  // namespace bdb
