#include "tcm/keyvalue.hpp"

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace tcm::kv {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool valid_key(const std::string& key) {
  if (key.empty()) return false;
  for (char ch : key) {
    const bool ok = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                    (ch >= '0' && ch <= '9') || ch == '_' || ch == '.' || ch == '-';
    if (!ok) return false;
  }
  return true;
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value, const char* what) {
  throw std::invalid_argument("key '" + key + "': cannot parse '" + value + "' as " + what);
}

}  // namespace

KeyValue KeyValue::parse(std::istream& in, const std::string& source) {
  KeyValue kv;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    auto fail = [&](const std::string& msg) {
      throw std::invalid_argument(source + ":" + std::to_string(lineno) + ": " + msg);
    };
    if (eq == std::string::npos) fail("expected 'key = value'");
    const std::string key = trim(t.substr(0, eq));
    if (!valid_key(key)) fail("invalid key '" + key + "'");
    if (kv.has(key)) fail("duplicate key '" + key + "'");
    kv.entries_[key] = trim(t.substr(eq + 1));
  }
  return kv;
}

KeyValue KeyValue::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open " + path.string());
  return parse(in, path.string());
}

void KeyValue::set(const std::string& key, const std::string& value) {
  if (!valid_key(key)) throw std::invalid_argument("invalid key '" + key + "'");
  entries_[key] = value;
}

void KeyValue::apply_override(const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos) {
    throw std::invalid_argument("override '" + assignment + "' is not of the form key=value");
  }
  set(trim(assignment.substr(0, eq)), trim(assignment.substr(eq + 1)));
}

const std::string& KeyValue::get(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) throw std::invalid_argument("missing key '" + key + "'");
  return it->second;
}

std::string KeyValue::get_or(const std::string& key, const std::string& fallback) const {
  auto it = entries_.find(key);
  return it == entries_.end() ? fallback : it->second;
}

double KeyValue::get_double(const std::string& key) const {
  const std::string& v = get(key);
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "a number");
  return out;
}

double KeyValue::get_double_or(const std::string& key, double fallback) const {
  return has(key) ? get_double(key) : fallback;
}

long long KeyValue::get_int(const std::string& key) const {
  const std::string& v = get(key);
  long long out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an integer");
  return out;
}

long long KeyValue::get_int_or(const std::string& key, long long fallback) const {
  return has(key) ? get_int(key) : fallback;
}

std::uint64_t KeyValue::get_u64(const std::string& key) const {
  const std::string& v = get(key);
  std::uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc() || ptr != v.data() + v.size()) bad_value(key, v, "an unsigned integer");
  return out;
}

void KeyValue::write(std::ostream& out) const {
  for (const auto& [k, v] : entries_) out << k << " = " << v << '\n';
}

void KeyValue::save(const std::filesystem::path& path, const std::string& header) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  if (!header.empty()) {
    std::istringstream lines(header);
    std::string line;
    while (std::getline(lines, line)) out << "# " << line << '\n';
  }
  write(out);
  if (!out) throw std::runtime_error("error writing " + path.string());
}

}  // namespace tcm::kv
