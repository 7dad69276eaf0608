#pragma once

// Flat "key = value" text files. Lines starting with '#' are comments;
// keys are unique and kept in sorted order.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

namespace tcm::kv {

class KeyValue {
 public:
  /// Throws std::invalid_argument with "source:line: message" on bad input.
  static KeyValue parse(std::istream& in, const std::string& source = "<input>");
  static KeyValue load(const std::filesystem::path& path);

  void set(const std::string& key, const std::string& value);
  /// Applies a "key=value" override.
  void apply_override(const std::string& assignment);

  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::string& get(const std::string& key) const;
  std::string get_or(const std::string& key, const std::string& fallback) const;
  double get_double(const std::string& key) const;
  double get_double_or(const std::string& key, double fallback) const;
  long long get_int(const std::string& key) const;
  long long get_int_or(const std::string& key, long long fallback) const;
  std::uint64_t get_u64(const std::string& key) const;

  const std::map<std::string, std::string>& entries() const { return entries_; }

  void write(std::ostream& out) const;
  void save(const std::filesystem::path& path, const std::string& header = {}) const;

 private:
  std::map<std::string, std::string> entries_;
};

}  // namespace tcm::kv
