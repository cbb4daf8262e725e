#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "lodom/geom.hpp"

namespace lodom {

// A small TOML dialect shared by pipeline and scene files:
//   # comment
//   [section]            plain table
//   [[name]]             one entry of an array of tables
//   key = 1.5 | 42 | true | "text" | [1, 2, 3]
class ConfigTable {
 public:
  using Value = std::variant<double, bool, std::string, std::vector<double>>;
  struct Entry {
    Value value;
    std::size_t line = 0;
  };

  ConfigTable() = default;
  ConfigTable(std::string name, std::size_t line, bool array_entry)
      : name_(std::move(name)), line_(line), array_entry_(array_entry) {}

  const std::string& name() const { return name_; }
  std::size_t line() const { return line_; }
  bool array_entry() const { return array_entry_; }
  bool has(const std::string& key) const { return entries_.count(key) != 0; }
  const std::map<std::string, Entry>& entries() const { return entries_; }

  void set(const std::string& key, Value v, std::size_t line);

  // Typed getters throw ParseError (with the line of the offending entry)
  // on a type mismatch, and on a missing key when no fallback is given.
  double number(const std::string& key) const;
  double number(const std::string& key, double fallback) const;
  long integer(const std::string& key) const;
  long integer(const std::string& key, long fallback) const;
  bool boolean(const std::string& key, bool fallback) const;
  std::string string(const std::string& key) const;
  std::string string(const std::string& key, const std::string& fallback) const;
  std::optional<std::string> optional_string(const std::string& key) const;
  std::optional<double> optional_number(const std::string& key) const;
  std::vector<double> numbers(const std::string& key) const;
  std::vector<double> numbers(const std::string& key,
                              std::vector<double> fallback) const;
  Vec3 vec3(const std::string& key) const;

 private:
  const Entry& require(const std::string& key) const;

  std::string name_;
  std::size_t line_ = 0;
  bool array_entry_ = false;
  std::map<std::string, Entry> entries_;
};

class ConfigDocument {
 public:
  static ConfigDocument parse(std::istream& in);
  static ConfigDocument parse_string(const std::string& text);
  static ConfigDocument parse_file(const std::filesystem::path& path);

  // Keys that appear before the first header.
  const ConfigTable& root() const { return tables_.front(); }
  // First plain table with this name, or nullptr.
  const ConfigTable* table(const std::string& name) const;
  // Every table (plain or array entry) with this name, in file order.
  std::vector<const ConfigTable*> tables(const std::string& name) const;
  const std::vector<ConfigTable>& all() const { return tables_; }
  std::size_t line_count() const { return line_count_; }

 private:
  std::vector<ConfigTable> tables_;
  std::size_t line_count_ = 0;
};

}  // namespace lodom
