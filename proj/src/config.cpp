#include "lodom/config.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <sstream>

#include "lodom/errors.hpp"

namespace lodom {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string strip_comment(const std::string& s) {
  bool in_string = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') in_string = !in_string;
    if (s[i] == '#' && !in_string) return s.substr(0, i);
  }
  return s;
}

double parse_number(const std::string& text, std::size_t line) {
  std::size_t used = 0;
  double v;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw ParseError("expected a number, got '" + text + "'", line);
  }
  if (used != text.size()) throw ParseError("trailing characters in '" + text + "'", line);
  return v;
}

bool valid_key(const std::string& k) {
  if (k.empty()) return false;
  for (char c : k) {
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_' && c != '-') return false;
  }
  return true;
}

ConfigTable::Value parse_value(const std::string& text, std::size_t line) {
  if (text.empty()) throw ParseError("missing value", line);
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') {
      throw ParseError("unterminated string", line);
    }
    return text.substr(1, text.size() - 2);
  }
  if (text == "true") return true;
  if (text == "false") return false;
  if (text.front() == '[') {
    if (text.back() != ']') throw ParseError("unterminated array", line);
    std::vector<double> values;
    const std::string body = trim(text.substr(1, text.size() - 2));
    if (body.empty()) return values;
    std::stringstream ss(body);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string t = trim(item);
      if (t.empty()) throw ParseError("empty array element", line);
      values.push_back(parse_number(t, line));
    }
    return values;
  }
  return parse_number(text, line);
}

const char* type_name(const ConfigTable::Value& v) {
  switch (v.index()) {
    case 0: return "number";
    case 1: return "boolean";
    case 2: return "string";
    default: return "array";
  }
}

}  // namespace

void ConfigTable::set(const std::string& key, Value v, std::size_t line) {
  if (entries_.count(key)) throw ParseError("duplicate key '" + key + "'", line);
  entries_[key] = Entry{std::move(v), line};
}

const ConfigTable::Entry& ConfigTable::require(const std::string& key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    const std::string where = name_.empty() ? "top level" : "[" + name_ + "]";
    throw ParseError("missing key '" + key + "' in " + where, line_);
  }
  return it->second;
}

template <typename T>
static const T& expect(const ConfigTable::Entry& e, const std::string& key,
                       const char* wanted) {
  if (const T* v = std::get_if<T>(&e.value)) return *v;
  throw ParseError("key '" + key + "' should be a " + wanted + ", not a " +
                       type_name(e.value),
                   e.line);
}

double ConfigTable::number(const std::string& key) const {
  return expect<double>(require(key), key, "number");
}

double ConfigTable::number(const std::string& key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

long ConfigTable::integer(const std::string& key) const {
  const Entry& e = require(key);
  const double v = expect<double>(e, key, "number");
  if (std::floor(v) != v) throw ParseError("key '" + key + "' should be an integer", e.line);
  return static_cast<long>(v);
}

long ConfigTable::integer(const std::string& key, long fallback) const {
  return has(key) ? integer(key) : fallback;
}

bool ConfigTable::boolean(const std::string& key, bool fallback) const {
  return has(key) ? expect<bool>(require(key), key, "boolean") : fallback;
}

std::string ConfigTable::string(const std::string& key) const {
  return expect<std::string>(require(key), key, "string");
}

std::string ConfigTable::string(const std::string& key,
                                const std::string& fallback) const {
  return has(key) ? string(key) : fallback;
}

std::optional<std::string> ConfigTable::optional_string(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return string(key);
}

std::optional<double> ConfigTable::optional_number(const std::string& key) const {
  if (!has(key)) return std::nullopt;
  return number(key);
}

std::vector<double> ConfigTable::numbers(const std::string& key) const {
  return expect<std::vector<double>>(require(key), key, "array");
}

std::vector<double> ConfigTable::numbers(const std::string& key,
                                         std::vector<double> fallback) const {
  return has(key) ? numbers(key) : fallback;
}

Vec3 ConfigTable::vec3(const std::string& key) const {
  const Entry& e = require(key);
  const auto& v = expect<std::vector<double>>(e, key, "array");
  if (v.size() != 3) throw ParseError("key '" + key + "' needs 3 numbers", e.line);
  return {v[0], v[1], v[2]};
}

ConfigDocument ConfigDocument::parse(std::istream& in) {
  ConfigDocument doc;
  doc.tables_.emplace_back("", 0, false);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      const bool array = line.rfind("[[", 0) == 0;
      const std::size_t open = array ? 2 : 1;
      if (line.size() < 2 * open + 1 || line.substr(line.size() - open) != std::string(open, ']')) {
        throw ParseError("malformed table header", line_no);
      }
      const std::string name = trim(line.substr(open, line.size() - 2 * open));
      if (!valid_key(name)) throw ParseError("bad table name '" + name + "'", line_no);
      if (!array) {
        for (const ConfigTable& t : doc.tables_) {
          if (!t.array_entry() && t.name() == name) {
            throw ParseError("duplicate table [" + name + "]", line_no);
          }
        }
      }
      doc.tables_.emplace_back(name, line_no, array);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = trim(line.substr(0, eq));
    if (!valid_key(key)) throw ParseError("bad key '" + key + "'", line_no);
    doc.tables_.back().set(key, parse_value(trim(line.substr(eq + 1)), line_no), line_no);
  }
  doc.line_count_ = line_no;
  return doc;
}

ConfigDocument ConfigDocument::parse_string(const std::string& text) {
  std::istringstream in(text);
  return parse(in);
}

ConfigDocument ConfigDocument::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  return parse(in);
}

const ConfigTable* ConfigDocument::table(const std::string& name) const {
  for (const ConfigTable& t : tables_) {
    if (!t.array_entry() && t.name() == name) return &t;
  }
  return nullptr;
}

std::vector<const ConfigTable*> ConfigDocument::tables(const std::string& name) const {
  std::vector<const ConfigTable*> out;
  for (const ConfigTable& t : tables_) {
    if (t.name() == name) out.push_back(&t);
  }
  return out;
}

}  // namespace lodom
