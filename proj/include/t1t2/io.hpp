#pragma once

#include <array>
#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "t1t2/censoring.hpp"
#include "t1t2/error.hpp"

namespace t1t2::io {

// March precipitation (inches), Minneapolis/St. Paul, 30 successive years,
// in the published order.
inline constexpr std::array<double, 30> precipitation{
    0.77, 1.74, 0.81, 1.20, 1.95, 1.20, 0.47, 1.43, 3.37, 2.20,
    3.00, 3.09, 1.51, 2.10, 0.52, 1.62, 1.31, 0.32, 0.59, 0.81,
    2.81, 1.87, 1.18, 1.35, 4.75, 2.48, 0.96, 1.89, 0.90, 2.05};

inline constexpr std::string_view builtin_prefix = "builtin:";

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (s.empty()) return false;
  if (s.front() == '+') s.remove_prefix(1);
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, out);
  return ec == std::errc() && ptr == end;
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

// One numeric value per line, or comma-delimited rows with `column`
// (0-based) selected. Blank lines and '#' comments are skipped. A
// non-numeric first data line is taken as a header; any later one is an
// error naming the line.
inline std::vector<double> parse_numeric_column(std::istream& in, std::size_t column = 0,
                                                const std::string& source = "input") {
  std::vector<double> out;
  std::string line;
  std::size_t lineno = 0;
  bool seen_data_line = false;
  while (std::getline(in, line)) {
    ++lineno;
    auto t = trim(line);
    if (lineno == 1 && t.starts_with("\xEF\xBB\xBF")) t.remove_prefix(3);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split(t, ',');
    if (column >= fields.size()) {
      throw data_error(source + ":" + std::to_string(lineno) + ": no column " + std::to_string(column));
    }
    double v = 0.0;
    if (!parse_double(fields[column], v)) {
      if (!seen_data_line) {
        seen_data_line = true;  // header
        continue;
      }
      throw data_error(source + ":" + std::to_string(lineno) + ": cannot parse '" +
                       std::string(trim(fields[column])) + "' as a number");
    }
    if (!(v > 0.0) || !std::isfinite(v)) {
      throw data_error(source + ":" + std::to_string(lineno) + ": lifetime must be positive, got " +
                       std::string(trim(fields[column])));
    }
    seen_data_line = true;
    out.push_back(v);
  }
  if (out.empty()) throw data_error(source + ": no data");
  return out;
}

// Reads a data file, or a built-in dataset addressed as builtin:<name>.
inline std::vector<double> load_data(const std::string& spec, std::size_t column = 0) {
  if (spec.starts_with(builtin_prefix)) {
    const auto name = spec.substr(builtin_prefix.size());
    if (name == "precipitation") return {precipitation.begin(), precipitation.end()};
    throw data_error("unknown built-in dataset '" + name + "'");
  }
  std::ifstream f(spec);
  if (!f) throw data_error("cannot open " + spec);
  return parse_numeric_column(f, column, spec);
}

// Shortest decimal that round-trips.
inline std::string format_double(double v) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc()) throw std::runtime_error("format_double failed");
  return std::string(buf.data(), ptr);
}

// ---------------------------------------------------------------------------
// Flat "key = value" records. Keys are kept in insertion order on output.

class KeyValueRecord {
public:
  void set(std::string key, std::string value) {
    for (auto& [k, v] : entries_) {
      if (k == key) {
        v = std::move(value);
        return;
      }
    }
    entries_.emplace_back(std::move(key), std::move(value));
  }
  void set(std::string key, double value) { set(std::move(key), format_double(value)); }
  void set(std::string key, int value) { set(std::move(key), std::to_string(value)); }
  void set(std::string key, std::size_t value) { set(std::move(key), std::to_string(value)); }

  bool has(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
      if (k == key) return true;
    }
    return false;
  }

  const std::string& get(std::string_view key) const {
    for (const auto& [k, v] : entries_) {
      if (k == key) return v;
    }
    throw data_error("missing key '" + std::string(key) + "'");
  }

  double get_double(std::string_view key) const {
    double v = 0.0;
    if (!parse_double(get(key), v)) throw data_error("key '" + std::string(key) + "' is not a number");
    return v;
  }

  long long get_int(std::string_view key) const {
    const auto& s = get(key);
    long long v = 0;
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) {
      throw data_error("key '" + std::string(key) + "' is not an integer");
    }
    return v;
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const noexcept { return entries_; }

  std::string str() const {
    std::string out;
    for (const auto& [k, v] : entries_) out += k + " = " + v + "\n";
    return out;
  }

  static KeyValueRecord parse(std::istream& in, const std::string& source = "record") {
    KeyValueRecord rec;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
      ++lineno;
      const auto t = trim(line);
      if (t.empty() || t.front() == '#') continue;
      const auto eq = t.find('=');
      if (eq == std::string_view::npos) {
        throw data_error(source + ":" + std::to_string(lineno) + ": expected 'key = value'");
      }
      const auto key = std::string(trim(t.substr(0, eq)));
      if (key.empty()) throw data_error(source + ":" + std::to_string(lineno) + ": empty key");
      if (rec.has(key)) throw data_error(source + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
      rec.entries_.emplace_back(key, std::string(trim(t.substr(eq + 1))));
    }
    return rec;
  }

  static KeyValueRecord load(const std::filesystem::path& p) {
    std::ifstream f(p);
    if (!f) throw data_error("cannot open " + p.string());
    return parse(f, p.string());
  }

private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

// 64-bit FNV-1a, used for config fingerprints in reports.
inline std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

inline std::string hex64(std::uint64_t v) {
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << v;
  return os.str();
}

inline std::string join_doubles(const std::vector<double>& v, char sep = ',') {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) out += sep;
    out += format_double(v[i]);
  }
  return out;
}

inline std::vector<double> parse_double_list(std::string_view s, const std::string& what) {
  std::vector<double> out;
  if (trim(s).empty()) return out;
  for (auto f : split(s, ',')) {
    double v = 0.0;
    if (!parse_double(f, v)) throw data_error(what + ": cannot parse '" + std::string(trim(f)) + "'");
    out.push_back(v);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Censored-sample record.

inline constexpr std::string_view censored_format = "t1t2-censored-sample/1";

inline KeyValueRecord to_record(const CensoredSample& s) {
  KeyValueRecord rec;
  rec.set("format", std::string(censored_format));
  rec.set("n", s.n());
  rec.set("m", s.scheme().m);
  rec.set("S", s.scheme().S);
  rec.set("case", std::string(to_string(s.kind())));
  rec.set("r", s.r());
  rec.set("U", s.U());
  rec.set("failures", join_doubles({s.failures().begin(), s.failures().end()}));
  return rec;
}

inline CensoredSample censored_from_record(const KeyValueRecord& rec) {
  if (rec.get("format") != censored_format) {
    throw data_error("unsupported censored-sample format '" + rec.get("format") + "'");
  }
  const CensoringScheme scheme(static_cast<int>(rec.get_int("n")), static_cast<int>(rec.get_int("m")),
                               rec.get_double("S"));
  const auto& c = rec.get("case");
  if (c != "I" && c != "II") throw data_error("case must be I or II, got '" + c + "'");
  auto failures = parse_double_list(rec.get("failures"), "failures");
  if (static_cast<long long>(failures.size()) != rec.get_int("r")) {
    throw data_error("failure list length does not match r");
  }
  return CensoredSample::make(scheme, c == "I" ? CensoringCase::I : CensoringCase::II,
                              std::move(failures), rec.get_double("U"));
}

inline void write_text(const std::filesystem::path& p, const std::string& text) {
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

} // namespace t1t2::io
