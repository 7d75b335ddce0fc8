#include "crf/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include <fmt/format.h>
#include <fmt/ranges.h>

namespace crf {

ConfigError::ConfigError(std::size_t line, const std::string& message)
    : Error(line > 0 ? fmt::format("line {}: {}", line, message) : message), line_(line) {}

std::string_view to_string(RunMode mode) {
  switch (mode) {
    case RunMode::Crf:
      return "CRF";
    case RunMode::Dcrf:
      return "DCRF";
    case RunMode::BothCompare:
      return "BOTH_COMPARE";
  }
  return "CRF";
}

RunMode run_mode_from_string(std::string_view name) {
  if (name == "CRF") return RunMode::Crf;
  if (name == "DCRF") return RunMode::Dcrf;
  if (name == "BOTH_COMPARE") return RunMode::BothCompare;
  throw InvalidArgument(fmt::format("unknown mode '{}' (expected CRF, DCRF or BOTH_COMPARE)", name));
}

namespace {

struct Value {
  using Scalar = std::variant<double, bool, std::string>;
  std::vector<Scalar> items;
  bool is_array = false;
  bool integral = false;  // every numeric item was written without '.', 'e' or 'inf'
  std::size_t line = 0;
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

// Strips a trailing comment that is not inside a string.
std::string_view strip_comment(std::string_view s) {
  bool quoted = false;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i] == '"') quoted = !quoted;
    if (s[i] == '#' && !quoted) return s.substr(0, i);
  }
  return s;
}

Value::Scalar parse_scalar(std::string_view text, std::size_t line, bool& integral) {
  text = trim(text);
  if (text.empty()) throw ConfigError(line, "missing value");
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"') {
      throw ConfigError(line, "unterminated string");
    }
    const std::string_view inner = text.substr(1, text.size() - 2);
    if (inner.find('"') != std::string_view::npos || inner.find('\\') != std::string_view::npos) {
      throw ConfigError(line, "escapes and embedded quotes are not supported");
    }
    return std::string(inner);
  }
  if (text == "true") return true;
  if (text == "false") return false;
  std::string digits(text);
  digits.erase(std::remove(digits.begin(), digits.end(), '_'), digits.end());
  double value = 0.0;
  const char* begin = digits.data();
  const char* end = digits.data() + digits.size();
  if (*begin == '+') ++begin;
  const auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || ptr != end) {
    throw ConfigError(line, fmt::format("cannot parse value '{}'", text));
  }
  integral = integral && digits.find_first_of(".eEiInN") == std::string::npos;
  return value;
}

Value parse_value(std::string_view text, std::size_t line) {
  Value v;
  v.line = line;
  v.integral = true;
  text = trim(text);
  if (!text.empty() && text.front() == '[') {
    if (text.back() != ']') throw ConfigError(line, "unterminated array");
    v.is_array = true;
    const std::string_view inner = trim(text.substr(1, text.size() - 2));
    if (inner.empty()) return v;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i <= inner.size(); ++i) {
      if (i < inner.size() && inner[i] == '"') quoted = !quoted;
      if (i == inner.size() || (inner[i] == ',' && !quoted)) {
        const std::string_view item = trim(inner.substr(start, i - start));
        if (item.empty()) {
          if (i == inner.size() && !v.items.empty()) break;  // trailing comma
          throw ConfigError(line, "empty array element");
        }
        v.items.push_back(parse_scalar(item, line, v.integral));
        start = i + 1;
      }
    }
    return v;
  }
  v.items.push_back(parse_scalar(text, line, v.integral));
  return v;
}

class Reader {
 public:
  Reader(const std::string& key, const Value& value) : key_(key), value_(value) {}

  double number() const {
    const auto& item = scalar();
    if (!std::holds_alternative<double>(item)) fail("a number");
    return std::get<double>(item);
  }
  long long integer() const {
    const double v = number();
    if (!value_.integral || v != std::floor(v) || std::abs(v) > 9.0e15) fail("an integer");
    return static_cast<long long>(v);
  }
  std::uint64_t unsigned_integer() const {
    const auto& item = scalar();
    if (!std::holds_alternative<double>(item)) fail("a nonnegative integer");
    const long long v = integer();
    if (v < 0) fail("a nonnegative integer");
    return static_cast<std::uint64_t>(v);
  }
  bool boolean() const {
    const auto& item = scalar();
    if (!std::holds_alternative<bool>(item)) fail("true or false");
    return std::get<bool>(item);
  }
  std::string string() const {
    const auto& item = scalar();
    if (!std::holds_alternative<std::string>(item)) fail("a quoted string");
    return std::get<std::string>(item);
  }
  std::vector<std::size_t> size_list() const {
    if (!value_.is_array) fail("an array of integers");
    std::vector<std::size_t> out;
    for (const auto& item : value_.items) {
      if (!std::holds_alternative<double>(item) || !value_.integral) fail("an array of integers");
      const double v = std::get<double>(item);
      if (v < 0.0 || v != std::floor(v)) fail("an array of nonnegative integers");
      out.push_back(static_cast<std::size_t>(v));
    }
    return out;
  }
  std::vector<std::string> string_list() const {
    if (!value_.is_array) fail("an array of strings");
    std::vector<std::string> out;
    for (const auto& item : value_.items) {
      if (!std::holds_alternative<std::string>(item)) fail("an array of strings");
      out.push_back(std::get<std::string>(item));
    }
    return out;
  }
  std::size_t line() const { return value_.line; }

 private:
  const Value::Scalar& scalar() const {
    if (value_.is_array) fail("a single value");
    return value_.items.front();
  }
  [[noreturn]] void fail(const char* what) const {
    throw ConfigError(value_.line, fmt::format("{} must be {}", key_, what));
  }

  const std::string& key_;
  const Value& value_;
};

using Setter = std::function<void(FlowConfig&, const Reader&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table{
      {"geometry.family",
       [](FlowConfig& c, const Reader& r) {
         try {
           c.family = family_from_string(r.string());
         } catch (const InvalidArgument& e) {
           throw ConfigError(r.line(), e.what());
         }
       }},
      {"geometry.m", [](FlowConfig& c, const Reader& r) { c.m = static_cast<int>(r.integer()); }},
      {"geometry.kappa",
       [](FlowConfig& c, const Reader& r) { c.kappa = static_cast<int>(r.integer()); }},
      {"geometry.c", [](FlowConfig& c, const Reader& r) { c.c = r.number(); }},
      {"geometry.allow_positive_c",
       [](FlowConfig& c, const Reader& r) { c.allow_positive_c = r.boolean(); }},
      {"grid.s_max", [](FlowConfig& c, const Reader& r) { c.s_max = r.number(); }},
      {"grid.L", [](FlowConfig& c, const Reader& r) { c.length = r.number(); }},
      {"grid.n_points",
       [](FlowConfig& c, const Reader& r) {
         c.n_points = static_cast<std::size_t>(r.unsigned_integer());
       }},
      {"time.t_end", [](FlowConfig& c, const Reader& r) { c.t_end = r.number(); }},
      {"time.cfl_sigma", [](FlowConfig& c, const Reader& r) { c.cfl_sigma = r.number(); }},
      {"time.snapshot_interval",
       [](FlowConfig& c, const Reader& r) { c.snapshot_interval = r.number(); }},
      {"flow.mode",
       [](FlowConfig& c, const Reader& r) {
         try {
           c.mode = run_mode_from_string(r.string());
         } catch (const InvalidArgument& e) {
           throw ConfigError(r.line(), e.what());
         }
       }},
      {"flow.normalize", [](FlowConfig& c, const Reader& r) { c.normalize = r.boolean(); }},
      {"perturbation.amplitude",
       [](FlowConfig& c, const Reader& r) { c.perturbation.amplitude = r.number(); }},
      {"perturbation.profile",
       [](FlowConfig& c, const Reader& r) {
         try {
           c.perturbation.profile = profile_from_string(r.string());
         } catch (const InvalidArgument& e) {
           throw ConfigError(r.line(), e.what());
         }
       }},
      {"perturbation.decay_rate",
       [](FlowConfig& c, const Reader& r) { c.perturbation.decay_rate = r.number(); }},
      {"perturbation.lapse_ratio",
       [](FlowConfig& c, const Reader& r) { c.perturbation.lapse_ratio = r.number(); }},
      {"perturbation.seed",
       [](FlowConfig& c, const Reader& r) { c.perturbation.seed = r.unsigned_integer(); }},
      {"tolerances.elliptic", [](FlowConfig& c, const Reader& r) { c.elliptic = r.number(); }},
      {"tolerances.newton", [](FlowConfig& c, const Reader& r) { c.newton = r.number(); }},
      {"tolerances.drift_band",
       [](FlowConfig& c, const Reader& r) { c.drift_band = r.number(); }},
      {"tolerances.evolution", [](FlowConfig& c, const Reader& r) { c.evolution = r.number(); }},
      {"tolerances.gauge", [](FlowConfig& c, const Reader& r) { c.gauge = r.number(); }},
      {"tolerances.alpha", [](FlowConfig& c, const Reader& r) { c.alpha = r.number(); }},
      {"output.directory", [](FlowConfig& c, const Reader& r) { c.directory = r.string(); }},
      {"output.formats",
       [](FlowConfig& c, const Reader& r) {
         c.write_json = c.write_csv = false;
         for (const std::string& f : r.string_list()) {
           if (f == "json") {
             c.write_json = true;
           } else if (f == "csv") {
             c.write_csv = true;
           } else {
             throw ConfigError(r.line(), fmt::format("unknown output format '{}'", f));
           }
         }
       }},
      {"output.snapshots",
       [](FlowConfig& c, const Reader& r) { c.write_snapshots = r.boolean(); }},
      {"scenario.ladder", [](FlowConfig& c, const Reader& r) { c.ladder = r.size_list(); }},
  };
  return table;
}

const std::set<std::string>& sections() {
  static const std::set<std::string> names{"geometry",     "grid",       "time",   "flow",
                                           "perturbation", "tolerances", "output", "scenario"};
  return names;
}

[[noreturn]] void violated(const std::string& rule) { throw ConfigError(0, rule); }

std::string number(double v) { return fmt::format("{}", v); }

}  // namespace

FlowConfig parse_config(std::string_view text) {
  FlowConfig config;
  std::string section;
  std::set<std::string> seen;
  std::map<std::string, std::size_t> key_lines;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    const std::string_view raw = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    const std::string_view line = trim(strip_comment(raw));
    if (line.empty()) {
      if (eol == text.size()) break;
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(line_no, "malformed section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (!sections().count(section)) {
        throw ConfigError(line_no, fmt::format("unknown section [{}]", section));
      }
    } else {
      const auto eq = line.find('=');
      if (eq == std::string_view::npos) {
        throw ConfigError(line_no, "expected 'key = value' or '[section]'");
      }
      const std::string key(trim(line.substr(0, eq)));
      if (key.empty()) throw ConfigError(line_no, "missing key");
      const std::string full = key.find('.') == std::string::npos && !section.empty()
                                   ? section + "." + key
                                   : key;
      const auto it = setters().find(full);
      if (it == setters().end()) {
        throw ConfigError(line_no, fmt::format("unknown key '{}'", full));
      }
      if (!seen.insert(full).second) {
        throw ConfigError(line_no, fmt::format("duplicate key '{}'", full));
      }
      key_lines[full] = line_no;
      const Value value = parse_value(line.substr(eq + 1), line_no);
      it->second(config, Reader(full, value));
    }
    if (eol == text.size()) break;
  }

  // Keys that only apply to one family.
  const bool closed = config.family == Family::Closed;
  if (closed && !seen.count("flow.normalize")) config.normalize = false;
  for (const auto& [key, family_ok] :
       {std::pair{"geometry.c", closed}, std::pair{"grid.L", closed},
        std::pair{"grid.s_max", !closed}, std::pair{"geometry.allow_positive_c", closed}}) {
    if (seen.count(key) && !family_ok) {
      throw ConfigError(key_lines[key], fmt::format("{} does not apply to family {}", key,
                                                    to_string(config.family)));
    }
  }
  validate_config(config);
  return config;
}

FlowConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(0, fmt::format("cannot open config file '{}'", path));
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

void validate_config(const FlowConfig& c) {
  if (c.m < 2) violated(fmt::format("geometry.m = {} violates m >= 2", c.m));
  if (c.kappa != 0 && c.kappa != 1) {
    violated(fmt::format("geometry.kappa = {} violates kappa in {{0, 1}}", c.kappa));
  }
  if (c.family == Family::AhBall) {
    if (c.kappa != 1) violated("AH_BALL requires kappa = 1");
    if (!(c.s_max >= 5.0)) {
      violated(fmt::format("grid.s_max = {} violates s_max >= 5 (decay windows need 4 units)",
                           c.s_max));
    }
  } else {
    if (!(c.length > 0.0)) violated(fmt::format("grid.L = {} violates L > 0", c.length));
    if (!std::isfinite(c.c)) violated("geometry.c must be finite");
    if (c.c >= 0.0 && !c.allow_positive_c) {
      violated(fmt::format(
          "geometry.c = {} violates the spectral-collision rule: CLOSED requires c < 0, "
          "since (n-1) Delta + 2nc can be singular for c >= 0 "
          "(set geometry.allow_positive_c = true to override)",
          c.c));
    }
  }
  auto check_points = [](std::size_t n, const char* key) {
    if (n < 9) violated(fmt::format("{} = {} violates n_points >= 9", key, n));
  };
  check_points(c.n_points, "grid.n_points");
  for (std::size_t n : c.ladder) check_points(n, "scenario.ladder entry");
  if (c.ladder.size() == 1) violated("scenario.ladder needs at least two grids");
  if (!std::is_sorted(c.ladder.begin(), c.ladder.end()) ||
      std::adjacent_find(c.ladder.begin(), c.ladder.end()) != c.ladder.end()) {
    violated("scenario.ladder must be strictly increasing");
  }
  if (!(c.t_end >= 0.0) || !std::isfinite(c.t_end)) {
    violated(fmt::format("time.t_end = {} violates t_end >= 0", c.t_end));
  }
  if (!(c.cfl_sigma > 0.0)) {
    violated(fmt::format("time.cfl_sigma = {} violates cfl_sigma > 0", c.cfl_sigma));
  }
  if (!(c.snapshot_interval > 0.0)) {
    violated(fmt::format("time.snapshot_interval = {} violates snapshot_interval > 0",
                         c.snapshot_interval));
  }
  const Perturbation& p = c.perturbation;
  if (!(p.amplitude >= 0.0 && p.amplitude < 0.5)) {
    violated(fmt::format("perturbation.amplitude = {} violates 0 <= amplitude < 0.5",
                         p.amplitude));
  }
  if (!(p.decay_rate > 0.0)) {
    violated(fmt::format("perturbation.decay_rate = {} violates decay_rate > 0", p.decay_rate));
  }
  if (!std::isfinite(p.lapse_ratio)) violated("perturbation.lapse_ratio must be finite");
  if (c.normalize && c.family != Family::AhBall) {
    violated("flow.normalize applies to AH_BALL only (set flow.normalize = false)");
  }
  for (const auto& [name, v] : {std::pair{"tolerances.elliptic", c.elliptic},
                                std::pair{"tolerances.newton", c.newton},
                                std::pair{"tolerances.drift_band", c.drift_band},
                                std::pair{"tolerances.evolution", c.evolution},
                                std::pair{"tolerances.gauge", c.gauge},
                                std::pair{"tolerances.alpha", c.alpha}}) {
    if (!(v > 0.0) || !std::isfinite(v)) violated(fmt::format("{} must be positive", name));
  }
  if (c.directory.empty()) violated("output.directory must not be empty");
}

std::string echo_config(const FlowConfig& c) {
  const bool closed = c.family == Family::Closed;
  std::string out;
  auto line = [&](std::string_view key, const std::string& value) {
    out += fmt::format("{} = {}\n", key, value);
  };
  auto quoted = [](std::string_view s) { return fmt::format("\"{}\"", s); };
  auto flag = [](bool b) { return std::string(b ? "true" : "false"); };

  out += "[geometry]\n";
  line("family", quoted(to_string(c.family)));
  line("m", std::to_string(c.m));
  line("kappa", std::to_string(c.kappa));
  if (closed) {
    line("c", number(c.c));
    line("allow_positive_c", flag(c.allow_positive_c));
  }
  out += "\n[grid]\n";
  if (closed) {
    line("L", number(c.length));
  } else {
    line("s_max", number(c.s_max));
  }
  line("n_points", std::to_string(c.n_points));
  out += "\n[time]\n";
  line("t_end", number(c.t_end));
  line("cfl_sigma", number(c.cfl_sigma));
  line("snapshot_interval", number(c.snapshot_interval));
  out += "\n[flow]\n";
  line("mode", quoted(to_string(c.mode)));
  line("normalize", flag(c.normalize));
  out += "\n[perturbation]\n";
  line("amplitude", number(c.perturbation.amplitude));
  line("profile", quoted(to_string(c.perturbation.profile)));
  line("decay_rate", number(c.perturbation.decay_rate));
  line("lapse_ratio", number(c.perturbation.lapse_ratio));
  line("seed", std::to_string(c.perturbation.seed));
  out += "\n[tolerances]\n";
  line("elliptic", number(c.elliptic));
  line("newton", number(c.newton));
  line("drift_band", number(c.drift_band));
  line("evolution", number(c.evolution));
  line("gauge", number(c.gauge));
  line("alpha", number(c.alpha));
  out += "\n[output]\n";
  line("directory", quoted(c.directory));
  std::vector<std::string> formats;
  if (c.write_json) formats.push_back(quoted("json"));
  if (c.write_csv) formats.push_back(quoted("csv"));
  line("formats", fmt::format("[{}]", fmt::join(formats, ", ")));
  line("snapshots", flag(c.write_snapshots));
  out += "\n[scenario]\n";
  line("ladder", fmt::format("[{}]", fmt::join(c.ladder, ", ")));
  return out;
}

}  // namespace crf
