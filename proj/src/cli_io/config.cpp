#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "pdcqkd/cli_io.hpp"
#include "pdcqkd/error.hpp"

namespace pdcqkd::cli {

namespace {

const std::vector<KeySpec> schema = {
    {"protocol", ValueKind::choice, "efficient_pdc | conventional_pdc | ideal_single_photon",
     {"efficient_pdc", "conventional_pdc", "ideal_single_photon"}},
    {"mu", ValueKind::number_or_optimize, "mean photon-pair number, or `optimize`", {}},
    {"eta_A", ValueKind::number, "trigger detector efficiency", {}},
    {"d_A", ValueKind::number, "trigger dark-count probability per pulse", {}},
    {"alpha", ValueKind::number, "fiber loss [dB/km]", {}},
    {"length_km", ValueKind::number, "fiber length [km]", {}},
    {"eta_B", ValueKind::number, "Bob's detector efficiency", {}},
    {"p_d", ValueKind::number, "background probability per detector per pulse", {}},
    {"e_d", ValueKind::number, "misalignment error probability", {}},
    {"q", ValueKind::number, "protocol (sifting) efficiency, default 0.5", {}},
    {"f_ec", ValueKind::number, "error-correction inefficiency, default 1.22", {}},
    {"distances", ValueKind::number_list, "sweep distances [km], e.g. 0,10,...,200", {}},
    {"mu_min", ValueKind::number, "mu search lower bound", {}},
    {"mu_max", ValueKind::number, "mu search upper bound, default 2", {}},
    {"mu_grid_points", ValueKind::integer, "mu search grid size, default 129", {}},
    {"mu_rel_tol", ValueKind::number, "mu refinement tolerance, default 1e-4", {}},
    {"x_grid_points", ValueKind::integer, "vacuum-fraction grid size, default 4097", {}},
    {"x_rel_tol", ValueKind::number, "vacuum-fraction refinement tolerance, default 1e-12", {}},
    {"threads", ValueKind::integer, "worker threads, 0 = all cores, default 1", {}},
    {"format", ValueKind::choice, "csv | json, default csv", {"csv", "json"}},
    {"precision", ValueKind::integer, "significant digits in CSV output, default 6", {}},
    {"out", ValueKind::text, "output file (stdout when absent)", {}},
    {"seed", ValueKind::integer, "Monte Carlo seed, default 1", {}},
    {"pulses", ValueKind::integer, "Monte Carlo pulse count, default 1000000", {}},
    {"z_threshold", ValueKind::number, "largest accepted |z| in Monte Carlo checks, default 5", {}},
    {"attack.block_fraction", ValueKind::number, "fraction of single-photon pulses Eve blocks, default 1", {}},
    {"attack.match_q_t", ValueKind::boolean, "scale multi-photon forwarding to keep the honest Q_t, default true", {}},
    {"cutoff_min_km", ValueKind::number, "cutoff bracket low end [km], default 0", {}},
    {"cutoff_max_km", ValueKind::number, "cutoff bracket high end [km], default 300", {}},
    {"resolution_km", ValueKind::number, "bisection resolution [km], default 0.1", {}},
};

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

[[noreturn]] void fail(std::string_view origin, const std::string& message) {
  std::string msg;
  msg.append(origin).append(": ").append(message);
  throw ValidationError(msg);
}

bool parse_double(std::string_view text, double& out) {
  text = trim(text);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

bool parse_int(std::string_view text, std::int64_t& out) {
  text = trim(text);
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, out);
  return ec == std::errc() && ptr == end && !text.empty();
}

bool parse_bool(std::string_view text, bool& out) {
  if (text == "true" || text == "1" || text == "yes") return out = true, true;
  if (text == "false" || text == "0" || text == "no") return out = false, true;
  return false;
}

void check_value(const KeySpec& spec, std::string_view value,
                 std::string_view origin) {
  std::string key(spec.name);
  double d = 0.0;
  std::int64_t i = 0;
  bool b = false;
  switch (spec.kind) {
    case ValueKind::number:
      if (!parse_double(value, d) || !std::isfinite(d)) {
        fail(origin, "key '" + key + "' expects a number, got '" + std::string(value) + "'");
      }
      break;
    case ValueKind::number_or_optimize:
      if (value != "optimize" && (!parse_double(value, d) || !std::isfinite(d))) {
        fail(origin, "key '" + key + "' expects a number or 'optimize', got '" +
                         std::string(value) + "'");
      }
      break;
    case ValueKind::integer:
      if (!parse_int(value, i)) {
        fail(origin, "key '" + key + "' expects an integer, got '" + std::string(value) + "'");
      }
      break;
    case ValueKind::number_list:
      parse_number_list(value, origin);
      break;
    case ValueKind::choice:
      if (std::find(spec.choices.begin(), spec.choices.end(), value) ==
          spec.choices.end()) {
        std::string allowed;
        for (auto c : spec.choices) allowed.append(allowed.empty() ? "" : ", ").append(c);
        fail(origin, "key '" + key + "' expects one of {" + allowed + "}, got '" +
                         std::string(value) + "'");
      }
      break;
    case ValueKind::boolean:
      if (!parse_bool(value, b)) {
        fail(origin, "key '" + key + "' expects true or false, got '" + std::string(value) + "'");
      }
      break;
    case ValueKind::text:
      break;
  }
}

}  // namespace

std::span<const KeySpec> config_schema() { return schema; }

const KeySpec* find_key(std::string_view name) {
  for (const auto& k : schema) {
    if (k.name == name) return &k;
  }
  return nullptr;
}

std::vector<double> parse_number_list(std::string_view text, std::string_view origin) {
  std::vector<std::string_view> tokens;
  text = trim(text);
  if (text.empty()) return {};
  for (std::size_t start = 0;;) {
    const auto comma = text.find(',', start);
    tokens.push_back(trim(text.substr(start, comma == std::string_view::npos
                                                 ? std::string_view::npos
                                                 : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }

  std::vector<double> out;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    if (tokens[i] == "...") {
      if (out.size() < 2 || i + 1 >= tokens.size()) {
        fail(origin, "'...' needs two values before it and one after it");
      }
      double stop = 0.0;
      if (!parse_double(tokens[i + 1], stop)) {
        fail(origin, "bad list element '" + std::string(tokens[i + 1]) + "'");
      }
      const double first = out[out.size() - 2];
      const double step = out.back() - first;
      if (!(step > 0.0) || stop < out.back()) {
        fail(origin, "'...' progression must be increasing");
      }
      const double slack = 1e-9 * step;
      const std::size_t base = out.size() - 2;
      // multiply rather than accumulate so 0,0.1,...,1 lands on 1 exactly
      for (std::size_t k = 2;; ++k) {
        const double next = first + step * static_cast<double>(k);
        if (next > stop + slack) break;
        out.push_back(std::abs(next - stop) <= slack ? stop : next);
        if (out.size() - base > 10000000) fail(origin, "progression too long");
      }
      if (out.back() != stop) {
        fail(origin, "'...' progression does not reach " + std::string(tokens[i + 1]));
      }
      ++i;
      continue;
    }
    double v = 0.0;
    if (!parse_double(tokens[i], v) || !std::isfinite(v)) {
      fail(origin, "bad list element '" + std::string(tokens[i]) + "'");
    }
    out.push_back(v);
  }
  return out;
}

void RunConfig::load_text(std::string_view text, std::string_view source_name) {
  std::size_t line_no = 0;
  for (std::size_t start = 0; start <= text.size();) {
    const auto nl = text.find('\n', start);
    std::string_view line = text.substr(
        start, nl == std::string_view::npos ? std::string_view::npos : nl - start);
    start = nl == std::string_view::npos ? text.size() + 1 : nl + 1;
    ++line_no;

    if (const auto hash = line.find('#'); hash != std::string_view::npos) {
      line = line.substr(0, hash);
    }
    line = trim(line);
    if (line.empty()) continue;
    const std::string origin = std::string(source_name) + ":" + std::to_string(line_no);
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) fail(origin, "expected `key = value`");
    set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)), origin);
  }
}

void RunConfig::load_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  load_text(buf.str(), path.string());
}

void RunConfig::set(std::string_view key, std::string_view value, std::string origin) {
  const KeySpec* spec = find_key(key);
  if (!spec) fail(origin, "unknown key '" + std::string(key) + "'");
  value = trim(value);
  check_value(*spec, value, origin);
  entries_.insert_or_assign(std::string(key), ConfigEntry{std::string(value), std::move(origin)});
}

bool RunConfig::has(std::string_view key) const { return entries_.find(key) != entries_.end(); }

const ConfigEntry& RunConfig::entry(std::string_view key) const {
  auto it = entries_.find(key);
  if (it == entries_.end()) {
    throw ValidationError("missing required key '" + std::string(key) + "'");
  }
  return it->second;
}

double RunConfig::number(std::string_view key) const {
  const ConfigEntry& e = entry(key);
  double v = 0.0;
  if (!parse_double(e.value, v)) {
    fail(e.origin, "key '" + std::string(key) + "' is not a number");
  }
  return v;
}

double RunConfig::number_or(std::string_view key, double fallback) const {
  return has(key) ? number(key) : fallback;
}

std::int64_t RunConfig::integer_or(std::string_view key, std::int64_t fallback) const {
  if (!has(key)) return fallback;
  const ConfigEntry& e = entry(key);
  std::int64_t v = 0;
  if (!parse_int(e.value, v)) fail(e.origin, "key '" + std::string(key) + "' is not an integer");
  return v;
}

std::uint64_t RunConfig::unsigned_or(std::string_view key, std::uint64_t fallback) const {
  if (!has(key)) return fallback;
  const std::int64_t v = integer_or(key, 0);
  if (v < 0) fail(entry(key).origin, "key '" + std::string(key) + "' must be >= 0");
  return static_cast<std::uint64_t>(v);
}

std::vector<double> RunConfig::numbers(std::string_view key) const {
  const ConfigEntry& e = entry(key);
  return parse_number_list(e.value, e.origin);
}

std::string RunConfig::text_or(std::string_view key, std::string fallback) const {
  return has(key) ? entry(key).value : fallback;
}

bool RunConfig::boolean_or(std::string_view key, bool fallback) const {
  if (!has(key)) return fallback;
  bool b = false;
  parse_bool(entry(key).value, b);
  return b;
}

bool RunConfig::is_optimize(std::string_view key) const {
  return has(key) && entry(key).value == "optimize";
}

bool operator==(const RunConfig& a, const RunConfig& b) {
  return std::equal(a.entries_.begin(), a.entries_.end(), b.entries_.begin(),
                    b.entries_.end(), [](const auto& x, const auto& y) {
                      return x.first == y.first && x.second.value == y.second.value;
                    });
}

nlohmann::json config_to_json(const RunConfig& config) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [key, e] : config.entries()) j[key] = e.value;
  return j;
}

RunConfig config_from_json(const nlohmann::json& j) {
  RunConfig config;
  for (const auto& [key, value] : j.items()) {
    config.set(key, value.get<std::string>(), "json:" + key);
  }
  return config;
}

}  // namespace pdcqkd::cli
