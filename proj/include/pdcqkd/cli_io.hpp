#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pdcqkd/montecarlo.hpp"
#include "pdcqkd/optimizer_sweep.hpp"

namespace pdcqkd::cli {

enum class ValueKind {
  number,
  number_or_optimize,
  integer,
  number_list,
  choice,
  boolean,
  text,
};

struct KeySpec {
  std::string_view name;
  ValueKind kind;
  std::string_view help;
  std::vector<std::string_view> choices;  ///< for ValueKind::choice
};

/// Every key a configuration may contain.
std::span<const KeySpec> config_schema();
const KeySpec* find_key(std::string_view name);

struct ConfigEntry {
  std::string value;   ///< trimmed text as written
  std::string origin;  ///< "file:line" or the overriding flag
};

/// Flat `key = value` configuration. `#` starts a comment, lists are
/// comma-separated and may use `a,b,...,c` for an arithmetic progression.
/// Every key and value is checked against config_schema() on entry; errors
/// carry the origin.
class RunConfig {
 public:
  void load_text(std::string_view text, std::string_view source_name);
  void load_file(const std::filesystem::path& path);
  /// Later calls override earlier ones (command-line flags after files).
  void set(std::string_view key, std::string_view value, std::string origin);

  bool has(std::string_view key) const;
  const ConfigEntry& entry(std::string_view key) const;  ///< throws if missing

  double number(std::string_view key) const;
  double number_or(std::string_view key, double fallback) const;
  std::int64_t integer_or(std::string_view key, std::int64_t fallback) const;
  std::uint64_t unsigned_or(std::string_view key, std::uint64_t fallback) const;
  std::vector<double> numbers(std::string_view key) const;
  std::string text_or(std::string_view key, std::string fallback) const;
  bool boolean_or(std::string_view key, bool fallback) const;
  /// True when `key` holds the literal `optimize`.
  bool is_optimize(std::string_view key) const;

  const std::map<std::string, ConfigEntry, std::less<>>& entries() const {
    return entries_;
  }

  /// Equal keys and values; origins are ignored.
  friend bool operator==(const RunConfig& a, const RunConfig& b);

 private:
  std::map<std::string, ConfigEntry, std::less<>> entries_;
};

/// Parses a list value, expanding `...` progressions. Throws ValidationError.
std::vector<double> parse_number_list(std::string_view text, std::string_view origin);

enum class OutputFormat { csv, json };

/// Scientific notation with `digits` significant digits, '.' as decimal
/// separator regardless of locale; "nan"/"inf" for non-finite values.
std::string format_number(double value, int digits);

// Builders from a validated configuration.
SourceParams source_from(const RunConfig& config, bool need_mu);
ChannelParams channel_from(const RunConfig& config, bool need_length);
ProtocolConstants constants_from(const RunConfig& config);
Protocol protocol_from(const RunConfig& config);
SweepSpec sweep_spec_from(const RunConfig& config);
SimConfig sim_config_from(const RunConfig& config);
OutputFormat format_from(const RunConfig& config);
int precision_from(const RunConfig& config);

/// Fixed column order of sweep tables.
inline constexpr std::string_view sweep_header =
    "l_km,mu,Q_t,E_t,Q_nt,E_nt,r,R_t,R_both,R_final,x_star";

std::string sweep_csv(std::span<const SweepRow> rows, int digits);
nlohmann::json sweep_row_to_json(const SweepRow& row);
SweepRow sweep_row_from_json(const nlohmann::json& j);
/// NaN-aware field-by-field equality.
bool same_row(const SweepRow& a, const SweepRow& b);

nlohmann::json config_to_json(const RunConfig& config);
RunConfig config_from_json(const nlohmann::json& j);

/// A command's output and the process exit status it implies
/// (0 ok, 3 statistical threshold exceeded).
struct Report {
  std::string text;
  int exit_code = 0;
};

/// JSON report split back into its parts.
struct ParsedReport {
  std::string command;
  RunConfig config;
  nlohmann::json meta;
  nlohmann::json result;
};
ParsedReport parse_report(std::string_view json_text);

Report cmd_rate(const RunConfig& config);
Report cmd_sweep(const RunConfig& config);
Report cmd_montecarlo(const RunConfig& config);
Report cmd_attack(const RunConfig& config);
Report cmd_cutoff(const RunConfig& config);

/// Dispatches on rate | sweep | montecarlo | attack | cutoff.
Report run_command(std::string_view command, const RunConfig& config);

}  // namespace pdcqkd::cli
