#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>

#include "pdcqkd/cli_io.hpp"
#include "pdcqkd/error.hpp"

namespace pdcqkd::cli {

namespace {

nlohmann::json number_json(double v) {
  if (!std::isfinite(v)) return nullptr;
  return v;
}

double number_from(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

bool same_number(double a, double b) {
  return (std::isnan(a) && std::isnan(b)) || a == b;
}

}  // namespace

std::string format_number(double value, int digits) {
  if (std::isnan(value)) return "nan";
  if (std::isinf(value)) return value > 0 ? "inf" : "-inf";
  digits = std::clamp(digits, 1, 17);
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value,
                                 std::chars_format::scientific, digits - 1);
  if (ec != std::errc()) throw NumericalError("number formatting failed");
  return std::string(buf, ptr);
}

std::string sweep_csv(std::span<const SweepRow> rows, int digits) {
  std::string out(sweep_header);
  out += '\n';
  for (const auto& row : rows) {
    const double fields[] = {row.l_km, row.mu,   row.Q_t, row.E_t,
                             row.Q_nt, row.E_nt, row.r,   row.R_t,
                             row.R_both, row.R_final, row.x_star};
    bool first = true;
    for (double f : fields) {
      if (!first) out += ',';
      out += format_number(f, digits);
      first = false;
    }
    out += '\n';
  }
  return out;
}

nlohmann::json sweep_row_to_json(const SweepRow& row) {
  nlohmann::json j;
  j["l_km"] = number_json(row.l_km);
  j["mu"] = number_json(row.mu);
  j["Q_t"] = number_json(row.Q_t);
  j["E_t"] = number_json(row.E_t);
  j["Q_nt"] = number_json(row.Q_nt);
  j["E_nt"] = number_json(row.E_nt);
  j["r"] = number_json(row.r);
  j["R_t"] = number_json(row.R_t);
  j["R_both"] = number_json(row.R_both);
  j["R_final"] = number_json(row.R_final);
  j["x_star"] = number_json(row.x_star);
  j["all_zero"] = row.all_zero;
  j["failed"] = row.failed;
  if (!row.note.empty()) j["note"] = row.note;
  return j;
}

SweepRow sweep_row_from_json(const nlohmann::json& j) {
  SweepRow row;
  row.l_km = number_from(j.at("l_km"));
  row.mu = number_from(j.at("mu"));
  row.Q_t = number_from(j.at("Q_t"));
  row.E_t = number_from(j.at("E_t"));
  row.Q_nt = number_from(j.at("Q_nt"));
  row.E_nt = number_from(j.at("E_nt"));
  row.r = number_from(j.at("r"));
  row.R_t = number_from(j.at("R_t"));
  row.R_both = number_from(j.at("R_both"));
  row.R_final = number_from(j.at("R_final"));
  row.x_star = number_from(j.at("x_star"));
  row.all_zero = j.at("all_zero").get<bool>();
  row.failed = j.at("failed").get<bool>();
  row.note = j.value("note", std::string{});
  return row;
}

bool same_row(const SweepRow& a, const SweepRow& b) {
  return same_number(a.l_km, b.l_km) && same_number(a.mu, b.mu) &&
         same_number(a.Q_t, b.Q_t) && same_number(a.E_t, b.E_t) &&
         same_number(a.Q_nt, b.Q_nt) && same_number(a.E_nt, b.E_nt) &&
         same_number(a.r, b.r) && same_number(a.R_t, b.R_t) &&
         same_number(a.R_both, b.R_both) && same_number(a.R_final, b.R_final) &&
         same_number(a.x_star, b.x_star) && a.all_zero == b.all_zero &&
         a.failed == b.failed && a.note == b.note;
}

ParsedReport parse_report(std::string_view json_text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("report is not valid JSON: ") + e.what());
  }
  ParsedReport out;
  out.command = j.at("command").get<std::string>();
  out.config = config_from_json(j.at("config"));
  out.meta = j.value("meta", nlohmann::json::object());
  out.result = j.at("result");
  return out;
}

}  // namespace pdcqkd::cli
