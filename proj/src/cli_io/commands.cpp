#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <variant>

#include "pdcqkd/cli_io.hpp"
#include "pdcqkd/error.hpp"

namespace pdcqkd::cli {

namespace {

using Field = std::variant<double, std::string, bool, std::uint64_t>;
using FieldList = std::vector<std::pair<std::string, Field>>;

std::string render_field(const Field& f, int digits) {
  if (auto d = std::get_if<double>(&f)) return format_number(*d, digits);
  if (auto s = std::get_if<std::string>(&f)) return *s;
  if (auto b = std::get_if<bool>(&f)) return *b ? "true" : "false";
  return std::to_string(std::get<std::uint64_t>(f));
}

nlohmann::json field_json(const Field& f) {
  if (auto d = std::get_if<double>(&f)) {
    return std::isfinite(*d) ? nlohmann::json(*d) : nlohmann::json(nullptr);
  }
  if (auto s = std::get_if<std::string>(&f)) return *s;
  if (auto b = std::get_if<bool>(&f)) return *b;
  return std::get<std::uint64_t>(f);
}

nlohmann::json fields_json(const FieldList& fields) {
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [name, value] : fields) j[name] = field_json(value);
  return j;
}

std::string fields_csv(const FieldList& fields, int digits) {
  std::string out = "quantity,value\n";
  for (const auto& [name, value] : fields) {
    out += name + "," + render_field(value, digits) + "\n";
  }
  return out;
}

std::string json_report(std::string_view command, const RunConfig& config,
                        nlohmann::json meta, nlohmann::json result) {
  nlohmann::json j;
  j["command"] = command;
  j["config"] = config_to_json(config);
  j["meta"] = std::move(meta);
  j["result"] = std::move(result);
  return j.dump(2) + "\n";
}

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::triggered:
      return "triggered";
    case Strategy::both:
      return "both";
    case Strategy::none:
      break;
  }
  return "none";
}

void append_partial(FieldList& f, const std::string& prefix, const PartialKeyRate& p) {
  f.emplace_back(prefix + ".rate", p.rate);
  f.emplace_back(prefix + ".x_star", p.x_star);
  f.emplace_back(prefix + ".xi", p.xi_at_min);
  f.emplace_back(prefix + ".eps",
                 p.eps_at_min ? *p.eps_at_min : std::numeric_limits<double>::quiet_NaN());
  f.emplace_back(prefix + ".ec_cost", p.terms.ec_cost);
  f.emplace_back(prefix + ".vacuum_gain", p.terms.vacuum_gain);
  f.emplace_back(prefix + ".single_gain", p.terms.single_gain);
}

nlohmann::json search_meta(const SweepSpec& spec) {
  nlohmann::json meta;
  meta["protocol"] = std::string(to_string(spec.protocol));
  meta["mu_optimized"] = spec.optimize_mu && spec.protocol != Protocol::ideal_single_photon;
  meta["mu_min"] = spec.mu_search.lo;
  meta["mu_max"] = spec.mu_search.hi;
  meta["mu_grid_points"] = spec.mu_search.grid_points;
  meta["mu_rel_tol"] = spec.mu_search.rel_tol;
  meta["x_grid_points"] = spec.minimizer.grid_points;
  meta["x_rel_tol"] = spec.minimizer.rel_tol;
  return meta;
}

struct Comparison {
  std::string quantity;
  Estimate empirical;
  double analytic;
  double z() const {
    if (empirical.std_err > 0.0) return (empirical.value - analytic) / empirical.std_err;
    return empirical.value == analytic ? 0.0 : std::numeric_limits<double>::infinity();
  }
};

std::vector<Comparison> compare(const EmpiricalSummary& emp, const RateSummary& exact) {
  return {{"Q_t", emp.Q_t, exact.Q_t},
          {"E_t", emp.E_t, exact.E_t},
          {"Q_nt", emp.Q_nt, exact.Q_nt},
          {"E_nt", emp.E_nt, exact.E_nt},
          {"r", emp.r, exact.r}};
}

struct MonteCarloOutput {
  nlohmann::json meta;
  nlohmann::json result;
  std::string csv;
  bool passed = true;
};

MonteCarloOutput monte_carlo_report(const RunConfig& config, const SimConfig& sim,
                                    const SimResult& res, const RateSummary& exact,
                                    const FieldList& extra) {
  const double threshold = config.number_or("z_threshold", 5.0);
  if (!(threshold > 0.0)) throw ValidationError("z_threshold must be > 0");
  const int digits = precision_from(config);
  MonteCarloOutput out;
  out.meta["seed"] = sim.seed;
  out.meta["rng"] = res.rng;
  out.meta["pulses"] = res.pulses;
  out.meta["z_threshold"] = threshold;

  std::ostringstream csv;
  csv << "# seed=" << sim.seed << "\n# rng=" << res.rng << "\n# pulses=" << res.pulses
      << "\n# z_threshold=" << format_number(threshold, digits) << "\n";
  csv << "quantity,empirical,std_err,analytic,z\n";
  nlohmann::json table = nlohmann::json::array();
  for (const auto& c : compare(res.summary, exact)) {
    const double z = c.z();
    if (!(std::abs(z) <= threshold)) out.passed = false;
    csv << c.quantity << ',' << format_number(c.empirical.value, digits) << ','
        << format_number(c.empirical.std_err, digits) << ','
        << format_number(c.analytic, digits) << ',' << format_number(z, digits) << '\n';
    table.push_back({{"quantity", c.quantity},
                     {"empirical", field_json(c.empirical.value)},
                     {"std_err", field_json(c.empirical.std_err)},
                     {"analytic", field_json(c.analytic)},
                     {"z", field_json(z)}});
  }
  nlohmann::json cells = nlohmann::json::object();
  for (bool t : {false, true}) {
    for (bool d : {false, true}) {
      for (bool e : {false, true}) {
        if (!d && e) continue;
        std::string name = std::string(t ? "t" : "nt") + (d ? (e ? "_error" : "_correct") : "_miss");
        cells[name] = res.cells.at(t, d, e);
      }
    }
  }
  out.result["table"] = std::move(table);
  out.result["cells"] = std::move(cells);
  out.result["passed"] = out.passed;
  if (!extra.empty()) {
    out.result["reference"] = fields_json(extra);
    csv << "\nquantity,value\n";
    for (const auto& [name, value] : extra) csv << name << ',' << render_field(value, digits) << '\n';
  }
  csv << "\npassed," << (out.passed ? "true" : "false") << '\n';
  out.csv = csv.str();
  return out;
}

}  // namespace

SourceParams source_from(const RunConfig& config, bool need_mu) {
  SourceParams s;
  s.eta_A = config.number("eta_A");
  s.d_A = config.number("d_A");
  if (need_mu) {
    if (config.is_optimize("mu")) {
      throw ValidationError(config.entry("mu").origin +
                            ": key 'mu' must be a number for this command");
    }
    s.mu = config.number("mu");
  }
  s.validate();
  return s;
}

ChannelParams channel_from(const RunConfig& config, bool need_length) {
  ChannelParams ch;
  ch.alpha = config.number("alpha");
  ch.eta_B = config.number("eta_B");
  ch.p_d = config.number("p_d");
  ch.e_d = config.number("e_d");
  if (need_length) ch.length_km = config.number("length_km");
  ch.validate();
  return ch;
}

ProtocolConstants constants_from(const RunConfig& config) {
  ProtocolConstants c;
  c.q = config.number_or("q", 0.5);
  const double f = config.number_or("f_ec", 1.22);
  if (!(f >= 1.0)) throw ValidationError("f_ec must be >= 1");
  c.f_ec = constant_efficiency(f);
  c.validate();
  return c;
}

Protocol protocol_from(const RunConfig& config) {
  return *parse_protocol(config.text_or("protocol", "efficient_pdc"));
}

SweepSpec sweep_spec_from(const RunConfig& config) {
  SweepSpec spec;
  spec.protocol = protocol_from(config);
  if (spec.protocol != Protocol::ideal_single_photon) {
    spec.optimize_mu = !config.has("mu") || config.is_optimize("mu");
    spec.source = source_from(config, !spec.optimize_mu);
  }
  spec.channel = channel_from(config, false);
  spec.constants = constants_from(config);
  spec.distances_km = config.has("distances") ? config.numbers("distances")
                                              : std::vector<double>{};
  spec.mu_search = MuSearch::defaults_for(spec.protocol);
  spec.mu_search.lo = config.number_or("mu_min", spec.mu_search.lo);
  spec.mu_search.hi = config.number_or("mu_max", spec.mu_search.hi);
  spec.mu_search.grid_points = config.unsigned_or("mu_grid_points", spec.mu_search.grid_points);
  spec.mu_search.rel_tol = config.number_or("mu_rel_tol", spec.mu_search.rel_tol);
  spec.minimizer.grid_points = config.unsigned_or("x_grid_points", spec.minimizer.grid_points);
  spec.minimizer.rel_tol = config.number_or("x_rel_tol", spec.minimizer.rel_tol);
  if (spec.minimizer.grid_points < 3) throw ValidationError("x_grid_points must be >= 3");
  spec.threads = static_cast<unsigned>(config.unsigned_or("threads", 1));
  spec.validate();
  return spec;
}

SimConfig sim_config_from(const RunConfig& config) {
  SimConfig sim;
  sim.pulses = config.unsigned_or("pulses", 1000000);
  sim.seed = config.unsigned_or("seed", 1);
  sim.source = source_from(config, true);
  sim.channel = channel_from(config, true);
  sim.threads = static_cast<unsigned>(config.unsigned_or("threads", 1));
  sim.validate();
  return sim;
}

OutputFormat format_from(const RunConfig& config) {
  return config.text_or("format", "csv") == "json" ? OutputFormat::json : OutputFormat::csv;
}

int precision_from(const RunConfig& config) {
  const auto p = config.integer_or("precision", 6);
  if (p < 1 || p > 17) throw ValidationError("precision must lie in [1, 17]");
  return static_cast<int>(p);
}

Report cmd_rate(const RunConfig& config) {
  const SweepSpec spec = sweep_spec_from(config);
  const double l = config.number("length_km");
  if (spec.protocol != Protocol::ideal_single_photon) config.entry("mu");
  const PointEvaluation eval = evaluate_distance(spec, l);
  const int digits = precision_from(config);

  FieldList f;
  f.emplace_back("protocol", std::string(to_string(spec.protocol)));
  f.emplace_back("l_km", eval.l_km);
  f.emplace_back("mu", eval.mu);
  f.emplace_back("mu_optimized", spec.optimize_mu && spec.protocol != Protocol::ideal_single_photon);
  f.emplace_back("Q_t", eval.obs.Q_t);
  f.emplace_back("E_t", eval.obs.E_t);
  f.emplace_back("Q_nt", eval.obs.Q_nt);
  f.emplace_back("E_nt", eval.obs.E_nt);
  f.emplace_back("r", eval.obs.r);
  if (spec.protocol != Protocol::ideal_single_photon) {
    SourceParams src = spec.source;
    src.mu = eval.mu;
    const SourceStats stats = source_stats(src, spec.tail);
    f.emplace_back("r_0", stats.odds[0]);
    f.emplace_back("r_1", stats.odds[1]);
    f.emplace_back("r_2", stats.odds[2]);
  }
  f.emplace_back("R_t", eval.key.R_t());
  f.emplace_back("R_both", eval.key.R_both());
  f.emplace_back("R_final", eval.key.R_final);
  f.emplace_back("strategy", std::string(to_string(eval.key.selected)));
  if (spec.protocol == Protocol::efficient_pdc) {
    append_partial(f, "triggered", eval.key.triggered);
    append_partial(f, "both", eval.key.both);
  }

  if (format_from(config) == OutputFormat::json) {
    return {json_report("rate", config, search_meta(spec), fields_json(f)), 0};
  }
  return {fields_csv(f, digits), 0};
}

Report cmd_sweep(const RunConfig& config) {
  const SweepSpec spec = sweep_spec_from(config);
  config.entry("distances");
  const std::vector<SweepRow> rows = run_sweep(spec);
  if (format_from(config) == OutputFormat::json) {
    nlohmann::json result = nlohmann::json::array();
    for (const auto& row : rows) result.push_back(sweep_row_to_json(row));
    return {json_report("sweep", config, search_meta(spec), std::move(result)), 0};
  }
  return {sweep_csv(rows, precision_from(config)), 0};
}

Report cmd_montecarlo(const RunConfig& config) {
  const SimConfig sim = sim_config_from(config);
  const SourceStats stats = source_stats(sim.source, sim.tail);
  const RateSummary exact = observables(stats, sim.channel);
  const SimResult res = simulate(sim);
  auto out = monte_carlo_report(config, sim, res, exact, {});
  const int code = out.passed ? 0 : 3;
  if (format_from(config) == OutputFormat::json) {
    return {json_report("montecarlo", config, out.meta, out.result), code};
  }
  return {out.csv, code};
}

Report cmd_attack(const RunConfig& config) {
  SimConfig sim = sim_config_from(config);
  const SourceStats stats = source_stats(sim.source, sim.tail);
  const RateSummary honest = observables(stats, sim.channel);
  AttackScenario attack =
      pns_attack_vector(stats, sim.channel, config.number_or("attack.block_fraction", 1.0));
  if (config.boolean_or("attack.match_q_t", true)) {
    attack = match_triggered_rate(attack, stats, honest.Q_t);
  }
  sim.attack = attack;
  const RateSummary expected = expected_observables(stats, attack);
  const SimResult res = simulate(sim);

  const ProtocolConstants consts = constants_from(config);
  FieldList extra;
  extra.emplace_back("attack", attack.description);
  extra.emplace_back("r_observed", res.summary.r.value);
  extra.emplace_back("r_honest", honest.r);
  extra.emplace_back("r_0", stats.odds[0]);
  extra.emplace_back("r_1", stats.odds[1]);
  extra.emplace_back("r_2", stats.odds[2]);
  double attacked_rate = std::numeric_limits<double>::quiet_NaN();
  try {
    attacked_rate = key_rate_triggered(res.summary.to_rate_summary(), stats, consts).rate;
  } catch (const ValidationError&) {
    // eta_A outside (0,1): no efficient-protocol rate to report
  }
  double honest_rate = std::numeric_limits<double>::quiet_NaN();
  try {
    honest_rate = key_rate_triggered(honest, stats, consts).rate;
  } catch (const ValidationError&) {
  }
  extra.emplace_back("R_t_observed", attacked_rate);
  extra.emplace_back("R_t_honest", honest_rate);

  auto out = monte_carlo_report(config, sim, res, expected, extra);
  const int code = out.passed ? 0 : 3;
  if (format_from(config) == OutputFormat::json) {
    return {json_report("attack", config, out.meta, out.result), code};
  }
  return {out.csv, code};
}

Report cmd_cutoff(const RunConfig& config) {
  const SweepSpec spec = sweep_spec_from(config);
  const double lo = config.number_or("cutoff_min_km", 0.0);
  const double hi = config.number_or("cutoff_max_km", 300.0);
  const double res = config.number_or("resolution_km", 0.1);
  const double cutoff = find_cutoff(spec, lo, hi, res);
  FieldList f;
  f.emplace_back("protocol", std::string(to_string(spec.protocol)));
  f.emplace_back("cutoff_km", cutoff);
  f.emplace_back("resolution_km", res);
  if (format_from(config) == OutputFormat::json) {
    return {json_report("cutoff", config, search_meta(spec), fields_json(f)), 0};
  }
  return {fields_csv(f, precision_from(config)), 0};
}

Report run_command(std::string_view command, const RunConfig& config) {
  if (command == "rate") return cmd_rate(config);
  if (command == "sweep") return cmd_sweep(config);
  if (command == "montecarlo") return cmd_montecarlo(config);
  if (command == "attack") return cmd_attack(config);
  if (command == "cutoff") return cmd_cutoff(config);
  throw ValidationError("unknown command '" + std::string(command) +
                        "' (expected rate, sweep, montecarlo, attack or cutoff)");
}

}  // namespace pdcqkd::cli
