#include "pdcqkd/pdcqkd.h"

#include <cmath>
#include <exception>
#include <fstream>
#include <limits>
#include <new>
#include <stdexcept>
#include <string>

#include "pdcqkd/channel_detection.hpp"
#include "pdcqkd/cli_io.hpp"
#include "pdcqkd/error.hpp"
#include "pdcqkd/montecarlo.hpp"
#include "pdcqkd/optimizer_sweep.hpp"
#include "pdcqkd/photon_source.hpp"
#include "pdcqkd/security_bounds.hpp"

struct pdcqkd_source_stats {
  pdcqkd::SourceStats stats;
};

struct pdcqkd_config {
  pdcqkd::cli::RunConfig config;
};

struct pdcqkd_report {
  pdcqkd::cli::Report report;
};

namespace {

thread_local std::string last_error;

struct io_error : std::runtime_error {
  explicit io_error(const std::string& path)
      : std::runtime_error("cannot open config file '" + path + "'") {}
};

constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

pdcqkd_status fail(pdcqkd_status status, const char* what) {
  last_error = what;
  return status;
}

// Runs `body`, translating exceptions into status codes.
template <class F>
pdcqkd_status guarded(F&& body) {
  try {
    last_error.clear();
    body();
    return PDCQKD_OK;
  } catch (const pdcqkd::ValidationError& e) {
    return fail(PDCQKD_ERROR_VALIDATION, e.what());
  } catch (const pdcqkd::NumericalError& e) {
    return fail(PDCQKD_ERROR_NUMERICAL, e.what());
  } catch (const io_error& e) {
    return fail(PDCQKD_ERROR_IO, e.what());
  } catch (const pdcqkd::Error& e) {
    return fail(PDCQKD_ERROR_INTERNAL, e.what());
  } catch (const std::bad_alloc&) {
    return fail(PDCQKD_ERROR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(PDCQKD_ERROR_INTERNAL, e.what());
  } catch (...) {
    return fail(PDCQKD_ERROR_INTERNAL, "unknown error");
  }
}

void require(const void* p, const char* name) {
  if (p == nullptr)
    throw pdcqkd::ValidationError(std::string(name) + " is null");
}

pdcqkd::SourceParams to_source(const pdcqkd_source_params* s) {
  require(s, "source");
  pdcqkd::SourceParams p{s->mu, s->eta_A, s->d_A};
  p.validate();
  return p;
}

pdcqkd::ChannelParams to_channel(const pdcqkd_channel_params* c) {
  require(c, "channel");
  pdcqkd::ChannelParams ch{c->alpha, c->length_km, c->eta_B, c->p_d, c->e_d};
  ch.validate();
  return ch;
}

pdcqkd::ProtocolConstants to_constants(const pdcqkd_constants* c) {
  pdcqkd::ProtocolConstants k;
  if (c != nullptr) {
    k.q = c->q;
    k.f_ec = pdcqkd::constant_efficiency(c->f_ec);
  }
  k.validate();
  return k;
}

pdcqkd::Protocol to_protocol(pdcqkd_protocol p) {
  switch (p) {
    case PDCQKD_EFFICIENT_PDC: return pdcqkd::Protocol::efficient_pdc;
    case PDCQKD_CONVENTIONAL_PDC: return pdcqkd::Protocol::conventional_pdc;
    case PDCQKD_IDEAL_SINGLE_PHOTON: return pdcqkd::Protocol::ideal_single_photon;
  }
  throw pdcqkd::ValidationError("unknown protocol");
}

pdcqkd::SweepSpec spec_for(pdcqkd_protocol protocol, const pdcqkd_source_params* src,
                           const pdcqkd_channel_params* ch,
                           const pdcqkd_constants* consts) {
  pdcqkd::SweepSpec spec;
  spec.protocol = to_protocol(protocol);
  spec.mu_search = pdcqkd::MuSearch::defaults_for(spec.protocol);
  if (spec.protocol == pdcqkd::Protocol::ideal_single_photon) {
    if (src != nullptr) spec.source = {0.0, src->eta_A, src->d_A};
  } else {
    require(src, "source");
    spec.source = {0.0, src->eta_A, src->d_A};
  }
  spec.channel = to_channel(ch);
  spec.constants = to_constants(consts);
  spec.optimize_mu = true;
  return spec;
}

void fill_summary(const pdcqkd::RateSummary& s, pdcqkd_rate_summary* out) {
  *out = {s.Q_t, s.E_t, s.Q_nt, s.E_nt, s.r};
}

pdcqkd_strategy to_c(pdcqkd::Strategy s) {
  switch (s) {
    case pdcqkd::Strategy::triggered: return PDCQKD_STRATEGY_TRIGGERED;
    case pdcqkd::Strategy::both: return PDCQKD_STRATEGY_BOTH;
    case pdcqkd::Strategy::none: break;
  }
  return PDCQKD_STRATEGY_NONE;
}

}  // namespace

extern "C" {

const char* pdcqkd_version(void) { return "0.1.0"; }

const char* pdcqkd_last_error(void) { return last_error.c_str(); }

const char* pdcqkd_status_name(pdcqkd_status status) {
  switch (status) {
    case PDCQKD_OK: return "ok";
    case PDCQKD_ERROR_VALIDATION: return "validation";
    case PDCQKD_ERROR_NUMERICAL: return "numerical";
    case PDCQKD_ERROR_STATISTICAL: return "statistical";
    case PDCQKD_ERROR_IO: return "io";
    case PDCQKD_ERROR_INTERNAL: return "internal";
  }
  return "unknown";
}

pdcqkd_constants pdcqkd_default_constants(void) { return {0.5, 1.22}; }

pdcqkd_status pdcqkd_photon_number_dist(const pdcqkd_source_params* src, size_t n,
                                        double* out) {
  return guarded([&] {
    require(out, "out");
    *out = pdcqkd::photon_number_dist(to_source(src), n);
  });
}

pdcqkd_status pdcqkd_trigger_prob(const pdcqkd_source_params* src, size_t n,
                                  double* out) {
  return guarded([&] {
    require(out, "out");
    *out = pdcqkd::trigger_prob(to_source(src), n);
  });
}

pdcqkd_status pdcqkd_trigger_odds(const pdcqkd_source_params* src, size_t n,
                                  double* out) {
  return guarded([&] {
    require(out, "out");
    *out = pdcqkd::trigger_odds(to_source(src), n);
  });
}

pdcqkd_status pdcqkd_yield(const pdcqkd_channel_params* ch, size_t n, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = pdcqkd::yield_n(to_channel(ch), n);
  });
}

pdcqkd_status pdcqkd_error_weighted_yield(const pdcqkd_channel_params* ch, size_t n,
                                          double* out) {
  return guarded([&] {
    require(out, "out");
    *out = pdcqkd::error_weighted_yield_n(to_channel(ch), n);
  });
}

pdcqkd_status pdcqkd_observables(const pdcqkd_source_params* src,
                                 const pdcqkd_channel_params* ch, int closed_form,
                                 pdcqkd_rate_summary* out) {
  return guarded([&] {
    require(out, "out");
    const auto s = to_source(src);
    const auto c = to_channel(ch);
    fill_summary(closed_form ? pdcqkd::observables_closed_form(s, c)
                             : pdcqkd::observables(pdcqkd::source_stats(s), c),
                 out);
  });
}

pdcqkd_status pdcqkd_key_rate_efficient(const pdcqkd_source_params* src,
                              const pdcqkd_channel_params* ch,
                              const pdcqkd_constants* consts, pdcqkd_key_rate* out) {
  return guarded([&] {
    require(out, "out");
    const auto s = to_source(src);
    const auto c = to_channel(ch);
    const auto k = to_constants(consts);
    const auto stats = pdcqkd::source_stats(s);
    const auto key = pdcqkd::key_rates(pdcqkd::observables_closed_form(s, c), stats, k);
    out->R_t = key.R_t();
    out->R_both = key.R_both();
    out->R_final = key.R_final;
    out->x_star_t = key.triggered.x_star;
    out->x_star_both = key.both.x_star;
    out->xi_t = key.triggered.xi_at_min;
    out->eps_t = key.triggered.eps_at_min.value_or(nan_value);
    out->xi_both = key.both.xi_at_min;
    out->eps_both = key.both.eps_at_min.value_or(nan_value);
    out->selected = to_c(key.selected);
  });
}

pdcqkd_status pdcqkd_key_rate_conventional(const pdcqkd_source_params* src,
                                           const pdcqkd_channel_params* ch,
                                           const pdcqkd_constants* consts,
                                           double* out) {
  return guarded([&] {
    require(out, "out");
    const auto s = to_source(src);
    const auto c = to_channel(ch);
    const auto stats = pdcqkd::source_stats(s);
    *out = pdcqkd::key_rate_conventional(pdcqkd::observables_closed_form(s, c), stats,
                                         to_constants(consts));
  });
}

pdcqkd_status pdcqkd_key_rate_ideal(const pdcqkd_channel_params* ch,
                                    const pdcqkd_constants* consts, double* out) {
  return guarded([&] {
    require(out, "out");
    *out = pdcqkd::key_rate_ideal_single_photon(to_channel(ch), to_constants(consts));
  });
}

pdcqkd_status pdcqkd_optimize_mu(pdcqkd_protocol protocol,
                                 const pdcqkd_source_params* src,
                                 const pdcqkd_channel_params* ch,
                                 const pdcqkd_constants* consts, double mu_min,
                                 double mu_max, double* mu_opt, double* R_final,
                                 int* all_zero) {
  return guarded([&] {
    auto spec = spec_for(protocol, src, ch, consts);
    if (mu_min != 0.0 || mu_max != 0.0) {
      spec.mu_search.lo = mu_min;
      spec.mu_search.hi = mu_max;
    }
    spec.validate();
    const auto best = pdcqkd::optimize_mu(spec.channel.length_km, spec);
    if (mu_opt) *mu_opt = best.mu;
    if (R_final) *R_final = best.eval.key.R_final;
    if (all_zero) *all_zero = best.all_zero ? 1 : 0;
  });
}

pdcqkd_status pdcqkd_find_cutoff(pdcqkd_protocol protocol,
                                 const pdcqkd_source_params* src,
                                 const pdcqkd_channel_params* ch,
                                 const pdcqkd_constants* consts, double lo_km,
                                 double hi_km, double resolution_km,
                                 double* cutoff_km) {
  return guarded([&] {
    require(cutoff_km, "cutoff_km");
    auto spec = spec_for(protocol, src, ch, consts);
    spec.validate();
    *cutoff_km = pdcqkd::find_cutoff(spec, lo_km, hi_km, resolution_km);
  });
}

pdcqkd_status pdcqkd_source_stats_create(const pdcqkd_source_params* src,
                                         pdcqkd_source_stats** out) {
  return guarded([&] {
    require(out, "out");
    *out = nullptr;
    *out = new pdcqkd_source_stats{pdcqkd::source_stats(to_source(src))};
  });
}

void pdcqkd_source_stats_destroy(pdcqkd_source_stats* stats) { delete stats; }

size_t pdcqkd_source_stats_size(const pdcqkd_source_stats* stats) {
  return stats ? stats->stats.size() : 0;
}

pdcqkd_status pdcqkd_source_stats_copy(const pdcqkd_source_stats* stats,
                                       size_t capacity, double* p, double* gamma,
                                       double* odds, double* p_t, double* p_nt) {
  return guarded([&] {
    require(stats, "stats");
    const auto& s = stats->stats;
    const size_t n = capacity < s.size() ? capacity : s.size();
    for (size_t i = 0; i < n; ++i) {
      if (p) p[i] = s.p[i];
      if (gamma) gamma[i] = s.gamma[i];
      if (odds) odds[i] = s.odds[i];
      if (p_t) p_t[i] = s.p_t[i];
      if (p_nt) p_nt[i] = s.p_nt[i];
    }
  });
}

pdcqkd_status pdcqkd_simulate(const pdcqkd_source_params* src,
                              const pdcqkd_channel_params* ch, uint64_t pulses,
                              uint64_t seed, const double* attack_yields,
                              const double* attack_errors, size_t attack_len,
                              pdcqkd_sim_summary* out) {
  return guarded([&] {
    require(out, "out");
    pdcqkd::SimConfig cfg;
    cfg.pulses = pulses;
    cfg.seed = seed;
    cfg.source = to_source(src);
    cfg.channel = to_channel(ch);
    if (attack_yields != nullptr) {
      require(attack_errors, "attack_errors");
      pdcqkd::AttackScenario a;
      a.yields.assign(attack_yields, attack_yields + attack_len);
      a.errors.assign(attack_errors, attack_errors + attack_len);
      a.validate();
      cfg.attack = std::move(a);
    }
    cfg.validate();
    const auto res = pdcqkd::simulate(cfg);
    out->pulses = res.pulses;
    for (size_t i = 0; i < 8; ++i) out->cells[i] = res.cells.counts[i];
    const auto& s = res.summary;
    out->Q_t = s.Q_t.value;
    out->Q_t_err = s.Q_t.std_err;
    out->E_t = s.E_t.value;
    out->E_t_err = s.E_t.std_err;
    out->Q_nt = s.Q_nt.value;
    out->Q_nt_err = s.Q_nt.std_err;
    out->E_nt = s.E_nt.value;
    out->E_nt_err = s.E_nt.std_err;
    out->r = s.r.value;
    out->r_err = s.r.std_err;
  });
}

pdcqkd_status pdcqkd_config_create(pdcqkd_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new pdcqkd_config{};
  });
}

void pdcqkd_config_destroy(pdcqkd_config* config) { delete config; }

pdcqkd_status pdcqkd_config_load_file(pdcqkd_config* config, const char* path) {
  return guarded([&] {
    require(config, "config");
    require(path, "path");
    if (!std::ifstream(path, std::ios::binary)) throw io_error(path);
    config->config.load_file(path);
  });
}

pdcqkd_status pdcqkd_config_load_string(pdcqkd_config* config, const char* text,
                                        const char* source_name) {
  return guarded([&] {
    require(config, "config");
    require(text, "text");
    config->config.load_text(text, source_name ? source_name : "<string>");
  });
}

pdcqkd_status pdcqkd_config_set(pdcqkd_config* config, const char* key,
                                const char* value, const char* origin) {
  return guarded([&] {
    require(config, "config");
    require(key, "key");
    require(value, "value");
    config->config.set(key, value, origin ? origin : key);
  });
}

const char* pdcqkd_config_get(const pdcqkd_config* config, const char* key) {
  if (config == nullptr || key == nullptr) return nullptr;
  const auto& entries = config->config.entries();
  const auto it = entries.find(std::string_view(key));
  return it == entries.end() ? nullptr : it->second.value.c_str();
}

size_t pdcqkd_config_key_count(void) { return pdcqkd::cli::config_schema().size(); }

// Schema names and help strings are string literals, so data() is terminated.
const char* pdcqkd_config_key_name(size_t index) {
  const auto schema = pdcqkd::cli::config_schema();
  return index < schema.size() ? schema[index].name.data() : nullptr;
}

const char* pdcqkd_config_key_help(size_t index) {
  const auto schema = pdcqkd::cli::config_schema();
  return index < schema.size() ? schema[index].help.data() : nullptr;
}

pdcqkd_status pdcqkd_run(const pdcqkd_config* config, const char* command,
                         pdcqkd_report** out) {
  return guarded([&] {
    require(config, "config");
    require(command, "command");
    require(out, "out");
    *out = nullptr;
    *out = new pdcqkd_report{pdcqkd::cli::run_command(command, config->config)};
  });
}

const char* pdcqkd_report_text(const pdcqkd_report* report) {
  return report ? report->report.text.c_str() : "";
}

size_t pdcqkd_report_size(const pdcqkd_report* report) {
  return report ? report->report.text.size() : 0;
}

int pdcqkd_report_exit_code(const pdcqkd_report* report) {
  return report ? report->report.exit_code : PDCQKD_ERROR_INTERNAL;
}

void pdcqkd_report_destroy(pdcqkd_report* report) { delete report; }

}  // extern "C"
