#include "pdcqkd/optimizer_sweep.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "pdcqkd/detail/parallel.hpp"
#include "pdcqkd/error.hpp"
#include "pdcqkd/minimize.hpp"

namespace pdcqkd {

namespace {

constexpr double nan = std::numeric_limits<double>::quiet_NaN();

// Unclamped objective for the mu search: same argmax as R_final where any
// rate is positive, still informative where none is.
double mu_objective(const PointEvaluation& e) {
  const double rt = e.key.triggered.rate;
  const double rb = e.key.both.rate;
  return std::isnan(rb) ? rt : std::max(rt, rb);
}

}  // namespace

std::string_view to_string(Protocol protocol) {
  switch (protocol) {
    case Protocol::efficient_pdc:
      return "efficient_pdc";
    case Protocol::conventional_pdc:
      return "conventional_pdc";
    case Protocol::ideal_single_photon:
      return "ideal_single_photon";
  }
  return "unknown";
}

std::optional<Protocol> parse_protocol(std::string_view name) {
  for (auto p : {Protocol::efficient_pdc, Protocol::conventional_pdc,
                 Protocol::ideal_single_photon}) {
    if (to_string(p) == name) return p;
  }
  return std::nullopt;
}

MuSearch MuSearch::defaults_for(Protocol protocol) {
  MuSearch m;
  if (protocol == Protocol::conventional_pdc) m.lo = 1e-8;
  return m;
}

void SweepSpec::validate() const {
  for (std::size_t i = 0; i < distances_km.size(); ++i) {
    const double l = distances_km[i];
    if (!std::isfinite(l) || l < 0.0) {
      throw ValidationError("distances must be finite and >= 0");
    }
    if (i > 0 && !(l > distances_km[i - 1])) {
      throw ValidationError("distances must be strictly increasing");
    }
  }
  if (protocol != Protocol::ideal_single_photon) {
    SourceParams probe = source;
    if (optimize_mu) probe.mu = mu_search.lo;
    probe.validate();
    if (optimize_mu) {
      if (!(mu_search.lo > 0.0 && mu_search.hi > mu_search.lo)) {
        throw ValidationError("mu search needs 0 < mu_min < mu_max");
      }
      if (mu_search.grid_points < 3) {
        throw ValidationError("mu search needs at least 3 grid points");
      }
      if (!(mu_search.rel_tol > 0.0)) {
        throw ValidationError("mu tolerance must be > 0");
      }
    }
  }
  channel.validate();
  constants.validate();
}

PointEvaluation evaluate_point(const SweepSpec& spec, double l_km, double mu) {
  PointEvaluation out;
  out.l_km = l_km;
  out.mu = mu;
  ChannelParams ch = spec.channel;
  ch.length_km = l_km;

  if (spec.protocol == Protocol::ideal_single_photon) {
    ch.validate();
    out.mu = nan;
    out.obs.Q_t = yield_n(ch, 1);
    out.obs.E_t = out.obs.Q_t > 0.0 ? error_weighted_yield_n(ch, 1) / out.obs.Q_t
                                    : 0.5;
    out.obs.Q_nt = out.obs.E_nt = out.obs.r = nan;
    const double R = key_rate_ideal_single_photon(ch, spec.constants);
    out.key.triggered.rate = R;
    out.key.triggered.x_star = nan;
    out.key.both.rate = nan;
    out.key.both.x_star = nan;
    out.key.R_final = std::max(R, 0.0);
    out.key.selected = R > 0.0 ? Strategy::triggered : Strategy::none;
    return out;
  }

  SourceParams src_params = spec.source;
  src_params.mu = mu;
  const SourceStats stats = source_stats(src_params, spec.tail);
  out.obs = observables_closed_form(src_params, ch);

  if (spec.protocol == Protocol::conventional_pdc) {
    const double R = key_rate_conventional(out.obs, stats, spec.constants);
    out.key.triggered.rate = R;
    out.key.triggered.x_star = nan;
    out.key.both.rate = nan;
    out.key.both.x_star = nan;
    out.key.R_final = std::max(R, 0.0);
    out.key.selected = R > 0.0 ? Strategy::triggered : Strategy::none;
    return out;
  }

  out.key = key_rates(out.obs, stats, spec.constants, spec.minimizer);
  return out;
}

MuOptimum optimize_mu(double l_km, const SweepSpec& spec) {
  MuOptimum out;
  if (spec.protocol == Protocol::ideal_single_photon) {
    out.eval = evaluate_point(spec, l_km, nan);
    out.mu = nan;
    out.all_zero = !(out.eval.key.R_final > 0.0);
    return out;
  }

  const MuSearch& search = spec.mu_search;
  const double log_lo = std::log(search.lo);
  const double log_hi = std::log(search.hi);

  std::optional<PointEvaluation> best;
  double best_value = -std::numeric_limits<double>::infinity();
  auto score = [&](double log_mu) {
    try {
      PointEvaluation e = evaluate_point(spec, l_km, std::exp(log_mu));
      const double v = mu_objective(e);
      if (!best || v > best_value) {
        best_value = v;
        best = std::move(e);
      }
      return -v;
    } catch (const NumericalError&) {
      return std::numeric_limits<double>::infinity();
    }
  };

  // A width of rel_tol in log mu is a relative tolerance rel_tol in mu.
  grid_golden_minimize(score, log_lo, log_hi, search.grid_points,
                       search.rel_tol, 1.0);
  if (!best) {
    throw NumericalError("mu optimization failed: no mu in [" +
                         std::to_string(search.lo) + ", " +
                         std::to_string(search.hi) +
                         "] gives valid observables");
  }
  out.eval = *best;
  out.mu = best->mu;
  out.all_zero = !(best_value > 0.0);
  return out;
}

PointEvaluation evaluate_distance(const SweepSpec& spec, double l_km) {
  if (spec.protocol != Protocol::ideal_single_photon && spec.optimize_mu) {
    return optimize_mu(l_km, spec).eval;
  }
  return evaluate_point(spec, l_km, spec.source.mu);
}

SweepRow make_row(const PointEvaluation& eval) {
  SweepRow row;
  row.l_km = eval.l_km;
  row.mu = eval.mu;
  row.Q_t = eval.obs.Q_t;
  row.E_t = eval.obs.E_t;
  row.Q_nt = eval.obs.Q_nt;
  row.E_nt = eval.obs.E_nt;
  row.r = eval.obs.r;
  row.R_t = eval.key.R_t();
  row.R_both = eval.key.R_both();
  row.R_final = eval.key.R_final;
  row.x_star = eval.key.selected == Strategy::both ? eval.key.both.x_star
                                                   : eval.key.triggered.x_star;
  row.all_zero = !(eval.key.R_final > 0.0);
  return row;
}

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  spec.validate();
  std::vector<SweepRow> rows(spec.distances_km.size());
  detail::parallel_for(rows.size(), spec.threads, [&](std::size_t i) {
    const double l = spec.distances_km[i];
    try {
      rows[i] = make_row(evaluate_distance(spec, l));
    } catch (const NumericalError& e) {
      SweepRow failed;
      failed.l_km = l;
      failed.mu = failed.Q_t = failed.E_t = failed.Q_nt = failed.E_nt =
          failed.r = failed.R_t = failed.R_both = failed.x_star = nan;
      failed.R_final = 0.0;
      failed.failed = true;
      failed.all_zero = true;
      failed.note = e.what();
      rows[i] = std::move(failed);
    }
  });
  return rows;
}

double bisect_distance(const SweepSpec& spec, double lo_km, double hi_km,
                       double resolution_km,
                       const std::function<bool(const PointEvaluation&)>& holds) {
  if (!(lo_km >= 0.0 && hi_km > lo_km)) {
    throw ValidationError("distance bracket needs 0 <= lo < hi");
  }
  if (!(resolution_km > 0.0)) throw ValidationError("resolution must be > 0");
  if (!holds(evaluate_distance(spec, lo_km))) {
    std::ostringstream os;
    os << "invalid bracket: condition does not hold at lo = " << lo_km << " km";
    throw NumericalError(os.str());
  }
  if (holds(evaluate_distance(spec, hi_km))) {
    std::ostringstream os;
    os << "invalid bracket: condition still holds at hi = " << hi_km << " km";
    throw NumericalError(os.str());
  }
  while (hi_km - lo_km > resolution_km) {
    const double mid = 0.5 * (lo_km + hi_km);
    if (holds(evaluate_distance(spec, mid))) {
      lo_km = mid;
    } else {
      hi_km = mid;
    }
  }
  return 0.5 * (lo_km + hi_km);
}

double find_cutoff(const SweepSpec& spec, double lo_km, double hi_km,
                   double resolution_km) {
  spec.validate();
  return bisect_distance(spec, lo_km, hi_km, resolution_km,
                         [](const PointEvaluation& e) { return e.key.R_final > 0.0; });
}

double find_strategy_switch(const SweepSpec& spec, double lo_km, double hi_km,
                            double resolution_km) {
  spec.validate();
  if (spec.protocol != Protocol::efficient_pdc) {
    throw ValidationError("strategy switch exists only for efficient_pdc");
  }
  return bisect_distance(spec, lo_km, hi_km, resolution_km,
                         [](const PointEvaluation& e) {
                           return e.key.selected == Strategy::both;
                         });
}

}  // namespace pdcqkd
