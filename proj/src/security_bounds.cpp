#include "pdcqkd/security_bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pdcqkd/error.hpp"
#include "pdcqkd/minimize.hpp"

namespace pdcqkd {

namespace {

double ec_efficiency(const ProtocolConstants& consts, double e) {
  const double f = consts.f_ec(e);
  if (!(f >= 1.0) || !std::isfinite(f)) {
    std::ostringstream os;
    os << "error-correction inefficiency f(E) must be >= 1 (got " << f
       << " at E = " << e << ")";
    throw ValidationError(os.str());
  }
  return f;
}

struct Minimized {
  ScalarMinimum min;
  double xi_val;
  std::optional<double> eps_val;
};

Minimized minimize_bracket(const RateSummary& obs, const TriggerOdds& odds,
                           double vacuum_weight, double single_weight,
                           const MinimizerPolicy& policy) {
  const VacuumRange range = vacuum_range(obs, odds);
  auto objective = [&](double x) {
    return bound_objective(x, obs, odds, vacuum_weight, single_weight);
  };
  Minimized out;
  out.min = grid_golden_minimize(objective, range.lo, range.hi,
                                 policy.grid_points, policy.rel_tol);
  out.xi_val = xi(out.min.x, obs, odds);
  out.eps_val = eps_bound(out.min.x, obs, odds, out.xi_val);
  return out;
}

}  // namespace

void ProtocolConstants::validate() const {
  if (!(q > 0.0 && q <= 1.0)) {
    throw ValidationError("protocol efficiency q must lie in (0, 1]");
  }
  if (!f_ec) throw ValidationError("error-correction efficiency f(E) unset");
}

TriggerOdds trigger_odds_of(const SourceStats& src) {
  const double eta_A = src.params.eta_A;
  if (!(eta_A > 0.0 && eta_A < 1.0)) {
    std::ostringstream os;
    os << "efficient protocol needs 0 < eta_A < 1 so that r_0 < r_1 < r_2 "
          "are finite (got eta_A = "
       << eta_A << ")";
    throw ValidationError(os.str());
  }
  if (src.size() < 3) throw ValidationError("source stats need n_max >= 2");
  return {src.odds[0], src.odds[1], src.odds[2]};
}

VacuumRange vacuum_range(const RateSummary& obs, const TriggerOdds& odds) {
  double hi = 2.0 * obs.E_nt;
  if (odds.r0 > 0.0) hi = std::min(hi, 2.0 * obs.E_t * (obs.r / odds.r0));
  return {0.0, std::max(hi, 0.0)};
}

double binary_entropy(double e) {
  if (!(e > 0.0 && e < 1.0)) return 0.0;
  return -(e * std::log(e) + (1.0 - e) * std::log1p(-e)) / std::log(2.0);
}

double xi(double x, const RateSummary& obs, const TriggerOdds& odds) {
  return (odds.r2 - obs.r - (odds.r2 - odds.r0) * x) / (odds.r2 - odds.r1);
}

std::optional<double> eps_bound_raw(double x, const RateSummary& obs,
                                    const TriggerOdds& odds, double xi_val) {
  if (!(xi_val > 0.0)) return std::nullopt;
  const double eps_t =
      (2.0 * obs.r * obs.E_t - odds.r0 * x) / (2.0 * odds.r1 * xi_val);
  const double eps_nt = (2.0 * obs.E_nt - x) / (2.0 * xi_val);
  return std::min(eps_t, eps_nt);
}

std::optional<double> eps_bound(double x, const RateSummary& obs,
                                const TriggerOdds& odds, double xi_val) {
  auto raw = eps_bound_raw(x, obs, odds, xi_val);
  if (!raw) return raw;
  return std::clamp(*raw, 0.0, 0.5);
}

double bound_objective(double x, const RateSummary& obs,
                       const TriggerOdds& odds, double vacuum_weight,
                       double single_weight) {
  const double xi_val = xi(x, obs, odds);
  double single = 0.0;
  if (auto eps = eps_bound(x, obs, odds, xi_val)) {
    single = xi_val * (1.0 - binary_entropy(*eps));
  }
  return vacuum_weight * x + single_weight * single;
}

PartialKeyRate key_rate_triggered(const RateSummary& obs, const SourceStats& src,
                                  const ProtocolConstants& consts,
                                  const MinimizerPolicy& minimizer) {
  consts.validate();
  const TriggerOdds odds = trigger_odds_of(src);
  const Minimized m = minimize_bracket(obs, odds, odds.r0, odds.r1, minimizer);

  PartialKeyRate out;
  out.x_star = m.min.x;
  out.xi_at_min = m.xi_val;
  out.eps_at_min = m.eps_val;
  out.terms.ec_cost =
      consts.q * obs.Q_t * ec_efficiency(consts, obs.E_t) * binary_entropy(obs.E_t);
  out.terms.vacuum_gain = consts.q * obs.Q_nt * odds.r0 * m.min.x;
  out.terms.single_gain =
      consts.q * obs.Q_nt * (m.min.value - odds.r0 * m.min.x);
  out.rate = consts.q * (obs.Q_nt * m.min.value) - out.terms.ec_cost;
  return out;
}

PartialKeyRate key_rate_both(const RateSummary& obs, const SourceStats& src,
                             const ProtocolConstants& consts,
                             const MinimizerPolicy& minimizer) {
  consts.validate();
  const TriggerOdds odds = trigger_odds_of(src);
  const Minimized m =
      minimize_bracket(obs, odds, 1.0 + odds.r0, 1.0 + odds.r1, minimizer);

  PartialKeyRate out;
  out.x_star = m.min.x;
  out.xi_at_min = m.xi_val;
  out.eps_at_min = m.eps_val;
  out.terms.ec_cost =
      consts.q *
      (obs.Q_t * ec_efficiency(consts, obs.E_t) * binary_entropy(obs.E_t) +
       obs.Q_nt * ec_efficiency(consts, obs.E_nt) * binary_entropy(obs.E_nt));
  out.terms.vacuum_gain = consts.q * obs.Q_nt * (1.0 + odds.r0) * m.min.x;
  out.terms.single_gain =
      consts.q * obs.Q_nt * (m.min.value - (1.0 + odds.r0) * m.min.x);
  out.rate = consts.q * (obs.Q_nt * m.min.value) - out.terms.ec_cost;
  return out;
}

KeyRateResult final_rate(const PartialKeyRate& rt, const PartialKeyRate& rboth) {
  KeyRateResult out;
  out.triggered = rt;
  out.both = rboth;
  const double best = std::max(rt.rate, rboth.rate);
  if (best > 0.0) {
    out.R_final = best;
    out.selected = rboth.rate > rt.rate ? Strategy::both : Strategy::triggered;
  }
  return out;
}

KeyRateResult key_rates(const RateSummary& obs, const SourceStats& src,
                        const ProtocolConstants& consts,
                        const MinimizerPolicy& minimizer) {
  return final_rate(key_rate_triggered(obs, src, consts, minimizer),
                    key_rate_both(obs, src, consts, minimizer));
}

double key_rate_conventional(const RateSummary& obs, const SourceStats& src,
                             const ProtocolConstants& consts) {
  consts.validate();
  double p_multi = src.tail_mass;
  for (std::size_t n = src.size(); n-- > 2;) p_multi += src.p_t[n];

  const double leakage =
      obs.Q_t * ec_efficiency(consts, obs.E_t) * binary_entropy(obs.E_t);
  const double single_lower = obs.Q_t - p_multi;
  if (!(single_lower > 0.0)) return -consts.q * leakage;
  const double e1 = std::min(obs.Q_t * obs.E_t / single_lower, 0.5);
  return consts.q * (single_lower * (1.0 - binary_entropy(e1)) - leakage);
}

double key_rate_ideal_single_photon(const ChannelParams& ch,
                                    const ProtocolConstants& consts) {
  ch.validate();
  consts.validate();
  const double Q = yield_n(ch, 1);
  if (!(Q > 0.0)) return 0.0;
  const double E = error_weighted_yield_n(ch, 1) / Q;
  const double h = binary_entropy(E);
  return consts.q * Q * (1.0 - h - ec_efficiency(consts, E) * h);
}

}  // namespace pdcqkd
