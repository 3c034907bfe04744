#pragma once

#include <cstddef>
#include <functional>
#include <optional>

#include "pdcqkd/channel_detection.hpp"
#include "pdcqkd/photon_source.hpp"

namespace pdcqkd {

/// Error-correction inefficiency f(E); typed as a function so rate-adaptive
/// codes can be plugged in.
using ErrorCorrectionEfficiency = std::function<double(double)>;

inline ErrorCorrectionEfficiency constant_efficiency(double f) {
  return [f](double) { return f; };
}

struct ProtocolConstants {
  double q = 0.5;  ///< sifting efficiency
  ErrorCorrectionEfficiency f_ec = constant_efficiency(1.22);

  void validate() const;
};

/// r_0 < r_1 < r_2, the only trigger odds the bounds need.
struct TriggerOdds {
  double r0 = 0.0;
  double r1 = 0.0;
  double r2 = 0.0;
};

/// Reads r_0..r_2 from `src`; throws ValidationError unless 0 < eta_A < 1
/// (the ordering must be strict and finite).
TriggerOdds trigger_odds_of(const SourceStats& src);

/// Feasible vacuum fractions x = Q_0^(nt)/Q^(nt):
/// [0, min{2 E_t r / r0, 2 E_nt}]; the first limit is inactive when r0 == 0.
struct VacuumRange {
  double lo = 0.0;
  double hi = 0.0;
};
VacuumRange vacuum_range(const RateSummary& obs, const TriggerOdds& odds);

struct MinimizerPolicy {
  std::size_t grid_points = 4097;
  double rel_tol = 1e-12;
};

struct TermBreakdown {
  double ec_cost = 0.0;       ///< q * (error-correction leakage), >= 0
  double vacuum_gain = 0.0;   ///< q * Q_nt * weight_0 * x*
  double single_gain = 0.0;   ///< q * Q_nt * weight_1 * xi(x*) [1 - H2(eps(x*))]
};

/// One strategy's rate: triggered-only or both-sets.
struct PartialKeyRate {
  double rate = 0.0;  ///< may be negative (no key)
  double x_star = 0.0;
  double xi_at_min = 0.0;
  std::optional<double> eps_at_min;  ///< empty when xi(x*) <= 0
  TermBreakdown terms;
};

enum class Strategy { none, triggered, both };

struct KeyRateResult {
  PartialKeyRate triggered;
  PartialKeyRate both;
  double R_final = 0.0;  ///< max{R_t, R_both, 0}
  Strategy selected = Strategy::none;

  double R_t() const noexcept { return triggered.rate; }
  double R_both() const noexcept { return both.rate; }
};

/// H2(e) = -e log2 e - (1-e) log2(1-e), with H2(0) = H2(1) = 0.
double binary_entropy(double e);

/// Lower bound on Q_1^(nt)/Q^(nt): (r2 - r - (r2 - r0) x)/(r2 - r1).
/// May be negative.
double xi(double x, const RateSummary& obs, const TriggerOdds& odds);

/// min{eps_t(x), eps_nt(x)} without clamping, the actual upper bound on e_1:
///   eps_t  = (2 r E_t - r0 x)/(2 r1 xi)
///   eps_nt = (2 E_nt - x)/(2 xi)
/// Empty when xi_val <= 0 (no single-photon lower bound).
std::optional<double> eps_bound_raw(double x, const RateSummary& obs,
                                    const TriggerOdds& odds, double xi_val);

/// eps_bound_raw clamped into [0, 1/2]; a QBER of 1/2 earns no key.
std::optional<double> eps_bound(double x, const RateSummary& obs,
                                const TriggerOdds& odds, double xi_val);

/// vacuum_weight * x + single_weight * max(xi, 0) [1 - H2(eps(x))]: the
/// quantity minimized over x. Weights (r0, r1) give the triggered-only rate,
/// (1 + r0, 1 + r1) the both-sets rate.
double bound_objective(double x, const RateSummary& obs,
                       const TriggerOdds& odds, double vacuum_weight,
                       double single_weight);

/// R_t = q{-Q_t f(E_t) H2(E_t) + Q_nt min_x[r0 x + r1 xi (1 - H2(eps))]}.
PartialKeyRate key_rate_triggered(const RateSummary& obs, const SourceStats& src,
                                  const ProtocolConstants& consts,
                                  const MinimizerPolicy& minimizer = {});

/// Error correction separately on both sets, privacy amplification jointly:
/// R_both = q{-Q_t f H2(E_t) - Q_nt f H2(E_nt)
///            + Q_nt min_x[(1+r0) x + (1+r1) xi (1 - H2(eps))]}.
PartialKeyRate key_rate_both(const RateSummary& obs, const SourceStats& src,
                             const ProtocolConstants& consts,
                             const MinimizerPolicy& minimizer = {});

/// R = max{R_t, R_both, 0} and which strategy achieved it.
KeyRateResult final_rate(const PartialKeyRate& rt, const PartialKeyRate& rboth);

/// Both strategies plus the final selection for one set of observables.
KeyRateResult key_rates(const RateSummary& obs, const SourceStats& src,
                        const ProtocolConstants& consts,
                        const MinimizerPolicy& minimizer = {});

/// Conventional analysis from triggered data only. Multi-photon detections
/// are bounded by p_multi^(t) = sum_{n>=2} p_n^(t), vacuum gets no credit:
///   Q_1 >= Q_t - p_multi^(t),  e_1 <= Q_t E_t / Q_1.
/// Returns the leakage-only (non-positive) rate when Q_t <= p_multi^(t).
double key_rate_conventional(const RateSummary& obs, const SourceStats& src,
                             const ProtocolConstants& consts);

/// GLLP rate for a source emitting exactly one photon per pulse.
double key_rate_ideal_single_photon(const ChannelParams& ch,
                                    const ProtocolConstants& consts);

}  // namespace pdcqkd
