#include "pdcqkd/photon_source.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "pdcqkd/error.hpp"

namespace pdcqkd {

void SourceParams::validate() const {
  if (!std::isfinite(mu) || mu < 0.0) {
    throw ValidationError("mu must be finite and >= 0 (got " +
                          std::to_string(mu) + ")");
  }
  if (!(eta_A >= 0.0 && eta_A <= 1.0)) {
    throw ValidationError("eta_A must lie in [0, 1] (got " +
                          std::to_string(eta_A) + ")");
  }
  if (!(d_A >= 0.0 && d_A < 1.0)) {
    throw ValidationError("d_A must lie in [0, 1) (got " +
                          std::to_string(d_A) + ")");
  }
}

double photon_number_dist(const SourceParams& params, std::size_t n) {
  const double mu = params.mu;
  if (mu == 0.0) return n == 0 ? 1.0 : 0.0;
  const auto k = static_cast<double>(n);
  return std::exp(k * std::log(mu) - (k + 1.0) * std::log1p(mu));
}

double no_trigger_prob(const SourceParams& params, std::size_t n) {
  if (n == 0) return 1.0 - params.d_A;
  const auto k = static_cast<double>(n);
  return (1.0 - params.d_A) * std::exp(k * std::log1p(-params.eta_A));
}

double trigger_prob(const SourceParams& params, std::size_t n) {
  // d_A + (1-d_A)(1-(1-eta_A)^n) keeps full precision for small d_A, eta_A.
  if (n == 0) return params.d_A;
  const auto k = static_cast<double>(n);
  const double miss_all = -std::expm1(k * std::log1p(-params.eta_A));
  return params.d_A + (1.0 - params.d_A) * miss_all;
}

double trigger_odds(const SourceParams& params, std::size_t n) {
  const double quiet = no_trigger_prob(params, n);
  if (quiet <= 0.0) {
    std::ostringstream os;
    os << "trigger odds r_" << n
       << " unbounded: gamma_n = 1 (eta_A = 1); use the ideal-trigger "
          "baseline instead";
    throw NumericalError(os.str());
  }
  return trigger_prob(params, n) / quiet;
}

std::size_t truncation_order(double mu, const TailPolicy& policy) {
  constexpr std::size_t min_order = 2;
  if (mu == 0.0) return min_order;
  const double log_ratio = std::log(mu) - std::log1p(mu);
  const double log_tol = std::log(policy.tolerance);
  // tail(N) = exp((N+1) log_ratio) < tol  <=>  N + 1 > log_tol / log_ratio
  const double bound = log_tol / log_ratio;
  if (!(bound < static_cast<double>(policy.max_photons))) {
    const double tail = std::exp(
        (static_cast<double>(policy.max_photons) + 1.0) * log_ratio);
    std::ostringstream os;
    os << "photon-number truncation failed: cap " << policy.max_photons
       << " reached with tail mass " << tail << " >= tolerance "
       << policy.tolerance << " (mu = " << mu << ")";
    throw TruncationError(os.str(), tail);
  }
  auto order = static_cast<std::size_t>(std::floor(bound));
  while (order > 0 &&
         static_cast<double>(order) * log_ratio < log_tol) {
    --order;
  }
  while (static_cast<double>(order + 1) * log_ratio >= log_tol) ++order;
  return std::max(order, min_order);
}

SourceStats source_stats(const SourceParams& params, const TailPolicy& policy) {
  params.validate();
  const std::size_t order = truncation_order(params.mu, policy);
  const std::size_t count = order + 1;

  SourceStats s;
  s.params = params;
  s.p.resize(count);
  s.gamma.resize(count);
  s.no_gamma.resize(count);
  s.odds.resize(count);
  s.p_t.resize(count);
  s.p_nt.resize(count);

  const double ratio = params.mu / (1.0 + params.mu);
  double pn = 1.0 / (1.0 + params.mu);
  for (std::size_t n = 0; n < count; ++n) {
    s.p[n] = pn;
    s.gamma[n] = trigger_prob(params, n);
    s.no_gamma[n] = no_trigger_prob(params, n);
    s.odds[n] = s.no_gamma[n] > 0.0 ? s.gamma[n] / s.no_gamma[n]
                                    : std::numeric_limits<double>::infinity();
    s.p_t[n] = pn * s.gamma[n];
    s.p_nt[n] = pn * s.no_gamma[n];
    pn *= ratio;
  }
  s.tail_mass = params.mu == 0.0
                    ? 0.0
                    : std::exp(static_cast<double>(count) *
                               (std::log(params.mu) - std::log1p(params.mu)));
  return s;
}

}  // namespace pdcqkd
