#pragma once

#include <cstddef>
#include <vector>

namespace pdcqkd {

/// Heralded PDC source: thermal pair statistics plus Alice's threshold
/// trigger detector D_A. Loss between crystal and D_A is folded into eta_A.
struct SourceParams {
  double mu = 0.0;     ///< mean photon-pair number per pulse
  double eta_A = 0.0;  ///< trigger detector efficiency
  double d_A = 0.0;    ///< trigger dark-count probability per pulse

  /// Throws ValidationError unless mu >= 0, 0 <= eta_A <= 1, 0 <= d_A < 1.
  void validate() const;
};

/// Where to cut the photon-number sums. The thermal tail beyond N is exactly
/// (mu/(1+mu))^(N+1), so N is the first index bringing that below tolerance.
struct TailPolicy {
  double tolerance = 1e-14;
  std::size_t max_photons = 100000;
};

struct SourceStats {
  SourceParams params;
  std::vector<double> p;         ///< p_n
  std::vector<double> gamma;     ///< trigger probability gamma_n
  std::vector<double> no_gamma;  ///< 1 - gamma_n, computed without cancellation
  std::vector<double> odds;      ///< r_n = gamma_n/(1-gamma_n); +inf when gamma_n == 1
  std::vector<double> p_t;       ///< p_n gamma_n
  std::vector<double> p_nt;      ///< p_n (1-gamma_n)
  double tail_mass = 0.0;        ///< analytic mass beyond n_max()

  std::size_t size() const noexcept { return p.size(); }
  std::size_t n_max() const noexcept { return p.size() - 1; }
};

/// p_n = mu^n (1+mu)^-(n+1).
double photon_number_dist(const SourceParams& params, std::size_t n);

/// gamma_n = 1 - (1-d_A)(1-eta_A)^n.
double trigger_prob(const SourceParams& params, std::size_t n);

/// 1 - gamma_n evaluated as (1-d_A)(1-eta_A)^n.
double no_trigger_prob(const SourceParams& params, std::size_t n);

/// r_n = gamma_n/(1-gamma_n). Throws NumericalError when gamma_n == 1
/// (eta_A == 1 and n >= 1): the odds are unbounded.
double trigger_odds(const SourceParams& params, std::size_t n);

/// Smallest N with (mu/(1+mu))^(N+1) < tolerance, never below 2.
/// Throws TruncationError if the cap is reached first.
std::size_t truncation_order(double mu, const TailPolicy& policy = {});

SourceStats source_stats(const SourceParams& params,
                         const TailPolicy& policy = {});

}  // namespace pdcqkd
