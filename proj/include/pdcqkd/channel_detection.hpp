#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "pdcqkd/photon_source.hpp"

namespace pdcqkd {

/// Fiber plus Bob's two threshold detectors. Both detectors share the same
/// efficiency eta_B and background probability p_d.
struct ChannelParams {
  double alpha = 0.0;      ///< fiber loss, dB/km
  double length_km = 0.0;  ///< distance l
  double eta_B = 1.0;      ///< Bob's detector efficiency
  double p_d = 0.0;        ///< background (dark + stray) probability per detector per pulse
  double e_d = 0.0;        ///< probability a photon hits the wrong detector

  void validate() const;

  /// eta_c = 10^(-alpha l / 10)
  double transmittance() const;
  /// eta = eta_c eta_B
  double efficiency() const;
};

/// Per-photon-number detections split by trigger outcome.
struct PerPhotonRates {
  std::vector<double> Q_t;  ///< Q_n^(t)
  std::vector<double> Q_nt; ///< Q_n^(nt)
  std::vector<double> e;    ///< e_n
};

/// The four protocol observables and r = Q_t/Q_nt.
struct RateSummary {
  double Q_t = 0.0;
  double E_t = 0.0;
  double Q_nt = 0.0;
  double E_nt = 0.0;
  double r = 0.0;
  std::optional<PerPhotonRates> per_n;
};

/// Y_n = 1 - (1-eta)^n (1-p_d)^2: detection probability given n photons sent.
double yield_n(const ChannelParams& ch, std::size_t n);

/// Y_n e_n = 1/2 {1 - (1-eta)^n (1-p_d)^2
///                - (1-p_d)[(1-eta e_d)^n - (1-eta+eta e_d)^n]}.
/// Double clicks are already folded in as random bits.
double error_weighted_yield_n(const ChannelParams& ch, std::size_t n);

/// Aggregates per-n detections into observables. Throws DegenerateObservables
/// if Q_t or Q_nt is zero. Keeps the per-n vectors as diagnostics.
RateSummary aggregate(std::span<const double> Q_t_n,
                      std::span<const double> Q_nt_n,
                      std::span<const double> e_n);

/// Truncated-sum observables over the photon numbers held in `src`.
RateSummary observables(const SourceStats& src, const ChannelParams& ch);

/// Same observables from the geometric generating function
/// G(z) = 1/(1 + mu(1 - z)); no truncation. No per-n diagnostics.
RateSummary observables_closed_form(const SourceParams& params,
                                    const ChannelParams& ch);

}  // namespace pdcqkd
