#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdcqkd/channel_detection.hpp"
#include "pdcqkd/photon_source.hpp"
#include "pdcqkd/security_bounds.hpp"

namespace pdcqkd {

enum class Protocol { efficient_pdc, conventional_pdc, ideal_single_photon };

std::string_view to_string(Protocol protocol);
std::optional<Protocol> parse_protocol(std::string_view name);

/// Log-spaced grid over [lo, hi] followed by golden-section refinement in
/// log mu down to rel_tol.
struct MuSearch {
  double lo = 1e-4;
  double hi = 2.0;
  std::size_t grid_points = 129;
  double rel_tol = 1e-4;

  /// The conventional analysis needs mu ~ eta, far below 1e-4 at long range.
  static MuSearch defaults_for(Protocol protocol);
};

struct SweepSpec {
  std::vector<double> distances_km;
  Protocol protocol = Protocol::efficient_pdc;
  SourceParams source;      ///< mu is used only when optimize_mu is false
  bool optimize_mu = true;
  ChannelParams channel;    ///< length_km is overwritten per distance
  ProtocolConstants constants;
  MuSearch mu_search;
  MinimizerPolicy minimizer;
  TailPolicy tail;
  unsigned threads = 1;     ///< 0 = hardware concurrency

  void validate() const;
};

/// Observables and rates at one (l, mu). For the conventional and ideal
/// protocols the rate lives in key.triggered and key.both.rate is NaN; the
/// ideal source reports its single-photon Q and E as Q_t and E_t with the
/// nontriggered fields NaN.
struct PointEvaluation {
  double l_km = 0.0;
  double mu = 0.0;
  RateSummary obs;
  KeyRateResult key;
};

PointEvaluation evaluate_point(const SweepSpec& spec, double l_km, double mu);

struct MuOptimum {
  double mu = 0.0;
  PointEvaluation eval;
  bool all_zero = false;  ///< no mu in the interval gives a positive rate
};

MuOptimum optimize_mu(double l_km, const SweepSpec& spec);

/// Evaluation at `l_km`, with mu optimized or fixed as `spec` says.
PointEvaluation evaluate_distance(const SweepSpec& spec, double l_km);

struct SweepRow {
  double l_km = 0.0;
  double mu = 0.0;
  double Q_t = 0.0;
  double E_t = 0.0;
  double Q_nt = 0.0;
  double E_nt = 0.0;
  double r = 0.0;
  double R_t = 0.0;
  double R_both = 0.0;
  double R_final = 0.0;
  double x_star = 0.0;
  bool all_zero = false;
  bool failed = false;
  std::string note;  ///< failure reason when failed
};

SweepRow make_row(const PointEvaluation& eval);

/// One row per distance in input order; failed distances get R_final = 0
/// and failed = true.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

/// Bisection on distance for the boundary of `holds`, which must be true at
/// lo and false at hi. Returns the midpoint of the final bracket, whose width
/// is at most resolution_km.
double bisect_distance(const SweepSpec& spec, double lo_km, double hi_km,
                       double resolution_km,
                       const std::function<bool(const PointEvaluation&)>& holds);

/// Largest distance with R_final > 0, to resolution_km. Throws
/// NumericalError if R_final is not positive at lo or not zero at hi.
double find_cutoff(const SweepSpec& spec, double lo_km, double hi_km,
                   double resolution_km = 0.1);

/// Distance where the selected strategy changes from both-sets to
/// triggered-only (efficient protocol only).
double find_strategy_switch(const SweepSpec& spec, double lo_km, double hi_km,
                            double resolution_km = 0.1);

}  // namespace pdcqkd
