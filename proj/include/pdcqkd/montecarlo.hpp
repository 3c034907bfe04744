#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pdcqkd/channel_detection.hpp"
#include "pdcqkd/photon_source.hpp"

namespace pdcqkd {

/// Pulses are simulated in fixed batches; batch b draws from its own
/// mt19937_64 seeded with seed_seq{seed lo32, seed hi32, b lo32, b hi32}.
/// Results are therefore identical for any thread count.
inline constexpr std::string_view rng_algorithm =
    "mt19937_64/seed_seq(seed_lo,seed_hi,batch_lo,batch_hi)/batch=1048576";
inline constexpr std::uint64_t pulses_per_batch = std::uint64_t{1} << 20;

/// Per-photon-number yields and error rates imposed by an adversary.
/// Entries beyond the vector length reuse the last entry.
struct AttackScenario {
  std::vector<double> yields;  ///< Y_n in [0,1]
  std::vector<double> errors;  ///< e_n in [0,1], e_0 = 1/2
  std::string description;

  /// Throws ValidationError on length mismatch, out-of-range values or e_0 != 1/2.
  void validate() const;
  double yield(std::size_t n) const;
  double error(std::size_t n) const;
};

struct SimConfig {
  std::uint64_t pulses = 1;
  std::uint64_t seed = 0;
  SourceParams source;
  ChannelParams channel;
  std::optional<AttackScenario> attack;
  TailPolicy tail;
  unsigned threads = 1;  ///< 0 = hardware concurrency

  void validate() const;
};

/// Outcome counts indexed by (triggered, detected, error). The
/// (detected = false, error = true) cells stay zero.
struct CellCounts {
  std::array<std::uint64_t, 8> counts{};

  static constexpr std::size_t index(bool triggered, bool detected, bool error) {
    return (triggered ? 4u : 0u) + (detected ? 2u : 0u) + (error ? 1u : 0u);
  }
  std::uint64_t at(bool triggered, bool detected, bool error) const {
    return counts[index(triggered, detected, error)];
  }
  std::uint64_t total() const;
};

/// Simulation-side truth per photon number.
struct PhotonTally {
  std::vector<std::uint64_t> sent_t, sent_nt;
  std::vector<std::uint64_t> detected_t, detected_nt;
  std::vector<std::uint64_t> errors_t, errors_nt;

  void resize(std::size_t count);
  void merge(const PhotonTally& other);
  std::size_t size() const noexcept { return sent_t.size(); }
};

struct Estimate {
  double value = 0.0;
  double std_err = 0.0;
};

/// Empirical observables with binomial standard errors. The error on r uses
/// the multinomial delta method.
struct EmpiricalSummary {
  Estimate Q_t, E_t, Q_nt, E_nt, r;

  RateSummary to_rate_summary() const;
};

struct SimResult {
  std::uint64_t pulses = 0;
  std::uint64_t seed = 0;
  std::string rng;
  CellCounts cells;
  PhotonTally per_n;
  EmpiricalSummary summary;
};

/// Pulse-level simulation. Without an attack each emitted photon is lost,
/// reaches the correct detector or the wrong one (probability eta e_d) and
/// each detector also fires on background p_d; a double click is a random
/// bit. With an attack, detection and error follow Y_n and e_n directly.
SimResult simulate(const SimConfig& config);

EmpiricalSummary summarize(const CellCounts& cells);

/// Minimal photon-number-splitting model: Eve blocks a fraction of
/// single-photon pulses and forwards one split photon of every multi-photon
/// pulse losslessly. Y_0 = Y_0(channel), Y_1 = (1 - block) Y_1(channel),
/// Y_n = 1 for n >= 2; e_n are the honest channel error rates.
AttackScenario pns_attack_vector(const SourceStats& src, const ChannelParams& ch,
                                 double block_fraction);

/// Scales the multi-photon forwarding probability so the attack reproduces
/// `target_Q_t`. Throws ValidationError if no probability in [0,1] does.
AttackScenario match_triggered_rate(const AttackScenario& attack,
                                    const SourceStats& src, double target_Q_t);

/// Expected observables under an attack: Q_n^(t) = p_n^(t) Y_n etc.
RateSummary expected_observables(const SourceStats& src,
                                 const AttackScenario& attack);

}  // namespace pdcqkd
