#include "pdcqkd/montecarlo.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <sstream>

#include "pdcqkd/detail/parallel.hpp"
#include "pdcqkd/error.hpp"

namespace pdcqkd {

namespace {

double uniform(std::mt19937_64& eng) {
  return static_cast<double>(eng() >> 11) * 0x1.0p-53;
}

std::mt19937_64 batch_engine(std::uint64_t seed, std::uint64_t batch) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed),
                    static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(batch),
                    static_cast<std::uint32_t>(batch >> 32)};
  return std::mt19937_64(seq);
}

struct BatchTally {
  CellCounts cells;
  PhotonTally per_n;
};

class PulseModel {
 public:
  PulseModel(const SimConfig& config, const SourceStats& stats)
      : config_(config), stats_(stats) {
    const double mu = config.source.mu;
    log_ratio_ = mu > 0.0 ? std::log(mu) - std::log1p(mu)
                          : -std::numeric_limits<double>::infinity();
    eta_ = config.channel.efficiency();
    wrong_ = eta_ * config.channel.e_d;
  }

  void run(std::mt19937_64& eng, std::uint64_t pulses, BatchTally& out) const {
    for (std::uint64_t i = 0; i < pulses; ++i) pulse(eng, out);
  }

 private:
  std::size_t sample_photons(std::mt19937_64& eng) const {
    if (std::isinf(log_ratio_)) return 0;
    // P(n >= k) = (mu/(1+mu))^k
    const double n = std::floor(std::log1p(-uniform(eng)) / log_ratio_);
    return n < 1e9 ? static_cast<std::size_t>(n) : std::size_t{1000000000};
  }

  double gamma(std::size_t n) const {
    return n < stats_.size() ? stats_.gamma[n] : trigger_prob(config_.source, n);
  }

  void pulse(std::mt19937_64& eng, BatchTally& out) const {
    const std::size_t n = sample_photons(eng);
    const bool triggered = uniform(eng) < gamma(n);
    bool detected = false;
    bool error = false;
    if (config_.attack) {
      detected = uniform(eng) < config_.attack->yield(n);
      error = detected && uniform(eng) < config_.attack->error(n);
    } else {
      bool correct_click = uniform(eng) < config_.channel.p_d;
      bool wrong_click = uniform(eng) < config_.channel.p_d;
      for (std::size_t k = 0; k < n; ++k) {
        const double u = uniform(eng);
        if (u < wrong_) {
          wrong_click = true;
        } else if (u < eta_) {
          correct_click = true;
        }
      }
      detected = correct_click || wrong_click;
      if (correct_click && wrong_click) {
        error = uniform(eng) < 0.5;
      } else {
        error = wrong_click;
      }
    }
    out.cells.counts[CellCounts::index(triggered, detected, error)]++;
    if (n >= out.per_n.size()) out.per_n.resize(n + 1);
    auto& sent = triggered ? out.per_n.sent_t : out.per_n.sent_nt;
    auto& det = triggered ? out.per_n.detected_t : out.per_n.detected_nt;
    auto& err = triggered ? out.per_n.errors_t : out.per_n.errors_nt;
    sent[n]++;
    if (detected) det[n]++;
    if (error) err[n]++;
  }

  const SimConfig& config_;
  const SourceStats& stats_;
  double log_ratio_;
  double eta_;
  double wrong_;
};

}  // namespace

void AttackScenario::validate() const {
  if (yields.empty() || yields.size() != errors.size()) {
    throw ValidationError("attack vectors must be non-empty and equally long");
  }
  for (std::size_t n = 0; n < yields.size(); ++n) {
    if (!(yields[n] >= 0.0 && yields[n] <= 1.0) ||
        !(errors[n] >= 0.0 && errors[n] <= 1.0)) {
      std::ostringstream os;
      os << "attack entries must lie in [0,1] (n = " << n << ")";
      throw ValidationError(os.str());
    }
  }
  if (errors[0] != 0.5) throw ValidationError("attack must keep e_0 = 1/2");
}

double AttackScenario::yield(std::size_t n) const {
  return yields[std::min(n, yields.size() - 1)];
}

double AttackScenario::error(std::size_t n) const {
  return errors[std::min(n, errors.size() - 1)];
}

void SimConfig::validate() const {
  if (pulses < 1) throw ValidationError("pulses must be >= 1");
  source.validate();
  channel.validate();
  if (attack) attack->validate();
}

std::uint64_t CellCounts::total() const {
  std::uint64_t t = 0;
  for (auto c : counts) t += c;
  return t;
}

void PhotonTally::resize(std::size_t count) {
  for (auto* v : {&sent_t, &sent_nt, &detected_t, &detected_nt, &errors_t,
                  &errors_nt}) {
    v->resize(count, 0);
  }
}

void PhotonTally::merge(const PhotonTally& other) {
  if (other.size() > size()) resize(other.size());
  for (std::size_t n = 0; n < other.size(); ++n) {
    sent_t[n] += other.sent_t[n];
    sent_nt[n] += other.sent_nt[n];
    detected_t[n] += other.detected_t[n];
    detected_nt[n] += other.detected_nt[n];
    errors_t[n] += other.errors_t[n];
    errors_nt[n] += other.errors_nt[n];
  }
}

RateSummary EmpiricalSummary::to_rate_summary() const {
  RateSummary s;
  s.Q_t = Q_t.value;
  s.E_t = E_t.value;
  s.Q_nt = Q_nt.value;
  s.E_nt = E_nt.value;
  s.r = r.value;
  return s;
}

EmpiricalSummary summarize(const CellCounts& cells) {
  const auto total = static_cast<double>(cells.total());
  const auto det_t = static_cast<double>(cells.at(true, true, false) +
                                         cells.at(true, true, true));
  const auto det_nt = static_cast<double>(cells.at(false, true, false) +
                                          cells.at(false, true, true));
  const auto err_t = static_cast<double>(cells.at(true, true, true));
  const auto err_nt = static_cast<double>(cells.at(false, true, true));

  auto proportion = [](double hits, double trials) {
    if (!(trials > 0.0)) return Estimate{0.5, 0.5};
    const double p = hits / trials;
    return Estimate{p, std::sqrt(p * (1.0 - p) / trials)};
  };
  EmpiricalSummary s;
  s.Q_t = proportion(det_t, total);
  s.Q_nt = proportion(det_nt, total);
  s.E_t = proportion(err_t, det_t);
  s.E_nt = proportion(err_nt, det_nt);
  if (det_nt > 0.0 && det_t > 0.0) {
    const double r = det_t / det_nt;
    const double rel_var = (1.0 - s.Q_t.value) / det_t +
                           (1.0 - s.Q_nt.value) / det_nt + 2.0 / total;
    s.r = {r, r * std::sqrt(rel_var)};
  } else {
    s.r = {det_nt > 0.0 ? 0.0 : std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  }
  return s;
}

SimResult simulate(const SimConfig& config) {
  config.validate();
  const SourceStats stats = source_stats(config.source, config.tail);
  const PulseModel model(config, stats);

  const std::uint64_t batches =
      (config.pulses + pulses_per_batch - 1) / pulses_per_batch;
  std::vector<BatchTally> tallies(batches);
  detail::parallel_for(batches, config.threads, [&](std::size_t b) {
    const std::uint64_t first = b * pulses_per_batch;
    const std::uint64_t count =
        std::min(pulses_per_batch, config.pulses - first);
    auto eng = batch_engine(config.seed, b);
    tallies[b].per_n.resize(stats.size());
    model.run(eng, count, tallies[b]);
  });

  SimResult out;
  out.pulses = config.pulses;
  out.seed = config.seed;
  out.rng = std::string(rng_algorithm);
  out.per_n.resize(stats.size());
  for (const auto& t : tallies) {
    for (std::size_t i = 0; i < out.cells.counts.size(); ++i) {
      out.cells.counts[i] += t.cells.counts[i];
    }
    out.per_n.merge(t.per_n);
  }
  out.summary = summarize(out.cells);
  return out;
}

AttackScenario pns_attack_vector(const SourceStats& src, const ChannelParams& ch,
                                 double block_fraction) {
  if (!(block_fraction >= 0.0 && block_fraction <= 1.0)) {
    throw ValidationError("block_fraction must lie in [0, 1]");
  }
  ch.validate();
  AttackScenario a;
  const std::size_t count = src.size();
  a.yields.resize(count);
  a.errors.resize(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double y = yield_n(ch, n);
    a.errors[n] = n == 0 || !(y > 0.0) ? 0.5 : error_weighted_yield_n(ch, n) / y;
    a.yields[n] = n == 0 ? y : n == 1 ? (1.0 - block_fraction) * y : 1.0;
  }
  std::ostringstream os;
  os << "minimal-pns(block_fraction=" << block_fraction << ")";
  a.description = os.str();
  return a;
}

AttackScenario match_triggered_rate(const AttackScenario& attack,
                                    const SourceStats& src, double target_Q_t) {
  attack.validate();
  double base = 0.0, multi = 0.0;
  for (std::size_t n = 0; n < src.size(); ++n) {
    (n < 2 ? base : multi) += src.p_t[n] * attack.yield(n);
  }
  const double forward = (target_Q_t - base) / multi;
  if (!(multi > 0.0) || !(forward >= 0.0 && forward <= 1.0)) {
    std::ostringstream os;
    os << "cannot match Q_t = " << target_Q_t
       << " with a multi-photon forwarding probability in [0, 1]";
    throw ValidationError(os.str());
  }
  AttackScenario out = attack;
  for (std::size_t n = 2; n < out.yields.size(); ++n) {
    out.yields[n] = forward * attack.yield(n);
  }
  std::ostringstream os;
  os << attack.description << "+forward=" << forward;
  out.description = os.str();
  return out;
}

RateSummary expected_observables(const SourceStats& src,
                                 const AttackScenario& attack) {
  attack.validate();
  const std::size_t count = src.size();
  std::vector<double> Q_t_n(count), Q_nt_n(count), e_n(count);
  for (std::size_t n = 0; n < count; ++n) {
    Q_t_n[n] = src.p_t[n] * attack.yield(n);
    Q_nt_n[n] = src.p_nt[n] * attack.yield(n);
    e_n[n] = attack.error(n);
  }
  return aggregate(Q_t_n, Q_nt_n, e_n);
}

}  // namespace pdcqkd
