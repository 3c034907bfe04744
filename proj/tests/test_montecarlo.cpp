#include <doctest.h>

#include <cmath>
#include <numeric>

#include "oracles.hpp"
#include "pdcqkd/channel_detection.hpp"
#include "pdcqkd/error.hpp"
#include "pdcqkd/montecarlo.hpp"
#include "pdcqkd/security_bounds.hpp"

using namespace pdcqkd;

namespace {

ChannelParams fiber(double l) { return {0.21, l, 0.045, 8.5e-7, 0.033}; }

SimConfig honest(std::uint64_t pulses, double l = 20.0) {
  SimConfig c;
  c.pulses = pulses;
  c.seed = 12345;
  c.source = {0.19, 0.5, 1e-6};
  c.channel = fiber(l);
  return c;
}

double z(const Estimate& e, double expected) { return (e.value - expected) / e.std_err; }

// Detection and error probabilities for n photons under the per-photon fate
// model, by enumerating every photon fate and both background clicks.
void enumerate_fates(const ChannelParams& ch, int n, double& detect, double& error) {
  const double eta = ch.efficiency();
  const double fate[3] = {1.0 - eta, eta * (1.0 - ch.e_d), eta * ch.e_d};  // lost, right, wrong
  detect = error = 0.0;
  int total = 1;
  for (int k = 0; k < n; ++k) total *= 3;
  for (int code = 0; code < total; ++code) {
    double p = 1.0;
    bool right = false, wrong = false;
    for (int k = 0, c = code; k < n; ++k, c /= 3) {
      p *= fate[c % 3];
      right |= c % 3 == 1;
      wrong |= c % 3 == 2;
    }
    for (int bg = 0; bg < 4; ++bg) {
      const bool bg_right = bg & 1, bg_wrong = bg & 2;
      const double q = p * (bg_right ? ch.p_d : 1 - ch.p_d) * (bg_wrong ? ch.p_d : 1 - ch.p_d);
      const bool r = right || bg_right, w = wrong || bg_wrong;
      if (r || w) detect += q;
      if (r && w) error += 0.5 * q;
      else if (w) error += q;
    }
  }
}

}  // namespace

TEST_CASE("photon fate model reproduces the closed-form yields") {
  const ChannelParams cases[] = {fiber(0), fiber(20), fiber(150), {0.0, 0.0, 1.0, 0.0, 0.033},
                                 {0.1, 3.0, 0.7, 0.02, 0.25}, {0.2, 0.0, 0.9, 0.3, 0.5}};
  for (const auto& ch : cases) {
    for (int n = 0; n <= 9; ++n) {
      double d, e;
      enumerate_fates(ch, n, d, e);
      CHECK(d == doctest::Approx(yield_n(ch, n)).epsilon(1e-12));
      CHECK(e == doctest::Approx(error_weighted_yield_n(ch, n)).epsilon(1e-11));
    }
  }
}

TEST_CASE("single pulse touches exactly one cell") {
  const SimResult r = simulate(honest(1));
  CHECK(r.cells.total() == 1);
  CHECK(std::count(r.cells.counts.begin(), r.cells.counts.end(), 1u) == 1);
}

TEST_CASE("blocked channel gives no detections") {
  SimConfig c = honest(100000);
  c.attack = AttackScenario{{0.0}, {0.5}, "block all"};
  const SimResult r = simulate(c);
  for (bool t : {false, true}) {
    CHECK(r.cells.at(t, true, false) == 0);
    CHECK(r.cells.at(t, true, true) == 0);
  }
  CHECK(r.cells.total() == 100000);
}

TEST_CASE("reproducible across runs and thread counts") {
  SimConfig c = honest(3 * pulses_per_batch + 12345);
  c.threads = 1;
  const SimResult a = simulate(c);
  c.threads = 4;
  const SimResult b = simulate(c);
  CHECK(a.cells.counts == b.cells.counts);
  CHECK(a.per_n.detected_t == b.per_n.detected_t);
  CHECK(a.per_n.errors_nt == b.per_n.errors_nt);
  CHECK(a.rng == b.rng);
  CHECK(a.cells.total() == c.pulses);
  CHECK(a.cells.at(false, false, true) == 0);
  CHECK(a.cells.at(true, false, true) == 0);
  c.seed += 1;
  CHECK(simulate(c).cells.counts != a.cells.counts);
}

TEST_CASE("honest run matches analytic observables") {
  SimConfig c = honest(2000000);
  c.threads = 0;
  const SimResult r = simulate(c);
  const RateSummary a = observables_closed_form(c.source, c.channel);
  const auto& s = r.summary;
  CHECK(std::abs(z(s.Q_t, a.Q_t)) < 5);
  CHECK(std::abs(z(s.E_t, a.E_t)) < 5);
  CHECK(std::abs(z(s.Q_nt, a.Q_nt)) < 5);
  CHECK(std::abs(z(s.E_nt, a.E_nt)) < 5);
  CHECK(std::abs(z(s.r, a.r)) < 5);
}

TEST_CASE("per-n trigger ratios follow the trigger odds") {
  SimConfig c = honest(1000000);
  c.source.mu = 1.0;  // populate several photon numbers
  const SimResult r = simulate(c);
  const SourceStats st = source_stats(c.source);
  double chi2 = 0.0;
  int dof = 0;
  for (std::size_t n = 0; n < r.per_n.size() && n < st.size(); ++n) {
    const double total = static_cast<double>(r.per_n.sent_t[n] + r.per_n.sent_nt[n]);
    const double et = total * st.gamma[n], ent = total * st.no_gamma[n];
    if (et < 5 || ent < 5) continue;
    chi2 += std::pow(r.per_n.sent_t[n] - et, 2) / et + std::pow(r.per_n.sent_nt[n] - ent, 2) / ent;
    ++dof;
    if (r.per_n.sent_nt[n] > 1000)
      CHECK(static_cast<double>(r.per_n.sent_t[n]) / r.per_n.sent_nt[n] ==
            doctest::Approx(st.odds[n]).epsilon(0.1));
  }
  REQUIRE(dof >= 5);
  CHECK(chi2 < dof + 5 * std::sqrt(2.0 * dof));
}

TEST_CASE("per-n detection frequencies follow the yields") {
  SimConfig c = honest(2000000, 0.0);
  c.source.mu = 1.0;
  const SimResult r = simulate(c);
  for (std::size_t n = 1; n < 6; ++n) {
    const double sent = static_cast<double>(r.per_n.sent_t[n] + r.per_n.sent_nt[n]);
    const double det = static_cast<double>(r.per_n.detected_t[n] + r.per_n.detected_nt[n]);
    const double err = static_cast<double>(r.per_n.errors_t[n] + r.per_n.errors_nt[n]);
    const double y = yield_n(c.channel, n);
    CHECK(std::abs(det - sent * y) < 5 * std::sqrt(sent * y * (1 - y)));
    const double en = error_weighted_yield_n(c.channel, n) / y;
    CHECK(std::abs(err - det * en) < 5 * std::sqrt(det * en * (1 - en)) + 1);
  }
}

TEST_CASE("summary of empty cells") {
  CellCounts cells;
  cells.counts[CellCounts::index(true, false, false)] = 10;
  cells.counts[CellCounts::index(false, false, false)] = 10;
  const EmpiricalSummary s = summarize(cells);
  CHECK(s.Q_t.value == 0.0);
  CHECK(s.E_t.value == 0.5);
}

TEST_CASE("attack scenario validation") {
  CHECK_THROWS_AS(AttackScenario({{0.1, 0.2}, {0.3, 0.1}, ""}).validate(), ValidationError);
  CHECK_THROWS_AS(AttackScenario({{0.1, 1.2}, {0.5, 0.1}, ""}).validate(), ValidationError);
  CHECK_THROWS_AS(AttackScenario({{0.1}, {0.5, 0.1}, ""}).validate(), ValidationError);
  CHECK_NOTHROW(AttackScenario({{0.1, 0.2}, {0.5, 0.1}, ""}).validate());
}

TEST_CASE("photon-number-splitting vectors") {
  const SourceStats s = source_stats({0.19, 0.5, 1e-6});
  const ChannelParams lossless{0.0, 0.0, 1.0, 1e-6, 0.02};
  const AttackScenario none = pns_attack_vector(s, lossless, 0.0);
  for (std::size_t n = 0; n < 8; ++n) CHECK(none.yield(n) == doctest::Approx(yield_n(lossless, n)));
  const RateSummary h = observables_closed_form(s.params, lossless);
  const RateSummary a = expected_observables(s, none);
  CHECK(a.r == doctest::Approx(h.r).epsilon(1e-9));
  CHECK(a.Q_t == doctest::Approx(h.Q_t).epsilon(1e-9));

  const ChannelParams ch = fiber(20);
  const AttackScenario full = pns_attack_vector(s, ch, 1.0);
  CHECK(full.yield(1) == 0.0);
  CHECK(full.yield(2) == 1.0);
  CHECK(full.error(0) == 0.5);
  CHECK(full.yield(0) == doctest::Approx(yield_n(ch, 0)));
  const RateSummary honest_obs = observables_closed_form(s.params, ch);
  CHECK(expected_observables(s, full).r > honest_obs.r);

  const AttackScenario matched = match_triggered_rate(full, s, honest_obs.Q_t);
  const RateSummary m = expected_observables(s, matched);
  CHECK(m.Q_t == doctest::Approx(honest_obs.Q_t).epsilon(1e-9));
  CHECK(m.r > honest_obs.r);
  const double attacked = key_rate_triggered(m, s, {}).rate;
  const double clean = key_rate_triggered(honest_obs, s, {}).rate;
  CHECK(attacked < clean);
  CHECK_THROWS_AS(match_triggered_rate(full, s, 0.9), ValidationError);
}

TEST_CASE("bounds hold on simulated truth") {
  for (bool attacked : {false, true}) {
    SimConfig c = honest(4000000);
    c.threads = 0;
    const SourceStats st = source_stats(c.source);
    if (attacked) {
      const auto honest_q = observables_closed_form(c.source, c.channel).Q_t;
      c.attack = match_triggered_rate(pns_attack_vector(st, c.channel, 0.7), st, honest_q);
    }
    const SimResult r = simulate(c);
    const RateSummary obs = r.summary.to_rate_summary();
    const double det_nt = static_cast<double>(std::accumulate(
        r.per_n.detected_nt.begin(), r.per_n.detected_nt.end(), std::uint64_t{0}));
    const double x_true = r.per_n.detected_nt[0] / det_nt;
    const double q1 = r.per_n.detected_nt[1] / det_nt;
    const double det1 = static_cast<double>(r.per_n.detected_t[1] + r.per_n.detected_nt[1]);
    const double e1 = (r.per_n.errors_t[1] + r.per_n.errors_nt[1]) / det1;

    const TriggerOdds odds = trigger_odds_of(st);
    const double k = (odds.r2 - odds.r0) / (odds.r2 - odds.r1);
    const double sd_x = std::sqrt(x_true * (1 - x_true) / det_nt);
    const double sd_q1 = std::sqrt(q1 * (1 - q1) / det_nt);
    const double sd_xi = (r.summary.r.std_err + (odds.r2 - odds.r0) * sd_x) / (odds.r2 - odds.r1);
    const double xv = xi(x_true, obs, odds);
    CHECK(xv <= q1 + 5 * (sd_q1 + sd_xi));
    if (xv > 10 * sd_xi) {
      const double eps = *eps_bound_raw(x_true, obs, odds, xv);
      const double sd_eps = eps * (sd_xi / xv + r.summary.E_t.std_err / obs.E_t +
                                   r.summary.E_nt.std_err / obs.E_nt) + k * sd_x;
      const double sd_e1 = std::sqrt(e1 * (1 - e1) / det1);
      CHECK(eps >= e1 - 5 * (sd_eps + sd_e1));
    }
  }
}
