#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "pdcqkd/channel_detection.hpp"
#include "pdcqkd/error.hpp"
#include "pdcqkd/photon_source.hpp"

using namespace pdcqkd;

namespace {

ChannelParams fiber(double l) { return {0.21, l, 0.045, 8.5e-7, 0.033}; }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

}  // namespace

TEST_CASE("yield edge cases") {
  CHECK(yield_n({0.0, 0.0, 1.0, 0.0, 0.0}, 1) == 1.0);
  const ChannelParams ch = fiber(20);
  const double bg = 1 - (1 - 8.5e-7) * (1 - 8.5e-7);
  CHECK(yield_n(ch, 0) == doctest::Approx(bg).epsilon(1e-14));
  CHECK(error_weighted_yield_n(ch, 0) == doctest::Approx(bg / 2).epsilon(1e-14));
  for (std::size_t n : {0, 1, 3, 10})
    CHECK(std::abs(error_weighted_yield_n({0.21, 30, 0.3, 0.0, 0.0}, n)) < 1e-16);
  // Lossless single photon errs with probability e_d.
  const ChannelParams perfect{0.0, 0.0, 1.0, 0.0, 0.033};
  CHECK(error_weighted_yield_n(perfect, 1) / yield_n(perfect, 1) == doctest::Approx(0.033).epsilon(1e-14));
}

TEST_CASE("yields pinned by 50-digit evaluation") {
  const ChannelParams ch = fiber(50);
  CHECK(ch.efficiency() == doctest::Approx(0.0040106292216018550952).epsilon(1e-14));
  const double Y[] = {1.6999992775e-6, 0.0040123224028125758412, 0.0080068596869392228409,
                      0.019894604644748059795};
  const double YE[] = {8.4999963875e-7, 0.00013319894693749120428, 0.00026501709168074783322,
                       0.00065731753171898890554};
  const std::size_t ns[] = {0, 1, 2, 5};
  for (int i = 0; i < 4; ++i) {
    CHECK(rel(yield_n(ch, ns[i]), Y[i]) < 1e-13);
    CHECK(rel(error_weighted_yield_n(ch, ns[i]), YE[i]) < 1e-12);
  }
}

TEST_CASE("observables pinned by 50-digit summation") {
  struct Case {
    SourceParams s;
    ChannelParams c;
    double Q_t, E_t, Q_nt, E_nt, r;
  };
  const Case cases[] = {
      {{0.19, 0.5, 1e-6}, fiber(50), 0.00044393057154692089902, 0.033154771309706830846,
       0.00031920745373870962181, 0.035270925284172933967, 1.3907274606134498449},
      {{0.05, 0.1, 1e-6}, fiber(120), 7.4864241098606177522e-7, 0.038276545440813247776,
       7.7461905159515237615e-6, 0.13497873626506619686, 0.096646527017945453707},
      {{1.3, 0.7, 1e-3}, {0.2, 5, 0.1, 1e-5, 0.01}, 0.085257497977171552012,
       0.010101268796975224257, 0.0083581686945046409541, 0.010609620639351246433,
       10.20049978570388999},
  };
  // The truncated sum is only as good as its tail cut relative to Q_t.
  const TailPolicy deep{1e-20, 100000};
  for (const auto& k : cases) {
    for (const RateSummary& o :
         {observables(source_stats(k.s, deep), k.c), observables_closed_form(k.s, k.c)}) {
      CHECK(rel(o.Q_t, k.Q_t) < 1e-12);
      CHECK(rel(o.E_t, k.E_t) < 1e-12);
      CHECK(rel(o.Q_nt, k.Q_nt) < 1e-12);
      CHECK(rel(o.E_nt, k.E_nt) < 1e-12);
      CHECK(rel(o.r, k.r) < 1e-12);
    }
  }
}

TEST_CASE("per-n triggered and nontriggered rates keep the trigger odds") {
  const SourceStats s = source_stats({0.3, 0.5, 1e-6});
  const RateSummary o = observables(s, fiber(20));
  REQUIRE(o.per_n.has_value());
  const auto& d = *o.per_n;
  CHECK(d.e[0] == 0.5);
  double qt = 0, qte = 0;
  for (std::size_t n = 0; n < s.size(); ++n) {
    if (d.Q_nt[n] > 0) CHECK(rel(d.Q_t[n], s.odds[n] * d.Q_nt[n]) < 1e-12);
    CHECK(d.e[n] >= 0.0);
    CHECK(d.e[n] <= 1.0);
    qt += d.Q_t[n];
    qte += d.Q_t[n] * d.e[n];
  }
  CHECK(rel(qt, o.Q_t) < 1e-13);
  CHECK(rel(qte, o.Q_t * o.E_t) < 1e-13);
}

TEST_CASE("closed form matches truncated sum over random parameters") {
  std::mt19937_64 rng(2024);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  auto log_uniform = [&](double lo, double hi) {
    return std::exp(std::log(lo) + (std::log(hi) - std::log(lo)) * u(rng));
  };
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const SourceParams s{log_uniform(1e-3, 5.0), 0.01 + 0.98 * u(rng), log_uniform(1e-8, 1e-2)};
    const ChannelParams c{0.15 + 0.15 * u(rng), 250 * u(rng), log_uniform(0.01, 1.0),
                          log_uniform(1e-8, 1e-3), 0.1 * u(rng)};
    const RateSummary a = observables(source_stats(s), c);
    const RateSummary b = observables_closed_form(s, c);
    for (auto [x, y] : {std::pair{a.Q_t, b.Q_t}, {a.E_t, b.E_t}, {a.Q_nt, b.Q_nt},
                        {a.E_nt, b.E_nt}, {a.r, b.r}})
      worst = std::max(worst, rel(y, x));
  }
  CHECK(worst < 1e-10);
}

TEST_CASE("monotone in distance") {
  const SourceParams s{0.19, 0.5, 1e-6};
  RateSummary prev = observables_closed_form(s, fiber(0));
  for (double l = 5; l <= 300; l += 5) {
    const RateSummary o = observables_closed_form(s, fiber(l));
    CHECK(o.Q_t <= prev.Q_t);
    CHECK(o.Q_nt <= prev.Q_nt);
    CHECK(o.E_t >= prev.E_t);
    CHECK(o.E_nt >= prev.E_nt);
    prev = o;
  }
  const RateSummary far = observables_closed_form(s, fiber(1000));
  CHECK(far.E_t == doctest::Approx(0.5).epsilon(1e-6));
}

TEST_CASE("vacuum source and degenerate corners") {
  const ChannelParams c = fiber(20);
  const RateSummary o = observables_closed_form({0.0, 0.5, 1e-6}, c);
  CHECK(rel(o.Q_t, 1e-6 * yield_n(c, 0)) < 1e-12);
  CHECK(o.E_t == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(o.E_nt == doctest::Approx(0.5).epsilon(1e-12));

  const ChannelParams dark{0.21, 20, 0.0, 0.0, 0.033};
  try {
    (void)observables_closed_form({0.2, 0.0, 0.0}, dark);
    FAIL("expected degenerate observables");
  } catch (const DegenerateObservables& e) {
    CHECK(e.quantity() == "Q_nt");
  }
  // No trigger clicks at all: Q_t vanishes.
  CHECK_THROWS_AS(observables_closed_form({0.2, 0.0, 0.0}, c), DegenerateObservables);
  CHECK_THROWS_AS(observables(source_stats({0.2, 0.0, 0.0}), c), DegenerateObservables);
}

TEST_CASE("channel validation") {
  CHECK_THROWS_AS(ChannelParams({0.21, -1, 0.045, 0, 0}).validate(), ValidationError);
  CHECK_THROWS_AS(ChannelParams({0.21, 1, 1.5, 0, 0}).validate(), ValidationError);
  CHECK_THROWS_AS(ChannelParams({0.21, 1, 0.5, 1.0, 0}).validate(), ValidationError);
  CHECK_THROWS_AS(ChannelParams({0.21, 1, 0.5, 0, 0.6}).validate(), ValidationError);
  CHECK_THROWS_AS(ChannelParams({-0.1, 1, 0.5, 0, 0}).validate(), ValidationError);
}
