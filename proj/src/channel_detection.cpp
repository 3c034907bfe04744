#include "pdcqkd/channel_detection.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <string>

#include "pdcqkd/error.hpp"

namespace pdcqkd {

namespace {

void require_range(const char* name, double value, double lo, double hi,
                   bool hi_open) {
  const bool ok = value >= lo && (hi_open ? value < hi : value <= hi);
  if (!ok) {
    std::ostringstream os;
    os << name << " must lie in [" << lo << ", " << hi << (hi_open ? ")" : "]")
       << " (got " << value << ")";
    throw ValidationError(os.str());
  }
}

// (1-w)^n as exp(n log1p(-w)); exact 1 for n == 0 even when w == 1.
double pow_complement(double w, std::size_t n) {
  if (n == 0) return 1.0;
  return std::exp(static_cast<double>(n) * std::log1p(-w));
}

void check_nondegenerate(double Q_t, double Q_nt) {
  if (!(Q_nt > 0.0)) {
    throw DegenerateObservables(
        "degenerate observables: Q_nt = 0, ratio r = Q_t/Q_nt and E_nt are "
        "undefined",
        "Q_nt");
  }
  if (!(Q_t > 0.0)) {
    throw DegenerateObservables(
        "degenerate observables: Q_t = 0, E_t is undefined", "Q_t");
  }
}

}  // namespace

void ChannelParams::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) {
    throw ValidationError("alpha must be finite and >= 0");
  }
  if (!std::isfinite(length_km) || length_km < 0.0) {
    throw ValidationError("length_km must be finite and >= 0");
  }
  require_range("eta_B", eta_B, 0.0, 1.0, false);
  require_range("p_d", p_d, 0.0, 1.0, true);
  require_range("e_d", e_d, 0.0, 0.5, false);
}

double ChannelParams::transmittance() const {
  return std::pow(10.0, -alpha * length_km / 10.0);
}

double ChannelParams::efficiency() const { return transmittance() * eta_B; }

double yield_n(const ChannelParams& ch, std::size_t n) {
  const double eta = ch.efficiency();
  const double log_none =
      (n == 0 ? 0.0 : static_cast<double>(n) * std::log1p(-eta)) +
      2.0 * std::log1p(-ch.p_d);
  return -std::expm1(log_none);
}

double error_weighted_yield_n(const ChannelParams& ch, std::size_t n) {
  if (n == 0) return 0.5 * yield_n(ch, 0);
  const double eta = ch.efficiency();
  const double k = static_cast<double>(n);
  // (1 - eta e_d)^n - (1 - eta + eta e_d)^n as v^n expm1(n (log u - log v))
  const double log_u = std::log1p(-eta * ch.e_d);
  const double log_v = std::log1p(-eta * (1.0 - ch.e_d));
  const double spread = std::isfinite(log_v)
                            ? std::exp(k * log_v) * std::expm1(k * (log_u - log_v))
                            : pow_complement(eta * ch.e_d, n);
  const double value = 0.5 * (yield_n(ch, n) - (1.0 - ch.p_d) * spread);
  return value < 0.0 ? 0.0 : value;
}

RateSummary aggregate(std::span<const double> Q_t_n,
                      std::span<const double> Q_nt_n,
                      std::span<const double> e_n) {
  if (Q_t_n.size() != Q_nt_n.size() || Q_t_n.size() != e_n.size()) {
    throw ValidationError("per-photon vectors must have equal length");
  }
  double Q_t = 0.0, Q_nt = 0.0, err_t = 0.0, err_nt = 0.0;
  for (std::size_t n = 0; n < Q_t_n.size(); ++n) {
    Q_t += Q_t_n[n];
    Q_nt += Q_nt_n[n];
    err_t += Q_t_n[n] * e_n[n];
    err_nt += Q_nt_n[n] * e_n[n];
  }
  check_nondegenerate(Q_t, Q_nt);
  RateSummary out;
  out.Q_t = Q_t;
  out.Q_nt = Q_nt;
  out.E_t = err_t / Q_t;
  out.E_nt = err_nt / Q_nt;
  out.r = Q_t / Q_nt;
  out.per_n = PerPhotonRates{{Q_t_n.begin(), Q_t_n.end()},
                             {Q_nt_n.begin(), Q_nt_n.end()},
                             {e_n.begin(), e_n.end()}};
  return out;
}

RateSummary observables(const SourceStats& src, const ChannelParams& ch) {
  ch.validate();
  const std::size_t count = src.size();
  std::vector<double> Q_t_n(count), Q_nt_n(count), e_n(count);
  for (std::size_t n = 0; n < count; ++n) {
    const double y = yield_n(ch, n);
    const double w = error_weighted_yield_n(ch, n);
    Q_t_n[n] = src.p_t[n] * y;
    Q_nt_n[n] = src.p_nt[n] * y;
    e_n[n] = y > 0.0 ? w / y : 0.5;
  }
  if (count > 0) e_n[0] = 0.5;
  return aggregate(Q_t_n, Q_nt_n, e_n);
}

RateSummary observables_closed_form(const SourceParams& params,
                                    const ChannelParams& ch) {
  params.validate();
  ch.validate();
  // Every sum below is a combination of G(z) = sum_n p_n z^n = 1/(1 + mu w)
  // with w = 1 - z. Differences are expanded algebraically so that no two
  // O(1) terms cancel:
  //   G(z1) - G(z2)                = mu (z1 - z2) f(w1) f(w2)
  //   sum p_n (1-b^n)(z1^n - z2^n) = mu (z1 - z2) eta_A f(w_bz1) f(w_bz2)
  //       * [1 + mu f(w1) f(w2) ((z1 + z2) + mu (w1 z2 + z1 w2 + z1 z2 eta_A))]
  // where f(w) = 1/(1 + mu w), b = 1 - eta_A and w_bz = eta_A + b w.
  const double mu = params.mu;
  const double eta_A = params.eta_A;
  const double b = 1.0 - eta_A;
  const double d_A = params.d_A;
  const double a = 1.0 - d_A;
  const double eta = ch.efficiency();
  const double k = 1.0 - ch.p_d;
  const double c = k * k;
  const double one_minus_c = ch.p_d * (2.0 - ch.p_d);

  auto f = [mu](double w) { return 1.0 / (1.0 + mu * w); };
  auto w_b = [eta_A, b](double w) { return eta_A + b * w; };
  auto diff = [&](double w1, double w2, double dz) {
    return mu * dz * f(w1) * f(w2);
  };
  auto cross = [&](double z1, double w1, double z2, double w2, double dz) {
    const double inner =
        1.0 + mu * f(w1) * f(w2) *
                  ((z1 + z2) + mu * (w1 * z2 + z1 * w2 + z1 * z2 * eta_A));
    return mu * dz * eta_A * f(w_b(w1)) * f(w_b(w2)) * inner;
  };

  // photon paths: s = 1 - eta (lost), u = 1 - eta e_d, v = 1 - eta (1 - e_d)
  const double w_s = eta, s = 1.0 - eta;
  const double w_u = eta * ch.e_d, u = 1.0 - w_u;
  const double w_v = eta * (1.0 - ch.e_d), v = 1.0 - w_v;
  const double d_uv = eta * (1.0 - 2.0 * ch.e_d);

  // sum p_n Y_n = (1-c) + c (1 - G(s))
  const double all_detect = one_minus_c + c * diff(0.0, w_s, eta);
  // sum p_n gamma_n, gamma_n = d_A + a (1 - b^n)
  const double trig_mass = mu * eta_A * f(eta_A);
  // Q_t = sum p_n gamma_n [(1-c) + c (1 - s^n)]
  const double Q_t = d_A * all_detect +
                     a * (one_minus_c * trig_mass +
                          c * cross(1.0, 0.0, s, w_s, eta));
  // Q_nt = a sum p_n b^n [(1-c) + c(1 - s^n)] = a [(1-c) G(b) + c (G(b) - G(bs))]
  const double Q_nt =
      a * (one_minus_c * f(w_b(0.0)) +
           c * diff(w_b(0.0), w_b(w_s), b * eta));

  // Error sums: sum p_n x_n Y_n e_n = 1/2 [sum x_n Y_n - k sum x_n (u^n - v^n)]
  const double uv_all = diff(w_u, w_v, d_uv);
  const double uv_trig = d_A * uv_all + a * cross(u, w_u, v, w_v, d_uv);
  const double uv_quiet = a * diff(w_b(w_u), w_b(w_v), b * d_uv);
  const double err_t = std::max(0.0, 0.5 * (Q_t - k * uv_trig));
  const double err_nt = std::max(0.0, 0.5 * (Q_nt - k * uv_quiet));

  check_nondegenerate(Q_t, Q_nt);
  RateSummary out;
  out.Q_t = Q_t;
  out.Q_nt = Q_nt;
  out.E_t = err_t / Q_t;
  out.E_nt = err_nt / Q_nt;
  out.r = Q_t / Q_nt;
  return out;
}

}  // namespace pdcqkd
