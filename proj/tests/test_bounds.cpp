#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "oicap/bounds.hpp"
#include "oicap/numerics.hpp"
#include "oicap/oracle.hpp"

using namespace oicap;

namespace {

constexpr double kLog2PiE = 2.8378770664093454836;  // log(2 pi e)

double mu_residual(double mu, double alpha) {
  return 1.0 / mu - 1.0 / std::expm1(mu) - alpha;
}

// Exhaustive oracle for the mean-parameter root: one million intervals of
// (0, 100], then midpoint bisection.
double mu_star_bisection_oracle(double alpha) {
  const long cells = 1000000;
  const double hi0 = 100.0;
  double a = hi0 / cells, fa = mu_residual(a, alpha), b = a;
  for (long i = 2; i <= cells; ++i) {
    b = hi0 * static_cast<double>(i) / static_cast<double>(cells);
    const double fb = mu_residual(b, alpha);
    if ((fa > 0.0) != (fb > 0.0)) break;
    a = b;
    fa = fb;
  }
  for (int i = 0; i < 100; ++i) {
    const double mid = 0.5 * (a + b);
    if ((mu_residual(mid, alpha) > 0.0) == (fa > 0.0)) {
      a = mid;
      fa = mu_residual(mid, alpha);
    } else {
      b = mid;
    }
  }
  return 0.5 * (a + b);
}

// Second implementation of the truncated-exponential lower bound in long
// double with a different algebraic arrangement.
long double lower_case1_reference(long double peak, long double sigma,
                                  long double alpha, long double mu) {
  const long double ratio = (1.0L - std::exp(-mu)) / mu;
  const long double log_arg = 2.0L * std::log(peak / sigma) + 2.0L * alpha * mu +
                              2.0L * std::log(ratio) -
                              (std::log(2.0L * M_PIl) + 1.0L);
  return 0.5L * std::log1p(std::exp(log_arg));
}

// Second implementation of the flat-middle upper bound in long double.
long double upper_case2_high_reference(long double peak, long double sigma,
                                       long double delta) {
  auto Q = [](long double x) { return std::erfc(x / std::sqrt(2.0L)) / 2.0L; };
  const long double s2pi = std::sqrt(2.0L * M_PIl);
  long double v = (1.0L - 2.0L * Q((delta + peak / 2.0L) / sigma)) *
                  std::log((peak + 2.0L * delta) / (sigma * s2pi * (1.0L - 2.0L * Q(delta / sigma))));
  v += -0.5L + Q(delta / sigma) +
       delta / (s2pi * sigma) * std::exp(-delta * delta / (2.0L * sigma * sigma));
  return v;
}

}  // namespace

TEST_CASE("mu_star ordering, oracle agreement and frozen values") {
  CHECK(mu_star(0.499) < mu_star(0.49));
  CHECK(mu_star(0.49) < mu_star(0.4));

  const double m01 = mu_star(0.1);
  CHECK(m01 == doctest::Approx(mu_star_bisection_oracle(0.1)).epsilon(1e-10));
  CHECK(m01 == doctest::Approx(9.995441133814842741401).epsilon(1e-13));

  const double m025 = mu_star(0.25);
  CHECK(m025 == doctest::Approx(mu_star_bisection_oracle(0.25)).epsilon(1e-10));
  CHECK(m025 == doctest::Approx(3.593511969447426082272).epsilon(1e-13));
  CHECK(std::fabs(mu_residual(m025, 0.25)) <= 1e-12);

  CHECK_THROWS_AS(mu_star(0.0), std::domain_error);
  CHECK_THROWS_AS(mu_star(0.5), std::domain_error);
  CHECK_THROWS_AS(mu_star(0.7), std::domain_error);
}

TEST_CASE("mu_star residual property over random ratios") {
  std::mt19937_64 gen(5201);
  std::uniform_real_distribution<double> unif(0.001, 0.499);
  for (int i = 0; i < 100; ++i) {
    const double alpha = unif(gen);
    const double mu = mu_star(alpha);
    CHECK(std::fabs(mu_residual(mu, alpha)) <= 1e-10);
  }
}

TEST_CASE("truncated-exponential lower bound against a second implementation") {
  const ChannelParams p = ChannelParams::peak_and_average(1.0, 0.1, 1.0);
  const double mu = mu_star(0.1);
  const double v = lower_case1(p, mu).nats;
  CHECK(v == doctest::Approx(0.00215827821796375731213).epsilon(1e-12));
  CHECK(v == doctest::Approx(static_cast<double>(
                 lower_case1_reference(1.0L, 1.0L, 0.1L, mu))).epsilon(1e-12));
}

TEST_CASE("lower bound high-SNR offset matches the asymptote expression") {
  // The bound's offset log term must agree with the closed-form offset,
  // which uses a different algebraic route through the mean-parameter root.
  for (double alpha : {0.1, 0.25, 0.4}) {
    const double mu = mu_star(alpha);
    const ChannelParams p = ChannelParams::peak_and_average(1e8, alpha * 1e8, 1.0);
    const double offset = lower_case1(p, mu).nats - std::log(1e8);
    const AsymptoteValue asym = asymptote(classify(p));
    CHECK(offset == doctest::Approx(asym.high_snr_offset).epsilon(1e-8));
  }
}

TEST_CASE("variance-based upper bound values and low-SNR coefficient") {
  const ChannelParams p = ChannelParams::peak_and_average(1.0, 0.1, 1.0);
  CHECK(upper_case1_low(p).nats ==
        doctest::Approx(0.5 * std::log(1.09)).epsilon(1e-15));
  const ChannelParams tiny = ChannelParams::peak_and_average(1e-4, 1e-5, 1.0);
  CHECK(upper_case1_low(tiny).nats / 1e-8 ==
        doctest::Approx(0.5 * 0.1 * 0.9).epsilon(1e-6));
}

TEST_CASE("case-boundary continuity between the two peak regimes") {
  const double peak = 7.0;
  const double alpha = 0.5 - 1e-6;
  const ChannelParams near_half = ChannelParams::peak_and_average(peak, alpha * peak, 1.0);
  const ChannelParams at_half = ChannelParams::peak_and_average(peak, 0.5 * peak, 1.0);
  // variance bound meets the peak-only Gaussian bound
  CHECK(upper_case1_low(near_half).nats ==
        doctest::Approx(upper_case2_low(at_half).nats).epsilon(1e-6));
  // entropy-power bounds meet as the mean parameter vanishes
  CHECK(lower_case1(near_half, mu_star(alpha)).nats ==
        doctest::Approx(lower_case2(at_half).nats).epsilon(1e-3));
  const BoundPair a = best_bounds(near_half);
  const BoundPair b = best_bounds(at_half);
  CHECK(std::fabs(a.lower.nats - b.lower.nats) <= 1e-3);
  CHECK(std::fabs(a.upper.nats - b.upper.nats) <= 1e-3);
}

TEST_CASE("peak-dominated heuristics") {
  const double e_minus_1 = std::exp(1.0) - 1.0;
  const ChannelParams p = ChannelParams::peak_and_average(e_minus_1, 0.1 * e_minus_1, 1.0);
  const Case1FreeParams h = heuristic_case1(p);
  CHECK(h.delta == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(!h.degenerate);

  // peak to infinity: the tilt parameter approaches its limit value
  const double mu = mu_star(0.1);
  const Case1FreeParams big = heuristic_case1(1e8, 1.0, 0.1, mu);
  CHECK(big.mu == doctest::Approx(mu).epsilon(1e-6));

  // degenerate edge at zero peak (raw overload)
  const Case1FreeParams zero = heuristic_case1(0.0, 1.0, 0.1, mu);
  CHECK(zero.delta == 0.0);
  CHECK(zero.mu == 0.0);
  CHECK(zero.degenerate);

  CHECK_THROWS_AS(upper_case1_high(p, -1.0, 1.0), std::domain_error);
  CHECK_THROWS_AS(upper_case1_high(p, 1.0, 0.0), std::domain_error);
}

TEST_CASE("peak-dominated bounds order on the figure grid") {
  for (double db = -10.0; db <= 30.0; db += 0.5) {
    const double peak = std::pow(10.0, db / 10.0);
    const ChannelParams p = ChannelParams::peak_and_average(peak, 0.1 * peak, 1.0);
    const double lo = lower_case1(p, mu_star(0.1)).nats;
    const Case1FreeParams h = heuristic_case1(p);
    const double hi =
        std::min(upper_case1_low(p).nats, upper_case1_high(p, h.delta, h.mu).nats);
    CHECK(lo <= hi);
  }
}

TEST_CASE("peak-only bounds") {
  const ChannelParams unit = ChannelParams::peak_and_average(1.0, 0.5, 1.0);
  CHECK(lower_case2(unit).nats ==
        doctest::Approx(0.5 * std::log1p(1.0 / (2.0 * M_PI * std::exp(1.0)))).epsilon(1e-15));
  const ChannelParams two = ChannelParams::peak_and_average(2.0, 1.0, 1.0);
  CHECK(upper_case2_low(two).nats == doctest::Approx(0.5 * std::log(2.0)).epsilon(1e-15));
  for (double peak : {0.01, 0.5, 3.0, 50.0, 2000.0}) {
    const ChannelParams p = ChannelParams::peak_and_average(peak, 0.5 * peak, 1.0);
    CHECK(lower_case2(p).nats < upper_case2_low(p).nats);
  }
  const ChannelParams tiny = ChannelParams::peak_and_average(1e-4, 5e-5, 1.0);
  CHECK(upper_case2_low(tiny).nats / 1e-8 == doctest::Approx(0.125).epsilon(1e-6));
}

TEST_CASE("flat-middle upper bound against a second implementation") {
  const ChannelParams p = ChannelParams::peak_and_average(10.0, 5.0, 1.0);
  const double delta = heuristic_case2_delta(p);
  CHECK(delta == doctest::Approx(std::log(11.0)).epsilon(1e-14));
  const double v = upper_case2_high(p, delta).nats;
  CHECK(v == doctest::Approx(1.354247580398680602243).epsilon(1e-12));
  CHECK(v == doctest::Approx(static_cast<double>(upper_case2_high_reference(
                 10.0L, 1.0L, std::log(11.0L)))).epsilon(1e-12));
  CHECK_THROWS_AS(upper_case2_high(p, 0.0), std::domain_error);
  // high-SNR offset
  const ChannelParams big = ChannelParams::peak_and_average(1e6, 5e5, 1.0);
  const double off = upper_case2_high(big, heuristic_case2_delta(big)).nats - std::log(1e6);
  CHECK(off == doctest::Approx(-0.5 * kLog2PiE).epsilon(1e-4));
}

TEST_CASE("average-only lower bound") {
  const ChannelParams p = ChannelParams::average_only(1.0, 1.0);
  CHECK(lower_case3(p).nats ==
        doctest::Approx(0.5 * std::log1p(std::exp(1.0) / (2.0 * M_PI))).epsilon(1e-15));
  double prev = 0.0;
  for (double avg : {0.01, 0.1, 1.0, 10.0, 100.0}) {
    const double v = lower_case3(ChannelParams::average_only(avg, 1.0)).nats;
    CHECK(v > prev);
    prev = v;
  }
  const double off = lower_case3(ChannelParams::average_only(1e6, 1.0)).nats - std::log(1e6);
  CHECK(off == doctest::Approx(0.5 * (1.0 - std::log(2.0 * M_PI))).epsilon(1e-4));
}

TEST_CASE("average-only negative-shift upper bound") {
  const ChannelParams half = ChannelParams::average_only(0.5, 1.0);
  const auto h = heuristic_case3_low(half);
  REQUIRE(h.has_value());
  const double v = upper_case3_low(half, h->delta, h->beta).nats;
  CHECK(v > lower_case3(half).nats);
  CHECK(std::isfinite(v));
  // shift outside its validity range is rejected
  CHECK_THROWS_AS(upper_case3_low(half, -0.1, 1.0), std::domain_error);
  CHECK_THROWS_AS(upper_case3_low(half, h->delta, -1.0), std::domain_error);
  // the suggested parameters stop applying above the ratio threshold
  CHECK(!heuristic_case3_low(ChannelParams::average_only(0.95, 1.0)).has_value());
  CHECK(case3_low_snr_heuristic_limit() ==
        doctest::Approx(std::exp(-1.0 / (4.0 * std::exp(1.0)))).epsilon(1e-15));

  // sandwich against the numerical oracle at this ratio
  OracleConfig cfg;
  cfg.grid_points = 801;
  cfg.support_max = 40.0;
  cfg.ba_tolerance = 1e-4;
  const OracleResult oracle = capacity_oracle(half, cfg);
  CHECK(lower_case3(half).nats <= oracle.nats);
  CHECK(oracle.nats <= v + 1e-4);
}

TEST_CASE("average-only envelope trend at low SNR") {
  double prev_ratio = std::numeric_limits<double>::infinity();
  for (double avg : {1e-4, 1e-5, 1e-6}) {
    const ChannelParams p = ChannelParams::average_only(avg, 1.0);
    const auto h = heuristic_case3_low(p);
    REQUIRE(h.has_value());
    const double envelope = avg * std::sqrt(std::log(1.0 / avg));
    const double ratio = upper_case3_low(p, h->delta, h->beta).nats / envelope;
    CHECK(ratio <= 2.3);
    CHECK(ratio < prev_ratio);  // approaching the limit factor from above
    prev_ratio = ratio;
  }
}

TEST_CASE("average-only nonnegative-shift upper bound and its quadratic") {
  const ChannelParams p = ChannelParams::average_only(1.0, 1.0);
  CHECK_THROWS_AS(upper_case3_high(p, -0.5, 1.0), std::domain_error);
  CHECK_THROWS_AS(upper_case3_high(p, 1.0, 0.0), std::domain_error);
  // beta from the closed form satisfies its defining quadratic
  for (double avg : {0.1, 1.0, 10.0, 100.0, 1e4}) {
    const ChannelParams q = ChannelParams::average_only(avg, 1.0);
    const Case3FreeParams h = heuristic_case3_high(q);
    const double ds = h.delta;
    const double c = ds + avg + std::exp(-0.5 * ds * ds) / std::sqrt(2.0 * M_PI);
    const double k = std::sqrt(2.0 * M_PI) *
                     std::exp(0.5 * ds * ds + log_q_function(ds));
    const double residual = h.beta * h.beta - h.beta * c - c * k;
    CHECK(std::fabs(residual) <= 1e-9 * h.beta * h.beta);
  }
  const double off =
      upper_case3_high(ChannelParams::average_only(1e6, 1.0),
                       heuristic_case3_high(ChannelParams::average_only(1e6, 1.0)).delta,
                       heuristic_case3_high(ChannelParams::average_only(1e6, 1.0)).beta)
          .nats -
      std::log(1e6);
  CHECK(off == doctest::Approx(0.5 * (1.0 - std::log(2.0 * M_PI))).epsilon(1e-4));
}

TEST_CASE("asymptote values per regime") {
  const AsymptoteValue near_half =
      asymptote(classify(ChannelParams::peak_and_average(1.0, 0.4999, 1.0)));
  CHECK(near_half.high_snr_offset == doctest::Approx(-0.5 * kLog2PiE).epsilon(1e-3));

  const AsymptoteValue quarter =
      asymptote(classify(ChannelParams::peak_and_average(1.0, 0.25, 1.0)));
  CHECK(quarter.high_snr_offset == doctest::Approx(-1.827577353607443899994).epsilon(1e-12));
  CHECK(*quarter.low_snr_coefficient == doctest::Approx(0.25 * 0.75 / 2.0).epsilon(1e-15));

  const AsymptoteValue peak_only =
      asymptote(classify(ChannelParams::peak_and_average(1.0, 0.9, 1.0)));
  CHECK(peak_only.high_snr_offset == doctest::Approx(-0.5 * kLog2PiE).epsilon(1e-14));
  CHECK(*peak_only.low_snr_coefficient == doctest::Approx(0.125).epsilon(1e-15));

  const AsymptoteValue avg = asymptote(classify(ChannelParams::average_only(1.0, 1.0)));
  CHECK(avg.high_snr_offset ==
        doctest::Approx(0.5 * std::log(std::exp(1.0) / (2.0 * M_PI))).epsilon(1e-14));
  REQUIRE(avg.low_snr_envelope.has_value());
  CHECK(avg.low_snr_envelope->first == doctest::Approx(2.0));
  CHECK(avg.low_snr_envelope->second == doctest::Approx(1.0 / std::sqrt(2.0)));
  CHECK(avg.low_snr_envelope->first / avg.low_snr_envelope->second ==
        doctest::Approx(2.0 * std::sqrt(2.0)).epsilon(1e-14));
}

TEST_CASE("best_bounds sandwich across regimes and SNRs") {
  for (double db = -40.0; db <= 60.0; db += 2.5) {
    const double ratio = std::pow(10.0, db / 10.0);
    for (double alpha : {0.1, 0.25, 0.4, 0.5, 0.8, 1.0}) {
      const ChannelParams p = ChannelParams::peak_and_average(ratio, alpha * ratio, 1.0);
      const BoundPair b = best_bounds(p);
      CHECK(b.lower.nats <= b.upper.nats);
      CHECK(b.lower.kind == BoundValue::Kind::lower);
      CHECK(b.upper.kind == BoundValue::Kind::upper);
    }
    const BoundPair b3 = best_bounds(ChannelParams::average_only(ratio, 1.0));
    CHECK(b3.lower.nats <= b3.upper.nats);
  }
}

TEST_CASE("best_bounds with refinement keeps the sandwich and tightens") {
  BestBoundsOptions refine;
  refine.refine = true;
  for (double db : {-10.0, 0.0, 7.0, 12.0, 25.0}) {
    const double ratio = std::pow(10.0, db / 10.0);
    for (double alpha : {0.1, 0.5}) {
      const ChannelParams p = ChannelParams::peak_and_average(ratio, alpha * ratio, 1.0);
      const BoundPair plain = best_bounds(p);
      const BoundPair tight = best_bounds(p, refine);
      CHECK(tight.upper.nats <= plain.upper.nats + 1e-12);
      CHECK(tight.lower.nats <= tight.upper.nats);
    }
    const ChannelParams p3 = ChannelParams::average_only(ratio, 1.0);
    CHECK(best_bounds(p3, refine).upper.nats <= best_bounds(p3).upper.nats + 1e-12);
  }
}

TEST_CASE("best_bounds picks the tighter upper per SNR") {
  const ChannelParams low = ChannelParams::peak_and_average(1.0, 0.5, 1.0);  // 0 dB
  CHECK(best_bounds(low).upper.source == BoundSource::case2_gaussian_upper);
  const ChannelParams high = ChannelParams::peak_and_average(1000.0, 500.0, 1.0);  // 30 dB
  CHECK(best_bounds(high).upper.source == BoundSource::case2_uniform_upper);
}

TEST_CASE("inactive average constraint leaves the bounds unchanged") {
  const double peak = 31.7;
  const BoundPair base =
      best_bounds(ChannelParams::peak_and_average(peak, 0.5 * peak, 1.0));
  for (double alpha : {0.6, 0.8, 1.0}) {
    const BoundPair same =
        best_bounds(ChannelParams::peak_and_average(peak, alpha * peak, 1.0));
    CHECK(same.lower.nats == base.lower.nats);
    CHECK(same.upper.nats == base.upper.nats);
  }
}

TEST_CASE("bounds are nondecreasing in the constraint level") {
  auto nondecreasing = [](auto&& f) {
    double prev = -1.0;
    for (double db = -20.0; db <= 40.0; db += 1.0) {
      const double ratio = std::pow(10.0, db / 10.0);
      const double v = f(ratio);
      CHECK(v >= prev - 1e-12);
      prev = v;
    }
  };
  nondecreasing([](double r) {
    const ChannelParams p = ChannelParams::peak_and_average(r, 0.1 * r, 1.0);
    return lower_case1(p, mu_star(0.1)).nats;
  });
  nondecreasing([](double r) {
    const ChannelParams p = ChannelParams::peak_and_average(r, 0.1 * r, 1.0);
    const Case1FreeParams h = heuristic_case1(p);
    return upper_case1_high(p, h.delta, h.mu).nats;
  });
  nondecreasing([](double r) {
    return lower_case2(ChannelParams::peak_and_average(r, 0.5 * r, 1.0)).nats;
  });
  nondecreasing([](double r) {
    const ChannelParams p = ChannelParams::peak_and_average(r, 0.5 * r, 1.0);
    return upper_case2_high(p, heuristic_case2_delta(p)).nats;
  });
  nondecreasing([](double r) {
    return lower_case3(ChannelParams::average_only(r, 1.0)).nats;
  });
  nondecreasing([](double r) {
    const ChannelParams p = ChannelParams::average_only(r, 1.0);
    const Case3FreeParams h = heuristic_case3_high(p);
    return upper_case3_high(p, h.delta, h.beta).nats;
  });
}

TEST_CASE("low-SNR coefficient from the closed-form uppers") {
  const double ratio = 1e-3;  // -30 dB
  for (double alpha : {0.1, 0.3, 0.5}) {
    const ChannelParams p = ChannelParams::peak_and_average(ratio, alpha * ratio, 1.0);
    const double upper = best_bounds(p).upper.nats;
    const double coeff = upper / (ratio * ratio);
    const double target = 0.5 * alpha * (1.0 - alpha);
    CHECK(std::fabs(coeff - target) <= 0.05 * target);
  }
}

TEST_CASE("bound metadata records sources and parameters") {
  const ChannelParams p = ChannelParams::peak_and_average(10.0, 1.0, 1.0);
  const Case1FreeParams h = heuristic_case1(p);
  const BoundValue u = upper_case1_high(p, h.delta, h.mu);
  CHECK(u.source == BoundSource::case1_exponential_upper);
  CHECK(u.free_params.at("delta") == doctest::Approx(h.delta));
  CHECK(u.free_params.at("mu") == doctest::Approx(h.mu));
  CHECK(to_string(BoundSource::case3_epi_lower) == "case3_epi_lower");
  const BoundValue lo = lower_case1(p, mu_star(0.1));
  CHECK(lo.free_params.count("mu_star") == 1);
}
