#include "oicap/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "oicap/numerics.hpp"

namespace oicap {

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kSqrt2Pi = std::sqrt(2.0 * kPi);
const double kLog2PiE = std::log(2.0 * kPi) + 1.0;

void require_case(const ChannelParams& params, ConstraintCase expected, const char* who) {
  if (classify(params).kind != expected) {
    throw std::domain_error(std::string(who) + ": wrong constraint regime for this bound");
  }
}

double golden_minimize(const std::function<double(double)>& f, double lo, double hi) {
  // Plain golden-section; ~60 shrinks reach ~1e-12 relative bracket width.
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int i = 0; i < 90 && (b - a) > 1e-12 * (std::fabs(a) + std::fabs(b) + 1e-12); ++i) {
    if (fc < fd) {
      b = d; d = c; fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c; c = d; fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return fc < fd ? c : d;
}

}  // namespace

std::string_view to_string(BoundSource source) {
  switch (source) {
    case BoundSource::case1_epi_lower: return "case1_epi_lower";
    case BoundSource::case1_gaussian_upper: return "case1_gaussian_upper";
    case BoundSource::case1_exponential_upper: return "case1_exponential_upper";
    case BoundSource::case2_epi_lower: return "case2_epi_lower";
    case BoundSource::case2_gaussian_upper: return "case2_gaussian_upper";
    case BoundSource::case2_uniform_upper: return "case2_uniform_upper";
    case BoundSource::case3_epi_lower: return "case3_epi_lower";
    case BoundSource::case3_low_snr_upper: return "case3_low_snr_upper";
    case BoundSource::case3_high_snr_upper: return "case3_high_snr_upper";
  }
  return "unknown";
}

double mu_star(double alpha) {
  if (!(alpha > 0.0) || !(alpha < 0.5) || !std::isfinite(alpha)) {
    throw std::domain_error("mu_star: alpha must lie in (0, 1/2)");
  }
  // 1/expm1(mu) equals e^{-mu}/(1-e^{-mu}) and stays accurate near mu = 0.
  auto residual = [alpha](double mu) { return 1.0 / mu - 1.0 / std::expm1(mu) - alpha; };
  const double hi = 2.0 / alpha + 20.0;
  return solve_monotone_root(residual, 1e-12, hi, 1e-14);
}

BoundValue lower_case1(const ChannelParams& params, double mu_star_value) {
  require_case(params, ConstraintCase::peak_dominated_average, "lower_case1");
  const double peak = *params.peak_amplitude;
  const double sigma = params.noise_sigma;
  const double alpha = params.alpha();
  const double ratio = -std::expm1(-mu_star_value) / mu_star_value;  // (1-e^{-mu})/mu
  const double arg = peak * peak * std::exp(2.0 * alpha * mu_star_value) * ratio * ratio /
                     (2.0 * kPi * std::exp(1.0) * sigma * sigma);
  BoundValue v;
  v.nats = std::max(0.0, 0.5 * std::log1p(arg));
  v.kind = BoundValue::Kind::lower;
  v.source = BoundSource::case1_epi_lower;
  v.free_params = {{"mu_star", mu_star_value}};
  return v;
}

BoundValue upper_case1_low(const ChannelParams& params) {
  require_case(params, ConstraintCase::peak_dominated_average, "upper_case1_low");
  const double peak = *params.peak_amplitude;
  const double sigma = params.noise_sigma;
  const double alpha = params.alpha();
  BoundValue v;
  v.nats = 0.5 * std::log1p(alpha * (1.0 - alpha) * peak * peak / (sigma * sigma));
  v.kind = BoundValue::Kind::upper;
  v.source = BoundSource::case1_gaussian_upper;
  return v;
}

BoundValue upper_case1_high(const ChannelParams& params, double delta, double mu) {
  require_case(params, ConstraintCase::peak_dominated_average, "upper_case1_high");
  if (!(delta > 0.0) || !(mu > 0.0) || !std::isfinite(delta) || !std::isfinite(mu)) {
    throw std::domain_error("upper_case1_high: delta and mu must be positive");
  }
  const double peak = *params.peak_amplitude;
  const double sigma = params.noise_sigma;
  const double alpha = params.alpha();
  const double ds = delta / sigma;

  const double coverage =
      1.0 - q_function((delta + alpha * peak) / sigma) -
      q_function((delta + (1.0 - alpha) * peak) / sigma);
  // log[(A/sigma) (e^{mu delta/A} - e^{-mu(1+delta/A)}) / (sqrt(2pi) mu (1-2Q(delta/sigma)))]
  // assembled in log form so large mu*delta/A cannot overflow.
  const double log_span = std::log(peak / sigma) + mu * delta / peak +
                          std::log(-std::expm1(-mu * (1.0 + 2.0 * delta / peak))) -
                          std::log(kSqrt2Pi * mu * (1.0 - 2.0 * q_function(ds)));

  double nats = coverage * log_span;
  nats += -0.5 + q_function(ds) + ds / kSqrt2Pi * std::exp(-0.5 * ds * ds);
  nats += (sigma / peak) * (mu / kSqrt2Pi) *
          (std::exp(-0.5 * ds * ds) -
           std::exp(-0.5 * (peak + delta) * (peak + delta) / (sigma * sigma)));
  nats += mu * alpha * (1.0 - 2.0 * q_function((delta + 0.5 * peak) / sigma));

  BoundValue v;
  v.nats = nats;
  v.kind = BoundValue::Kind::upper;
  v.source = BoundSource::case1_exponential_upper;
  v.free_params = {{"delta", delta}, {"mu", mu}};
  return v;
}

Case1FreeParams heuristic_case1(double peak, double sigma, double alpha,
                                double mu_star_value) {
  Case1FreeParams p;
  p.delta = sigma * std::log1p(peak / sigma);
  p.mu = mu_star_value * -std::expm1(-alpha * p.delta * p.delta / (2.0 * sigma * sigma));
  p.degenerate = !(p.delta > 0.0) || !(p.mu > 0.0);
  return p;
}

Case1FreeParams heuristic_case1(const ChannelParams& params) {
  require_case(params, ConstraintCase::peak_dominated_average, "heuristic_case1");
  const double alpha = params.alpha();
  return heuristic_case1(*params.peak_amplitude, params.noise_sigma, alpha, mu_star(alpha));
}

BoundValue lower_case2(const ChannelParams& params) {
  require_case(params, ConstraintCase::peak_only, "lower_case2");
  const double peak = *params.peak_amplitude;
  const double sigma = params.noise_sigma;
  BoundValue v;
  v.nats = std::max(0.0, 0.5 * std::log1p(peak * peak / (2.0 * kPi * std::exp(1.0) * sigma * sigma)));
  v.kind = BoundValue::Kind::lower;
  v.source = BoundSource::case2_epi_lower;
  return v;
}

BoundValue upper_case2_low(const ChannelParams& params) {
  require_case(params, ConstraintCase::peak_only, "upper_case2_low");
  const double peak = *params.peak_amplitude;
  const double sigma = params.noise_sigma;
  BoundValue v;
  v.nats = 0.5 * std::log1p(peak * peak / (4.0 * sigma * sigma));
  v.kind = BoundValue::Kind::upper;
  v.source = BoundSource::case2_gaussian_upper;
  return v;
}

BoundValue upper_case2_high(const ChannelParams& params, double delta) {
  require_case(params, ConstraintCase::peak_only, "upper_case2_high");
  if (!(delta > 0.0) || !std::isfinite(delta)) {
    throw std::domain_error("upper_case2_high: delta must be positive");
  }
  const double peak = *params.peak_amplitude;
  const double sigma = params.noise_sigma;
  const double ds = delta / sigma;
  double nats = (1.0 - 2.0 * q_function((delta + 0.5 * peak) / sigma)) *
                (std::log(peak + 2.0 * delta) - std::log(sigma * kSqrt2Pi) -
                 std::log1p(-2.0 * q_function(ds)));
  nats += -0.5 + q_function(ds) + ds / kSqrt2Pi * std::exp(-0.5 * ds * ds);
  BoundValue v;
  v.nats = nats;
  v.kind = BoundValue::Kind::upper;
  v.source = BoundSource::case2_uniform_upper;
  v.free_params = {{"delta", delta}};
  return v;
}

double heuristic_case2_delta(const ChannelParams& params) {
  require_case(params, ConstraintCase::peak_only, "heuristic_case2_delta");
  return params.noise_sigma * std::log1p(*params.peak_amplitude / params.noise_sigma);
}

BoundValue lower_case3(const ChannelParams& params) {
  require_case(params, ConstraintCase::average_only, "lower_case3");
  const double avg = params.average_amplitude;
  const double sigma = params.noise_sigma;
  BoundValue v;
  v.nats = std::max(0.0, 0.5 * std::log1p(avg * avg * std::exp(1.0) / (2.0 * kPi * sigma * sigma)));
  v.kind = BoundValue::Kind::lower;
  v.source = BoundSource::case3_epi_lower;
  return v;
}

namespace {

// log(beta e^{-d^2/2s^2} + sqrt(2pi) s Q(d/s)) without over/underflow.
double log_normalizer_case3(double delta, double beta, double sigma) {
  const double ds = delta / sigma;
  const double a = std::log(beta) - 0.5 * ds * ds;
  const double b = std::log(kSqrt2Pi * sigma) + log_q_function(ds);
  const double m = std::max(a, b);
  return m + std::log(std::exp(a - m) + std::exp(b - m));
}

}  // namespace

BoundValue upper_case3_low(const ChannelParams& params, double delta, double beta) {
  require_case(params, ConstraintCase::average_only, "upper_case3_low");
  const double sigma = params.noise_sigma;
  if (!(delta <= -sigma * std::exp(-0.5)) || !std::isfinite(delta)) {
    throw std::domain_error("upper_case3_low: requires delta <= -sigma/sqrt(e)");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::domain_error("upper_case3_low: beta must be positive");
  }
  const double avg = params.average_amplitude;
  const double s2 = sigma * sigma;
  const double ds = delta / sigma;

  double nats = log_normalizer_case3(delta, beta, sigma) - std::log(kSqrt2Pi * sigma);
  nats += -delta * avg / (2.0 * s2);
  // 1 - Q(d/s) = Q(-d/s) for the negative shift; keeps the factor cancellation-free.
  nats += delta * delta / (2.0 * s2) *
          (q_function(-ds) - (avg / delta) * q_function(ds));
  nats += (avg + sigma / kSqrt2Pi) / beta;

  BoundValue v;
  v.nats = nats;
  v.kind = BoundValue::Kind::upper;
  v.source = BoundSource::case3_low_snr_upper;
  v.free_params = {{"delta", delta}, {"beta", beta}};
  return v;
}

BoundValue upper_case3_high(const ChannelParams& params, double delta, double beta) {
  require_case(params, ConstraintCase::average_only, "upper_case3_high");
  if (!(delta >= 0.0) || !std::isfinite(delta)) {
    throw std::domain_error("upper_case3_high: requires delta >= 0");
  }
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::domain_error("upper_case3_high: beta must be positive");
  }
  const double avg = params.average_amplitude;
  const double sigma = params.noise_sigma;
  const double s2 = sigma * sigma;
  const double ds = delta / sigma;
  const double gauss = std::exp(-0.5 * ds * ds);

  double nats = log_normalizer_case3(delta, beta, sigma);
  nats += 0.5 * q_function(ds);
  nats += ds / (2.0 * kSqrt2Pi) * gauss;
  nats += delta * delta / (2.0 * s2) * (1.0 - q_function((delta + avg) / sigma));
  nats += (delta + avg + sigma / kSqrt2Pi * gauss) / beta;
  nats += -0.5 * (kLog2PiE + std::log(s2));

  BoundValue v;
  v.nats = nats;
  v.kind = BoundValue::Kind::upper;
  v.source = BoundSource::case3_high_snr_upper;
  v.free_params = {{"delta", delta}, {"beta", beta}};
  return v;
}

double case3_low_snr_heuristic_limit() { return std::exp(-1.0 / (4.0 * std::exp(1.0))); }

namespace {

// Positive root of beta^2 - c beta - c k = 0, the beta minimizing either
// average-only upper bound for fixed delta; k = sqrt(2pi) s e^{d^2/2s^2} Q(d/s).
double case3_beta_from_quadratic(double c, double delta, double sigma) {
  const double ds = delta / sigma;
  const double k = kSqrt2Pi * sigma * std::exp(0.5 * ds * ds + log_q_function(ds));
  return 0.5 * c + 0.5 * std::sqrt(c * c + 4.0 * c * k);
}

}  // namespace

std::optional<Case3FreeParams> heuristic_case3_low(const ChannelParams& params) {
  require_case(params, ConstraintCase::average_only, "heuristic_case3_low");
  const double avg = params.average_amplitude;
  const double sigma = params.noise_sigma;
  if (avg / sigma > case3_low_snr_heuristic_limit()) {
    return std::nullopt;
  }
  Case3FreeParams p;
  p.delta = -2.0 * sigma * std::sqrt(std::log(sigma / avg));
  p.beta = case3_beta_from_quadratic(avg + sigma / kSqrt2Pi, p.delta, sigma);
  return p;
}

Case3FreeParams heuristic_case3_high(const ChannelParams& params) {
  require_case(params, ConstraintCase::average_only, "heuristic_case3_high");
  const double avg = params.average_amplitude;
  const double sigma = params.noise_sigma;
  Case3FreeParams p;
  p.delta = sigma * std::log1p(avg / sigma);
  const double ds = p.delta / sigma;
  const double c = p.delta + avg + sigma / kSqrt2Pi * std::exp(-0.5 * ds * ds);
  p.beta = case3_beta_from_quadratic(c, p.delta, sigma);
  return p;
}

AsymptoteValue asymptote(const CaseLabel& label) {
  AsymptoteValue v;
  switch (label.kind) {
    case ConstraintCase::peak_dominated_average: {
      const double alpha = *label.effective_alpha;
      const double ms = mu_star(alpha);
      v.high_snr_offset = -0.5 * kLog2PiE - (1.0 - alpha) * ms - std::log1p(-alpha * ms);
      v.low_snr_coefficient = 0.5 * alpha * (1.0 - alpha);
      break;
    }
    case ConstraintCase::peak_only:
      v.high_snr_offset = -0.5 * kLog2PiE;
      v.low_snr_coefficient = 0.125;
      break;
    case ConstraintCase::average_only:
      v.high_snr_offset = 0.5 * (1.0 - std::log(2.0 * kPi));
      v.low_snr_envelope = std::make_pair(2.0, 1.0 / std::sqrt(2.0));
      break;
  }
  return v;
}

namespace {

BoundValue refine_one_param(const std::function<BoundValue(double)>& eval,
                            double center, double lo_limit, double hi_limit,
                            int passes) {
  double best = center;
  BoundValue best_value = eval(center);
  for (int pass = 0; pass < passes; ++pass) {
    double lo = std::max(lo_limit, 0.5 * best);
    double hi = std::min(hi_limit, 1.5 * best);
    if (best < 0.0) std::swap(lo, hi);  // negative parameter: mirror the bracket
    if (!(lo < hi)) break;
    const double candidate = golden_minimize([&](double p) { return eval(p).nats; }, lo, hi);
    BoundValue cv = eval(candidate);
    if (cv.nats < best_value.nats) {
      best = candidate;
      best_value = cv;
    }
  }
  return best_value;
}

BoundValue refine_two_params(const std::function<BoundValue(double, double)>& eval,
                             double c1, double lo1, double hi1, double c2,
                             double lo2, double hi2, int passes) {
  double p1 = c1, p2 = c2;
  BoundValue best = eval(p1, p2);
  for (int pass = 0; pass < passes; ++pass) {
    {
      double lo = std::max(lo1, 0.5 * p1), hi = std::min(hi1, 1.5 * p1);
      if (p1 < 0.0) std::swap(lo, hi);
      if (lo < hi) {
        const double cand = golden_minimize([&](double p) { return eval(p, p2).nats; }, lo, hi);
        BoundValue cv = eval(cand, p2);
        if (cv.nats < best.nats) { p1 = cand; best = cv; }
      }
    }
    {
      double lo = std::max(lo2, 0.5 * p2), hi = std::min(hi2, 1.5 * p2);
      if (p2 < 0.0) std::swap(lo, hi);
      if (lo < hi) {
        const double cand = golden_minimize([&](double p) { return eval(p1, p).nats; }, lo, hi);
        BoundValue cv = eval(p1, cand);
        if (cv.nats < best.nats) { p2 = cand; best = cv; }
      }
    }
  }
  return best;
}

}  // namespace

BoundPair best_bounds(const ChannelParams& params, const BestBoundsOptions& options) {
  const CaseLabel label = classify(params);
  const double inf = std::numeric_limits<double>::infinity();
  BoundPair pair;
  switch (label.kind) {
    case ConstraintCase::peak_dominated_average: {
      const double ms = mu_star(*label.effective_alpha);
      pair.lower = lower_case1(params, ms);
      const Case1FreeParams h = heuristic_case1(*params.peak_amplitude, params.noise_sigma,
                                                *label.effective_alpha, ms);
      BoundValue high = upper_case1_high(params, h.delta, h.mu);
      if (options.refine) {
        high = refine_two_params(
            [&](double d, double m) { return upper_case1_high(params, d, m); },
            h.delta, 1e-300, inf, h.mu, 1e-300, inf, options.refine_passes);
      }
      const BoundValue low = upper_case1_low(params);
      pair.upper = (low.nats <= high.nats) ? low : high;
      break;
    }
    case ConstraintCase::peak_only: {
      pair.lower = lower_case2(params);
      const double hd = heuristic_case2_delta(params);
      BoundValue high = upper_case2_high(params, hd);
      if (options.refine) {
        high = refine_one_param([&](double d) { return upper_case2_high(params, d); },
                                hd, 1e-300, inf, options.refine_passes);
      }
      const BoundValue low = upper_case2_low(params);
      pair.upper = (low.nats <= high.nats) ? low : high;
      break;
    }
    case ConstraintCase::average_only: {
      pair.lower = lower_case3(params);
      const Case3FreeParams hh = heuristic_case3_high(params);
      BoundValue high = upper_case3_high(params, hh.delta, hh.beta);
      if (options.refine) {
        high = refine_two_params(
            [&](double d, double b) { return upper_case3_high(params, d, b); },
            hh.delta, 0.0, inf, hh.beta, 1e-300, inf, options.refine_passes);
      }
      pair.upper = high;
      // The negative-shift bound enters only where its suggested parameters
      // are valid; elsewhere the nonnegative-shift bound covers the regime.
      if (const auto hl = heuristic_case3_low(params)) {
        const double delta_cap = -params.noise_sigma * std::exp(-0.5);
        BoundValue low_bound = upper_case3_low(params, hl->delta, hl->beta);
        if (options.refine) {
          low_bound = refine_two_params(
              [&](double d, double b) {
                return upper_case3_low(params, std::min(d, delta_cap), b);
              },
              hl->delta, -inf, delta_cap, hl->beta, 1e-300, inf, options.refine_passes);
        }
        if (low_bound.nats < pair.upper.nats) pair.upper = low_bound;
      }
      break;
    }
  }
  return pair;
}

}  // namespace oicap
