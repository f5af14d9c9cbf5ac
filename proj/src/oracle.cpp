#include "oicap/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <cstdlib>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace oicap {

namespace {

constexpr double kPi = 3.14159265358979323846;
const double kSqrt2Pi = std::sqrt(2.0 * kPi);
const double kLog2PiE = std::log(2.0 * kPi) + 1.0;

double log_mixture_density(const DiscreteInputDistribution& dist, double sigma, double y) {
  // logsumexp over the mixture components.
  double best = -std::numeric_limits<double>::infinity();
  const Eigen::Index n = dist.points.size();
  std::vector<double> terms(static_cast<size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) {
    double t = -std::numeric_limits<double>::infinity();
    if (dist.probs[i] > 0.0) {
      t = std::log(dist.probs[i]) + log_normal_pdf(y, dist.points[i], sigma);
    }
    terms[static_cast<size_t>(i)] = t;
    best = std::max(best, t);
  }
  if (!std::isfinite(best)) return best;
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - best);
  return best + std::log(acc);
}

// I(X;Y) = sum_i q_i E_{N(x_i,s^2)}[log W(Y|x_i) - log p(Y)], Gauss-Hermite
// per component. Relative form; no large-entropy cancellation.
double discrete_mi_hermite(const DiscreteInputDistribution& dist, double sigma,
                           const QuadratureConfig& cfg) {
  const auto& [nodes, weights] = gauss_hermite_rule(cfg.hermite_nodes);
  double total = 0.0;
  for (Eigen::Index i = 0; i < dist.points.size(); ++i) {
    if (!(dist.probs[i] > 0.0)) continue;
    double di = 0.0;
    for (size_t k = 0; k < nodes.size(); ++k) {
      const double y = dist.points[i] + sigma * nodes[k];
      di += weights[k] * (log_normal_pdf(y, dist.points[i], sigma) -
                          log_mixture_density(dist, sigma, y));
    }
    total += dist.probs[i] * di;
  }
  return std::max(0.0, total);
}

}  // namespace

void DiscreteInputDistribution::validate(std::optional<double> peak,
                                         std::optional<double> average) const {
  if (points.size() != probs.size() || points.size() == 0) {
    throw std::domain_error("DiscreteInputDistribution: points/probs size mismatch");
  }
  double sum = 0.0;
  for (Eigen::Index i = 0; i < points.size(); ++i) {
    if (!(points[i] >= 0.0) || !std::isfinite(points[i])) {
      throw std::domain_error("DiscreteInputDistribution: points must be nonnegative");
    }
    if (i > 0 && !(points[i] > points[i - 1])) {
      throw std::domain_error("DiscreteInputDistribution: points must be strictly increasing");
    }
    if (!(probs[i] >= 0.0)) {
      throw std::domain_error("DiscreteInputDistribution: probabilities must be nonnegative");
    }
    sum += probs[i];
  }
  if (std::fabs(sum - 1.0) > 1e-12) {
    throw std::domain_error("DiscreteInputDistribution: probabilities must sum to one");
  }
  if (peak && points[points.size() - 1] > *peak + 1e-12 * *peak) {
    throw std::domain_error("DiscreteInputDistribution: a point exceeds the peak constraint");
  }
  if (average && mean() > *average + 1e-9) {
    throw std::domain_error("DiscreteInputDistribution: mean exceeds the average constraint");
  }
}

void OracleConfig::validate() const {
  if (grid_points != 0 && grid_points < 2) {
    throw std::domain_error("OracleConfig: grid_points must be >= 2");
  }
  if (!(support_max >= 0.0)) {
    throw std::domain_error("OracleConfig: support_max must be nonnegative");
  }
  if (!(ba_tolerance > 0.0)) {
    throw std::domain_error("OracleConfig: ba_tolerance must be positive");
  }
  if (max_iterations < 1) {
    throw std::domain_error("OracleConfig: max_iterations must be positive");
  }
}

double mutual_information(const DiscreteInputDistribution& dist,
                          const ChannelLaw& law, const QuadratureConfig& cfg) {
  cfg.validate();
  dist.validate();
  const double sigma = law.sigma;
  const double lo = dist.points[0] - 10.0 * sigma;
  const double hi = dist.points[dist.points.size() - 1] + 10.0 * sigma;
  auto integrand = [&](double y) {
    const double lp = log_mixture_density(dist, sigma, y);
    return std::isfinite(lp) ? -std::exp(lp) * lp : 0.0;
  };
  const double h_y = integrate_adaptive(integrand, lo, hi, cfg);
  const double h_z = 0.5 * (kLog2PiE + 2.0 * std::log(sigma));
  return std::max(0.0, h_y - h_z);
}

double binary_input_mi(const ChannelParams& params, const QuadratureConfig& cfg) {
  cfg.validate();
  const CaseLabel label = classify(params);
  if (label.kind == ConstraintCase::average_only) {
    throw std::domain_error("binary_input_mi: requires a peak constraint");
  }
  const double alpha = *label.effective_alpha;
  DiscreteInputDistribution dist;
  dist.points = Eigen::ArrayXd(2);
  dist.probs = Eigen::ArrayXd(2);
  dist.points << 0.0, *params.peak_amplitude;
  dist.probs << 1.0 - alpha, alpha;
  return discrete_mi_hermite(dist, params.noise_sigma, cfg);
}

double binary_lower_average_only(const ChannelParams& params,
                                 const QuadratureConfig& cfg) {
  cfg.validate();
  if (classify(params).kind != ConstraintCase::average_only) {
    throw std::domain_error("binary_lower_average_only: peak constraint present");
  }
  const double avg = params.average_amplitude;
  const double sigma = params.noise_sigma;
  auto mi_at = [&](double x) {
    const double p = avg / x;
    if (!(p < 1.0)) return 0.0;
    DiscreteInputDistribution dist;
    dist.points = Eigen::ArrayXd(2);
    dist.probs = Eigen::ArrayXd(2);
    dist.points << 0.0, x;
    dist.probs << 1.0 - p, p;
    return discrete_mi_hermite(dist, sigma, cfg);
  };
  // Coarse log-spaced scan, then golden-section polish around the best cell.
  const double lo = std::max(avg * (1.0 + 1e-9), 1e-3 * sigma);
  const double hi = std::max({40.0 * sigma, 4.0 * avg, lo * 2.0});
  const int scan = 80;
  double best_x = lo, best_v = -1.0;
  for (int k = 0; k <= scan; ++k) {
    const double x = lo * std::pow(hi / lo, static_cast<double>(k) / scan);
    const double v = mi_at(x);
    if (v > best_v) { best_v = v; best_x = x; }
  }
  const double bracket_lo = std::max(lo, best_x / std::pow(hi / lo, 1.5 / scan));
  const double bracket_hi = std::min(hi, best_x * std::pow(hi / lo, 1.5 / scan));
  constexpr double kInvPhi = 0.6180339887498948482;
  double a = bracket_lo, b = bracket_hi;
  double c = b - kInvPhi * (b - a), d = a + kInvPhi * (b - a);
  double fc = mi_at(c), fd = mi_at(d);
  for (int i = 0; i < 60; ++i) {
    if (fc > fd) {
      b = d; d = c; fd = fc; c = b - kInvPhi * (b - a); fc = mi_at(c);
    } else {
      a = c; c = d; fc = fd; d = a + kInvPhi * (b - a); fd = mi_at(d);
    }
  }
  return std::max(best_v, std::max(fc, fd));
}

namespace {

// Banded discretization of the Gaussian channel. Output bins share spacing h
// with the input lattice whenever the input spacing allows (dx >= sigma/8);
// otherwise each input row carries its own fractionally-shifted kernel.
struct BandedChannel {
  Eigen::ArrayXd x;          // inputs
  int half_width = 0;        // kernel half width in output bins
  Eigen::Index outputs = 0;  // number of output bins
  std::vector<int> start;    // first output bin of each row window
  // Row-major so each input's kernel window is contiguous.
  Eigen::Array<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor> kernels;
  bool shared = false;
  Eigen::ArrayXd row_entropy;  // sum_d t log t per row

  const double* kernel_row(Eigen::Index i) const {
    return shared ? kernels.data() : kernels.data() + i * kernels.cols();
  }
};

BandedChannel build_banded_channel(const Eigen::ArrayXd& x, double sigma) {
  BandedChannel ch;
  ch.x = x;
  const Eigen::Index n = x.size();
  const double dx = (n > 1) ? x[1] - x[0] : sigma;
  double h;
  int stride = 0;
  if (dx >= sigma / 8.0) {
    stride = std::max(1, static_cast<int>(std::ceil(4.0 * dx / sigma)));
    h = dx / stride;  // lattice: every input sits on the output grid
  } else {
    h = sigma / 4.0;  // inputs denser than bins: per-row kernels
  }
  ch.half_width = static_cast<int>(std::ceil(10.0 * sigma / h));
  const int width = 2 * ch.half_width + 1;
  const double y_min = x[0] - ch.half_width * h;
  ch.start.resize(static_cast<size_t>(n));
  ch.shared = stride > 0;
  ch.kernels.resize(ch.shared ? 1 : n, width);
  ch.row_entropy.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index row = ch.shared ? 0 : i;
    Eigen::Index center;
    if (ch.shared) {
      center = ch.half_width + i * stride;
    } else {
      center = static_cast<Eigen::Index>(std::lround((x[i] - y_min) / h));
    }
    ch.start[static_cast<size_t>(i)] = static_cast<int>(center) - ch.half_width;
    if (!ch.shared || i == 0) {
      double sum = 0.0;
      for (int d = 0; d < width; ++d) {
        const double y = y_min + (center - ch.half_width + d) * h;
        const double t = std::exp(-0.5 * std::pow((y - x[i]) / sigma, 2));
        ch.kernels(row, d) = t;
        sum += t;
      }
      ch.kernels.row(row) /= sum;
    }
    const double* k = ch.kernel_row(i);
    double ent = 0.0;
    for (int d = 0; d < width; ++d) {
      if (k[d] > 0.0) ent += k[d] * std::log(k[d]);
    }
    ch.row_entropy[i] = ent;
  }
  ch.outputs = static_cast<Eigen::Index>(ch.start.back()) + width;
  return ch;
}

struct BaState {
  Eigen::ArrayXd log_q;   // unnormalized log weights
  Eigen::ArrayXd q;
  Eigen::ArrayXd output;  // mixture output pmf
  Eigen::ArrayXd log_output;
  Eigen::ArrayXd divergence;  // D_i against the current output
};

void normalize_log_q(Eigen::ArrayXd& lq) {
  const double m = lq.maxCoeff();
  lq -= m + std::log((lq - m).exp().sum());
}

// One Blahut-Arimoto sweep at tilt s; fills the state and returns the
// bracket (dual functional minus primal functional of the tilted problem).
double ba_sweep(const BandedChannel& ch, double s, BaState& st, double* achieved,
                double* mean, double* dual_max) {
  const Eigen::Index n = ch.x.size();
  const int width = 2 * ch.half_width + 1;
  st.q = st.log_q.exp();
  st.output.setZero(ch.outputs);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double qi = st.q[i];
    if (qi <= 0.0) continue;
    const double* k = ch.kernel_row(i);
    double* p = st.output.data() + ch.start[static_cast<size_t>(i)];
    for (int d = 0; d < width; ++d) p[d] += qi * k[d];
  }
  st.log_output = st.output.max(1e-300).log();
  st.divergence.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double* k = ch.kernel_row(i);
    const double* lp = st.log_output.data() + ch.start[static_cast<size_t>(i)];
    double cross = 0.0;
    for (int d = 0; d < width; ++d) cross += k[d] * lp[d];
    st.divergence[i] = ch.row_entropy[i] - cross;
  }
  const Eigen::ArrayXd tilted = st.divergence - s * ch.x;
  const double primal = (st.q * tilted).sum();
  *achieved = (st.q * st.divergence).sum();
  *mean = (st.q * ch.x).sum();
  *dual_max = tilted.maxCoeff();
  st.log_q += tilted;
  normalize_log_q(st.log_q);
  return *dual_max - primal;
}

struct BaOutcome {
  double achieved = 0.0;
  double mean = 0.0;
  double dual_max = 0.0;
  double bracket = 0.0;
  long iterations = 0;
};

// Iterate at fixed tilt until the tilted bracket max(t) - q.t falls below
// tol. The constrained-capacity certificate adds s*(E - mean) on top.
BaOutcome ba_converge(const BandedChannel& ch, double s, BaState& st, double tol,
                      long budget) {
  BaOutcome out;
  const bool trace = std::getenv("OICAP_ORACLE_TRACE") != nullptr;
  while (true) {
    if (out.iterations >= budget) {
      throw convergence_error(
          "capacity_oracle: iteration budget exhausted (bracket " +
              std::to_string(out.bracket) + ")",
          out.achieved);
    }
    ++out.iterations;
    out.bracket = ba_sweep(ch, s, st, &out.achieved, &out.mean, &out.dual_max);
    if (trace && out.iterations % 1000 == 0) {
      std::fprintf(stderr, "    [ba] it=%ld I=%.9f mean=%.9f bracket=%.3e\n",
                   out.iterations, out.achieved, out.mean, out.bracket);
    }
    if (out.bracket <= tol) return out;
  }
}

// Cheap probe for the multiplier search: run until the achieved mean stops
// moving; the tilted fixed point's mean is all the root finder needs.
BaOutcome ba_probe_mean(const BandedChannel& ch, double s, BaState& st,
                        double mean_window_tol, long budget) {
  BaOutcome out;
  double window_mean = std::numeric_limits<double>::infinity();
  const long window = 100;
  const long min_iterations = 200;
  while (true) {
    if (out.iterations >= budget) {
      throw convergence_error("capacity_oracle: iteration budget exhausted in multiplier probe",
                              out.achieved);
    }
    ++out.iterations;
    ba_sweep(ch, s, st, &out.achieved, &out.mean, &out.dual_max);
    if (out.iterations % window == 0) {
      if (out.iterations >= min_iterations &&
          std::fabs(out.mean - window_mean) <= mean_window_tol) {
        return out;
      }
      window_mean = out.mean;
    }
  }
}

}  // namespace

OracleResult capacity_oracle(const ChannelParams& params, const OracleConfig& cfg) {
  cfg.validate();
  const CaseLabel label = classify(params);
  const double sigma = params.noise_sigma;
  const double avg = params.average_amplitude;

  double span;
  int n;
  if (label.kind == ConstraintCase::average_only) {
    const double support =
        (cfg.support_max > 0.0) ? cfg.support_max
                                : std::max(40.0, 20.0 * avg / sigma);
    span = support * sigma;
    n = (cfg.grid_points > 0) ? cfg.grid_points : 800;
  } else {
    span = *params.peak_amplitude;
    n = (cfg.grid_points > 0) ? cfg.grid_points : 400;
  }
  if (avg >= span) {
    // Every grid distribution satisfies the mean constraint trivially, but a
    // support that cannot reach the mean signals a misconfigured truncation.
    if (label.kind == ConstraintCase::average_only) {
      throw std::domain_error("capacity_oracle: support_max below E/sigma is infeasible");
    }
  }

  Eigen::ArrayXd x = Eigen::ArrayXd::LinSpaced(n, 0.0, span);
  const BandedChannel ch = build_banded_channel(x, sigma);

  BaState st;
  st.log_q = Eigen::ArrayXd::Zero(n);
  normalize_log_q(st.log_q);

  long remaining = cfg.max_iterations;
  long used = 0;
  const bool trace = std::getenv("OICAP_ORACLE_TRACE") != nullptr;
  auto spend = [&](BaOutcome out, double s, const char* phase) {
    remaining -= out.iterations;
    used += out.iterations;
    if (trace) {
      std::fprintf(stderr, "  [oracle] %s s=%.12e iters=%ld mean=%.9f I=%.9f bracket=%.3e\n",
                   phase, s, out.iterations, out.mean, out.achieved, out.bracket);
    }
    return out;
  };

  double s_final = 0.0;
  BaOutcome out = spend(ba_converge(ch, 0.0, st, cfg.ba_tolerance, remaining), 0.0, "free");
  const double mean_slack = 1e-9;
  double certificate = out.bracket;  // at s = 0 the tilted and constrained brackets agree
  if (out.mean > avg + mean_slack) {
    // Mean is monotone nonincreasing in the tilt. Bracket the multiplier and
    // root-find on cheap mean-stability probes.
    const double probe_tol = std::max(1e-12 * span, 1e-4 * (out.mean - avg));
    auto probe = [&](double s) {
      return spend(ba_probe_mean(ch, s, st, probe_tol, remaining), s, "probe");
    };
    double s_lo = cfg.multiplier_bracket.first;
    double s_hi = cfg.multiplier_bracket.second;
    double mean_lo = out.mean, mean_hi = 0.0;
    if (!(s_hi > s_lo)) {
      s_lo = 0.0;
      s_hi = 1.0 / avg;
      BaOutcome pr = probe(s_hi);
      int doublings = 0;
      while (pr.mean > avg) {
        s_lo = s_hi;
        mean_lo = pr.mean;
        s_hi *= 2.0;
        if (++doublings > 80) {
          throw std::domain_error("capacity_oracle: could not bracket the multiplier");
        }
        pr = probe(s_hi);
      }
      mean_hi = pr.mean;
    } else {
      mean_hi = probe(s_hi).mean;
    }
    double slope = std::max((mean_lo - mean_hi) / (s_hi - s_lo), 1e-300);
    const double s_tol = std::max(1e-6 * (s_hi - s_lo), 1e-15 * s_hi);
    auto mean_excess = [&](double s) { return probe(s).mean - avg; };
    s_final = solve_monotone_root(mean_excess, s_lo, s_hi, s_tol);

    // Certification: converge the tilted problem at s, then correct s until
    // the iterate is feasible and s*(E - mean) no longer dominates the
    // bracket. The achieved mean moves smoothly in s, so a guarded secant
    // converges in a few rounds, each warm-started.
    double s_infeasible = 0.0;
    double s_feasible = std::numeric_limits<double>::infinity();
    bool certified = false;
    for (int round = 0; round < 80; ++round) {
      out = spend(ba_converge(ch, s_final, st, 0.45 * cfg.ba_tolerance, remaining),
                  s_final, "final");
      certificate = out.bracket + s_final * (avg - out.mean);
      if (out.mean <= avg + mean_slack) {
        s_feasible = std::min(s_feasible, s_final);
        if (certificate <= cfg.ba_tolerance) {
          certified = true;
          break;
        }
      } else {
        s_infeasible = std::max(s_infeasible, s_final);
      }
      // Aim slightly inside the feasible side of the mean constraint.
      const double target = avg - 0.25 * cfg.ba_tolerance / std::max(s_final, 1e-300);
      double s_next = s_final + (out.mean - target) / slope;
      if (!(s_next > s_infeasible) ||
          (std::isfinite(s_feasible) && !(s_next < s_feasible))) {
        const double hi = std::isfinite(s_feasible) ? s_feasible : 2.0 * s_final;
        s_next = 0.5 * (s_infeasible + hi);
      }
      s_final = s_next;
    }
    if (!certified) {
      throw convergence_error(
          "capacity_oracle: multiplier polish failed to certify (bracket " +
              std::to_string(certificate) + ")",
          out.achieved);
    }
  }

  OracleResult result;
  result.nats = out.achieved;
  result.upper_functional = s_final * avg + out.dual_max;
  result.bracket = certificate;
  result.multiplier = s_final;
  result.iterations = used;

  // Prune negligible atoms and renormalize. st.q is the iterate whose MI and
  // mean were just measured (the sweep snapshots q before updating log_q).
  std::vector<double> pts, pr;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (st.q[i] > 1e-15) {
      pts.push_back(x[i]);
      pr.push_back(st.q[i]);
    }
  }
  double total = 0.0;
  for (double p : pr) total += p;
  result.distribution.points = Eigen::Map<Eigen::ArrayXd>(pts.data(), pts.size());
  result.distribution.probs = Eigen::Map<Eigen::ArrayXd>(pr.data(), pr.size()) / total;
  return result;
}

void OutputDensitySpec::validate() const {
  params.validate();
  const bool has_peak = params.has_peak();
  switch (variant) {
    case OutputDensityVariant::case1_low:
    case OutputDensityVariant::case2_low:
      if (!has_peak) throw std::domain_error("OutputDensitySpec: peak constraint required");
      break;
    case OutputDensityVariant::case1_high:
      if (!has_peak) throw std::domain_error("OutputDensitySpec: peak constraint required");
      if (!(delta > 0.0) || !(mu > 0.0)) {
        throw std::domain_error("OutputDensitySpec: requires delta > 0 and mu > 0");
      }
      break;
    case OutputDensityVariant::case2_high:
      if (!has_peak) throw std::domain_error("OutputDensitySpec: peak constraint required");
      if (!(delta > 0.0)) throw std::domain_error("OutputDensitySpec: requires delta > 0");
      break;
    case OutputDensityVariant::case3:
      if (!(beta > 0.0)) throw std::domain_error("OutputDensitySpec: requires beta > 0");
      if (!std::isfinite(delta)) throw std::domain_error("OutputDensitySpec: delta must be finite");
      break;
  }
}

double log_output_density(const OutputDensitySpec& spec, double y) {
  spec.validate();
  const double sigma = spec.params.noise_sigma;
  switch (spec.variant) {
    case OutputDensityVariant::case1_low: {
      const double peak = *spec.params.peak_amplitude;
      const double avg = spec.params.average_amplitude;
      const double var = sigma * sigma + avg * (peak - avg);
      return log_normal_pdf(y, avg, std::sqrt(var));
    }
    case OutputDensityVariant::case2_low: {
      const double peak = *spec.params.peak_amplitude;
      const double var = sigma * sigma + 0.25 * peak * peak;
      return log_normal_pdf(y, 0.5 * peak, std::sqrt(var));
    }
    case OutputDensityVariant::case1_high: {
      const double peak = *spec.params.peak_amplitude;
      if (y < -spec.delta) return log_normal_pdf(y, 0.0, sigma);
      if (y > peak + spec.delta) return log_normal_pdf(y, peak, sigma);
      const double log_coeff =
          std::log(spec.mu * (1.0 - 2.0 * q_function(spec.delta / sigma)) / peak) -
          (spec.mu * spec.delta / peak +
           std::log(-std::expm1(-spec.mu * (1.0 + 2.0 * spec.delta / peak))));
      return log_coeff - spec.mu * y / peak;
    }
    case OutputDensityVariant::case2_high: {
      const double peak = *spec.params.peak_amplitude;
      if (y < -spec.delta) return log_normal_pdf(y, 0.0, sigma);
      if (y > peak + spec.delta) return log_normal_pdf(y, peak, sigma);
      return std::log1p(-2.0 * q_function(spec.delta / sigma)) -
             std::log(peak + 2.0 * spec.delta);
    }
    case OutputDensityVariant::case3: {
      const double ds = spec.delta / sigma;
      const double log_g = std::log(spec.beta) - 0.5 * ds * ds;
      const double log_t = std::log(kSqrt2Pi * sigma) + log_q_function(ds);
      const double m = std::max(log_g, log_t);
      const double log_norm = m + std::log(std::exp(log_g - m) + std::exp(log_t - m));
      if (y < -spec.delta) {
        return -0.5 * y * y / (sigma * sigma) - log_norm;
      }
      return -0.5 * ds * ds - (y + spec.delta) / spec.beta - log_norm;
    }
  }
  throw std::logic_error("log_output_density: unreachable");
}

double output_density(const OutputDensitySpec& spec, double y) {
  return std::exp(log_output_density(spec, y));
}

double duality_gap(const DiscreteInputDistribution& dist,
                   const OutputDensitySpec& spec, const ChannelLaw& law,
                   const QuadratureConfig& cfg) {
  cfg.validate();
  dist.validate();
  spec.validate();
  const double sigma = law.sigma;
  // Knots of the piecewise output laws; quadrature intervals are split there.
  std::vector<double> knots;
  if (spec.variant == OutputDensityVariant::case1_high ||
      spec.variant == OutputDensityVariant::case2_high) {
    knots = {-spec.delta, *spec.params.peak_amplitude + spec.delta};
  } else if (spec.variant == OutputDensityVariant::case3) {
    knots = {-spec.delta};
  }
  const double h_w = 0.5 * (kLog2PiE + 2.0 * std::log(sigma));
  double total = 0.0;
  for (Eigen::Index i = 0; i < dist.points.size(); ++i) {
    if (!(dist.probs[i] > 0.0)) continue;
    const double x = dist.points[i];
    std::vector<double> edges = {x - 10.0 * sigma, x + 10.0 * sigma};
    for (double k : knots) {
      if (k > edges.front() && k < edges.back()) edges.insert(edges.end() - 1, k);
    }
    std::sort(edges.begin(), edges.end());
    double cross = 0.0;  // E[log R'(Y) | X = x]
    for (size_t s = 0; s + 1 < edges.size(); ++s) {
      cross += integrate_adaptive(
          [&](double y) {
            return normal_pdf(y, x, sigma) * log_output_density(spec, y);
          },
          edges[s], edges[s + 1], cfg);
    }
    total += dist.probs[i] * (-h_w - cross);
  }
  return total;
}

}  // namespace oicap
