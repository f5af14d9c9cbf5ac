#include "oicap/numerics.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <queue>

namespace oicap {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;
constexpr double kSqrt2 = 1.4142135623730950488016887242097;

void require_finite(double x, const char* who) {
  if (!std::isfinite(x)) {
    throw std::domain_error(std::string(who) + ": non-finite argument");
  }
}

}  // namespace

void QuadratureConfig::validate() const {
  if (!(relative_tolerance > 0.0) || relative_tolerance > 1e-3) {
    throw std::domain_error("QuadratureConfig: relative_tolerance must be in (0, 1e-3]");
  }
  if (!(absolute_tolerance >= 0.0)) {
    throw std::domain_error("QuadratureConfig: absolute_tolerance must be >= 0");
  }
  if (max_subdivisions < 1) {
    throw std::domain_error("QuadratureConfig: max_subdivisions must be positive");
  }
  if (hermite_nodes < 8) {
    throw std::domain_error("QuadratureConfig: hermite_nodes must be >= 8");
  }
}

double q_function(double x) {
  require_finite(x, "q_function");
  return 0.5 * std::erfc(x / kSqrt2);
}

double log_q_function(double x) {
  require_finite(x, "log_q_function");
  if (x < 0.0) {
    // Q(x) = 1 - Q(-x); Q(-x) < 1/2 so log1p is exact here.
    return std::log1p(-q_function(-x));
  }
  if (x <= 26.0) {
    return std::log(q_function(x));
  }
  // Tail expansion Q(x) = phi(x)/x * (1 - 1/x^2 + 3/x^4 - 15/x^6 + ...).
  // At x = 26 the truncation error is ~1e-13 relative and it falls fast.
  const double u = 1.0 / (x * x);
  const double series = u * (-1.0 + u * (3.0 + u * (-15.0 + u * (105.0 + u * -945.0))));
  return -0.5 * x * x - std::log(x) - 0.5 * kLog2Pi + std::log1p(series);
}

namespace {

// Q with infinities allowed (internal plumbing for interval probabilities).
double q_ext(double x) {
  if (x == std::numeric_limits<double>::infinity()) return 0.0;
  if (x == -std::numeric_limits<double>::infinity()) return 1.0;
  return q_function(x);
}

double log_q_ext(double x) {
  if (x == std::numeric_limits<double>::infinity()) {
    return -std::numeric_limits<double>::infinity();
  }
  if (x == -std::numeric_limits<double>::infinity()) return 0.0;
  return log_q_function(x);
}

// log(Q(a) - Q(b)) for a < b, both mapped into the right tail by callers.
double log_q_difference(double a, double b) {
  const double la = log_q_ext(a);
  const double lb = log_q_ext(b);
  return la + std::log1p(-std::exp(lb - la));
}

}  // namespace

double gaussian_interval_prob(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw std::domain_error("gaussian_interval_prob: bad interval");
  }
  if (lo >= 0.0) return q_ext(lo) - q_ext(hi);
  if (hi <= 0.0) return q_ext(-hi) - q_ext(-lo);
  return 1.0 - q_ext(-lo) - q_ext(hi);
}

double log_gaussian_interval_prob(double lo, double hi) {
  if (std::isnan(lo) || std::isnan(hi) || lo > hi) {
    throw std::domain_error("log_gaussian_interval_prob: bad interval");
  }
  if (lo >= 0.0) return log_q_difference(lo, hi);
  if (hi <= 0.0) return log_q_difference(-hi, -lo);
  return std::log(1.0 - q_ext(-lo) - q_ext(hi));
}

double normal_pdf(double y, double mean, double sigma) {
  const double t = (y - mean) / sigma;
  return std::exp(-0.5 * t * t) / (sigma * std::sqrt(2.0 * M_PI));
}

double log_normal_pdf(double y, double mean, double sigma) {
  const double t = (y - mean) / sigma;
  return -0.5 * t * t - std::log(sigma) - 0.5 * kLog2Pi;
}

double solve_monotone_root(const std::function<double(double)>& f, double lo,
                           double hi, double tol) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi) || !(tol > 0.0)) {
    throw std::invalid_argument("solve_monotone_root: bad bracket or tolerance");
  }
  double a = lo, b = hi;
  double fa = f(a), fb = f(b);
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  if ((fa > 0.0) == (fb > 0.0)) {
    throw std::invalid_argument("solve_monotone_root: f has equal signs at the bracket endpoints");
  }
  // Brent: inverse quadratic / secant steps, bisection whenever progress stalls.
  double c = a, fc = fa;
  double d = b - a, e = d;
  for (int iter = 0; iter < 400; ++iter) {
    if ((fb > 0.0) == (fc > 0.0)) {
      c = a; fc = fa; d = e = b - a;
    }
    if (std::fabs(fc) < std::fabs(fb)) {
      a = b; b = c; c = a;
      fa = fb; fb = fc; fc = fa;
    }
    const double tol1 = 2.0 * std::numeric_limits<double>::epsilon() * std::fabs(b) + 0.5 * tol;
    const double xm = 0.5 * (c - b);
    if (std::fabs(xm) <= tol1 || fb == 0.0) return b;
    if (std::fabs(e) >= tol1 && std::fabs(fa) > std::fabs(fb)) {
      double p, q;
      const double s = fb / fa;
      if (a == c) {
        p = 2.0 * xm * s;
        q = 1.0 - s;
      } else {
        const double qq = fa / fc, r = fb / fc;
        p = s * (2.0 * xm * qq * (qq - r) - (b - a) * (r - 1.0));
        q = (qq - 1.0) * (r - 1.0) * (s - 1.0);
      }
      if (p > 0.0) q = -q;
      p = std::fabs(p);
      if (2.0 * p < std::min(3.0 * xm * q - std::fabs(tol1 * q), std::fabs(e * q))) {
        e = d; d = p / q;
      } else {
        d = xm; e = d;
      }
    } else {
      d = xm; e = d;
    }
    a = b; fa = fb;
    b += (std::fabs(d) > tol1) ? d : (xm > 0.0 ? tol1 : -tol1);
    fb = f(b);
  }
  return b;
}

namespace {

// Gauss-Kronrod 15-point nodes/weights on [-1,1] with the embedded 7-point
// Gauss rule (nodes 1,3,...,13 of the Kronrod set).
constexpr double kGK15Nodes[15] = {
    -0.991455371120812639206854697526329,
    -0.949107912342758524526189684047851,
    -0.864864423359769072789712788640926,
    -0.741531185599394439863864773280788,
    -0.586087235467691130294144838258730,
    -0.405845151377397166906606412076961,
    -0.207784955007898467600689403773245,
    0.0,
    0.207784955007898467600689403773245,
    0.405845151377397166906606412076961,
    0.586087235467691130294144838258730,
    0.741531185599394439863864773280788,
    0.864864423359769072789712788640926,
    0.949107912342758524526189684047851,
    0.991455371120812639206854697526329};

constexpr double kGK15Weights[15] = {
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
    0.204432940075298892414161999234649,
    0.190350578064785409913256402421014,
    0.169004726639267902826583426598550,
    0.140653259715525918745189590510238,
    0.104790010322250183839876322541518,
    0.063092092629978553290700663189204,
    0.022935322010529224963732008058970};

constexpr double kG7Weights[7] = {
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
    0.381830050505118944950369775488975,
    0.279705391489276667901467771423780,
    0.129484966168869693270611432679082};

struct Segment {
  double a, b;
  double value;
  double error;
  bool operator<(const Segment& o) const { return error < o.error; }
};

Segment evaluate_segment(const std::function<double(double)>& f, double a, double b) {
  const double half = 0.5 * (b - a);
  const double mid = 0.5 * (a + b);
  double kronrod = 0.0, gauss = 0.0;
  for (int i = 0; i < 15; ++i) {
    const double fx = f(mid + half * kGK15Nodes[i]);
    kronrod += kGK15Weights[i] * fx;
    if (i % 2 == 1) gauss += kG7Weights[i / 2] * fx;
  }
  kronrod *= half;
  gauss *= half;
  return {a, b, kronrod, std::fabs(kronrod - gauss)};
}

}  // namespace

double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, const QuadratureConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(a) || !std::isfinite(b) || !(a < b)) {
    throw std::domain_error("integrate_adaptive: requires finite a < b");
  }
  std::priority_queue<Segment> queue;
  Segment whole = evaluate_segment(f, a, b);
  double total = whole.value;
  double total_error = whole.error;
  queue.push(whole);
  int used = 1;
  while (total_error > std::max(cfg.absolute_tolerance,
                                cfg.relative_tolerance * std::fabs(total))) {
    if (used >= cfg.max_subdivisions) {
      throw convergence_error("integrate_adaptive: subdivision budget exhausted", total);
    }
    Segment worst = queue.top();
    queue.pop();
    const double mid = 0.5 * (worst.a + worst.b);
    Segment left = evaluate_segment(f, worst.a, mid);
    Segment right = evaluate_segment(f, mid, worst.b);
    total += left.value + right.value - worst.value;
    total_error += left.error + right.error - worst.error;
    queue.push(left);
    queue.push(right);
    ++used;
  }
  return total;
}

const std::pair<std::vector<double>, std::vector<double>>& gauss_hermite_rule(int n) {
  if (n < 2) throw std::domain_error("gauss_hermite_rule: need n >= 2");
  static std::mutex mutex;
  static std::map<int, std::pair<std::vector<double>, std::vector<double>>> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto it = cache.find(n);
  if (it != cache.end()) return it->second;

  // Golub-Welsch on the Hermite Jacobi matrix; nodes rescaled to N(0,1)
  // and weights normalized so they sum to one.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    const double off = std::sqrt(k / 2.0);
    jacobi(k, k - 1) = off;
    jacobi(k - 1, k) = off;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(jacobi);
  std::vector<double> nodes(n), weights(n);
  for (int i = 0; i < n; ++i) {
    nodes[i] = kSqrt2 * solver.eigenvalues()(i);
    const double v0 = solver.eigenvectors()(0, i);
    weights[i] = v0 * v0;
  }
  auto [pos, inserted] = cache.emplace(n, std::make_pair(std::move(nodes), std::move(weights)));
  return pos->second;
}

double gaussian_expectation(const std::function<double(double)>& g,
                            double mean, double sigma,
                            const QuadratureConfig& cfg) {
  cfg.validate();
  if (!std::isfinite(mean) || !(sigma > 0.0) || !std::isfinite(sigma)) {
    throw std::domain_error("gaussian_expectation: bad mean or sigma");
  }
  const auto& [nodes, weights] = gauss_hermite_rule(cfg.hermite_nodes);
  double acc = 0.0;
  for (size_t i = 0; i < nodes.size(); ++i) {
    acc += weights[i] * g(mean + sigma * nodes[i]);
  }
  return acc;
}

}  // namespace oicap
