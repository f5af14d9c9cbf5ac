#pragma once

#include <functional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

// Scalar numerics shared by every other component: Gaussian tail
// probabilities (also in log domain), bracketed root finding, adaptive
// Gauss-Kronrod quadrature and Gauss-Hermite expectations.
namespace oicap {

struct QuadratureConfig {
  double relative_tolerance = 1e-9;
  double absolute_tolerance = 1e-12;
  int max_subdivisions = 2000;
  int hermite_nodes = 64;

  void validate() const;  // throws std::domain_error on bad settings
};

/// Thrown when an iterative scheme exhausts its budget; carries the best
/// estimate obtained so far so callers can decide whether it is usable.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, double best_estimate)
      : std::runtime_error(what), best_estimate_(best_estimate) {}
  double best_estimate() const noexcept { return best_estimate_; }

 private:
  double best_estimate_;
};

/// Standard Gaussian tail probability Q(x) = P(Z > x), Z ~ N(0,1).
double q_function(double x);

/// log Q(x), stable far into the right tail where Q underflows.
double log_q_function(double x);

/// P(lo < Z < hi) evaluated without cancellation in either tail.
/// Accepts infinite endpoints.
double gaussian_interval_prob(double lo, double hi);

/// log P(lo < Z < hi); usable when the interval sits deep in a tail.
double log_gaussian_interval_prob(double lo, double hi);

double normal_pdf(double y, double mean, double sigma);
double log_normal_pdf(double y, double mean, double sigma);

/// Root of a strictly monotone f on [lo, hi] with f(lo), f(hi) of opposite
/// signs. Brent iteration with a bisection fallback; `tol` bounds the final
/// bracket width. Throws std::invalid_argument if the bracket is invalid.
double solve_monotone_root(const std::function<double(double)>& f, double lo,
                           double hi, double tol);

/// Adaptive Gauss-Kronrod 15(7) integration of f over [a, b]. Subdivides
/// the worst interval until the accumulated error estimate meets the
/// configured tolerances; throws convergence_error (carrying the best
/// estimate) if the subdivision budget runs out first.
double integrate_adaptive(const std::function<double(double)>& f, double a,
                          double b, const QuadratureConfig& cfg = {});

/// E[g(Y)] for Y ~ N(mean, sigma^2) via Gauss-Hermite quadrature with
/// cfg.hermite_nodes nodes.
double gaussian_expectation(const std::function<double(double)>& g,
                            double mean, double sigma,
                            const QuadratureConfig& cfg = {});

/// Gauss-Hermite rule mapped to N(0,1): E[g(Z)] ~ sum_i weights[i] *
/// g(nodes[i]). Nodes/weights are computed once per order and cached.
const std::pair<std::vector<double>, std::vector<double>>& gauss_hermite_rule(
    int n);

}  // namespace oicap
