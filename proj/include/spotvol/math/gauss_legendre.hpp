#pragma once

#include <cmath>
#include <cstddef>
#include <numbers>
#include <vector>

namespace spotvol::math {

struct QuadRule {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Gauss-Legendre rule on [-1,1] by Newton iteration on Legendre polynomials.
inline QuadRule gauss_legendre(std::size_t n) {
  QuadRule rule;
  rule.nodes.resize(n);
  rule.weights.resize(n);
  const std::size_t m = (n + 1) / 2;
  for (std::size_t i = 0; i < m; ++i) {
    // Chebyshev-based initial guess
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double pp = 0.0;
    for (int iter = 0; iter < 100; ++iter) {
      double p0 = 1.0, p1 = 0.0;
      for (std::size_t j = 0; j < n; ++j) {
        double p2 = p1;
        p1 = p0;
        p0 = ((2.0 * static_cast<double>(j) + 1.0) * x * p1 -
              static_cast<double>(j) * p2) /
             (static_cast<double>(j) + 1.0);
      }
      pp = static_cast<double>(n) * (x * p0 - p1) / (x * x - 1.0);
      double dx = p0 / pp;
      x -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    rule.nodes[i] = -x;
    rule.nodes[n - 1 - i] = x;
    double w = 2.0 / ((1.0 - x * x) * pp * pp);
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  return rule;
}

// Rule mapped onto [a,b].
inline QuadRule gauss_legendre(std::size_t n, double a, double b) {
  QuadRule rule = gauss_legendre(n);
  const double c = 0.5 * (a + b), h = 0.5 * (b - a);
  for (std::size_t i = 0; i < n; ++i) {
    rule.nodes[i] = c + h * rule.nodes[i];
    rule.weights[i] *= h;
  }
  return rule;
}

template <typename F>
double integrate_gl(F&& f, double a, double b, std::size_t n = 32) {
  QuadRule rule = gauss_legendre(n, a, b);
  double sum = 0.0;
  for (std::size_t i = 0; i < rule.nodes.size(); ++i)
    sum += rule.weights[i] * f(rule.nodes[i]);
  return sum;
}

// Panelised integration with log-spaced panels; suited to integrands with an
// integrable singularity at the left endpoint.
template <typename F>
double integrate_log_panels(F&& f, double a, double b, std::size_t panels,
                            std::size_t pts_per_panel = 16) {
  double sum = 0.0;
  double lo = a;
  const double ratio = std::pow(b / a, 1.0 / static_cast<double>(panels));
  for (std::size_t p = 0; p < panels; ++p) {
    double hi = (p + 1 == panels) ? b : lo * ratio;
    sum += integrate_gl(f, lo, hi, pts_per_panel);
    lo = hi;
  }
  return sum;
}

}  // namespace spotvol::math
