#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <vector>

#include "spotvol/errors.hpp"

namespace spotvol::math {

struct NelderMeadResult {
  std::vector<double> x;
  double fx = 0.0;
  int evaluations = 0;
  bool converged = false;
};

// Derivative-free simplex search inside a box. Coordinates are optimised in
// an unbounded space and mapped into [lo,hi] through a scaled logistic, so
// the simplex never needs clipping.
class BoxedNelderMead {
public:
  BoxedNelderMead(std::vector<double> lo, std::vector<double> hi)
      : lo_(std::move(lo)), hi_(std::move(hi)) {
    if (lo_.size() != hi_.size() || lo_.empty())
      throw DomainError("nelder_mead: bounds size mismatch");
    for (std::size_t i = 0; i < lo_.size(); ++i)
      if (!(lo_[i] < hi_[i]))
        throw DomainError("nelder_mead: lower bound must be < upper bound");
  }

  std::vector<double> to_box(const std::vector<double>& z) const {
    std::vector<double> x(z.size());
    for (std::size_t i = 0; i < z.size(); ++i)
      x[i] = lo_[i] + (hi_[i] - lo_[i]) / (1.0 + std::exp(-z[i]));
    return x;
  }

  std::vector<double> from_box(const std::vector<double>& x) const {
    std::vector<double> z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
      double u = (x[i] - lo_[i]) / (hi_[i] - lo_[i]);
      u = std::clamp(u, 1e-9, 1.0 - 1e-9);
      z[i] = std::log(u / (1.0 - u));
    }
    return z;
  }

  NelderMeadResult minimize(const std::function<double(const std::vector<double>&)>& f,
                            const std::vector<double>& x0, int max_evals = 400,
                            double ftol = 1e-10) const {
    const std::size_t n = lo_.size();
    if (x0.size() != n) throw DomainError("nelder_mead: x0 size mismatch");

    auto eval = [&](const std::vector<double>& z) { return f(to_box(z)); };

    std::vector<std::vector<double>> simplex;
    std::vector<double> fvals;
    std::vector<double> z0 = from_box(x0);
    simplex.push_back(z0);
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> z = z0;
      z[i] += 0.25;
      simplex.push_back(z);
    }
    int evals = 0;
    for (auto& z : simplex) {
      fvals.push_back(eval(z));
      ++evals;
    }

    NelderMeadResult result;
    const double alpha = 1.0, gamma = 2.0, rho = 0.5, sigma = 0.5;

    while (evals < max_evals) {
      std::vector<std::size_t> order(simplex.size());
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(),
                [&](std::size_t a, std::size_t b) { return fvals[a] < fvals[b]; });
      std::vector<std::vector<double>> s2;
      std::vector<double> f2;
      for (auto idx : order) {
        s2.push_back(simplex[idx]);
        f2.push_back(fvals[idx]);
      }
      simplex.swap(s2);
      fvals.swap(f2);

      if (std::abs(fvals.back() - fvals.front()) <=
          ftol * (std::abs(fvals.front()) + ftol)) {
        result.converged = true;
        break;
      }

      std::vector<double> centroid(n, 0.0);
      for (std::size_t i = 0; i + 1 < simplex.size(); ++i)
        for (std::size_t j = 0; j < n; ++j) centroid[j] += simplex[i][j];
      for (double& c : centroid) c /= static_cast<double>(n);

      auto blend = [&](double coef) {
        std::vector<double> z(n);
        for (std::size_t j = 0; j < n; ++j)
          z[j] = centroid[j] + coef * (centroid[j] - simplex.back()[j]);
        return z;
      };

      std::vector<double> zr = blend(alpha);
      double fr = eval(zr); ++evals;
      if (fr < fvals.front()) {
        std::vector<double> ze = blend(gamma);
        double fe = eval(ze); ++evals;
        if (fe < fr) { simplex.back() = ze; fvals.back() = fe; }
        else { simplex.back() = zr; fvals.back() = fr; }
      } else if (fr < fvals[fvals.size() - 2]) {
        simplex.back() = zr;
        fvals.back() = fr;
      } else {
        std::vector<double> zc = blend(-rho);
        double fc = eval(zc); ++evals;
        if (fc < fvals.back()) {
          simplex.back() = zc;
          fvals.back() = fc;
        } else {
          // shrink toward the best vertex
          for (std::size_t i = 1; i < simplex.size(); ++i) {
            for (std::size_t j = 0; j < n; ++j)
              simplex[i][j] = simplex[0][j] + sigma * (simplex[i][j] - simplex[0][j]);
            fvals[i] = eval(simplex[i]);
            ++evals;
          }
        }
      }
    }

    std::size_t best = 0;
    for (std::size_t i = 1; i < fvals.size(); ++i)
      if (fvals[i] < fvals[best]) best = i;
    result.x = to_box(simplex[best]);
    result.fx = fvals[best];
    result.evaluations = evals;
    return result;
  }

private:
  std::vector<double> lo_, hi_;
};

}  // namespace spotvol::math
