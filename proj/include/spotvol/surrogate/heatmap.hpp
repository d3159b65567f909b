#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotvol/errors.hpp"
#include "spotvol/parallel.hpp"
#include "spotvol/surrogate/dataset.hpp"

namespace spotvol::surrogate {

// Moneyness x maturity accuracy table over the usual panel buckets
// (K/S breakpoints 0.975, 1, 1.025; maturities 7-45, 45-90, 90-180,
// 180-365 days). Entries are absolute percentage errors of implied vol.
struct AccuracyReport {
  std::vector<double> k_edges{0.975, 1.0, 1.025};
  std::vector<double> tau_day_edges{7.0, 45.0, 90.0, 180.0, 365.0};
  // [k bucket][tau bucket]
  std::vector<std::vector<double>> mean_ape;
  std::vector<std::vector<double>> max_ape;
  std::vector<std::vector<int>> count;

  std::size_t k_buckets() const { return k_edges.size() + 1; }
  std::size_t tau_buckets() const { return tau_day_edges.size() - 1; }
  bool missing(std::size_t r, std::size_t c) const { return count[r][c] == 0; }

  double worst_mean() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < k_buckets(); ++r)
      for (std::size_t c = 0; c < tau_buckets(); ++c)
        if (!missing(r, c)) worst = std::max(worst, mean_ape[r][c]);
    return worst;
  }
  double worst_max() const {
    double worst = 0.0;
    for (std::size_t r = 0; r < k_buckets(); ++r)
      for (std::size_t c = 0; c < tau_buckets(); ++c)
        if (!missing(r, c)) worst = std::max(worst, max_ape[r][c]);
    return worst;
  }

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["k_edges"] = k_edges;
    j["tau_day_edges"] = tau_day_edges;
    j["mean_ape_pct"] = mean_ape;
    j["max_ape_pct"] = max_ape;
    j["count"] = count;
    return j;
  }
};

// Implied vol at one (params, contract) point; both the surrogate and the
// fresh-quadrature reference are expressed this way so a report can also be
// run with the predictor wired straight to the reference.
using PointIv = std::function<double(const std::array<double, kInputDim>&)>;

inline PointIv quadrature_reference(int kernel_factors = 20,
                                    double kernel_spacing = 2.5) {
  return [kernel_factors, kernel_spacing](const std::array<double, kInputDim>& x) {
    models::HestonParams p;
    p.lambda = x[0];
    p.theta = x[1];
    p.nu = x[2];
    p.rho = x[3];
    p.v0 = x[4];
    const models::LiftedKernel kernel =
        models::build_lifted_kernel(kernel_factors, x[5], kernel_spacing);
    models::LiftedChfSolver solver(p, kernel, x[7]);
    pricing::BatchCharFn chf = [&](std::span<const models::Complex> as) {
      std::vector<models::Complex> us(as.size());
      for (std::size_t i = 0; i < as.size(); ++i)
        us[i] = models::Complex(0.0, 1.0) * as[i];
      std::vector<models::Complex> expo = solver.log_chf(us);
      std::vector<models::Complex> vals(as.size());
      for (std::size_t i = 0; i < as.size(); ++i) vals[i] = std::exp(expo[i]);
      return vals;
    };
    pricing::ContractSpec c;
    c.spot = 1.0;
    c.strike = x[6];
    c.maturity = x[7];
    c.is_call = true;
    const pricing::FourierGrid grid =
        pricing::FourierGrid::build(chf, x[7], std::abs(std::log(x[6])) + 0.05);
    const double iv =
        pricing::implied_vol(c, grid.call_price(1.0, x[6], 0.0, 0.0, x[7]));
    if (pricing::bs_vega(c, iv) < 1e-6)
      throw NumericError("heatmap reference: vega too small to pin implied vol");
    return iv;
  };
}

// Bucketed comparison of a predictor against freshly computed reference
// implied vols on points drawn inside the training box. Buckets that do not
// intersect the box stay at count 0 and are reported missing.
inline AccuracyReport evaluate_heatmap(const PointIv& predict, const PointIv& reference,
                                       const TrainingBox& box, int n_per_bucket,
                                       std::uint64_t seed) {
  if (n_per_bucket < 1) throw DomainError("evaluate_heatmap: n_per_bucket must be >= 1");
  AccuracyReport report;
  const std::size_t rows = report.k_buckets(), cols = report.tau_buckets();
  report.mean_ape.assign(rows, std::vector<double>(cols, 0.0));
  report.max_ape.assign(rows, std::vector<double>(cols, 0.0));
  report.count.assign(rows, std::vector<int>(cols, 0));

  struct Cell {
    double sum = 0.0, worst = 0.0;
    int n = 0;
  };
  std::vector<Cell> cells(rows * cols);

  parallel_for(rows * cols, [&](std::size_t cell_idx) {
    const std::size_t r = cell_idx / cols, c = cell_idx % cols;
    const double k_lo = std::max(r == 0 ? box.lo[6] : report.k_edges[r - 1], box.lo[6]);
    const double k_hi = std::min(r == rows - 1 ? box.hi[6] : report.k_edges[r], box.hi[6]);
    const double t_lo = std::max(report.tau_day_edges[c] / 365.0, box.lo[7]);
    const double t_hi = std::min(report.tau_day_edges[c + 1] / 365.0, box.hi[7]);
    if (!(k_lo < k_hi) || !(t_lo < t_hi)) return;

    const std::uint64_t stream = seed * 977 + cell_idx * 131 + 7;
    Cell& cell = cells[cell_idx];
    for (int i = 0; i < n_per_bucket; ++i) {
      const std::uint64_t h = stream + static_cast<std::uint64_t>(i) * 61;
      std::array<double, kInputDim> x{};
      for (int d = 0; d < 6; ++d)
        x[static_cast<std::size_t>(d)] =
            box.lo[static_cast<std::size_t>(d)] +
            (box.hi[static_cast<std::size_t>(d)] - box.lo[static_cast<std::size_t>(d)]) *
                detail::halton(h, detail::kHaltonPrimes[static_cast<std::size_t>(d)]);
      x[7] = t_lo + (t_hi - t_lo) * detail::halton(h, detail::kHaltonPrimes[7]);
      // moneyness restricted to the bucket's overlap with the wedge where
      // implied vol is identifiable from the price
      const MoneynessWedge wedge = moneyness_wedge(x[4], x[1], x[3], x[7]);
      const double wk_lo = std::max(k_lo, std::exp(wedge.log_lo));
      const double wk_hi = std::min(k_hi, std::exp(wedge.log_hi));
      if (!(wk_lo < wk_hi)) continue;
      x[6] = wk_lo + (wk_hi - wk_lo) * detail::halton(h, detail::kHaltonPrimes[6]);
      try {
        const double ref = reference(x);
        const double got = predict(x);
        const double ape = 100.0 * std::abs(got - ref) / std::abs(ref);
        cell.sum += ape;
        cell.worst = std::max(cell.worst, ape);
        ++cell.n;
      } catch (const std::exception&) {
        // unpriceable draw: skip, the bucket keeps its remaining points
      }
    }
  });

  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t c = 0; c < cols; ++c) {
      const Cell& cell = cells[r * cols + c];
      report.count[r][c] = cell.n;
      if (cell.n > 0) {
        report.mean_ape[r][c] = cell.sum / cell.n;
        report.max_ape[r][c] = cell.worst;
      }
    }
  return report;
}

}  // namespace spotvol::surrogate
