#pragma once

#include <array>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotvol/data/quotes.hpp"

namespace spotvol::data {

// Contract counts and mean quoted IV by moneyness x maturity bucket.
// Moneyness breakpoints 0.975, 1, 1.025; maturity-day buckets [7,45),
// [45,90), [90,180), [180,inf) so the cells partition any filtered panel.
struct PanelSummary {
  static constexpr std::array<double, 3> kMoneynessEdges = {0.975, 1.0, 1.025};
  static constexpr std::array<double, 4> kTauDayEdges = {7.0, 45.0, 90.0, 180.0};

  std::array<std::array<std::size_t, 4>, 4> counts{};   // [k bucket][tau bucket]
  std::array<std::array<double, 4>, 4> mean_iv{};
  std::size_t total = 0;

  nlohmann::json to_json() const {
    nlohmann::json j;
    j["moneyness_edges"] = kMoneynessEdges;
    j["tau_day_edges"] = kTauDayEdges;
    j["counts"] = counts;
    j["mean_iv"] = mean_iv;
    j["total"] = total;
    return j;
  }
};

inline PanelSummary panel_summary(const std::vector<DailyPanel>& panels) {
  PanelSummary summary;
  std::array<std::array<double, 4>, 4> iv_sum{};
  for (const DailyPanel& panel : panels) {
    for (const PanelQuote& q : panel.quotes) {
      std::size_t kb = 0;
      while (kb < PanelSummary::kMoneynessEdges.size() &&
             q.moneyness >= PanelSummary::kMoneynessEdges[kb])
        ++kb;
      const double days = q.tau * 365.0;
      std::size_t tb = 0;
      while (tb + 1 < PanelSummary::kTauDayEdges.size() &&
             days >= PanelSummary::kTauDayEdges[tb + 1])
        ++tb;
      ++summary.counts[kb][tb];
      iv_sum[kb][tb] += q.iv;
      ++summary.total;
    }
  }
  for (std::size_t r = 0; r < 4; ++r)
    for (std::size_t c = 0; c < 4; ++c)
      summary.mean_iv[r][c] =
          summary.counts[r][c] > 0
              ? iv_sum[r][c] / static_cast<double>(summary.counts[r][c])
              : 0.0;
  return summary;
}

}  // namespace spotvol::data
