#pragma once

#include <map>
#include <string>
#include <vector>

#include "spotvol/cli/io.hpp"
#include "spotvol/data/csv.hpp"
#include "spotvol/forecast/evaluate.hpp"
#include "spotvol/forecast/har.hpp"

namespace spotvol::cli {

// In-sample coefficient table: one column per model, coefficient rows with
// t-statistics beneath, adjusted R^2 last.
inline void write_insample_table(const std::string& path,
                                 const std::vector<forecast::HarFit>& fits) {
  std::vector<std::string> header{"row"};
  for (const auto& fit : fits) header.push_back(fit.model_tag);

  std::vector<std::string> row_names;
  for (const auto& fit : fits)
    for (const auto& col : fit.columns)
      if (std::find(row_names.begin(), row_names.end(), col) == row_names.end())
        row_names.push_back(col);

  std::vector<std::vector<std::string>> rows;
  for (const auto& name : row_names) {
    std::vector<std::string> coef_row{name}, t_row{"(t) " + name};
    for (const auto& fit : fits) {
      const auto it = std::find(fit.columns.begin(), fit.columns.end(), name);
      if (it == fit.columns.end()) {
        coef_row.push_back("");
        t_row.push_back("");
      } else {
        const auto idx = static_cast<Eigen::Index>(it - fit.columns.begin());
        coef_row.push_back(fmt(fit.coef(idx), 6));
        t_row.push_back(fmt(fit.t_stat(idx), 5));
      }
    }
    rows.push_back(coef_row);
    rows.push_back(t_row);
  }
  std::vector<std::string> r2_row{"adj_r2"};
  for (const auto& fit : fits) r2_row.push_back(fmt(fit.adj_r2, 6));
  rows.push_back(r2_row);
  data::write_csv(path, header, rows);
}

// One-day out-of-sample accuracy table (MAE / RMSE / QLIKE / MDA by model).
inline void write_oos_table(const std::string& path, const forecast::EvalReport& report) {
  std::vector<std::string> header{"metric"};
  for (const auto& model : report.models) header.push_back(model);
  std::vector<std::vector<std::string>> rows;
  const char* names[] = {"MAE", "RMSE", "QLIKE", "MDA"};
  for (const char* metric : names) {
    std::vector<std::string> row{metric};
    for (const auto& model : report.models) {
      const auto it = report.metrics.find(model);
      if (it == report.metrics.end() || !it->second.count(1)) {
        row.push_back("");
        continue;
      }
      const forecast::HorizonMetrics& m = it->second.at(1);
      const double value = std::string(metric) == "MAE"    ? m.mae
                           : std::string(metric) == "RMSE" ? m.rmse
                           : std::string(metric) == "QLIKE" ? m.qlike
                                                            : m.mda;
      row.push_back(fmt(value, 6));
    }
    rows.push_back(row);
  }
  data::write_csv(path, header, rows);
}

// Pairwise DM statistics with significance stars, lower triangle.
inline void write_dm_table(const std::string& path, const forecast::EvalReport& report) {
  std::vector<std::string> header{"model"};
  for (const auto& model : report.models) header.push_back(model);
  std::vector<std::vector<std::string>> rows;
  for (std::size_t i = 0; i < report.models.size(); ++i) {
    std::vector<std::string> row{report.models[i]};
    for (std::size_t j = 0; j < report.models.size(); ++j) {
      if (j >= i || report.dm_stat.empty()) {
        row.push_back(j == i ? "-" : "");
      } else {
        row.push_back(fmt(report.dm_stat[i][j], 5) + report.dm_stars[i][j]);
      }
    }
    rows.push_back(row);
  }
  data::write_csv(path, header, rows);
}

// Plot-ready per-horizon loss curves.
inline void write_horizon_curves(const std::string& path,
                                 const forecast::EvalReport& report) {
  std::vector<std::string> header{"model", "horizon", "mae", "rmse", "qlike", "mda"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& model : report.models) {
    const auto it = report.metrics.find(model);
    if (it == report.metrics.end()) continue;
    for (const auto& [h, m] : it->second)
      rows.push_back({model, std::to_string(h), fmt(m.mae, 6), fmt(m.rmse, 6),
                      fmt(m.qlike, 6), fmt(m.mda, 6)});
  }
  data::write_csv(path, header, rows);
}

// Plot-ready boxplot summaries of per-day errors.
inline void write_boxplot_summary(const std::string& path,
                                  const forecast::EvalReport& report) {
  std::vector<std::string> header{"model", "series", "q1", "median", "q3"};
  std::vector<std::vector<std::string>> rows;
  for (const auto& [model, b] : report.abs_error_box)
    rows.push_back({model, "abs_error", fmt(b.q1, 6), fmt(b.median, 6), fmt(b.q3, 6)});
  for (const auto& [model, b] : report.qlike_box)
    rows.push_back({model, "qlike", fmt(b.q1, 6), fmt(b.median, 6), fmt(b.q3, 6)});
  data::write_csv(path, header, rows);
}

}  // namespace spotvol::cli
