#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "spotvol/inference/estimator.hpp"

namespace spotvol::inference {

// One estimation->application step of the annual protocol: parameters fitted
// on the estimation year are applied, frozen, to the following year.
struct ProvenanceEntry {
  int estimation_year = 0;
  data::Date estimation_first = 0, estimation_last = 0;
  int application_year = 0;
  data::Date application_first = 0, application_last = 0;
  nlohmann::json theta;

  nlohmann::json to_json() const {
    return nlohmann::json{{"estimation_year", estimation_year},
                          {"estimation_first", estimation_first},
                          {"estimation_last", estimation_last},
                          {"application_year", application_year},
                          {"application_first", application_first},
                          {"application_last", application_last},
                          {"theta", theta}};
  }
};

struct WalkForwardResult {
  SpotVariancePath path;               // concatenated over application years
  std::map<int, models::ModelParams> theta_by_year;  // keyed by estimation year
  std::vector<ProvenanceEntry> provenance;
  std::vector<int> gap_years;          // years skipped for lack of a prior year
  std::map<int, FitDiagnostics> diagnostics_by_year;
};

// Every parameter vector must have been estimated strictly before the window
// it prices; violated entries are returned.
inline std::vector<std::string> audit_no_lookahead(
    const std::vector<ProvenanceEntry>& provenance) {
  std::vector<std::string> violations;
  for (const auto& e : provenance) {
    if (!(e.estimation_last < e.application_first))
      violations.push_back("theta estimated through " +
                           std::to_string(e.estimation_last) +
                           " applied from " + std::to_string(e.application_first));
    if (e.estimation_year >= e.application_year)
      violations.push_back("estimation year " + std::to_string(e.estimation_year) +
                           " not before application year " +
                           std::to_string(e.application_year));
  }
  return violations;
}

// Annual walk-forward: structural parameters from year y price year y+1.
// Years without a preceding estimation year are flagged as gaps, never
// filled. Requires at least two calendar years of panels.
inline WalkForwardResult walk_forward(const PricingBackend& backend,
                                      const std::vector<DayQuotes>& all_days,
                                      const models::ModelParams& theta0,
                                      const InferenceConfig& config,
                                      const std::optional<surrogate::TrainingBox>&
                                          surrogate_box = std::nullopt) {
  std::map<int, std::vector<DayQuotes>> by_year;
  for (const DayQuotes& day : all_days)
    by_year[data::date_year(day.date)].push_back(day);
  if (by_year.size() < 2)
    throw DataError("walk_forward: need at least 2 calendar years of panels");

  WalkForwardResult result;
  models::ModelParams warm_start = theta0;
  for (auto it = std::next(by_year.begin()); it != by_year.end(); ++it) {
    const int year = it->first;
    const auto prev = by_year.find(year - 1);
    if (prev == by_year.end()) {
      result.gap_years.push_back(year);
      continue;
    }

    if (!result.theta_by_year.count(year - 1)) {
      const TwoStepResult estimated = two_step_iterate(
          backend, prev->second, warm_start, config, surrogate_box);
      result.theta_by_year[year - 1] = estimated.theta;
      result.diagnostics_by_year[year - 1] = estimated.diagnostics;
      warm_start = estimated.theta;
    }
    const models::ModelParams& theta = result.theta_by_year.at(year - 1);

    const std::vector<DayQuotes>& days = it->second;
    std::vector<DayInference> spot(days.size());
    parallel_for(days.size(), [&](std::size_t d) {
      spot[d] = infer_spot_day(backend, days[d], theta, config);
    });
    for (std::size_t d = 0; d < days.size(); ++d) {
      result.path.dates.push_back(days[d].date);
      result.path.v_hat.push_back(spot[d].v_hat);
      result.path.option_rmse.push_back(spot[d].option_rmse);
      result.path.usable.push_back(spot[d].usable);
    }

    ProvenanceEntry entry;
    entry.estimation_year = year - 1;
    entry.estimation_first = prev->second.front().date;
    entry.estimation_last = prev->second.back().date;
    entry.application_year = year;
    entry.application_first = days.front().date;
    entry.application_last = days.back().date;
    entry.theta = models::to_json(theta);
    result.provenance.push_back(entry);
  }
  return result;
}

}  // namespace spotvol::inference
