#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "agentgit/engine.hpp"
#include "agentgit/sweep.hpp"

namespace agentgit {

struct StrategyTotals {
  std::int64_t steps = 0;
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  std::int64_t wall_ms = 0;
  std::int64_t leaves = 0;
};

// Aggregated accounting across journals and sweep reports, with
// formula flags when both strategies are present for the same x.
struct RunReport {
  StrategyTotals journal_totals;  // every journaled invocation
  std::int64_t journal_records = 0;
  std::map<std::string, StrategyTotals> per_strategy;
  std::optional<FormulaReport> formulas;
  std::optional<std::string> observed_step_ratio;  // rollback/standard

  Json to_json() const;
};

RunReport build_run_report(const std::vector<std::filesystem::path>& journals,
                           const std::vector<SweepResult>& sweeps);

}  // namespace agentgit
