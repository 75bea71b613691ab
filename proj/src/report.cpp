#include "agentgit/report.hpp"

namespace agentgit {

Json RunReport::to_json() const {
  auto totals_json = [](const StrategyTotals& t) {
    Json j = Json::object();
    j["steps"] = t.steps;
    j["tokens_in"] = t.tokens_in;
    j["tokens_out"] = t.tokens_out;
    j["wall_ms"] = t.wall_ms;
    j["leaves"] = t.leaves;
    return j;
  };

  Json j = Json::object();
  j["journal"] = totals_json(journal_totals);
  j["journal"]["records"] = journal_records;
  j["per_strategy"] = Json::object();
  for (const auto& [strategy, totals] : per_strategy) {
    j["per_strategy"][strategy] = totals_json(totals);
  }
  if (formulas.has_value()) j["formula_report"] = formulas->to_json();
  if (observed_step_ratio.has_value()) j["observed_step_ratio"] = *observed_step_ratio;
  return j;
}

RunReport build_run_report(const std::vector<std::filesystem::path>& journals,
                           const std::vector<SweepResult>& sweeps) {
  RunReport report;

  for (const auto& path : journals) {
    for (const JournalRecord& record : read_journal(path)) {
      if (record.tokens_in < 0 || record.tokens_out < 0) {
        throw ValidationError("journal " + path.string() +
                              ": negative token count for step '" + record.step + "'");
      }
      if (record.wall_ms < 0) {
        throw ValidationError("journal " + path.string() +
                              ": negative wall time for step '" + record.step + "'");
      }
      ++report.journal_records;
      ++report.journal_totals.steps;
      report.journal_totals.tokens_in += record.tokens_in;
      report.journal_totals.tokens_out += record.tokens_out;
      report.journal_totals.wall_ms += record.wall_ms;
    }
  }

  const SweepResult* standard_result = nullptr;
  const SweepResult* rollback_result = nullptr;
  for (const SweepResult& sweep : sweeps) {
    StrategyTotals& totals = report.per_strategy[to_string(sweep.strategy)];
    totals.steps += sweep.accounting.steps_executed;
    totals.tokens_in += sweep.accounting.tokens_in;
    totals.tokens_out += sweep.accounting.tokens_out;
    totals.wall_ms += sweep.accounting.wall_ms;
    totals.leaves += static_cast<std::int64_t>(sweep.ok_leaf_count());
    if (sweep.strategy == SweepStrategy::Standard) standard_result = &sweep;
    if (sweep.strategy == SweepStrategy::Rollback) rollback_result = &sweep;
  }

  if (standard_result != nullptr && rollback_result != nullptr &&
      standard_result->x == rollback_result->x) {
    report.formulas = verify_formulas(*standard_result, *rollback_result);
    if (standard_result->accounting.steps_executed > 0) {
      BigRational ratio(rollback_result->accounting.steps_executed,
                        standard_result->accounting.steps_executed);
      report.observed_step_ratio = to_decimal(ratio, 12);
    }
  }
  return report;
}

}  // namespace agentgit
