#pragma once

#include <string>
#include <vector>

#include "agentgit/engine.hpp"
#include "agentgit/formulas.hpp"
#include "agentgit/store.hpp"

namespace agentgit {

enum class SweepStrategy { Standard, Rollback };

SweepStrategy sweep_strategy_from_string(const std::string& s);
std::string to_string(SweepStrategy s);

// Full-factorial exploration of a workflow's option tree.
//   Standard: every leaf re-executes its full path from the root; no
//   checkpoint reuse. Rollback: each tree edge is executed exactly
//   once, children resume from the parent checkpoint.
struct SweepPlan {
  WorkflowSpec spec;
  SweepStrategy strategy = SweepStrategy::Rollback;
  int parallelism = 1;
};

struct SweepAccounting {
  std::int64_t steps_executed = 0;  // executor invocations
  std::int64_t tokens_in = 0;
  std::int64_t tokens_out = 0;
  std::int64_t wall_ms = 0;
  std::vector<std::int64_t> per_layer;  // invocations per step, 1-based layer i at [i-1]

  Json to_json() const;
  static SweepAccounting from_json(const Json& j);
};

struct SweepLeaf {
  std::vector<int> choices;
  std::string state_hash;
  std::string checkpoint;
  bool failed = false;
  std::string error;
};

struct SweepResult {
  std::vector<int> x;
  SweepStrategy strategy = SweepStrategy::Rollback;
  std::string root_checkpoint;
  std::vector<SweepLeaf> leaves;  // lexicographic by choices
  SweepAccounting accounting;

  bool all_ok() const;
  std::size_t ok_leaf_count() const;
};

// All option-index vectors in lexicographic order; exactly prod(x_i).
std::vector<std::vector<int>> enumerate_leaves(const std::vector<int>& x);
std::vector<std::vector<int>> enumerate_leaves(const WorkflowSpec& spec);

// Executes the plan with up to plan.parallelism workers. Workers share
// only the store and the work queue; results are independent of the
// interleaving. A failed edge prunes its subtree and marks those
// leaves failed instead of aborting the sweep.
SweepResult run_sweep(Store& store, const SweepPlan& plan, const ExecutorRegistry& registry,
                      RunJournal* journal = nullptr,
                      std::optional<std::int64_t> fixed_ts = std::nullopt);

// Predicted vs observed cost report over both strategies.
struct FormulaReport {
  std::vector<int> x;
  BigInt l;
  BigInt s_std;
  BigInt s_rollback;
  BigRational eta;

  std::int64_t observed_std_steps = -1;
  std::int64_t observed_rollback_steps = -1;
  std::int64_t observed_std_leaves = -1;
  std::int64_t observed_rollback_leaves = -1;

  bool leaf_count_ok = false;      // observed leaves equal prod(x_i)
  bool standard_steps_ok = false;  // observed standard steps equal n * prod(x_i)
  bool rollback_steps_ok = false;  // observed rollback steps equal the edge count

  bool ok() const { return leaf_count_ok && standard_steps_ok && rollback_steps_ok; }
  std::vector<std::string> violations() const;
  Json to_json() const;
};

// Asserts observed step counts and leaf counts against the closed
// forms, exactly. Both sweeps must share x.
FormulaReport verify_formulas(const SweepResult& standard_result,
                              const SweepResult& rollback_result);

// Sweep report file: {x, strategy, leaves, accounting, formula_report}.
Json sweep_report_json(const SweepResult& result);
SweepResult sweep_result_from_report(const Json& report);

}  // namespace agentgit
