#include "agentgit/sweep.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

namespace agentgit {

SweepStrategy sweep_strategy_from_string(const std::string& s) {
  if (s == "standard") return SweepStrategy::Standard;
  if (s == "rollback") return SweepStrategy::Rollback;
  throw ValidationError("unknown sweep strategy '" + s + "'");
}

std::string to_string(SweepStrategy s) {
  return s == SweepStrategy::Standard ? "standard" : "rollback";
}

Json SweepAccounting::to_json() const {
  Json j = Json::object();
  j["steps_executed"] = steps_executed;
  j["tokens_in"] = tokens_in;
  j["tokens_out"] = tokens_out;
  j["wall_ms"] = wall_ms;
  j["per_layer"] = per_layer;
  return j;
}

SweepAccounting SweepAccounting::from_json(const Json& j) {
  SweepAccounting acc;
  acc.steps_executed = j.at("steps_executed").get<std::int64_t>();
  acc.tokens_in = j.at("tokens_in").get<std::int64_t>();
  acc.tokens_out = j.at("tokens_out").get<std::int64_t>();
  acc.wall_ms = j.at("wall_ms").get<std::int64_t>();
  acc.per_layer = j.at("per_layer").get<std::vector<std::int64_t>>();
  return acc;
}

bool SweepResult::all_ok() const {
  return std::all_of(leaves.begin(), leaves.end(),
                     [](const SweepLeaf& leaf) { return !leaf.failed; });
}

std::size_t SweepResult::ok_leaf_count() const {
  return static_cast<std::size_t>(
      std::count_if(leaves.begin(), leaves.end(),
                    [](const SweepLeaf& leaf) { return !leaf.failed; }));
}

std::vector<std::vector<int>> enumerate_leaves(const std::vector<int>& x) {
  if (x.empty()) throw ValidationError("option vector is empty");
  for (int xi : x) {
    if (xi < 1) throw ValidationError("option counts must be >= 1");
  }
  std::vector<std::vector<int>> leaves;
  std::vector<int> current(x.size(), 0);
  for (;;) {
    leaves.push_back(current);
    // odometer increment, most significant digit first
    int pos = static_cast<int>(x.size()) - 1;
    while (pos >= 0) {
      if (++current[static_cast<std::size_t>(pos)] < x[static_cast<std::size_t>(pos)]) break;
      current[static_cast<std::size_t>(pos)] = 0;
      --pos;
    }
    if (pos < 0) break;
  }
  return leaves;
}

std::vector<std::vector<int>> enumerate_leaves(const WorkflowSpec& spec) {
  return enumerate_leaves(spec.option_counts());
}

namespace {

// Branch per tree node, named by its option path. Segments are joined
// with '-' because refs are path-mapped files: a branch "sweep/0"
// would block the directory a branch "sweep/0/1" needs.
std::string path_branch(const std::string& prefix, const std::vector<int>& path) {
  std::string name = prefix + "/";
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i > 0) name += "-";
    name += std::to_string(path[i]);
  }
  return name;
}

// Each sweep invocation claims a fresh branch namespace (sweep,
// sweep-1, ...) by committing its root; the branch-creation CAS makes
// the claim atomic under concurrent sweeps.
std::string claim_sweep_root(Store& store, const Json& initial, std::string& root_id) {
  for (int k = 0;; ++k) {
    std::string prefix = k == 0 ? "sweep" : "sweep-" + std::to_string(k);
    if (store.branch_head(prefix + "/root").has_value()) continue;
    try {
      root_id = store.commit(std::nullopt, initial, prefix + "/root", "root");
      return prefix;
    } catch (const ConflictError&) {
      // lost the race for this namespace, try the next one
    }
  }
}

// shared tallies, guarded by one mutex
struct SweepState {
  std::mutex mutex;
  SweepAccounting accounting;
  std::vector<SweepLeaf> leaves;

  void add_invocation(int layer, const StepOutcome& outcome) {
    std::lock_guard<std::mutex> lock(mutex);
    ++accounting.steps_executed;
    accounting.per_layer[static_cast<std::size_t>(layer)] += 1;
    accounting.tokens_in += outcome.tokens_in;
    accounting.tokens_out += outcome.tokens_out;
    accounting.wall_ms += outcome.wall_ms;
  }

  void add_leaf(SweepLeaf leaf) {
    std::lock_guard<std::mutex> lock(mutex);
    leaves.push_back(std::move(leaf));
  }
};

// Work queue of tree edges; a child edge becomes runnable once its
// parent checkpoint exists (i.e. when the parent task enqueues it).
template <typename Task>
class TaskQueue {
 public:
  void push(Task task) {
    {
      std::lock_guard<std::mutex> lock(mutex_);
      queue_.push_back(std::move(task));
      ++pending_;
    }
    cv_.notify_one();
  }

  // Returns false when the sweep is drained (no queued or running tasks).
  bool pop(Task& task) {
    std::unique_lock<std::mutex> lock(mutex_);
    cv_.wait(lock, [&] { return !queue_.empty() || pending_ == 0; });
    if (queue_.empty()) return false;
    task = std::move(queue_.front());
    queue_.pop_front();
    return true;
  }

  // Tasks count as pending until marked done so workers keep waiting
  // for children that running tasks may still enqueue.
  void done() {
    std::lock_guard<std::mutex> lock(mutex_);
    if (--pending_ == 0) cv_.notify_all();
  }

 private:
  std::mutex mutex_;
  std::condition_variable cv_;
  std::deque<Task> queue_;
  std::size_t pending_ = 0;
};

struct EdgeTask {
  std::vector<int> path;  // option indices up to the parent node
  std::string parent_id;
  int option = 0;
};

void mark_subtree_failed(SweepState& state, const std::vector<int>& prefix,
                         const std::vector<int>& x, const std::string& error) {
  std::vector<int> tail(x.begin() + static_cast<long>(prefix.size()), x.end());
  if (tail.empty()) {
    SweepLeaf leaf;
    leaf.choices = prefix;
    leaf.failed = true;
    leaf.error = error;
    state.add_leaf(std::move(leaf));
    return;
  }
  for (const auto& completion : enumerate_leaves(tail)) {
    SweepLeaf leaf;
    leaf.choices = prefix;
    leaf.choices.insert(leaf.choices.end(), completion.begin(), completion.end());
    leaf.failed = true;
    leaf.error = error;
    state.add_leaf(std::move(leaf));
  }
}

void run_rollback_sweep(Store& store, const SweepPlan& plan,
                        const ExecutorRegistry& registry, RunJournal* journal,
                        std::optional<std::int64_t> fixed_ts, SweepState& state,
                        std::string& root_id) {
  const WorkflowSpec& spec = plan.spec;
  const std::vector<int> x = spec.option_counts();
  const int n = spec.n();

  std::string prefix = claim_sweep_root(store, spec.initial, root_id);

  TaskQueue<EdgeTask> queue;
  for (int k = 0; k < x[0]; ++k) {
    queue.push(EdgeTask{{}, root_id, k});
  }

  auto worker = [&] {
    EdgeTask task;
    while (queue.pop(task)) {
      std::vector<int> child_path = task.path;
      child_path.push_back(task.option);
      try {
        int depth = static_cast<int>(task.path.size());  // parent layer
        const StepSpec& step = spec.steps[static_cast<std::size_t>(depth)];
        const OptionSpec& option = step.options[static_cast<std::size_t>(task.option)];

        Json parent_state = store.checkout(task.parent_id);
        StepOutcome outcome = Engine::execute_step(parent_state, step, option, registry);
        state.add_invocation(depth, outcome);
        if (journal != nullptr) {
          std::int64_t ts = fixed_ts.value_or(
              std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::system_clock::now().time_since_epoch())
                  .count());
          journal->append({ts, "sweep", step.name, option.name,
                           outcome.ok() ? "ok" : "failed", outcome.tokens_in,
                           outcome.tokens_out, outcome.wall_ms});
        }

        if (!outcome.ok()) {
          mark_subtree_failed(state, child_path, x, outcome.error);
          queue.done();
          continue;
        }

        Json child_state = Engine::apply_outcome(parent_state, outcome);
        std::string branch = path_branch(prefix, child_path);
        store.create_branch(branch, task.parent_id);
        StepAccounting acc{outcome.tokens_in, outcome.tokens_out, outcome.wall_ms};
        std::string child_id =
            store.commit(task.parent_id, child_state, branch,
                         "step " + step.name + " via " + option.name, task.option, acc);

        if (depth + 1 == n) {
          SweepLeaf leaf;
          leaf.choices = child_path;
          leaf.state_hash = state_hash(child_state);
          leaf.checkpoint = child_id;
          state.add_leaf(std::move(leaf));
        } else {
          int fanout = x[static_cast<std::size_t>(depth + 1)];
          for (int k = 0; k < fanout; ++k) {
            queue.push(EdgeTask{child_path, child_id, k});
          }
        }
        queue.done();
      } catch (const std::exception& e) {
        // store or executor plumbing failure: prune like a failed edge
        mark_subtree_failed(state, child_path, x, e.what());
        queue.done();
      }
    }
  };

  std::vector<std::thread> workers;
  int worker_count = std::max(1, plan.parallelism);
  workers.reserve(static_cast<std::size_t>(worker_count));
  for (int i = 0; i < worker_count; ++i) workers.emplace_back(worker);
  for (auto& thread : workers) thread.join();
}

void run_standard_sweep(Store& store, const SweepPlan& plan,
                        const ExecutorRegistry& registry, RunJournal* journal,
                        std::optional<std::int64_t> fixed_ts, SweepState& state,
                        std::string& root_id) {
  const WorkflowSpec& spec = plan.spec;
  std::string prefix = claim_sweep_root(store, spec.initial, root_id);

  std::vector<std::vector<int>> all_leaves = enumerate_leaves(spec);

  struct LeafTask {
    std::size_t ordinal;
  };
  TaskQueue<LeafTask> queue;
  for (std::size_t j = 0; j < all_leaves.size(); ++j) queue.push(LeafTask{j});

  auto worker = [&] {
    LeafTask task;
    while (queue.pop(task)) {
      const std::vector<int>& choices = all_leaves[task.ordinal];
      SweepLeaf leaf;
      leaf.choices = choices;
      try {
        Engine engine(store, registry, journal, "sweep", fixed_ts);
        // each leaf is an independent full run from the root; no resume
        RunResult run = engine.run_path(spec, choices, root_id, RecoveryPolicy{},
                                        prefix + "/run/" + std::to_string(task.ordinal));
        {
          std::lock_guard<std::mutex> lock(state.mutex);
          state.accounting.steps_executed += run.steps_executed;
          for (int layer = 0; layer < run.steps_executed; ++layer) {
            state.accounting.per_layer[static_cast<std::size_t>(layer)] += 1;
          }
          state.accounting.tokens_in += run.totals.tokens_in;
          state.accounting.tokens_out += run.totals.tokens_out;
          state.accounting.wall_ms += run.totals.wall_ms;
        }
        if (run.ok) {
          leaf.checkpoint = run.final_checkpoint;
          leaf.state_hash = store.load_checkpoint(run.final_checkpoint).state_hash;
        } else {
          leaf.failed = true;
          leaf.error = run.error;
        }
      } catch (const std::exception& e) {
        leaf.failed = true;
        leaf.error = e.what();
      }
      state.add_leaf(std::move(leaf));
      queue.done();
    }
  };

  std::vector<std::thread> workers;
  int worker_count = std::max(1, plan.parallelism);
  workers.reserve(static_cast<std::size_t>(worker_count));
  for (int i = 0; i < worker_count; ++i) workers.emplace_back(worker);
  for (auto& thread : workers) thread.join();
}

}  // namespace

SweepResult run_sweep(Store& store, const SweepPlan& plan, const ExecutorRegistry& registry,
                      RunJournal* journal, std::optional<std::int64_t> fixed_ts) {
  if (plan.parallelism < 1) throw ValidationError("parallelism must be >= 1");
  for (const auto& step : plan.spec.steps) {
    for (const auto& option : step.options) {
      if (!registry.has(option.executor)) {
        throw ExecutorError("unknown executor '" + option.executor + "'");
      }
    }
  }

  SweepState state;
  state.accounting.per_layer.assign(static_cast<std::size_t>(plan.spec.n()), 0);

  SweepResult result;
  result.x = plan.spec.option_counts();
  result.strategy = plan.strategy;

  if (plan.strategy == SweepStrategy::Rollback) {
    run_rollback_sweep(store, plan, registry, journal, fixed_ts, state, result.root_checkpoint);
  } else {
    run_standard_sweep(store, plan, registry, journal, fixed_ts, state, result.root_checkpoint);
  }

  result.leaves = std::move(state.leaves);
  std::sort(result.leaves.begin(), result.leaves.end(),
            [](const SweepLeaf& a, const SweepLeaf& b) { return a.choices < b.choices; });
  result.accounting = state.accounting;
  return result;
}

std::vector<std::string> FormulaReport::violations() const {
  std::vector<std::string> out;
  if (!leaf_count_ok) out.push_back("leaf count != prod(x_i)");
  if (!standard_steps_ok) out.push_back("standard steps != n * prod(x_i)");
  if (!rollback_steps_ok) out.push_back("rollback steps != sum of prefix products");
  return out;
}

Json FormulaReport::to_json() const {
  Json j = Json::object();
  j["x"] = x;
  j["l"] = l.str();
  j["s_std"] = s_std.str();
  j["s_rollback"] = s_rollback.str();
  j["eta"] = to_decimal(eta, 12);
  j["observed"] = Json::object();
  j["observed"]["standard_steps"] = observed_std_steps;
  j["observed"]["rollback_steps"] = observed_rollback_steps;
  j["observed"]["standard_leaves"] = observed_std_leaves;
  j["observed"]["rollback_leaves"] = observed_rollback_leaves;
  j["leaf_count_ok"] = leaf_count_ok;
  j["standard_steps_ok"] = standard_steps_ok;
  j["rollback_steps_ok"] = rollback_steps_ok;
  return j;
}

FormulaReport verify_formulas(const SweepResult& standard_result,
                              const SweepResult& rollback_result) {
  if (standard_result.x != rollback_result.x) {
    throw ValidationError("incomparable reports: option vectors differ");
  }
  if (standard_result.strategy != SweepStrategy::Standard ||
      rollback_result.strategy != SweepStrategy::Rollback) {
    throw ValidationError("verify needs one standard and one rollback report");
  }

  FormulaReport report;
  report.x = standard_result.x;
  report.l = predicted_leaf_count(report.x);
  report.s_std = predicted_steps_standard(report.x);
  report.s_rollback = predicted_steps_rollback(report.x);
  report.eta = efficiency(report.x);

  report.observed_std_steps = standard_result.accounting.steps_executed;
  report.observed_rollback_steps = rollback_result.accounting.steps_executed;
  report.observed_std_leaves = static_cast<std::int64_t>(standard_result.ok_leaf_count());
  report.observed_rollback_leaves =
      static_cast<std::int64_t>(rollback_result.ok_leaf_count());

  report.leaf_count_ok = BigInt(report.observed_std_leaves) == report.l &&
                         BigInt(report.observed_rollback_leaves) == report.l;
  report.standard_steps_ok = BigInt(report.observed_std_steps) == report.s_std;
  report.rollback_steps_ok = BigInt(report.observed_rollback_steps) == report.s_rollback;
  return report;
}

Json sweep_report_json(const SweepResult& result) {
  Json j = Json::object();
  j["x"] = result.x;
  j["strategy"] = to_string(result.strategy);
  j["root_checkpoint"] = result.root_checkpoint;
  j["leaves"] = Json::array();
  for (const SweepLeaf& leaf : result.leaves) {
    Json l = Json::object();
    l["choices"] = leaf.choices;
    l["state_hash"] = leaf.state_hash;
    l["checkpoint"] = leaf.checkpoint;
    l["failed"] = leaf.failed;
    if (leaf.failed) l["error"] = leaf.error;
    j["leaves"].push_back(std::move(l));
  }
  j["accounting"] = result.accounting.to_json();

  Json predictions = Json::object();
  predictions["x"] = result.x;
  predictions["l"] = predicted_leaf_count(result.x).str();
  predictions["s_std"] = predicted_steps_standard(result.x).str();
  predictions["s_rollback"] = predicted_steps_rollback(result.x).str();
  predictions["eta"] = to_decimal(efficiency(result.x), 12);
  j["formula_report"] = predictions;
  return j;
}

SweepResult sweep_result_from_report(const Json& report) {
  SweepResult result;
  result.x = report.at("x").get<std::vector<int>>();
  result.strategy = sweep_strategy_from_string(report.at("strategy").get<std::string>());
  result.root_checkpoint = report.value("root_checkpoint", std::string());
  for (const Json& l : report.at("leaves")) {
    SweepLeaf leaf;
    leaf.choices = l.at("choices").get<std::vector<int>>();
    leaf.state_hash = l.value("state_hash", std::string());
    leaf.checkpoint = l.value("checkpoint", std::string());
    leaf.failed = l.value("failed", false);
    leaf.error = l.value("error", std::string());
    result.leaves.push_back(std::move(leaf));
  }
  result.accounting = SweepAccounting::from_json(report.at("accounting"));
  return result;
}

}  // namespace agentgit
