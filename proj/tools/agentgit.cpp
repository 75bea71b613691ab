// agentgit: Git-style command line over the checkpoint store, the
// workflow engine, sweeps and reports.

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "agentgit/arxiv.hpp"
#include "agentgit/curves.hpp"
#include "agentgit/engine.hpp"
#include "agentgit/llm_client.hpp"
#include "agentgit/mock_executor.hpp"
#include "agentgit/report.hpp"
#include "agentgit/store.hpp"
#include "agentgit/sweep.hpp"

namespace {

using namespace agentgit;

constexpr int kExitOk = 0;
constexpr int kExitDomainError = 1;
constexpr int kExitUsageError = 2;

struct GlobalOptions {
  std::string store_root;
  bool no_timestamps = false;

  std::string fixtures_dir;
  std::string fixture_mode = "off";

  LlmEndpointConfig llm;

  std::optional<std::int64_t> fixed_ts() const {
    return no_timestamps ? std::optional<std::int64_t>(0) : std::nullopt;
  }
};

std::string default_store_root() {
  const char* env = std::getenv("AGENTGIT_STORE");
  return (env != nullptr && env[0] != '\0') ? env : ".agentgit";
}

Store open_store(const GlobalOptions& opts) {
  Store store = Store::open(opts.store_root);
  store.set_fixed_timestamp(opts.fixed_ts());
  return store;
}

std::string read_input(const std::string& path) {
  if (path == "-") {
    return std::string(std::istreambuf_iterator<char>(std::cin),
                       std::istreambuf_iterator<char>());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path);
  return std::string(std::istreambuf_iterator<char>(in),
                     std::istreambuf_iterator<char>());
}

void write_output(const std::string& path, const std::string& bytes) {
  if (path.empty() || path == "-") {
    std::cout << bytes;
    return;
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

std::vector<int> parse_int_list(const std::string& csv, const std::string& what) {
  std::vector<int> values;
  std::stringstream stream(csv);
  std::string item;
  while (std::getline(stream, item, ',')) {
    if (item.empty()) continue;
    try {
      std::size_t used = 0;
      int value = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
      values.push_back(value);
    } catch (const std::exception&) {
      throw ValidationError("cannot parse " + what + " entry '" + item + "'");
    }
  }
  if (values.empty()) throw ValidationError(what + " list is empty");
  return values;
}

ExecutorRegistry build_registry(const GlobalOptions& opts) {
  ExecutorRegistry registry;
  registry.add(std::make_shared<MockExecutor>());

  FixtureMode mode = fixture_mode_from_string(opts.fixture_mode);
  std::shared_ptr<FixtureStore> fixtures;
  if (!opts.fixtures_dir.empty()) {
    fixtures = std::make_shared<FixtureStore>(opts.fixtures_dir, mode);
  } else if (mode != FixtureMode::Off) {
    throw ValidationError("--fixture-mode " + opts.fixture_mode + " needs --fixtures");
  }
  // replay mode gets no transport at all, so it can never touch the network
  std::shared_ptr<HttpTransport> transport;
  if (mode != FixtureMode::Replay) {
    transport = make_httplib_transport();
  }

  registry.add(std::make_shared<LlmChatExecutor>(opts.llm, fixtures, transport));
  registry.add(std::make_shared<ArxivSearchExecutor>(fixtures, transport));
  registry.add(std::make_shared<ExtractExecutor>());
  return registry;
}

std::string short_id(const std::string& id) { return id.substr(0, 12); }

int cmd_init(const GlobalOptions& opts) {
  Store::init(opts.store_root);
  std::cout << "initialized store at " << opts.store_root << "\n";
  return kExitOk;
}

int cmd_commit(const GlobalOptions& opts, const std::string& state_path,
               std::string branch, std::string parent, const std::string& message) {
  Store store = open_store(opts);
  Json state = parse_json(read_input(state_path), state_path);
  if (branch.empty()) branch = store.head_branch();
  std::optional<std::string> parent_id;
  if (!parent.empty()) {
    parent_id = parent;
  } else if (auto head = store.branch_head(branch)) {
    parent_id = *head;
  }
  std::string id = store.commit(parent_id, state, branch, message);
  std::cout << id << "\n";
  return kExitOk;
}

int cmd_checkout(const GlobalOptions& opts, const std::string& id) {
  Store store = open_store(opts);
  std::cout << canonical_serialize(store.checkout(id)) << "\n";
  return kExitOk;
}

int cmd_branch(const GlobalOptions& opts, const std::string& name, const std::string& from,
               bool list) {
  Store store = open_store(opts);
  if (list || name.empty()) {
    for (const BranchRef& branch : store.branches()) {
      std::cout << branch.name << " " << branch.head << "\n";
    }
    return kExitOk;
  }
  if (from.empty()) {
    throw ValidationError("branch creation needs --from <checkpoint>");
  }
  BranchRef ref = store.create_branch(name, from);
  std::cout << "branch " << ref.name << " -> " << short_id(ref.head) << "\n";
  return kExitOk;
}

int cmd_log(const GlobalOptions& opts, bool graph) {
  Store store = open_store(opts);
  std::vector<Checkpoint> checkpoints = store.all_checkpoints();
  if (checkpoints.empty()) {
    std::cout << "no checkpoints\n";
    return kExitOk;
  }

  std::sort(checkpoints.begin(), checkpoints.end(),
            [](const Checkpoint& a, const Checkpoint& b) {
              if (a.step_index != b.step_index) return a.step_index < b.step_index;
              if (a.created_at != b.created_at) return a.created_at < b.created_at;
              return a.id < b.id;
            });

  std::map<std::string, std::vector<const Checkpoint*>> children;
  std::vector<const Checkpoint*> roots;
  for (const Checkpoint& cp : checkpoints) {
    if (cp.is_root()) {
      roots.push_back(&cp);
    } else {
      children[cp.parent].push_back(&cp);
    }
  }
  for (auto& [parent, list] : children) {
    std::sort(list.begin(), list.end(), [](const Checkpoint* a, const Checkpoint* b) {
      if (a->option_taken != b->option_taken) return a->option_taken < b->option_taken;
      return a->id < b->id;
    });
  }

  std::size_t leaves = 0;
  for (const Checkpoint& cp : checkpoints) {
    if (children.find(cp.id) == children.end()) ++leaves;
  }

  auto line_for = [&](const Checkpoint& cp) {
    std::ostringstream line;
    line << cp.id << "  step=" << cp.step_index << "  branch=" << cp.branch;
    if (cp.option_taken.has_value()) line << "  option=" << *cp.option_taken;
    if (!opts.no_timestamps) line << "  at=" << cp.created_at;
    line << "  " << cp.message;
    return line.str();
  };

  if (graph) {
    // depth-first tree rendering, children in deterministic order
    std::function<void(const Checkpoint*, int)> render = [&](const Checkpoint* cp,
                                                             int depth) {
      std::cout << std::string(static_cast<std::size_t>(depth) * 2, ' ') << "* "
                << line_for(*cp) << "\n";
      auto it = children.find(cp->id);
      if (it == children.end()) return;
      for (const Checkpoint* child : it->second) render(child, depth + 1);
    };
    for (const Checkpoint* root : roots) render(root, 0);
  } else {
    for (const Checkpoint& cp : checkpoints) std::cout << line_for(cp) << "\n";
  }

  std::cout << "checkpoints=" << checkpoints.size() << " edges="
            << checkpoints.size() - roots.size() << " leaves=" << leaves
            << " branches=" << store.branches().size() << "\n";
  return kExitOk;
}

int cmd_diff(const GlobalOptions& opts, const std::string& base, const std::string& target) {
  Store store = open_store(opts);
  std::cout << canonical_serialize(store.diff(base, target).to_json()) << "\n";
  return kExitOk;
}

int cmd_merge(const GlobalOptions& opts, const std::string& ours, const std::string& theirs,
              const std::string& strategy) {
  Store store = open_store(opts);
  MergeOutcome outcome = store.merge(ours, theirs, merge_strategy_from_string(strategy));
  if (!outcome.ok()) {
    std::cout << "conflicts: " << canonical_serialize(outcome.conflicts_to_json()) << "\n";
    return kExitDomainError;
  }
  std::cout << outcome.commit_id << "\n";
  return kExitOk;
}

int cmd_run(const GlobalOptions& opts, const std::string& workflow_path,
            const std::string& choices_csv, const std::string& start,
            const std::string& branch, const std::string& policy_name, int max_retries,
            const std::string& journal_path) {
  Store store = open_store(opts);
  ExecutorRegistry registry = build_registry(opts);
  WorkflowSpec spec = load_workflow_file(workflow_path, &registry);
  RecoveryPolicy policy = RecoveryPolicy::from_string(policy_name, max_retries);

  RunJournal journal(journal_path.empty() ? store.root() / "journal.jsonl"
                                          : std::filesystem::path(journal_path));
  Engine engine(store, registry, &journal, "cli", opts.fixed_ts());

  std::vector<int> choices = parse_int_list(choices_csv, "choices");
  std::optional<std::string> start_id;
  if (!start.empty()) start_id = start;

  RunResult result = engine.run_path(spec, choices, start_id, policy, branch);
  if (!result.ok) {
    std::cerr << "run failed at step '" << result.failed_step << "': " << result.error
              << "\nlast good checkpoint: " << result.final_checkpoint << "\n";
    return kExitDomainError;
  }
  std::cout << "leaf=" << result.final_checkpoint << " steps=" << result.steps_executed
            << " tokens_in=" << result.totals.tokens_in
            << " tokens_out=" << result.totals.tokens_out << "\n";
  return kExitOk;
}

int cmd_sweep(const GlobalOptions& opts, const std::string& workflow_path,
              const std::string& strategy, int parallelism, const std::string& out,
              const std::string& journal_path) {
  Store store = open_store(opts);
  ExecutorRegistry registry = build_registry(opts);

  SweepPlan plan;
  plan.spec = load_workflow_file(workflow_path, &registry);
  plan.strategy = sweep_strategy_from_string(strategy);
  plan.parallelism = parallelism;

  RunJournal journal(journal_path.empty() ? store.root() / "journal.jsonl"
                                          : std::filesystem::path(journal_path));
  SweepResult result = run_sweep(store, plan, registry, &journal, opts.fixed_ts());

  write_output(out, canonical_serialize(sweep_report_json(result)) + "\n");

  std::cout << "leaves=" << result.ok_leaf_count()
            << " steps=" << result.accounting.steps_executed << " tokens="
            << result.accounting.tokens_in + result.accounting.tokens_out << "\n";
  if (!result.all_ok()) {
    for (const SweepLeaf& leaf : result.leaves) {
      if (!leaf.failed) continue;
      std::ostringstream path;
      for (std::size_t i = 0; i < leaf.choices.size(); ++i) {
        if (i > 0) path << ",";
        path << leaf.choices[i];
      }
      std::cerr << "failed leaf [" << path.str() << "]: " << leaf.error << "\n";
    }
    return kExitDomainError;
  }
  return kExitOk;
}

int cmd_verify(const std::vector<std::string>& report_paths) {
  if (report_paths.size() != 2) {
    throw ValidationError("verify needs exactly two --report files");
  }
  SweepResult a = sweep_result_from_report(
      parse_json(read_input(report_paths[0]), report_paths[0]));
  SweepResult b = sweep_result_from_report(
      parse_json(read_input(report_paths[1]), report_paths[1]));
  if (a.x != b.x) {
    std::cerr << "incomparable reports: option vectors differ\n";
    return kExitDomainError;
  }
  if (a.strategy == b.strategy) {
    std::cerr << "incomparable reports: need one standard and one rollback sweep\n";
    return kExitDomainError;
  }
  const SweepResult& standard_result = a.strategy == SweepStrategy::Standard ? a : b;
  const SweepResult& rollback_result = a.strategy == SweepStrategy::Rollback ? a : b;

  FormulaReport report = verify_formulas(standard_result, rollback_result);

  std::ostringstream x_text;
  for (std::size_t i = 0; i < report.x.size(); ++i) {
    if (i > 0) x_text << ",";
    x_text << report.x[i];
  }
  std::cout << "x = [" << x_text.str() << "]\n";
  std::cout << "metric               predicted      observed\n";
  std::cout << "leaves (standard)    " << report.l.str() << "              "
            << report.observed_std_leaves << "\n";
  std::cout << "leaves (rollback)    " << report.l.str() << "              "
            << report.observed_rollback_leaves << "\n";
  std::cout << "steps standard       " << report.s_std.str() << "             "
            << report.observed_std_steps << "\n";
  std::cout << "steps rollback       " << report.s_rollback.str() << "             "
            << report.observed_rollback_steps << "\n";
  std::cout << "eta predicted        " << to_decimal(report.eta, 12) << "\n";
  if (report.observed_rollback_steps > 0) {
    BigRational observed_eta(report.observed_std_steps, report.observed_rollback_steps);
    std::cout << "eta observed         " << to_decimal(observed_eta, 12) << "\n";
  }
  if (report.ok()) {
    std::cout << "all formula checks passed\n";
    return kExitOk;
  }
  for (const std::string& violation : report.violations()) {
    std::cout << "VIOLATED: " << violation << "\n";
  }
  return kExitDomainError;
}

int cmd_curves(const std::string& alphas_csv, int n_max, const std::string& out) {
  std::vector<int> alphas = parse_int_list(alphas_csv, "alphas");
  write_output(out, emit_curves(alphas, n_max));
  if (!out.empty() && out != "-") {
    std::cout << "wrote " << alphas.size() * static_cast<std::size_t>(n_max)
              << " rows to " << out << "\n";
  }
  return kExitOk;
}

int cmd_stats(const std::vector<std::string>& journal_paths,
              const std::vector<std::string>& report_paths) {
  std::vector<std::filesystem::path> journals(journal_paths.begin(), journal_paths.end());
  std::vector<SweepResult> sweeps;
  for (const std::string& path : report_paths) {
    sweeps.push_back(sweep_result_from_report(parse_json(read_input(path), path)));
  }
  std::cout << canonical_serialize(build_run_report(journals, sweeps).to_json()) << "\n";
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"versioned workflow engine with Git-like checkpoint semantics"};
  app.require_subcommand(1);

  GlobalOptions opts;
  opts.store_root = default_store_root();
  app.add_option("--store", opts.store_root,
                 "store root (env AGENTGIT_STORE, default .agentgit)");
  app.add_flag("--no-timestamps", opts.no_timestamps,
               "fixed zero timestamps for byte-stable output");
  app.add_option("--fixtures", opts.fixtures_dir, "fixture directory");
  app.add_option("--fixture-mode", opts.fixture_mode, "off|record|replay")
      ->check(CLI::IsMember({"off", "record", "replay"}));
  app.add_option("--llm-base-url", opts.llm.base_url, "chat endpoint base url");
  app.add_option("--llm-model", opts.llm.model, "model name");
  app.add_option("--llm-api-key-env", opts.llm.api_key_env,
                 "environment variable holding the API key");
  app.add_option("--llm-timeout-ms", opts.llm.timeout_ms, "request timeout");

  auto* init = app.add_subcommand("init", "create a store");

  auto* commit = app.add_subcommand("commit", "commit a state document");
  std::string commit_state = "-", commit_branch, commit_parent, commit_message;
  commit->add_option("--state", commit_state, "state JSON file, - for stdin");
  commit->add_option("--branch", commit_branch, "target branch (default HEAD)");
  commit->add_option("--parent", commit_parent, "parent checkpoint (default branch head)");
  commit->add_option("-m,--message", commit_message, "commit message");

  auto* checkout = app.add_subcommand("checkout", "print the state at a checkpoint");
  std::string checkout_id;
  checkout->add_option("id", checkout_id, "checkpoint id")->required();

  auto* branch = app.add_subcommand("branch", "create or list branches");
  std::string branch_name, branch_from;
  bool branch_list = false;
  branch->add_option("name", branch_name, "new branch name");
  branch->add_option("--from", branch_from, "source checkpoint");
  branch->add_flag("--list", branch_list, "list branches");

  auto* log = app.add_subcommand("log", "list checkpoints");
  bool log_graph = false;
  log->add_flag("--graph", log_graph, "draw the checkpoint tree");

  auto* diff = app.add_subcommand("diff", "key-path diff between two checkpoints");
  std::string diff_base, diff_target;
  diff->add_option("base", diff_base)->required();
  diff->add_option("target", diff_target)->required();

  auto* merge = app.add_subcommand("merge", "three-way merge of two checkpoints");
  std::string merge_ours, merge_theirs, merge_strategy = "fail-on-conflict";
  merge->add_option("--ours", merge_ours)->required();
  merge->add_option("--theirs", merge_theirs)->required();
  merge->add_option("--strategy", merge_strategy, "fail-on-conflict|prefer-ours|prefer-theirs")
      ->check(CLI::IsMember({"fail-on-conflict", "prefer-ours", "prefer-theirs"}));

  auto* run = app.add_subcommand("run", "execute one workflow path");
  std::string run_workflow, run_choices, run_start, run_branch = "main";
  std::string run_policy = "none", run_journal;
  int run_max_retries = 0;
  run->add_option("--workflow", run_workflow)->required();
  run->add_option("--choices", run_choices, "comma-separated option indices")->required();
  run->add_option("--start", run_start, "resume from this checkpoint");
  run->add_option("--branch", run_branch, "branch for the commits");
  run->add_option("--policy", run_policy, "none|next-option|retry-then-next")
      ->check(CLI::IsMember({"none", "next-option", "retry-then-next"}));
  run->add_option("--max-retries", run_max_retries)->check(CLI::Range(0, 100));
  run->add_option("--journal", run_journal, "journal path (default <store>/journal.jsonl)");

  auto* sweep = app.add_subcommand("sweep", "full-factorial sweep over a workflow");
  std::string sweep_workflow, sweep_strategy, sweep_out = "-", sweep_journal;
  int sweep_parallelism = 1;
  sweep->add_option("--workflow", sweep_workflow)->required();
  sweep->add_option("--strategy", sweep_strategy)
      ->required()
      ->check(CLI::IsMember({"standard", "rollback"}));
  sweep->add_option("--parallelism", sweep_parallelism)->check(CLI::Range(1, 64));
  sweep->add_option("--out", sweep_out, "report file, - for stdout");
  sweep->add_option("--journal", sweep_journal, "journal path");

  auto* verify = app.add_subcommand("verify", "check two sweep reports against the formulas");
  std::vector<std::string> verify_reports;
  verify->add_option("--report", verify_reports, "sweep report (give twice)")->required();

  auto* curves = app.add_subcommand("curves", "emit the complexity-curve dataset");
  std::string curves_alphas = "2,3,4,5", curves_out = "-";
  int curves_n_max = 10;
  curves->add_option("--alphas", curves_alphas, "comma-separated branching factors");
  curves->add_option("--n-max", curves_n_max)->check(CLI::Range(1, 40));
  curves->add_option("--out", curves_out, "CSV file, - for stdout");

  auto* stats = app.add_subcommand("stats", "aggregate journals and sweep reports");
  std::vector<std::string> stats_journals, stats_reports;
  stats->add_option("--journal", stats_journals, "journal file (repeatable)");
  stats->add_option("--report", stats_reports, "sweep report (repeatable)");

  // global flags (--store, --no-timestamps, ...) are accepted after the
  // subcommand name too
  for (CLI::App* sub : app.get_subcommands([](CLI::App*) { return true; })) {
    sub->fallthrough();
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << "\n";
    return kExitUsageError;
  }

  try {
    if (init->parsed()) return cmd_init(opts);
    if (commit->parsed())
      return cmd_commit(opts, commit_state, commit_branch, commit_parent, commit_message);
    if (checkout->parsed()) return cmd_checkout(opts, checkout_id);
    if (branch->parsed()) return cmd_branch(opts, branch_name, branch_from, branch_list);
    if (log->parsed()) return cmd_log(opts, log_graph);
    if (diff->parsed()) return cmd_diff(opts, diff_base, diff_target);
    if (merge->parsed()) return cmd_merge(opts, merge_ours, merge_theirs, merge_strategy);
    if (run->parsed())
      return cmd_run(opts, run_workflow, run_choices, run_start, run_branch, run_policy,
                     run_max_retries, run_journal);
    if (sweep->parsed())
      return cmd_sweep(opts, sweep_workflow, sweep_strategy, sweep_parallelism, sweep_out,
                       sweep_journal);
    if (verify->parsed()) return cmd_verify(verify_reports);
    if (curves->parsed()) return cmd_curves(curves_alphas, curves_n_max, curves_out);
    if (stats->parsed()) return cmd_stats(stats_journals, stats_reports);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomainError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDomainError;
  }
  return kExitUsageError;
}
