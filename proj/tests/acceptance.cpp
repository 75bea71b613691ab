// Acceptance suite: one pass/fail line per criterion, nonzero exit on
// any failure. Each criterion builds its own throwaway stores and runs
// everything through the public library surface (plus the CLI where a
// criterion is about observable output).

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

#include "agentgit/curves.hpp"
#include "agentgit/engine.hpp"
#include "agentgit/llm_client.hpp"
#include "agentgit/merge.hpp"
#include "agentgit/mock_executor.hpp"
#include "agentgit/sha256.hpp"
#include "agentgit/sweep.hpp"
#include "test_support.hpp"

using namespace agentgit;
using agentgit::testing::DocGen;
using agentgit::testing::TempDir;

namespace {

int failures = 0;
int checks_in_current = 0;

void require(bool condition, const std::string& detail) {
  ++checks_in_current;
  if (!condition) {
    throw std::runtime_error(detail);
  }
}

void criterion(const std::string& name, const std::function<void()>& body,
               std::int64_t max_ms = 0) {
  checks_in_current = 0;
  auto started = std::chrono::steady_clock::now();
  try {
    body();
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - started)
                  .count();
    if (max_ms > 0 && ms > max_ms) {
      throw std::runtime_error("took " + std::to_string(ms) + " ms, budget " +
                               std::to_string(max_ms) + " ms");
    }
    std::cout << "PASS  " << name << " (" << checks_in_current << " checks, " << ms
              << " ms)\n";
  } catch (const std::exception& e) {
    ++failures;
    std::cout << "FAIL  " << name << ": " << e.what() << "\n";
  }
}

WorkflowSpec mock_workflow(const std::vector<int>& x, bool flat_tokens) {
  Json wf = Json::object();
  wf["name"] = "acceptance";
  wf["initial"] = initial_state("multi-agent systems");
  wf["steps"] = Json::array();
  const char* names[] = {"search_and_extract", "introduction", "analysis", "discussion"};
  for (std::size_t i = 0; i < x.size(); ++i) {
    Json step = Json::object();
    step["name"] = i < 4 && x.size() == 4 ? names[i] : "step" + std::to_string(i + 1);
    step["options"] = Json::array();
    for (int k = 0; k < x[i]; ++k) {
      Json option = Json::object();
      option["name"] = "opt" + std::to_string(k);
      option["executor"] = "mock";
      option["params"] = Json::object();
      option["params"]["option_label"] = "opt" + std::to_string(k);
      option["params"]["base_tokens"] = 10;
      if (flat_tokens) option["params"]["flat_tokens"] = true;
      step["options"].push_back(option);
    }
    wf["steps"].push_back(step);
  }
  return load_workflow(canonical_serialize(wf));
}

ExecutorRegistry mock_registry() {
  ExecutorRegistry registry;
  registry.add(std::make_shared<MockExecutor>());
  return registry;
}

SweepResult sweep_in(const TempDir& dir, const std::string& tag, const std::vector<int>& x,
                     SweepStrategy strategy, int parallelism, bool flat_tokens = false) {
  Store store = Store::init(dir.path() / tag);
  store.set_fixed_timestamp(0);
  SweepPlan plan;
  plan.spec = mock_workflow(x, flat_tokens);
  plan.strategy = strategy;
  plan.parallelism = parallelism;
  ExecutorRegistry registry = mock_registry();
  return run_sweep(store, plan, registry, nullptr, 0);
}

std::string vec_str(const std::vector<int>& x) {
  std::ostringstream out;
  out << "[";
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (i > 0) out << ",";
    out << x[i];
  }
  out << "]";
  return out.str();
}

std::vector<std::string> sorted_ok_hashes(const SweepResult& result) {
  std::vector<std::string> hashes;
  for (const SweepLeaf& leaf : result.leaves) {
    if (!leaf.failed) hashes.push_back(leaf.state_hash);
  }
  std::sort(hashes.begin(), hashes.end());
  return hashes;
}

// Deterministic fake chat endpoint used to record fixtures.
class CannedChatTransport : public HttpTransport {
 public:
  HttpResponseData post_json(const std::string&, const std::string&,
                             const std::string& body,
                             const std::map<std::string, std::string>&, int) override {
    Json request = parse_json(body);
    std::string digest = Sha256::hex_digest(canonical_serialize(request));
    Json response = Json::object();
    response["choices"] = Json::array();
    Json choice = Json::object();
    choice["message"] = Json::object();
    choice["message"]["role"] = "assistant";
    choice["message"]["content"] = "section draft " + digest.substr(0, 20);
    response["choices"].push_back(choice);
    response["usage"] = Json::object();
    response["usage"]["prompt_tokens"] = 100;
    response["usage"]["completion_tokens"] = 40;
    return {200, canonical_serialize(response)};
  }
  HttpResponseData get(const std::string&, const std::string&, int) override {
    throw TransportError("GET not expected");
  }
};

WorkflowSpec llm_workflow() {
  Json wf = Json::object();
  wf["name"] = "fixture-backed";
  wf["initial"] = initial_state("multi-agent systems");
  wf["steps"] = Json::array();
  const char* names[] = {"introduction", "analysis"};
  for (const char* name : names) {
    Json step = Json::object();
    step["name"] = name;
    step["options"] = Json::array();
    for (const char* kind : {"cot", "few-shot"}) {
      Json option = Json::object();
      option["name"] = kind;
      option["executor"] = "llm-chat";
      Json params = Json::object();
      params["prompt_kind"] = kind;
      params["template"] = std::string("Write the ") + name + " for {topic}.";
      if (std::string(kind) == "few-shot") {
        params["examples"] = Json::array();
        params["examples"].push_back(Json::array({"sample topic", "sample section"}));
      }
      params["vars"] = Json::object();
      params["vars"]["topic"] = "env.task";
      option["params"] = params;
      step["options"].push_back(option);
    }
    wf["steps"].push_back(step);
  }
  return load_workflow(canonical_serialize(wf));
}

}  // namespace

int main() {
  criterion("Leaf-count identity: sweeps produce exactly prod(x_i) distinct leaves", [] {
    const std::vector<std::vector<int>> shapes = {
        {1}, {2, 2}, {1, 2, 2, 2}, {2, 3, 4}, {3, 3, 3}};
    for (const auto& x : shapes) {
      BigInt expected = predicted_leaf_count(x);
      auto leaves = enumerate_leaves(x);
      require(BigInt(static_cast<std::int64_t>(leaves.size())) == expected,
              "enumerate_leaves(" + vec_str(x) + ") != prod");
      require(std::set<std::vector<int>>(leaves.begin(), leaves.end()).size() ==
                  leaves.size(),
              "duplicate leaf vectors for " + vec_str(x));

      TempDir dir("acc-leafcount");
      SweepResult result = sweep_in(dir, "rb", x, SweepStrategy::Rollback, 4);
      std::set<std::string> distinct;
      std::set<std::vector<int>> distinct_choices;
      for (const SweepLeaf& leaf : result.leaves) {
        require(!leaf.failed, "leaf failed in " + vec_str(x));
        distinct.insert(leaf.state_hash);
        distinct_choices.insert(leaf.choices);
      }
      require(BigInt(static_cast<std::int64_t>(distinct_choices.size())) == expected,
              "sweep of " + vec_str(x) + " produced wrong distinct leaf count");
      require(BigInt(static_cast<std::int64_t>(distinct.size())) == expected,
              "sweep of " + vec_str(x) + " produced colliding leaf states");
    }
  }, 5000);

  criterion("Step-count identities: standard and rollback invocation counts, exact", [] {
    struct Case {
      std::vector<int> x;
      std::int64_t s_std;
      std::int64_t s_rollback;
    };
    for (const Case& c : {Case{{1, 2, 2, 2}, 32, 15}, Case{{2, 3, 4}, 72, 32}}) {
      TempDir dir("acc-stepcount");
      SweepResult standard = sweep_in(dir, "std", c.x, SweepStrategy::Standard, 4);
      SweepResult rollback = sweep_in(dir, "rb", c.x, SweepStrategy::Rollback, 4);
      require(standard.accounting.steps_executed == c.s_std,
              vec_str(c.x) + " standard executed " +
                  std::to_string(standard.accounting.steps_executed) + ", want " +
                  std::to_string(c.s_std));
      require(rollback.accounting.steps_executed == c.s_rollback,
              vec_str(c.x) + " rollback executed " +
                  std::to_string(rollback.accounting.steps_executed) + ", want " +
                  std::to_string(c.s_rollback));
      FormulaReport report = verify_formulas(standard, rollback);
      require(report.ok(), "formula report flags violations for " + vec_str(c.x));

      // rollback edge identity: steps == checkpoints - 1 (the root)
      Store store = Store::open(dir.path() / "rb");
      require(static_cast<std::int64_t>(store.checkpoint_count()) - 1 == c.s_rollback,
              "rollback checkpoints != edges + root");
    }
  }, 10000);

  criterion("Efficiency growth: eta(alpha=2,n) strictly increases, exceeds 10 by n=21", [] {
    BigRational previous = 0;
    for (int n = 1; n <= 30; ++n) {
      BigRational eta = efficiency_uniform(2, n);
      require(eta > previous, "eta not strictly increasing at n=" + std::to_string(n));
      previous = eta;
    }
    BigRational eta21 = efficiency_uniform(2, 21);
    require(eta21 > 10, "eta(21) <= 10");
    // closed form: 21 * 2^21 / (2^22 - 2)
    require(eta21 == BigRational(BigInt(21) * 2097152, BigInt(4194304) - 2),
            "eta(21) != closed form");
  });

  criterion("Per-step efficiency limit: |eta/n - (a-1)/a| < 1e-6 at n=30, gap decreasing", [] {
    for (int alpha : {2, 3, 4, 5}) {
      BigRational limit = efficiency_per_step_limit(alpha);
      BigRational previous_gap;
      bool have_previous = false;
      for (int n = 1; n <= 30; ++n) {
        BigRational gap = efficiency_uniform(alpha, n) / n - limit;
        if (gap < 0) gap = -gap;
        if (have_previous) {
          require(gap < previous_gap,
                  "gap not monotonically decreasing at alpha=" + std::to_string(alpha) +
                      " n=" + std::to_string(n));
        }
        previous_gap = gap;
        have_previous = true;
      }
      require(previous_gap * 1000000 < 1,
              "|eta/n - limit| >= 1e-6 at alpha=" + std::to_string(alpha) + " n=30");
    }
  }, 1000);

  criterion("Cost-curve dataset: closed forms exact, cross-checked by tree enumeration", [] {
    auto points = curve_points({2, 3, 4, 5}, 10);
    require(points.size() == 40, "expected 40 rows");
    for (const CurvePoint& p : points) {
      std::vector<int> x(static_cast<std::size_t>(p.n), p.alpha);
      require(p.s_std == predicted_steps_standard(x), "s_std closed form mismatch");
      require(p.s_rollback == predicted_steps_rollback(x), "s_rollback mismatch");
      require(p.eta == BigRational(p.s_std, p.s_rollback), "eta mismatch");

      if (p.n <= 6) {
        // brute-force edge/path enumeration of the option tree
        std::int64_t edges = 0, paths = 0;
        std::function<void(std::size_t)> walk = [&](std::size_t depth) {
          if (depth == x.size()) {
            ++paths;
            return;
          }
          for (int k = 0; k < x[depth]; ++k) {
            ++edges;
            walk(depth + 1);
          }
        };
        walk(0);
        require(p.s_rollback == edges, "enumerated edges disagree");
        require(p.s_std == BigInt(p.n) * paths, "enumerated paths disagree");
      }
    }
    // the CLI emits the same dataset byte-for-byte
    std::string command = std::string(AGENTGIT_BIN) + " curves --alphas 2,3,4,5 --n-max 10";
    FILE* pipe = popen(command.c_str(), "r");
    require(pipe != nullptr, "cannot spawn the CLI");
    std::string cli_csv;
    char buffer[4096];
    while (std::size_t n = fread(buffer, 1, sizeof(buffer), pipe)) cli_csv.append(buffer, n);
    require(pclose(pipe) == 0, "curves command failed");
    std::string csv = emit_curves({2, 3, 4, 5}, 10);
    require(cli_csv == csv, "CLI curves output differs from the library");

    // the emitted CSV parses back to the same exact values
    std::istringstream in(csv);
    std::string line;
    std::getline(in, line);
    require(line == "alpha,n,s_std,s_rollback,eta,eta_over_n", "CSV header");
    std::size_t row = 0;
    while (std::getline(in, line)) {
      std::stringstream fields(line);
      std::string alpha, n, s_std, s_rollback;
      std::getline(fields, alpha, ',');
      std::getline(fields, n, ',');
      std::getline(fields, s_std, ',');
      std::getline(fields, s_rollback, ',');
      require(BigInt(s_std) == points[row].s_std, "CSV s_std row " + std::to_string(row));
      require(BigInt(s_rollback) == points[row].s_rollback,
              "CSV s_rollback row " + std::to_string(row));
      ++row;
    }
    require(row == 40, "CSV row count");
  });

  criterion("Rollback preserves descendants under random op sequences", [] {
    TempDir dir("acc-permanence");
    Store store = Store::init(dir.path() / "s");
    DocGen gen(20240810);

    std::vector<std::string> ids;
    std::map<std::string, std::string> hashes;
    std::vector<std::string> branches = {"main"};
    ids.push_back(store.commit(std::nullopt, Json::object(), "main", "root"));
    hashes[ids[0]] = store.load_checkpoint(ids[0]).state_hash;

    for (int op = 0; op < 50; ++op) {
      switch (gen.rng()() % 3) {
        case 0: {
          std::string branch = branches[gen.rng()() % branches.size()];
          std::string id =
              store.commit(*store.branch_head(branch), gen.state_doc(), branch, "op");
          ids.push_back(id);
          hashes[id] = store.load_checkpoint(id).state_hash;
          break;
        }
        case 1: {
          std::string name = "b/" + std::to_string(op);
          store.create_branch(name, ids[gen.rng()() % ids.size()]);
          branches.push_back(name);
          break;
        }
        default:
          (void)store.checkout(ids[gen.rng()() % ids.size()]);
          break;
      }
      for (const std::string& id : ids) {
        require(store.has_checkpoint(id), "checkpoint vanished: " + id);
        require(store.load_checkpoint(id).state_hash == hashes[id],
                "state hash changed for " + id);
      }
    }
  });

  criterion("Resume economy: restart from the step-3 checkpoint runs 1 step", [] {
    TempDir dir("acc-resume");
    Store store = Store::init(dir.path() / "s");
    store.set_fixed_timestamp(0);
    ExecutorRegistry registry = mock_registry();
    Engine engine(store, registry, nullptr, "acc", 0);
    WorkflowSpec spec = mock_workflow({1, 2, 2, 2}, false);

    RunResult full = engine.run_path(spec, {0, 0, 0, 0}, std::nullopt, RecoveryPolicy{},
                                     "main");
    require(full.ok && full.steps_executed == 4, "full run should execute 4 steps");
    std::string step3 = store.ancestry(full.final_checkpoint)[3];
    require(store.load_checkpoint(step3).step_index == 3, "wrong resume checkpoint");

    RunResult resumed = engine.run_path(spec, {1}, step3, RecoveryPolicy{}, "resume");
    require(resumed.ok, "resume failed");
    require(resumed.steps_executed == 1, "resume executed " +
                                             std::to_string(resumed.steps_executed) +
                                             " steps, want exactly 1");
    require(store.load_checkpoint(resumed.final_checkpoint).parent == step3,
            "resumed leaf not a child of the resume point");
  });

  criterion("Strategy and parallelism equivalence of leaf state hashes", [] {
    TempDir dir("acc-equivalence");
    auto baseline =
        sorted_ok_hashes(sweep_in(dir, "std-1", {1, 2, 2, 2}, SweepStrategy::Standard, 1));
    require(baseline.size() == 8, "expected 8 leaves");
    for (int parallelism : {1, 2, 4, 8}) {
      auto rollback = sorted_ok_hashes(sweep_in(dir, "rb-" + std::to_string(parallelism),
                                                {1, 2, 2, 2}, SweepStrategy::Rollback,
                                                parallelism));
      require(rollback == baseline,
              "rollback/parallelism=" + std::to_string(parallelism) + " diverged");
      if (parallelism > 1) {
        auto standard = sorted_ok_hashes(
            sweep_in(dir, "std-" + std::to_string(parallelism), {1, 2, 2, 2},
                     SweepStrategy::Standard, parallelism));
        require(standard == baseline,
                "standard/parallelism=" + std::to_string(parallelism) + " diverged");
      }
    }
  });

  criterion("Token ratio: rollback/standard = 15/32 exactly (constant-cost mock)", [] {
    TempDir dir("acc-tokens");
    SweepResult rollback =
        sweep_in(dir, "rb", {1, 2, 2, 2}, SweepStrategy::Rollback, 1, true);
    SweepResult standard =
        sweep_in(dir, "std", {1, 2, 2, 2}, SweepStrategy::Standard, 1, true);
    std::int64_t rollback_tokens =
        rollback.accounting.tokens_in + rollback.accounting.tokens_out;
    std::int64_t standard_tokens =
        standard.accounting.tokens_in + standard.accounting.tokens_out;
    require(rollback_tokens > 0 && standard_tokens > 0, "token totals missing");
    require(rollback_tokens * 32 == standard_tokens * 15,
            "token ratio " + std::to_string(rollback_tokens) + "/" +
                std::to_string(standard_tokens) + " != 15/32");
  });

  criterion("Merge semantics: disjoint union, conflict key-paths, 100-case oracle", [] {
    // disjoint additions
    Json base = parse_json(R"({"artifacts":{}})");
    Json ours = parse_json(R"({"artifacts":{"intro":"I"}})");
    Json theirs = parse_json(R"({"artifacts":{"analysis":"A"}})");
    MergeOutcome disjoint = merge_states(base, ours, theirs, MergeStrategy::FailOnConflict);
    require(disjoint.ok() && disjoint.conflicts.empty(), "disjoint merge conflicted");
    require(canonical_serialize(*disjoint.merged) ==
                R"({"artifacts":{"analysis":"A","intro":"I"}})",
            "disjoint merge wrong");

    // forced conflict with exact key-path reporting
    Json cbase = parse_json(R"({"env":{"model":"m0"}})");
    Json cours = parse_json(R"({"env":{"model":"m1"}})");
    Json ctheirs = parse_json(R"({"env":{"model":"m2"}})");
    MergeOutcome conflict = merge_states(cbase, cours, ctheirs, MergeStrategy::FailOnConflict);
    require(!conflict.ok() && conflict.conflicts.size() == 1, "conflict not detected");
    require(conflict.conflicts[0].path == "env.model", "conflict path wrong");
    require(canonical_serialize(*conflict.conflicts[0].base) == R"("m0")" &&
                canonical_serialize(*conflict.conflicts[0].ours) == R"("m1")" &&
                canonical_serialize(*conflict.conflicts[0].theirs) == R"("m2")",
            "conflict sides wrong");

    // randomized agreement with an independent overlay oracle
    DocGen gen(777);
    for (int i = 0; i < 100; ++i) {
      Json b = gen.state_doc();
      // type-stable mutations over the flat view
      auto mutate = [&](const Json& from) {
        FlatDoc flat = flatten(from);
        std::vector<std::string> paths;
        for (const auto& [path, value] : flat) paths.push_back(path);
        for (int edit = 0; edit < 3 && !paths.empty(); ++edit) {
          switch (gen.rng()() % 3) {
            case 0: flat[paths[gen.rng()() % paths.size()]] = gen.scalar(); break;
            case 1: flat.erase(paths[gen.rng()() % paths.size()]); break;
            default: flat["fresh_" + std::to_string(gen.rng()() % 1000)] = gen.scalar();
          }
        }
        return unflatten(flat);
      };
      Json o = mutate(b);
      Json t = mutate(b);
      MergeOutcome merged = merge_states(b, o, t, MergeStrategy::PreferOurs);
      require(merged.ok(), "prefer-ours returned conflicts");

      // oracle: theirs overlaid on base, then ours-changes overlaid on top
      FlatDoc fb = flatten(b), fo = flatten(o), ft = flatten(t);
      FlatDoc expected = ft;
      std::set<std::string> keys;
      for (const auto& [k, v] : fb) keys.insert(k);
      for (const auto& [k, v] : fo) keys.insert(k);
      for (const std::string& key : keys) {
        bool in_base = fb.count(key) > 0, in_ours = fo.count(key) > 0;
        bool ours_changed =
            in_base != in_ours ||
            (in_base && !canonical_equal(fb.at(key), fo.at(key)));
        if (ours_changed) {
          if (in_ours) {
            expected[key] = fo.at(key);
          } else {
            expected.erase(key);
          }
        }
      }
      require(canonical_serialize(*merged.merged) == canonical_serialize(unflatten(expected)),
              "merge diverged from overlay oracle at case " + std::to_string(i));
    }
  });

  criterion("Replay determinism: fixture-backed sweep replays; corruption detected", [] {
    TempDir dir("acc-replay");

    // record fixtures against a canned deterministic endpoint
    auto fixtures_path = dir.path() / "fixtures";
    WorkflowSpec spec = llm_workflow();
    {
      ExecutorRegistry recording;
      recording.add(std::make_shared<LlmChatExecutor>(
          LlmEndpointConfig{.api_key_env = ""},
          std::make_shared<FixtureStore>(fixtures_path, FixtureMode::Record),
          std::make_shared<CannedChatTransport>()));
      Store warm = Store::init(dir.path() / "warm");
      warm.set_fixed_timestamp(0);
      SweepPlan plan;
      plan.spec = spec;
      plan.strategy = SweepStrategy::Rollback;
      run_sweep(warm, plan, recording, nullptr, 0);
    }

    // replay-mode registry: no transport at all
    ExecutorRegistry replaying;
    replaying.add(std::make_shared<LlmChatExecutor>(
        LlmEndpointConfig{.api_key_env = ""},
        std::make_shared<FixtureStore>(fixtures_path, FixtureMode::Replay), nullptr));

    Store store = Store::init(dir.path() / "s");
    store.set_fixed_timestamp(0);
    SweepPlan plan;
    plan.spec = spec;
    plan.strategy = SweepStrategy::Rollback;
    SweepResult result = run_sweep(store, plan, replaying, nullptr, 0);
    require(result.all_ok() && result.leaves.size() == 4, "fixture-backed sweep failed");

    Engine engine(store, replaying, nullptr, "acc", 0);
    for (const SweepLeaf& leaf : result.leaves) {
      ReplayReport report = engine.replay(leaf.checkpoint, spec);
      require(report.ok, "replay mismatch for a pristine leaf");
      for (const ReplayLayer& layer : report.layers) {
        require(layer.status == ReplayLayer::Status::Ok, "layer not ok");
      }
    }

    // corrupt one stored blob; replay must detect it at that layer
    const SweepLeaf& victim_leaf = result.leaves.front();
    std::string victim = store.ancestry(victim_leaf.checkpoint)[1];
    Checkpoint cp = store.load_checkpoint(victim);
    auto blob = dir.path() / "s" / "objects" / "st" / cp.state_hash.substr(0, 2) /
                cp.state_hash;
    std::ofstream(blob, std::ios::binary | std::ios::trunc) << "{\"corrupted\":true}";
    ReplayReport tampered = engine.replay(victim_leaf.checkpoint, spec);
    require(!tampered.ok, "corruption not detected");
    bool flagged = false;
    for (const ReplayLayer& layer : tampered.layers) {
      if (layer.checkpoint == victim) {
        flagged = layer.status == ReplayLayer::Status::CorruptObject;
      }
    }
    require(flagged, "corruption not attributed to the tampered layer");
  });

  std::cout << (failures == 0 ? "ALL CRITERIA PASSED" : "FAILURES PRESENT") << "\n";
  return failures == 0 ? 0 : 1;
}
