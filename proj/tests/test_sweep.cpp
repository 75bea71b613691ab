#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <set>

#include "agentgit/mock_executor.hpp"
#include "agentgit/sweep.hpp"
#include "test_support.hpp"

using namespace agentgit;
using agentgit::testing::TempDir;

namespace {

WorkflowSpec mock_workflow(const std::vector<int>& x, bool flat_tokens = false,
                           const std::string& failing_option = "") {
  Json wf = Json::object();
  wf["name"] = "sweep-test";
  wf["initial"] = initial_state("topic");
  wf["steps"] = Json::array();
  for (std::size_t i = 0; i < x.size(); ++i) {
    Json step = Json::object();
    step["name"] = "step" + std::to_string(i + 1);
    step["options"] = Json::array();
    for (int k = 0; k < x[i]; ++k) {
      Json option = Json::object();
      std::string name = "opt" + std::to_string(k);
      option["name"] = name;
      option["executor"] = "mock";
      option["params"] = Json::object();
      option["params"]["option_label"] = name;
      option["params"]["base_tokens"] = 10;
      if (flat_tokens) option["params"]["flat_tokens"] = true;
      if (!failing_option.empty() &&
          failing_option == "step" + std::to_string(i + 1) + "/" + name) {
        option["params"]["fail"] = true;
      }
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

std::vector<std::string> sorted_ok_hashes(const SweepResult& result) {
  std::vector<std::string> hashes;
  for (const SweepLeaf& leaf : result.leaves) {
    if (!leaf.failed) hashes.push_back(leaf.state_hash);
  }
  std::sort(hashes.begin(), hashes.end());
  return hashes;
}

SweepResult sweep(const std::vector<int>& x, SweepStrategy strategy, int parallelism,
                  const TempDir& dir, const std::string& tag, bool flat_tokens = false,
                  const std::string& failing_option = "") {
  Store store = Store::init(dir.path() / tag);
  store.set_fixed_timestamp(0);
  SweepPlan plan;
  plan.spec = mock_workflow(x, flat_tokens, failing_option);
  plan.strategy = strategy;
  plan.parallelism = parallelism;
  ExecutorRegistry registry = mock_registry();
  return run_sweep(store, plan, registry, nullptr, 0);
}

}  // namespace

TEST_CASE("rollback sweep over the experiment shape executes 15 steps") {
  TempDir dir("agentgit-sweep");
  SweepResult result = sweep({1, 2, 2, 2}, SweepStrategy::Rollback, 1, dir, "rb");
  CHECK(result.accounting.steps_executed == 15);
  CHECK(result.leaves.size() == 8);
  CHECK(result.all_ok());
  CHECK(result.accounting.per_layer == std::vector<std::int64_t>{1, 2, 4, 8});

  // every edge committed exactly one checkpoint: steps = checkpoints - root
  Store store = Store::open(dir.path() / "rb");
  CHECK(store.checkpoint_count() == 16);

  // leaf order is lexicographic and matches the enumeration
  auto expected = enumerate_leaves(std::vector<int>{1, 2, 2, 2});
  REQUIRE(result.leaves.size() == expected.size());
  for (std::size_t i = 0; i < expected.size(); ++i) {
    CHECK(result.leaves[i].choices == expected[i]);
    CHECK(store.load_checkpoint(result.leaves[i].checkpoint).step_index == 4);
  }

  // all leaves share the same root
  std::set<std::string> roots;
  for (const SweepLeaf& leaf : result.leaves) {
    roots.insert(store.ancestry(leaf.checkpoint).front());
  }
  CHECK(roots.size() == 1);
}

TEST_CASE("standard sweep over the experiment shape executes 32 steps") {
  TempDir dir("agentgit-sweep");
  SweepResult result = sweep({1, 2, 2, 2}, SweepStrategy::Standard, 1, dir, "std");
  CHECK(result.accounting.steps_executed == 32);
  CHECK(result.leaves.size() == 8);
  CHECK(result.all_ok());
  CHECK(result.accounting.per_layer == std::vector<std::int64_t>{8, 8, 8, 8});
}

TEST_CASE("step counts for x=[2,3,4] match both closed forms") {
  TempDir dir("agentgit-sweep");
  SweepResult rollback = sweep({2, 3, 4}, SweepStrategy::Rollback, 4, dir, "rb");
  CHECK(rollback.accounting.steps_executed == 32);
  CHECK(rollback.leaves.size() == 24);

  SweepResult standard = sweep({2, 3, 4}, SweepStrategy::Standard, 4, dir, "std");
  CHECK(standard.accounting.steps_executed == 72);
  CHECK(standard.leaves.size() == 24);

  FormulaReport report = verify_formulas(standard, rollback);
  CHECK(report.ok());
}

TEST_CASE("strategies produce identical leaf state multisets") {
  TempDir dir("agentgit-sweep");
  SweepResult rollback = sweep({1, 2, 2, 2}, SweepStrategy::Rollback, 1, dir, "rb");
  SweepResult standard = sweep({1, 2, 2, 2}, SweepStrategy::Standard, 1, dir, "std");
  CHECK(sorted_ok_hashes(rollback) == sorted_ok_hashes(standard));

  // distinct leaves have distinct states under the mock
  auto hashes = sorted_ok_hashes(rollback);
  CHECK(std::set<std::string>(hashes.begin(), hashes.end()).size() == hashes.size());
}

TEST_CASE("leaf hashes are invariant under parallelism") {
  TempDir dir("agentgit-sweep");
  auto baseline = sorted_ok_hashes(sweep({1, 2, 2, 2}, SweepStrategy::Rollback, 1, dir, "p1"));
  for (int parallelism : {2, 4, 8}) {
    SweepResult result = sweep({1, 2, 2, 2}, SweepStrategy::Rollback, parallelism, dir,
                               "p" + std::to_string(parallelism));
    CHECK(sorted_ok_hashes(result) == baseline);
    CHECK(result.accounting.steps_executed == 15);
  }
  // standard strategy too
  auto std_baseline =
      sorted_ok_hashes(sweep({1, 2, 2, 2}, SweepStrategy::Standard, 1, dir, "s1"));
  CHECK(std_baseline == baseline);
  SweepResult parallel_std = sweep({1, 2, 2, 2}, SweepStrategy::Standard, 8, dir, "s8");
  CHECK(sorted_ok_hashes(parallel_std) == std_baseline);
}

TEST_CASE("token totals follow the step-count ratio for constant-cost mocks") {
  TempDir dir("agentgit-sweep");
  SweepResult rollback = sweep({1, 2, 2, 2}, SweepStrategy::Rollback, 1, dir, "rb", true);
  SweepResult standard = sweep({1, 2, 2, 2}, SweepStrategy::Standard, 1, dir, "std", true);

  std::int64_t rollback_tokens =
      rollback.accounting.tokens_in + rollback.accounting.tokens_out;
  std::int64_t standard_tokens =
      standard.accounting.tokens_in + standard.accounting.tokens_out;
  // 15/32 exactly: cross-multiplication avoids rationals here
  CHECK(rollback_tokens * 32 == standard_tokens * 15);
  CHECK(rollback_tokens == 15 * 20);
  CHECK(standard_tokens == 32 * 20);
}

TEST_CASE("a failing edge prunes its subtree and the sweep continues") {
  TempDir dir("agentgit-sweep");
  // step2/opt1 always fails: the [_,1,_] subtree dies, 4 of 8 leaves fail
  SweepResult result = sweep({1, 2, 2, 2}, SweepStrategy::Rollback, 2, dir, "rb", false,
                             "step2/opt1");
  CHECK(result.leaves.size() == 8);
  CHECK(result.ok_leaf_count() == 4);
  for (const SweepLeaf& leaf : result.leaves) {
    CHECK(leaf.failed == (leaf.choices[1] == 1));
    if (leaf.failed) CHECK(!leaf.error.empty());
  }
  // executed: layer1 =1, layer2 = 2 (one ok, one failed), layers 3/4 only under opt0
  CHECK(result.accounting.steps_executed == 1 + 2 + 2 + 4);
}

TEST_CASE("sibling leaves share their divergence-layer ancestor") {
  TempDir dir("agentgit-sweep");
  SweepResult result = sweep({2, 2, 2}, SweepStrategy::Rollback, 1, dir, "rb");
  Store store = Store::open(dir.path() / "rb");

  auto leaf_by_choices = [&](const std::vector<int>& choices) -> const SweepLeaf& {
    for (const SweepLeaf& leaf : result.leaves) {
      if (leaf.choices == choices) return leaf;
    }
    FAIL("leaf not found");
    return result.leaves.front();
  };

  // [0,1,0] and [0,1,1] diverge after layer 2: lca is their shared layer-2 node
  const SweepLeaf& a = leaf_by_choices({0, 1, 0});
  const SweepLeaf& b = leaf_by_choices({0, 1, 1});
  std::string lca = store.lowest_common_ancestor(a.checkpoint, b.checkpoint);
  CHECK(store.load_checkpoint(lca).step_index == 2);
  CHECK(store.ancestry(a.checkpoint)[2] == lca);

  // brute-force oracle: intersect the two ancestries
  auto chain_a = store.ancestry(a.checkpoint);
  auto chain_b = store.ancestry(b.checkpoint);
  std::string deepest;
  for (const std::string& id : chain_a) {
    if (std::find(chain_b.begin(), chain_b.end(), id) != chain_b.end()) deepest = id;
  }
  CHECK(deepest == lca);

  // leaves from different layer-1 subtrees meet at layer 1
  const SweepLeaf& c = leaf_by_choices({1, 1, 0});
  CHECK(store.load_checkpoint(
                 store.lowest_common_ancestor(a.checkpoint, c.checkpoint))
            .step_index == 0);
}

TEST_CASE("verify_formulas flags violations") {
  TempDir dir("agentgit-sweep");
  SweepResult rollback = sweep({2, 2}, SweepStrategy::Rollback, 1, dir, "rb");
  SweepResult standard = sweep({2, 2}, SweepStrategy::Standard, 1, dir, "std");

  FormulaReport good = verify_formulas(standard, rollback);
  CHECK(good.ok());
  CHECK(good.l == 4);
  CHECK(good.s_std == 8);
  CHECK(good.s_rollback == 6);
  CHECK(good.eta == BigRational(4, 3));

  SweepResult tampered = standard;
  tampered.accounting.steps_executed += 1;  // inject a phantom step
  FormulaReport bad = verify_formulas(tampered, rollback);
  CHECK(!bad.ok());
  CHECK(!bad.standard_steps_ok);
  CHECK(bad.leaf_count_ok);
  CHECK(bad.rollback_steps_ok);
  REQUIRE(bad.violations().size() == 1);
  CHECK(bad.violations()[0].find("standard steps") != std::string::npos);

  CHECK_THROWS_WITH_AS(verify_formulas(rollback, rollback),
                       doctest::Contains("one standard and one rollback"),
                       ValidationError);

  SweepResult other_shape = sweep({3}, SweepStrategy::Standard, 1, dir, "s3");
  CHECK_THROWS_WITH_AS(verify_formulas(other_shape, rollback),
                       doctest::Contains("incomparable"), ValidationError);
}

TEST_CASE("sweep report files round-trip") {
  TempDir dir("agentgit-sweep");
  SweepResult result = sweep({2, 2}, SweepStrategy::Rollback, 1, dir, "rb");
  Json report = sweep_report_json(result);
  CHECK(report.at("formula_report").at("s_rollback") == "6");

  SweepResult loaded = sweep_result_from_report(report);
  CHECK(loaded.x == result.x);
  CHECK(loaded.strategy == result.strategy);
  CHECK(loaded.accounting.steps_executed == result.accounting.steps_executed);
  REQUIRE(loaded.leaves.size() == result.leaves.size());
  for (std::size_t i = 0; i < loaded.leaves.size(); ++i) {
    CHECK(loaded.leaves[i].choices == result.leaves[i].choices);
    CHECK(loaded.leaves[i].state_hash == result.leaves[i].state_hash);
  }
}

TEST_CASE("degenerate single-option workflow") {
  TempDir dir("agentgit-sweep");
  SweepResult rollback = sweep({1}, SweepStrategy::Rollback, 1, dir, "rb");
  SweepResult standard = sweep({1}, SweepStrategy::Standard, 1, dir, "std");
  CHECK(rollback.accounting.steps_executed == 1);
  CHECK(standard.accounting.steps_executed == 1);
  CHECK(rollback.leaves.size() == 1);
  FormulaReport report = verify_formulas(standard, rollback);
  CHECK(report.ok());
  CHECK(report.eta == 1);
}
