#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "agentgit/mock_executor.hpp"
#include "agentgit/workflow.hpp"

using namespace agentgit;

namespace {

const char* kExperimentShape = R"({
  "name": "abstract-report",
  "initial": {"messages": [], "tool_calls": [], "env": {"task": "multi-agent systems"},
              "reasoning": [], "artifacts": {}},
  "steps": [
    {"name": "search_and_extract",
     "options": [{"name": "arxiv", "executor": "mock", "params": {}}]},
    {"name": "introduction",
     "options": [{"name": "cot", "executor": "mock", "params": {}},
                 {"name": "few_shot", "executor": "mock", "params": {}}]},
    {"name": "analysis",
     "options": [{"name": "cot", "executor": "mock", "params": {}},
                 {"name": "few_shot", "executor": "mock", "params": {}}]},
    {"name": "discussion",
     "options": [{"name": "cot", "executor": "mock", "params": {}},
                 {"name": "few_shot", "executor": "mock", "params": {}}]}
  ]
})";

}  // namespace

TEST_CASE("the four-step experiment file loads as x=[1,2,2,2]") {
  WorkflowSpec spec = load_workflow(kExperimentShape);
  CHECK(spec.n() == 4);
  CHECK(spec.option_counts() == std::vector<int>{1, 2, 2, 2});
  CHECK(spec.steps[0].name == "search_and_extract");
  CHECK(spec.steps[3].options[1].name == "few_shot");
}

TEST_CASE("minimal workflow: one step, one option") {
  WorkflowSpec spec = load_workflow(
      R"({"name":"tiny","initial":{},"steps":[{"name":"only","options":[{"name":"o","executor":"mock"}]}]})");
  CHECK(spec.n() == 1);
  CHECK(spec.option_counts() == std::vector<int>{1});
}

TEST_CASE("empty options list is rejected") {
  CHECK_THROWS_WITH_AS(
      load_workflow(R"({"name":"bad","steps":[{"name":"s","options":[]}]})"),
      doctest::Contains("empty options"), ValidationError);
}

TEST_CASE("empty steps list is rejected") {
  CHECK_THROWS_AS(load_workflow(R"({"name":"bad","steps":[]})"), ValidationError);
  CHECK_THROWS_AS(load_workflow(R"({"name":"bad"})"), ValidationError);
}

TEST_CASE("parse errors carry line info") {
  CHECK_THROWS_WITH_AS(load_workflow("{\n\"steps\": [}\n}", nullptr, "wf.json"),
                       doctest::Contains("line 2"), ValidationError);
}

TEST_CASE("duplicate option names within a step are rejected") {
  CHECK_THROWS_WITH_AS(
      load_workflow(
          R"({"steps":[{"name":"s","options":[{"name":"o","executor":"mock"},{"name":"o","executor":"mock"}]}]})"),
      doctest::Contains("duplicate option"), ValidationError);
}

TEST_CASE("unknown executor ids are rejected when a registry is supplied") {
  ExecutorRegistry registry;
  registry.add(std::make_shared<MockExecutor>());
  CHECK_THROWS_WITH_AS(
      load_workflow(
          R"({"steps":[{"name":"s","options":[{"name":"o","executor":"nope"}]}]})",
          &registry),
      doctest::Contains("unknown executor"), ValidationError);
  // same file loads fine without a registry
  CHECK_NOTHROW(load_workflow(
      R"({"steps":[{"name":"s","options":[{"name":"o","executor":"nope"}]}]})"));
}
