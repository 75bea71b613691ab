#pragma once

#include <memory>
#include <string>
#include <vector>

#include "agentgit/executor.hpp"
#include "agentgit/fixtures.hpp"
#include "agentgit/http_transport.hpp"

namespace agentgit {

struct PaperRecord {
  std::string arxiv_id;
  std::string title;
  std::string abstract;
  std::vector<std::string> authors;
  std::string published;
  std::string url;

  Json to_json() const;
};

// Parses an arXiv Atom feed into records, preserving feed order.
// Malformed XML and entries without <summary> raise ValidationError
// naming the entry index.
std::vector<PaperRecord> parse_atom_feed(const std::string& xml);

// Queries the arXiv API (search_query / max_results); fixture-backed
// in replay mode. max_results must be in 1..100.
std::vector<PaperRecord> arxiv_search(const std::string& query, int max_results,
                                      FixtureStore* fixtures, HttpTransport* transport);

// De-duplicates by arxiv id (first wins) and drops records whose
// title+abstract share no whole token with the topic
// (case-insensitive).
std::vector<PaperRecord> extract_abstracts(const std::vector<PaperRecord>& records,
                                           const std::string& topic);

// Delta writing the survivors under artifacts.search_and_extract.
std::map<std::string, Json> extract_abstracts_delta(const std::vector<PaperRecord>& records,
                                                    const std::string& topic);

// Executor performing search + extraction in one step. params:
//   query      literal query string, or
//   query_var  key-path into the state (default env.task)
//   max_results        (default 10)
//   topic / topic_var  relevance topic (defaults to the query)
class ArxivSearchExecutor : public Executor {
 public:
  ArxivSearchExecutor(std::shared_ptr<FixtureStore> fixtures,
                      std::shared_ptr<HttpTransport> transport)
      : fixtures_(std::move(fixtures)), transport_(std::move(transport)) {}

  std::string id() const override { return "arxiv-search"; }
  bool deterministic() const override {
    return fixtures_ != nullptr && fixtures_->mode() == FixtureMode::Replay;
  }

  StepOutcome execute(const Json& state, const StepSpec& step,
                      const OptionSpec& option) override;

 private:
  std::shared_ptr<FixtureStore> fixtures_;
  std::shared_ptr<HttpTransport> transport_;
};

// Executor filtering records already present in the state. params:
//   source     key-path of a list of paper records
//              (default artifacts.search_results)
//   topic / topic_var as above
class ExtractExecutor : public Executor {
 public:
  std::string id() const override { return "extract"; }
  bool deterministic() const override { return true; }

  StepOutcome execute(const Json& state, const StepSpec& step,
                      const OptionSpec& option) override;
};

}  // namespace agentgit
