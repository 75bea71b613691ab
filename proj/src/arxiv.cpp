#include "agentgit/arxiv.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include "agentgit/diff.hpp"
#include "agentgit/sha256.hpp"

namespace agentgit {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  std::size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  std::size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

// arXiv entry ids look like http://arxiv.org/abs/2401.01234v1
std::string id_from_url(const std::string& url) {
  std::size_t slash = url.find_last_of('/');
  return slash == std::string::npos ? url : url.substr(slash + 1);
}

std::set<std::string> tokenize(const std::string& text) {
  std::set<std::string> tokens;
  std::string current;
  for (char c : text) {
    if (std::isalnum(static_cast<unsigned char>(c))) {
      current.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!current.empty()) {
      tokens.insert(current);
      current.clear();
    }
  }
  if (!current.empty()) tokens.insert(current);
  return tokens;
}

std::string url_encode(const std::string& s) {
  static const char* kHex = "0123456789ABCDEF";
  std::string out;
  for (unsigned char c : s) {
    if (std::isalnum(c) || c == '-' || c == '_' || c == '.' || c == '~') {
      out.push_back(static_cast<char>(c));
    } else if (c == ' ') {
      out.push_back('+');
    } else {
      out.push_back('%');
      out.push_back(kHex[c >> 4]);
      out.push_back(kHex[c & 0xf]);
    }
  }
  return out;
}

}  // namespace

Json PaperRecord::to_json() const {
  Json j = Json::object();
  j["arxiv_id"] = arxiv_id;
  j["title"] = title;
  j["abstract"] = abstract;
  j["authors"] = authors;
  j["published"] = published;
  j["url"] = url;
  return j;
}

std::vector<PaperRecord> parse_atom_feed(const std::string& xml) {
  pt::ptree tree;
  try {
    std::istringstream in(xml);
    pt::read_xml(in, tree);
  } catch (const pt::xml_parser_error& e) {
    throw ValidationError(std::string("malformed Atom feed: ") + e.what());
  }

  auto feed = tree.get_child_optional("feed");
  if (!feed) {
    throw ValidationError("malformed Atom feed: missing <feed> root");
  }

  std::vector<PaperRecord> records;
  std::size_t index = 0;
  for (const auto& [tag, entry] : *feed) {
    if (tag != "entry") continue;
    PaperRecord record;
    record.url = trim(entry.get<std::string>("id", ""));
    record.arxiv_id = id_from_url(record.url);
    record.title = trim(entry.get<std::string>("title", ""));
    auto summary = entry.get_optional<std::string>("summary");
    if (!summary || trim(*summary).empty()) {
      throw ValidationError("entry " + std::to_string(index) + " (" +
                            (record.arxiv_id.empty() ? "?" : record.arxiv_id) +
                            "): missing <summary>");
    }
    record.abstract = trim(*summary);
    record.published = trim(entry.get<std::string>("published", ""));
    for (const auto& [child_tag, child] : entry) {
      if (child_tag == "author") {
        std::string name = trim(child.get<std::string>("name", ""));
        if (!name.empty()) record.authors.push_back(name);
      }
    }
    records.push_back(std::move(record));
    ++index;
  }
  return records;
}

std::vector<PaperRecord> arxiv_search(const std::string& query, int max_results,
                                      FixtureStore* fixtures, HttpTransport* transport) {
  if (max_results < 1 || max_results > 100) {
    throw ValidationError("max_results must be in 1..100");
  }

  Json request = Json::object();
  request["search_query"] = query;
  request["max_results"] = max_results;

  std::string xml;
  if (fixtures != nullptr && fixtures->mode() == FixtureMode::Replay) {
    xml = fixtures->require("arxiv-search", request).at("body").get<std::string>();
  } else {
    if (transport == nullptr) {
      throw ExecutorError("arxiv-search has no transport and is not in replay mode");
    }
    std::string path = "/api/query?search_query=" + url_encode(query) +
                       "&max_results=" + std::to_string(max_results);
    HttpResponseData response = transport->get("http://export.arxiv.org", path, 30000);
    if (response.status != 200) {
      throw ExecutorError("arXiv query failed with HTTP " + std::to_string(response.status));
    }
    xml = response.body;
    if (fixtures != nullptr && fixtures->mode() == FixtureMode::Record) {
      Json stored = Json::object();
      stored["body"] = xml;
      fixtures->record("arxiv-search", request, stored);
    }
  }
  return parse_atom_feed(xml);
}

std::vector<PaperRecord> extract_abstracts(const std::vector<PaperRecord>& records,
                                           const std::string& topic) {
  std::set<std::string> topic_tokens = tokenize(topic);
  std::set<std::string> seen;
  std::vector<PaperRecord> survivors;
  for (const PaperRecord& record : records) {
    if (!seen.insert(record.arxiv_id).second) continue;
    std::set<std::string> record_tokens = tokenize(record.title + " " + record.abstract);
    bool relevant = std::any_of(topic_tokens.begin(), topic_tokens.end(),
                                [&](const std::string& token) {
                                  return record_tokens.count(token) > 0;
                                });
    if (relevant) survivors.push_back(record);
  }
  return survivors;
}

std::map<std::string, Json> extract_abstracts_delta(const std::vector<PaperRecord>& records,
                                                    const std::string& topic) {
  Json list = Json::array();
  for (const PaperRecord& record : extract_abstracts(records, topic)) {
    list.push_back(record.to_json());
  }
  return {{"artifacts.search_and_extract", list}};
}

namespace {

std::string string_param(const Json& state, const Json& params, const char* literal_key,
                         const char* var_key, const std::string& fallback) {
  if (params.contains(literal_key)) return params.at(literal_key).get<std::string>();
  std::string key_path = params.value(var_key, std::string());
  if (!key_path.empty()) {
    const Json* value = get_key_path(state, key_path);
    if (value == nullptr) {
      throw ExecutorError("state has no value at key-path '" + key_path + "'");
    }
    return value->is_string() ? value->get<std::string>() : canonical_serialize(*value);
  }
  return fallback;
}

}  // namespace

StepOutcome ArxivSearchExecutor::execute(const Json& state, const StepSpec&,
                                         const OptionSpec& option) {
  std::string task;
  if (const Json* t = get_key_path(state, "env.task"); t != nullptr && t->is_string()) {
    task = t->get<std::string>();
  }
  std::string query, topic;
  try {
    query = string_param(state, option.params, "query", "query_var", task);
    topic = string_param(state, option.params, "topic", "topic_var", query);
  } catch (const Error& e) {
    return StepOutcome::failed(e.what());
  }
  if (query.empty()) {
    return StepOutcome::failed("arxiv-search has no query (params or env.task)");
  }
  int max_results = option.params.value("max_results", 10);

  std::vector<PaperRecord> records;
  try {
    records = arxiv_search(query, max_results, fixtures_.get(), transport_.get());
  } catch (const Error& e) {
    return StepOutcome::failed(e.what());
  }

  StepOutcome outcome;
  outcome.delta = extract_abstracts_delta(records, topic);
  Json call = Json::object();
  call["tool"] = "arxiv-search";
  call["input_digest"] = Sha256::hex_digest(query);
  call["output_digest"] =
      Sha256::hex_digest(canonical_serialize(outcome.delta.begin()->second));
  call["status"] = "ok";
  outcome.tool_call = call;
  outcome.tokens_in = 0;
  outcome.tokens_out = 0;
  return outcome;
}

StepOutcome ExtractExecutor::execute(const Json& state, const StepSpec&,
                                     const OptionSpec& option) {
  std::string source = option.params.value("source", std::string("artifacts.search_results"));
  const Json* list = get_key_path(state, source);
  if (list == nullptr || !list->is_array()) {
    return StepOutcome::failed("no record list at key-path '" + source + "'");
  }

  std::vector<PaperRecord> records;
  for (const Json& item : *list) {
    PaperRecord record;
    record.arxiv_id = item.value("arxiv_id", std::string());
    record.title = item.value("title", std::string());
    record.abstract = item.value("abstract", std::string());
    record.published = item.value("published", std::string());
    record.url = item.value("url", std::string());
    if (item.contains("authors")) {
      for (const Json& author : item.at("authors")) {
        record.authors.push_back(author.get<std::string>());
      }
    }
    records.push_back(std::move(record));
  }

  std::string task;
  if (const Json* t = get_key_path(state, "env.task"); t != nullptr && t->is_string()) {
    task = t->get<std::string>();
  }
  std::string topic;
  try {
    topic = string_param(state, option.params, "topic", "topic_var", task);
  } catch (const Error& e) {
    return StepOutcome::failed(e.what());
  }

  StepOutcome outcome;
  outcome.delta = extract_abstracts_delta(records, topic);
  return outcome;
}

}  // namespace agentgit
