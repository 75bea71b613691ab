#include "agentgit/prompt.hpp"

#include <cctype>

namespace agentgit {

const char* const kReasoningClause =
    "Think through the problem step by step and explain your reasoning "
    "before giving the final answer.";

namespace {

bool placeholder_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_';
}

std::string substitute(const std::string& body,
                       const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(body.size());
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] != '{') {
      out.push_back(body[i++]);
      continue;
    }
    std::size_t close = body.find('}', i + 1);
    if (close == std::string::npos) {
      out.push_back(body[i++]);
      continue;
    }
    std::string name = body.substr(i + 1, close - i - 1);
    bool well_formed = !name.empty();
    for (char c : name) well_formed = well_formed && placeholder_char(c);
    if (!well_formed) {
      out.push_back(body[i++]);
      continue;
    }
    auto it = vars.find(name);
    if (it == vars.end()) {
      throw ValidationError("unbound placeholder: " + name);
    }
    out += it->second;
    i = close + 1;
  }
  return out;
}

Json chat_message(const std::string& role, const std::string& content) {
  Json m = Json::object();
  m["role"] = role;
  m["content"] = content;
  return m;
}

}  // namespace

PromptTemplate PromptTemplate::from_params(const Json& params, const std::string& id) {
  PromptTemplate tmpl;
  tmpl.id = id;
  std::string kind = params.value("prompt_kind", std::string("cot"));
  if (kind == "cot") {
    tmpl.kind = PromptKind::Cot;
  } else if (kind == "few-shot" || kind == "few_shot") {
    tmpl.kind = PromptKind::FewShot;
  } else {
    throw ValidationError("unknown prompt_kind '" + kind + "'");
  }
  tmpl.body = params.value("template", std::string());
  if (tmpl.body.empty()) {
    throw ValidationError("prompt template body is empty");
  }
  if (params.contains("examples")) {
    for (const auto& pair : params.at("examples")) {
      tmpl.examples.emplace_back(pair.at(0).get<std::string>(),
                                 pair.at(1).get<std::string>());
    }
  }
  if (tmpl.kind == PromptKind::FewShot && tmpl.examples.empty()) {
    throw ValidationError("few-shot template needs at least one example pair");
  }
  return tmpl;
}

std::vector<Json> render_prompt(const PromptTemplate& tmpl,
                                const std::map<std::string, std::string>& vars) {
  std::string task = substitute(tmpl.body, vars);

  std::vector<Json> messages;
  messages.push_back(chat_message(
      "system", "You are a careful research assistant writing sections of a report."));
  if (tmpl.kind == PromptKind::FewShot) {
    for (const auto& [input, output] : tmpl.examples) {
      messages.push_back(chat_message("user", input));
      messages.push_back(chat_message("assistant", output));
    }
    messages.push_back(chat_message("user", task));
  } else {
    messages.push_back(chat_message("user", task + "\n\n" + kReasoningClause));
  }
  return messages;
}

}  // namespace agentgit
