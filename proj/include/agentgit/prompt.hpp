#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "agentgit/canonical.hpp"

namespace agentgit {

enum class PromptKind { Cot, FewShot };

struct PromptTemplate {
  std::string id;
  PromptKind kind = PromptKind::Cot;
  std::string body;  // text with {placeholders}
  std::vector<std::pair<std::string, std::string>> examples;  // few-shot only

  // params shape: {prompt_kind: "cot"|"few-shot", template: "...",
  // examples: [[in, out], ...]}
  static PromptTemplate from_params(const Json& params, const std::string& id);
};

// Appended to chain-of-thought prompts by render_prompt.
extern const char* const kReasoningClause;

// Substitutes {placeholders} from vars and builds the chat message
// list: few-shot renders the example pairs (user/assistant) before the
// task, cot appends the reasoning elicitation clause. Unbound
// placeholders raise ValidationError("unbound placeholder: <name>").
std::vector<Json> render_prompt(const PromptTemplate& tmpl,
                                const std::map<std::string, std::string>& vars);

}  // namespace agentgit
