#pragma once

#include <string>
#include <string_view>

#include "agentgit/errors.hpp"
#include "json.hpp"

namespace agentgit {

using Json = nlohmann::json;

// Canonical byte form of a JSON document: object keys sorted
// lexicographically by code point, UTF-8, no insignificant whitespace,
// numbers in shortest round-trip decimal form. Equal documents yield
// byte-identical output.
//
// Throws SerializationError naming the key-path for non-finite numbers
// and invalid UTF-8.
std::string canonical_serialize(const Json& doc);

// SHA-256 of canonical_serialize(state), lowercase hex, 64 chars.
std::string state_hash(const Json& state);

// Strict parse with "line N column M" positions in error messages.
Json parse_json(std::string_view text, const std::string& origin = "input");

// Byte-level equality under canonical serialization. Distinguishes
// 1 from 1.0, unlike Json::operator==.
bool canonical_equal(const Json& a, const Json& b);

// Root state for a fresh workflow run: the user task under env.task
// plus the empty reserved sections.
Json initial_state(const std::string& task);

}  // namespace agentgit
