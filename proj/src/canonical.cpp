#include "agentgit/canonical.hpp"

#include <cmath>
#include <cstdint>

#include "agentgit/sha256.hpp"

namespace agentgit {

namespace {

bool valid_utf8(std::string_view s) {
  std::size_t i = 0;
  while (i < s.size()) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    std::size_t extra;
    std::uint32_t cp;
    if (c < 0x80) {
      i += 1;
      continue;
    } else if ((c & 0xe0) == 0xc0) {
      extra = 1;
      cp = c & 0x1f;
    } else if ((c & 0xf0) == 0xe0) {
      extra = 2;
      cp = c & 0x0f;
    } else if ((c & 0xf8) == 0xf0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (std::size_t k = 1; k <= extra; ++k) {
      unsigned char cc = static_cast<unsigned char>(s[i + k]);
      if ((cc & 0xc0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3f);
    }
    // overlong encodings, surrogates, out of range
    if ((extra == 1 && cp < 0x80) || (extra == 2 && cp < 0x800) ||
        (extra == 3 && cp < 0x10000) || cp > 0x10ffff ||
        (cp >= 0xd800 && cp <= 0xdfff)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

std::string join_path(const std::string& base, const std::string& key) {
  return base.empty() ? key : base + "." + key;
}

void validate(const Json& value, const std::string& path) {
  switch (value.type()) {
    case Json::value_t::number_float: {
      double d = value.get<double>();
      if (!std::isfinite(d)) {
        throw SerializationError("non-finite number at key-path '" +
                                 (path.empty() ? std::string("<root>") : path) +
                                 "'");
      }
      break;
    }
    case Json::value_t::string:
      if (!valid_utf8(value.get_ref<const std::string&>())) {
        throw SerializationError("invalid UTF-8 string at key-path '" +
                                 (path.empty() ? std::string("<root>") : path) +
                                 "'");
      }
      break;
    case Json::value_t::array: {
      std::size_t i = 0;
      for (const auto& item : value) {
        validate(item, path + "[" + std::to_string(i) + "]");
        ++i;
      }
      break;
    }
    case Json::value_t::object:
      for (const auto& [key, child] : value.items()) {
        if (!valid_utf8(key)) {
          throw SerializationError("invalid UTF-8 key under key-path '" +
                                   (path.empty() ? std::string("<root>") : path) +
                                   "'");
        }
        validate(child, join_path(path, key));
      }
      break;
    case Json::value_t::discarded:
      throw SerializationError("discarded value at key-path '" +
                               (path.empty() ? std::string("<root>") : path) +
                               "'");
    default:
      break;  // null, bool, integers always serialize
  }
}

}  // namespace

std::string canonical_serialize(const Json& doc) {
  validate(doc, "");
  // Json objects are backed by std::map, so keys are already in
  // code-point order; dump() emits shortest round-trip numbers.
  return doc.dump(-1, ' ', false, Json::error_handler_t::strict);
}

std::string state_hash(const Json& state) {
  return Sha256::hex_digest(canonical_serialize(state));
}

Json parse_json(std::string_view text, const std::string& origin) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& e) {
    // e.byte is a 1-based offset into the input
    std::size_t line = 1, col = 1;
    std::size_t limit = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < limit; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ValidationError(origin + ": parse error at line " + std::to_string(line) +
                          " column " + std::to_string(col) + ": " + e.what());
  }
}

bool canonical_equal(const Json& a, const Json& b) {
  return canonical_serialize(a) == canonical_serialize(b);
}

Json initial_state(const std::string& task) {
  Json state = Json::object();
  state["messages"] = Json::array();
  state["tool_calls"] = Json::array();
  state["env"] = Json::object();
  state["env"]["task"] = task;
  state["reasoning"] = Json::array();
  state["artifacts"] = Json::object();
  return state;
}

}  // namespace agentgit
