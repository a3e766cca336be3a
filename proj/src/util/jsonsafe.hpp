#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "core/error.hpp"

namespace lirec {

using Json = nlohmann::json;

// Strict config reading: every key must be known, every value well-typed.
// Unknown keys are rejected so silent typos never change a run.
class JsonReader {
 public:
  JsonReader(const Json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj.is_object()) fail_invalid(where_ + ": expected a JSON object");
  }

  bool has(const std::string& key) {
    seen_.insert(key);
    return obj_.contains(key);
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    seen_.insert(key);
    if (!obj_.contains(key)) return fallback;
    return read<T>(key);
  }

  template <class T>
  T require(const std::string& key) {
    seen_.insert(key);
    if (!obj_.contains(key)) fail_invalid(where_ + ": missing required key \"" + key + "\"");
    return read<T>(key);
  }

  const Json& raw(const std::string& key) {
    seen_.insert(key);
    return obj_.at(key);
  }

  // call last: rejects any key that was never consumed
  void finish() const {
    for (auto it = obj_.begin(); it != obj_.end(); ++it) {
      if (!seen_.count(it.key()))
        fail_invalid(where_ + ": unknown key \"" + it.key() + "\"");
    }
  }

 private:
  template <class T>
  T read(const std::string& key) {
    try {
      return obj_.at(key).get<T>();
    } catch (const Json::exception&) {
      fail_invalid(where_ + ": bad value type for key \"" + key + "\"");
    }
  }

  const Json& obj_;
  std::string where_;
  std::set<std::string> seen_;
};

// Parses text, mapping syntax errors to invalid-argument errors.
inline Json parse_json(const std::string& text, const std::string& where) {
  Json j = Json::parse(text, nullptr, false);
  if (j.is_discarded()) fail_invalid(where + ": malformed JSON");
  return j;
}

}  // namespace lirec
