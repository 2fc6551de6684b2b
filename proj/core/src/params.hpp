#pragma once

#include <set>
#include <string>

#include <json.hpp>

#include "oim/errors.hpp"

namespace oim::detail {

// Reads named parameters and rejects any the owner does not understand.
class Params {
 public:
  Params(const nlohmann::json& j, std::string owner) : j_(j), owner_(std::move(owner)) {
    if (!j_.is_object()) throw ConfigError(owner_ + ": params must be a JSON object");
  }

  template <class T>
  T get(const std::string& key, T fallback) {
    used_.insert(key);
    if (!j_.contains(key) || j_.at(key).is_null()) return fallback;
    try {
      return j_.at(key).get<T>();
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError(owner_ + ": bad value for '" + key + "': " + e.what());
    }
  }

  bool has(const std::string& key) const { return j_.contains(key) && !j_.at(key).is_null(); }

  void finish() const {
    for (const auto& [key, value] : j_.items())
      if (!used_.count(key)) throw ConfigError(owner_ + ": unknown parameter '" + key + "'");
  }

 private:
  const nlohmann::json& j_;
  std::string owner_;
  std::set<std::string> used_;
};

}  // namespace oim::detail
