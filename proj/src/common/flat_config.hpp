#pragma once

#include <set>
#include <string>

#include <yaml-cpp/yaml.h>

#include "tlr/config_error.hpp"

namespace tlr::detail {

// Flat `key: value` YAML map with unknown-key detection.
class FlatConfig {
 public:
  FlatConfig(YAML::Node root, std::string source) : root_(std::move(root)), source_(std::move(source)) {
    if (root_ && !root_.IsNull() && !root_.IsMap()) throw ConfigError(source_ + ": expected a key/value map");
  }

  template <typename T>
  void get(const std::string& key, T& out) {
    known_.insert(key);
    if (!root_ || root_.IsNull()) return;
    const YAML::Node node = root_[key];
    if (!node) return;
    try {
      out = node.as<T>();
    } catch (const YAML::Exception& e) {
      throw ConfigError(source_ + ": bad value for '" + key + "': " + e.what());
    }
  }

  bool has(const std::string& key) const { return root_ && root_.IsMap() && root_[key]; }

  void reject_unknown() const {
    if (!root_ || root_.IsNull()) return;
    for (const auto& kv : root_) {
      const auto key = kv.first.as<std::string>();
      if (!known_.count(key)) throw ConfigError(source_ + ": unknown key '" + key + "'");
    }
  }

 private:
  YAML::Node root_;
  std::string source_;
  std::set<std::string> known_;
};

inline YAML::Node load_yaml_file(const std::string& path) {
  try {
    return YAML::LoadFile(path);
  } catch (const YAML::Exception& e) {
    throw ConfigError(path + ": " + e.what());
  }
}

inline YAML::Node load_yaml_text(const std::string& text, const std::string& source) {
  try {
    return YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(source + ": " + e.what());
  }
}

}  // namespace tlr::detail
