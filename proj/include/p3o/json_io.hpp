#pragma once

#include <json.hpp>
#include <string>

#include "p3o/model.hpp"
#include "p3o/policy.hpp"

namespace p3o {

using json = nlohmann::json;

// File helpers. Missing or unreadable files raise IoError, bad JSON FormatError.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);
json read_json_file(const std::string& path);

json to_json(const TabularPOMDP& m);
TabularPOMDP model_from_json(const json& j);  // validates
TabularPOMDP load_model(const std::string& path);

json to_json(const BehaviorPolicy& b);
BehaviorPolicy behavior_from_json(const json& j);
BehaviorPolicy load_behavior(const std::string& path);

json to_json(const HistoryClass& hc);
HistoryClass history_class_from_json(const json& j);

json to_json(const TargetPolicy& p);
TargetPolicy policy_from_json(const json& j);
TargetPolicy load_policy(const std::string& path);

json to_json(const PolicySet& s);
PolicySet policy_set_from_json(const json& j);

// 64-bit FNV-1a over the canonical (sorted-key, compact) JSON dump.
std::string fnv1a_hex(const std::string& bytes);
std::string fingerprint(const json& j);
std::string fingerprint(const TabularPOMDP& m);
std::string fingerprint(const BehaviorPolicy& b);

// Typed field access with FormatError on missing or mistyped keys.
const json& require(const json& j, const std::string& key, const std::string& ctx);
int get_int(const json& j, const std::string& key, const std::string& ctx);
double get_double(const json& j, const std::string& key, const std::string& ctx);

}  // namespace p3o
