#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "p3o/errors.hpp"
#include "p3o/json_io.hpp"

namespace p3o {

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write '" + path + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path + "'");
}

json read_json_file(const std::string& path) {
  const std::string text = read_text_file(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path + ": " + e.what());
  }
}

const json& require(const json& j, const std::string& key, const std::string& ctx) {
  if (!j.is_object()) throw FormatError(ctx + ": expected an object");
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(ctx + ": missing key '" + key + "'");
  return *it;
}

int get_int(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = require(j, key, ctx);
  if (!v.is_number_integer()) throw FormatError(ctx + ": '" + key + "' must be an integer");
  return v.get<int>();
}

double get_double(const json& j, const std::string& key, const std::string& ctx) {
  const json& v = require(j, key, ctx);
  if (!v.is_number()) throw FormatError(ctx + ": '" + key + "' must be a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw FormatError(ctx + ": '" + key + "' is not finite");
  return x;
}

namespace {

void flatten(const json& j, const std::vector<int>& shape, size_t depth, const std::string& field,
             std::vector<double>& out) {
  if (depth == shape.size()) {
    if (!j.is_number()) throw FormatError(field + ": expected a number");
    const double x = j.get<double>();
    if (!std::isfinite(x)) throw FormatError(field + ": non-finite value");
    out.push_back(x);
    return;
  }
  if (!j.is_array() || j.size() != static_cast<size_t>(shape[depth]))
    throw FormatError(field + ": expected an array of length " + std::to_string(shape[depth]));
  for (size_t i = 0; i < j.size(); ++i)
    flatten(j[i], shape, depth + 1, field + "[" + std::to_string(i) + "]", out);
}

std::vector<double> read_table(const json& j, const std::string& key,
                               const std::vector<int>& shape) {
  std::vector<double> out;
  flatten(require(j, key, "model"), shape, 0, key, out);
  return out;
}

json nest(const double* data, const std::vector<int>& shape, size_t depth) {
  json arr = json::array();
  size_t stride = 1;
  for (size_t k = depth + 1; k < shape.size(); ++k) stride *= shape[k];
  for (int i = 0; i < shape[depth]; ++i) {
    if (depth + 1 == shape.size())
      arr.push_back(data[i]);
    else
      arr.push_back(nest(data + i * stride, shape, depth + 1));
  }
  return arr;
}

json nest(const std::vector<double>& v, const std::vector<int>& shape) { return nest(v.data(), shape, 0); }

}  // namespace

json to_json(const TabularPOMDP& m) {
  const int S = m.n_states, O = m.n_obs, A = m.n_actions, H = m.horizon;
  json j;
  j["n_states"] = S;
  j["n_obs"] = O;
  j["n_actions"] = A;
  j["horizon"] = H;
  j["gamma"] = m.gamma;
  j["mu1"] = nest(m.mu1, {S});
  j["trans"] = nest(m.trans, {H, S, A, S});
  j["emit"] = nest(m.emit, {H, S, O});
  j["emit0"] = nest(m.emit0, {S, O});
  j["reward"] = nest(m.reward, {H, S, A});
  return j;
}

TabularPOMDP model_from_json(const json& j) {
  TabularPOMDP m;
  m.n_states = get_int(j, "n_states", "model");
  m.n_obs = get_int(j, "n_obs", "model");
  m.n_actions = get_int(j, "n_actions", "model");
  m.horizon = get_int(j, "horizon", "model");
  if (m.n_states < 1) throw ValidationError("n_states", "must be positive");
  if (m.n_obs < 1) throw ValidationError("n_obs", "must be positive");
  if (m.n_actions < 1) throw ValidationError("n_actions", "must be positive");
  if (m.horizon < 1) throw ValidationError("horizon", "must be at least 1");
  m.gamma = get_double(j, "gamma", "model");
  const int S = m.n_states, O = m.n_obs, A = m.n_actions, H = m.horizon;
  m.mu1 = read_table(j, "mu1", {S});
  m.trans = read_table(j, "trans", {H, S, A, S});
  m.emit = read_table(j, "emit", {H, S, O});
  if (j.contains("emit0"))
    m.emit0 = read_table(j, "emit0", {S, O});
  else
    m.emit0.assign(m.emit.begin(), m.emit.begin() + static_cast<long>(S) * O);
  m.reward = read_table(j, "reward", {H, S, A});
  validate(m);
  return m;
}

TabularPOMDP load_model(const std::string& path) { return model_from_json(read_json_file(path)); }

json to_json(const BehaviorPolicy& b) {
  json j;
  j["horizon"] = b.horizon;
  j["n_states"] = b.n_states;
  j["n_actions"] = b.n_actions;
  j["probs"] = nest(b.probs, {b.horizon, b.n_states, b.n_actions});
  j["strict_coverage"] = b.strict_coverage;
  j["min_behavior_prob"] = b.min_behavior_prob;
  return j;
}

BehaviorPolicy behavior_from_json(const json& j) {
  BehaviorPolicy b;
  b.horizon = get_int(j, "horizon", "behavior");
  b.n_states = get_int(j, "n_states", "behavior");
  b.n_actions = get_int(j, "n_actions", "behavior");
  if (b.horizon < 1 || b.n_states < 1 || b.n_actions < 1)
    throw ValidationError("behavior", "dimensions must be positive");
  flatten(require(j, "probs", "behavior"), {b.horizon, b.n_states, b.n_actions}, 0, "probs", b.probs);
  if (j.contains("strict_coverage")) b.strict_coverage = j.at("strict_coverage").get<bool>();
  if (j.contains("min_behavior_prob")) b.min_behavior_prob = get_double(j, "min_behavior_prob", "behavior");
  validate(b);
  return b;
}

BehaviorPolicy load_behavior(const std::string& path) {
  return behavior_from_json(read_json_file(path));
}

json to_json(const HistoryClass& hc) { return hc.name(); }

HistoryClass history_class_from_json(const json& j) {
  if (j.is_string()) return HistoryClass::parse(j.get<std::string>());
  if (j.is_object()) {
    const std::string kind = require(j, "kind", "history_class").get<std::string>();
    if (kind == "finite") return HistoryClass::finite(get_int(j, "k", "history_class"));
    return HistoryClass::parse(kind);
  }
  throw FormatError("history_class: expected a string or object");
}

json to_json(const TargetPolicy& p) {
  json j;
  j["history_class"] = to_json(p.history_class());
  j["n_obs"] = p.n_obs();
  j["n_actions"] = p.n_actions();
  j["horizon"] = p.horizon();
  if (p.form() == TargetPolicy::Form::LinearSoftmax) {
    j["form"] = "linear_softmax";
    j["features"] = "one_hot";
    j["l_pi"] = p.l_pi();
    j["beta"] = std::vector<double>(p.beta().data(), p.beta().data() + p.beta().size());
  } else {
    j["form"] = "table";
    json tabs = json::array();
    for (int t = 0; t < p.horizon(); ++t) {
      const int rows = static_cast<int>(p.coder().atoms(t));
      tabs.push_back(nest(p.tables()[t], {rows, p.n_actions()}));
    }
    j["table"] = tabs;
  }
  return j;
}

TargetPolicy policy_from_json(const json& j) {
  const HistoryClass hc = history_class_from_json(require(j, "history_class", "policy"));
  const int O = get_int(j, "n_obs", "policy");
  const int A = get_int(j, "n_actions", "policy");
  const int H = get_int(j, "horizon", "policy");
  if (O < 1 || A < 1 || H < 1) throw ValidationError("policy", "dimensions must be positive");
  const std::string form = require(j, "form", "policy").get<std::string>();
  if (form == "linear_softmax") {
    if (j.contains("features") && j.at("features") != "one_hot")
      throw FormatError("policy: only one_hot features are supported");
    const json& bj = require(j, "beta", "policy");
    if (!bj.is_array()) throw FormatError("policy: beta must be an array");
    Eigen::VectorXd beta(static_cast<Eigen::Index>(bj.size()));
    for (size_t i = 0; i < bj.size(); ++i) {
      if (!bj[i].is_number()) throw FormatError("policy: beta entries must be numbers");
      beta[static_cast<Eigen::Index>(i)] = bj[i].get<double>();
    }
    return TargetPolicy::linear_softmax(hc, O, A, H, beta, get_double(j, "l_pi", "policy"));
  }
  if (form == "table") {
    const json& tj = require(j, "table", "policy");
    if (!tj.is_array() || tj.size() != static_cast<size_t>(H))
      throw FormatError("policy: table needs one entry per step");
    HistoryCoder coder(hc, O, A, H);
    std::vector<std::vector<double>> probs(H);
    for (int t = 0; t < H; ++t)
      flatten(tj[t], {static_cast<int>(coder.atoms(t)), A}, 0, "table[" + std::to_string(t) + "]",
              probs[t]);
    return TargetPolicy::table(hc, O, A, H, std::move(probs));
  }
  throw FormatError("policy: unknown form '" + form + "'");
}

TargetPolicy load_policy(const std::string& path) { return policy_from_json(read_json_file(path)); }

json to_json(const PolicySet& s) {
  json j;
  j["history_class"] = to_json(s.history_class);
  j["provenance"] = s.provenance;
  j["seed"] = s.seed;
  json arr = json::array();
  for (const auto& p : s.members) arr.push_back(to_json(p));
  j["policies"] = arr;
  return j;
}

PolicySet policy_set_from_json(const json& j) {
  PolicySet s;
  s.history_class = history_class_from_json(require(j, "history_class", "policy_set"));
  if (j.contains("provenance")) s.provenance = j.at("provenance").get<std::string>();
  if (j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
  const json& arr = require(j, "policies", "policy_set");
  if (!arr.is_array()) throw FormatError("policy_set: policies must be an array");
  for (const auto& pj : arr) s.members.push_back(policy_from_json(pj));
  validate(s);
  return s;
}

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string fingerprint(const json& j) { return fnv1a_hex(j.dump()); }
std::string fingerprint(const TabularPOMDP& m) { return fingerprint(to_json(m)); }
std::string fingerprint(const BehaviorPolicy& b) { return fingerprint(to_json(b)); }

}  // namespace p3o
