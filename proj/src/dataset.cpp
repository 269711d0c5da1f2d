#include "p3o/dataset.hpp"

#include <cmath>
#include <regex>
#include <sstream>

#include "p3o/errors.hpp"
#include "p3o/json_io.hpp"
#include "p3o/rng.hpp"

namespace p3o {

OfflineDataset generate(const TabularPOMDP& m, const BehaviorPolicy& b, std::size_t n,
                        std::uint64_t seed) {
  if (n < 1) throw ValidationError("n", "must be at least 1");
  validate(m);
  validate(b, &m);
  OfflineDataset d;
  d.model_fingerprint = fingerprint(m);
  d.behavior_fingerprint = fingerprint(b);
  d.seed = seed;
  d.horizon = m.horizon;
  d.trajectories.resize(n);
  const int S = m.n_states, O = m.n_obs, A = m.n_actions, H = m.horizon;
  for (std::size_t i = 0; i < n; ++i) {
    RandomStream rng(seed, i);
    Trajectory& tr = d.trajectories[i];
    int s = rng.categorical(m.mu1.data(), S);
    tr.o0 = rng.categorical(m.emit0_row(s), O);
    tr.steps.resize(H);
    for (int t = 0; t < H; ++t) {
      Step& st = tr.steps[t];
      st.o = rng.categorical(m.emit_row(t, s), O);
      st.a = rng.categorical(b.row(t, s), A);
      st.r = m.R(t, s, st.a);
      if (t + 1 < H) s = rng.categorical(m.trans_row(t, s, st.a), S);
    }
  }
  return d;
}

double empirical_mean(const OfflineDataset& d, const std::function<double(const Trajectory&)>& f) {
  if (d.trajectories.empty()) throw ValidationError("dataset", "empty");
  double acc = 0.0;
  for (const auto& tr : d.trajectories) acc += f(tr);
  return acc / static_cast<double>(d.trajectories.size());
}

void check_compatible(const OfflineDataset& d, const TabularPOMDP& m) {
  if (d.horizon != m.horizon) throw ValidationError("dataset.horizon", "does not match model");
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& tr = d.trajectories[i];
    const std::string where = "trajectories[" + std::to_string(i) + "]";
    if (tr.o0 < 0 || tr.o0 >= m.n_obs) throw ValidationError(where + ".o0", "out of range");
    if (static_cast<int>(tr.steps.size()) != m.horizon) throw ValidationError(where, "wrong length");
    for (const auto& st : tr.steps) {
      if (st.o < 0 || st.o >= m.n_obs) throw ValidationError(where + ".o", "out of range");
      if (st.a < 0 || st.a >= m.n_actions) throw ValidationError(where + ".a", "out of range");
    }
  }
}

std::string dataset_to_string(const OfflineDataset& d) {
  std::string out;
  json header;
  header["model_fingerprint"] = d.model_fingerprint;
  header["behavior_fingerprint"] = d.behavior_fingerprint;
  header["seed"] = d.seed;
  header["n"] = d.size();
  header["horizon"] = d.horizon;
  out += header.dump() + "\n";
  for (const auto& tr : d.trajectories) {
    json line;
    line["o0"] = tr.o0;
    json steps = json::array();
    for (const auto& st : tr.steps) steps.push_back({{"o", st.o}, {"a", st.a}, {"r", st.r}});
    line["steps"] = steps;
    out += line.dump() + "\n";
  }
  return out;
}

void save_dataset(const OfflineDataset& d, const std::string& path) {
  write_text_file(path, dataset_to_string(d));
}

namespace {

int index_field(const json& j, const char* key, long line) {
  auto it = j.find(key);
  if (it == j.end()) throw FormatError(std::string("missing '") + key + "'", line);
  if (!it->is_number_integer() || it->get<long long>() < 0)
    throw FormatError(std::string("'") + key + "' must be a nonnegative integer", line);
  return it->get<int>();
}

void only_keys(const json& j, std::initializer_list<const char*> keys, long line) {
  for (auto it = j.begin(); it != j.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw FormatError("unexpected key '" + it.key() + "'", line);
  }
}

}  // namespace

OfflineDataset dataset_from_string(const std::string& text) {
  static const std::regex non_finite(R"("r"\s*:\s*[-+]?(NaN|nan|Infinity|inf))");
  std::istringstream in(text);
  std::string raw;
  std::vector<std::string> lines;
  while (std::getline(in, raw)) lines.push_back(raw);
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty()) throw FormatError("empty dataset file", 1);

  auto parse = [&](std::size_t i) {
    try {
      return json::parse(lines[i]);
    } catch (const json::parse_error&) {
      if (std::regex_search(lines[i], non_finite))
        throw FormatError("non-finite reward", static_cast<long>(i + 1));
      throw FormatError("malformed JSON", static_cast<long>(i + 1));
    }
  };

  OfflineDataset d;
  const json header = parse(0);
  if (!header.is_object()) throw FormatError("header must be an object", 1);
  only_keys(header, {"model_fingerprint", "behavior_fingerprint", "seed", "n", "horizon"}, 1);
  try {
    d.model_fingerprint = header.at("model_fingerprint").get<std::string>();
    d.behavior_fingerprint = header.at("behavior_fingerprint").get<std::string>();
    d.seed = header.at("seed").get<std::uint64_t>();
    d.horizon = header.at("horizon").get<int>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("bad header: ") + e.what(), 1);
  }
  const long n = index_field(header, "n", 1);
  if (n < 1) throw FormatError("n must be at least 1", 1);
  if (d.horizon < 1) throw FormatError("horizon must be at least 1", 1);
  if (static_cast<long>(lines.size()) - 1 != n)
    throw FormatError("expected " + std::to_string(n) + " trajectories, found " +
                          std::to_string(lines.size() - 1),
                      static_cast<long>(lines.size()));

  d.trajectories.resize(n);
  for (long i = 0; i < n; ++i) {
    const long ln = i + 2;
    const json j = parse(static_cast<std::size_t>(i + 1));
    if (!j.is_object()) throw FormatError("trajectory must be an object", ln);
    only_keys(j, {"o0", "steps"}, ln);
    Trajectory& tr = d.trajectories[i];
    tr.o0 = index_field(j, "o0", ln);
    auto it = j.find("steps");
    if (it == j.end() || !it->is_array()) throw FormatError("missing 'steps' array", ln);
    if (static_cast<int>(it->size()) != d.horizon)
      throw FormatError("trajectory has " + std::to_string(it->size()) + " steps, expected " +
                            std::to_string(d.horizon),
                        ln);
    for (const auto& sj : *it) {
      if (!sj.is_object()) throw FormatError("step must be an object", ln);
      only_keys(sj, {"o", "a", "r"}, ln);
      Step st;
      st.o = index_field(sj, "o", ln);
      st.a = index_field(sj, "a", ln);
      auto r = sj.find("r");
      if (r == sj.end()) throw FormatError("missing 'r'", ln);
      if (r->is_null()) throw FormatError("non-finite reward", ln);
      if (!r->is_number()) throw FormatError("'r' must be a number", ln);
      st.r = r->get<double>();
      if (!std::isfinite(st.r)) throw FormatError("non-finite reward", ln);
      if (st.r < 0.0 || st.r > 1.0) throw FormatError("reward outside [0,1]", ln);
      tr.steps.push_back(st);
    }
  }
  return d;
}

OfflineDataset load_dataset(const std::string& path) {
  return dataset_from_string(read_text_file(path));
}

}  // namespace p3o
