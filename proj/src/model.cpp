#include "lcmdp/model.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <set>

#include "lcmdp/util.hpp"

namespace lcmdp {

using nlohmann::json;

std::vector<std::string> validate(const Lcmdp& m) {
  std::vector<std::string> out;
  const std::size_t n = m.choices.size();

  if (m.labels.size() != n || m.absorbing.size() != n || m.beta.size() != n) {
    out.push_back(strf("field sizes disagree: %zu states but labels=%zu absorbing=%zu beta=%zu",
                       n, m.labels.size(), m.absorbing.size(), m.beta.size()));
    return out;  // indexing below would be unsafe
  }
  if (static_cast<int>(m.ap.size()) > kMaxAp)
    out.push_back(strf("ap count %zu exceeds the cap of %d", m.ap.size(), kMaxAp));
  if (m.n_costs < 1) out.push_back("n_costs must be at least 1");

  const std::uint32_t label_limit = m.ap.size() >= 32 ? ~0u : (1u << m.ap.size());
  double beta_sum = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    if (m.labels[s] >= label_limit)
      out.push_back(strf("labels of state %zu reference propositions outside ap", s));
    if (m.beta[s] < 0.0) out.push_back(strf("beta(%zu) is negative", s));
    if (m.beta[s] > 0.0 && m.absorbing[s])
      out.push_back(strf("beta(%zu) is positive on an absorbing state", s));
    beta_sum += m.beta[s];

    const auto& acts = m.choices[s];
    if (acts.empty()) out.push_back(strf("state %zu has no enabled action", s));
    std::set<ActionId> seen;
    for (const auto& ch : acts) {
      if (!seen.insert(ch.action).second)
        out.push_back(strf("state %zu enables action %d twice", s, ch.action));
      if (static_cast<int>(ch.cost.size()) != m.n_costs)
        out.push_back(strf("cost vector of (s=%zu,a=%d) has %zu entries, expected %d",
                           s, ch.action, ch.cost.size(), m.n_costs));
      for (std::size_t i = 0; i < ch.cost.size(); ++i)
        if (!(ch.cost[i] >= 0.0))
          out.push_back(strf("cost C_%zu(s=%zu,a=%d) = %g is negative", i, s, ch.action, ch.cost[i]));
      if (ch.rows.empty()) {
        out.push_back(strf("row (s=%zu,a=%d) is empty", s, ch.action));
        continue;
      }
      double sum = 0.0;
      for (const auto& e : ch.rows) {
        if (e.next < 0 || e.next >= static_cast<StateId>(n))
          out.push_back(strf("row (s=%zu,a=%d) targets out-of-range state %d", s, ch.action, e.next));
        if (e.prob < 0.0)
          out.push_back(strf("row (s=%zu,a=%d) has negative probability %g", s, ch.action, e.prob));
        sum += e.prob;
      }
      if (std::abs(sum - 1.0) > 1e-9)
        out.push_back(strf("row (s=%zu,a=%d) sums to %g", s, ch.action, sum));
    }
    if (m.absorbing[s]) {
      if (acts.size() != 1)
        out.push_back(strf("absorbing state %zu has %zu actions, expected 1", s, acts.size()));
      for (const auto& ch : acts) {
        for (const auto& e : ch.rows)
          if (e.next != static_cast<StateId>(s))
            out.push_back(strf("absorbing state %zu transitions away to %d", s, e.next));
        for (double c : ch.cost)
          if (c != 0.0) {
            out.push_back(strf("absorbing state %zu has nonzero cost", s));
            break;
          }
      }
    }
  }
  if (std::abs(beta_sum - 1.0) > 1e-9)
    out.push_back(strf("beta sums to %g", beta_sum));
  if (m.sink) {
    if (*m.sink < 0 || *m.sink >= static_cast<StateId>(n))
      out.push_back(strf("sink %d is out of range", *m.sink));
    else if (!m.absorbing[static_cast<std::size_t>(*m.sink)])
      out.push_back(strf("sink %d is not absorbing", *m.sink));
    if (m.sink && *m.sink >= 0 && *m.sink < static_cast<StateId>(n) &&
        m.beta[static_cast<std::size_t>(*m.sink)] > 0.0)
      out.push_back(strf("beta(%d) is positive on the sink", *m.sink));
  }
  for (StateId f : m.accepting)
    if (f < 0 || f >= static_cast<StateId>(n))
      out.push_back(strf("accepting state %d is out of range", f));
  return out;
}

std::vector<StateId> transient_states(const Lcmdp& m) {
  std::vector<StateId> out;
  for (StateId s = 0; s < m.num_states(); ++s)
    if (!m.is_absorbing(s) && !(m.sink && *m.sink == s)) out.push_back(s);
  return out;
}

json to_json(const Lcmdp& m) {
  json j;
  j["ap"] = m.ap;
  json states = json::array();
  for (StateId s = 0; s < m.num_states(); ++s) {
    json names = json::array();
    for (std::size_t p = 0; p < m.ap.size(); ++p)
      if (m.labels[static_cast<std::size_t>(s)] & (1u << p)) names.push_back(m.ap[p]);
    states.push_back({{"labels", names}, {"absorbing", m.is_absorbing(s)}});
  }
  j["states"] = std::move(states);
  json beta = json::object();
  for (StateId s = 0; s < m.num_states(); ++s)
    if (m.beta[static_cast<std::size_t>(s)] != 0.0)
      beta[std::to_string(s)] = m.beta[static_cast<std::size_t>(s)];
  j["beta"] = std::move(beta);
  json trans = json::array();
  std::vector<json> costs(static_cast<std::size_t>(m.n_costs), json::array());
  for (StateId s = 0; s < m.num_states(); ++s) {
    for (const auto& ch : m.choices[static_cast<std::size_t>(s)]) {
      json rows = json::array();
      for (const auto& e : ch.rows) rows.push_back({e.next, e.prob});
      trans.push_back({{"s", s}, {"a", ch.action}, {"rows", std::move(rows)}});
      for (int i = 0; i < m.n_costs; ++i)
        costs[static_cast<std::size_t>(i)].push_back(ch.cost[static_cast<std::size_t>(i)]);
    }
  }
  j["transitions"] = std::move(trans);
  j["costs"] = costs;
  j["sink"] = m.sink ? json(*m.sink) : json(nullptr);
  j["accepting"] = m.accepting;
  return j;
}

namespace {

const json& require(const json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end()) throw ModelError(strf("model file is missing field '%s'", field));
  return *it;
}

}  // namespace

Lcmdp model_from_json(const json& j) {
  Lcmdp m;
  try {
    m.ap = require(j, "ap").get<std::vector<std::string>>();
    std::map<std::string, int> ap_index;
    for (std::size_t p = 0; p < m.ap.size(); ++p) ap_index[m.ap[p]] = static_cast<int>(p);

    const json& states = require(j, "states");
    const int n = static_cast<int>(states.size());
    m.labels.assign(static_cast<std::size_t>(n), 0);
    m.absorbing.assign(static_cast<std::size_t>(n), 0);
    m.beta.assign(static_cast<std::size_t>(n), 0.0);
    m.choices.resize(static_cast<std::size_t>(n));
    for (int s = 0; s < n; ++s) {
      const json& st = states[static_cast<std::size_t>(s)];
      for (const auto& name : require(st, "labels")) {
        auto it = ap_index.find(name.get<std::string>());
        if (it == ap_index.end())
          throw ModelError(strf("state %d labels unknown proposition '%s'", s,
                                name.get<std::string>().c_str()));
        m.labels[static_cast<std::size_t>(s)] |= 1u << it->second;
      }
      m.absorbing[static_cast<std::size_t>(s)] = require(st, "absorbing").get<bool>() ? 1 : 0;
    }

    for (const auto& [key, val] : require(j, "beta").items()) {
      int s = std::stoi(key);
      if (s < 0 || s >= n) throw ModelError(strf("beta references out-of-range state %d", s));
      m.beta[static_cast<std::size_t>(s)] = val.get<double>();
    }

    const json& trans = require(j, "transitions");
    const json& costs = require(j, "costs");
    if (!costs.is_array() || costs.empty())
      throw ModelError("field 'costs' must list at least one cost function");
    m.n_costs = static_cast<int>(costs.size());
    for (int i = 0; i < m.n_costs; ++i)
      if (costs[static_cast<std::size_t>(i)].size() != trans.size())
        throw ModelError(strf("costs[%d] has %zu entries but there are %zu transitions", i,
                              costs[static_cast<std::size_t>(i)].size(), trans.size()));

    std::set<std::pair<int, int>> seen;
    for (std::size_t t = 0; t < trans.size(); ++t) {
      const json& tr = trans[t];
      int s = require(tr, "s").get<int>();
      int a = require(tr, "a").get<int>();
      if (s < 0 || s >= n) throw ModelError(strf("transitions[%zu] has out-of-range state %d", t, s));
      if (!seen.insert({s, a}).second)
        throw ModelError(strf("duplicate transition block for (s=%d,a=%d)", s, a));
      ActionChoice ch;
      ch.action = a;
      for (const auto& row : require(tr, "rows")) {
        if (!row.is_array() || row.size() != 2)
          throw ModelError(strf("transitions[%zu] has a malformed row; expected [next, prob]", t));
        ch.rows.push_back({row[0].get<StateId>(), row[1].get<double>()});
      }
      for (int i = 0; i < m.n_costs; ++i)
        ch.cost.push_back(costs[static_cast<std::size_t>(i)][t].get<double>());
      m.choices[static_cast<std::size_t>(s)].push_back(std::move(ch));
    }

    const json& sink = require(j, "sink");
    if (!sink.is_null()) m.sink = sink.get<StateId>();
    m.accepting = require(j, "accepting").get<std::vector<StateId>>();
  } catch (const json::exception& e) {
    throw ModelError(strf("model file malformed: %s", e.what()));
  }
  return m;
}

void save(const Lcmdp& m, const std::filesystem::path& path) {
  write_file(path, to_json(m).dump(2) + "\n");
}

Lcmdp load_model(const std::filesystem::path& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::parse_error& e) {
    throw ModelError(strf("%s: %s", path.string().c_str(), e.what()));
  }
  Lcmdp m = model_from_json(j);
  auto violations = validate(m);
  if (!violations.empty()) {
    std::string msg = path.string() + ": model failed validation:";
    for (const auto& v : violations) msg += "\n  " + v;
    throw ModelError(msg);
  }
  return m;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << content;
  if (!out) throw std::runtime_error("write failed for " + path.string());
}

}  // namespace lcmdp
