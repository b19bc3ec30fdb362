// Copyright 2026 The wiresec Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Wireline network instances: capacitated directed graph plus the messages,
// subset-shared keys, private randomness, sink demands and eavesdropper edge
// sets that live on it.
//
// Capacities are exact integer symbol counts per network use. Graphs may
// contain cycles; only code compilation requires a topological schedule.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <queue>
#include <set>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "wiresec/error.hpp"
#include "wiresec/galois.hpp"

namespace wiresec {

struct Edge {
  std::string id;
  std::string from;
  std::string to;
  std::uint32_t capacity = 0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

struct MessageSource {
  std::string id;
  std::size_t length = 1;
  std::vector<std::string> holders;

  friend bool operator==(const MessageSource&, const MessageSource&) = default;
};

struct SharedKey {
  std::string id;
  std::size_t length = 0;
  std::vector<std::string> holders;

  friend bool operator==(const SharedKey&, const SharedKey&) = default;
};

struct PrivateRandomness {
  std::string id;
  std::size_t length = 0;
  std::string owner;

  friend bool operator==(const PrivateRandomness&, const PrivateRandomness&) = default;
};

struct Demand {
  std::string sink;
  std::vector<std::string> messages;

  friend bool operator==(const Demand&, const Demand&) = default;
};

struct EavesdropperSet {
  std::string name;
  std::vector<std::string> edges;

  friend bool operator==(const EavesdropperSet&, const EavesdropperSet&) = default;
};

struct NetworkSpec {
  Field field{2};
  std::vector<std::string> nodes;
  std::vector<Edge> edges;
  std::vector<MessageSource> messages;
  std::vector<SharedKey> keys;
  std::vector<PrivateRandomness> randomness;
  std::vector<Demand> demands;
  std::vector<EavesdropperSet> eavesdroppers;

  std::optional<std::size_t> node_index(std::string_view id) const {
    return find(nodes, id, [](const std::string& s) -> const std::string& { return s; });
  }
  std::optional<std::size_t> edge_index(std::string_view id) const {
    return find(edges, id, [](const Edge& e) -> const std::string& { return e.id; });
  }
  std::optional<std::size_t> message_index(std::string_view id) const {
    return find(messages, id, [](const MessageSource& m) -> const std::string& { return m.id; });
  }
  std::optional<std::size_t> key_index(std::string_view id) const {
    return find(keys, id, [](const SharedKey& k) -> const std::string& { return k.id; });
  }
  std::optional<std::size_t> randomness_index(std::string_view id) const {
    return find(randomness, id,
                [](const PrivateRandomness& w) -> const std::string& { return w.id; });
  }

  std::size_t message_symbols() const {
    std::size_t n = 0;
    for (const auto& m : messages) n += m.length;
    return n;
  }
  std::size_t key_symbols() const {
    std::size_t n = 0;
    for (const auto& k : keys) n += k.length;
    return n;
  }
  std::size_t randomness_symbols() const {
    std::size_t n = 0;
    for (const auto& w : randomness) n += w.length;
    return n;
  }

  friend bool operator==(const NetworkSpec&, const NetworkSpec&) = default;

 private:
  template <typename T, typename Proj>
  static std::optional<std::size_t> find(const std::vector<T>& items, std::string_view id,
                                         Proj proj) {
    for (std::size_t i = 0; i < items.size(); ++i)
      if (proj(items[i]) == id) return i;
    return std::nullopt;
  }
};

namespace detail {

[[noreturn]] inline void network_error(const std::string& what) {
  throw Error(ErrorKind::kInvalidNetwork, what);
}

template <typename T, typename Proj>
void require_unique(const std::vector<T>& items, Proj proj, std::string_view what) {
  std::set<std::string> seen;
  for (const auto& item : items) {
    if (!seen.insert(proj(item)).second) {
      network_error("duplicate " + std::string(what) + " id '" + proj(item) + "'");
    }
  }
}

}  // namespace detail

inline bool holds(const std::vector<std::string>& holders, std::string_view node) {
  return std::find(holders.begin(), holders.end(), node) != holders.end();
}

// Throws Error(kInvalidNetwork) naming the first violated invariant.
inline void validate(const NetworkSpec& spec) {
  using detail::network_error;
  detail::require_unique(spec.nodes, [](const std::string& s) { return s; }, "node");
  detail::require_unique(spec.edges, [](const Edge& e) { return e.id; }, "edge");
  detail::require_unique(spec.messages, [](const MessageSource& m) { return m.id; }, "message");
  detail::require_unique(spec.keys, [](const SharedKey& k) { return k.id; }, "key");
  detail::require_unique(spec.randomness, [](const PrivateRandomness& w) { return w.id; },
                         "randomness");
  detail::require_unique(spec.eavesdroppers, [](const EavesdropperSet& e) { return e.name; },
                         "eavesdropper set");

  auto require_node = [&](const std::string& node, const std::string& context) {
    if (!spec.node_index(node)) network_error("unknown node '" + node + "' in " + context);
  };

  for (const auto& e : spec.edges) {
    require_node(e.from, "edge '" + e.id + "'");
    require_node(e.to, "edge '" + e.id + "'");
  }
  for (const auto& m : spec.messages) {
    if (m.length < 1) network_error("message '" + m.id + "' must have length >= 1");
    if (m.holders.empty()) network_error("message '" + m.id + "' has no holder");
    for (const auto& h : m.holders) require_node(h, "message '" + m.id + "'");
  }
  for (const auto& k : spec.keys)
    for (const auto& h : k.holders) require_node(h, "key '" + k.id + "'");
  for (const auto& w : spec.randomness) require_node(w.owner, "randomness '" + w.id + "'");

  std::set<std::string> sinks;
  for (const auto& d : spec.demands) {
    require_node(d.sink, "demand");
    if (!sinks.insert(d.sink).second) network_error("sink '" + d.sink + "' listed twice");
    if (d.messages.empty()) network_error("sink '" + d.sink + "' demands nothing");
    for (const auto& id : d.messages) {
      auto mi = spec.message_index(id);
      if (!mi) network_error("unknown message '" + id + "' demanded by '" + d.sink + "'");
      if (holds(spec.messages[*mi].holders, d.sink)) {
        network_error("sink '" + d.sink + "' demands message '" + id + "' it already holds");
      }
    }
  }
  for (const auto& set : spec.eavesdroppers)
    for (const auto& id : set.edges)
      if (!spec.edge_index(id))
        network_error("unknown edge '" + id + "' in eavesdropper set '" + set.name + "'");
}

inline void to_json(nlohmann::json& j, const NetworkSpec& spec) {
  j = nlohmann::json::object();
  j["field"] = spec.field.modulus();
  j["nodes"] = spec.nodes;
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : spec.edges)
    edges.push_back({{"id", e.id}, {"from", e.from}, {"to", e.to}, {"capacity", e.capacity}});
  auto& msgs = j["messages"] = nlohmann::json::array();
  for (const auto& m : spec.messages)
    msgs.push_back({{"id", m.id}, {"length", m.length}, {"holders", m.holders}});
  auto& keys = j["keys"] = nlohmann::json::array();
  for (const auto& k : spec.keys)
    keys.push_back({{"id", k.id}, {"length", k.length}, {"holders", k.holders}});
  auto& rnd = j["randomness"] = nlohmann::json::array();
  for (const auto& w : spec.randomness)
    rnd.push_back({{"id", w.id}, {"length", w.length}, {"owner", w.owner}});
  auto& demands = j["demands"] = nlohmann::json::array();
  for (const auto& d : spec.demands)
    demands.push_back({{"sink", d.sink}, {"messages", d.messages}});
  auto& eaves = j["eavesdroppers"] = nlohmann::json::array();
  for (const auto& e : spec.eavesdroppers) eaves.push_back({{"name", e.name}, {"edges", e.edges}});
}

inline NetworkSpec network_from_json(const nlohmann::json& j) {
  NetworkSpec spec;
  try {
    spec.field = Field(j.at("field").get<std::uint32_t>());
    spec.nodes = j.at("nodes").get<std::vector<std::string>>();
    for (const auto& e : j.value("edges", nlohmann::json::array())) {
      auto cap = e.at("capacity").get<std::int64_t>();
      if (cap < 0) detail::network_error("edge '" + e.at("id").get<std::string>() +
                                         "' has negative capacity");
      spec.edges.push_back({e.at("id").get<std::string>(), e.at("from").get<std::string>(),
                            e.at("to").get<std::string>(), static_cast<std::uint32_t>(cap)});
    }
    auto length_of = [](const nlohmann::json& item) {
      auto len = item.at("length").get<std::int64_t>();
      if (len < 0) detail::network_error("'" + item.at("id").get<std::string>() +
                                         "' has negative length");
      return static_cast<std::size_t>(len);
    };
    for (const auto& m : j.value("messages", nlohmann::json::array()))
      spec.messages.push_back({m.at("id").get<std::string>(), length_of(m),
                               m.at("holders").get<std::vector<std::string>>()});
    for (const auto& k : j.value("keys", nlohmann::json::array()))
      spec.keys.push_back({k.at("id").get<std::string>(), length_of(k),
                           k.at("holders").get<std::vector<std::string>>()});
    for (const auto& w : j.value("randomness", nlohmann::json::array()))
      spec.randomness.push_back(
          {w.at("id").get<std::string>(), length_of(w), w.at("owner").get<std::string>()});
    for (const auto& d : j.value("demands", nlohmann::json::array()))
      spec.demands.push_back(
          {d.at("sink").get<std::string>(), d.at("messages").get<std::vector<std::string>>()});
    for (const auto& e : j.value("eavesdroppers", nlohmann::json::array()))
      spec.eavesdroppers.push_back(
          {e.at("name").get<std::string>(), e.at("edges").get<std::vector<std::string>>()});
  } catch (const nlohmann::json::exception& e) {
    detail::network_error(std::string("malformed network JSON: ") + e.what());
  } catch (const Error& e) {
    if (e.kind() == ErrorKind::kInvalidNetwork) throw;
    detail::network_error(e.what());
  }
  validate(spec);
  return spec;
}

inline NetworkSpec parse_network(std::string_view text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    detail::network_error(std::string("not valid JSON: ") + e.what());
  }
  return network_from_json(j);
}

// Kahn's algorithm, always releasing the lowest-indexed ready node so the
// schedule is deterministic. nullopt when the graph has a directed cycle.
inline std::optional<std::vector<std::size_t>> topological_order(const NetworkSpec& spec) {
  std::size_t n = spec.nodes.size();
  std::vector<std::size_t> indegree(n, 0);
  std::vector<std::vector<std::size_t>> out(n);
  for (const auto& e : spec.edges) {
    std::size_t from = *spec.node_index(e.from);
    std::size_t to = *spec.node_index(e.to);
    out[from].push_back(to);
    ++indegree[to];
  }
  std::priority_queue<std::size_t, std::vector<std::size_t>, std::greater<>> ready;
  for (std::size_t v = 0; v < n; ++v)
    if (indegree[v] == 0) ready.push(v);
  std::vector<std::size_t> order;
  while (!ready.empty()) {
    std::size_t v = ready.top();
    ready.pop();
    order.push_back(v);
    for (std::size_t w : out[v])
      if (--indegree[w] == 0) ready.push(w);
  }
  if (order.size() != n) return std::nullopt;
  return order;
}

inline bool is_acyclic(const NetworkSpec& spec) { return topological_order(spec).has_value(); }

struct RateVector {
  std::vector<double> message_rates;  // bits per network use
  std::vector<double> key_rates;
};

inline RateVector rates(const NetworkSpec& spec, std::size_t uses_per_block = 1) {
  if (uses_per_block == 0) throw Error(ErrorKind::kInvalidArgument, "uses per block must be >= 1");
  RateVector r;
  double bits = spec.field.log2_size() / static_cast<double>(uses_per_block);
  for (const auto& m : spec.messages) r.message_rates.push_back(m.length * bits);
  for (const auto& k : spec.keys) r.key_rates.push_back(k.length * bits);
  return r;
}

}  // namespace wiresec
