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

// Reference implementations used only by tests. Nothing here shares code
// with the library beyond the plain data types: ranks come from basis
// insertion instead of reduced echelon form, edge values from a memoised
// per-node simulator instead of compiled matrices, and information measures
// from raw state enumeration.

#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "wiresec/lincode.hpp"
#include "wiresec/netmodel.hpp"
#include "wiresec/random.hpp"

namespace wiresec::testing {

using Row = std::vector<std::int64_t>;

inline std::int64_t mod(std::int64_t v, std::int64_t p) { return ((v % p) + p) % p; }

inline std::int64_t inverse(std::int64_t a, std::int64_t p) {
  for (std::int64_t x = 1; x < p; ++x)
    if (a * x % p == 1) return x;
  return 0;
}

// Rank by inserting rows one at a time into a basis keyed by leading index.
inline std::size_t ref_rank(std::int64_t p, const std::vector<Row>& rows) {
  std::map<std::size_t, Row> basis;
  for (Row r : rows) {
    for (auto& v : r) v = mod(v, p);
    for (std::size_t lead = 0; lead < r.size(); ++lead) {
      if (r[lead] == 0) continue;
      auto it = basis.find(lead);
      if (it == basis.end()) {
        std::int64_t s = inverse(r[lead], p);
        for (auto& v : r) v = v * s % p;
        basis.emplace(lead, r);
        break;
      }
      std::int64_t c = r[lead];
      for (std::size_t j = 0; j < r.size(); ++j) r[j] = mod(r[j] - c * it->second[j], p);
    }
  }
  return basis.size();
}

inline std::vector<Row> rows_of(const FieldMatrix& m) {
  std::vector<Row> out(m.rows(), Row(m.cols()));
  for (std::size_t r = 0; r < m.rows(); ++r)
    for (std::size_t c = 0; c < m.cols(); ++c) out[r][c] = m(r, c);
  return out;
}

inline std::size_t ref_rank(const FieldMatrix& m) {
  return ref_rank(m.field().modulus(), rows_of(m));
}

// Values of every message, key and randomness symbol, keyed by id.
struct Valuation {
  std::map<std::string, std::vector<std::int64_t>> values;
};

// Evaluates every edge by recursion on its inputs. Edges without a code
// carry zeros.
class Simulator {
 public:
  Simulator(const NetworkSpec& spec, const CodeSpec& code) : spec_(spec), code_(code) {}

  std::map<std::string, std::vector<std::int64_t>> run(const Valuation& x) const {
    std::map<std::string, std::vector<std::int64_t>> memo;
    for (const auto& e : spec_.edges) edge_value(e.id, x, memo);
    return memo;
  }

 private:
  const std::vector<std::int64_t>& edge_value(
      const std::string& id, const Valuation& x,
      std::map<std::string, std::vector<std::int64_t>>& memo) const {
    if (auto it = memo.find(id); it != memo.end()) return it->second;
    const std::int64_t p = spec_.field.modulus();
    std::size_t capacity = 0;
    for (const auto& e : spec_.edges)
      if (e.id == id) capacity = e.capacity;
    std::vector<std::int64_t> out(capacity, 0);
    for (const auto& ec : code_.edges) {
      if (ec.edge != id) continue;
      for (std::size_t s = 0; s < ec.slots.size(); ++s) {
        std::int64_t acc = 0;
        for (const auto& t : ec.slots[s]) {
          std::int64_t v = 0;
          if (t.source.kind == SourceRef::Kind::kEdge) {
            v = edge_value(t.source.id, x, memo)[t.source.index];
          } else {
            v = x.values.at(t.source.id)[t.source.index];
          }
          acc = mod(acc + mod(t.coef, p) * v, p);
        }
        out[s] = acc;
      }
    }
    return memo[id] = std::move(out);
  }

  const NetworkSpec& spec_;
  const CodeSpec& code_;
};

// Calls fn(valuation, message tuple) for every joint value of all message,
// key and randomness symbols.
inline void for_each_state(const NetworkSpec& spec,
                           const std::function<void(const Valuation&, const Row&)>& fn) {
  struct Slot {
    std::string id;
    std::size_t index;
    bool message;
  };
  std::vector<Slot> slots;
  Valuation x;
  for (const auto& m : spec.messages) {
    x.values[m.id].assign(m.length, 0);
    for (std::size_t i = 0; i < m.length; ++i) slots.push_back({m.id, i, true});
  }
  for (const auto& k : spec.keys) {
    x.values[k.id].assign(k.length, 0);
    for (std::size_t i = 0; i < k.length; ++i) slots.push_back({k.id, i, false});
  }
  for (const auto& w : spec.randomness) {
    x.values[w.id].assign(w.length, 0);
    for (std::size_t i = 0; i < w.length; ++i) slots.push_back({w.id, i, false});
  }
  const std::int64_t p = spec.field.modulus();
  std::vector<std::int64_t> digits(slots.size(), 0);
  while (true) {
    Row message;
    for (std::size_t i = 0; i < slots.size(); ++i) {
      x.values[slots[i].id][slots[i].index] = digits[i];
      if (slots[i].message) message.push_back(digits[i]);
    }
    fn(x, message);
    std::size_t j = 0;
    while (j < digits.size() && ++digits[j] == p) digits[j++] = 0;
    if (j == digits.size()) break;
  }
}

inline Row observe(const NetworkSpec& spec, const std::map<std::string, Row>& edges,
                   const std::string& observer) {
  Row out;
  for (const auto& e : spec.eavesdroppers)
    if (e.name == observer)
      for (const auto& id : e.edges) out.insert(out.end(), edges.at(id).begin(), edges.at(id).end());
  return out;
}

struct BruteLeakage {
  long double mutual_information = 0.0L;
  long double total_variation = 0.0L;
  std::uint64_t states = 0;
  std::size_t message_alphabet = 0;
};

inline BruteLeakage brute_leakage(const NetworkSpec& spec, const CodeSpec& code,
                                  const std::string& observer) {
  Simulator sim(spec, code);
  std::map<std::pair<Row, Row>, std::uint64_t> joint;
  std::map<Row, std::uint64_t> pm, pc;
  BruteLeakage out;
  for_each_state(spec, [&](const Valuation& x, const Row& m) {
    Row c = observe(spec, sim.run(x), observer);
    ++joint[{m, c}];
    ++pm[m];
    ++pc[c];
    ++out.states;
  });
  const long double t = static_cast<long double>(out.states);
  for (const auto& [mc, n] : joint) {
    long double q = n / t;
    out.mutual_information += q * std::log2(q / (pm[mc.first] / t * (pc[mc.second] / t)));
  }
  long double tv = 0.0L;
  for (const auto& [m, a] : pm)
    for (const auto& [c, b] : pc) {
      auto it = joint.find({m, c});
      long double q = it == joint.end() ? 0.0L : it->second / t;
      tv += std::fabs(q - a / t * (b / t));
    }
  out.total_variation = tv / 2.0L;
  out.message_alphabet = pm.size();
  return out;
}

// 1 - sum over everything the sink knows of max_m1 P(m1, knowledge).
inline long double brute_bayes_error(const NetworkSpec& spec, const CodeSpec& code,
                                     const std::string& sink) {
  Simulator sim(spec, code);
  const Demand* demand = nullptr;
  for (const auto& d : spec.demands)
    if (d.sink == sink) demand = &d;
  std::map<Row, std::map<Row, std::uint64_t>> tally;
  std::uint64_t total = 0;
  for_each_state(spec, [&](const Valuation& x, const Row&) {
    auto edges = sim.run(x);
    Row known;
    for (const auto& e : spec.edges)
      if (e.to == sink) known.insert(known.end(), edges[e.id].begin(), edges[e.id].end());
    for (const auto& k : spec.keys)
      if (holds(k.holders, sink)) known.insert(known.end(), x.values.at(k.id).begin(), x.values.at(k.id).end());
    for (const auto& m : spec.messages)
      if (holds(m.holders, sink)) known.insert(known.end(), x.values.at(m.id).begin(), x.values.at(m.id).end());
    for (const auto& w : spec.randomness)
      if (w.owner == sink) known.insert(known.end(), x.values.at(w.id).begin(), x.values.at(w.id).end());
    Row wanted;
    for (const auto& m : spec.messages)
      for (const auto& id : demand->messages)
        if (id == m.id) wanted.insert(wanted.end(), x.values.at(m.id).begin(), x.values.at(m.id).end());
    ++tally[known][wanted];
    ++total;
  });
  std::uint64_t correct = 0;
  for (const auto& [k, counts] : tally) {
    std::uint64_t best = 0;
    for (const auto& [m, n] : counts) best = std::max(best, n);
    correct += best;
  }
  return 1.0L - static_cast<long double>(correct) / static_cast<long double>(total);
}

// Whether some z with z^T B = 0, z^T G = 0 and z^T A != 0 exists, by trying
// every z.
inline bool brute_distinguisher_exists(const FieldMatrix& a, const FieldMatrix& b,
                                       const FieldMatrix& g) {
  const std::int64_t p = a.field().modulus();
  const std::size_t k = a.rows();
  std::vector<std::int64_t> z(k, 0);
  auto annihilates = [&](const FieldMatrix& m) {
    for (std::size_t c = 0; c < m.cols(); ++c) {
      std::int64_t acc = 0;
      for (std::size_t r = 0; r < k; ++r) acc = (acc + z[r] * m(r, c)) % p;
      if (acc != 0) return false;
    }
    return true;
  };
  while (true) {
    if (annihilates(b) && annihilates(g) && !annihilates(a)) return true;
    std::size_t j = 0;
    while (j < k && ++z[j] == p) z[j++] = 0;
    if (j == k) return false;
  }
}

struct Instance {
  NetworkSpec spec;
  CodeSpec code;
};

// Random acyclic instance with at most `max_dim` message, key and randomness
// symbols in total. Coefficients are sparse so both secure and leaky, and
// both decodable and ambiguous, instances are common.
inline Instance random_instance(std::uint64_t seed, std::uint32_t p, std::size_t max_dim = 8) {
  Rng rng(seed);
  auto pick = [&](std::uint64_t n) { return static_cast<std::size_t>(uniform_below(rng, n)); };
  Instance out;
  NetworkSpec& s = out.spec;
  s.field = Field(p);
  const std::size_t nodes = 3 + pick(4);
  for (std::size_t i = 0; i < nodes; ++i) s.nodes.push_back("n" + std::to_string(i));

  const std::size_t edges = 2 + pick(6);
  for (std::size_t i = 0; i < edges; ++i) {
    std::size_t a = pick(nodes - 1);
    std::size_t b = a + 1 + pick(nodes - 1 - a);
    s.edges.push_back({"e" + std::to_string(i), s.nodes[a], s.nodes[b],
                       static_cast<std::uint32_t>(1 + pick(2))});
  }

  std::size_t budget = max_dim;
  const std::size_t message_count = 1 + pick(2);
  for (std::size_t i = 0; i < message_count && budget > 0; ++i) {
    std::size_t len = std::min<std::size_t>(budget, 1 + pick(2));
    budget -= len;
    std::vector<std::string> holders{s.nodes[pick(nodes / 2 + 1)]};
    if (pick(4) == 0) {
      std::string extra = s.nodes[pick(nodes)];
      if (extra != holders[0]) holders.push_back(extra);
    }
    s.messages.push_back({"M" + std::to_string(i + 1), len, holders});
  }
  const std::size_t key_count = pick(3);
  for (std::size_t i = 0; i < key_count && budget > 0; ++i) {
    std::size_t len = std::min<std::size_t>(budget, 1 + pick(2));
    budget -= len;
    std::vector<std::string> holders;
    for (const auto& n : s.nodes)
      if (pick(2) == 0) holders.push_back(n);
    if (holders.empty()) holders.push_back(s.nodes[0]);
    s.keys.push_back({"K" + std::to_string(i + 1), len, holders});
  }
  if (budget > 0 && pick(2) == 0) {
    s.randomness.push_back({"W1", 1, s.nodes[pick(nodes)]});
  }

  for (std::size_t i = nodes; i-- > 1 && s.demands.size() < 2;) {
    const std::string& node = s.nodes[i];
    std::vector<std::string> wanted;
    for (const auto& m : s.messages)
      if (!holds(m.holders, node) && pick(3) != 0) wanted.push_back(m.id);
    if (!wanted.empty()) s.demands.push_back({node, wanted});
  }

  const std::size_t sets = 1 + pick(2);
  for (std::size_t i = 0; i < sets; ++i) {
    std::vector<std::string> seen;
    for (const auto& e : s.edges)
      if (pick(3) == 0) seen.push_back(e.id);
    if (seen.empty()) seen.push_back(s.edges[pick(s.edges.size())].id);
    s.eavesdroppers.push_back({"E" + std::to_string(i + 1), seen});
  }

  for (const auto& edge : s.edges) {
    std::vector<SourceRef> inputs;
    for (const auto& in : s.edges)
      if (in.to == edge.from)
        for (std::size_t k = 0; k < in.capacity; ++k) inputs.push_back({SourceRef::Kind::kEdge, in.id, k});
    for (const auto& m : s.messages)
      if (holds(m.holders, edge.from))
        for (std::size_t k = 0; k < m.length; ++k) inputs.push_back({SourceRef::Kind::kMessage, m.id, k});
    for (const auto& k : s.keys)
      if (holds(k.holders, edge.from))
        for (std::size_t j = 0; j < k.length; ++j) inputs.push_back({SourceRef::Kind::kKey, k.id, j});
    for (const auto& w : s.randomness)
      if (w.owner == edge.from)
        for (std::size_t j = 0; j < w.length; ++j) inputs.push_back({SourceRef::Kind::kRandomness, w.id, j});
    EdgeCode ec{edge.id, {}};
    for (std::size_t slot = 0; slot < edge.capacity; ++slot) {
      LinearForm form;
      for (const auto& in : inputs)
        if (pick(2) == 0) form.push_back({in, static_cast<std::int64_t>(1 + pick(p - 1))});
      ec.slots.push_back(std::move(form));
    }
    out.code.edges.push_back(std::move(ec));
  }
  return out;
}

}  // namespace wiresec::testing
