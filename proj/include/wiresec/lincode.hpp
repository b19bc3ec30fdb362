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

// Linear network codes and their compilation into global transfer matrices.
//
// Every symbol in the network is a linear form over the global variable
// vector x = (M, K, W): all message symbols in declaration order, then all
// key symbols, then all randomness symbols. Compilation propagates local
// encoding forms along a topological schedule and then slices the resulting
// rows into per-observer (A, B, G) and per-sink (A1, A2, B1, B2, G) blocks.

#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "wiresec/error.hpp"
#include "wiresec/galois.hpp"
#include "wiresec/netmodel.hpp"
#include "wiresec/random.hpp"

namespace wiresec {

struct SourceRef {
  enum class Kind { kEdge, kMessage, kKey, kRandomness };
  Kind kind = Kind::kMessage;
  std::string id;
  std::size_t index = 0;

  friend bool operator==(const SourceRef&, const SourceRef&) = default;
};

// "edge:e1.0", "msg:M1.2", "key:K1.0", "rnd:W1.1". The symbol index follows
// the last '.', so ids may themselves contain dots.
inline SourceRef parse_source(std::string_view text) {
  auto fail = [&] {
    throw Error(ErrorKind::kInvalidCode, "malformed source reference '" + std::string(text) + "'");
  };
  auto colon = text.find(':');
  auto dot = text.rfind('.');
  if (colon == std::string_view::npos || dot == std::string_view::npos || dot <= colon + 1 ||
      dot + 1 == text.size()) {
    fail();
  }
  SourceRef ref;
  std::string_view kind = text.substr(0, colon);
  if (kind == "edge") ref.kind = SourceRef::Kind::kEdge;
  else if (kind == "msg") ref.kind = SourceRef::Kind::kMessage;
  else if (kind == "key") ref.kind = SourceRef::Kind::kKey;
  else if (kind == "rnd") ref.kind = SourceRef::Kind::kRandomness;
  else fail();
  ref.id = std::string(text.substr(colon + 1, dot - colon - 1));
  std::size_t index = 0;
  for (char c : text.substr(dot + 1)) {
    if (c < '0' || c > '9') fail();
    index = index * 10 + static_cast<std::size_t>(c - '0');
  }
  ref.index = index;
  return ref;
}

inline std::string to_string(const SourceRef& ref) {
  const char* prefix = "msg";
  switch (ref.kind) {
    case SourceRef::Kind::kEdge: prefix = "edge"; break;
    case SourceRef::Kind::kMessage: prefix = "msg"; break;
    case SourceRef::Kind::kKey: prefix = "key"; break;
    case SourceRef::Kind::kRandomness: prefix = "rnd"; break;
  }
  return std::string(prefix) + ":" + ref.id + "." + std::to_string(ref.index);
}

struct Term {
  SourceRef source;
  std::int64_t coef = 0;

  friend bool operator==(const Term&, const Term&) = default;
};

using LinearForm = std::vector<Term>;

struct EdgeCode {
  std::string edge;
  std::vector<LinearForm> slots;

  friend bool operator==(const EdgeCode&, const EdgeCode&) = default;
};

// Local encoding: for each coded edge, one linear form per transmitted
// symbol slot. Edges not listed carry nothing.
struct CodeSpec {
  std::vector<EdgeCode> edges;

  friend bool operator==(const CodeSpec&, const CodeSpec&) = default;
};

inline void to_json(nlohmann::json& j, const CodeSpec& code) {
  j = nlohmann::json::object();
  auto& edges = j["edges"] = nlohmann::json::array();
  for (const auto& e : code.edges) {
    nlohmann::json slots = nlohmann::json::array();
    for (const auto& form : e.slots) {
      nlohmann::json terms = nlohmann::json::array();
      for (const auto& t : form) terms.push_back({{"src", to_string(t.source)}, {"coef", t.coef}});
      slots.push_back(std::move(terms));
    }
    edges.push_back({{"edge", e.edge}, {"slots", std::move(slots)}});
  }
}

inline CodeSpec code_from_json(const nlohmann::json& j) {
  CodeSpec code;
  try {
    for (const auto& e : j.at("edges")) {
      EdgeCode ec;
      ec.edge = e.at("edge").get<std::string>();
      for (const auto& slot : e.at("slots")) {
        LinearForm form;
        for (const auto& t : slot)
          form.push_back({parse_source(t.at("src").get<std::string>()),
                          t.at("coef").get<std::int64_t>()});
        ec.slots.push_back(std::move(form));
      }
      code.edges.push_back(std::move(ec));
    }
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidCode, std::string("malformed code JSON: ") + e.what());
  }
  return code;
}

inline CodeSpec parse_code(std::string_view text) {
  try {
    return code_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorKind::kInvalidCode, std::string("not valid JSON: ") + e.what());
  }
}

// Column positions of the global variable vector (M, K, W).
struct VariableLayout {
  std::vector<std::size_t> message_offset;
  std::vector<std::size_t> key_offset;
  std::vector<std::size_t> randomness_offset;
  std::size_t message_symbols = 0;
  std::size_t key_symbols = 0;
  std::size_t randomness_symbols = 0;

  explicit VariableLayout(const NetworkSpec& spec) {
    for (const auto& m : spec.messages) {
      message_offset.push_back(message_symbols);
      message_symbols += m.length;
    }
    for (const auto& k : spec.keys) {
      key_offset.push_back(key_symbols);
      key_symbols += k.length;
    }
    for (const auto& w : spec.randomness) {
      randomness_offset.push_back(randomness_symbols);
      randomness_symbols += w.length;
    }
  }

  std::size_t total() const { return message_symbols + key_symbols + randomness_symbols; }
  std::size_t key_base() const { return message_symbols; }
  std::size_t randomness_base() const { return message_symbols + key_symbols; }
};

// A concrete valuation of every message, key and randomness symbol, each in
// global declaration order.
struct MessageAssignment {
  Vector messages;
  Vector keys;
  Vector randomness;
};

struct ObserverView {
  std::string name;
  FieldMatrix a;  // k x |M|
  FieldMatrix b;  // k x |K|
  FieldMatrix g;  // k x |W|
};

// What one sink sees: Y = A1 M1 + A2 M2 + B1 K1 + B2 K2 + G W + S X, with
// M1 the demanded messages, K1 the keys it holds, and X its side
// information (messages it holds as a source and its own randomness). M2,
// K2 and W are the unknown remainder.
struct SinkView {
  std::string sink;
  std::vector<std::string> demanded;
  FieldMatrix a1, a2, b1, b2, g, side;
  // Indices into MessageAssignment vectors for each block's columns.
  std::vector<std::size_t> m1_cols, m2_cols, k1_cols, k2_cols, w_cols;
  std::vector<std::size_t> side_message_cols, side_randomness_cols;
  FieldMatrix received;  // unsplit rows over (M, K, W)
};

struct CompiledCode {
  Field field{2};
  std::size_t message_symbols = 0;
  std::size_t key_symbols = 0;
  std::size_t randomness_symbols = 0;
  std::vector<std::string> message_ids;
  std::vector<std::size_t> message_lengths;
  std::vector<std::string> edge_ids;
  std::vector<FieldMatrix> edge_rows;  // per edge: slots x (|M|+|K|+|W|)
  std::vector<ObserverView> observers;
  std::vector<SinkView> sinks;

  const ObserverView& observer(std::string_view name) const {
    for (const auto& o : observers)
      if (o.name == name) return o;
    throw Error(ErrorKind::kInvalidArgument, "unknown eavesdropper set '" + std::string(name) + "'");
  }
  const SinkView& sink(std::string_view id) const {
    for (const auto& s : sinks)
      if (s.sink == id) return s;
    throw Error(ErrorKind::kInvalidArgument, "unknown sink '" + std::string(id) + "'");
  }
};

namespace detail {

inline std::vector<std::size_t> range_cols(std::size_t offset, std::size_t length) {
  std::vector<std::size_t> out(length);
  for (std::size_t i = 0; i < length; ++i) out[i] = offset + i;
  return out;
}

inline void append(std::vector<std::size_t>& dst, const std::vector<std::size_t>& src) {
  dst.insert(dst.end(), src.begin(), src.end());
}

inline FieldMatrix stack_rows(const Field& f, std::size_t cols,
                              const std::vector<const FieldMatrix*>& blocks) {
  std::size_t rows = 0;
  for (const auto* b : blocks) rows += b->rows();
  FieldMatrix out(f, rows, cols);
  std::size_t r = 0;
  for (const auto* b : blocks)
    for (std::size_t i = 0; i < b->rows(); ++i, ++r) {
      auto src = b->row(i);
      std::copy(src.begin(), src.end(), out.row(r).begin());
    }
  return out;
}

inline Vector gather(std::span<const Symbol> v, const std::vector<std::size_t>& cols) {
  Vector out(cols.size());
  for (std::size_t i = 0; i < cols.size(); ++i) out[i] = v[cols[i]];
  return out;
}

}  // namespace detail

// Resolves and checks every term, then propagates edge rows in topological
// order. Errors: kCyclicNetwork when no schedule exists; kInvalidCode naming
// the edge for unknown edges, over-capacity slot lists, or terms that are
// not available at the edge's tail node.
inline CompiledCode compile(const NetworkSpec& spec, const CodeSpec& code) {
  auto order = topological_order(spec);
  if (!order) throw Error(ErrorKind::kCyclicNetwork, "network has a directed cycle");

  const Field& f = spec.field;
  VariableLayout layout(spec);
  const std::size_t width = layout.total();

  std::vector<const EdgeCode*> by_edge(spec.edges.size(), nullptr);
  for (const auto& ec : code.edges) {
    auto ei = spec.edge_index(ec.edge);
    if (!ei) throw Error(ErrorKind::kInvalidCode, "unknown edge '" + ec.edge + "'");
    if (by_edge[*ei]) throw Error(ErrorKind::kInvalidCode, "edge '" + ec.edge + "' coded twice");
    if (ec.slots.size() > spec.edges[*ei].capacity) {
      throw Error(ErrorKind::kInvalidCode,
                  "edge '" + ec.edge + "' carries " + std::to_string(ec.slots.size()) +
                      " symbols but has capacity " + std::to_string(spec.edges[*ei].capacity));
    }
    by_edge[*ei] = &ec;
  }

  std::vector<FieldMatrix> rows;
  rows.reserve(spec.edges.size());
  for (std::size_t e = 0; e < spec.edges.size(); ++e)
    rows.emplace_back(f, by_edge[e] ? by_edge[e]->slots.size() : 0, width);

  std::vector<std::vector<std::size_t>> outgoing(spec.nodes.size());
  for (std::size_t e = 0; e < spec.edges.size(); ++e)
    outgoing[*spec.node_index(spec.edges[e].from)].push_back(e);

  for (std::size_t v : *order) {
    const std::string& node = spec.nodes[v];
    for (std::size_t e : outgoing[v]) {
      if (!by_edge[e]) continue;
      const std::string& eid = spec.edges[e].id;
      for (std::size_t s = 0; s < by_edge[e]->slots.size(); ++s) {
        auto out = rows[e].row(s);
        for (const Term& t : by_edge[e]->slots[s]) {
          Symbol c = f.reduce(t.coef);
          auto bad = [&](const std::string& why) {
            return Error(ErrorKind::kInvalidCode,
                         "edge '" + eid + "' slot " + std::to_string(s) + ": " +
                             to_string(t.source) + " " + why);
          };
          switch (t.source.kind) {
            case SourceRef::Kind::kEdge: {
              auto in = spec.edge_index(t.source.id);
              if (!in) throw bad("names an unknown edge");
              if (spec.edges[*in].to != node) throw bad("is not an incoming edge of '" + node + "'");
              if (t.source.index >= rows[*in].rows()) throw bad("is beyond the carried symbols");
              auto src = rows[*in].row(t.source.index);
              for (std::size_t j = 0; j < width; ++j) out[j] = f.add(out[j], f.mul(c, src[j]));
              break;
            }
            case SourceRef::Kind::kMessage: {
              auto mi = spec.message_index(t.source.id);
              if (!mi) throw bad("names an unknown message");
              if (!holds(spec.messages[*mi].holders, node)) throw bad("is not held at '" + node + "'");
              if (t.source.index >= spec.messages[*mi].length) throw bad("is out of range");
              std::size_t col = layout.message_offset[*mi] + t.source.index;
              out[col] = f.add(out[col], c);
              break;
            }
            case SourceRef::Kind::kKey: {
              auto ki = spec.key_index(t.source.id);
              if (!ki) throw bad("names an unknown key");
              if (!holds(spec.keys[*ki].holders, node)) throw bad("is not held at '" + node + "'");
              if (t.source.index >= spec.keys[*ki].length) throw bad("is out of range");
              std::size_t col = layout.key_base() + layout.key_offset[*ki] + t.source.index;
              out[col] = f.add(out[col], c);
              break;
            }
            case SourceRef::Kind::kRandomness: {
              auto wi = spec.randomness_index(t.source.id);
              if (!wi) throw bad("names unknown randomness");
              if (spec.randomness[*wi].owner != node) throw bad("is not owned by '" + node + "'");
              if (t.source.index >= spec.randomness[*wi].length) throw bad("is out of range");
              std::size_t col =
                  layout.randomness_base() + layout.randomness_offset[*wi] + t.source.index;
              out[col] = f.add(out[col], c);
              break;
            }
          }
        }
      }
    }
  }

  CompiledCode compiled;
  compiled.field = f;
  compiled.message_symbols = layout.message_symbols;
  compiled.key_symbols = layout.key_symbols;
  compiled.randomness_symbols = layout.randomness_symbols;
  for (const auto& m : spec.messages) {
    compiled.message_ids.push_back(m.id);
    compiled.message_lengths.push_back(m.length);
  }
  for (const auto& e : spec.edges) compiled.edge_ids.push_back(e.id);

  const auto all_m = detail::range_cols(0, layout.message_symbols);
  const auto all_k = detail::range_cols(layout.key_base(), layout.key_symbols);
  const auto all_w = detail::range_cols(layout.randomness_base(), layout.randomness_symbols);

  for (const auto& set : spec.eavesdroppers) {
    std::vector<const FieldMatrix*> blocks;
    for (const auto& id : set.edges) blocks.push_back(&rows[*spec.edge_index(id)]);
    FieldMatrix stacked = detail::stack_rows(f, width, blocks);
    compiled.observers.push_back({set.name, stacked.select_columns(all_m),
                                  stacked.select_columns(all_k), stacked.select_columns(all_w)});
  }

  for (const auto& demand : spec.demands) {
    std::vector<const FieldMatrix*> blocks;
    for (std::size_t e = 0; e < spec.edges.size(); ++e)
      if (spec.edges[e].to == demand.sink) blocks.push_back(&rows[e]);
    SinkView view{demand.sink,
                  {},
                  FieldMatrix(f, 0, 0),
                  FieldMatrix(f, 0, 0),
                  FieldMatrix(f, 0, 0),
                  FieldMatrix(f, 0, 0),
                  FieldMatrix(f, 0, 0),
                  FieldMatrix(f, 0, 0),
                  {}, {}, {}, {}, {}, {}, {},
                  detail::stack_rows(f, width, blocks)};

    for (std::size_t i = 0; i < spec.messages.size(); ++i) {
      const auto& m = spec.messages[i];
      auto cols = detail::range_cols(layout.message_offset[i], m.length);
      bool wanted = std::find(demand.messages.begin(), demand.messages.end(), m.id) !=
                    demand.messages.end();
      if (wanted) {
        view.demanded.push_back(m.id);
        detail::append(view.m1_cols, cols);
      } else if (holds(m.holders, demand.sink)) {
        detail::append(view.side_message_cols, cols);
      } else {
        detail::append(view.m2_cols, cols);
      }
    }
    for (std::size_t i = 0; i < spec.keys.size(); ++i) {
      auto cols = detail::range_cols(layout.key_offset[i], spec.keys[i].length);
      detail::append(holds(spec.keys[i].holders, demand.sink) ? view.k1_cols : view.k2_cols, cols);
    }
    for (std::size_t i = 0; i < spec.randomness.size(); ++i) {
      auto cols = detail::range_cols(layout.randomness_offset[i], spec.randomness[i].length);
      detail::append(spec.randomness[i].owner == demand.sink ? view.side_randomness_cols
                                                             : view.w_cols,
                     cols);
    }

    auto shift = [](std::vector<std::size_t> cols, std::size_t by) {
      for (auto& c : cols) c += by;
      return cols;
    };
    const FieldMatrix& y = view.received;
    view.a1 = y.select_columns(view.m1_cols);
    view.a2 = y.select_columns(view.m2_cols);
    view.b1 = y.select_columns(shift(view.k1_cols, layout.key_base()));
    view.b2 = y.select_columns(shift(view.k2_cols, layout.key_base()));
    view.g = y.select_columns(shift(view.w_cols, layout.randomness_base()));
    auto side_cols = view.side_message_cols;
    detail::append(side_cols, shift(view.side_randomness_cols, layout.randomness_base()));
    view.side = y.select_columns(side_cols);
    compiled.sinks.push_back(std::move(view));
  }

  compiled.edge_rows = std::move(rows);
  return compiled;
}

inline void check_assignment(const CompiledCode& code, const MessageAssignment& x) {
  if (x.messages.size() != code.message_symbols || x.keys.size() != code.key_symbols ||
      x.randomness.size() != code.randomness_symbols) {
    throw Error(ErrorKind::kInvalidArgument, "assignment dimensions do not match the code");
  }
  for (const Vector* v : {&x.messages, &x.keys, &x.randomness})
    for (Symbol s : *v)
      if (s >= code.field.modulus())
        throw Error(ErrorKind::kInvalidArgument, "assignment symbol out of field range");
}

// C = A m + B k + G w.
inline Vector evaluate(const ObserverView& view, const MessageAssignment& x) {
  const Field& f = view.a.field();
  Vector c = view.a.apply(x.messages);
  Vector bk = view.b.apply(x.keys);
  Vector gw = view.g.apply(x.randomness);
  for (std::size_t i = 0; i < c.size(); ++i) c[i] = f.add(c[i], f.add(bk[i], gw[i]));
  return c;
}

// The sink's known side-information vector X = (held messages, own randomness).
inline Vector side_information(const SinkView& view, const MessageAssignment& x) {
  Vector s = detail::gather(x.messages, view.side_message_cols);
  Vector r = detail::gather(x.randomness, view.side_randomness_cols);
  s.insert(s.end(), r.begin(), r.end());
  return s;
}

inline Vector evaluate(const SinkView& view, const MessageAssignment& x) {
  Vector full = x.messages;
  full.insert(full.end(), x.keys.begin(), x.keys.end());
  full.insert(full.end(), x.randomness.begin(), x.randomness.end());
  return view.received.apply(full);
}

inline Vector evaluate(const CompiledCode& code, const MessageAssignment& x,
                       std::string_view view_id) {
  check_assignment(code, x);
  for (const auto& o : code.observers)
    if (o.name == view_id) return evaluate(o, x);
  for (const auto& s : code.sinks)
    if (s.sink == view_id) return evaluate(s, x);
  throw Error(ErrorKind::kInvalidArgument, "unknown view '" + std::string(view_id) + "'");
}

// Full-capacity code with i.i.d. uniform coefficients over every locally
// available input symbol. Zero coefficients are omitted.
inline CodeSpec random_code(const NetworkSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  const std::uint32_t p = spec.field.modulus();
  CodeSpec code;
  for (const auto& edge : spec.edges) {
    if (edge.capacity == 0) continue;
    std::vector<SourceRef> inputs;
    for (const auto& in : spec.edges)
      if (in.to == edge.from)
        for (std::size_t s = 0; s < in.capacity; ++s)
          inputs.push_back({SourceRef::Kind::kEdge, in.id, s});
    for (const auto& m : spec.messages)
      if (holds(m.holders, edge.from))
        for (std::size_t s = 0; s < m.length; ++s)
          inputs.push_back({SourceRef::Kind::kMessage, m.id, s});
    for (const auto& k : spec.keys)
      if (holds(k.holders, edge.from))
        for (std::size_t s = 0; s < k.length; ++s)
          inputs.push_back({SourceRef::Kind::kKey, k.id, s});
    for (const auto& w : spec.randomness)
      if (w.owner == edge.from)
        for (std::size_t s = 0; s < w.length; ++s)
          inputs.push_back({SourceRef::Kind::kRandomness, w.id, s});

    EdgeCode ec{edge.id, {}};
    for (std::size_t slot = 0; slot < edge.capacity; ++slot) {
      LinearForm form;
      for (const auto& in : inputs) {
        auto c = static_cast<std::int64_t>(uniform_below(rng, p));
        if (c != 0) form.push_back({in, c});
      }
      ec.slots.push_back(std::move(form));
    }
    code.edges.push_back(std::move(ec));
  }
  return code;
}

}  // namespace wiresec
