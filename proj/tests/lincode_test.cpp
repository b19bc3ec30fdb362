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

#include "wiresec/lincode.hpp"

#include <gtest/gtest.h>

#include "support/fixtures.hpp"
#include "support/reference.hpp"

namespace wiresec {
namespace {

using testing::fixture;

ErrorKind kind_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::kInvalidArgument;
}

std::string message_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return "";
}

TEST(SourceRef, ParseAndPrint) {
  SourceRef r = parse_source("edge:e1.0");
  EXPECT_EQ(r.kind, SourceRef::Kind::kEdge);
  EXPECT_EQ(r.id, "e1");
  EXPECT_EQ(r.index, 0u);
  EXPECT_EQ(parse_source("msg:M1.2").index, 2u);
  EXPECT_EQ(parse_source("key:K1.0").kind, SourceRef::Kind::kKey);
  EXPECT_EQ(parse_source("rnd:W1.1").kind, SourceRef::Kind::kRandomness);
  EXPECT_EQ(parse_source("msg:a.b.3").id, "a.b");
  EXPECT_EQ(to_string(parse_source("rnd:W1.11")), "rnd:W1.11");
  for (const char* bad : {"msg", "msg:M1", "foo:M1.0", "msg:.0", "msg:M1.x", "msg:M1."}) {
    EXPECT_EQ(kind_of([&] { parse_source(bad); }), ErrorKind::kInvalidCode) << bad;
  }
}

TEST(CodeJson, RoundTrip) {
  CodeSpec code = testing::fixture_code("butterfly");
  nlohmann::json j = code;
  EXPECT_EQ(code_from_json(j), code);
  EXPECT_EQ(kind_of([] { parse_code("[1,2"); }), ErrorKind::kInvalidCode);
  EXPECT_EQ(kind_of([] { parse_code(R"({"edges":[{"edge":"e1"}]})"); }), ErrorKind::kInvalidCode);
}

TEST(Compile, OneTimePad) {
  CompiledCode c = fixture("otp");
  const ObserverView& eve = c.observer("wire");
  EXPECT_EQ(eve.a, FieldMatrix::from_rows(Field(2), {{1}}));
  EXPECT_EQ(eve.b, FieldMatrix::from_rows(Field(2), {{1}}));
  EXPECT_EQ(eve.g.cols(), 0u);
  EXPECT_EQ(eve.g.rows(), 1u);
  const SinkView& t = c.sink("t");
  EXPECT_EQ(t.a1, FieldMatrix::from_rows(Field(2), {{1}}));
  EXPECT_EQ(t.b1, FieldMatrix::from_rows(Field(2), {{1}}));
  EXPECT_EQ(t.a2.cols(), 0u);
  EXPECT_EQ(t.b2.cols(), 0u);
}

TEST(Compile, Plaintext) {
  CompiledCode c = fixture("plaintext");
  EXPECT_EQ(c.observer("wire").a, FieldMatrix::from_rows(Field(2), {{1}}));
  EXPECT_EQ(c.observer("wire").b.cols(), 0u);
}

// Columns are (M1, M2, K) over GF(3).
TEST(Compile, ButterflyHandPropagation) {
  CompiledCode c = fixture("butterfly");
  Field f(3);
  ASSERT_EQ(c.edge_ids.size(), 7u);
  std::map<std::string, FieldMatrix> expected = {
      {"s1c", FieldMatrix::from_rows(f, {{1, 0, 1}})},  {"s2c", FieldMatrix::from_rows(f, {{0, 1, 1}})},
      {"cd", FieldMatrix::from_rows(f, {{1, 1, 2}})},   {"dt1", FieldMatrix::from_rows(f, {{1, 1, 2}})},
      {"dt2", FieldMatrix::from_rows(f, {{1, 1, 2}})},  {"s1t1", FieldMatrix::from_rows(f, {{1, 0, 0}})},
      {"s2t2", FieldMatrix::from_rows(f, {{0, 1, 0}})}};
  std::size_t total_rows = 0;
  for (std::size_t e = 0; e < c.edge_ids.size(); ++e) {
    EXPECT_EQ(c.edge_rows[e], expected.at(c.edge_ids[e])) << c.edge_ids[e];
    total_rows += c.edge_rows[e].rows();
  }
  EXPECT_EQ(total_rows, 7u);
  const SinkView& t1 = c.sink("t1");
  EXPECT_EQ(t1.received, FieldMatrix::from_rows(f, {{1, 1, 2}, {1, 0, 0}}));
  EXPECT_EQ(t1.k1_cols.size(), 1u);
  EXPECT_EQ(c.observer("bottleneck_and_feed").a, FieldMatrix::from_rows(f, {{1, 1}, {1, 0}}));
}

TEST(Compile, SplitBlocksReassembleTheUnsplitTransfer) {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    auto inst = testing::random_instance(seed, 3);
    CompiledCode c = compile(inst.spec, inst.code);
    for (const auto& s : c.sinks) {
      EXPECT_EQ(s.a1, s.received.select_columns(s.m1_cols));
      EXPECT_EQ(s.a2, s.received.select_columns(s.m2_cols));
      std::vector<std::size_t> k1, k2, w;
      for (auto k : s.k1_cols) k1.push_back(c.message_symbols + k);
      for (auto k : s.k2_cols) k2.push_back(c.message_symbols + k);
      for (auto k : s.w_cols) w.push_back(c.message_symbols + c.key_symbols + k);
      EXPECT_EQ(s.b1, s.received.select_columns(k1));
      EXPECT_EQ(s.b2, s.received.select_columns(k2));
      EXPECT_EQ(s.g, s.received.select_columns(w));
      EXPECT_EQ(s.a1.cols() + s.a2.cols() + s.side_message_cols.size(), c.message_symbols);
    }
  }
}

TEST(Compile, Errors) {
  NetworkSpec net = testing::fixture_network("otp");
  CodeSpec code = testing::fixture_code("otp");

  NetworkSpec cyclic = net;
  cyclic.edges.push_back({"back", "t", "s", 1});
  EXPECT_EQ(kind_of([&] { compile(cyclic, code); }), ErrorKind::kCyclicNetwork);
  EXPECT_NE(message_of([&] { compile(cyclic, code); }).find("acyclic schedule required"),
            std::string::npos);

  CodeSpec unknown = code;
  unknown.edges[0].edge = "e9";
  EXPECT_EQ(kind_of([&] { compile(net, unknown); }), ErrorKind::kInvalidCode);

  CodeSpec twice = code;
  twice.edges.push_back(code.edges[0]);
  EXPECT_EQ(kind_of([&] { compile(net, twice); }), ErrorKind::kInvalidCode);

  CodeSpec wide = code;
  wide.edges[0].slots.push_back(wide.edges[0].slots[0]);
  EXPECT_NE(message_of([&] { compile(net, wide); }).find("capacity 1"), std::string::npos);

  // Sink-side key is fine, but the message is not held at t.
  NetworkSpec relay = testing::fixture_network("ambiguous");
  CodeSpec bad = testing::fixture_code("ambiguous");
  bad.edges[2].slots[0].push_back({parse_source("msg:M1.0"), 1});
  std::string why = message_of([&] { compile(relay, bad); });
  EXPECT_NE(why.find("edge 'e3' slot 0"), std::string::npos) << why;
  EXPECT_NE(why.find("not held at 'r'"), std::string::npos) << why;

  CodeSpec not_incoming = testing::fixture_code("ambiguous");
  not_incoming.edges[0].slots[0].push_back({parse_source("edge:e2.0"), 1});
  EXPECT_NE(message_of([&] { compile(relay, not_incoming); }).find("edge 'e1'"), std::string::npos);

  CodeSpec range = code;
  range.edges[0].slots[0].push_back({parse_source("key:K.4"), 1});
  EXPECT_EQ(kind_of([&] { compile(net, range); }), ErrorKind::kInvalidCode);
}

TEST(Evaluate, OneTimePad) {
  CompiledCode c = fixture("otp");
  EXPECT_EQ(evaluate(c, {{1}, {1}, {}}, "wire"), Vector{0});
  EXPECT_EQ(evaluate(c, {{0}, {1}, {}}, "wire"), Vector{1});
  EXPECT_THROW(evaluate(c, {{2}, {1}, {}}, "wire"), Error);
  EXPECT_THROW(evaluate(c, {{1, 0}, {1}, {}}, "wire"), Error);
  EXPECT_THROW(evaluate(c, {{1}, {1}, {}}, "nobody"), Error);
}

// Matrix evaluation against the per-node simulator, edge by edge.
void expect_matches_simulator(const NetworkSpec& spec, const CodeSpec& code, std::uint64_t seed) {
  CompiledCode c = compile(spec, code);
  Rng rng(seed);
  const std::uint32_t p = spec.field.modulus();
  testing::Valuation x;
  MessageAssignment asg;
  for (const auto& m : spec.messages)
    for (std::size_t i = 0; i < m.length; ++i) {
      Symbol v = static_cast<Symbol>(uniform_below(rng, p));
      x.values[m.id].push_back(v);
      asg.messages.push_back(v);
    }
  for (const auto& k : spec.keys)
    for (std::size_t i = 0; i < k.length; ++i) {
      Symbol v = static_cast<Symbol>(uniform_below(rng, p));
      x.values[k.id].push_back(v);
      asg.keys.push_back(v);
    }
  for (const auto& w : spec.randomness)
    for (std::size_t i = 0; i < w.length; ++i) {
      Symbol v = static_cast<Symbol>(uniform_below(rng, p));
      x.values[w.id].push_back(v);
      asg.randomness.push_back(v);
    }
  auto edges = testing::Simulator(spec, code).run(x);
  Vector full = asg.messages;
  full.insert(full.end(), asg.keys.begin(), asg.keys.end());
  full.insert(full.end(), asg.randomness.begin(), asg.randomness.end());
  for (std::size_t e = 0; e < c.edge_ids.size(); ++e) {
    Vector got = c.edge_rows[e].apply(full);
    const auto& want = edges.at(c.edge_ids[e]);
    for (std::size_t s = 0; s < got.size(); ++s)
      ASSERT_EQ(static_cast<std::int64_t>(got[s]), want[s]) << c.edge_ids[e] << "." << s;
  }
  for (const auto& o : c.observers) {
    Vector got = evaluate(o, asg);
    Vector want;
    for (const auto& set : spec.eavesdroppers)
      if (set.name == o.name)
        for (const auto& id : set.edges) {
          std::size_t e = *spec.edge_index(id);
          for (std::size_t s = 0; s < c.edge_rows[e].rows(); ++s)
            want.push_back(static_cast<Symbol>(edges.at(id)[s]));
        }
    EXPECT_EQ(got, want) << o.name;
  }
  for (const auto& s : c.sinks) {
    Vector got = evaluate(s, asg);
    Vector want;
    for (const auto& e : spec.edges)
      if (e.to == s.sink) {
        std::size_t idx = *spec.edge_index(e.id);
        for (std::size_t k = 0; k < c.edge_rows[idx].rows(); ++k)
          want.push_back(static_cast<Symbol>(edges.at(e.id)[k]));
      }
    EXPECT_EQ(got, want) << s.sink;
  }
}

TEST(Evaluate, MatchesSimulatorOnFixtures) {
  for (const char* name : {"otp", "plaintext", "leaky", "ambiguous", "butterfly", "index-coding",
                           "leak2", "leak3"}) {
    SCOPED_TRACE(name);
    for (std::uint64_t seed = 0; seed < 5; ++seed)
      expect_matches_simulator(testing::fixture_network(name), testing::fixture_code(name), seed);
  }
}

TEST(Evaluate, MatchesSimulatorOnRandomInstances) {
  const std::uint32_t primes[] = {2, 3, 5};
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    auto inst = testing::random_instance(seed, primes[seed % 3]);
    SCOPED_TRACE(seed);
    expect_matches_simulator(inst.spec, inst.code, seed + 1000);
  }
}

TEST(Compile, Deterministic) {
  auto inst = testing::random_instance(7, 5);
  CompiledCode a = compile(inst.spec, inst.code);
  CompiledCode b = compile(inst.spec, inst.code);
  EXPECT_EQ(a.edge_rows, b.edge_rows);
  for (std::size_t i = 0; i < a.observers.size(); ++i) EXPECT_EQ(a.observers[i].a, b.observers[i].a);
}

TEST(RandomCode, CompilesAtFullCapacity) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto inst = testing::random_instance(seed, 5);
    CodeSpec code = random_code(inst.spec, seed);
    CompiledCode c = compile(inst.spec, code);
    for (std::size_t e = 0; e < inst.spec.edges.size(); ++e)
      EXPECT_EQ(c.edge_rows[e].rows(), inst.spec.edges[e].capacity);
    EXPECT_EQ(random_code(inst.spec, seed), code);
  }
}

}  // namespace
}  // namespace wiresec
