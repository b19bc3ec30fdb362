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

#include "wiresec/secanalyzer.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <numbers>
#include <set>

#include "support/fixtures.hpp"
#include "support/reference.hpp"
#include "wiresec/oracle.hpp"

namespace wiresec {
namespace {

using testing::fixture;

ObserverView make_view(std::uint32_t p, std::initializer_list<std::initializer_list<std::int64_t>> a,
                       std::initializer_list<std::initializer_list<std::int64_t>> b, std::size_t k) {
  Field f(p);
  return {"v", FieldMatrix::from_rows(f, a),
          b.size() ? FieldMatrix::from_rows(f, b) : FieldMatrix(f, k, 0), FieldMatrix(f, k, 0)};
}

TEST(Leakage, OneTimePad) {
  LeakageReport r = leakage(fixture("otp").observer("wire"));
  EXPECT_EQ(r.leaked_symbols, 0u);
  EXPECT_EQ(r.leakage_bits, 0.0);
  EXPECT_TRUE(r.perfectly_secure);
  EXPECT_FALSE(r.distinguishing_z);
  EXPECT_EQ(r.tv_lower_bound, 0.0);
}

TEST(Leakage, Plaintext) {
  LeakageReport r = leakage(fixture("plaintext").observer("wire"));
  EXPECT_EQ(r.leakage_bits, 1.0);
  EXPECT_FALSE(r.perfectly_secure);
  ASSERT_TRUE(r.distinguishing_z);
  EXPECT_EQ(*r.distinguishing_z, Vector{1});
  EXPECT_EQ(r.tv_lower_bound, 0.5);
}

TEST(Leakage, TwoObservationsOneKey) {
  LeakageReport r = leakage(make_view(2, {{1}, {0}}, {{1}, {1}}, 2));
  EXPECT_EQ(r.leakage_bits, 1.0);
  ASSERT_TRUE(r.distinguishing_z);
  EXPECT_EQ(*r.distinguishing_z, (Vector{1, 1}));
  // Same instance from the fixture, checked against enumeration.
  CompiledCode c = fixture("leaky");
  EXPECT_EQ(leakage(c.observer("both")).leakage_bits, 1.0);
  EXPECT_NEAR(mutual_information(enumerate_joint(c, "both")), 1.0, 1e-12);
  EXPECT_TRUE(leakage(c.observer("first")).perfectly_secure);
}

TEST(Leakage, DistinguisherExtractsAUniformSymbolOfM) {
  const std::uint32_t primes[] = {2, 3, 5};
  int checked = 0;
  for (std::uint64_t seed = 0; seed < 150; ++seed) {
    auto inst = testing::random_instance(seed, primes[seed % 3], 6);
    CompiledCode c = compile(inst.spec, inst.code);
    for (const auto& o : c.observers) {
      LeakageReport r = leakage(o);
      EXPECT_EQ(r.perfectly_secure, r.leaked_symbols == 0);
      EXPECT_EQ(r.perfectly_secure, !r.distinguishing_z.has_value());
      EXPECT_EQ(!r.perfectly_secure, testing::brute_distinguisher_exists(o.a, o.b, o.g));
      if (!r.distinguishing_z) continue;
      ++checked;
      const Field& f = c.field;
      Vector za(o.a.cols(), 0);
      for (std::size_t j = 0; j < o.a.cols(); ++j)
        for (std::size_t i = 0; i < o.a.rows(); ++i)
          za[j] = f.add(za[j], f.mul((*r.distinguishing_z)[i], o.a(i, j)));
      EXPECT_FALSE(is_zero(za));
      Rng rng(seed);
      for (int t = 0; t < 10; ++t) {
        MessageAssignment x;
        for (std::size_t i = 0; i < c.message_symbols; ++i) x.messages.push_back(uniform_below(rng, f.modulus()));
        for (std::size_t i = 0; i < c.key_symbols; ++i) x.keys.push_back(uniform_below(rng, f.modulus()));
        for (std::size_t i = 0; i < c.randomness_symbols; ++i)
          x.randomness.push_back(uniform_below(rng, f.modulus()));
        EXPECT_EQ(dot(f, *r.distinguishing_z, evaluate(o, x)), dot(f, za, x.messages));
      }
    }
  }
  EXPECT_GT(checked, 20);
}

TEST(Decodability, KeyHeldBySink) {
  DecodabilityReport r = decodability(fixture("otp").sink("t"));
  EXPECT_EQ(r.ambiguity_dim, 0u);
  EXPECT_TRUE(r.zero_error);
  EXPECT_EQ(r.map_success_prob, Rational(1));
}

TEST(Decodability, SumOfTwoMessages) {
  DecodabilityReport r = decodability(fixture("ambiguous").sink("t"));
  EXPECT_EQ(r.ambiguity_dim, 1u);
  EXPECT_FALSE(r.zero_error);
  EXPECT_EQ(r.map_success_prob, Rational(1, 2));
}

TEST(Decodability, ButterflyAndIndexCodingAreZeroError) {
  for (const char* name : {"butterfly", "index-coding"}) {
    CompiledCode c = fixture(name);
    for (const auto& s : c.sinks) {
      EXPECT_TRUE(decodability(s).zero_error) << name << " " << s.sink;
      EXPECT_EQ(exhaustive_decoder_error(c, s.sink), Rational(0));
    }
  }
}

TEST(MapDecode, Examples) {
  const CompiledCode otp_code = fixture("otp");
  const CompiledCode amb_code = fixture("ambiguous");
  const SinkView& otp = otp_code.sink("t");
  EXPECT_EQ(map_decode(otp, Vector{1}, Vector{1}), Vector{0});
  EXPECT_EQ(map_decode(otp, Vector{0}, Vector{1}), Vector{1});
  const SinkView& amb = amb_code.sink("t");
  EXPECT_EQ(map_decode(amb, Vector{1}, Vector{}), Vector{0});
  EXPECT_EQ(map_decode(amb, Vector{0}, Vector{}), Vector{0});
  EXPECT_THROW(map_decode(otp, Vector{1, 0}, Vector{1}), Error);
}

TEST(MapDecode, UnreachableObservation) {
  // Two edges both carrying M: (1, 0) is never sent.
  NetworkSpec net = testing::fixture_network("leaky");
  CodeSpec code = parse_code(R"({"edges":[{"edge":"e1","slots":[[{"src":"msg:M.0","coef":1}]]},
                                         {"edge":"e2","slots":[[{"src":"msg:M.0","coef":1}]]}]})");
  CompiledCode c = compile(net, code);
  try {
    map_decode(c.sink("t"), Vector{1, 0}, Vector{});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::kUnreachableObservation);
  }
  EXPECT_EQ(compatible_count(c.sink("t"), Vector{1, 0}), 0u);
  EXPECT_EQ(compatible_count(c.sink("t"), Vector{1, 1}), 1u);
}

// Exhaustive check of the decoder on random instances: the decision is the
// lexicographically smallest compatible message, and the transmitted one on
// zero-error sinks.
TEST(MapDecode, LexicographicMinimumOfCompatibleSet) {
  for (std::uint64_t seed = 0; seed < 60; ++seed) {
    auto inst = testing::random_instance(seed, seed % 2 ? 3 : 2, 5);
    CompiledCode c = compile(inst.spec, inst.code);
    const std::uint32_t p = c.field.modulus();
    for (const auto& s : c.sinks) {
      const std::size_t n = c.message_symbols + c.key_symbols + c.randomness_symbols;
      const std::uint64_t states = static_cast<std::uint64_t>(checked_pow(p, n));
      const FieldMatrix basis = ambiguity_basis(s);
      const std::uint64_t expected_count = static_cast<std::uint64_t>(checked_pow(p, ambiguity_dimension(s)));
      std::map<Vector, std::set<Vector>> compatible;
      std::vector<std::pair<Vector, Vector>> residuals;
      for (std::uint64_t code = 0; code < states; ++code) {
        Vector full = detail::decode_digits(code, p, n);
        MessageAssignment x{Vector(full.begin(), full.begin() + c.message_symbols),
                            Vector(full.begin() + c.message_symbols, full.begin() + c.message_symbols + c.key_symbols),
                            Vector(full.begin() + c.message_symbols + c.key_symbols, full.end())};
        Vector k1;
        for (auto k : s.k1_cols) k1.push_back(x.keys[k]);
        Vector z = residual_observation(s, evaluate(s, x), k1, side_information(s, x));
        Vector m1;
        for (auto m : s.m1_cols) m1.push_back(x.messages[m]);
        compatible[z].insert(m1);
        residuals.emplace_back(z, m1);
      }
      for (const auto& [z, set] : compatible) {
        EXPECT_EQ(set.size(), expected_count);
        EXPECT_EQ(compatible_count(s, z), expected_count);
        EXPECT_EQ(map_decode_residual(s, z, basis), *set.begin());
      }
      if (ambiguity_dimension(s) == 0) {
        for (const auto& [z, m1] : residuals) EXPECT_EQ(map_decode_residual(s, z, basis), m1);
      }
    }
  }
}

TEST(Remark1Bounds, Examples) {
  MutualInformationBounds b = remark1_bounds(1.0, 8.0);
  EXPECT_NEAR(b.lower, std::numbers::log2e / 2, 1e-12);
  EXPECT_NEAR(b.lower, 0.7213475, 1e-7);
  EXPECT_NEAR(b.upper, 3.0, 1e-12);
  EXPECT_THROW(remark1_bounds(0.5, 4.0), Error);
  EXPECT_THROW(remark1_bounds(0.0, 8.0), Error);
  EXPECT_THROW(remark1_bounds(1.5, 8.0), Error);
}

TEST(Remark1Bounds, VanishWithTotalVariation) {
  double prev_lower = 1e9, prev_upper = 1e9;
  for (double e = 0.5; e > 1e-9; e /= 4) {
    MutualInformationBounds b = remark1_bounds(e, 16.0);
    EXPECT_LT(b.lower, prev_lower);
    EXPECT_LT(b.upper, prev_upper);
    prev_lower = b.lower;
    prev_upper = b.upper;
  }
  EXPECT_LT(prev_upper, 1e-7);
}

// Plaintext over GF(5): exact enumeration gives I = log2 5 and TV = 4/5.
// With TV taken as half the L1 sum the lower bound holds but the upper bound
// evaluates to 0.8 * log2(6.25) < log2 5.
TEST(Remark1Bounds, Gf5PlaintextMeasuredValues) {
  NetworkSpec net = testing::fixture_network("plaintext");
  net.field = Field(5);
  CompiledCode c = compile(net, testing::fixture_code("plaintext"));
  JointPmf pmf = enumerate_joint(c, "wire");
  const double eps1 = mutual_information(pmf);
  const Rational eps2 = total_variation(pmf);
  EXPECT_NEAR(eps1, std::log2(5.0), 1e-12);
  EXPECT_EQ(eps2, Rational(4, 5));
  MutualInformationBounds b = remark1_bounds(eps2.to_double(), 5.0);
  EXPECT_LE(b.lower, eps1);
  EXPECT_NEAR(b.upper, 0.8 * std::log2(6.25), 1e-12);
  EXPECT_GT(eps1, b.upper);
}

TEST(ReportJson, Fields) {
  nlohmann::json leak = leakage(fixture("plaintext").observer("wire"));
  EXPECT_EQ(leak["distinguishing_z"], nlohmann::json({1}));
  nlohmann::json secure = leakage(fixture("otp").observer("wire"));
  EXPECT_TRUE(secure["distinguishing_z"].is_null());
  nlohmann::json dec = decodability(fixture("ambiguous").sink("t"));
  EXPECT_EQ(dec["map_success_prob"]["den"], 2);
}

}  // namespace
}  // namespace wiresec
