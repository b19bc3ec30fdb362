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

// Ground truth by exhaustive sweep over every (m, k, w) assignment.
//
// Nothing here uses rank arithmetic: distributions are tallied as exact
// counts over p^N equiprobable assignments, and probabilities stay rational
// until they are reported.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <thread>
#include <unordered_map>
#include <vector>

#include "json.hpp"
#include "wiresec/error.hpp"
#include "wiresec/galois.hpp"
#include "wiresec/lincode.hpp"
#include "wiresec/rational.hpp"
#include "wiresec/secanalyzer.hpp"

namespace wiresec {

inline constexpr std::uint64_t kDefaultBudget = std::uint64_t(1) << 24;

struct EnumerationOptions {
  std::uint64_t budget = kDefaultBudget;
  unsigned workers = 1;
};

// Exact joint law of (M, C). Message and observation tuples are encoded as
// base-p integers, first symbol most significant. Each entry's probability
// is count / total.
struct JointPmf {
  struct Entry {
    std::uint64_t message = 0;
    std::uint64_t observation = 0;
    std::uint64_t count = 0;

    friend bool operator==(const Entry&, const Entry&) = default;
  };

  std::uint32_t p = 2;
  std::size_t message_symbols = 0;
  std::size_t observation_symbols = 0;
  std::uint64_t total = 1;
  std::vector<Entry> support;  // sorted by (message, observation)

  Rational probability(const Entry& e) const {
    return Rational(static_cast<std::int64_t>(e.count), static_cast<std::int64_t>(total));
  }
  std::uint64_t message_alphabet() const {
    return static_cast<std::uint64_t>(checked_pow(p, message_symbols));
  }
};

namespace detail {

inline std::uint64_t state_count(std::uint32_t p, std::size_t symbols, std::uint64_t budget) {
  __int128 states = 1;
  for (std::size_t i = 0; i < symbols; ++i) {
    states *= p;
    if (states > static_cast<__int128>(budget)) {
      throw Error(ErrorKind::kBudgetExceeded,
                  "enumeration requires " + std::to_string(p) + "^" + std::to_string(symbols) +
                      " states, budget is " + std::to_string(budget));
    }
  }
  return static_cast<std::uint64_t>(states);
}

inline std::uint64_t encode(std::span<const Symbol> v, std::uint32_t p) {
  std::uint64_t code = 0;
  for (Symbol s : v) code = code * p + s;
  return code;
}

inline void require_encodable(std::uint32_t p, std::size_t symbols) {
  if (static_cast<double>(symbols) * std::log2(static_cast<double>(p)) >= 63.0) {
    throw Error(ErrorKind::kBudgetExceeded,
                "observation of " + std::to_string(symbols) + " symbols is too wide to index");
  }
}

// Walks every assignment of `digits` (base p, last digit fastest) and keeps
// out = M * digits up to date. Adding column j once per change of digit j is
// exact: an increment adds col_j, and a wrap p-1 -> 0 subtracts (p-1) col_j,
// which is the same thing mod p.
class IncrementalSweep {
 public:
  IncrementalSweep(const FieldMatrix& m, std::size_t first_digit, std::size_t digit_count)
      : m_(m), first_(first_digit), digits_(digit_count, 0), out_(m.rows(), 0) {}

  const Vector& digits() const { return digits_; }
  const Vector& value() const { return out_; }

  // Returns false after the last assignment (digits back to all-zero).
  bool next() {
    const Field& f = m_.field();
    const Symbol top = f.modulus() - 1;
    for (std::size_t i = digits_.size(); i-- > 0;) {
      std::size_t col = first_ + i;
      for (std::size_t r = 0; r < out_.size(); ++r) out_[r] = f.add(out_[r], m_(r, col));
      if (digits_[i] != top) {
        ++digits_[i];
        return true;
      }
      digits_[i] = 0;
    }
    return false;
  }

  // Sets the leading block of digits (not swept) and recomputes `out`.
  void reset_with_prefix(std::span<const Symbol> prefix) {
    const Field& f = m_.field();
    std::fill(digits_.begin(), digits_.end(), 0);
    std::fill(out_.begin(), out_.end(), 0);
    for (std::size_t j = 0; j < prefix.size(); ++j) {
      if (prefix[j] == 0) continue;
      for (std::size_t r = 0; r < out_.size(); ++r)
        out_[r] = f.add(out_[r], f.mul(prefix[j], m_(r, j)));
    }
  }

 private:
  const FieldMatrix& m_;
  std::size_t first_;
  Vector digits_;
  Vector out_;
};

inline Vector decode_digits(std::uint64_t code, std::uint32_t p, std::size_t length) {
  Vector v(length);
  for (std::size_t i = length; i-- > 0;) {
    v[i] = static_cast<Symbol>(code % p);
    code /= p;
  }
  return v;
}

template <typename Fn>
void parallel_for(std::uint64_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(std::min<std::uint64_t>(count, 256))));
  if (workers <= 1) {
    fn(std::uint64_t(0), count, 0u);
    return;
  }
  std::vector<std::jthread> pool;
  std::uint64_t chunk = (count + workers - 1) / workers;
  for (unsigned w = 0; w < workers; ++w) {
    std::uint64_t lo = w * chunk;
    std::uint64_t hi = std::min(count, lo + chunk);
    if (lo >= hi) break;
    pool.emplace_back([&fn, lo, hi, w] { fn(lo, hi, w); });
  }
}

}  // namespace detail

// Full sweep of (m, k, w) for one observer. Work is partitioned by message
// value; results are concatenated in message order, so the output does not
// depend on the worker count.
inline JointPmf enumerate_joint(const ObserverView& view, const EnumerationOptions& opts = {}) {
  const Field& f = view.a.field();
  const std::uint32_t p = f.modulus();
  const std::size_t lm = view.a.cols();
  const std::size_t inner = view.b.cols() + view.g.cols();
  const std::size_t k = view.a.rows();

  JointPmf pmf;
  pmf.p = p;
  pmf.message_symbols = lm;
  pmf.observation_symbols = k;
  pmf.total = detail::state_count(p, lm + inner, opts.budget);
  detail::require_encodable(p, k);

  const FieldMatrix abg = concat_columns({&view.a, &view.b, &view.g});
  const std::uint64_t messages = detail::state_count(p, lm, opts.budget);

  std::vector<std::vector<JointPmf::Entry>> parts(messages);
  detail::parallel_for(messages, opts.workers, [&](std::uint64_t lo, std::uint64_t hi, unsigned) {
    detail::IncrementalSweep sweep(abg, lm, inner);
    std::unordered_map<std::uint64_t, std::uint64_t> counts;
    for (std::uint64_t mi = lo; mi < hi; ++mi) {
      counts.clear();
      Vector m = detail::decode_digits(mi, p, lm);
      sweep.reset_with_prefix(m);
      do {
        ++counts[detail::encode(sweep.value(), p)];
      } while (sweep.next());
      auto& out = parts[mi];
      out.reserve(counts.size());
      for (const auto& [c, n] : counts) out.push_back({mi, c, n});
      std::sort(out.begin(), out.end(),
                [](const auto& a, const auto& b) { return a.observation < b.observation; });
    }
  });
  for (auto& part : parts) pmf.support.insert(pmf.support.end(), part.begin(), part.end());
  return pmf;
}

inline JointPmf enumerate_joint(const CompiledCode& code, std::string_view observer,
                                const EnumerationOptions& opts = {}) {
  return enumerate_joint(code.observer(observer), opts);
}

struct Marginals {
  std::unordered_map<std::uint64_t, std::uint64_t> message;
  std::unordered_map<std::uint64_t, std::uint64_t> observation;
};

inline Marginals marginals(const JointPmf& pmf) {
  Marginals m;
  for (const auto& e : pmf.support) {
    m.message[e.message] += e.count;
    m.observation[e.observation] += e.count;
  }
  return m;
}

// sum p(m,c) log2(p(m,c) / (p(m) p(c))), with 0 log 0 = 0.
inline double mutual_information(const JointPmf& pmf) {
  Marginals marg = marginals(pmf);
  const long double total = static_cast<long double>(pmf.total);
  long double sum = 0.0L;
  long double carry = 0.0L;
  // Kahan summation over the support, in support order.
  for (const auto& e : pmf.support) {
    long double cnt = static_cast<long double>(e.count);
    long double ratio = cnt * total /
                        (static_cast<long double>(marg.message.at(e.message)) *
                         static_cast<long double>(marg.observation.at(e.observation)));
    long double term = cnt / total * std::log2(ratio) - carry;
    long double next = sum + term;
    carry = (next - sum) - term;
    sum = next;
  }
  return static_cast<double>(sum);
}

// Exact test of p(m,c) = p(m) p(c) everywhere.
inline bool independent(const JointPmf& pmf) {
  Marginals marg = marginals(pmf);
  if (pmf.support.size() != marg.message.size() * marg.observation.size()) return false;
  for (const auto& e : pmf.support) {
    __int128 lhs = static_cast<__int128>(e.count) * pmf.total;
    __int128 rhs = static_cast<__int128>(marg.message.at(e.message)) *
                   marg.observation.at(e.observation);
    if (lhs != rhs) return false;
  }
  return true;
}

// 1/2 sum over the product support of |p(m,c) - p(m) p(c)|. Pairs outside the
// joint support contribute p(m) p(c) each; their total is one minus the
// product mass on the joint support.
inline Rational total_variation(const JointPmf& pmf) {
  Marginals marg = marginals(pmf);
  const __int128 t = pmf.total;
  __int128 abs_sum = 0;
  __int128 product_on_support = 0;
  for (const auto& e : pmf.support) {
    __int128 joint = static_cast<__int128>(e.count) * t;
    __int128 prod = static_cast<__int128>(marg.message.at(e.message)) *
                    marg.observation.at(e.observation);
    abs_sum += joint > prod ? joint - prod : prod - joint;
    product_on_support += prod;
  }
  return Rational::from_wide(abs_sum + (t * t - product_on_support), 2 * t * t);
}

inline double message_entropy(const JointPmf& pmf) {
  Marginals marg = marginals(pmf);
  long double h = 0.0L;
  for (const auto& [m, n] : marg.message) {
    long double q = static_cast<long double>(n) / static_cast<long double>(pmf.total);
    h -= q * std::log2(q);
  }
  return static_cast<double>(h);
}

// I(M;C) / H(M); zero when H(M) = 0.
inline double weak_secrecy_ratio(const JointPmf& pmf) {
  double h = message_entropy(pmf);
  return h > 0.0 ? mutual_information(pmf) / h : 0.0;
}

namespace detail {

// Residual map x -> z = y - B1 k1 - S x for the whole variable vector: the
// received rows with the sink's known columns zeroed.
inline FieldMatrix residual_matrix(const CompiledCode& code, const SinkView& view) {
  FieldMatrix z = view.received;
  std::vector<std::size_t> known;
  for (std::size_t c : view.k1_cols) known.push_back(code.message_symbols + c);
  for (std::size_t c : view.side_message_cols) known.push_back(c);
  for (std::size_t c : view.side_randomness_cols)
    known.push_back(code.message_symbols + code.key_symbols + c);
  for (std::size_t r = 0; r < z.rows(); ++r)
    for (std::size_t c : known) z.set(r, c, 0);
  return z;
}

inline std::uint64_t demanded_code(const SinkView& view, std::span<const Symbol> x,
                                   std::uint32_t p) {
  std::uint64_t code = 0;
  for (std::size_t c : view.m1_cols) code = code * p + x[c];
  return code;
}

struct PairHash {
  std::size_t operator()(const std::pair<std::uint64_t, std::uint64_t>& v) const noexcept {
    return std::hash<std::uint64_t>{}(v.first * 0x9e3779b97f4a7c15ULL ^ v.second);
  }
};

}  // namespace detail

// Law of (true demanded message, MAP decision) at one sink, by full sweep.
// Keys are base-p encodings of the demanded symbols.
struct ReconstructionPmf {
  std::uint32_t p = 2;
  std::size_t demanded_symbols = 0;
  std::uint64_t total = 1;
  std::vector<JointPmf::Entry> support;  // message = truth, observation = decision
};

inline ReconstructionPmf reconstruction_pmf(const CompiledCode& code, std::string_view sink,
                                            const EnumerationOptions& opts = {}) {
  const SinkView& view = code.sink(sink);
  const std::uint32_t p = code.field.modulus();
  const std::size_t n = code.message_symbols + code.key_symbols + code.randomness_symbols;
  ReconstructionPmf out;
  out.p = p;
  out.demanded_symbols = view.m1_cols.size();
  out.total = detail::state_count(p, n, opts.budget);
  detail::require_encodable(p, view.received.rows());

  const FieldMatrix zmat = detail::residual_matrix(code, view);
  const FieldMatrix basis = ambiguity_basis(view);
  std::unordered_map<std::uint64_t, std::uint64_t> decision;
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t, detail::PairHash>
      tally;
  detail::IncrementalSweep sweep(zmat, 0, n);
  do {
    const Vector& z = sweep.value();
    std::uint64_t key = detail::encode(z, p);
    auto it = decision.find(key);
    if (it == decision.end())
      it = decision.emplace(key, detail::encode(map_decode_residual(view, z, basis), p)).first;
    ++tally[{detail::demanded_code(view, sweep.digits(), p), it->second}];
  } while (sweep.next());
  for (const auto& [k, c] : tally) out.support.push_back({k.first, k.second, c});
  std::sort(out.support.begin(), out.support.end(), [](const auto& a, const auto& b) {
    return std::pair(a.message, a.observation) < std::pair(b.message, b.observation);
  });
  return out;
}

// Exact failure probability of map_decode at one sink.
inline Rational exhaustive_decoder_error(const CompiledCode& code, std::string_view sink,
                                         const EnumerationOptions& opts = {}) {
  ReconstructionPmf pmf = reconstruction_pmf(code, sink, opts);
  std::uint64_t wrong = 0;
  for (const auto& e : pmf.support)
    if (e.message != e.observation) wrong += e.count;
  return Rational(static_cast<std::int64_t>(wrong), static_cast<std::int64_t>(pmf.total));
}

// Bayes-optimal error 1 - sum_z max_m1 P(m1, z), tallied without any linear
// algebra. Independent check on both the decoder and the rank formula.
inline Rational bayes_error(const CompiledCode& code, std::string_view sink,
                            const EnumerationOptions& opts = {}) {
  const SinkView& view = code.sink(sink);
  const std::uint32_t p = code.field.modulus();
  const std::size_t n = code.message_symbols + code.key_symbols + code.randomness_symbols;
  const std::uint64_t total = detail::state_count(p, n, opts.budget);
  detail::require_encodable(p, view.received.rows());

  const FieldMatrix zmat = detail::residual_matrix(code, view);
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, std::uint64_t, detail::PairHash>
      tally;
  detail::IncrementalSweep sweep(zmat, 0, n);
  do {
    ++tally[{detail::encode(sweep.value(), p), detail::demanded_code(view, sweep.digits(), p)}];
  } while (sweep.next());
  std::unordered_map<std::uint64_t, std::uint64_t> best;
  for (const auto& [k, c] : tally) best[k.first] = std::max(best[k.first], c);
  std::uint64_t correct = 0;
  for (const auto& [z, c] : best) correct += c;
  return Rational(static_cast<std::int64_t>(total - correct), static_cast<std::int64_t>(total));
}

struct OracleReport {
  std::string observer;
  double mutual_information_bits = 0.0;
  Rational total_variation;
  double weak_secrecy_ratio = 0.0;
  bool independent = true;
  std::uint64_t states = 0;
};

inline OracleReport oracle_report(const ObserverView& view, const EnumerationOptions& opts = {}) {
  JointPmf pmf = enumerate_joint(view, opts);
  return {view.name, mutual_information(pmf), total_variation(pmf), weak_secrecy_ratio(pmf),
          independent(pmf), pmf.total};
}

inline void to_json(nlohmann::json& j, const OracleReport& r) {
  j = nlohmann::json{{"observer", r.observer},
                     {"mutual_information_bits", r.mutual_information_bits},
                     {"total_variation", r.total_variation},
                     {"weak_secrecy_ratio", r.weak_secrecy_ratio},
                     {"independent", r.independent},
                     {"states", r.states}};
}

}  // namespace wiresec
