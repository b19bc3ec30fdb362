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

// Random binning experiments at desk scale.
//
//  * General and affine-linear random binning of n i.i.d. source copies.
//  * Output statistics of random binning: exact total variation between the
//    joint law of (observation^n, bin indices) and observation^n times
//    uniform bins, averaged over independent binning draws.
//  * Slepian-Wolf recovery of a sequence from its bin index and noisy side
//    information (MAP within the bin).
//  * Channel simulation from a bin index with a capped randomness budget.
//  * The repetition-and-binning pipeline that turns a weakly secure base code
//    into a strongly secure one, with all three quantities measured per n.
//
// Sequences of n copies over a per-copy alphabet q are indexed in base q with
// copy 0 most significant, so numeric order is lexicographic order. For
// linear binning q = p^l and the index is also the base-p expansion of the
// n*l field symbols.
//
// Every trial draws its randomness from derive_seed(master, n, trial, slot),
// never from shared state, so reports are bit-identical for a given seed
// regardless of how many workers run the trials.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <unordered_map>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wiresec/error.hpp"
#include "wiresec/galois.hpp"
#include "wiresec/lincode.hpp"
#include "wiresec/oracle.hpp"
#include "wiresec/random.hpp"

namespace wiresec {

enum class BinningKind { kGeneral, kLinear };

inline std::string to_string(BinningKind k) { return k == BinningKind::kLinear ? "linear" : "general"; }

inline double binary_entropy(double x) {
  if (x < 0.0 || x > 1.0) throw Error(ErrorKind::kInvalidArgument, "binary entropy argument outside [0, 1]");
  if (x == 0.0 || x == 1.0) return 0.0;
  return -x * std::log2(x) - (1.0 - x) * std::log2(1.0 - x);
}

namespace detail {

inline std::uint64_t checked_upow(std::uint64_t base, std::size_t exp, std::uint64_t limit,
                                  const char* what) {
  __int128 acc = 1;
  for (std::size_t i = 0; i < exp; ++i) {
    acc *= base;
    if (acc > static_cast<__int128>(limit)) {
      throw Error(ErrorKind::kBudgetExceeded, std::string(what) + ": " + std::to_string(base) +
                                                  "^" + std::to_string(exp) + " exceeds " +
                                                  std::to_string(limit));
    }
  }
  return static_cast<std::uint64_t>(acc);
}

// Exponent l with p^l == q, if any.
inline std::optional<std::size_t> log_exact(std::uint64_t q, std::uint64_t p) {
  std::size_t l = 0;
  std::uint64_t acc = 1;
  while (acc < q) {
    acc *= p;
    ++l;
  }
  if (acc == q) return l;
  return std::nullopt;
}

inline std::uint64_t seed_for(std::uint64_t master, std::size_t n, std::size_t trial,
                              std::size_t slot) {
  return derive_seed(derive_seed(derive_seed(master, n), trial), slot);
}

// Runs fn(i) for i in [0, count) on up to `workers` threads; fn writes only
// to its own slot.
template <typename Fn>
void for_each_index(std::size_t count, unsigned workers, Fn&& fn) {
  workers = std::max(1u, std::min<unsigned>(workers, static_cast<unsigned>(count)));
  if (workers <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w)
    pool.emplace_back([&fn, w, workers, count] {
      for (std::size_t i = w; i < count; i += workers) fn(i);
    });
}

}  // namespace detail

struct BinningSpec {
  BinningKind kind = BinningKind::kGeneral;
  std::uint64_t alphabet = 2;  // per-copy source alphabet
  std::uint32_t p = 2;         // field for linear binning; alphabet must be a power of p
  std::size_t n = 1;
  double rate = 0.0;  // bits per copy
  std::optional<std::uint64_t> bins;  // explicit bin count, overrides rate
  std::uint64_t seed = kDefaultSeed;
};

// One realisation of a random binning of alphabet^n.
//
// General: every sequence gets an independent 64-bit uniform u and lands in
// bin floor(u * bins / 2^64). Exactly uniform for power-of-two bin counts,
// within bins / 2^64 otherwise. Two general binnings with the same seed and
// bin counts b1 | b2 are nested: the coarse bin is the fine bin divided by
// b2 / b1.
//
// Linear: bin = A x + V over GF(p) with A, V i.i.d. uniform.
class Binning {
 public:
  static Binning make(const BinningSpec& spec, std::uint64_t budget = kDefaultBudget) {
    if (spec.alphabet < 1) throw Error(ErrorKind::kInvalidArgument, "alphabet must be >= 1");
    if (spec.rate < 0.0) throw Error(ErrorKind::kInvalidArgument, "binning rate must be >= 0");
    Binning b;
    b.kind_ = spec.kind;
    b.alphabet_ = spec.alphabet;
    b.n_ = spec.n;
    b.sequences_ = detail::checked_upow(spec.alphabet, spec.n, budget, "sequence space");
    Rng rng(spec.seed);

    if (spec.kind == BinningKind::kGeneral) {
      if (spec.bins) {
        if (*spec.bins < 1) throw Error(ErrorKind::kInvalidArgument, "bin count must be >= 1");
        b.bins_ = *spec.bins;
      } else {
        double target = std::round(std::exp2(spec.rate * static_cast<double>(spec.n)));
        if (target > 0x1.0p62) throw Error(ErrorKind::kBudgetExceeded, "bin count exceeds 2^62");
        b.bins_ = std::max<std::uint64_t>(1, static_cast<std::uint64_t>(target));
      }
      b.table_.resize(b.sequences_);
      for (auto& bin : b.table_) {
        unsigned __int128 wide = static_cast<unsigned __int128>(rng()) * b.bins_;
        bin = static_cast<std::uint64_t>(wide >> 64);
      }
      return b;
    }

    Field field(spec.p);
    auto per_copy = detail::log_exact(spec.alphabet, spec.p);
    if (!per_copy) {
      throw Error(ErrorKind::kInvalidArgument, "linear binning needs an alphabet that is a power of p");
    }
    std::size_t rows = 0;
    if (spec.bins) {
      auto r = detail::log_exact(*spec.bins, spec.p);
      if (!r) {
        throw Error(ErrorKind::kInvalidArgument,
                    "linear binning needs a bin count that is a power of p, got " +
                        std::to_string(*spec.bins));
      }
      rows = *r;
    } else {
      rows = static_cast<std::size_t>(
          std::llround(spec.rate * static_cast<double>(spec.n) / field.log2_size()));
    }
    b.bins_ = detail::checked_upow(spec.p, rows, std::uint64_t(1) << 62, "bin count");
    b.symbols_ = *per_copy * spec.n;
    FieldMatrix a(field, rows, b.symbols_);
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < b.symbols_; ++c)
        a.set(r, c, static_cast<Symbol>(uniform_below(rng, spec.p)));
    Vector v(rows);
    for (auto& s : v) s = static_cast<Symbol>(uniform_below(rng, spec.p));
    b.matrix_ = std::move(a);
    b.offset_ = std::move(v);
    return b;
  }

  BinningKind kind() const noexcept { return kind_; }
  std::size_t n() const noexcept { return n_; }
  std::uint64_t alphabet() const noexcept { return alphabet_; }
  std::uint64_t sequence_count() const noexcept { return sequences_; }
  std::uint64_t bin_count() const noexcept { return bins_; }
  double realized_rate() const {
    return n_ == 0 ? 0.0 : std::log2(static_cast<double>(bins_)) / static_cast<double>(n_);
  }

  // Linear binning only.
  const FieldMatrix& matrix() const { return *matrix_; }
  const Vector& offset() const { return offset_; }
  std::size_t symbols() const noexcept { return symbols_; }

  std::uint64_t bin(std::uint64_t sequence) const {
    if (kind_ == BinningKind::kGeneral) return table_[sequence];
    const std::uint32_t p = matrix_->field().modulus();
    Vector x = detail::decode_digits(sequence, p, symbols_);
    Vector y = matrix_->apply(x);
    const Field& f = matrix_->field();
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = f.add(y[i], offset_[i]);
    return detail::encode(y, p);
  }

 private:
  BinningKind kind_ = BinningKind::kGeneral;
  std::uint64_t alphabet_ = 2;
  std::size_t n_ = 0;
  std::uint64_t sequences_ = 1;
  std::uint64_t bins_ = 1;
  std::vector<std::uint64_t> table_;
  std::optional<FieldMatrix> matrix_;
  Vector offset_;
  std::size_t symbols_ = 0;
};

inline Binning make_binning(const BinningSpec& spec, std::uint64_t budget = kDefaultBudget) {
  return Binning::make(spec, budget);
}

// Inverse of a binning: the members of each non-empty bin, ascending.
class BinIndex {
 public:
  explicit BinIndex(const Binning& binning) {
    entries_.reserve(binning.sequence_count());
    for (std::uint64_t s = 0; s < binning.sequence_count(); ++s)
      entries_.emplace_back(binning.bin(s), s);
    std::sort(entries_.begin(), entries_.end());
  }

  std::span<const std::pair<std::uint64_t, std::uint64_t>> bin(std::uint64_t b) const {
    auto lo = std::lower_bound(entries_.begin(), entries_.end(), std::pair<std::uint64_t, std::uint64_t>(b, 0));
    auto hi = lo;
    while (hi != entries_.end() && hi->first == b) ++hi;
    return {lo, hi};
  }

  std::vector<std::uint64_t> members(std::uint64_t b) const {
    std::vector<std::uint64_t> out;
    for (const auto& e : bin(b)) out.push_back(e.second);
    return out;
  }

  // Sizes of all non-empty bins, in bin order.
  std::vector<std::uint64_t> occupied_sizes() const {
    std::vector<std::uint64_t> sizes;
    for (std::size_t i = 0; i < entries_.size();) {
      std::size_t j = i;
      while (j < entries_.size() && entries_[j].first == entries_[i].first) ++j;
      sizes.push_back(j - i);
      i = j;
    }
    return sizes;
  }

 private:
  std::vector<std::pair<std::uint64_t, std::uint64_t>> entries_;
};

// ---------------------------------------------------------------------------
// Reports

struct ExperimentPoint {
  std::size_t n = 0;
  double mean = 0.0;
  double stderr_ = 0.0;
  std::size_t trials = 0;
};

struct DecayFit {
  double slope = 0.0;  // d log2(metric) / dn
  double intercept = 0.0;
  double residual = 0.0;  // RMS of the fit residuals
  std::size_t points = 0;
};

struct ExperimentReport {
  std::string metric;
  std::vector<ExperimentPoint> points;
  std::optional<DecayFit> fit;
  nlohmann::json details = nlohmann::json::object();
};

// Least squares of log2(mean) against n over the points with mean > 0.
inline std::optional<DecayFit> fit_decay(const std::vector<ExperimentPoint>& points) {
  std::vector<std::pair<double, double>> xy;
  for (const auto& p : points)
    if (p.mean > 0.0) xy.emplace_back(static_cast<double>(p.n), std::log2(p.mean));
  if (xy.size() < 2) return std::nullopt;
  double mx = 0.0, my = 0.0;
  for (auto [x, y] : xy) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(xy.size());
  my /= static_cast<double>(xy.size());
  double sxx = 0.0, sxy = 0.0;
  for (auto [x, y] : xy) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  if (sxx == 0.0) return std::nullopt;
  DecayFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (auto [x, y] : xy) {
    double r = y - (fit.intercept + fit.slope * x);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / static_cast<double>(xy.size()));
  fit.points = xy.size();
  return fit;
}

inline ExperimentPoint summarize(std::size_t n, const std::vector<double>& samples) {
  ExperimentPoint pt;
  pt.n = n;
  pt.trials = samples.size();
  if (samples.empty()) return pt;
  // Samples are summed in trial order so the result is independent of the
  // worker schedule.
  long double sum = 0.0L;
  for (double s : samples) sum += s;
  long double mean = sum / static_cast<long double>(samples.size());
  long double ss = 0.0L;
  for (double s : samples) ss += (s - mean) * (s - mean);
  pt.mean = static_cast<double>(mean);
  pt.stderr_ = samples.size() > 1
                   ? static_cast<double>(std::sqrt(ss / static_cast<long double>(samples.size() - 1)) /
                                         std::sqrt(static_cast<long double>(samples.size())))
                   : 0.0;
  return pt;
}

inline void to_json(nlohmann::json& j, const ExperimentPoint& p) {
  j = nlohmann::json{{"n", p.n}, {"mean", p.mean}, {"stderr", p.stderr_}, {"trials", p.trials}};
}

inline void to_json(nlohmann::json& j, const DecayFit& f) {
  j = nlohmann::json{
      {"slope", f.slope}, {"intercept", f.intercept}, {"residual", f.residual}, {"points", f.points}};
}

inline void to_json(nlohmann::json& j, const ExperimentReport& r) {
  j = nlohmann::json{{"metric", r.metric}, {"points", r.points}, {"fit", nullptr}, {"details", r.details}};
  if (r.fit) j["fit"] = *r.fit;
}

inline std::string to_csv(const ExperimentReport& r) {
  std::string out = "n,mean,stderr\n";
  char buf[96];
  for (const auto& p : r.points) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", p.n, p.mean, p.stderr_);
    out += buf;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Source models

// Per-copy joint law of (M_1, ..., M_t, C).
struct SourceModel {
  struct Outcome {
    std::vector<std::uint64_t> messages;
    std::uint64_t observation = 0;
    double probability = 0.0;
  };
  std::vector<std::uint64_t> alphabets;  // per message
  std::vector<Outcome> outcomes;

  // H(M_S | C) in bits for the messages selected by `subset` (bit i = message i).
  double conditional_entropy(std::uint64_t subset) const {
    std::unordered_map<std::uint64_t, double> pc;
    std::map<std::pair<std::uint64_t, std::vector<std::uint64_t>>, double> pmc;
    for (const auto& o : outcomes) {
      std::vector<std::uint64_t> key;
      for (std::size_t i = 0; i < alphabets.size(); ++i)
        if (subset >> i & 1) key.push_back(o.messages[i]);
      pc[o.observation] += o.probability;
      pmc[{o.observation, std::move(key)}] += o.probability;
    }
    double h = 0.0;
    for (const auto& [k, q] : pmc)
      if (q > 0.0) h -= q * std::log2(q / pc.at(k.first));
    return h;
  }
};

// Single message uniform over `alphabet`, nothing observed.
inline SourceModel uniform_source(std::uint64_t alphabet) {
  SourceModel s;
  s.alphabets = {alphabet};
  for (std::uint64_t m = 0; m < alphabet; ++m)
    s.outcomes.push_back({{m}, 0, 1.0 / static_cast<double>(alphabet)});
  return s;
}

// Splits the base-p message code of a joint pmf into per-message indices.
inline SourceModel source_from_joint(const JointPmf& pmf, std::span<const std::size_t> lengths) {
  std::size_t total = 0;
  for (auto l : lengths) total += l;
  if (total != pmf.message_symbols) {
    throw Error(ErrorKind::kInvalidArgument, "message lengths do not match the joint pmf");
  }
  SourceModel s;
  for (auto l : lengths) s.alphabets.push_back(static_cast<std::uint64_t>(checked_pow(pmf.p, l)));
  for (const auto& e : pmf.support) {
    Vector digits = detail::decode_digits(e.message, pmf.p, pmf.message_symbols);
    SourceModel::Outcome o;
    std::size_t at = 0;
    for (auto l : lengths) {
      o.messages.push_back(detail::encode(std::span<const Symbol>(digits).subspan(at, l), pmf.p));
      at += l;
    }
    o.observation = e.observation;
    o.probability = static_cast<double>(e.count) / static_cast<double>(pmf.total);
    s.outcomes.push_back(std::move(o));
  }
  return s;
}

// ---------------------------------------------------------------------------
// Output statistics of random binning

struct BinningPlan {
  std::size_t message = 0;
  double rate = 0.0;
};

// Exact ||P(c^n, bins) - p(c^n) prod_i Unif(bins_i)|| for one fixed set of
// binnings, by enumerating every n-tuple of per-copy outcomes.
inline double osrb_tv_exact(const SourceModel& source, std::span<const std::size_t> binned_message,
                            std::span<const Binning> binnings, std::size_t n,
                            std::uint64_t budget = kDefaultBudget) {
  const std::size_t support = source.outcomes.size();
  const std::uint64_t tuples = detail::checked_upow(support, n, budget, "n-fold support");

  std::unordered_map<std::uint64_t, std::uint64_t> obs_id;
  for (const auto& o : source.outcomes) obs_id.emplace(o.observation, obs_id.size());
  const std::uint64_t obs_count = obs_id.size();
  detail::checked_upow(obs_count, n, std::numeric_limits<std::uint64_t>::max() / 2, "observation space");

  long double product_bins = 1.0L;
  std::uint64_t radix_check = 1;
  for (const auto& b : binnings) {
    product_bins *= static_cast<long double>(b.bin_count());
    if (b.bin_count() > 1 &&
        radix_check > std::numeric_limits<std::uint64_t>::max() / b.bin_count()) {
      throw Error(ErrorKind::kBudgetExceeded, "joint bin index space exceeds 64 bits");
    }
    radix_check *= b.bin_count();
  }

  std::vector<std::uint64_t> digits(n, 0);
  std::unordered_map<std::pair<std::uint64_t, std::uint64_t>, long double, detail::PairHash> joint;
  std::unordered_map<std::uint64_t, long double> pc;
  std::unordered_map<std::uint64_t, std::uint64_t> hits;
  joint.reserve(static_cast<std::size_t>(std::min<std::uint64_t>(tuples, 1u << 22)));
  std::vector<std::uint64_t> seq(source.alphabets.size());

  for (std::uint64_t t = 0; t < tuples; ++t) {
    long double prob = 1.0L;
    std::uint64_t c = 0;
    std::fill(seq.begin(), seq.end(), 0);
    for (std::size_t j = 0; j < n; ++j) {
      const auto& o = source.outcomes[digits[j]];
      prob *= o.probability;
      c = c * obs_count + obs_id[o.observation];
      for (std::size_t i = 0; i < seq.size(); ++i) seq[i] = seq[i] * source.alphabets[i] + o.messages[i];
    }
    std::uint64_t bins = 0;
    for (std::size_t b = 0; b < binnings.size(); ++b)
      bins = bins * binnings[b].bin_count() + binnings[b].bin(seq[binned_message[b]]);
    auto [it, fresh] = joint.try_emplace({c, bins}, 0.0L);
    it->second += prob;
    if (fresh) ++hits[c];
    pc[c] += prob;

    for (std::size_t j = n; j-- > 0;) {
      if (++digits[j] < support) break;
      digits[j] = 0;
    }
  }

  long double tv = 0.0L;
  for (const auto& [key, q] : joint) {
    long double ref = pc.at(key.first) / product_bins;
    tv += std::fabs(q - ref);
  }
  for (const auto& [c, q] : pc)
    tv += q * (product_bins - static_cast<long double>(hits.at(c))) / product_bins;
  return static_cast<double>(std::clamp(tv / 2.0L, 0.0L, 1.0L));
}

struct OsrbExperiment {
  SourceModel source;
  std::vector<BinningPlan> binnings;
  BinningKind kind = BinningKind::kGeneral;
  std::uint32_t p = 2;
  std::vector<std::size_t> blocklengths;
  std::size_t trials = 64;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t budget = kDefaultBudget;
  unsigned workers = 1;
};

inline ExperimentReport osrb_tv(const OsrbExperiment& ex) {
  if (ex.trials < 1) throw Error(ErrorKind::kInvalidArgument, "trials must be >= 1");
  for (const auto& plan : ex.binnings) {
    if (plan.message >= ex.source.alphabets.size())
      throw Error(ErrorKind::kInvalidArgument, "binning refers to an unknown message");
    if (plan.rate < 0.0) throw Error(ErrorKind::kInvalidArgument, "binning rates must be >= 0");
  }

  ExperimentReport report;
  report.metric = "osrb_total_variation";

  // OSRB rate condition: sum of rates over S below H(M_S | C) for every S.
  const std::size_t t = ex.source.alphabets.size();
  double worst_slack = std::numeric_limits<double>::infinity();
  if (t < 20) {
    for (std::uint64_t s = 1; s < (std::uint64_t(1) << t); ++s) {
      double rate = 0.0;
      for (const auto& plan : ex.binnings)
        if (s >> plan.message & 1) rate += plan.rate;
      worst_slack = std::min(worst_slack, ex.source.conditional_entropy(s) - rate);
    }
  }
  report.details["rate_condition_slack"] = worst_slack;
  report.details["rate_condition_holds"] = worst_slack > 0.0;
  report.details["kind"] = to_string(ex.kind);

  std::vector<std::size_t> binned;
  for (const auto& plan : ex.binnings) binned.push_back(plan.message);

  nlohmann::json realized = nlohmann::json::array();
  for (std::size_t n : ex.blocklengths) {
    std::vector<double> tv(ex.trials, 0.0);
    std::vector<double> rates(ex.binnings.size(), 0.0);
    detail::for_each_index(ex.trials, ex.workers, [&](std::size_t trial) {
      std::vector<Binning> bs;
      for (std::size_t b = 0; b < ex.binnings.size(); ++b) {
        BinningSpec spec;
        spec.kind = ex.kind;
        spec.alphabet = ex.source.alphabets[ex.binnings[b].message];
        spec.p = ex.p;
        spec.n = n;
        spec.rate = ex.binnings[b].rate;
        spec.seed = detail::seed_for(ex.seed, n, trial, b);
        bs.push_back(make_binning(spec, ex.budget));
      }
      tv[trial] = osrb_tv_exact(ex.source, binned, bs, n, ex.budget);
      if (trial == 0)
        for (std::size_t b = 0; b < bs.size(); ++b) rates[b] = bs[b].realized_rate();
    });
    report.points.push_back(summarize(n, tv));
    realized.push_back({{"n", n}, {"rates", rates}});
  }
  report.details["realized_rates"] = realized;
  report.fit = fit_decay(report.points);
  return report;
}

// ---------------------------------------------------------------------------
// Slepian-Wolf decoding from a bin index

// Per-copy joint law of (source symbol, side-information symbol), row-major
// alphabet x side_alphabet.
struct SideChannel {
  std::uint64_t alphabet = 2;
  std::uint64_t side_alphabet = 2;
  std::vector<double> joint;

  double at(std::uint64_t m, std::uint64_t s) const { return joint[m * side_alphabet + s]; }
};

// Uniform binary source seen through a binary symmetric channel.
inline SideChannel binary_symmetric(double crossover) {
  if (crossover < 0.0 || crossover > 1.0)
    throw Error(ErrorKind::kInvalidArgument, "crossover probability outside [0, 1]");
  return {2, 2, {0.5 * (1 - crossover), 0.5 * crossover, 0.5 * crossover, 0.5 * (1 - crossover)}};
}

// MAP within bin f: the member maximising prod_j p(m_j, side_j), smallest
// index on ties. nullopt for an empty bin.
inline std::optional<std::uint64_t> slepian_wolf_decode(const BinIndex& index, std::uint64_t f,
                                                        std::span<const std::uint64_t> side_info,
                                                        const SideChannel& channel) {
  const std::size_t n = side_info.size();
  std::vector<double> log_table(channel.joint.size());
  for (std::size_t i = 0; i < log_table.size(); ++i)
    log_table[i] = channel.joint[i] > 0.0 ? std::log2(channel.joint[i])
                                          : -std::numeric_limits<double>::infinity();
  std::optional<std::uint64_t> best;
  double best_score = -std::numeric_limits<double>::infinity();
  constexpr double kTieTolerance = 1e-9;
  for (const auto& [bin, seq] : index.bin(f)) {
    double score = 0.0;
    std::uint64_t rest = seq;
    for (std::size_t j = n; j-- > 0;) {
      std::uint64_t m = rest % channel.alphabet;
      rest /= channel.alphabet;
      score += log_table[m * channel.side_alphabet + side_info[j]];
    }
    if (!best || score > best_score + kTieTolerance) {
      best = seq;
      best_score = score;
    }
  }
  return best;
}

struct SlepianWolfExperiment {
  SideChannel channel;
  double rate = 0.0;
  BinningKind kind = BinningKind::kGeneral;
  std::uint32_t p = 2;
  std::vector<std::size_t> blocklengths;
  std::size_t trials = 64;
  std::size_t samples = 256;  // (sequence, side info) draws per binning
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t budget = kDefaultBudget;
  unsigned workers = 1;
};

namespace detail {

// Inverse-CDF draw from a discrete law.
inline std::size_t draw(Rng& rng, std::span<const double> cdf) {
  double u = uniform_unit(rng) * cdf.back();
  auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
  return std::min<std::size_t>(static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
}

inline std::vector<double> cumulative(std::span<const double> w) {
  std::vector<double> cdf(w.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) cdf[i] = acc += w[i];
  return cdf;
}

}  // namespace detail

// Monte-Carlo block error of slepian_wolf_decode: each trial draws one binning
// and `samples` i.i.d. (sequence, side info) pairs.
inline ExperimentReport slepian_wolf_error(const SlepianWolfExperiment& ex) {
  if (ex.trials < 1 || ex.samples < 1)
    throw Error(ErrorKind::kInvalidArgument, "trials and samples must be >= 1");
  ExperimentReport report;
  report.metric = "slepian_wolf_error";
  report.details["rate"] = ex.rate;
  report.details["kind"] = to_string(ex.kind);
  report.details["samples_per_trial"] = ex.samples;
  const std::vector<double> cdf = detail::cumulative(ex.channel.joint);

  for (std::size_t n : ex.blocklengths) {
    std::vector<double> err(ex.trials, 0.0);
    detail::for_each_index(ex.trials, ex.workers, [&](std::size_t trial) {
      BinningSpec spec;
      spec.kind = ex.kind;
      spec.alphabet = ex.channel.alphabet;
      spec.p = ex.p;
      spec.n = n;
      spec.rate = ex.rate;
      spec.seed = detail::seed_for(ex.seed, n, trial, 0);
      Binning binning = make_binning(spec, ex.budget);
      BinIndex index(binning);
      Rng rng(detail::seed_for(ex.seed, n, trial, 1));
      std::vector<std::uint64_t> side(n);
      std::size_t wrong = 0;
      for (std::size_t s = 0; s < ex.samples; ++s) {
        std::uint64_t seq = 0;
        for (std::size_t j = 0; j < n; ++j) {
          std::size_t cell = detail::draw(rng, cdf);
          seq = seq * ex.channel.alphabet + cell / ex.channel.side_alphabet;
          side[j] = cell % ex.channel.side_alphabet;
        }
        auto decoded = slepian_wolf_decode(index, binning.bin(seq), side, ex.channel);
        if (!decoded || *decoded != seq) ++wrong;
      }
      err[trial] = static_cast<double>(wrong) / static_cast<double>(ex.samples);
    });
    report.points.push_back(summarize(n, err));
  }
  report.fit = fit_decay(report.points);
  return report;
}

// ---------------------------------------------------------------------------
// Channel simulation from a bin index

// Randomness budget in whole units: floor(2^(n R)) sequences for general
// binning, floor(n R / log2 p) field symbols for linear binning.
inline std::uint64_t randomness_support(std::size_t n, double rate) {
  double bits = static_cast<double>(n) * rate;
  if (bits >= 62.0) return std::uint64_t(1) << 62;
  return static_cast<std::uint64_t>(std::floor(std::exp2(bits) + 1e-9));
}

inline std::size_t randomness_symbols(std::size_t n, double rate, std::uint32_t p) {
  return static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * rate / std::log2(static_cast<double>(p)) + 1e-9));
}

struct LinearSimulationShape {
  std::size_t null_dim = 0;
  std::size_t randomness_symbols = 0;
  bool rank_deficient = false;  // rank(A) < rows
  bool deficient = false;       // null_dim > randomness_symbols
};

inline LinearSimulationShape linear_shape(const Binning& binning, double randomness_rate) {
  const FieldMatrix& a = binning.matrix();
  std::size_t r = rank(a);
  LinearSimulationShape s;
  s.null_dim = a.cols() - r;
  s.randomness_symbols = randomness_symbols(binning.n(), randomness_rate, a.field().modulus());
  s.rank_deficient = r < a.rows();
  s.deficient = s.null_dim > s.randomness_symbols;
  return s;
}

// Draws a source sequence for bin b with randomness of rate `randomness_rate`
// bits per copy, assuming a uniform source. General: uniform over the first
// min(|bin|, 2^(n R)) members. Linear: Q(b - V) + N T with T uniform over as
// many null-space coordinates as the budget covers. nullopt for an empty bin.
inline std::optional<std::uint64_t> simulate_from_bin(const Binning& binning, const BinIndex& index,
                                                      std::uint64_t b, double randomness_rate,
                                                      Rng& rng) {
  if (binning.kind() == BinningKind::kGeneral) {
    auto members = index.bin(b);
    if (members.empty()) return std::nullopt;
    std::uint64_t usable = std::min<std::uint64_t>(
        members.size(), randomness_support(binning.n(), randomness_rate));
    return members[uniform_below(rng, usable)].second;
  }
  const FieldMatrix& a = binning.matrix();
  const Field& f = a.field();
  const std::uint32_t p = f.modulus();
  Vector target = detail::decode_digits(b, p, a.rows());
  for (std::size_t i = 0; i < target.size(); ++i) target[i] = f.sub(target[i], binning.offset()[i]);
  auto x = solve(a, target);
  if (!x) return std::nullopt;
  FieldMatrix kernel = null_space_basis(a);
  std::size_t used = std::min(kernel.cols(), randomness_symbols(binning.n(), randomness_rate, p));
  for (std::size_t j = 0; j < used; ++j) {
    Symbol t = static_cast<Symbol>(uniform_below(rng, p));
    if (t == 0) continue;
    for (std::size_t i = 0; i < x->size(); ++i) (*x)[i] = f.add((*x)[i], f.mul(t, kernel(i, j)));
  }
  return detail::encode(*x, p);
}

// Exact ||p_B p_{X|B} - p_B p~_{X|B}|| for a uniform source under this
// binning and the sampler above.
inline double simulation_tv(const Binning& binning, const BinIndex& index, double randomness_rate) {
  if (binning.kind() == BinningKind::kLinear) {
    LinearSimulationShape s = linear_shape(binning, randomness_rate);
    if (!s.deficient) return 0.0;
    return 1.0 - std::pow(static_cast<double>(binning.matrix().field().modulus()),
                          -static_cast<double>(s.null_dim - s.randomness_symbols));
  }
  const std::uint64_t cap = randomness_support(binning.n(), randomness_rate);
  std::uint64_t excess = 0;
  for (std::uint64_t size : index.occupied_sizes())
    if (size > cap) excess += size - cap;
  return static_cast<double>(excess) / static_cast<double>(binning.sequence_count());
}

struct ChannelSimulationExperiment {
  BinningKind kind = BinningKind::kGeneral;
  std::uint64_t alphabet = 2;
  std::uint32_t p = 2;
  double rate = 0.5;   // binning rate R
  double delta = 0.25;  // randomness rate is log2|X| - R + delta
  std::vector<std::size_t> blocklengths;
  std::size_t trials = 64;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t budget = kDefaultBudget;
  unsigned workers = 1;
};

// Mean exact simulation TV per n. For linear binning the details also carry
// the frequency of budget deficiency and of rank-deficient A next to the
// bound p^-(cols - rows) / (p - 1).
inline ExperimentReport channel_simulation(const ChannelSimulationExperiment& ex) {
  if (ex.trials < 1) throw Error(ErrorKind::kInvalidArgument, "trials must be >= 1");
  const double randomness_rate = std::log2(static_cast<double>(ex.alphabet)) - ex.rate + ex.delta;
  ExperimentReport report;
  report.metric = "channel_simulation_tv";
  report.details["kind"] = to_string(ex.kind);
  report.details["randomness_rate"] = randomness_rate;
  nlohmann::json per_n = nlohmann::json::array();

  for (std::size_t n : ex.blocklengths) {
    std::vector<double> tv(ex.trials, 0.0);
    std::vector<double> deficient(ex.trials, 0.0);
    std::vector<double> rank_deficient(ex.trials, 0.0);
    std::size_t rows = 0, cols = 0;
    detail::for_each_index(ex.trials, ex.workers, [&](std::size_t trial) {
      BinningSpec spec;
      spec.kind = ex.kind;
      spec.alphabet = ex.alphabet;
      spec.p = ex.p;
      spec.n = n;
      spec.rate = ex.rate;
      spec.seed = detail::seed_for(ex.seed, n, trial, 0);
      Binning binning = make_binning(spec, ex.budget);
      if (ex.kind == BinningKind::kLinear) {
        LinearSimulationShape s = linear_shape(binning, randomness_rate);
        deficient[trial] = s.deficient ? 1.0 : 0.0;
        rank_deficient[trial] = s.rank_deficient ? 1.0 : 0.0;
        tv[trial] = s.deficient ? 1.0 - std::pow(static_cast<double>(ex.p),
                                                 -static_cast<double>(s.null_dim - s.randomness_symbols))
                                : 0.0;
        if (trial == 0) {
          rows = binning.matrix().rows();
          cols = binning.matrix().cols();
        }
      } else {
        tv[trial] = simulation_tv(binning, BinIndex(binning), randomness_rate);
      }
    });
    report.points.push_back(summarize(n, tv));
    nlohmann::json entry = {{"n", n}, {"markov_bound", std::exp2(-static_cast<double>(n) * ex.delta)}};
    if (ex.kind == BinningKind::kLinear) {
      ExperimentPoint d = summarize(n, deficient);
      ExperimentPoint r = summarize(n, rank_deficient);
      entry["deficiency_frequency"] = d.mean;
      entry["deficiency_stderr"] = d.stderr_;
      entry["rank_deficiency_frequency"] = r.mean;
      entry["rank_deficiency_stderr"] = r.stderr_;
      entry["rank_bound"] = std::pow(static_cast<double>(ex.p), -static_cast<double>(cols - rows)) /
                            static_cast<double>(ex.p - 1);
      entry["rows"] = rows;
      entry["cols"] = cols;
    }
    per_n.push_back(std::move(entry));
  }
  report.details["per_n"] = per_n;
  report.fit = fit_decay(report.points);
  return report;
}

// ---------------------------------------------------------------------------
// Linear binning axioms

struct AxiomFrequencies {
  double uniformity = 0.0;  // P(A x1 + V = b1)
  double uniformity_stderr = 0.0;
  double pairwise = 0.0;  // P(A x1 + V = b1, A x2 + V = b2)
  double pairwise_stderr = 0.0;
  double expected_uniformity = 0.0;
  double expected_pairwise = 0.0;
  std::size_t seeds = 0;
};

// Empirical uniformity and pairwise independence of affine linear binning
// over `seeds` independent draws, at fixed sequences x1 != x2 and bins b1, b2.
inline AxiomFrequencies linear_binning_axioms(std::uint32_t p, std::size_t n, std::size_t rows,
                                              std::uint64_t x1, std::uint64_t x2, std::uint64_t b1,
                                              std::uint64_t b2, std::size_t seeds,
                                              std::uint64_t master = kDefaultSeed) {
  if (x1 == x2) throw Error(ErrorKind::kInvalidArgument, "pairwise check needs distinct sequences");
  std::size_t hit1 = 0, hit2 = 0;
  const std::uint64_t bins = detail::checked_upow(p, rows, std::uint64_t(1) << 62, "bin count");
  for (std::size_t s = 0; s < seeds; ++s) {
    BinningSpec spec;
    spec.kind = BinningKind::kLinear;
    spec.alphabet = p;
    spec.p = p;
    spec.n = n;
    spec.bins = bins;
    spec.seed = derive_seed(master, s);
    Binning b = make_binning(spec);
    bool first = b.bin(x1) == b1;
    hit1 += first;
    hit2 += first && b.bin(x2) == b2;
  }
  AxiomFrequencies out;
  out.seeds = seeds;
  const double k = static_cast<double>(seeds);
  out.expected_uniformity = 1.0 / static_cast<double>(bins);
  out.expected_pairwise = out.expected_uniformity * out.expected_uniformity;
  out.uniformity = static_cast<double>(hit1) / k;
  out.pairwise = static_cast<double>(hit2) / k;
  out.uniformity_stderr = std::sqrt(out.expected_uniformity * (1 - out.expected_uniformity) / k);
  out.pairwise_stderr = std::sqrt(out.expected_pairwise * (1 - out.expected_pairwise) / k);
  return out;
}

// ---------------------------------------------------------------------------
// Weak to strong secrecy pipeline

struct TransformParams {
  double eps_a = 0.0;  // I(M;C) / H(M) of the base code
  double eps_b = 0.0;  // base error probability
  double message_entropy = 0.0;
  std::vector<double> message_bits;  // R_i = log2 |M_i|
  std::vector<double> delta_i;       // h(eps_b) + eps_b R_i
  double delta = 0.0;
  std::vector<double> rate_tilde;  // R_i - 2 eps_a H(M) - 2 delta
  std::vector<double> rate_f;      // 2 delta
  std::vector<double> rate_g;      // 2 eps_a H(M) + 3 delta

  bool positive() const {
    return std::all_of(rate_tilde.begin(), rate_tilde.end(), [](double r) { return r > 0.0; });
  }
};

inline TransformParams transform_params(double eps_a, double eps_b, double message_entropy,
                                        std::vector<double> message_bits) {
  TransformParams t;
  t.eps_a = eps_a;
  t.eps_b = eps_b;
  t.message_entropy = message_entropy;
  t.message_bits = std::move(message_bits);
  const double h = binary_entropy(eps_b);
  for (double r : t.message_bits) {
    t.delta_i.push_back(h + eps_b * r);
    t.delta = std::max(t.delta, t.delta_i.back());
  }
  for (double r : t.message_bits) {
    t.rate_tilde.push_back(r - 2.0 * eps_a * message_entropy - 2.0 * t.delta);
    t.rate_f.push_back(2.0 * t.delta);
    t.rate_g.push_back(2.0 * eps_a * message_entropy + 3.0 * t.delta);
  }
  return t;
}

inline void to_json(nlohmann::json& j, const TransformParams& t) {
  j = nlohmann::json{{"eps_a", t.eps_a},
                     {"eps_b", t.eps_b},
                     {"message_entropy", t.message_entropy},
                     {"message_bits", t.message_bits},
                     {"delta_i", t.delta_i},
                     {"delta", t.delta},
                     {"rate_tilde", t.rate_tilde},
                     {"rate_f", t.rate_f},
                     {"rate_g", t.rate_g}};
}

struct WeakToStrongOptions {
  std::string observer;
  std::string sink;
  std::vector<std::size_t> blocklengths;
  std::size_t trials = 64;
  std::size_t samples = 256;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t budget = kDefaultBudget;
  unsigned workers = 1;
};

struct WeakToStrongReport {
  TransformParams params;
  ExperimentReport joint_tv;       // ||P(M~, F, C^n) - U U p(C^n)||
  ExperimentReport sw_error;       // recovery of M_i^n from (F_i, reconstructions)
  ExperimentReport simulation_tv;  // simulation of p(M_i^n | M~_i) at rate R_G
};

// Repeats the base code n times, bins each message sequence into (M~_i, F_i)
// at rates (R~_i, R_F_i) and measures the three quantities the construction
// relies on. Trials share binnings across the three measurements.
inline WeakToStrongReport weak_to_strong_demo(const CompiledCode& base,
                                              const WeakToStrongOptions& opt) {
  EnumerationOptions enum_opts{opt.budget, 1};
  JointPmf pmf = enumerate_joint(base, opt.observer, enum_opts);
  const SinkView& sink = base.sink(opt.sink);
  ReconstructionPmf recon = reconstruction_pmf(base, opt.sink, enum_opts);

  std::uint64_t wrong = 0;
  for (const auto& e : recon.support)
    if (e.message != e.observation) wrong += e.count;
  const double eps_b = static_cast<double>(wrong) / static_cast<double>(recon.total);

  std::vector<double> bits;
  for (std::size_t len : base.message_lengths)
    bits.push_back(static_cast<double>(len) * base.field.log2_size());

  WeakToStrongReport report;
  report.params = transform_params(weak_secrecy_ratio(pmf), eps_b, message_entropy(pmf), bits);
  if (!report.params.positive()) {
    throw Error(ErrorKind::kRefused,
                "base code too leaky/noisy for positive rate at these parameters");
  }

  const SourceModel source = source_from_joint(pmf, base.message_lengths);
  const std::size_t t = base.message_ids.size();
  const std::uint32_t p = base.field.modulus();

  // Demanded messages of the sink and their positions inside its m1 block.
  struct Demanded {
    std::size_t message;
    std::size_t offset;
    std::size_t length;
  };
  std::vector<Demanded> demanded;
  {
    std::size_t offset = 0;
    for (const auto& id : sink.demanded) {
      std::size_t i = static_cast<std::size_t>(
          std::find(base.message_ids.begin(), base.message_ids.end(), id) -
          base.message_ids.begin());
      demanded.push_back({i, offset, base.message_lengths[i]});
      offset += base.message_lengths[i];
    }
  }
  // Per-copy law of (truth, decision) over the whole demanded block.
  std::vector<double> recon_weights;
  for (const auto& e : recon.support)
    recon_weights.push_back(static_cast<double>(e.count) / static_cast<double>(recon.total));
  const std::vector<double> recon_cdf = detail::cumulative(recon_weights);

  auto message_part = [&](std::uint64_t code, const Demanded& d) {
    Vector digits = detail::decode_digits(code, p, recon.demanded_symbols);
    return detail::encode(std::span<const Symbol>(digits).subspan(d.offset, d.length), p);
  };
  // Side channels p(m_i, m^_i) per demanded message.
  std::vector<SideChannel> channels;
  for (const auto& d : demanded) {
    SideChannel ch;
    ch.alphabet = ch.side_alphabet = source.alphabets[d.message];
    ch.joint.assign(ch.alphabet * ch.alphabet, 0.0);
    for (std::size_t k = 0; k < recon.support.size(); ++k) {
      const auto& e = recon.support[k];
      ch.joint[message_part(e.message, d) * ch.alphabet + message_part(e.observation, d)] +=
          recon_weights[k];
    }
    channels.push_back(std::move(ch));
  }

  std::vector<std::size_t> binned;
  std::vector<BinningPlan> plans;
  for (std::size_t i = 0; i < t; ++i) {
    plans.push_back({i, report.params.rate_tilde[i]});
    plans.push_back({i, report.params.rate_f[i]});
    binned.push_back(i);
    binned.push_back(i);
  }

  report.joint_tv.metric = "joint_total_variation";
  report.sw_error.metric = "slepian_wolf_error";
  report.simulation_tv.metric = "channel_simulation_tv";

  for (std::size_t n : opt.blocklengths) {
    std::vector<double> joint(opt.trials, 0.0), sw(opt.trials, 0.0), sim(opt.trials, 0.0);
    detail::for_each_index(opt.trials, opt.workers, [&](std::size_t trial) {
      std::vector<Binning> bs;
      for (std::size_t b = 0; b < plans.size(); ++b) {
        BinningSpec spec;
        spec.alphabet = source.alphabets[plans[b].message];
        spec.n = n;
        spec.rate = plans[b].rate;
        spec.seed = detail::seed_for(opt.seed, n, trial, b);
        bs.push_back(make_binning(spec, opt.budget));
      }
      joint[trial] = osrb_tv_exact(source, binned, bs, n, opt.budget);

      // Channel simulation of M_i^n given M~_i with randomness rate R_G_i;
      // summed over messages, which bounds the TV of the product channel.
      double sim_tv = 0.0;
      for (std::size_t i = 0; i < t; ++i)
        sim_tv += simulation_tv(bs[2 * i], BinIndex(bs[2 * i]), report.params.rate_g[i]);
      sim[trial] = std::min(1.0, sim_tv);

      // Slepian-Wolf: block error when any demanded message is not recovered.
      std::vector<BinIndex> f_index;
      for (const auto& d : demanded) f_index.emplace_back(bs[2 * d.message + 1]);
      Rng rng(detail::seed_for(opt.seed, n, trial, plans.size()));
      std::vector<std::vector<std::uint64_t>> side(demanded.size(), std::vector<std::uint64_t>(n));
      std::vector<std::uint64_t> truth(demanded.size());
      std::size_t wrong_blocks = 0;
      for (std::size_t s = 0; s < opt.samples; ++s) {
        std::fill(truth.begin(), truth.end(), 0);
        for (std::size_t j = 0; j < n; ++j) {
          const auto& e = recon.support[detail::draw(rng, recon_cdf)];
          for (std::size_t k = 0; k < demanded.size(); ++k) {
            truth[k] = truth[k] * channels[k].alphabet + message_part(e.message, demanded[k]);
            side[k][j] = message_part(e.observation, demanded[k]);
          }
        }
        bool ok = true;
        for (std::size_t k = 0; k < demanded.size() && ok; ++k) {
          const Binning& f = bs[2 * demanded[k].message + 1];
          auto got = slepian_wolf_decode(f_index[k], f.bin(truth[k]), side[k], channels[k]);
          ok = got && *got == truth[k];
        }
        wrong_blocks += !ok;
      }
      sw[trial] = static_cast<double>(wrong_blocks) / static_cast<double>(opt.samples);
    });
    report.joint_tv.points.push_back(summarize(n, joint));
    report.sw_error.points.push_back(summarize(n, sw));
    report.simulation_tv.points.push_back(summarize(n, sim));
  }
  report.joint_tv.fit = fit_decay(report.joint_tv.points);
  report.sw_error.fit = fit_decay(report.sw_error.points);
  report.simulation_tv.fit = fit_decay(report.simulation_tv.points);
  return report;
}

inline void to_json(nlohmann::json& j, const WeakToStrongReport& r) {
  j = nlohmann::json{{"params", r.params},
                     {"joint_tv", r.joint_tv},
                     {"sw_error", r.sw_error},
                     {"simulation_tv", r.simulation_tv}};
}

}  // namespace wiresec
