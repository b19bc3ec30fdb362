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

// Closed-form secrecy and reliability of compiled linear codes.
//
// Leakage to an observer C = AM + BK + GW is exactly
//   I(M; C) = (rank[A, B, G] - rank[B, G]) * log2(p)
// bits under uniform inputs. When it is positive, some z with z^T B = 0,
// z^T G = 0, z^T A != 0 exists and z^T C = z^T A M is a uniform symbol, so
// the leakage is at least log2(p) bits and the total variation distance
// between p_MC and p_M p_C is at least 1 - 1/p.
//
// A sink with ambiguity space L = {m1 : A1 m1 in Im[A2, B2, G]} sees every
// reachable observation compatible with exactly p^dim(L) equally likely
// demanded messages, so MAP decoding succeeds with probability p^-dim(L).

#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <utility>

#include "json.hpp"
#include "wiresec/error.hpp"
#include "wiresec/galois.hpp"
#include "wiresec/lincode.hpp"
#include "wiresec/rational.hpp"

namespace wiresec {

struct LeakageReport {
  std::string observer;
  std::size_t leaked_symbols = 0;  // rank[A,B,G] - rank[B,G]
  double leakage_bits = 0.0;
  bool perfectly_secure = true;
  std::optional<Vector> distinguishing_z;
  double tv_lower_bound = 0.0;
};

inline LeakageReport leakage(const ObserverView& view) {
  const Field& f = view.a.field();
  FieldMatrix bg = concat_columns(view.b, view.g);
  std::size_t full = rank(concat_columns(view.a, bg));
  std::size_t masked = rank(bg);

  LeakageReport r;
  r.observer = view.name;
  r.leaked_symbols = full - masked;
  r.leakage_bits = static_cast<double>(r.leaked_symbols) * f.log2_size();
  r.perfectly_secure = r.leaked_symbols == 0;
  if (!r.perfectly_secure) {
    r.distinguishing_z = left_null_complement(view.b, view.g, view.a);
    r.tv_lower_bound = 1.0 - 1.0 / static_cast<double>(f.modulus());
  }
  return r;
}

struct DecodabilityReport {
  std::string sink;
  std::size_t ambiguity_dim = 0;
  bool zero_error = true;
  Rational map_success_prob{1};
};

namespace detail {

// [A1, A2, B2, G]: the unknowns a sink must explain an observation with.
inline FieldMatrix sink_system(const SinkView& v) {
  return concat_columns({&v.a1, &v.a2, &v.b2, &v.g});
}

inline FieldMatrix sink_nuisance(const SinkView& v) { return concat_columns({&v.a2, &v.b2, &v.g}); }

}  // namespace detail

inline std::size_t ambiguity_dimension(const SinkView& view) {
  return view.a1.cols() - rank(detail::sink_system(view)) + rank(detail::sink_nuisance(view));
}

// Rows form the reduced echelon basis of the ambiguity space L.
inline FieldMatrix ambiguity_basis(const SinkView& view) {
  FieldMatrix kernel = null_space_basis(detail::sink_system(view));
  std::vector<std::size_t> m1_rows(view.a1.cols());
  for (std::size_t i = 0; i < m1_rows.size(); ++i) m1_rows[i] = i;
  return row_space_basis(kernel.select_rows(m1_rows).transpose());
}

inline DecodabilityReport decodability(const SinkView& view) {
  DecodabilityReport r;
  r.sink = view.sink;
  r.ambiguity_dim = ambiguity_dimension(view);
  r.zero_error = r.ambiguity_dim == 0;
  r.map_success_prob =
      Rational(1, checked_pow(view.a1.field().modulus(), r.ambiguity_dim));
  return r;
}

// z = y - B1 k1 - S x: the part of the observation not explained by what the
// sink already knows.
inline Vector residual_observation(const SinkView& view, std::span<const Symbol> y,
                                   std::span<const Symbol> k1, std::span<const Symbol> side = {}) {
  if (y.size() != view.received.rows() || k1.size() != view.b1.cols() ||
      side.size() != view.side.cols()) {
    throw Error(ErrorKind::kInvalidArgument, "observation dimensions do not match sink view");
  }
  const Field& f = view.received.field();
  Vector z(y.begin(), y.end());
  Vector bk = view.b1.apply(k1);
  Vector sx = view.side.apply(side);
  for (std::size_t i = 0; i < z.size(); ++i) z[i] = f.sub(f.sub(z[i], bk[i]), sx[i]);
  return z;
}

// Lexicographically smallest demanded message compatible with the residual z.
// Callers that decode many observations should reuse `basis`
// (ambiguity_basis(view)).
inline Vector map_decode_residual(const SinkView& view, std::span<const Symbol> z,
                                  const FieldMatrix& basis) {
  auto x = solve(detail::sink_system(view), z);
  if (!x) {
    throw Error(ErrorKind::kUnreachableObservation,
                "no demanded message at sink '" + view.sink + "' explains the observation");
  }
  const Field& f = view.a1.field();
  Vector m1(x->begin(), x->begin() + static_cast<std::ptrdiff_t>(view.a1.cols()));
  // Each basis row has a leading 1 that no other row touches; clearing m1 at
  // every leading position yields the lexicographic minimum of m1 + L.
  for (std::size_t r = 0; r < basis.rows(); ++r) {
    auto row = basis.row(r);
    std::size_t lead = 0;
    while (row[lead] == 0) ++lead;
    Symbol c = m1[lead];
    if (c == 0) continue;
    for (std::size_t j = 0; j < m1.size(); ++j) m1[j] = f.sub(m1[j], f.mul(c, row[j]));
  }
  return m1;
}

inline Vector map_decode(const SinkView& view, std::span<const Symbol> y,
                         std::span<const Symbol> k1, std::span<const Symbol> side = {}) {
  Vector z = residual_observation(view, y, k1, side);
  return map_decode_residual(view, z, ambiguity_basis(view));
}

// Number of demanded messages compatible with residual z: p^dim(L) when z is
// reachable, 0 otherwise.
inline std::uint64_t compatible_count(const SinkView& view, std::span<const Symbol> z) {
  if (z.size() != view.received.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "observation dimensions do not match sink view");
  }
  if (!image_contains(detail::sink_system(view), z)) return 0;
  return static_cast<std::uint64_t>(
      checked_pow(view.a1.field().modulus(), ambiguity_dimension(view)));
}

struct MutualInformationBounds {
  double lower = 0.0;
  double upper = 0.0;
};

// Sandwich on mutual-information leakage given total-variation leakage eps2
// over a message alphabet of the given size:
//   (log2 e / 2) eps2^2 <= eps1 <= eps2 log2(|M| / eps2).
inline MutualInformationBounds remark1_bounds(double eps2, double alphabet_size) {
  if (!(alphabet_size > 4.0)) {
    throw Error(ErrorKind::kInvalidArgument, "message alphabet size must exceed 4");
  }
  if (!(eps2 > 0.0 && eps2 <= 1.0)) {
    throw Error(ErrorKind::kInvalidArgument, "total variation must lie in (0, 1]");
  }
  return {std::numbers::log2e / 2.0 * eps2 * eps2, eps2 * std::log2(alphabet_size / eps2)};
}

inline void to_json(nlohmann::json& j, const LeakageReport& r) {
  j = nlohmann::json{{"observer", r.observer},
                     {"leaked_symbols", r.leaked_symbols},
                     {"leakage_bits", r.leakage_bits},
                     {"perfectly_secure", r.perfectly_secure},
                     {"distinguishing_z", nullptr},
                     {"tv_lower_bound", r.tv_lower_bound}};
  if (r.distinguishing_z) j["distinguishing_z"] = *r.distinguishing_z;
}

inline void to_json(nlohmann::json& j, const DecodabilityReport& r) {
  j = nlohmann::json{{"sink", r.sink},
                     {"ambiguity_dim", r.ambiguity_dim},
                     {"zero_error", r.zero_error},
                     {"map_success_prob", r.map_success_prob}};
}

}  // namespace wiresec
