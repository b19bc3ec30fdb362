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

// Arithmetic and dense linear algebra over prime fields GF(p).
//
// Elimination always picks the first nonzero entry of the current column as
// pivot, so ranks, kernels and particular solutions are reproducible across
// runs and platforms.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <initializer_list>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "wiresec/error.hpp"

namespace wiresec {

using Symbol = std::uint32_t;
using Vector = std::vector<Symbol>;

class Field {
 public:
  static constexpr std::uint32_t kMaxModulus = 1u << 16;

  explicit Field(std::uint32_t p) : p_(p) {
    if (p < 2 || p > kMaxModulus) {
      throw Error(ErrorKind::kInvalidArgument,
                  "field modulus must lie in [2, 65536], got " + std::to_string(p));
    }
    for (std::uint32_t d = 2; d * d <= p; ++d) {
      if (p % d == 0) {
        throw Error(ErrorKind::kInvalidArgument,
                    "field modulus " + std::to_string(p) + " is not prime");
      }
    }
  }

  std::uint32_t modulus() const noexcept { return p_; }

  // Bits carried by one uniformly distributed symbol.
  double log2_size() const { return std::log2(static_cast<double>(p_)); }

  Symbol reduce(std::int64_t v) const noexcept {
    std::int64_t r = v % static_cast<std::int64_t>(p_);
    return static_cast<Symbol>(r < 0 ? r + p_ : r);
  }

  Symbol add(Symbol a, Symbol b) const noexcept {
    Symbol s = a + b;
    return s >= p_ ? s - p_ : s;
  }
  Symbol sub(Symbol a, Symbol b) const noexcept { return a >= b ? a - b : a + p_ - b; }
  Symbol neg(Symbol a) const noexcept { return a == 0 ? 0 : p_ - a; }
  Symbol mul(Symbol a, Symbol b) const noexcept {
    return static_cast<Symbol>(static_cast<std::uint64_t>(a) * b % p_);
  }

  Symbol pow(Symbol a, std::uint64_t e) const noexcept {
    Symbol result = 1 % p_;
    while (e) {
      if (e & 1) result = mul(result, a);
      a = mul(a, a);
      e >>= 1;
    }
    return result;
  }

  Symbol inv(Symbol a) const {
    if (a == 0) throw Error(ErrorKind::kInvalidArgument, "zero has no inverse");
    return pow(a, p_ - 2);
  }

  friend bool operator==(const Field&, const Field&) = default;

 private:
  std::uint32_t p_;
};

inline Symbol dot(const Field& f, std::span<const Symbol> a, std::span<const Symbol> b) {
  Symbol acc = 0;
  for (std::size_t i = 0; i < a.size(); ++i) acc = f.add(acc, f.mul(a[i], b[i]));
  return acc;
}

inline bool is_zero(std::span<const Symbol> v) {
  for (Symbol s : v)
    if (s != 0) return false;
  return true;
}

// Dense row-major matrix over GF(p). Zero rows or zero columns are legal.
class FieldMatrix {
 public:
  FieldMatrix(Field field, std::size_t rows, std::size_t cols)
      : field_(field), rows_(rows), cols_(cols), entries_(rows * cols, 0) {}

  FieldMatrix(Field field, std::size_t rows, std::size_t cols, std::vector<Symbol> entries)
      : field_(field), rows_(rows), cols_(cols), entries_(std::move(entries)) {
    if (entries_.size() != rows_ * cols_) {
      throw Error(ErrorKind::kInvalidArgument,
                  "matrix entry count " + std::to_string(entries_.size()) + " != " +
                      std::to_string(rows_) + "x" + std::to_string(cols_));
    }
    for (Symbol s : entries_) {
      if (s >= field_.modulus()) {
        throw Error(ErrorKind::kInvalidArgument,
                    "matrix entry " + std::to_string(s) + " not reduced mod " +
                        std::to_string(field_.modulus()));
      }
    }
  }

  // Entries are reduced mod p, so negative literals are accepted.
  static FieldMatrix from_rows(Field field,
                               std::initializer_list<std::initializer_list<std::int64_t>> rows) {
    std::size_t r = rows.size();
    std::size_t c = r ? rows.begin()->size() : 0;
    FieldMatrix m(field, r, c);
    std::size_t i = 0;
    for (const auto& row : rows) {
      if (row.size() != c) throw Error(ErrorKind::kInvalidArgument, "ragged matrix rows");
      std::size_t j = 0;
      for (std::int64_t v : row) m.set(i, j++, field.reduce(v));
      ++i;
    }
    return m;
  }

  static FieldMatrix identity(Field field, std::size_t n) {
    FieldMatrix m(field, n, n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, 1);
    return m;
  }

  static FieldMatrix column(Field field, std::span<const Symbol> v) {
    return FieldMatrix(field, v.size(), 1, Vector(v.begin(), v.end()));
  }

  const Field& field() const noexcept { return field_; }
  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  bool empty() const noexcept { return rows_ == 0 || cols_ == 0; }
  const std::vector<Symbol>& entries() const noexcept { return entries_; }

  Symbol operator()(std::size_t r, std::size_t c) const { return entries_[r * cols_ + c]; }
  void set(std::size_t r, std::size_t c, Symbol v) { entries_[r * cols_ + c] = v; }

  std::span<const Symbol> row(std::size_t r) const {
    return {entries_.data() + r * cols_, cols_};
  }
  std::span<Symbol> row(std::size_t r) { return {entries_.data() + r * cols_, cols_}; }

  Vector column_vector(std::size_t c) const {
    Vector out(rows_);
    for (std::size_t r = 0; r < rows_; ++r) out[r] = (*this)(r, c);
    return out;
  }

  FieldMatrix transpose() const {
    FieldMatrix t(field_, cols_, rows_);
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t c = 0; c < cols_; ++c) t.set(c, r, (*this)(r, c));
    return t;
  }

  // Columns listed in `cols`, in that order.
  FieldMatrix select_columns(std::span<const std::size_t> cols) const {
    FieldMatrix out(field_, rows_, cols.size());
    for (std::size_t r = 0; r < rows_; ++r)
      for (std::size_t j = 0; j < cols.size(); ++j) out.set(r, j, (*this)(r, cols[j]));
    return out;
  }

  FieldMatrix select_rows(std::span<const std::size_t> rows) const {
    FieldMatrix out(field_, rows.size(), cols_);
    for (std::size_t i = 0; i < rows.size(); ++i) {
      auto src = row(rows[i]);
      std::copy(src.begin(), src.end(), out.row(i).begin());
    }
    return out;
  }

  Vector apply(std::span<const Symbol> x) const {
    if (x.size() != cols_) {
      throw Error(ErrorKind::kInvalidArgument, "vector length does not match column count");
    }
    Vector y(rows_);
    for (std::size_t r = 0; r < rows_; ++r) y[r] = dot(field_, row(r), x);
    return y;
  }

  friend FieldMatrix operator*(const FieldMatrix& a, const FieldMatrix& b) {
    if (a.cols_ != b.rows_ || !(a.field_ == b.field_)) {
      throw Error(ErrorKind::kInvalidArgument, "matrix product shape mismatch");
    }
    const Field& f = a.field_;
    FieldMatrix out(f, a.rows_, b.cols_);
    for (std::size_t i = 0; i < a.rows_; ++i)
      for (std::size_t k = 0; k < a.cols_; ++k) {
        Symbol aik = a(i, k);
        if (aik == 0) continue;
        for (std::size_t j = 0; j < b.cols_; ++j)
          out.set(i, j, f.add(out(i, j), f.mul(aik, b(k, j))));
      }
    return out;
  }

  friend bool operator==(const FieldMatrix&, const FieldMatrix&) = default;

 private:
  Field field_;
  std::size_t rows_;
  std::size_t cols_;
  std::vector<Symbol> entries_;
};

// [M1 | M2 | ...]; all blocks must share row count and field.
inline FieldMatrix concat_columns(std::initializer_list<const FieldMatrix*> blocks) {
  const FieldMatrix& first = **blocks.begin();
  std::size_t rows = first.rows();
  std::size_t cols = 0;
  for (const FieldMatrix* b : blocks) {
    if (b->rows() != rows || !(b->field() == first.field())) {
      throw Error(ErrorKind::kInvalidArgument, "column concatenation shape mismatch");
    }
    cols += b->cols();
  }
  FieldMatrix out(first.field(), rows, cols);
  std::size_t offset = 0;
  for (const FieldMatrix* b : blocks) {
    for (std::size_t r = 0; r < rows; ++r)
      for (std::size_t c = 0; c < b->cols(); ++c) out.set(r, offset + c, (*b)(r, c));
    offset += b->cols();
  }
  return out;
}

inline FieldMatrix concat_columns(const FieldMatrix& a, const FieldMatrix& b) {
  return concat_columns({&a, &b});
}

struct Echelon {
  FieldMatrix reduced;
  std::vector<std::size_t> pivot_columns;
};

// Reduced row echelon form. Pivots are normalised to 1 and cleared above and
// below, so the nonzero rows are the canonical basis of the row space.
inline Echelon reduced_row_echelon(FieldMatrix m) {
  const Field& f = m.field();
  std::vector<std::size_t> pivots;
  std::size_t lead = 0;
  for (std::size_t c = 0; c < m.cols() && lead < m.rows(); ++c) {
    std::size_t pivot = lead;
    while (pivot < m.rows() && m(pivot, c) == 0) ++pivot;
    if (pivot == m.rows()) continue;
    if (pivot != lead) {
      auto a = m.row(pivot);
      auto b = m.row(lead);
      std::swap_ranges(a.begin(), a.end(), b.begin());
    }
    Symbol scale = f.inv(m(lead, c));
    for (Symbol& s : m.row(lead)) s = f.mul(s, scale);
    for (std::size_t r = 0; r < m.rows(); ++r) {
      if (r == lead) continue;
      Symbol factor = m(r, c);
      if (factor == 0) continue;
      auto dst = m.row(r);
      auto src = m.row(lead);
      for (std::size_t j = c; j < m.cols(); ++j) dst[j] = f.sub(dst[j], f.mul(factor, src[j]));
    }
    pivots.push_back(c);
    ++lead;
  }
  return {std::move(m), std::move(pivots)};
}

inline std::size_t rank(const FieldMatrix& m) {
  return reduced_row_echelon(m).pivot_columns.size();
}

// Columns form a basis of {x : m x = 0}. One basis vector per free column,
// carrying a 1 in that column.
inline FieldMatrix null_space_basis(const FieldMatrix& m) {
  const Field& f = m.field();
  Echelon e = reduced_row_echelon(m);
  std::vector<bool> is_pivot(m.cols(), false);
  for (std::size_t c : e.pivot_columns) is_pivot[c] = true;

  std::vector<std::size_t> free_cols;
  for (std::size_t c = 0; c < m.cols(); ++c)
    if (!is_pivot[c]) free_cols.push_back(c);

  FieldMatrix basis(f, m.cols(), free_cols.size());
  for (std::size_t j = 0; j < free_cols.size(); ++j) {
    std::size_t fc = free_cols[j];
    basis.set(fc, j, 1);
    for (std::size_t i = 0; i < e.pivot_columns.size(); ++i)
      basis.set(e.pivot_columns[i], j, f.neg(e.reduced(i, fc)));
  }
  return basis;
}

// One particular solution of m x = rhs (free variables set to zero), or
// nullopt when the system is inconsistent.
inline std::optional<Vector> solve(const FieldMatrix& m, std::span<const Symbol> rhs) {
  if (rhs.size() != m.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "right-hand side length does not match row count");
  }
  FieldMatrix aug(m.field(), m.rows(), m.cols() + 1);
  for (std::size_t r = 0; r < m.rows(); ++r) {
    for (std::size_t c = 0; c < m.cols(); ++c) aug.set(r, c, m(r, c));
    aug.set(r, m.cols(), rhs[r]);
  }
  Echelon e = reduced_row_echelon(std::move(aug));
  if (!e.pivot_columns.empty() && e.pivot_columns.back() == m.cols()) return std::nullopt;
  Vector x(m.cols(), 0);
  for (std::size_t i = 0; i < e.pivot_columns.size(); ++i)
    x[e.pivot_columns[i]] = e.reduced(i, m.cols());
  return x;
}

inline bool image_contains(const FieldMatrix& j, std::span<const Symbol> v) {
  if (v.size() != j.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "vector length does not match row count");
  }
  FieldMatrix col = FieldMatrix::column(j.field(), v);
  return rank(concat_columns(j, col)) == rank(j);
}

// Nonzero z with z^T B = 0, z^T G = 0 and z^T A != 0, if any. Scans the
// left kernel basis of [B, G] in order and returns the first member that
// does not annihilate A.
inline std::optional<Vector> left_null_complement(const FieldMatrix& b, const FieldMatrix& g,
                                                  const FieldMatrix& a) {
  if (b.rows() != a.rows() || g.rows() != a.rows()) {
    throw Error(ErrorKind::kInvalidArgument, "A, B and G must have equal row counts");
  }
  FieldMatrix left_kernel = null_space_basis(concat_columns(b, g).transpose());
  for (std::size_t j = 0; j < left_kernel.cols(); ++j) {
    Vector z = left_kernel.column_vector(j);
    for (std::size_t c = 0; c < a.cols(); ++c) {
      Symbol acc = 0;
      for (std::size_t r = 0; r < a.rows(); ++r)
        acc = a.field().add(acc, a.field().mul(z[r], a(r, c)));
      if (acc != 0) return z;
    }
  }
  return std::nullopt;
}

// Canonical basis (rows of the reduced echelon form) of the span of the
// given column vectors' transposes, i.e. of the row space of `m`.
inline FieldMatrix row_space_basis(const FieldMatrix& m) {
  Echelon e = reduced_row_echelon(m);
  std::vector<std::size_t> keep(e.pivot_columns.size());
  for (std::size_t i = 0; i < keep.size(); ++i) keep[i] = i;
  return e.reduced.select_rows(keep);
}

// JSON form: {"p": int, "rows": int, "cols": int, "entries": [int, ...]}.
inline void to_json(nlohmann::json& j, const FieldMatrix& m) {
  j = nlohmann::json{{"p", m.field().modulus()},
                     {"rows", m.rows()},
                     {"cols", m.cols()},
                     {"entries", m.entries()}};
}

inline FieldMatrix matrix_from_json(const nlohmann::json& j) {
  try {
    Field f(j.at("p").get<std::uint32_t>());
    auto rows = j.at("rows").get<std::size_t>();
    auto cols = j.at("cols").get<std::size_t>();
    return FieldMatrix(f, rows, cols, j.at("entries").get<std::vector<Symbol>>());
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorKind::kInvalidArgument, std::string("malformed matrix JSON: ") + e.what());
  }
}

}  // namespace wiresec
