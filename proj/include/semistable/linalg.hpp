#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "semistable/rational.hpp"

namespace semistable {

using IntVec = std::vector<Int>;
using RatVec = std::vector<Rat>;

struct RatMat;

// Dense exact integer matrix, row-major.
struct IntMat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Int> data;

    IntMat() = default;
    IntMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, Int(0)) {}

    static IntMat identity(std::size_t n);
    static IntMat from_columns(std::size_t rows, const std::vector<IntVec>& columns);
    static IntMat from_rows(const std::vector<IntVec>& rws, std::size_t cols_hint = 0);

    Int& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const Int& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    IntVec column(std::size_t c) const;
    IntVec row(std::size_t r) const;
    std::vector<IntVec> columns() const;

    IntMat transpose() const;
    RatMat to_rat() const;

    bool operator==(const IntMat& o) const { return rows == o.rows && cols == o.cols && data == o.data; }
    bool operator!=(const IntMat& o) const { return !(*this == o); }
};

struct RatMat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<Rat> data;

    RatMat() = default;
    RatMat(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c, Rat(0)) {}

    static RatMat identity(std::size_t n);
    static RatMat from_columns(std::size_t rows, const std::vector<RatVec>& columns);

    Rat& at(std::size_t r, std::size_t c) { return data[r * cols + c]; }
    const Rat& at(std::size_t r, std::size_t c) const { return data[r * cols + c]; }

    RatVec column(std::size_t c) const;
    std::vector<RatVec> columns() const;

    RatMat transpose() const;

    bool operator==(const RatMat& o) const { return rows == o.rows && cols == o.cols && data == o.data; }
    bool operator!=(const RatMat& o) const { return !(*this == o); }
};

// -- vector helpers ---------------------------------------------------------

IntVec int_vec_neg(const IntVec& v);
bool int_vec_is_zero(const IntVec& v);
bool rat_vec_is_zero(const RatVec& v);
Int dot(const IntVec& a, const IntVec& b);
Rat dot(const RatVec& a, const RatVec& b);
Rat dot(const RatVec& a, const IntVec& b);
RatVec to_rat(const IntVec& v);

// Divides by the gcd of the entries; direction preserved. Zero vector stays zero.
IntVec primitive_vector(const IntVec& v);
// Scales a rational vector to the primitive integer vector on the same ray.
IntVec primitive_vector(const RatVec& v);
// Canonical sign for sign-ambiguous data (first nonzero entry positive).
IntVec canonical_sign(const IntVec& v);

// Lexicographic comparison, used for all canonical orderings.
bool lex_less(const IntVec& a, const IntVec& b);

// -- matrix algebra ---------------------------------------------------------

IntMat mat_mul(const IntMat& a, const IntMat& b);
RatMat mat_mul(const RatMat& a, const RatMat& b);
IntVec mat_apply(const IntMat& m, const IntVec& v);
RatVec mat_apply(const IntMat& m, const RatVec& v);
RatVec mat_apply(const RatMat& m, const RatVec& v);
// Row covector times matrix.
RatVec row_apply(const RatVec& row, const IntMat& m);
RatVec row_apply(const RatVec& row, const RatMat& m);

std::size_t rank(const RatMat& m);
std::size_t rank(const IntMat& m);
Rat determinant(const RatMat& m);
Int determinant(const IntMat& m);

// Unique solution of a·x = b for a with full column rank; nullopt if inconsistent.
std::optional<RatVec> solve_full_col_rank(const RatMat& a, const RatVec& b);
std::optional<RatMat> solve_full_col_rank(const RatMat& a, const RatMat& b);
// Integer-entry convenience wrappers; solution may still be rational.
std::optional<RatMat> solve_full_col_rank(const IntMat& a, const IntMat& b);

// Inverse of a nonsingular square rational matrix.
RatMat rat_inverse(const RatMat& m);

// A particular rational solution of a·x = b (any rank); nullopt if inconsistent.
std::optional<RatVec> solve_any(const RatMat& a, const RatVec& b);

// Rational kernel basis of m (columns), reduced but not canonicalized.
RatMat rat_kernel(const RatMat& m);

bool is_integral(const RatVec& v);
bool is_integral(const RatMat& m);
IntVec to_int(const RatVec& v);
IntMat to_int(const RatMat& m);

// -- normal forms -----------------------------------------------------------

struct HnfResult {
    IntMat h;  // column-style Hermite normal form
    IntMat u;  // unimodular, h = m·u
};

// Column Hermite normal form. Convention: pivots walk down-right, each pivot
// positive, entries left of a pivot in its row reduced into [0, pivot),
// entries right of a pivot in its row zero, zero columns last.
HnfResult hnf(const IntMat& m);

struct SnfResult {
    IntMat d;  // diagonal, d1 | d2 | ...
    IntMat u;  // unimodular rows×rows
    IntMat v;  // unimodular cols×cols, d = u·m·v
};

SnfResult snf(const IntMat& m);

// HNF basis (columns) of {x in Z^cols : m x = 0}.
IntMat int_kernel(const IntMat& m);

bool is_unimodular(const IntMat& m);

}  // namespace semistable
