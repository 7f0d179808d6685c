#include "semistable/linalg.hpp"

#include <algorithm>

namespace semistable {

// -- construction -----------------------------------------------------------

IntMat IntMat::identity(std::size_t n) {
    IntMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

IntMat IntMat::from_columns(std::size_t rows, const std::vector<IntVec>& columns) {
    IntMat m(rows, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != rows) throw Error("column length mismatch");
        for (std::size_t r = 0; r < rows; ++r) m.at(r, c) = columns[c][r];
    }
    return m;
}

IntMat IntMat::from_rows(const std::vector<IntVec>& rws, std::size_t cols_hint) {
    std::size_t cols = rws.empty() ? cols_hint : rws[0].size();
    IntMat m(rws.size(), cols);
    for (std::size_t r = 0; r < rws.size(); ++r) {
        if (rws[r].size() != cols) throw Error("row length mismatch");
        for (std::size_t c = 0; c < cols; ++c) m.at(r, c) = rws[r][c];
    }
    return m;
}

IntVec IntMat::column(std::size_t c) const {
    IntVec v(rows);
    for (std::size_t r = 0; r < rows; ++r) v[r] = at(r, c);
    return v;
}

IntVec IntMat::row(std::size_t r) const {
    IntVec v(cols);
    for (std::size_t c = 0; c < cols; ++c) v[c] = at(r, c);
    return v;
}

std::vector<IntVec> IntMat::columns() const {
    std::vector<IntVec> out(cols);
    for (std::size_t c = 0; c < cols; ++c) out[c] = column(c);
    return out;
}

IntMat IntMat::transpose() const {
    IntMat t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
    return t;
}

RatMat IntMat::to_rat() const {
    RatMat m(rows, cols);
    for (std::size_t i = 0; i < data.size(); ++i) m.data[i] = Rat(data[i]);
    return m;
}

RatMat RatMat::identity(std::size_t n) {
    RatMat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m.at(i, i) = 1;
    return m;
}

RatMat RatMat::from_columns(std::size_t rows, const std::vector<RatVec>& columns) {
    RatMat m(rows, columns.size());
    for (std::size_t c = 0; c < columns.size(); ++c) {
        if (columns[c].size() != rows) throw Error("column length mismatch");
        for (std::size_t r = 0; r < rows; ++r) m.at(r, c) = columns[c][r];
    }
    return m;
}

RatVec RatMat::column(std::size_t c) const {
    RatVec v(rows);
    for (std::size_t r = 0; r < rows; ++r) v[r] = at(r, c);
    return v;
}

std::vector<RatVec> RatMat::columns() const {
    std::vector<RatVec> out(cols);
    for (std::size_t c = 0; c < cols; ++c) out[c] = column(c);
    return out;
}

RatMat RatMat::transpose() const {
    RatMat t(cols, rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t c = 0; c < cols; ++c) t.at(c, r) = at(r, c);
    return t;
}

// -- vector helpers ---------------------------------------------------------

IntVec int_vec_neg(const IntVec& v) {
    IntVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = -v[i];
    return out;
}

bool int_vec_is_zero(const IntVec& v) {
    for (const auto& x : v)
        if (x != 0) return false;
    return true;
}

bool rat_vec_is_zero(const RatVec& v) {
    for (const auto& x : v)
        if (x != 0) return false;
    return true;
}

Int dot(const IntVec& a, const IntVec& b) {
    if (a.size() != b.size()) throw Error("dot: size mismatch");
    Int s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Rat dot(const RatVec& a, const RatVec& b) {
    if (a.size() != b.size()) throw Error("dot: size mismatch");
    Rat s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

Rat dot(const RatVec& a, const IntVec& b) {
    if (a.size() != b.size()) throw Error("dot: size mismatch");
    Rat s = 0;
    for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * Rat(b[i]);
    return s;
}

RatVec to_rat(const IntVec& v) {
    RatVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = Rat(v[i]);
    return out;
}

IntVec primitive_vector(const IntVec& v) {
    Int g = 0;
    for (const auto& x : v) g = int_gcd(g, x);
    if (g == 0) return v;
    IntVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) out[i] = v[i] / g;
    return out;
}

IntVec primitive_vector(const RatVec& v) {
    Int den = 1;
    for (const auto& x : v) den = int_lcm(den, x.get_den());
    IntVec scaled(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        Rat t = v[i] * Rat(den);
        scaled[i] = t.get_num();
    }
    return primitive_vector(scaled);
}

IntVec canonical_sign(const IntVec& v) {
    for (const auto& x : v) {
        if (x > 0) return v;
        if (x < 0) return int_vec_neg(v);
    }
    return v;
}

bool lex_less(const IntVec& a, const IntVec& b) {
    return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

// -- matrix algebra ---------------------------------------------------------

IntMat mat_mul(const IntMat& a, const IntMat& b) {
    if (a.cols != b.rows) throw Error("mat_mul: shape mismatch");
    IntMat out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const Int& aik = a.at(i, k);
            if (aik == 0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) out.at(i, j) += aik * b.at(k, j);
        }
    return out;
}

RatMat mat_mul(const RatMat& a, const RatMat& b) {
    if (a.cols != b.rows) throw Error("mat_mul: shape mismatch");
    RatMat out(a.rows, b.cols);
    for (std::size_t i = 0; i < a.rows; ++i)
        for (std::size_t k = 0; k < a.cols; ++k) {
            const Rat& aik = a.at(i, k);
            if (aik == 0) continue;
            for (std::size_t j = 0; j < b.cols; ++j) out.at(i, j) += aik * b.at(k, j);
        }
    return out;
}

IntVec mat_apply(const IntMat& m, const IntVec& v) {
    if (m.cols != v.size()) throw Error("mat_apply: shape mismatch");
    IntVec out(m.rows, Int(0));
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out[i] += m.at(i, j) * v[j];
    return out;
}

RatVec mat_apply(const IntMat& m, const RatVec& v) {
    if (m.cols != v.size()) throw Error("mat_apply: shape mismatch");
    RatVec out(m.rows, Rat(0));
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out[i] += Rat(m.at(i, j)) * v[j];
    return out;
}

RatVec mat_apply(const RatMat& m, const RatVec& v) {
    if (m.cols != v.size()) throw Error("mat_apply: shape mismatch");
    RatVec out(m.rows, Rat(0));
    for (std::size_t i = 0; i < m.rows; ++i)
        for (std::size_t j = 0; j < m.cols; ++j) out[i] += m.at(i, j) * v[j];
    return out;
}

RatVec row_apply(const RatVec& row, const IntMat& m) {
    if (row.size() != m.rows) throw Error("row_apply: shape mismatch");
    RatVec out(m.cols, Rat(0));
    for (std::size_t j = 0; j < m.cols; ++j)
        for (std::size_t i = 0; i < m.rows; ++i) out[j] += row[i] * Rat(m.at(i, j));
    return out;
}

RatVec row_apply(const RatVec& row, const RatMat& m) {
    if (row.size() != m.rows) throw Error("row_apply: shape mismatch");
    RatVec out(m.cols, Rat(0));
    for (std::size_t j = 0; j < m.cols; ++j)
        for (std::size_t i = 0; i < m.rows; ++i) out[j] += row[i] * m.at(i, j);
    return out;
}

namespace {

// Gaussian elimination to row echelon form; returns pivot columns.
// Mutates `m` in place.
std::vector<std::size_t> row_echelon(RatMat& m) {
    std::vector<std::size_t> pivots;
    std::size_t r = 0;
    for (std::size_t c = 0; c < m.cols && r < m.rows; ++c) {
        std::size_t p = r;
        while (p < m.rows && m.at(p, c) == 0) ++p;
        if (p == m.rows) continue;
        if (p != r)
            for (std::size_t j = 0; j < m.cols; ++j) std::swap(m.at(p, j), m.at(r, j));
        Rat inv = 1 / m.at(r, c);
        for (std::size_t j = c; j < m.cols; ++j) m.at(r, j) *= inv;
        for (std::size_t i = 0; i < m.rows; ++i) {
            if (i == r || m.at(i, c) == 0) continue;
            Rat f = m.at(i, c);
            for (std::size_t j = c; j < m.cols; ++j) m.at(i, j) -= f * m.at(r, j);
        }
        pivots.push_back(c);
        ++r;
    }
    return pivots;
}

}  // namespace

std::size_t rank(const RatMat& m) {
    RatMat w = m;
    return row_echelon(w).size();
}

std::size_t rank(const IntMat& m) { return rank(m.to_rat()); }

Rat determinant(const RatMat& m) {
    if (m.rows != m.cols) throw Error("determinant: not square");
    RatMat w = m;
    Rat det = 1;
    for (std::size_t c = 0; c < w.cols; ++c) {
        std::size_t p = c;
        while (p < w.rows && w.at(p, c) == 0) ++p;
        if (p == w.rows) return Rat(0);
        if (p != c) {
            for (std::size_t j = 0; j < w.cols; ++j) std::swap(w.at(p, j), w.at(c, j));
            det = -det;
        }
        det *= w.at(c, c);
        Rat inv = 1 / w.at(c, c);
        for (std::size_t i = c + 1; i < w.rows; ++i) {
            if (w.at(i, c) == 0) continue;
            Rat f = w.at(i, c) * inv;
            for (std::size_t j = c; j < w.cols; ++j) w.at(i, j) -= f * w.at(c, j);
        }
    }
    return det;
}

Int determinant(const IntMat& m) {
    Rat d = determinant(m.to_rat());
    if (d.get_den() != 1) throw InternalError("integer determinant not integral");
    return d.get_num();
}

std::optional<RatVec> solve_full_col_rank(const RatMat& a, const RatVec& b) {
    RatMat rhs(b.size(), 1);
    for (std::size_t i = 0; i < b.size(); ++i) rhs.at(i, 0) = b[i];
    auto sol = solve_full_col_rank(a, rhs);
    if (!sol) return std::nullopt;
    return sol->column(0);
}

std::optional<RatMat> solve_full_col_rank(const RatMat& a, const RatMat& b) {
    if (a.rows != b.rows) throw Error("solve: shape mismatch");
    // Augment and eliminate.
    RatMat w(a.rows, a.cols + b.cols);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) w.at(i, j) = a.at(i, j);
        for (std::size_t j = 0; j < b.cols; ++j) w.at(i, a.cols + j) = b.at(i, j);
    }
    auto pivots = row_echelon(w);
    std::size_t r = 0;
    std::vector<std::size_t> col_of_pivot;
    for (auto c : pivots) {
        if (c >= a.cols) return std::nullopt;  // pivot in RHS block: inconsistent
        col_of_pivot.push_back(c);
        ++r;
    }
    if (col_of_pivot.size() != a.cols) throw Error("solve: matrix does not have full column rank");
    // Rows beyond rank must have zero RHS.
    for (std::size_t i = pivots.size(); i < w.rows; ++i)
        for (std::size_t j = 0; j < b.cols; ++j)
            if (w.at(i, a.cols + j) != 0) return std::nullopt;
    RatMat x(a.cols, b.cols);
    for (std::size_t k = 0; k < col_of_pivot.size(); ++k)
        for (std::size_t j = 0; j < b.cols; ++j) x.at(col_of_pivot[k], j) = w.at(k, a.cols + j);
    return x;
}

std::optional<RatMat> solve_full_col_rank(const IntMat& a, const IntMat& b) {
    return solve_full_col_rank(a.to_rat(), b.to_rat());
}

RatMat rat_inverse(const RatMat& m) {
    if (m.rows != m.cols) throw Error("inverse: not square");
    auto r = solve_full_col_rank(m, RatMat::identity(m.rows));
    if (!r) throw Error("inverse: singular matrix");
    return *r;
}

std::optional<RatVec> solve_any(const RatMat& a, const RatVec& b) {
    RatMat w(a.rows, a.cols + 1);
    for (std::size_t i = 0; i < a.rows; ++i) {
        for (std::size_t j = 0; j < a.cols; ++j) w.at(i, j) = a.at(i, j);
        w.at(i, a.cols) = b[i];
    }
    auto pivots = row_echelon(w);
    RatVec x(a.cols, Rat(0));
    for (std::size_t k = 0; k < pivots.size(); ++k) {
        if (pivots[k] == a.cols) return std::nullopt;  // inconsistent
        x[pivots[k]] = w.at(k, a.cols);
    }
    return x;
}

RatMat rat_kernel(const RatMat& m) {
    RatMat w = m;
    auto pivots = row_echelon(w);
    std::vector<bool> is_pivot(m.cols, false);
    for (auto c : pivots) is_pivot[c] = true;
    std::vector<RatVec> basis;
    for (std::size_t c = 0; c < m.cols; ++c) {
        if (is_pivot[c]) continue;
        RatVec v(m.cols, Rat(0));
        v[c] = 1;
        for (std::size_t k = 0; k < pivots.size(); ++k) v[pivots[k]] = -w.at(k, c);
        basis.push_back(v);
    }
    return RatMat::from_columns(m.cols, basis);
}

bool is_integral(const RatVec& v) {
    for (const auto& x : v)
        if (x.get_den() != 1) return false;
    return true;
}

bool is_integral(const RatMat& m) {
    for (const auto& x : m.data)
        if (x.get_den() != 1) return false;
    return true;
}

IntVec to_int(const RatVec& v) {
    IntVec out(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (v[i].get_den() != 1) throw Error("to_int: non-integral entry " + rat_to_string(v[i]));
        out[i] = v[i].get_num();
    }
    return out;
}

IntMat to_int(const RatMat& m) {
    IntMat out(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        if (m.data[i].get_den() != 1) throw Error("to_int: non-integral entry");
        out.data[i] = m.data[i].get_num();
    }
    return out;
}

// -- Hermite normal form ----------------------------------------------------

namespace {

void negate_column(IntMat& m, std::size_t c) {
    for (std::size_t r = 0; r < m.rows; ++r) m.at(r, c) = -m.at(r, c);
}

void swap_columns(IntMat& m, std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t r = 0; r < m.rows; ++r) std::swap(m.at(r, a), m.at(r, b));
}

// col_a -= q * col_b
void axpy_column(IntMat& m, std::size_t a, std::size_t b, const Int& q) {
    if (q == 0) return;
    for (std::size_t r = 0; r < m.rows; ++r) m.at(r, a) -= q * m.at(r, b);
}

}  // namespace

HnfResult hnf(const IntMat& m) {
    IntMat h = m;
    IntMat u = IntMat::identity(m.cols);
    std::size_t pivot_col = 0;
    for (std::size_t i = 0; i < h.rows && pivot_col < h.cols; ++i) {
        // Euclid across columns pivot_col.. on row i until one nonzero remains.
        while (true) {
            std::size_t best = h.cols;
            for (std::size_t j = pivot_col; j < h.cols; ++j) {
                if (h.at(i, j) == 0) continue;
                if (best == h.cols || cmp(abs(h.at(i, j)), abs(h.at(i, best))) < 0) best = j;
            }
            if (best == h.cols) break;  // row all zero from pivot_col on
            swap_columns(h, pivot_col, best);
            swap_columns(u, pivot_col, best);
            bool reduced_all = true;
            for (std::size_t j = pivot_col + 1; j < h.cols; ++j) {
                if (h.at(i, j) == 0) continue;
                Int q = int_fdiv(h.at(i, j), h.at(i, pivot_col));
                axpy_column(h, j, pivot_col, q);
                axpy_column(u, j, pivot_col, q);
                if (h.at(i, j) != 0) reduced_all = false;
            }
            if (reduced_all) break;
        }
        if (h.at(i, pivot_col) == 0) continue;  // no pivot in this row
        if (h.at(i, pivot_col) < 0) {
            negate_column(h, pivot_col);
            negate_column(u, pivot_col);
        }
        // Reduce entries left of the pivot in its row into [0, pivot).
        for (std::size_t j = 0; j < pivot_col; ++j) {
            Int q = int_fdiv(h.at(i, j), h.at(i, pivot_col));
            axpy_column(h, j, pivot_col, q);
            axpy_column(u, j, pivot_col, q);
        }
        ++pivot_col;
    }
    return {h, u};
}

// -- Smith normal form ------------------------------------------------------

namespace {

void swap_rows(IntMat& m, std::size_t a, std::size_t b) {
    if (a == b) return;
    for (std::size_t c = 0; c < m.cols; ++c) std::swap(m.at(a, c), m.at(b, c));
}

void negate_row(IntMat& m, std::size_t r) {
    for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = -m.at(r, c);
}

// row_a -= q * row_b
void axpy_row(IntMat& m, std::size_t a, std::size_t b, const Int& q) {
    if (q == 0) return;
    for (std::size_t c = 0; c < m.cols; ++c) m.at(a, c) -= q * m.at(b, c);
}

}  // namespace

SnfResult snf(const IntMat& m) {
    IntMat d = m;
    IntMat u = IntMat::identity(m.rows);
    IntMat v = IntMat::identity(m.cols);
    std::size_t n = std::min(m.rows, m.cols);
    for (std::size_t k = 0; k < n; ++k) {
        while (true) {
            // Find the smallest nonzero |entry| in the trailing block.
            std::size_t pr = m.rows, pc = m.cols;
            for (std::size_t i = k; i < m.rows; ++i)
                for (std::size_t j = k; j < m.cols; ++j) {
                    if (d.at(i, j) == 0) continue;
                    if (pr == m.rows || cmp(abs(d.at(i, j)), abs(d.at(pr, pc))) < 0) {
                        pr = i;
                        pc = j;
                    }
                }
            if (pr == m.rows) break;  // trailing block zero
            swap_rows(d, k, pr);
            swap_rows(u, k, pr);
            swap_columns(d, k, pc);
            swap_columns(v, k, pc);
            if (d.at(k, k) < 0) {
                negate_row(d, k);
                negate_row(u, k);
            }
            bool clean = true;
            for (std::size_t i = k + 1; i < m.rows; ++i) {
                Int q = int_fdiv(d.at(i, k), d.at(k, k));
                axpy_row(d, i, k, q);
                axpy_row(u, i, k, q);
                if (d.at(i, k) != 0) clean = false;
            }
            for (std::size_t j = k + 1; j < m.cols; ++j) {
                Int q = int_fdiv(d.at(k, j), d.at(k, k));
                axpy_column(d, j, k, q);
                axpy_column(v, j, k, q);
                if (d.at(k, j) != 0) clean = false;
            }
            if (!clean) continue;
            // Enforce divisibility d_k | entries of the trailing block.
            bool fixed = false;
            for (std::size_t i = k + 1; i < m.rows && !fixed; ++i)
                for (std::size_t j = k + 1; j < m.cols && !fixed; ++j)
                    if (d.at(i, j) % d.at(k, k) != 0) {
                        axpy_row(d, k, i, Int(-1));  // add row i into row k
                        axpy_row(u, k, i, Int(-1));
                        fixed = true;
                    }
            if (!fixed) break;
        }
    }
    return {d, u, v};
}

IntMat int_kernel(const IntMat& m) {
    // Kernel columns of the HNF transform corresponding to zero columns of h.
    auto r = hnf(m);
    std::vector<IntVec> basis;
    for (std::size_t c = 0; c < r.h.cols; ++c) {
        bool zero = true;
        for (std::size_t i = 0; i < r.h.rows; ++i)
            if (r.h.at(i, c) != 0) {
                zero = false;
                break;
            }
        if (zero) basis.push_back(r.u.column(c));
    }
    IntMat k = IntMat::from_columns(m.cols, basis);
    if (k.cols == 0) return IntMat(m.cols, 0);
    return hnf(k).h;
}

bool is_unimodular(const IntMat& m) {
    if (m.rows != m.cols) return false;
    Int d = determinant(m);
    return d == 1 || d == -1;
}

}  // namespace semistable
