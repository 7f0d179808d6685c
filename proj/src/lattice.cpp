#include "semistable/lattice.hpp"

namespace semistable {

namespace {

// Clears denominators, HNF-reduces, drops zero columns, scales back.
RatMat canonical_basis(std::size_t chart_dim, const RatMat& generators) {
    if (generators.rows != chart_dim) throw Error("lattice generators: chart dimension mismatch");
    Int den = 1;
    for (const auto& x : generators.data) den = int_lcm(den, x.get_den());
    IntMat scaled(generators.rows, generators.cols);
    for (std::size_t i = 0; i < generators.data.size(); ++i) {
        Rat t = generators.data[i] * Rat(den);
        scaled.data[i] = t.get_num();
    }
    IntMat h = hnf(scaled).h;
    std::size_t nonzero = 0;
    for (std::size_t c = 0; c < h.cols; ++c) {
        bool zero = true;
        for (std::size_t r = 0; r < h.rows; ++r)
            if (h.at(r, c) != 0) {
                zero = false;
                break;
            }
        if (zero) break;  // zero columns are rightmost by the HNF convention
        ++nonzero;
    }
    RatMat basis(chart_dim, nonzero);
    for (std::size_t c = 0; c < nonzero; ++c)
        for (std::size_t r = 0; r < chart_dim; ++r) basis.at(r, c) = make_rat(h.at(r, c), den);
    return basis;
}

}  // namespace

Lattice Lattice::standard(std::size_t chart_dim) {
    Lattice l;
    l.chart_dim_ = chart_dim;
    l.basis_ = RatMat::identity(chart_dim);
    return l;
}

Lattice Lattice::zero(std::size_t chart_dim) {
    Lattice l;
    l.chart_dim_ = chart_dim;
    l.basis_ = RatMat(chart_dim, 0);
    return l;
}

Lattice Lattice::from_generators(std::size_t chart_dim, const RatMat& generators) {
    Lattice l;
    l.chart_dim_ = chart_dim;
    l.basis_ = canonical_basis(chart_dim, generators);
    return l;
}

Lattice Lattice::from_generators(std::size_t chart_dim, const IntMat& generators) {
    return from_generators(chart_dim, generators.to_rat());
}

bool Lattice::is_standard() const { return basis_ == RatMat::identity(chart_dim_); }

std::optional<RatVec> Lattice::span_coords(const RatVec& v) const {
    if (v.size() != chart_dim_) throw Error("span_coords: dimension mismatch");
    if (rank() == 0) {
        if (!rat_vec_is_zero(v)) return std::nullopt;
        return RatVec{};
    }
    return solve_full_col_rank(basis_, v);
}

bool Lattice::contains(const RatVec& v) const {
    auto c = span_coords(v);
    return c && is_integral(*c);
}

bool Lattice::contains_lattice(const Lattice& sub) const {
    if (sub.chart_dim() != chart_dim_) return false;
    for (std::size_t c = 0; c < sub.basis().cols; ++c)
        if (!contains(sub.basis().column(c))) return false;
    return true;
}

Int lattice_index(const Lattice& sub, const Lattice& sup) {
    if (sub.chart_dim() != sup.chart_dim() || sub.rank() != sup.rank())
        throw NotSublattice("lattice_index: rank or chart mismatch");
    if (!sup.contains_lattice(sub)) throw NotSublattice("lattice_index: not a sublattice");
    if (sub.rank() == 0) return Int(1);
    auto change = solve_full_col_rank(sup.basis(), sub.basis());
    if (!change) throw NotSublattice("lattice_index: sublattice not in span");
    Rat d = determinant(*change);
    if (d == 0) throw InternalError("lattice_index: degenerate change of basis");
    if (d.get_den() != 1) throw InternalError("lattice_index: non-integral index");
    Int num = d.get_num();
    return num < 0 ? Int(-num) : num;
}

Lattice saturate(const Lattice& sub, const Lattice& ambient) {
    if (sub.chart_dim() != ambient.chart_dim()) throw Error("saturate: chart mismatch");
    if (sub.rank() == 0) return Lattice::zero(sub.chart_dim());
    // Coordinates of sub's span inside ambient's basis.
    auto coords = solve_full_col_rank(ambient.basis(), sub.basis());
    if (!coords) throw Error("saturate: sublattice not contained in ambient span");
    // y in Z^{rank(ambient)} lies in span(coords) iff N·y = 0 where the rows of
    // N span the orthogonal complement of the column span.
    RatMat n = rat_kernel(coords->transpose()).transpose();
    IntMat y_basis;
    if (n.rows == 0) {
        y_basis = IntMat::identity(ambient.rank());
    } else {
        Int den = 1;
        for (const auto& x : n.data) den = int_lcm(den, x.get_den());
        IntMat ni(n.rows, n.cols);
        for (std::size_t i = 0; i < n.data.size(); ++i) {
            Rat t = n.data[i] * Rat(den);
            ni.data[i] = t.get_num();
        }
        y_basis = int_kernel(ni);
    }
    RatMat gen = mat_mul(ambient.basis(), y_basis.to_rat());
    return Lattice::from_generators(sub.chart_dim(), gen);
}

Lattice image_lattice(const IntMat& f, const Lattice& l) {
    if (f.cols != l.chart_dim()) throw Error("image_lattice: shape mismatch");
    RatMat gen = mat_mul(f.to_rat(), l.basis());
    return Lattice::from_generators(f.rows, gen);
}

Lattice preimage_lattice(const IntMat& f, const Lattice& source, const Lattice& target_sub) {
    if (f.cols != source.chart_dim()) throw Error("preimage_lattice: source shape mismatch");
    if (f.rows != target_sub.chart_dim()) throw Error("preimage_lattice: target shape mismatch");
    if (source.rank() == 0) return Lattice::zero(source.chart_dim());
    // x = S·y with y in Z^{rs}; f·S·y = T·z with z in Z^{rt}.
    RatMat fs = mat_mul(f.to_rat(), source.basis());
    std::size_t rs = source.rank(), rt = target_sub.rank();
    RatMat m(f.rows, rs + rt);
    for (std::size_t i = 0; i < f.rows; ++i) {
        for (std::size_t j = 0; j < rs; ++j) m.at(i, j) = fs.at(i, j);
        for (std::size_t j = 0; j < rt; ++j) m.at(i, rs + j) = -target_sub.basis().at(i, j);
    }
    Int den = 1;
    for (const auto& x : m.data) den = int_lcm(den, x.get_den());
    IntMat mi(m.rows, m.cols);
    for (std::size_t i = 0; i < m.data.size(); ++i) {
        Rat t = m.data[i] * Rat(den);
        mi.data[i] = t.get_num();
    }
    IntMat k = int_kernel(mi);
    // Project kernel onto the y block.
    IntMat y(rs, k.cols);
    for (std::size_t i = 0; i < rs; ++i)
        for (std::size_t j = 0; j < k.cols; ++j) y.at(i, j) = k.at(i, j);
    RatMat gen = mat_mul(source.basis(), y.to_rat());
    return Lattice::from_generators(source.chart_dim(), gen);
}

PrimitivePoint primitive_of(const RatVec& v, const Lattice& l) {
    if (rat_vec_is_zero(v)) throw ZeroVector("primitive_of: zero vector");
    auto coords = l.span_coords(v);
    if (!coords) throw Error("primitive_of: vector not in lattice span");
    IntVec p = primitive_vector(*coords);
    Rat multiple;
    for (std::size_t i = 0; i < p.size(); ++i)
        if (p[i] != 0) {
            multiple = (*coords)[i] / Rat(p[i]);
            break;
        }
    if (multiple <= 0) throw InternalError("primitive_of: nonpositive multiple");
    return {p, multiple};
}

}  // namespace semistable
