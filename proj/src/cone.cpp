#include "semistable/cone.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "semistable/errors.hpp"

namespace semistable {

Cone Cone::zero() { return Cone{}; }

Cone Cone::make(std::size_t dim, const std::vector<IntVec>& generators) {
    std::vector<IntVec> gens;
    for (const auto& g : generators) {
        if (g.size() != dim) throw Error("make_cone: generator dimension mismatch");
        if (!int_vec_is_zero(g)) gens.push_back(primitive_vector(g));
    }
    std::sort(gens.begin(), gens.end(), lex_less);
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
    if (gens.empty()) {
        if (dim != 0) throw RankMismatch("make_cone: no generators but chart rank > 0");
        return zero();
    }
    if (dim == 0) throw Error("make_cone: nonzero generators in rank-0 chart");
    DualDescription dual = dual_cone(gens, dim);
    // Pointed ⇔ the dual cone is full-dimensional.
    std::vector<IntVec> dual_span = dual.lineality;
    dual_span.insert(dual_span.end(), dual.rays.begin(), dual.rays.end());
    if (span_rank(dual_span, dim) != dim)
        throw NotStrictlyConvex("make_cone: cone contains a line");
    if (span_rank(gens, dim) != dim)
        throw RankMismatch("make_cone: generators do not span the chart");
    Cone c;
    c.dim_ = dim;
    c.facets_ = dual.rays;
    for (const auto& g : gens) {
        std::vector<IntVec> active;
        for (const auto& a : c.facets_)
            if (dot(a, g) == 0) active.push_back(a);
        if (span_rank(active, dim) == dim - 1) c.rays_.push_back(g);
    }
    std::sort(c.rays_.begin(), c.rays_.end(), lex_less);
    return c;
}

Cone Cone::make_rational(std::size_t dim, const std::vector<RatVec>& generators) {
    std::vector<IntVec> gens;
    for (const auto& g : generators)
        if (!rat_vec_is_zero(g)) gens.push_back(primitive_vector(g));
    return make(dim, gens);
}

IntVec Cone::interior_point() const {
    IntVec p(dim_, Int(0));
    for (const auto& r : rays_)
        for (std::size_t i = 0; i < dim_; ++i) p[i] += r[i];
    return p;
}

std::vector<Face> faces(const Cone& c) {
    if (c.is_zero_cone()) {
        Face whole;
        whole.supporting = IntVec{};
        return {whole};
    }
    std::size_t n = c.rays().size();
    // Closure of the ray-index sets under intersection with facet zero sets.
    std::set<std::vector<std::size_t>> seen;
    std::vector<std::vector<std::size_t>> queue;
    std::vector<std::size_t> all(n);
    for (std::size_t i = 0; i < n; ++i) all[i] = i;
    queue.push_back(all);
    seen.insert(all);
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
        auto cur = queue[qi];
        for (const auto& a : c.facets()) {
            std::vector<std::size_t> sub;
            for (auto i : cur)
                if (dot(a, c.rays()[i]) == 0) sub.push_back(i);
            if (seen.insert(sub).second) queue.push_back(sub);
        }
    }
    std::vector<Face> out;
    for (const auto& idx : seen) {
        Face f;
        f.ray_indices = idx;
        std::vector<IntVec> rays;
        for (auto i : idx) rays.push_back(c.rays()[i]);
        f.dim = span_rank(rays, c.dim());
        IntVec s(c.dim(), Int(0));
        for (const auto& a : c.facets()) {
            bool vanishes = true;
            for (auto i : idx)
                if (dot(a, c.rays()[i]) != 0) {
                    vanishes = false;
                    break;
                }
            if (vanishes)
                for (std::size_t t = 0; t < c.dim(); ++t) s[t] += a[t];
        }
        f.supporting = s;
        out.push_back(f);
    }
    std::sort(out.begin(), out.end(), [](const Face& x, const Face& y) {
        if (x.dim != y.dim) return x.dim < y.dim;
        return x.ray_indices < y.ray_indices;
    });
    return out;
}

LocateResult contains(const Cone& c, const RatVec& v) {
    if (v.size() != c.dim()) throw Error("contains: dimension mismatch");
    if (c.is_zero_cone()) return {Location::Interior, std::nullopt};
    std::vector<const IntVec*> active;
    for (const auto& a : c.facets()) {
        Rat p = dot(to_rat(a), v);
        if (p < 0) return {Location::Outside, std::nullopt};
        if (p == 0) active.push_back(&a);
    }
    if (active.empty()) return {Location::Interior, std::nullopt};
    Face f;
    for (std::size_t i = 0; i < c.rays().size(); ++i) {
        bool in_face = true;
        for (const auto* a : active)
            if (dot(*a, c.rays()[i]) != 0) {
                in_face = false;
                break;
            }
        if (in_face) f.ray_indices.push_back(i);
    }
    std::vector<IntVec> rays;
    for (auto i : f.ray_indices) rays.push_back(c.rays()[i]);
    f.dim = span_rank(rays, c.dim());
    IntVec s(c.dim(), Int(0));
    for (const auto* a : active)
        for (std::size_t t = 0; t < c.dim(); ++t) s[t] += (*a)[t];
    f.supporting = s;
    return {Location::Boundary, f};
}

std::vector<std::size_t> carrier_ray_set(const Cone& c, const RatVec& v) {
    auto loc = contains(c, v);
    if (loc.location == Location::Outside) throw PointOutside("point outside cone");
    if (loc.location == Location::Interior) {
        std::vector<std::size_t> all(c.rays().size());
        for (std::size_t i = 0; i < all.size(); ++i) all[i] = i;
        return all;
    }
    return loc.face->ray_indices;
}

Int multiplicity(const Cone& c) {
    if (c.is_zero_cone()) return Int(1);
    if (!c.is_simplicial()) throw NotSimplicial("multiplicity: cone is not simplicial");
    IntMat m = IntMat::from_columns(c.dim(), c.rays());
    Int d = determinant(m);
    return d < 0 ? Int(-d) : d;
}

bool is_nonsingular(const Cone& c) {
    if (c.is_zero_cone()) return true;
    if (!c.is_simplicial()) return false;
    return multiplicity(c) == 1;
}

std::optional<IntVec> gorenstein_functional(const Cone& c) {
    if (c.is_zero_cone()) return IntVec{};
    // Solve ⟨m, r⟩ = -1 for all rays r; rays span the chart so the solution,
    // if consistent, is unique.
    RatMat a(c.rays().size(), c.dim());
    RatVec b(c.rays().size(), Rat(-1));
    for (std::size_t i = 0; i < c.rays().size(); ++i)
        for (std::size_t j = 0; j < c.dim(); ++j) a.at(i, j) = Rat(c.rays()[i][j]);
    auto sol = solve_full_col_rank(a, b);
    if (!sol || !is_integral(*sol)) return std::nullopt;
    return to_int(*sol);
}

}  // namespace semistable
