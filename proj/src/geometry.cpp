#include "semistable/geometry.hpp"

#include <algorithm>
#include <cstdint>
#include <set>

#include "semistable/errors.hpp"
#include "semistable/lattice.hpp"

namespace semistable {

namespace {

using Bits = std::vector<std::uint64_t>;

Bits bits_make(std::size_t n) { return Bits((n + 63) / 64, 0); }

void bits_set(Bits& b, std::size_t i) { b[i / 64] |= (std::uint64_t(1) << (i % 64)); }

Bits bits_and(const Bits& a, const Bits& b) {
    Bits r(a.size());
    for (std::size_t i = 0; i < a.size(); ++i) r[i] = a[i] & b[i];
    return r;
}

bool bits_subset(const Bits& a, const Bits& b) {  // a ⊆ b
    for (std::size_t i = 0; i < a.size(); ++i)
        if (a[i] & ~b[i]) return false;
    return true;
}

struct DdRay {
    IntVec z;   // coordinates in the working subspace
    Bits active;
};

}  // namespace

std::size_t span_rank(const std::vector<IntVec>& vectors, std::size_t dim) {
    if (vectors.empty()) return 0;
    return rank(IntMat::from_rows(vectors, dim));
}

IntMat saturated_span_basis(std::size_t dim, const std::vector<IntVec>& vectors) {
    std::vector<IntVec> nz;
    for (const auto& v : vectors)
        if (!int_vec_is_zero(v)) nz.push_back(v);
    if (nz.empty()) return IntMat(dim, 0);
    Lattice sat = saturate(Lattice::from_generators(dim, IntMat::from_columns(dim, nz)),
                           Lattice::standard(dim));
    return to_int(sat.basis());
}

DualDescription dual_cone(const std::vector<IntVec>& vectors, std::size_t dim) {
    std::vector<IntVec> vs;
    for (const auto& v : vectors) {
        if (v.size() != dim) throw Error("dual_cone: dimension mismatch");
        if (!int_vec_is_zero(v)) vs.push_back(primitive_vector(v));
    }
    DualDescription out;
    if (vs.empty()) {
        for (std::size_t i = 0; i < dim; ++i) {
            IntVec e(dim, Int(0));
            e[i] = 1;
            out.lineality.push_back(e);
        }
        return out;
    }
    IntMat a = IntMat::from_rows(vs, dim);
    IntMat k = int_kernel(a);
    for (std::size_t c = 0; c < k.cols; ++c) out.lineality.push_back(k.column(c));
    std::size_t r = dim - k.cols;  // rank of the constraint system
    if (r == 0) return out;

    // Subspace complement U = row space of a; columns of b form its basis.
    std::vector<IntVec> ub;
    {
        std::vector<RatVec> picked;
        for (const auto& row : vs) {
            picked.push_back(to_rat(row));
            if (rank(RatMat::from_columns(dim, picked)) < picked.size())
                picked.pop_back();
            else
                ub.push_back(row);
            if (ub.size() == r) break;
        }
    }
    IntMat b = IntMat::from_columns(dim, ub);
    // Constraints restricted to z-coordinates (y = b·z).
    IntMat m = mat_mul(a, b);

    // Pick r rows of m that are linearly independent to seed a simplicial cone.
    std::vector<std::size_t> seed;
    {
        std::vector<RatVec> picked;
        for (std::size_t i = 0; i < m.rows && seed.size() < r; ++i) {
            picked.push_back(to_rat(m.row(i)));
            if (rank(RatMat::from_columns(r, picked)) < picked.size())
                picked.pop_back();
            else
                seed.push_back(i);
        }
    }
    if (seed.size() != r) throw InternalError("dual_cone: seed selection failed");

    std::size_t ncons = m.rows;
    std::vector<IntVec> cons(ncons);
    for (std::size_t i = 0; i < ncons; ++i) cons[i] = m.row(i);

    // Initial rays: columns of the inverse of the seed block.
    std::vector<DdRay> rays;
    {
        RatMat block(r, r);
        for (std::size_t i = 0; i < r; ++i)
            for (std::size_t j = 0; j < r; ++j) block.at(i, j) = Rat(m.at(seed[i], j));
        RatMat inv = rat_inverse(block);
        for (std::size_t c = 0; c < r; ++c) {
            DdRay ray;
            ray.z = primitive_vector(inv.column(c));
            ray.active = bits_make(ncons);
            rays.push_back(ray);
        }
    }
    std::vector<bool> processed(ncons, false);
    auto mark_active = [&](DdRay& ray) {
        ray.active = bits_make(ncons);
        for (std::size_t i = 0; i < ncons; ++i)
            if (processed[i] && dot(cons[i], ray.z) == 0) bits_set(ray.active, i);
    };
    for (auto i : seed) processed[i] = true;
    for (auto& ray : rays) mark_active(ray);

    const std::size_t ray_limit = 65536;
    for (std::size_t ci = 0; ci < ncons; ++ci) {
        if (processed[ci]) continue;
        const IntVec& h = cons[ci];
        std::vector<std::size_t> plus, zero, minus;
        std::vector<Int> vals(rays.size());
        for (std::size_t j = 0; j < rays.size(); ++j) {
            vals[j] = dot(h, rays[j].z);
            if (vals[j] > 0)
                plus.push_back(j);
            else if (vals[j] == 0)
                zero.push_back(j);
            else
                minus.push_back(j);
        }
        processed[ci] = true;
        if (minus.empty()) {
            for (auto j : zero) bits_set(rays[j].active, ci);
            continue;
        }
        std::vector<DdRay> next;
        for (auto j : plus) next.push_back(rays[j]);
        for (auto j : zero) {
            bits_set(rays[j].active, ci);
            next.push_back(rays[j]);
        }
        // Combine adjacent (plus, minus) pairs. Adjacency: no third extreme ray's
        // active set contains the pair's common active set.
        for (auto p : plus)
            for (auto q : minus) {
                Bits common = bits_and(rays[p].active, rays[q].active);
                bool adjacent = true;
                for (std::size_t w = 0; w < rays.size(); ++w) {
                    if (w == p || w == q) continue;
                    if (bits_subset(common, rays[w].active)) {
                        adjacent = false;
                        break;
                    }
                }
                if (!adjacent) continue;
                IntVec comb(r);
                for (std::size_t t = 0; t < r; ++t)
                    comb[t] = vals[p] * rays[q].z[t] - vals[q] * rays[p].z[t];
                DdRay nr;
                nr.z = primitive_vector(comb);
                mark_active(nr);
                next.push_back(nr);
            }
        // Dedupe proportional rays (combinations from distinct pairs may coincide).
        std::sort(next.begin(), next.end(),
                  [](const DdRay& x, const DdRay& y) { return lex_less(x.z, y.z); });
        next.erase(std::unique(next.begin(), next.end(),
                               [](const DdRay& x, const DdRay& y) { return x.z == y.z; }),
                   next.end());
        rays = std::move(next);
        if (rays.size() > ray_limit) throw EnumerationLimit("dual_cone: ray explosion");
    }

    std::vector<IntVec> result;
    for (const auto& ray : rays) result.push_back(primitive_vector(mat_apply(b, ray.z)));
    std::sort(result.begin(), result.end(), lex_less);
    result.erase(std::unique(result.begin(), result.end()), result.end());
    out.rays = result;
    return out;
}

std::vector<IntVec> extreme_rays(const std::vector<IntVec>& vectors, std::size_t dim) {
    std::vector<IntVec> gens;
    for (const auto& v : vectors)
        if (!int_vec_is_zero(v)) gens.push_back(primitive_vector(v));
    std::sort(gens.begin(), gens.end(), lex_less);
    gens.erase(std::unique(gens.begin(), gens.end()), gens.end());
    if (gens.empty()) return {};
    std::size_t d = span_rank(gens, dim);
    DualDescription dual = dual_cone(gens, dim);
    if (span_rank(dual.rays, dim) + dual.lineality.size() != dim)
        throw Error("extreme_rays: cone contains a line");
    std::vector<IntVec> out;
    (void)d;
    for (const auto& g : gens) {
        std::vector<IntVec> active = dual.lineality;
        for (const auto& a : dual.rays)
            if (dot(a, g) == 0) active.push_back(a);
        if (span_rank(active, dim) == dim - 1) out.push_back(g);
    }
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

bool is_pointed(const std::vector<IntVec>& generators, std::size_t dim) {
    for (const auto& g : generators)
        if (int_vec_is_zero(g)) return false;
    DualDescription d = dual_cone(generators, dim);
    std::vector<IntVec> all = d.lineality;
    all.insert(all.end(), d.rays.begin(), d.rays.end());
    return span_rank(all, dim) == dim;
}

std::vector<IntVec> facet_normals(const std::vector<IntVec>& generators, std::size_t dim) {
    DualDescription d = dual_cone(generators, dim);
    if (!d.lineality.empty()) throw Error("facet_normals: generators do not span the chart");
    return d.rays;
}

std::vector<IntVec> rays_from_inequalities(const std::vector<IntVec>& normals, std::size_t dim) {
    DualDescription d = dual_cone(normals, dim);
    if (!d.lineality.empty()) throw Error("rays_from_inequalities: cone contains a line");
    return d.rays;
}

// -- Fourier–Motzkin lattice point enumeration --------------------------------

namespace {

struct FmSystem {
    RatMat a;
    RatVec b;
};

// Eliminates the last variable of {x : a·x ≥ b}.
FmSystem fm_eliminate_last(const FmSystem& s) {
    std::size_t n = s.a.cols;
    std::vector<RatVec> rows_pos, rows_neg, rows_zero;
    std::vector<Rat> b_pos, b_neg, b_zero;
    for (std::size_t i = 0; i < s.a.rows; ++i) {
        RatVec row(n);
        for (std::size_t j = 0; j < n; ++j) row[j] = s.a.at(i, j);
        const Rat& c = row[n - 1];
        if (c > 0) {
            rows_pos.push_back(row);
            b_pos.push_back(s.b[i]);
        } else if (c < 0) {
            rows_neg.push_back(row);
            b_neg.push_back(s.b[i]);
        } else {
            rows_zero.push_back(row);
            b_zero.push_back(s.b[i]);
        }
    }
    std::vector<RatVec> out_rows;
    RatVec out_b;
    for (std::size_t i = 0; i < rows_zero.size(); ++i) {
        RatVec r(rows_zero[i].begin(), rows_zero[i].end() - 1);
        out_rows.push_back(r);
        out_b.push_back(b_zero[i]);
    }
    // pos: x_n ≥ (b - a'·x')/c ; neg: x_n ≤ (b - a'·x')/c. Combine each pair.
    for (std::size_t i = 0; i < rows_pos.size(); ++i)
        for (std::size_t j = 0; j < rows_neg.size(); ++j) {
            Rat ci = rows_pos[i][n - 1];
            Rat cj = -rows_neg[j][n - 1];
            RatVec r(n - 1);
            for (std::size_t t = 0; t + 1 < n; ++t)
                r[t] = rows_pos[i][t] * cj + rows_neg[j][t] * ci;
            out_rows.push_back(r);
            out_b.push_back(b_pos[i] * cj + b_neg[j] * ci);
        }
    FmSystem out;
    out.a = RatMat(out_rows.size(), n - 1);
    for (std::size_t i = 0; i < out_rows.size(); ++i)
        for (std::size_t j = 0; j + 1 < n; ++j) out.a.at(i, j) = out_rows[i][j];
    out.b = out_b;
    return out;
}

void fm_enumerate(const std::vector<FmSystem>& chain, std::size_t level, RatVec& partial,
                  std::vector<IntVec>& out, std::size_t limit, std::size_t& seen) {
    // chain[k] is the system in variables x_1..x_k; level counts down.
    const FmSystem& s = chain[level];
    // Bounds for x_level given partial assignment of x_1..x_{level-1}.
    bool has_lo = false, has_hi = false;
    Rat lo, hi;
    for (std::size_t i = 0; i < s.a.rows; ++i) {
        Rat c = s.a.at(i, level - 1);
        Rat rest = s.b[i];
        for (std::size_t j = 0; j + 1 < level; ++j) rest -= s.a.at(i, j) * partial[j];
        if (c > 0) {
            Rat bound = rest / c;
            if (!has_lo || bound > lo) {
                lo = bound;
                has_lo = true;
            }
        } else if (c < 0) {
            Rat bound = rest / c;
            if (!has_hi || bound < hi) {
                hi = bound;
                has_hi = true;
            }
        } else if (rest > 0) {
            return;  // infeasible at this level
        }
    }
    if (!has_lo || !has_hi) throw Error("polytope_lattice_points: unbounded polytope");
    for (Int x = rat_ceil(lo); x <= rat_floor(hi); ++x) {
        if (++seen > limit) throw EnumerationLimit("polytope_lattice_points: limit exceeded");
        partial[level - 1] = Rat(x);
        if (level == chain.size() - 1) {
            IntVec pt(chain.size() - 1);
            for (std::size_t j = 0; j + 1 < chain.size(); ++j) pt[j] = partial[j].get_num();
            out.push_back(pt);
        } else {
            fm_enumerate(chain, level + 1, partial, out, limit, seen);
        }
    }
}

}  // namespace

std::vector<IntVec> polytope_lattice_points(const RatMat& a, const RatVec& b, std::size_t limit) {
    std::size_t n = a.cols;
    if (n == 0) {
        // Zero-dimensional: feasible iff all b_i ≤ 0; the single point is ().
        for (const auto& bi : b)
            if (bi > 0) return {};
        return {IntVec{}};
    }
    std::vector<FmSystem> chain(n + 1);
    chain[n] = {a, b};
    for (std::size_t k = n; k >= 1; --k) {
        chain[k - 1] = fm_eliminate_last(chain[k]);
        if (chain[k - 1].a.rows > 100000)
            throw EnumerationLimit("polytope_lattice_points: FM blowup");
    }
    // Feasibility of the fully eliminated system (0 variables).
    for (const auto& bi : chain[0].b)
        if (bi > 0) return {};
    std::vector<IntVec> out;
    RatVec partial(n, Rat(0));
    std::size_t seen = 0;
    fm_enumerate(chain, 1, partial, out, limit, seen);
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

std::vector<IntVec> parallelepiped_points(const IntMat& v) {
    if (v.rows != v.cols) throw Error("parallelepiped_points: not square");
    std::size_t n = v.rows;
    Int det = determinant(v);
    if (det == 0) throw Error("parallelepiped_points: singular matrix");
    // Points x = V·t, t in [0,1)^n, x integral: inequalities on x via t = V⁻¹x:
    // 0 ≤ (V⁻¹x)_i < 1. Use closed form with strictness handled by filtering.
    RatMat vinv = rat_inverse(v.to_rat());
    RatVec b;
    RatMat a(2 * n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            a.at(i, j) = vinv.at(i, j);         // t_i ≥ 0
            a.at(n + i, j) = -vinv.at(i, j);    // t_i ≤ 1
        }
        b.push_back(Rat(0));
    }
    for (std::size_t i = 0; i < n; ++i) b.push_back(Rat(-1));
    std::size_t limit = 1000000;
    auto pts = polytope_lattice_points(a, b, limit);
    std::vector<IntVec> out;
    for (const auto& x : pts) {
        RatVec t = mat_apply(vinv, to_rat(x));
        bool ok = true;
        for (const auto& ti : t)
            if (ti < 0 || ti >= 1) {
                ok = false;
                break;
            }
        if (ok && !int_vec_is_zero(x)) out.push_back(x);
    }
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

// -- Hilbert basis (test-oracle grade) ----------------------------------------

namespace {

// Recursive pulling triangulation of a pointed cone given by extreme rays.
void triangulate_rec(const std::vector<IntVec>& rays, std::size_t dim,
                     std::vector<std::vector<IntVec>>& out) {
    std::size_t d = span_rank(rays, dim);
    if (rays.size() == d) {
        out.push_back(rays);
        return;
    }
    // Pull at the lex-least ray: join it with the triangulations of the facets
    // not containing it.
    IntVec apex = rays[0];
    std::vector<IntVec> normals = dual_cone(rays, dim).rays;  // valid in span via activity
    // Facets of the cone within its span: faces cut by normals active on a
    // maximal proper subset. Use supports: for each normal, the subset of rays
    // it annihilates; a facet is such a subset of span rank d-1.
    for (const auto& nrm : normals) {
        std::vector<IntVec> fset;
        bool contains_apex = false;
        for (const auto& r : rays)
            if (dot(nrm, r) == 0) {
                fset.push_back(r);
                if (r == apex) contains_apex = true;
            }
        if (contains_apex) continue;
        if (span_rank(fset, dim) != d - 1) continue;
        std::vector<std::vector<IntVec>> sub;
        triangulate_rec(fset, dim, sub);
        for (auto& simplex : sub) {
            simplex.push_back(apex);
            out.push_back(simplex);
        }
    }
}

}  // namespace

std::vector<IntVec> hilbert_basis(const std::vector<IntVec>& rays, std::size_t dim,
                                  std::size_t limit) {
    std::vector<IntVec> prim;
    for (const auto& r : rays)
        if (!int_vec_is_zero(r)) prim.push_back(primitive_vector(r));
    std::sort(prim.begin(), prim.end(), lex_less);
    prim.erase(std::unique(prim.begin(), prim.end()), prim.end());
    if (prim.empty()) return {};
    if (!is_pointed(prim, dim)) throw Error("hilbert_basis: cone not pointed");

    std::size_t d = span_rank(prim, dim);
    // Work inside the saturated span lattice (Z^dim ∩ span) so the simplex
    // parallelepipeds are square in those coordinates.
    Lattice sat =
        saturate(Lattice::from_generators(dim, IntMat::from_columns(dim, prim)),
                 Lattice::standard(dim));
    const RatMat& sbr = sat.basis();
    // Candidates: ray primitives plus parallelepiped points of each simplex of
    // a triangulation, all expressed in span coordinates.
    auto span_coords = [&](const IntVec& x) {
        auto c = solve_full_col_rank(sbr, to_rat(x));
        if (!c) throw InternalError("hilbert_basis: point outside span");
        return *c;
    };
    std::vector<std::vector<IntVec>> simplices;
    triangulate_rec(prim, dim, simplices);
    std::set<IntVec> cand;
    for (const auto& r : prim) cand.insert(r);
    for (const auto& simplex : simplices) {
        IntMat vmat(d, d);
        for (std::size_t c = 0; c < simplex.size(); ++c) {
            RatVec sc = span_coords(simplex[c]);
            if (!is_integral(sc)) throw InternalError("hilbert_basis: ray not in span lattice");
            for (std::size_t r = 0; r < d; ++r) vmat.at(r, c) = sc[r].get_num();
        }
        for (const auto& p : parallelepiped_points(vmat)) {
            // Back to chart coordinates.
            IntVec x = to_int(mat_apply(sbr, to_rat(p)));
            cand.insert(x);
            if (cand.size() > limit) throw EnumerationLimit("hilbert_basis: limit exceeded");
        }
    }
    // Filter to irreducible elements: p is reducible iff the polytope
    // {s : s in cone, p - s in cone} has a lattice point other than 0 and p.
    std::vector<IntVec> normals = dual_cone(prim, dim).rays;
    std::vector<IntVec> lin_eqs;  // span constraints: n·x = 0 for n ⊥ span
    {
        IntMat tr = IntMat::from_rows(prim, dim);
        IntMat k = int_kernel(tr);
        for (std::size_t c = 0; c < k.cols; ++c) lin_eqs.push_back(k.column(c));
    }
    auto in_cone = [&](const IntVec& x) {
        for (const auto& e : lin_eqs)
            if (dot(e, x) != 0) return false;
        for (const auto& nrm : normals)
            if (dot(nrm, x) < 0) return false;
        return true;
    };
    std::vector<IntVec> basis;
    for (const auto& p : cand) {
        // Enumerate candidate summands s ≤ p within the candidate set closure:
        // any decomposition p = s + s' has both parts in the cone; it suffices
        // to look for a candidate-or-smaller lattice point via the polytope.
        std::size_t nrows = 2 * (normals.size() + lin_eqs.size());
        RatMat a(nrows, dim);
        RatVec b(nrows, Rat(0));
        std::size_t row = 0;
        for (const auto& nrm : normals) {
            for (std::size_t j = 0; j < dim; ++j) a.at(row, j) = Rat(nrm[j]);  // n·s ≥ 0
            ++row;
            for (std::size_t j = 0; j < dim; ++j) a.at(row, j) = Rat(-nrm[j]);  // n·s ≤ n·p
            b[row] = -dot(to_rat(nrm), p);
            ++row;
        }
        for (const auto& e : lin_eqs) {
            for (std::size_t j = 0; j < dim; ++j) a.at(row, j) = Rat(e[j]);
            ++row;
            for (std::size_t j = 0; j < dim; ++j) a.at(row, j) = Rat(-e[j]);
            ++row;
        }
        bool reducible = false;
        for (const auto& s : polytope_lattice_points(a, b, limit)) {
            if (int_vec_is_zero(s) || s == p) continue;
            IntVec rest(dim);
            for (std::size_t j = 0; j < dim; ++j) rest[j] = p[j] - s[j];
            if (in_cone(rest) && !int_vec_is_zero(rest)) {
                reducible = true;
                break;
            }
        }
        if (!reducible) basis.push_back(p);
    }
    std::sort(basis.begin(), basis.end(), lex_less);
    return basis;
}

}  // namespace semistable
