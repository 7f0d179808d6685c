#include "semistable/complex.hpp"

#include <algorithm>
#include <set>

#include "semistable/errors.hpp"

namespace semistable {

const Cone& PolyhedralComplex::cone(ConeId id) const {
    auto it = cones.find(id);
    if (it == cones.end()) throw Error("unknown cone id " + std::to_string(id));
    return it->second;
}

std::vector<ConeId> PolyhedralComplex::ids() const {
    std::vector<ConeId> out;
    for (const auto& [id, c] : cones) out.push_back(id);
    return out;
}

ConeId PolyhedralComplex::zero_cone_id() const {
    for (const auto& [id, c] : cones)
        if (c.is_zero_cone()) return id;
    throw Error("complex has no zero cone");
}

bool PolyhedralComplex::is_face(ConeId face, ConeId parent) const {
    if (face == parent) return has_cone(face);
    return embeddings.count({face, parent}) != 0;
}

IntMat PolyhedralComplex::embedding(ConeId face, ConeId parent) const {
    if (face == parent) return IntMat::identity(cone(face).dim());
    auto it = embeddings.find({face, parent});
    if (it == embeddings.end())
        throw Error("no face relation " + std::to_string(face) + " <= " + std::to_string(parent));
    return it->second;
}

std::vector<ConeId> PolyhedralComplex::faces_of(ConeId id) const {
    std::vector<ConeId> out;
    for (const auto& [key, e] : embeddings)
        if (key.second == id) out.push_back(key.first);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ConeId> PolyhedralComplex::parents_of(ConeId id) const {
    std::vector<ConeId> out;
    for (const auto& [key, e] : embeddings)
        if (key.first == id) out.push_back(key.second);
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<ConeId> PolyhedralComplex::maximal_cones() const {
    std::vector<ConeId> out;
    for (const auto& [id, c] : cones)
        if (parents_of(id).empty()) out.push_back(id);
    return out;
}

std::vector<ConeId> PolyhedralComplex::ray_cones() const {
    std::vector<ConeId> out;
    for (const auto& [id, c] : cones)
        if (c.dim() == 1) out.push_back(id);
    return out;
}

std::vector<IntVec> PolyhedralComplex::realized_rays(ConeId face, ConeId parent) const {
    IntMat e = embedding(face, parent);
    std::vector<IntVec> out;
    for (const auto& r : cone(face).rays()) out.push_back(primitive_vector(mat_apply(e, r)));
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

ConeId PolyhedralComplex::face_with_rays(ConeId parent, const std::vector<IntVec>& rays) const {
    std::vector<IntVec> key = rays;
    std::sort(key.begin(), key.end(), lex_less);
    if (key.empty()) return zero_cone_id();
    for (ConeId f : faces_of(parent))
        if (realized_rays(f, parent) == key) return f;
    if (realized_rays(parent, parent) == key) return parent;
    return -1;
}

ConeId PolyhedralComplex::carrier(ConeId parent, const RatVec& v) const {
    const Cone& c = cone(parent);
    auto loc = contains(c, v);
    if (loc.location == Location::Outside) throw PointOutside("carrier: point outside cone");
    if (loc.location == Location::Interior) return parent;
    std::vector<IntVec> rays;
    for (auto i : loc.face->ray_indices) rays.push_back(c.rays()[i]);
    ConeId id = face_with_rays(parent, rays);
    if (id < 0) throw InternalError("carrier: face not represented in complex");
    return id;
}

// -- validation ---------------------------------------------------------------

std::vector<ComplexViolation> validate_complex(const PolyhedralComplex& c) {
    std::vector<ComplexViolation> out;
    auto violation = [&](const std::string& inv, std::vector<ConeId> ids, const std::string& d) {
        out.push_back({inv, std::move(ids), d});
    };

    // Unique zero cone.
    std::vector<ConeId> zeros;
    for (const auto& [id, cone] : c.cones)
        if (cone.is_zero_cone()) zeros.push_back(id);
    if (zeros.size() != 1)
        violation("unique-zero-cone", zeros, "expected exactly one rank-0 cone");

    // Relation sanity.
    for (const auto& [key, e] : c.embeddings) {
        auto [face, parent] = key;
        if (face == parent) {
            violation("poset-irreflexive", {face}, "self relation stored");
            continue;
        }
        if (c.embeddings.count({parent, face}))
            violation("poset-antisymmetric", {face, parent}, "both orders present");
        if (!c.has_cone(face) || !c.has_cone(parent)) {
            violation("relation-unknown-cone", {face, parent}, "relation names missing cone");
            continue;
        }
        const Cone& fc = c.cone(face);
        const Cone& pc = c.cone(parent);
        if (e.rows != pc.dim() || e.cols != fc.dim()) {
            violation("embedding-shape", {face, parent}, "matrix shape mismatch");
            continue;
        }
        if (fc.dim() > 0 && rank(e) != fc.dim()) {
            violation("embedding-injective", {face, parent}, "embedding not injective");
            continue;
        }
        // Image must be a geometric face of the parent.
        std::vector<IntVec> image;
        for (const auto& r : fc.rays()) {
            IntVec ir = mat_apply(e, r);
            if (primitive_vector(ir) != ir)
                violation("embedding-primitive", {face, parent},
                          "ray image is not primitive in the parent lattice");
            image.push_back(primitive_vector(ir));
        }
        std::sort(image.begin(), image.end(), lex_less);
        bool found = false;
        for (const auto& f : faces(pc)) {
            std::vector<IntVec> frays;
            for (auto i : f.ray_indices) frays.push_back(pc.rays()[i]);
            std::sort(frays.begin(), frays.end(), lex_less);
            if (frays == image && f.dim == fc.dim()) {
                found = true;
                break;
            }
        }
        if (!found) violation("embedding-image-face", {face, parent}, "image is not a face");
        // Lattice condition: E(Z^dim(face)) saturated in parent chart.
        Lattice img = image_lattice(e, Lattice::standard(fc.dim()));
        Lattice sat = saturate(img, Lattice::standard(pc.dim()));
        if (img != sat)
            violation("embedding-saturated", {face, parent},
                      "face lattice does not equal parent lattice on the span");
    }

    // Transitivity and commuting triangles (indexed by the middle cone).
    std::map<ConeId, std::vector<std::pair<ConeId, const IntMat*>>> up;
    for (const auto& [key, e] : c.embeddings) up[key.first].push_back({key.second, &e});
    for (const auto& [k1, e1] : c.embeddings) {
        auto it_mid = up.find(k1.second);
        if (it_mid == up.end()) continue;
        for (const auto& [sigma, e2] : it_mid->second) {
            auto rho = k1.first;
            auto it = c.embeddings.find({rho, sigma});
            if (it == c.embeddings.end()) {
                violation("poset-transitive", {rho, k1.second, sigma}, "missing composite");
                continue;
            }
            if (it->second != mat_mul(*e2, e1))
                violation("embedding-compose", {rho, k1.second, sigma},
                          "triangle does not commute");
        }
    }

    // Every geometric face represented exactly once.
    for (const auto& [id, cone] : c.cones) {
        auto geo = faces(cone);
        auto declared = c.faces_of(id);
        if (declared.size() + 1 != geo.size())
            violation("faces-represented", {id},
                      "declared faces: " + std::to_string(declared.size()) + ", geometric: " +
                          std::to_string(geo.size() - 1));
        std::set<std::vector<IntVec>> seen;
        for (ConeId f : declared) {
            auto key = c.realized_rays(f, id);
            if (!seen.insert(key).second)
                violation("faces-distinct", {f, id}, "two faces share a realization");
        }
    }
    return out;
}

// -- fan construction -----------------------------------------------------------

namespace {

struct AmbientCone {
    std::vector<IntVec> rays;  // primitive, lex-sorted, ambient coordinates
    IntMat chart;              // ambient × d, basis of Z^n ∩ span
    Cone recharted;
};

AmbientCone rechart(std::size_t ambient, const std::vector<IntVec>& generators) {
    AmbientCone out;
    out.chart = saturated_span_basis(ambient, generators);
    std::vector<IntVec> coords;
    for (const auto& g : generators) {
        if (int_vec_is_zero(g)) continue;
        auto sol = solve_full_col_rank(out.chart.to_rat(), to_rat(g));
        if (!sol || !is_integral(*sol)) throw InternalError("rechart: generator outside span lattice");
        coords.push_back(to_int(*sol));
    }
    out.recharted = Cone::make(out.chart.cols, coords);
    for (const auto& r : out.recharted.rays())
        out.rays.push_back(primitive_vector(mat_apply(out.chart, r)));
    std::sort(out.rays.begin(), out.rays.end(), lex_less);
    return out;
}

// Extreme rays of the intersection of two recharted ambient cones.
std::vector<IntVec> intersect_ambient(std::size_t ambient, const AmbientCone& a,
                                      const AmbientCone& b) {
    // Span intersection: kernel of stacked left-null systems.
    IntMat na = int_kernel(a.chart.transpose());  // columns: normals of span(a)
    IntMat nb = int_kernel(b.chart.transpose());
    std::vector<IntVec> null_rows;
    for (std::size_t c = 0; c < na.cols; ++c) null_rows.push_back(na.column(c));
    for (std::size_t c = 0; c < nb.cols; ++c) null_rows.push_back(nb.column(c));
    IntMat w;
    if (null_rows.empty()) {
        w = IntMat::identity(ambient);
    } else {
        w = int_kernel(IntMat::from_rows(null_rows, ambient));
    }
    if (w.cols == 0) return {};
    // Facet inequalities of both cones restricted to the intersection span:
    // facet row f (in chart coords) applies to x = W z with chart coords
    // solve(chart, W z); use rational pseudo-solve via chart pullback.
    std::vector<IntVec> ineqs;
    auto add_facets = [&](const AmbientCone& k) {
        if (k.recharted.is_zero_cone()) return;
        // Rows of pinv: for x in span(k), coords(x) = pinv · x.
        RatMat cm = k.chart.to_rat();
        RatMat gram = mat_mul(cm.transpose(), cm);
        RatMat pinv = mat_mul(rat_inverse(gram), cm.transpose());
        for (const auto& f : k.recharted.facets()) {
            RatVec amb = row_apply(to_rat(f), pinv);    // functional on ambient
            RatVec restricted = row_apply(amb, w.to_rat());
            if (rat_vec_is_zero(restricted)) continue;
            ineqs.push_back(primitive_vector(restricted));
        }
    };
    add_facets(a);
    add_facets(b);
    // Also require membership in both spans is already encoded by W. Rays:
    std::vector<IntVec> zrays = rays_from_inequalities(ineqs, w.cols);
    std::vector<IntVec> out;
    for (const auto& z : zrays) {
        IntVec x = mat_apply(w, z);
        // Intersection may stick outside where a facet restricted to W vanished
        // identically; filter by exact membership in both cones.
        out.push_back(primitive_vector(x));
    }
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

bool ambient_member(const AmbientCone& k, const IntVec& x) {
    // x in cone ⟺ x in span and facet-nonnegative in chart coords.
    auto sol = solve_full_col_rank(k.chart.to_rat(), to_rat(x));
    if (!sol) return false;
    if (k.recharted.is_zero_cone()) return rat_vec_is_zero(*sol);
    for (const auto& f : k.recharted.facets())
        if (dot(to_rat(f), *sol) < 0) return false;
    return true;
}

}  // namespace

PolyhedralComplex fan(std::size_t ambient_rank, const std::vector<std::vector<IntVec>>& maximal) {
    return fan(ambient_rank, maximal, nullptr);
}

PolyhedralComplex fan(std::size_t ambient_rank, const std::vector<std::vector<IntVec>>& maximal,
                      FanRealization* realization) {
    std::vector<AmbientCone> top;
    for (const auto& gens : maximal) {
        for (const auto& g : gens)
            if (g.size() != ambient_rank) throw Error("fan: generator dimension mismatch");
        top.push_back(rechart(ambient_rank, gens));
    }
    // Duplicate maximal cones are improper input.
    for (std::size_t i = 0; i < top.size(); ++i)
        for (std::size_t j = i + 1; j < top.size(); ++j)
            if (top[i].rays == top[j].rays) throw NotAFan("fan: duplicate maximal cone");

    // Pairwise intersections must be common faces.
    for (std::size_t i = 0; i < top.size(); ++i)
        for (std::size_t j = i + 1; j < top.size(); ++j) {
            std::vector<IntVec> k0 = intersect_ambient(ambient_rank, top[i], top[j]);
            std::vector<IntVec> k;
            for (const auto& x : k0)
                if (ambient_member(top[i], x) && ambient_member(top[j], x)) k.push_back(x);
            std::sort(k.begin(), k.end(), lex_less);
            for (const auto* cn : {&top[i], &top[j]}) {
                // Face of cn whose realized rays equal k.
                bool ok = false;
                for (const auto& f : faces(cn->recharted)) {
                    std::vector<IntVec> frays;
                    for (auto idx : f.ray_indices)
                        frays.push_back(
                            primitive_vector(mat_apply(cn->chart, cn->recharted.rays()[idx])));
                    std::sort(frays.begin(), frays.end(), lex_less);
                    if (frays == k) {
                        ok = true;
                        break;
                    }
                }
                if (!ok)
                    throw NotAFan("fan: cones " + std::to_string(i) + "," + std::to_string(j) +
                                  " do not meet along a common face");
            }
        }

    // Collect all distinct faces by realized ray set.
    std::map<std::vector<IntVec>, AmbientCone> cells;
    std::vector<std::set<std::vector<IntVec>>> faces_of_top(top.size());
    for (std::size_t i = 0; i < top.size(); ++i) {
        for (const auto& f : faces(top[i].recharted)) {
            std::vector<IntVec> frays;
            for (auto idx : f.ray_indices)
                frays.push_back(primitive_vector(mat_apply(top[i].chart, top[i].recharted.rays()[idx])));
            std::sort(frays.begin(), frays.end(), lex_less);
            faces_of_top[i].insert(frays);
            if (!cells.count(frays)) cells.emplace(frays, rechart(ambient_rank, frays));
        }
    }

    // Canonical ids: by (dim, realized rays).
    std::vector<const std::vector<IntVec>*> keys;
    for (const auto& [key, cell] : cells) keys.push_back(&key);
    std::sort(keys.begin(), keys.end(), [&](const auto* x, const auto* y) {
        std::size_t dx = cells.at(*x).recharted.dim(), dy = cells.at(*y).recharted.dim();
        if (dx != dy) return dx < dy;
        return *x < *y;
    });
    std::map<std::vector<IntVec>, ConeId> id_of;
    PolyhedralComplex out;
    for (std::size_t i = 0; i < keys.size(); ++i) {
        id_of[*keys[i]] = static_cast<ConeId>(i);
        out.cones[static_cast<ConeId>(i)] = cells.at(*keys[i]).recharted;
    }
    // Relations: within each maximal cone's face set, subset-of-rays order.
    std::set<std::pair<ConeId, ConeId>> rel;
    for (std::size_t i = 0; i < top.size(); ++i) {
        std::vector<const std::vector<IntVec>*> fs;
        for (const auto& k : faces_of_top[i]) fs.push_back(&k);
        for (const auto* ka : fs)
            for (const auto* kb : fs) {
                if (ka == kb) continue;
                if (std::includes(kb->begin(), kb->end(), ka->begin(), ka->end())) {
                    // containment of sorted ray lists needs exact subset test
                    bool subset = true;
                    for (const auto& r : *ka)
                        if (!std::binary_search(kb->begin(), kb->end(), r,
                                                [](const IntVec& x, const IntVec& y) {
                                                    return lex_less(x, y);
                                                })) {
                            subset = false;
                            break;
                        }
                    if (subset && *ka != *kb) rel.insert({id_of[*ka], id_of[*kb]});
                }
            }
    }
    for (const auto& [f, p] : rel) {
        const AmbientCone& fc = cells.at(*keys[f]);
        const AmbientCone& pc = cells.at(*keys[p]);
        auto e = solve_full_col_rank(pc.chart.to_rat(), fc.chart.to_rat());
        if (!e || !is_integral(*e)) throw InternalError("fan: non-integral face embedding");
        out.embeddings[{f, p}] = to_int(*e);
    }
    if (realization) {
        realization->ambient_rank = ambient_rank;
        realization->chart_basis.clear();
        for (const auto& [key, id] : id_of) realization->chart_basis[id] = cells.at(key).chart;
    }
    return out;
}

}  // namespace semistable
