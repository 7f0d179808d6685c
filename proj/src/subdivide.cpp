#include "semistable/subdivide.hpp"

#include <algorithm>
#include <map>
#include <set>

#include "semistable/errors.hpp"

namespace semistable {

ConeId Subdivision::carrier_cone(ConeId refined_id) const {
    auto it = carrier.find(refined_id);
    if (it == carrier.end()) throw Error("subdivision: no carrier for cone " + std::to_string(refined_id));
    return it->second.first;
}

const IntMat& Subdivision::carrier_embedding(ConeId refined_id) const {
    auto it = carrier.find(refined_id);
    if (it == carrier.end()) throw Error("subdivision: no carrier for cone " + std::to_string(refined_id));
    return it->second.second;
}

std::vector<IntVec> Subdivision::realized_in_carrier(ConeId refined_id) const {
    const IntMat& b = carrier_embedding(refined_id);
    std::vector<IntVec> out;
    for (const auto& r : refined.cone(refined_id).rays()) out.push_back(primitive_vector(mat_apply(b, r)));
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

bool Subdivision::is_identity() const {
    if (refined.cones.size() != base.cones.size()) return false;
    for (const auto& [id, data] : carrier) {
        const auto& [b, e] = data;
        if (e.rows != e.cols) return false;
        if (e != IntMat::identity(e.rows)) return false;
    }
    return true;
}

bool LatticeAlteration::is_identity() const {
    for (const auto& [id, w] : witness)
        if (w != IntMat::identity(w.rows)) return false;
    return true;
}

// -- local geometry helpers ---------------------------------------------------

namespace {

std::vector<IntVec> canonical_rays(const std::vector<IntVec>& rays, std::size_t dim) {
    return extreme_rays(rays, dim);
}

// {z in face chart : E z ∈ cell}, for a full-dimensional cell of the parent
// chart. Returns canonical rays; may be any dimension.
std::vector<IntVec> restrict_cell(const std::vector<IntVec>& cell_rays, std::size_t parent_dim,
                                  const Cone& face_cone, const IntMat& e) {
    std::vector<IntVec> ineqs;
    for (const auto& a : face_cone.facets()) ineqs.push_back(a);
    for (const auto& a : facet_normals(cell_rays, parent_dim)) {
        RatVec row = row_apply(to_rat(a), e);
        if (!rat_vec_is_zero(row)) ineqs.push_back(primitive_vector(row));
    }
    return rays_from_inequalities(ineqs, face_cone.dim());
}

std::string vec_str(const IntVec& v) {
    std::string s = "(";
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + int_to_string(v[i]);
    return s + ")";
}

}  // namespace

// -- builder -------------------------------------------------------------------

namespace {

struct CellData {
    ConeId carrier = -1;
    std::vector<IntVec> rays_in_carrier;  // canonical
    IntMat chart;                         // carrier_dim × cell_dim, saturated span basis
    Cone cone;                            // recharted
};

using CellKey = std::pair<ConeId, std::vector<IntVec>>;

// Cheap per-cell sanity: carrier containment plus lattice saturation. The
// quadratic cover/disjointness checks live in verify_subdivision and run at
// API boundaries (build_subdivision, parsing, certificate verification).
bool quick_check_subdivision(const Subdivision& s, std::string* why) {
    for (const auto& [id, c] : s.refined.cones) {
        auto it = s.carrier.find(id);
        if (it == s.carrier.end()) {
            if (why) *why = "missing carrier";
            return false;
        }
        const auto& [b, e] = it->second;
        const Cone& bc = s.base.cone(b);
        if (e.rows != bc.dim() || e.cols != c.dim()) {
            if (why) *why = "carrier shape";
            return false;
        }
        for (const auto& r : c.rays())
            if (contains(bc, to_rat(mat_apply(e, r))).location == Location::Outside) {
                if (why) *why = "carrier containment";
                return false;
            }
        Lattice img = image_lattice(e, Lattice::standard(c.dim()));
        if (img != saturate(img, Lattice::standard(bc.dim()))) {
            if (why) *why = "carrier lattice saturation";
            return false;
        }
    }
    return true;
}

std::optional<Subdivision> try_build_subdivision(
    const PolyhedralComplex& base, const std::map<ConeId, std::vector<std::vector<IntVec>>>& pieces,
    std::string* why, bool deep_verify, bool check_face_consistency = true) {
    // Top cells per base cone: canonicalized input or derived from parents.
    std::map<ConeId, std::vector<std::vector<IntVec>>> cells;
    std::vector<ConeId> order = base.ids();
    std::sort(order.begin(), order.end(), [&](ConeId a, ConeId b) {
        auto da = base.cone(a).dim(), db = base.cone(b).dim();
        if (da != db) return da > db;
        return a < b;
    });
    for (ConeId id : order) {
        const Cone& c = base.cone(id);
        auto it = pieces.find(id);
        if (it != pieces.end()) {
            std::set<std::vector<IntVec>> set;
            for (const auto& raw : it->second) {
                auto can = canonical_rays(raw, c.dim());
                if (span_rank(can, c.dim()) != c.dim()) {
                    if (why) *why = "piece of cone " + std::to_string(id) + " is not full-dimensional";
                    return std::nullopt;
                }
                for (const auto& r : can)
                    if (contains(c, to_rat(r)).location == Location::Outside) {
                        if (why) *why = "piece of cone " + std::to_string(id) + " leaves its cone";
                        return std::nullopt;
                    }
                set.insert(can);
            }
            cells[id] = std::vector<std::vector<IntVec>>(set.begin(), set.end());
        } else {
            auto parents = base.parents_of(id);
            if (parents.empty()) {
                cells[id] = {c.rays()};
            } else {
                ConeId p = parents.front();
                std::set<std::vector<IntVec>> set;
                for (const auto& cell : cells.at(p)) {
                    auto r = restrict_cell(cell, base.cone(p).dim(), c, base.embedding(id, p));
                    if (span_rank(r, c.dim()) == c.dim()) set.insert(canonical_rays(r, c.dim()));
                }
                cells[id] = std::vector<std::vector<IntVec>>(set.begin(), set.end());
            }
        }
        if (cells[id].empty() && !c.is_zero_cone()) {
            if (why) *why = "cone " + std::to_string(id) + " has no covering pieces";
            return std::nullopt;
        }
        if (c.is_zero_cone()) cells[id] = {{}};
    }
    // Face consistency across every relation. Trivial when both sides are
    // whole; skipped entirely for constructions that are consistent per
    // construction (stars, induced subdivisions, maximal pieces of a global
    // function) — their outputs are covered by the boundary-level checkers.
    if (check_face_consistency)
        for (const auto& [key, e] : base.embeddings) {
            auto [rho, sigma] = key;
            const Cone& rc = base.cone(rho);
            if (cells.at(sigma).size() == 1 && cells.at(rho).size() == 1) continue;
            std::set<std::vector<IntVec>> derived;
            for (const auto& cell : cells.at(sigma)) {
                auto r = restrict_cell(cell, base.cone(sigma).dim(), rc, e);
                if (span_rank(r, rc.dim()) == rc.dim()) derived.insert(canonical_rays(r, rc.dim()));
            }
            if (rc.is_zero_cone()) derived = {{}};
            std::set<std::vector<IntVec>> have(cells.at(rho).begin(), cells.at(rho).end());
            if (derived != have) {
                if (why)
                    *why = "pieces of face " + std::to_string(rho) +
                           " disagree with restriction from cone " + std::to_string(sigma);
                return std::nullopt;
            }
        }

    // Precomputed face lookups per base cone: realized ray set → face id,
    // and rational embeddings for coordinate solves.
    std::map<ConeId, std::map<std::vector<IntVec>, ConeId>> face_lookup;
    std::map<std::pair<ConeId, ConeId>, RatMat> embedding_rat;
    for (const auto& [id, c] : base.cones) {
        std::map<std::vector<IntVec>, ConeId> lk;
        lk[base.realized_rays(id, id)] = id;
        face_lookup[id] = lk;
    }
    for (const auto& [key, e] : base.embeddings) {
        face_lookup[key.second][base.realized_rays(key.first, key.second)] = key.first;
        embedding_rat[key] = e.to_rat();
    }
    auto fast_face_key = [&](ConeId sigma, const Cone& sc,
                             const std::vector<IntVec>& frays) -> CellKey {
        std::vector<IntVec> active;
        for (const auto& a : sc.facets()) {
            bool vanish = true;
            for (const auto& r : frays)
                if (dot(a, r) != 0) {
                    vanish = false;
                    break;
                }
            if (vanish) active.push_back(a);
        }
        std::vector<IntVec> carrier_rays;
        for (const auto& r : sc.rays()) {
            bool in_face = true;
            for (const auto& a : active)
                if (dot(a, r) != 0) {
                    in_face = false;
                    break;
                }
            if (in_face) carrier_rays.push_back(r);
        }
        if (frays.empty()) carrier_rays.clear();
        auto it = face_lookup.at(sigma).find(carrier_rays);
        if (it == face_lookup.at(sigma).end())
            throw InternalError("build: carrier face not represented");
        ConeId rho = it->second;
        if (rho == sigma) return {sigma, frays};
        const RatMat& e = embedding_rat.at({rho, sigma});
        std::vector<IntVec> coords;
        for (const auto& r : frays) {
            auto sol = solve_full_col_rank(e, to_rat(r));
            if (!sol || !is_integral(*sol)) throw InternalError("build: non-integral face coords");
            coords.push_back(to_int(*sol));
        }
        std::sort(coords.begin(), coords.end(), lex_less);
        return {rho, coords};
    };

    // Collect all cells (faces of top cells), deduped by interned key.
    std::map<CellKey, int> index_of;
    std::vector<CellKey> key_of;
    std::vector<CellData> cell_data;
    auto intern = [&](const CellKey& key) {
        auto it = index_of.find(key);
        if (it != index_of.end()) return it->second;
        int idx = static_cast<int>(key_of.size());
        index_of.emplace(key, idx);
        key_of.push_back(key);
        cell_data.emplace_back();
        return idx;
    };
    std::set<std::pair<int, int>> relations;
    for (const auto& [sigma, top] : cells) {
        const Cone& sc = base.cone(sigma);
        for (const auto& cell : top) {
            if (sc.is_zero_cone()) {
                intern({sigma, {}});
                continue;
            }
            Cone cc = Cone::make(sc.dim(), cell);
            auto fs = faces(cc);
            std::vector<int> keys(fs.size());
            for (std::size_t i = 0; i < fs.size(); ++i) {
                std::vector<IntVec> frays;
                for (auto idx : fs[i].ray_indices) frays.push_back(cc.rays()[idx]);
                std::sort(frays.begin(), frays.end(), lex_less);
                keys[i] = intern(fast_face_key(sigma, sc, frays));
            }
            for (std::size_t i = 0; i < fs.size(); ++i)
                for (std::size_t j = 0; j < fs.size(); ++j) {
                    if (i == j) continue;
                    if (std::includes(fs[j].ray_indices.begin(), fs[j].ray_indices.end(),
                                      fs[i].ray_indices.begin(), fs[i].ray_indices.end()) &&
                        fs[i].ray_indices != fs[j].ray_indices)
                        relations.insert({keys[i], keys[j]});
                }
        }
    }
    // Fill cell data.
    for (std::size_t idx = 0; idx < key_of.size(); ++idx) {
        const CellKey& key = key_of[idx];
        CellData& data = cell_data[idx];
        data.carrier = key.first;
        data.rays_in_carrier = key.second;
        std::size_t cd = base.cone(key.first).dim();
        data.chart = saturated_span_basis(cd, key.second);
        RatMat chart_rat = data.chart.to_rat();
        std::vector<IntVec> coords;
        for (const auto& r : key.second) {
            auto sol = solve_full_col_rank(chart_rat, to_rat(r));
            if (!sol || !is_integral(*sol)) throw InternalError("build: cell ray outside span lattice");
            coords.push_back(to_int(*sol));
        }
        data.cone = Cone::make(data.chart.cols, coords);
    }
    // Canonical ids.
    std::vector<int> order_idx(key_of.size());
    for (std::size_t i = 0; i < order_idx.size(); ++i) order_idx[i] = static_cast<int>(i);
    std::sort(order_idx.begin(), order_idx.end(), [&](int x, int y) {
        auto dx = cell_data[x].cone.dim(), dy = cell_data[y].cone.dim();
        if (dx != dy) return dx < dy;
        return key_of[x] < key_of[y];
    });
    std::vector<ConeId> id_of(key_of.size());
    Subdivision out;
    out.base = base;
    for (std::size_t i = 0; i < order_idx.size(); ++i) {
        id_of[order_idx[i]] = static_cast<ConeId>(i);
        const CellData& d = cell_data[order_idx[i]];
        out.refined.cones[static_cast<ConeId>(i)] = d.cone;
        out.carrier[static_cast<ConeId>(i)] = {d.carrier, d.chart};
    }
    for (const auto& [ia_raw, ib_raw] : relations) {
        if (ia_raw == ib_raw) continue;
        ConeId ia = id_of[ia_raw], ib = id_of[ib_raw];
        const CellData& da = cell_data[ia_raw];
        const CellData& db = cell_data[ib_raw];
        IntMat e_base = base.embedding(key_of[ia_raw].first, key_of[ib_raw].first);
        IntMat lhs = mat_mul(e_base, da.chart);
        auto m = solve_full_col_rank(db.chart.to_rat(), lhs.to_rat());
        if (!m || !is_integral(*m)) throw InternalError("build: non-integral refined embedding");
        out.refined.embeddings[{ia, ib}] = to_int(*m);
    }
    if (deep_verify) {
        auto bad = verify_subdivision(out);
        if (!bad.empty()) {
            if (why) *why = "built subdivision fails invariant: " + bad.front().invariant + " (" +
                            bad.front().detail + ")";
            return std::nullopt;
        }
    } else if (!quick_check_subdivision(out, why)) {
        return std::nullopt;
    }
    return out;
}

// Internal constructor for algorithms whose piece lists are exact partitions
// by construction (star, induced, arrangements, maximal pieces).
Subdivision build_subdivision_internal(
    const PolyhedralComplex& base, const std::map<ConeId, std::vector<std::vector<IntVec>>>& pieces,
    bool check_face_consistency = false) {
    std::string why;
    auto s = try_build_subdivision(base, pieces, &why, false, check_face_consistency);
    if (!s) throw InternalError("subdivision assembly failed: " + why);
    return *s;
}

}  // namespace

Subdivision build_subdivision(const PolyhedralComplex& base,
                              const std::map<ConeId, std::vector<std::vector<IntVec>>>& pieces) {
    std::string why;
    auto s = try_build_subdivision(base, pieces, &why, true);
    if (!s) throw Error("build_subdivision: " + why);
    return *s;
}

Subdivision identity_subdivision(const PolyhedralComplex& base) {
    Subdivision s;
    s.base = base;
    s.refined = base;
    for (const auto& [id, c] : base.cones) s.carrier[id] = {id, IntMat::identity(c.dim())};
    return s;
}

// -- invariant checker -----------------------------------------------------------

std::vector<ComplexViolation> verify_subdivision(const Subdivision& s) {
    std::vector<ComplexViolation> out = validate_complex(s.refined);
    auto violation = [&](const std::string& inv, std::vector<ConeId> ids, const std::string& d) {
        out.push_back({inv, std::move(ids), d});
    };
    // Carrier data well-formed.
    for (const auto& [id, c] : s.refined.cones) {
        auto it = s.carrier.find(id);
        if (it == s.carrier.end()) {
            violation("carrier-missing", {id}, "refined cone has no carrier");
            continue;
        }
        auto [b, e] = it->second;
        if (!s.base.has_cone(b)) {
            violation("carrier-unknown", {id, b}, "carrier names unknown base cone");
            continue;
        }
        const Cone& bc = s.base.cone(b);
        if (e.rows != bc.dim() || e.cols != c.dim()) {
            violation("carrier-shape", {id, b}, "carrier embedding shape mismatch");
            continue;
        }
        for (const auto& r : c.rays()) {
            IntVec x = mat_apply(e, r);
            if (contains(bc, to_rat(x)).location == Location::Outside)
                violation("carrier-containment", {id, b}, "refined cone leaves its carrier");
        }
        // Lattice: refined lattice = saturated base lattice on the span.
        Lattice img = image_lattice(e, Lattice::standard(c.dim()));
        if (img != saturate(img, Lattice::standard(bc.dim())))
            violation("carrier-lattice", {id, b}, "refined lattice is not saturated in the base");
    }
    // Carriers commute with refined face embeddings.
    for (const auto& [key, emb] : s.refined.embeddings) {
        auto [x, y] = key;
        if (!s.carrier.count(x) || !s.carrier.count(y)) continue;
        auto [cx, ex] = s.carrier.at(x);
        auto [cy, ey] = s.carrier.at(y);
        if (!s.base.is_face(cx, cy)) {
            violation("carrier-face-order", {x, y}, "carriers are not comparable");
            continue;
        }
        IntMat lhs = mat_mul(s.base.embedding(cx, cy), ex);
        IntMat rhs = mat_mul(ey, emb);
        if (lhs != rhs) violation("carrier-commute", {x, y}, "carrier square does not commute");
    }
    // Cover with disjoint interiors, per base cone.
    for (const auto& [b, bc] : s.base.cones) {
        if (bc.is_zero_cone()) continue;
        std::vector<ConeId> tops;
        for (const auto& [id, data] : s.carrier)
            if (data.first == b && s.refined.cone(id).dim() == bc.dim()) tops.push_back(id);
        if (tops.empty()) {
            violation("cover-empty", {b}, "no full-dimensional cells over base cone");
            continue;
        }
        std::vector<std::vector<IntVec>> rays, fcts;
        for (ConeId id : tops) {
            rays.push_back(s.realized_in_carrier(id));
            fcts.push_back(facet_normals(rays.back(), bc.dim()));
        }
        // Pairwise: intersections are common faces.
        for (std::size_t i = 0; i < tops.size(); ++i)
            for (std::size_t j = i + 1; j < tops.size(); ++j) {
                std::vector<IntVec> ineqs = fcts[i];
                ineqs.insert(ineqs.end(), fcts[j].begin(), fcts[j].end());
                auto k = rays_from_inequalities(ineqs, bc.dim());
                std::sort(k.begin(), k.end(), lex_less);
                for (std::size_t t : {i, j}) {
                    std::vector<IntVec> active;
                    for (const auto& a : fcts[t]) {
                        bool vanish = true;
                        for (const auto& r : k)
                            if (dot(a, r) != 0) {
                                vanish = false;
                                break;
                            }
                        if (vanish) active.push_back(a);
                    }
                    std::vector<IntVec> face;
                    for (const auto& r : rays[t]) {
                        bool in_face = true;
                        for (const auto& a : active)
                            if (dot(a, r) != 0) {
                                in_face = false;
                                break;
                            }
                        if (in_face) face.push_back(r);
                    }
                    if (k.empty()) face.clear();
                    std::sort(face.begin(), face.end(), lex_less);
                    if (face != k) {
                        violation("cover-overlap", {tops[i], tops[j], b},
                                  "cells do not intersect in a common face");
                        break;
                    }
                }
            }
        // Wall matching: every interior facet shared by another cell.
        for (std::size_t i = 0; i < tops.size(); ++i) {
            for (const auto& a : fcts[i]) {
                std::vector<IntVec> wall;
                for (const auto& r : rays[i])
                    if (dot(a, r) == 0) wall.push_back(r);
                std::sort(wall.begin(), wall.end(), lex_less);
                // On the base boundary?
                bool on_boundary = false;
                for (const auto& f : bc.facets()) {
                    bool vanish = true;
                    for (const auto& r : wall)
                        if (dot(f, r) != 0) {
                            vanish = false;
                            break;
                        }
                    if (vanish) {
                        on_boundary = true;
                        break;
                    }
                }
                if (on_boundary) continue;
                std::size_t matches = 0;
                for (std::size_t j = 0; j < tops.size(); ++j) {
                    if (j == i) continue;
                    for (const auto& a2 : fcts[j]) {
                        std::vector<IntVec> wall2;
                        for (const auto& r : rays[j])
                            if (dot(a2, r) == 0) wall2.push_back(r);
                        std::sort(wall2.begin(), wall2.end(), lex_less);
                        if (wall2 == wall) {
                            ++matches;
                            break;
                        }
                    }
                }
                if (matches != 1)
                    violation("cover-wall", {tops[i], b},
                              "interior wall shared by " + std::to_string(matches) + " other cells");
            }
        }
    }
    return out;
}

// -- star subdivision -------------------------------------------------------------

SubdivisionResult star_subdivision(const PolyhedralComplex& c, ConeId at_cone, const RatVec& point) {
    const Cone& gamma = c.cone(at_cone);
    auto loc = contains(gamma, point);
    if (loc.location == Location::Outside) throw PointOutside("star_subdivision: point outside cone");
    if (loc.location == Location::Boundary)
        throw PointOnBoundary("star_subdivision: point on the boundary of the named cone");
    if (gamma.is_zero_cone()) throw Error("star_subdivision: cannot star at the zero cone");
    IntVec p = primitive_vector(point);

    std::map<ConeId, std::vector<std::vector<IntVec>>> pieces;
    GoodFunction good;
    for (const auto& [id, cone] : c.cones) {
        if (!c.is_face(at_cone, id)) continue;
        IntVec p_realized = mat_apply(c.embedding(at_cone, id), p);
        std::vector<std::vector<IntVec>> cell_list;
        for (const auto& a : cone.facets()) {
            Int val = dot(a, p_realized);
            if (val <= 0) continue;  // facet contains γ (val == 0) is excluded
            std::vector<IntVec> cell;
            for (const auto& r : cone.rays())
                if (dot(a, r) == 0) cell.push_back(r);
            cell.push_back(p_realized);
            cell_list.push_back(canonical_rays(cell, cone.dim()));
        }
        pieces[id] = cell_list;
    }
    Subdivision s = build_subdivision_internal(c, pieces);
    // Tent certificate: on each subdivided cone π the piece over facet F gets
    // a_F / ⟨a_F, p⟩; elsewhere zero.
    for (const auto& [id, cone] : c.cones) {
        std::map<ConeId, RatVec> entry;
        bool starred = c.is_face(at_cone, id);
        IntVec p_realized;
        if (starred) p_realized = mat_apply(c.embedding(at_cone, id), p);
        for (const auto& [rid, data] : s.carrier) {
            if (data.first != id || s.refined.cone(rid).dim() != cone.dim()) continue;
            if (!starred) {
                entry[rid] = RatVec(cone.dim(), Rat(0));
                continue;
            }
            // Identify the defining facet: the unique facet of π positive at p
            // whose zero set contains all cell rays except p.
            auto realized = s.realized_in_carrier(rid);
            RatVec best;
            bool found = false;
            for (const auto& a : cone.facets()) {
                Int val = dot(a, p_realized);
                if (val <= 0) continue;
                bool matches = true;
                for (const auto& r : realized)
                    if (primitive_vector(r) != primitive_vector(p_realized) && dot(a, r) != 0) {
                        matches = false;
                        break;
                    }
                if (matches) {
                    best = RatVec(cone.dim());
                    for (std::size_t t = 0; t < cone.dim(); ++t)
                        best[t] = make_rat(a[t], val);
                    found = true;
                    break;
                }
            }
            if (!found) throw InternalError("star_subdivision: piece has no defining facet");
            entry[rid] = best;
        }
        good.pieces[id] = entry;
    }
    return {s, good};
}

// -- pulling / composition ----------------------------------------------------------

Subdivision compose(const Subdivision& outer, const Subdivision& inner) {
    Subdivision out;
    out.base = inner.base;
    out.refined = outer.refined;
    for (const auto& [id, data] : outer.carrier) {
        auto [mid, e1] = data;
        auto [b, e2] = inner.carrier.at(mid);
        out.carrier[id] = {b, mat_mul(e2, e1)};
    }
    std::string why;
    if (!quick_check_subdivision(out, &why))
        throw InternalError("compose: invariants fail: " + why);
    return out;
}

GoodFunction compose_good_functions(const Subdivision& inner, const GoodFunction& g_inner,
                                    const Subdivision& outer, const GoodFunction& g_outer,
                                    const Subdivision& composed) {
    // Per final cell: λ = λ_inner(mid cell) + ε λ_outer(cell, transported).
    // Collect both parts per base cone, then pick ε by exact wall constraints.
    struct Part {
        RatVec lambda1, lambda2;
    };
    std::map<ConeId, std::map<ConeId, Part>> parts;
    for (const auto& [b, bc] : composed.base.cones) {
        std::map<ConeId, Part> entry;
        for (const auto& [rid, data] : composed.carrier) {
            if (data.first != b || composed.refined.cone(rid).dim() != bc.dim()) continue;
            auto [mid, e1] = outer.carrier.at(rid);
            auto [b2, e2] = inner.carrier.at(mid);
            if (b2 != b) throw InternalError("compose_good: carrier mismatch");
            Part p;
            p.lambda1 = g_inner.pieces.at(b).at(mid);
            // Transport outer covector through the invertible mid chart.
            const RatVec& lo = g_outer.pieces.at(mid).at(rid);
            RatMat e2inv = rat_inverse(e2.to_rat());
            p.lambda2 = row_apply(lo, e2inv);
            entry[rid] = p;
        }
        parts[b] = entry;
    }
    // Wall constraints: a + ε b > 0 on far rays across每 interior wall.
    Rat eps_cap(1);
    bool has_bound = false;
    Rat bound;
    for (const auto& [b, entry] : parts) {
        const Cone& bc = composed.base.cones.at(b);
        std::vector<ConeId> tops;
        for (const auto& [rid, part] : entry) tops.push_back(rid);
        std::map<ConeId, std::vector<IntVec>> realized;
        for (ConeId rid : tops) realized[rid] = composed.realized_in_carrier(rid);
        for (std::size_t i = 0; i < tops.size(); ++i)
            for (std::size_t j = 0; j < tops.size(); ++j) {
                if (i == j) continue;
                ConeId x = tops[i], y = tops[j];
                // Shared wall: common refined face of dimension dim(b) - 1.
                const std::vector<IntVec>& rx = realized.at(x);
                const std::vector<IntVec>& ry = realized.at(y);
                std::vector<IntVec> common;
                for (const auto& r : rx)
                    if (std::binary_search(ry.begin(), ry.end(), r,
                                           [](const IntVec& u, const IntVec& v) { return lex_less(u, v); }))
                        common.push_back(r);
                if (span_rank(common, bc.dim()) + 1 != bc.dim()) continue;
                const Part& px = entry.at(x);
                const Part& py = entry.at(y);
                for (const auto& r : ry) {
                    if (std::find(common.begin(), common.end(), r) != common.end()) continue;
                    Rat a = dot(px.lambda1, r) - dot(py.lambda1, r);
                    Rat bb = dot(px.lambda2, r) - dot(py.lambda2, r);
                    if (a == 0) {
                        if (bb <= 0)
                            throw InternalError("compose_good: outer certificate not strict on wall");
                    } else if (a < 0) {
                        throw InternalError("compose_good: inner certificate not concave on wall");
                    } else if (bb < 0) {
                        Rat limit = a / (-bb);
                        if (!has_bound || limit < bound) {
                            bound = limit;
                            has_bound = true;
                        }
                    }
                }
            }
    }
    Rat eps = eps_cap;
    if (has_bound) {
        Rat half = bound / 2;
        if (half < eps) eps = half;
    }
    GoodFunction out;
    for (const auto& [b, entry] : parts) {
        std::map<ConeId, RatVec> e;
        for (const auto& [rid, part] : entry) {
            RatVec lambda(part.lambda1.size());
            for (std::size_t t = 0; t < lambda.size(); ++t)
                lambda[t] = part.lambda1[t] + eps * part.lambda2[t];
            e[rid] = lambda;
        }
        out.pieces[b] = e;
    }
    return out;
}

SubdivisionResult pull_simplicialize(const PolyhedralComplex& c) {
    Subdivision current = identity_subdivision(c);
    GoodFunction good;
    for (const auto& [id, cone] : c.cones) {
        std::map<ConeId, RatVec> entry;
        for (const auto& [rid, data] : current.carrier)
            if (data.first == id && current.refined.cone(rid).dim() == cone.dim())
                entry[rid] = RatVec(cone.dim(), Rat(0));
        good.pieces[id] = entry;
    }
    // Original rays, in canonical id order; each persists through pulling.
    std::vector<ConeId> base_rays = c.ray_cones();
    for (ConeId base_ray : base_rays) {
        // Locate the ray cone of the current refined complex carried by it.
        ConeId ray_in_current = -1;
        for (const auto& [rid, data] : current.carrier)
            if (current.refined.cone(rid).dim() == 1 && data.first == base_ray) {
                ray_in_current = rid;
                break;
            }
        if (ray_in_current < 0) throw InternalError("pull_simplicialize: lost a ray");
        auto step = star_subdivision(current.refined, ray_in_current, RatVec{Rat(1)});
        if (step.subdivision.is_identity()) continue;
        Subdivision next = compose(step.subdivision, current);
        good = compose_good_functions(current, good, step.subdivision, step.good, next);
        current = next;
    }
    for (const auto& [id, cone] : current.refined.cones)
        if (!cone.is_simplicial() && !cone.is_zero_cone())
            throw InternalError("pull_simplicialize: output not simplicial");
    return {current, good};
}

// -- induced subdivision ---------------------------------------------------------

namespace {

// Realization of a refined target cell inside the chart of base cone tau
// (carrier(cell) must be a face of tau). Returns generator list.
std::vector<IntVec> realize_cell_in(const Subdivision& s, ConeId cell, ConeId tau) {
    auto [rho, e] = s.carrier.at(cell);
    IntMat lift = mat_mul(s.base.embedding(rho, tau), e);
    std::vector<IntVec> out;
    for (const auto& r : s.refined.cone(cell).rays()) out.push_back(primitive_vector(mat_apply(lift, r)));
    std::sort(out.begin(), out.end(), lex_less);
    return out;
}

}  // namespace

InducedSubdivision induced_subdivision(const ComplexMorphism& f, const Subdivision& s) {
    // Pieces σ ∩ f⁻¹(τ') for refined target cells τ' carried into faces of τ(σ).
    std::map<ConeId, std::vector<std::vector<IntVec>>> pieces;
    for (const auto& [sid, sc] : f.source.cones) {
        if (sc.is_zero_cone()) continue;
        ConeId tau = f.target_of(sid);
        const Cone& tc = f.target.cone(tau);
        const IntMat& m = f.matrix(sid);
        std::set<std::vector<IntVec>> cells;
        for (const auto& [cell, data] : s.carrier) {
            if (!s.base.is_face(data.first, tau)) continue;
            auto realized = realize_cell_in(s, cell, tau);
            // σ ∩ f⁻¹(cone(realized)): facets of σ, span conditions and facet
            // pullbacks of the realized cell.
            std::vector<IntVec> ineqs;
            for (const auto& a : sc.facets()) ineqs.push_back(a);
            IntMat span = saturated_span_basis(tc.dim(), realized);
            IntMat nulls = int_kernel(span.transpose());
            for (std::size_t col = 0; col < nulls.cols; ++col) {
                RatVec row = row_apply(to_rat(nulls.column(col)), m);
                if (!rat_vec_is_zero(row)) {
                    ineqs.push_back(primitive_vector(row));
                    ineqs.push_back(int_vec_neg(ineqs.back()));
                }
            }
            if (span.cols > 0 && !realized.empty()) {
                // Facet functionals of the cell within its span, extended by
                // the canonical pseudo-inverse and pulled back through f.
                std::vector<IntVec> coords;
                for (const auto& r : realized) {
                    auto sol = solve_full_col_rank(span.to_rat(), to_rat(r));
                    if (!sol || !is_integral(*sol))
                        throw InternalError("induced_subdivision: bad span coords");
                    coords.push_back(to_int(*sol));
                }
                RatMat sm = span.to_rat();
                RatMat pinv = mat_mul(rat_inverse(mat_mul(sm.transpose(), sm)), sm.transpose());
                for (const auto& a : facet_normals(coords, span.cols)) {
                    RatVec amb = row_apply(to_rat(a), pinv);
                    RatVec row = row_apply(amb, m.to_rat());
                    if (!rat_vec_is_zero(row)) ineqs.push_back(primitive_vector(row));
                }
            }
            auto piece = rays_from_inequalities(ineqs, sc.dim());
            if (span_rank(piece, sc.dim()) == sc.dim()) cells.insert(canonical_rays(piece, sc.dim()));
        }
        pieces[sid] = std::vector<std::vector<IntVec>>(cells.begin(), cells.end());
    }
    InducedSubdivision out;
    out.source = build_subdivision_internal(f.source, pieces);
    // Lifted morphism: each refined source cell maps into the minimal refined
    // target cell containing its image.
    out.lifted.source = out.source.refined;
    out.lifted.target = s.refined;
    for (const auto& [xid, xc] : out.source.refined.cones) {
        auto [sigma, bx] = out.source.carrier.at(xid);
        ConeId tau = f.target_of(sigma);
        const IntMat& m = f.matrix(sigma);
        IntMat realize = mat_mul(m, bx);  // chart(x) → chart(tau)
        std::vector<IntVec> image;
        for (const auto& r : xc.rays()) image.push_back(mat_apply(realize, r));
        // Find the minimal refined target cell containing the image.
        ConeId best = -1;
        std::size_t best_dim = 0;
        for (const auto& [cell, data] : s.carrier) {
            if (!s.base.is_face(data.first, tau)) continue;
            auto realized = realize_cell_in(s, cell, tau);
            IntMat span = saturated_span_basis(f.target.cone(tau).dim(), realized);
            bool inside = true;
            std::vector<RatVec> coords;
            for (const auto& y : image) {
                auto sol = solve_full_col_rank(span.to_rat(), to_rat(y));
                if (!sol) {
                    inside = false;
                    break;
                }
                coords.push_back(*sol);
            }
            if (!inside) continue;
            if (!realized.empty()) {
                std::vector<IntVec> cr;
                for (const auto& r : realized) {
                    auto sol = solve_full_col_rank(span.to_rat(), to_rat(r));
                    cr.push_back(to_int(*sol));
                }
                for (const auto& a : facet_normals(cr, span.cols)) {
                    for (const auto& y : coords)
                        if (dot(to_rat(a), y) < 0) {
                            inside = false;
                            break;
                        }
                    if (!inside) break;
                }
            }
            if (!inside) continue;
            std::size_t cd = s.refined.cone(cell).dim();
            if (best < 0 || cd < best_dim || (cd == best_dim && cell < best)) {
                best = cell;
                best_dim = cd;
            }
        }
        if (best < 0) throw InternalError("induced_subdivision: image cell not found");
        out.lifted.assignment[xid] = best;
        auto [rho_t, bt] = s.carrier.at(best);
        IntMat target_chart = mat_mul(s.base.embedding(rho_t, tau), bt);
        auto mm = solve_full_col_rank(target_chart.to_rat(), realize.to_rat());
        if (!mm || !is_integral(*mm)) throw InternalError("induced_subdivision: non-integral lift");
        out.lifted.matrices[xid] = to_int(*mm);
    }
    validate_morphism(out.lifted);
    return out;
}

// -- common refinement -----------------------------------------------------------

namespace {

// Hyperplane family describing a subcone (facets, plus span cuts for
// lower-dimensional subcones), canonical primitive rows in the cone's chart.
std::vector<IntVec> subcone_hyperplanes(const std::vector<IntVec>& sub, std::size_t dim) {
    std::vector<IntVec> out;
    std::vector<IntVec> nz;
    for (const auto& v : sub)
        if (!int_vec_is_zero(v)) nz.push_back(primitive_vector(v));
    if (nz.empty()) return out;
    IntMat span = saturated_span_basis(dim, nz);
    if (static_cast<std::size_t>(span.cols) == dim) {
        for (const auto& a : facet_normals(nz, dim)) out.push_back(canonical_sign(a));
        return out;
    }
    IntMat nulls = int_kernel(span.transpose());
    for (std::size_t c = 0; c < nulls.cols; ++c) out.push_back(canonical_sign(nulls.column(c)));
    std::vector<IntVec> coords;
    for (const auto& r : nz) {
        auto sol = solve_full_col_rank(span.to_rat(), to_rat(r));
        if (!sol || !is_integral(*sol)) throw InternalError("subcone_hyperplanes: bad coords");
        coords.push_back(to_int(*sol));
    }
    RatMat sm = span.to_rat();
    RatMat pinv = mat_mul(rat_inverse(mat_mul(sm.transpose(), sm)), sm.transpose());
    for (const auto& a : facet_normals(coords, span.cols)) {
        RatVec amb = row_apply(to_rat(a), pinv);
        if (!rat_vec_is_zero(amb)) out.push_back(canonical_sign(primitive_vector(amb)));
    }
    std::sort(out.begin(), out.end(), lex_less);
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

// Splits a base cone along a hyperplane family; returns the full-dimensional
// closed cells of the induced arrangement.
std::vector<std::vector<IntVec>> arrangement_cells(const Cone& c,
                                                   const std::vector<IntVec>& hyperplanes) {
    std::vector<std::vector<IntVec>> cells = {c.rays()};
    for (const auto& h : hyperplanes) {
        std::vector<std::vector<IntVec>> next;
        for (const auto& cell : cells) {
            bool pos = false, neg = false;
            for (const auto& r : cell) {
                Int v = dot(h, r);
                if (v > 0) pos = true;
                if (v < 0) neg = true;
            }
            if (!(pos && neg)) {
                next.push_back(cell);
                continue;
            }
            auto fs = facet_normals(cell, c.dim());
            for (int side = 0; side < 2; ++side) {
                std::vector<IntVec> ineqs = fs;
                ineqs.push_back(side == 0 ? h : int_vec_neg(h));
                auto piece = rays_from_inequalities(ineqs, c.dim());
                if (span_rank(piece, c.dim()) == c.dim())
                    next.push_back(canonical_rays(piece, c.dim()));
            }
        }
        cells = next;
    }
    std::set<std::vector<IntVec>> dedupe(cells.begin(), cells.end());
    return std::vector<std::vector<IntVec>>(dedupe.begin(), dedupe.end());
}

std::map<ConeId, std::vector<std::vector<IntVec>>> arrangement_pieces(
    const PolyhedralComplex& base, const std::map<ConeId, std::vector<std::vector<IntVec>>>& subcones) {
    // Families per cone: own subcones plus restrictions from all parents.
    std::map<ConeId, std::set<IntVec>> families;
    for (const auto& [id, c] : base.cones) families[id];
    for (const auto& [id, list] : subcones) {
        if (!base.has_cone(id)) throw Error("refine_common: unknown base cone " + std::to_string(id));
        for (const auto& sub : list)
            for (const auto& h : subcone_hyperplanes(sub, base.cone(id).dim()))
                families[id].insert(h);
    }
    for (const auto& [key, e] : base.embeddings) {
        auto [rho, sigma] = key;
        for (const auto& h : families[sigma]) {
            RatVec row = row_apply(to_rat(h), e);
            if (!rat_vec_is_zero(row)) families[rho].insert(canonical_sign(primitive_vector(row)));
        }
    }
    std::map<ConeId, std::vector<std::vector<IntVec>>> pieces;
    for (const auto& [id, c] : base.cones) {
        if (c.is_zero_cone()) continue;
        std::vector<IntVec> hs(families[id].begin(), families[id].end());
        pieces[id] = arrangement_cells(c, hs);
    }
    return pieces;
}

SubdivisionResult projectivize_pieces(const PolyhedralComplex& base,
                                      const std::map<ConeId, std::vector<std::vector<IntVec>>>& cells);

}  // namespace

Subdivision refine_common(const PolyhedralComplex& base,
                          const std::map<ConeId, std::vector<std::vector<IntVec>>>& subcones) {
    for (const auto& [id, list] : subcones)
        for (const auto& sub : list)
            for (const auto& g : sub)
                if (contains(base.cone(id), to_rat(g)).location == Location::Outside)
                    throw Error("refine_common: subcone leaves base cone " + std::to_string(id));
    auto pieces = arrangement_pieces(base, subcones);
    std::string why;
    auto direct = try_build_subdivision(base, pieces, &why, false);
    if (direct) return *direct;
    // Arrangements of the per-cone families can disagree across shared faces
    // when hyperplanes seen by one parent are invisible to another; repair by
    // passing the per-cone cell structure through the projective summation,
    // which produces a globally consistent refinement of the same partition.
    return projectivize_pieces(base, pieces).subdivision;
}

// -- good functions: verification ------------------------------------------------

GoodFunctionCheck verify_good_function(const PolyhedralComplex& base, const Subdivision& s,
                                       const GoodFunction& g) {
    auto fail = [](const std::string& v) { return GoodFunctionCheck{false, v}; };
    // Indexing: every full-dimensional cell over every base cone has a covector.
    for (const auto& [b, bc] : base.cones) {
        if (bc.is_zero_cone()) continue;
        auto git = g.pieces.find(b);
        if (git == g.pieces.end()) return fail("no pieces for base cone " + std::to_string(b));
        for (const auto& [rid, data] : s.carrier) {
            if (data.first != b || s.refined.cone(rid).dim() != bc.dim()) continue;
            if (!git->second.count(rid))
                return fail("no covector for cell " + std::to_string(rid) + " over cone " +
                            std::to_string(b));
            if (git->second.at(rid).size() != bc.dim())
                return fail("covector dimension mismatch on cell " + std::to_string(rid));
        }
    }
    // Agreement on shared faces: every refined cell gets the same values from
    // every full-dimensional cell above it (within and across base cones).
    for (const auto& [xid, xc] : s.refined.cones) {
        std::vector<std::pair<ConeId, ConeId>> above;  // (cell, base)
        auto [cx, ex] = s.carrier.at(xid);
        if (!base.cone(cx).is_zero_cone() && s.refined.cone(xid).dim() == base.cone(cx).dim())
            above.push_back({xid, cx});
        for (const auto& [key, emb] : s.refined.embeddings) {
            if (key.first != xid) continue;
            auto [cy, ey] = s.carrier.at(key.second);
            if (!base.cone(cy).is_zero_cone() &&
                s.refined.cone(key.second).dim() == base.cone(cy).dim())
                above.push_back({key.second, cy});
        }
        if (above.size() < 2) continue;
        // Reference values from the first parent on realized rays of x.
        std::vector<Rat> ref;
        bool first = true;
        for (const auto& [y, by] : above) {
            IntMat into_y = (y == xid) ? IntMat::identity(xc.dim()) : s.refined.embedding(xid, y);
            IntMat chart = mat_mul(s.carrier.at(y).second, into_y);
            const RatVec& lambda = g.pieces.at(by).at(y);
            std::vector<Rat> vals;
            for (const auto& r : xc.rays()) vals.push_back(dot(lambda, mat_apply(chart, r)));
            if (first) {
                ref = vals;
                first = false;
            } else if (vals != ref) {
                return fail("pieces disagree on shared cell " + std::to_string(xid));
            }
        }
    }
    // Wall superadditivity with strictness, per base cone.
    for (const auto& [b, bc] : base.cones) {
        if (bc.is_zero_cone()) continue;
        std::vector<ConeId> tops;
        for (const auto& [rid, data] : s.carrier)
            if (data.first == b && s.refined.cone(rid).dim() == bc.dim()) tops.push_back(rid);
        for (std::size_t i = 0; i < tops.size(); ++i)
            for (std::size_t j = 0; j < tops.size(); ++j) {
                if (i == j) continue;
                ConeId x = tops[i], y = tops[j];
                auto rx = s.realized_in_carrier(x);
                auto ry = s.realized_in_carrier(y);
                std::vector<IntVec> common;
                for (const auto& r : rx)
                    if (std::binary_search(ry.begin(), ry.end(), r,
                                           [](const IntVec& u, const IntVec& v) { return lex_less(u, v); }))
                        common.push_back(r);
                if (span_rank(common, bc.dim()) + 1 != bc.dim()) continue;
                const RatVec& lx = g.pieces.at(b).at(x);
                const RatVec& ly = g.pieces.at(b).at(y);
                for (const auto& r : common) {
                    if (dot(lx, r) != dot(ly, r))
                        return fail("covectors disagree on wall between cells " + std::to_string(x) +
                                    " and " + std::to_string(y));
                }
                for (const auto& r : ry) {
                    if (std::find(common.begin(), common.end(), r) != common.end()) continue;
                    Rat d = dot(lx, r) - dot(ly, r);
                    if (d <= 0)
                        return fail("superadditivity fails across wall between cells " +
                                    std::to_string(x) + " and " + std::to_string(y) + " at ray " +
                                    vec_str(r));
                }
            }
    }
    return {};
}

// -- projectivization -------------------------------------------------------------

namespace {

// Piecewise-linear data on one base cone: full-dimensional cells + covectors.
struct Pwl {
    std::vector<std::vector<IntVec>> cells;  // canonical rays in the cone's chart
    std::vector<RatVec> covectors;
};

// Restriction of a parent Pwl to a face along embedding e.
Pwl restrict_pwl(const Pwl& parent, std::size_t parent_dim, const Cone& face, const IntMat& e) {
    Pwl out;
    for (std::size_t i = 0; i < parent.cells.size(); ++i) {
        auto r = restrict_cell(parent.cells[i], parent_dim, face, e);
        if (span_rank(r, face.dim()) != face.dim()) continue;
        auto can = canonical_rays(r, face.dim());
        bool dup = false;
        for (const auto& c : out.cells)
            if (c == can) {
                dup = true;
                break;
            }
        if (dup) continue;
        out.cells.push_back(can);
        out.covectors.push_back(row_apply(parent.covectors[i], e));
    }
    return out;
}

// The wall-sum function −Σ|l| of a cell family inside one cone, as a Pwl on
// the arrangement of the walls.
Pwl wall_sum(const Cone& c, const std::vector<std::vector<IntVec>>& cells) {
    // Interior walls: facets of cells that are not on the cone boundary.
    std::set<IntVec> walls;
    for (const auto& cell : cells) {
        for (const auto& a : facet_normals(cell, c.dim())) {
            std::vector<IntVec> wall_rays;
            for (const auto& r : cell)
                if (dot(a, r) == 0) wall_rays.push_back(r);
            bool boundary = false;
            for (const auto& f : c.facets()) {
                bool vanish = true;
                for (const auto& r : wall_rays)
                    if (dot(f, r) != 0) {
                        vanish = false;
                        break;
                    }
                if (vanish) {
                    boundary = true;
                    break;
                }
            }
            if (!boundary) walls.insert(canonical_sign(a));
        }
    }
    std::vector<IntVec> hs(walls.begin(), walls.end());
    Pwl out;
    for (const auto& cell : arrangement_cells(c, hs)) {
        IntVec interior(c.dim(), Int(0));
        for (const auto& r : cell)
            for (std::size_t t = 0; t < c.dim(); ++t) interior[t] += r[t];
        RatVec lambda(c.dim(), Rat(0));
        for (const auto& l : hs) {
            int sign = dot(l, interior) >= 0 ? 1 : -1;
            for (std::size_t t = 0; t < c.dim(); ++t) lambda[t] -= Rat(sign) * Rat(l[t]);
        }
        out.cells.push_back(cell);
        out.covectors.push_back(lambda);
    }
    return out;
}

// Extends per-cone data {σ and its faces: arrangement pieces} to the whole
// complex by the inductive tent construction; returns a Pwl per base cone.
std::map<ConeId, Pwl> extend_over_complex(const PolyhedralComplex& base, ConeId sigma,
                                          const std::map<ConeId, Pwl>& initial) {
    std::map<ConeId, Pwl> data = initial;
    std::vector<ConeId> order = base.ids();
    std::sort(order.begin(), order.end(), [&](ConeId a, ConeId b) {
        auto da = base.cone(a).dim(), db = base.cone(b).dim();
        if (da != db) return da < db;
        return a < b;
    });
    for (ConeId id : order) {
        if (data.count(id)) continue;
        const Cone& c = base.cone(id);
        if (c.is_zero_cone()) {
            Pwl z;
            z.cells.push_back({});
            z.covectors.push_back(RatVec{});
            data[id] = z;
            continue;
        }
        if (c.dim() == 1) {
            Pwl z;
            z.cells.push_back(c.rays());
            z.covectors.push_back(RatVec(1, Rat(0)));
            data[id] = z;
            continue;
        }
        // Boundary pieces realized in this chart: (cell rays, face id).
        struct BoundaryPiece {
            std::vector<IntVec> rays;  // realized in chart(id)
            RatVec values;             // value at each ray, matching order
        };
        std::vector<BoundaryPiece> boundary;
        for (ConeId face : base.faces_of(id)) {
            const Cone& fc = base.cone(face);
            if (fc.dim() + 1 != c.dim()) continue;  // facets carry the structure
            IntMat e = base.embedding(face, id);
            const Pwl& fd = data.at(face);
            for (std::size_t i = 0; i < fd.cells.size(); ++i) {
                BoundaryPiece bp;
                for (const auto& r : fd.cells[i]) {
                    bp.rays.push_back(primitive_vector(mat_apply(e, r)));
                    bp.values.push_back(dot(fd.covectors[i], r) /
                                        primitive_of(to_rat(mat_apply(e, r)),
                                                     Lattice::standard(c.dim()))
                                            .multiple);
                }
                boundary.push_back(bp);
            }
        }
        // Linear extension if the boundary values admit one.
        {
            RatMat a(0, c.dim());
            std::vector<RatVec> rows;
            RatVec rhs;
            for (const auto& bp : boundary)
                for (std::size_t i = 0; i < bp.rays.size(); ++i) {
                    rows.push_back(to_rat(bp.rays[i]));
                    rhs.push_back(bp.values[i]);
                }
            RatMat am(rows.size(), c.dim());
            for (std::size_t i = 0; i < rows.size(); ++i)
                for (std::size_t j = 0; j < c.dim(); ++j) am.at(i, j) = rows[i][j];
            auto mu = solve_any(am, rhs);
            if (mu) {
                Pwl z;
                z.cells.push_back(c.rays());
                z.covectors.push_back(*mu);
                data[id] = z;
                continue;
            }
        }
        // Tent over the canonical interior point.
        IntVec x0 = primitive_vector(c.interior_point());
        Pwl tent;
        struct Join {
            std::vector<IntVec> rays;
            RatVec mu0, mu1;  // μ = μ0 + C μ1
        };
        std::vector<Join> joins;
        for (const auto& bp : boundary) {
            Join jn;
            jn.rays = bp.rays;
            jn.rays.push_back(x0);
            jn.rays = canonical_rays(jn.rays, c.dim());
            // Solve μ on span(bp.rays) + x0 with value C at x0.
            std::size_t nr = bp.rays.size();
            RatMat am(nr + 1, c.dim());
            for (std::size_t i = 0; i < nr; ++i)
                for (std::size_t j = 0; j < c.dim(); ++j) am.at(i, j) = Rat(bp.rays[i][j]);
            for (std::size_t j = 0; j < c.dim(); ++j) am.at(nr, j) = Rat(x0[j]);
            RatVec rhs0(nr + 1, Rat(0)), rhs1(nr + 1, Rat(0));
            for (std::size_t i = 0; i < nr; ++i) rhs0[i] = bp.values[i];
            rhs1[nr] = 1;
            auto m0 = solve_any(am, rhs0);
            auto m1 = solve_any(am, rhs1);
            if (!m0 || !m1) throw InternalError("extend: tent solve failed");
            jn.mu0 = *m0;
            jn.mu1 = *m1;
            joins.push_back(jn);
        }
        // Minimal integer C ≥ 1 making all wall constraints strict.
        Int c_min = 1;
        for (std::size_t i = 0; i < joins.size(); ++i)
            for (std::size_t j = 0; j < joins.size(); ++j) {
                if (i == j) continue;
                std::vector<IntVec> common;
                for (const auto& r : joins[i].rays)
                    if (std::find(joins[j].rays.begin(), joins[j].rays.end(), r) !=
                        joins[j].rays.end())
                        common.push_back(r);
                if (span_rank(common, c.dim()) + 1 != c.dim()) continue;
                for (const auto& r : joins[j].rays) {
                    if (std::find(common.begin(), common.end(), r) != common.end()) continue;
                    Rat a0 = dot(joins[i].mu0, r) - dot(joins[j].mu0, r);
                    Rat a1 = dot(joins[i].mu1, r) - dot(joins[j].mu1, r);
                    if (a1 == 0 && a0 == 0) continue;  // identical pieces merge later
                    if (a1 < 0)
                        throw InternalError("extend: tent constraint with negative slope");
                    if (a1 == 0) {
                        if (a0 <= 0) throw InternalError("extend: unsatisfiable tent constraint");
                        continue;
                    }
                    // a0 + C a1 > 0 ⇔ C > -a0/a1.
                    Rat threshold = -a0 / a1;
                    Int need = rat_floor(threshold) + 1;
                    if (need > c_min) c_min = need;
                }
            }
        for (const auto& jn : joins) {
            RatVec mu(c.dim());
            for (std::size_t t = 0; t < c.dim(); ++t) mu[t] = jn.mu0[t] + Rat(c_min) * jn.mu1[t];
            tent.cells.push_back(jn.rays);
            tent.covectors.push_back(mu);
        }
        data[id] = tent;
    }
    (void)sigma;
    return data;
}

// Common refinement of two Pwl structures on the same cone, covectors added.
Pwl pwl_sum(const Cone& c, const Pwl& f, const Pwl& g) {
    Pwl out;
    std::set<std::vector<IntVec>> seen;
    for (std::size_t i = 0; i < f.cells.size(); ++i) {
        auto fi = facet_normals(f.cells[i], c.dim());
        for (std::size_t j = 0; j < g.cells.size(); ++j) {
            std::vector<IntVec> ineqs = fi;
            for (const auto& a : facet_normals(g.cells[j], c.dim())) ineqs.push_back(a);
            auto piece = rays_from_inequalities(ineqs, c.dim());
            if (span_rank(piece, c.dim()) != c.dim()) continue;
            auto can = canonical_rays(piece, c.dim());
            if (!seen.insert(can).second) continue;
            RatVec lambda(c.dim());
            for (std::size_t t = 0; t < c.dim(); ++t)
                lambda[t] = f.covectors[i][t] + g.covectors[j][t];
            out.cells.push_back(can);
            out.covectors.push_back(lambda);
        }
    }
    return out;
}

// Maximal-pieces decomposition of a concave Pwl: for each distinct covector λ,
// the region {x : λ' ≥ λ for all other covectors λ'}.
Pwl max_pieces(const Cone& c, const Pwl& f) {
    std::vector<RatVec> distinct;
    for (const auto& l : f.covectors) {
        bool dup = false;
        for (const auto& d : distinct)
            if (d == l) {
                dup = true;
                break;
            }
        if (!dup) distinct.push_back(l);
    }
    Pwl out;
    for (const auto& l : distinct) {
        std::vector<IntVec> ineqs(c.facets().begin(), c.facets().end());
        for (const auto& other : distinct) {
            if (other == l) continue;
            RatVec diff(c.dim());
            for (std::size_t t = 0; t < c.dim(); ++t) diff[t] = other[t] - l[t];
            ineqs.push_back(primitive_vector(diff));
        }
        auto piece = rays_from_inequalities(ineqs, c.dim());
        if (span_rank(piece, c.dim()) != c.dim()) continue;
        out.cells.push_back(canonical_rays(piece, c.dim()));
        out.covectors.push_back(l);
    }
    return out;
}

SubdivisionResult projectivize_pieces(const PolyhedralComplex& base,
                                      const std::map<ConeId, std::vector<std::vector<IntVec>>>& cells) {
    // Per maximal cone: wall-sum function + arrangement pieces on it and its
    // faces, extended over the complex.
    std::vector<ConeId> maximal = base.maximal_cones();
    std::map<ConeId, Pwl> total;  // running sum per base cone
    for (const auto& [id, c] : base.cones) {
        Pwl z;
        if (c.is_zero_cone()) {
            z.cells.push_back({});
            z.covectors.push_back(RatVec{});
        } else {
            z.cells.push_back(c.rays());
            z.covectors.push_back(RatVec(c.dim(), Rat(0)));
        }
        total[id] = z;
    }
    for (ConeId sigma : maximal) {
        const Cone& sc = base.cone(sigma);
        if (sc.is_zero_cone()) continue;
        auto it = cells.find(sigma);
        std::vector<std::vector<IntVec>> own =
            it != cells.end() ? it->second : std::vector<std::vector<IntVec>>{sc.rays()};
        Pwl psi = wall_sum(sc, own);
        if (psi.cells.size() == 1) continue;  // trivial on σ: extension is zero
        // Seed the extension with σ and its faces (restrictions of ψ).
        std::map<ConeId, Pwl> seeded;
        seeded[sigma] = psi;
        for (ConeId face : base.faces_of(sigma)) {
            const Cone& fc = base.cone(face);
            if (fc.is_zero_cone()) {
                Pwl z;
                z.cells.push_back({});
                z.covectors.push_back(RatVec{});
                seeded[face] = z;
            } else {
                seeded[face] = restrict_pwl(psi, sc.dim(), fc, base.embedding(face, sigma));
            }
        }
        auto extended = extend_over_complex(base, sigma, seeded);
        for (auto& [id, pw] : total) {
            if (base.cone(id).is_zero_cone()) continue;
            pw = pwl_sum(base.cone(id), pw, extended.at(id));
        }
    }
    // Maximal pieces per cone become the output cells.
    std::map<ConeId, std::vector<std::vector<IntVec>>> pieces;
    std::map<ConeId, Pwl> final_pwl;
    for (const auto& [id, pw] : total) {
        if (base.cone(id).is_zero_cone()) continue;
        Pwl mp = max_pieces(base.cone(id), pw);
        final_pwl[id] = mp;
        pieces[id] = mp.cells;
    }
    Subdivision s = build_subdivision_internal(base, pieces);
    GoodFunction good;
    for (const auto& [id, c] : base.cones) {
        std::map<ConeId, RatVec> entry;
        for (const auto& [rid, data] : s.carrier) {
            if (data.first != id || s.refined.cone(rid).dim() != c.dim()) continue;
            if (c.is_zero_cone()) continue;
            auto realized = s.realized_in_carrier(rid);
            const Pwl& mp = final_pwl.at(id);
            bool found = false;
            for (std::size_t i = 0; i < mp.cells.size(); ++i)
                if (mp.cells[i] == realized) {
                    entry[rid] = mp.covectors[i];
                    found = true;
                    break;
                }
            if (!found) throw InternalError("projectivize: cell/covector mismatch");
        }
        good.pieces[id] = entry;
    }
    auto check = verify_good_function(base, s, good);
    if (!check.ok) throw InternalError("projectivize: certificate fails: " + check.violation);
    return {s, good};
}

}  // namespace

SubdivisionResult projectivize(const PolyhedralComplex& base, const Subdivision& s) {
    // Cells of s per base cone.
    std::map<ConeId, std::vector<std::vector<IntVec>>> cells;
    for (const auto& [rid, data] : s.carrier) {
        const Cone& bc = base.cone(data.first);
        if (s.refined.cone(rid).dim() != bc.dim() || bc.is_zero_cone()) continue;
        cells[data.first].push_back(s.realized_in_carrier(rid));
    }
    auto out = projectivize_pieces(base, cells);
    // The output must refine s: every output cell sits inside a cell of s.
    for (const auto& [rid, data] : out.subdivision.carrier) {
        const Cone& bc = base.cone(data.first);
        if (bc.is_zero_cone() || out.subdivision.refined.cone(rid).dim() != bc.dim()) continue;
        auto realized = out.subdivision.realized_in_carrier(rid);
        bool inside_some = false;
        for (const auto& cell : cells[data.first]) {
            bool inside = true;
            for (const auto& a : facet_normals(cell, bc.dim()))
                for (const auto& r : realized)
                    if (dot(a, r) < 0) {
                        inside = false;
                        break;
                    }
            if (inside) {
                inside_some = true;
                break;
            }
        }
        if (!inside_some) throw InternalError("projectivize: output does not refine input");
    }
    return out;
}

// -- nonsingular subdivision -------------------------------------------------------

SubdivisionResult nonsingular_subdivision(const PolyhedralComplex& c) {
    auto current = pull_simplicialize(c);
    for (int guard = 0; guard < 10000; ++guard) {
        ConeId bad = -1;
        for (ConeId id : current.subdivision.refined.ids()) {
            const Cone& cone = current.subdivision.refined.cone(id);
            if (cone.is_zero_cone() || !cone.is_simplicial()) continue;
            if (multiplicity(cone) != 1) {
                bad = id;
                break;
            }
        }
        if (bad < 0) return current;
        const Cone& cone = current.subdivision.refined.cone(bad);
        IntMat v = IntMat::from_columns(cone.dim(), cone.rays());
        RatMat vinv = rat_inverse(v.to_rat());
        auto pts = parallelepiped_points(v);
        if (pts.empty()) throw InternalError("nonsingular_subdivision: no box point");
        // Minimal simplicial-coordinate sum, lexicographic tie break.
        IntVec best;
        Rat best_sum;
        for (const auto& x : pts) {
            RatVec t = mat_apply(vinv, to_rat(x));
            Rat sum(0);
            for (const auto& ti : t) sum += ti;
            if (best.empty() || sum < best_sum || (sum == best_sum && lex_less(x, best))) {
                best = x;
                best_sum = sum;
            }
        }
        // Star at the carrier face of the chosen point.
        ConeId face = current.subdivision.refined.carrier(bad, to_rat(best));
        RatVec in_face = *solve_full_col_rank(
            current.subdivision.refined.embedding(face, bad).to_rat(), to_rat(best));
        auto step = star_subdivision(current.subdivision.refined, face, in_face);
        Subdivision composed = compose(step.subdivision, current.subdivision);
        GoodFunction good = compose_good_functions(current.subdivision, current.good,
                                                   step.subdivision, step.good, composed);
        current = {composed, good};
    }
    throw InternalError("nonsingular_subdivision: did not terminate");
}

// -- lattice alterations -------------------------------------------------------------

LatticeAlteration apply_lattice_alteration(const PolyhedralComplex& base,
                                           const std::map<ConeId, IntMat>& witness) {
    LatticeAlteration out;
    out.base = base;
    for (const auto& [id, c] : base.cones) {
        auto it = witness.find(id);
        IntMat w = it != witness.end() ? hnf(it->second).h : IntMat::identity(c.dim());
        if (w.rows != c.dim() || w.cols != c.dim())
            throw Error("lattice alteration: witness shape mismatch at cone " + std::to_string(id));
        if (determinant(w) == 0)
            throw Error("lattice alteration: witness not of finite index at cone " +
                        std::to_string(id));
        out.witness[id] = w;
    }
    // Face consistency: E(N'_ρ) = N'_σ ∩ span(E).
    for (const auto& [key, e] : base.embeddings) {
        auto [rho, sigma] = key;
        Lattice lhs = image_lattice(e, Lattice::from_generators(base.cone(rho).dim(),
                                                                out.witness.at(rho)));
        Lattice nsigma = Lattice::from_generators(base.cone(sigma).dim(), out.witness.at(sigma));
        // N'_σ ∩ span(E): preimage of N'_σ under the identity restricted to span.
        Lattice span_lattice = image_lattice(e, Lattice::standard(base.cone(rho).dim()));
        Lattice rhs = preimage_lattice(IntMat::identity(base.cone(sigma).dim()),
                                       saturate(span_lattice, Lattice::standard(base.cone(sigma).dim())),
                                       nsigma);
        if (lhs != rhs)
            throw Error("lattice alteration: witnesses inconsistent on face (" +
                        std::to_string(rho) + "," + std::to_string(sigma) + ")");
    }
    // Re-chart cones and embeddings.
    for (const auto& [id, c] : base.cones) {
        const IntMat& w = out.witness.at(id);
        RatMat winv = rat_inverse(w.to_rat());
        std::vector<IntVec> rays;
        for (const auto& r : c.rays()) rays.push_back(primitive_vector(mat_apply(winv, to_rat(r))));
        out.altered.cones[id] = Cone::make(c.dim(), rays);
    }
    for (const auto& [key, e] : base.embeddings) {
        auto [rho, sigma] = key;
        RatMat m = mat_mul(rat_inverse(out.witness.at(sigma).to_rat()),
                           mat_mul(e.to_rat(), out.witness.at(rho).to_rat()));
        if (!is_integral(m)) throw InternalError("lattice alteration: non-integral embedding");
        out.altered.embeddings[key] = to_int(m);
    }
    auto bad = validate_complex(out.altered);
    if (!bad.empty())
        throw InternalError("lattice alteration: altered complex invalid: " + bad.front().invariant);
    return out;
}

InducedAlteration induced_lattice_alteration(const ComplexMorphism& f, const LatticeAlteration& a) {
    std::map<ConeId, IntMat> witness;
    for (const auto& [id, c] : f.source.cones) {
        ConeId tau = f.target_of(id);
        Lattice target_sub =
            Lattice::from_generators(f.target.cone(tau).dim(), a.witness.at(tau));
        Lattice pre = preimage_lattice(f.matrix(id), Lattice::standard(c.dim()), target_sub);
        if (pre.rank() != c.dim())
            throw InternalError("induced alteration: preimage lattice not of full rank");
        witness[id] = to_int(pre.basis());
    }
    InducedAlteration out;
    out.source = apply_lattice_alteration(f.source, witness);
    out.lifted.source = out.source.altered;
    out.lifted.target = a.altered;
    out.lifted.assignment = f.assignment;
    for (const auto& [id, m] : f.matrices) {
        ConeId tau = f.target_of(id);
        RatMat lifted = mat_mul(rat_inverse(a.witness.at(tau).to_rat()),
                                mat_mul(m.to_rat(), out.source.witness.at(id).to_rat()));
        if (!is_integral(lifted)) throw InternalError("induced alteration: non-integral lift");
        out.lifted.matrices[id] = to_int(lifted);
    }
    validate_morphism(out.lifted);
    return out;
}

ComplexMorphism restrict_to_source_subdivision(const ComplexMorphism& f, const Subdivision& s) {
    ComplexMorphism out;
    out.source = s.refined;
    out.target = f.target;
    for (const auto& [id, c] : s.refined.cones) {
        auto [sigma, b] = s.carrier.at(id);
        out.assignment[id] = f.target_of(sigma);
        out.matrices[id] = mat_mul(f.matrix(sigma), b);
    }
    validate_morphism(out);
    return out;
}

}  // namespace semistable
