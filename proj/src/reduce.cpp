#include "semistable/reduce.hpp"

#include <algorithm>

#include "semistable/errors.hpp"
#include "semistable/io.hpp"

namespace semistable {

namespace {

void require(bool cond, const std::string& what) {
    if (!cond) throw PreconditionFailed(what);
}

bool target_nonsingular(const PolyhedralComplex& c) {
    for (const auto& [id, cone] : c.cones)
        if (!is_nonsingular(cone)) return false;
    return true;
}

}  // namespace

CoveringData covering_data(const ComplexMorphism& f) {
    require(has_no_horizontal(f).ok, "covering_data: morphism has a horizontal part");
    require(is_equidimensional(f).ok, "covering_data: morphism is not equidimensional");
    require(target_nonsingular(f.target), "covering_data: target is not nonsingular");
    CoveringData out;
    for (ConeId u : f.target.ray_cones()) {
        CoveringEntry e;
        e.target_ray = u;
        for (ConeId rho : f.source.ray_cones()) {
            ImageCone img = image_cone(f, rho);
            if (img.minimal_face != u) continue;
            // The primitive of ρ maps to m · (realized primitive of u).
            IntVec image = f.matrix(rho).column(0);
            IntVec prim = primitive_vector(image);
            Rat m = Rat(image[0]) / Rat(prim[0]);
            for (std::size_t i = 0; i < image.size(); ++i)
                if (prim[i] != 0) {
                    m = Rat(image[i]) / Rat(prim[i]);
                    break;
                }
            if (m.get_den() != 1 || m <= 0) throw InternalError("covering_data: bad multiplicity");
            e.sources.push_back({rho, m.get_num()});
        }
        e.m = 1;
        for (const auto& [rho, m] : e.sources) e.m = int_lcm(e.m, m);
        out.entries.push_back(e);
    }
    std::sort(out.entries.begin(), out.entries.end(),
              [](const CoveringEntry& a, const CoveringEntry& b) { return a.target_ray < b.target_ray; });
    return out;
}

ReduceFibersResult reduce_fibers(const ComplexMorphism& f) {
    ReduceFibersResult out;
    out.covering = covering_data(f);
    std::map<ConeId, Int> m_of_ray;
    for (const auto& e : out.covering.entries) m_of_ray[e.target_ray] = e.m;
    // Target witness: per cone, the sublattice generated by m_i u_i.
    std::map<ConeId, IntMat> target_witness;
    for (const auto& [id, cone] : f.target.cones) {
        if (cone.is_zero_cone()) {
            target_witness[id] = IntMat(0, 0);
            continue;
        }
        std::vector<IntVec> cols;
        for (const auto& r : cone.rays()) {
            ConeId ray_id = f.target.face_with_rays(id, {r});
            if (ray_id < 0) throw InternalError("reduce_fibers: ray cone not represented");
            Int m = m_of_ray.count(ray_id) ? m_of_ray.at(ray_id) : Int(1);
            IntVec col(r.size());
            for (std::size_t i = 0; i < r.size(); ++i) col[i] = m * r[i];
            cols.push_back(col);
        }
        target_witness[id] = hnf(IntMat::from_columns(cone.dim(), cols)).h;
    }
    out.target = apply_lattice_alteration(f.target, target_witness);
    auto induced = induced_lattice_alteration(f, out.target);
    out.source = induced.source;
    out.lifted = induced.lifted;
    // The construction guarantees reduced fibers; re-verified.
    auto reduced = has_reduced_fibers(out.lifted);
    if (!reduced.ok) throw InternalError("reduce_fibers: lifted morphism does not have reduced fibers");
    out.certificate.stage = "reduce-fibers";
    out.certificate.input_digest = morphism_digest(f);
    out.certificate.output_digest = morphism_digest(out.lifted);
    out.certificate.covering = out.covering;
    out.certificate.target_witness = out.target.witness;
    out.certificate.source_witness = out.source.witness;
    return out;
}

LatticeAlteration index_one_alteration(const PolyhedralComplex& c) {
    std::map<ConeId, IntMat> witness;
    for (const auto& [id, cone] : c.cones) {
        if (cone.is_zero_cone()) {
            witness[id] = IntMat(0, 0);
            continue;
        }
        if (!cone.is_simplicial())
            throw NotSimplicial("index_one_alteration: cone " + std::to_string(id) +
                                " is not simplicial");
        witness[id] = hnf(IntMat::from_columns(cone.dim(), cone.rays())).h;
    }
    return apply_lattice_alteration(c, witness);
}

GorensteinResult gorenstein_certificate(const ComplexMorphism& f) {
    require(has_no_horizontal(f).ok, "gorenstein_certificate: morphism has a horizontal part");
    require(is_equidimensional(f).ok, "gorenstein_certificate: morphism is not equidimensional");
    require(target_nonsingular(f.target), "gorenstein_certificate: target is not nonsingular");
    require(has_reduced_fibers(f).ok, "gorenstein_certificate: fibers are not reduced");
    GorensteinResult out;
    for (const auto& [id, cone] : f.target.cones) {
        auto psi = gorenstein_functional(cone);
        if (!psi) {
            out.ok = false;
            out.failures.push_back({id, "nonsingular target cone admits no Gorenstein functional"});
            continue;
        }
        out.target_functionals[id] = *psi;
    }
    for (const auto& [id, cone] : f.source.cones) {
        ConeId tau = f.target_of(id);
        auto it = out.target_functionals.find(tau);
        if (it == out.target_functionals.end()) continue;
        RatVec pulled = row_apply(to_rat(it->second), f.matrix(id));
        if (!is_integral(pulled)) {
            out.ok = false;
            out.failures.push_back({id, "pullback functional is not integral"});
            continue;
        }
        IntVec psi = to_int(pulled);
        for (const auto& r : cone.rays())
            if (dot(psi, r) != -1) {
                out.ok = false;
                out.failures.push_back({id, "pullback functional does not pair to -1 with ray " +
                                                [&] {
                                                    std::string s = "(";
                                                    for (std::size_t i = 0; i < r.size(); ++i)
                                                        s += (i ? "," : "") + int_to_string(r[i]);
                                                    return s + ")";
                                                }()});
                break;
            }
        out.source_functionals[id] = psi;
    }
    return out;
}

EquidimResult equidimensionalize(const ComplexMorphism& f) {
    validate_morphism(f);
    require(has_no_horizontal(f).ok, "equidimensionalize: morphism has a horizontal part");
    EquidimResult out;
    std::string target_digest = complex_digest(f.target);

    // Image cones grouped by assigned target cone.
    std::map<ConeId, std::vector<std::vector<IntVec>>> images;
    for (const auto& [id, cone] : f.source.cones) {
        ImageCone img = image_cone(f, id);
        if (!img.rays.empty()) images[img.target_cone].push_back(img.rays);
    }
    // (1) Common refinement by all image cones (the membership partition).
    Subdivision s0 = refine_common(f.target, images);
    {
        Certificate c;
        c.stage = "common-refinement";
        c.input_digest = target_digest;
        c.output_digest = complex_digest(s0.refined);
        c.subdivision = s0;
        out.certificates.push_back(c);
    }
    // (2) Projectivize.
    SubdivisionResult s1 = projectivize(f.target, s0);
    {
        Certificate c;
        c.stage = "projectivize";
        c.input_digest = target_digest;
        c.output_digest = complex_digest(s1.subdivision.refined);
        c.subdivision = s1.subdivision;
        c.good = s1.good;
        out.certificates.push_back(c);
    }
    // (3) Nonsingular projective refinement.
    SubdivisionResult s2 = nonsingular_subdivision(s1.subdivision.refined);
    {
        Certificate c;
        c.stage = "resolve";
        c.input_digest = complex_digest(s1.subdivision.refined);
        c.output_digest = complex_digest(s2.subdivision.refined);
        c.subdivision = s2.subdivision;
        c.good = s2.good;
        out.certificates.push_back(c);
    }
    out.target_subdivision = compose(s2.subdivision, s1.subdivision);
    // (4) Induced subdivision of the source.
    InducedSubdivision ind = induced_subdivision(f, out.target_subdivision);
    out.source_subdivision = ind.source;
    out.lifted = ind.lifted;
    {
        Certificate c;
        c.stage = "induced-subdivision";
        c.input_digest = morphism_digest(f);
        c.output_digest = morphism_digest(out.lifted);
        c.subdivision = out.target_subdivision;
        c.source_subdivision = out.source_subdivision;
        out.certificates.push_back(c);
    }
    if (!is_equidimensional(out.lifted).ok)
        throw InternalError("equidimensionalize: lifted morphism is not equidimensional");
    if (!target_nonsingular(out.lifted.target))
        throw InternalError("equidimensionalize: refined target is not nonsingular");
    if (!has_no_horizontal(out.lifted).ok)
        throw InternalError("equidimensionalize: horizontal part appeared");
    return out;
}

PipelineResult weak_semistable_pipeline(const ComplexMorphism& f) {
    validate_morphism(f);
    require(has_no_horizontal(f).ok, "pipeline: morphism has a horizontal part");
    PipelineResult out;
    EquidimResult eq = equidimensionalize(f);
    out.certificates = eq.certificates;
    ReduceFibersResult rf = reduce_fibers(eq.lifted);
    out.certificates.push_back(rf.certificate);
    ComplexMorphism current = rf.lifted;
    Classification cls = classify(current);
    if (cls.level < Level::WeaklySemistable)
        throw InternalError("pipeline: output is not weakly semistable");
    if (!cls.source_simplicial) {
        SubdivisionResult simp = pull_simplicialize(current.source);
        ComplexMorphism next = restrict_to_source_subdivision(current, simp.subdivision);
        Certificate c;
        c.stage = "simplicialize-source";
        c.input_digest = morphism_digest(current);
        c.output_digest = morphism_digest(next);
        c.source_subdivision = simp.subdivision;
        c.source_good = simp.good;
        out.certificates.push_back(c);
        current = next;
        cls = classify(current);
        if (cls.level < Level::WeaklySemistable)
            throw InternalError("pipeline: simplicialization broke weak semistability");
    }
    out.final_morphism = current;
    out.classification = cls;
    return out;
}

namespace {

// The unique maximal cone whose chart dimension matches the vector.
ConeId locate_chart(const PolyhedralComplex& c, std::size_t dim, const std::string& what) {
    ConeId found = -1;
    for (ConeId id : c.maximal_cones()) {
        if (c.cone(id).dim() != dim) continue;
        if (found >= 0) throw Error(what + ": several maximal cones match the vector dimension");
        found = id;
    }
    if (found < 0) throw Error(what + ": no maximal cone matches the vector dimension");
    return found;
}

}  // namespace

PipelineResult semistabilize_8_2(const ComplexMorphism& f, const RatVec& barycenter,
                                 const RatVec& center) {
    validate_morphism(f);
    {
        Classification cls = classify(f);
        require(cls.level >= Level::WeaklySemistable, "recipe: input is not weakly semistable");
    }
    PipelineResult out;
    // Target star subdivision at the barycenter point.
    ConeId tmax = locate_chart(f.target, barycenter.size(), "recipe barycenter");
    ConeId tcarrier = f.target.carrier(tmax, barycenter);
    RatVec bary_in_carrier = *solve_full_col_rank(
        f.target.embedding(tcarrier, tmax).to_rat(), barycenter);
    SubdivisionResult tstar = star_subdivision(f.target, tcarrier, bary_in_carrier);
    {
        Certificate c;
        c.stage = "target-star";
        c.input_digest = complex_digest(f.target);
        c.output_digest = complex_digest(tstar.subdivision.refined);
        c.subdivision = tstar.subdivision;
        c.good = tstar.good;
        out.certificates.push_back(c);
    }
    // Induced subdivision of the source.
    InducedSubdivision ind = induced_subdivision(f, tstar.subdivision);
    ComplexMorphism current = ind.lifted;
    {
        Certificate c;
        c.stage = "induced-subdivision";
        c.input_digest = morphism_digest(f);
        c.output_digest = morphism_digest(current);
        c.subdivision = tstar.subdivision;
        c.source_subdivision = ind.source;
        out.certificates.push_back(c);
    }
    // Source star subdivision at the center (read in the original source chart).
    ConeId smax = locate_chart(f.source, center.size(), "recipe center");
    ConeId host = -1;
    for (const auto& [rid, data] : ind.source.carrier) {
        if (data.first != smax) continue;
        if (ind.source.refined.cone(rid).dim() != f.source.cone(smax).dim()) continue;
        // Is the center inside this cell?
        auto realized = ind.source.realized_in_carrier(rid);
        bool inside = true;
        for (const auto& a : facet_normals(realized, f.source.cone(smax).dim()))
            if (dot(to_rat(a), center) < 0) {
                inside = false;
                break;
            }
        if (inside) {
            host = rid;
            break;
        }
    }
    if (host < 0) throw PointOutside("recipe center: point outside the subdivided source");
    auto host_coords = solve_full_col_rank(ind.source.carrier_embedding(host).to_rat(), center);
    if (!host_coords) throw PointOutside("recipe center: point outside the host cell span");
    ConeId scarrier = ind.source.refined.carrier(host, *host_coords);
    RatVec center_in_carrier = *solve_full_col_rank(
        ind.source.refined.embedding(scarrier, host).to_rat(), *host_coords);
    SubdivisionResult sstar = star_subdivision(ind.source.refined, scarrier, center_in_carrier);
    ComplexMorphism after_star = restrict_to_source_subdivision(current, sstar.subdivision);
    {
        Certificate c;
        c.stage = "source-star";
        c.input_digest = morphism_digest(current);
        c.output_digest = morphism_digest(after_star);
        c.source_subdivision = sstar.subdivision;
        c.source_good = sstar.good;
        out.certificates.push_back(c);
    }
    current = after_star;
    // Triangulate without new rays.
    SubdivisionResult simp = pull_simplicialize(current.source);
    ComplexMorphism final_m = restrict_to_source_subdivision(current, simp.subdivision);
    {
        Certificate c;
        c.stage = "simplicialize-source";
        c.input_digest = morphism_digest(current);
        c.output_digest = morphism_digest(final_m);
        c.source_subdivision = simp.subdivision;
        c.source_good = simp.good;
        out.certificates.push_back(c);
    }
    out.final_morphism = final_m;
    out.classification = classify(final_m);
    return out;
}

// -- certificate verification ---------------------------------------------------

std::vector<std::string> verify_certificates(const ComplexMorphism& input,
                                             const std::vector<Certificate>& certs,
                                             const ComplexMorphism* expected_output) {
    std::vector<std::string> problems;
    auto note = [&](const std::string& p) { problems.push_back(p); };
    ComplexMorphism current = input;
    for (std::size_t i = 0; i < certs.size(); ++i) {
        const Certificate& c = certs[i];
        std::string where = "stage " + std::to_string(i) + " (" + c.stage + ")";
        // Structural payload checks.
        if (c.subdivision) {
            auto bad = verify_subdivision(*c.subdivision);
            if (!bad.empty()) {
                note(where + ": subdivision invariant fails: " + bad.front().invariant);
                return problems;
            }
            if (c.good) {
                auto check = verify_good_function(c.subdivision->base, *c.subdivision, *c.good);
                if (!check.ok) note(where + ": good function fails: " + check.violation);
            }
        }
        if (c.source_subdivision) {
            auto bad = verify_subdivision(*c.source_subdivision);
            if (!bad.empty()) {
                note(where + ": source subdivision invariant fails: " + bad.front().invariant);
                return problems;
            }
            if (c.source_good) {
                auto check = verify_good_function(c.source_subdivision->base, *c.source_subdivision,
                                                  *c.source_good);
                if (!check.ok) note(where + ": source good function fails: " + check.violation);
            }
        }
        // Deterministic replay of the morphism-changing stages.
        try {
            if (c.stage == "common-refinement" || c.stage == "projectivize" ||
                c.stage == "resolve" || c.stage == "target-star") {
                if (c.subdivision && complex_digest(c.subdivision->refined) != c.output_digest)
                    note(where + ": output digest does not match the refined complex");
                if (c.subdivision && complex_digest(c.subdivision->base) != c.input_digest)
                    note(where + ": input digest does not match the base complex");
            } else if (c.stage == "induced-subdivision") {
                if (c.input_digest != morphism_digest(current))
                    note(where + ": input digest does not chain");
                if (!c.subdivision) {
                    note(where + ": missing target subdivision payload");
                    return problems;
                }
                if (complex_digest(c.subdivision->base) != complex_digest(current.target)) {
                    note(where + ": target subdivision base is not the current target");
                    return problems;
                }
                InducedSubdivision ind = induced_subdivision(current, *c.subdivision);
                if (morphism_digest(ind.lifted) != c.output_digest)
                    note(where + ": replayed morphism does not match the output digest");
                current = ind.lifted;
            } else if (c.stage == "reduce-fibers") {
                if (c.input_digest != morphism_digest(current))
                    note(where + ": input digest does not chain");
                ReduceFibersResult rf = reduce_fibers(current);
                if (!c.covering) {
                    note(where + ": missing covering data");
                    return problems;
                }
                bool covering_matches = rf.covering.entries.size() == c.covering->entries.size();
                for (std::size_t k = 0; covering_matches && k < rf.covering.entries.size(); ++k) {
                    const auto& a = rf.covering.entries[k];
                    const auto& b = c.covering->entries[k];
                    covering_matches = a.target_ray == b.target_ray && a.m == b.m &&
                                       a.sources == b.sources;
                }
                if (!covering_matches) note(where + ": covering data does not match the replay");
                if (rf.target.witness != c.target_witness)
                    note(where + ": target witnesses do not match the replay");
                if (rf.source.witness != c.source_witness)
                    note(where + ": source witnesses do not match the replay");
                if (morphism_digest(rf.lifted) != c.output_digest)
                    note(where + ": replayed morphism does not match the output digest");
                current = rf.lifted;
            } else if (c.stage == "simplicialize-source" || c.stage == "source-star") {
                if (c.input_digest != morphism_digest(current))
                    note(where + ": input digest does not chain");
                if (!c.source_subdivision) {
                    note(where + ": missing source subdivision payload");
                    return problems;
                }
                if (complex_digest(c.source_subdivision->base) != complex_digest(current.source)) {
                    note(where + ": source subdivision base is not the current source");
                    return problems;
                }
                ComplexMorphism next = restrict_to_source_subdivision(current, *c.source_subdivision);
                if (morphism_digest(next) != c.output_digest)
                    note(where + ": replayed morphism does not match the output digest");
                current = next;
            } else {
                note(where + ": unknown stage");
                return problems;
            }
        } catch (const Error& e) {
            note(where + std::string(": replay failed: ") + e.what());
            return problems;
        }
    }
    if (expected_output && morphism_digest(current) != morphism_digest(*expected_output))
        note("replayed chain does not reproduce the expected output morphism");
    return problems;
}

}  // namespace semistable
