#pragma once

#include <doctest.h>
#include <json.hpp>

#include <fstream>
#include <sstream>

#include "semistable/io.hpp"
#include "test_util.hpp"

namespace testutil {

using namespace semistable;

inline ComplexMorphism identity_morphism(const PolyhedralComplex& c) {
    ComplexMorphism f;
    f.source = c;
    f.target = c;
    for (const auto& [id, cone] : c.cones) {
        f.assignment[id] = id;
        f.matrices[id] = IntMat::identity(cone.dim());
    }
    validate_morphism(f);
    return f;
}

// Morphism given by one global matrix in the fan charts; every source cone is
// assigned to the unique maximal target cone (whose chart is the ambient).
inline ComplexMorphism global_matrix_morphism(std::size_t src_rank,
                                              const std::vector<std::vector<IntVec>>& src_cones,
                                              std::size_t tgt_rank,
                                              const std::vector<std::vector<IntVec>>& tgt_cones,
                                              const IntMat& f_matrix) {
    FanRealization sreal, treal;
    ComplexMorphism f;
    f.source = fan(src_rank, src_cones, &sreal);
    f.target = fan(tgt_rank, tgt_cones, &treal);
    // Assign each source cone to the smallest target cone containing its image.
    for (const auto& [id, cone] : f.source.cones) {
        IntMat realized = mat_mul(f_matrix, sreal.chart_basis.at(id));
        ConeId best = -1;
        for (const auto& [tid, tcone] : f.target.cones) {
            const IntMat& tb = treal.chart_basis.at(tid);
            auto sol = solve_full_col_rank(tb.to_rat(), realized.to_rat());
            if (!sol || !is_integral(*sol)) continue;
            IntMat m = to_int(*sol);
            bool inside = true;
            for (const auto& r : cone.rays()) {
                IntVec img = mat_apply(m, r);
                if (contains(tcone, to_rat(img)).location == Location::Outside) {
                    inside = false;
                    break;
                }
            }
            if (!inside) continue;
            if (best < 0 || f.target.is_face(tid, best)) best = tid;
        }
        REQUIRE(best >= 0);
        auto sol = solve_full_col_rank(treal.chart_basis.at(best).to_rat(), realized.to_rat());
        f.assignment[id] = best;
        f.matrices[id] = to_int(*sol);
    }
    validate_morphism(f);
    return f;
}

// Blow-up fan of the plane quadrant mapping identically onto the quadrant.
inline ComplexMorphism blowup_to_plane() {
    return global_matrix_morphism(
        2, {{vec({1, 0}), vec({1, 1})}, {vec({0, 1}), vec({1, 1})}}, 2,
        {{vec({1, 0}), vec({0, 1})}}, IntMat::identity(2));
}

// x ↦ 2x on the standard ray.
inline ComplexMorphism double_cover() {
    return global_matrix_morphism(1, {{vec({1})}}, 1, {{vec({1})}}, mat({{2}}));
}

// Two abstract source rays mapping ×2 and ×3 onto one base ray.
inline ComplexMorphism lcm_two_rays() {
    ComplexMorphism f;
    f.source.cones[0] = Cone::zero();
    f.source.cones[1] = Cone::make(1, {vec({1})});
    f.source.cones[2] = Cone::make(1, {vec({1})});
    f.source.embeddings[{0, 1}] = IntMat(1, 0);
    f.source.embeddings[{0, 2}] = IntMat(1, 0);
    f.target.cones[0] = Cone::zero();
    f.target.cones[1] = Cone::make(1, {vec({1})});
    f.target.embeddings[{0, 1}] = IntMat(1, 0);
    f.assignment = {{0, 0}, {1, 1}, {2, 1}};
    f.matrices[0] = IntMat(0, 0);
    f.matrices[1] = mat({{2}});
    f.matrices[2] = mat({{3}});
    validate_morphism(f);
    return f;
}

// The index-two example: τ = (R₊)² with Z², σ = (R₊)⁴ with lattice Z⁴ + Z·w,
// w = (1/2,1/2,1/2,1/2), map (a,b,c,d) ↦ (a+b, c+d). Built through the JSON
// path so the "lattices" re-charting is exercised.
inline std::string example_8_2_json() {
    ComplexMorphism plain = global_matrix_morphism(
        4,
        {{vec({1, 0, 0, 0}), vec({0, 1, 0, 0}), vec({0, 0, 1, 0}), vec({0, 0, 0, 1})}}, 2,
        {{vec({1, 0}), vec({0, 1})}}, mat({{1, 1, 0, 0}, {0, 0, 1, 1}}));
    nlohmann::json j = nlohmann::json::parse(serialize_morphism(plain));
    // The 4-dimensional cone is the last id of the source complex.
    ConeId sigma = plain.source.ids().back();
    REQUIRE(plain.source.cone(sigma).dim() == 4);
    // Basis columns e1, e2, e3, w = (1/2,1/2,1/2,1/2).
    nlohmann::json basis = nlohmann::json::array();
    for (int r = 0; r < 4; ++r) {
        nlohmann::json row = nlohmann::json::array();
        for (int c = 0; c < 3; ++c) row.push_back(r == c ? "1" : "0");
        row.push_back("1/2");
        basis.push_back(row);
    }
    j["source"]["lattices"] = {{std::to_string(sigma), basis}};
    return j.dump(2) + "\n";
}

inline ComplexMorphism example_8_2() {
    auto doc = parse_document(example_8_2_json());
    REQUIRE(doc.morphism.has_value());
    return *doc.morphism;
}

inline std::string fixture_path(const std::string& name) {
    return std::string(SEMISTABLE_FIXTURE_DIR) + "/" + name;
}

inline std::string read_fixture(const std::string& name) {
    std::ifstream in(fixture_path(name), std::ios::binary);
    REQUIRE(in);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace testutil
