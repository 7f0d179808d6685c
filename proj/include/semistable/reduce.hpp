#pragma once

#include <optional>

#include "semistable/subdivide.hpp"

namespace semistable {

// Multiplicity table of the reduced-fiber construction: for every target ray
// primitive u_i, the source ray primitives hitting it and m_i = lcm of their
// multiplicities.
struct CoveringEntry {
    ConeId target_ray;                             // ray cone id in the target
    std::vector<std::pair<ConeId, Int>> sources;   // (source ray cone id, m_ij)
    Int m = 1;                                     // lcm_j m_ij (1 when unhit)
};

struct CoveringData {
    std::vector<CoveringEntry> entries;  // ascending target ray id
};

// Audit record for one pipeline stage; independently re-checkable.
struct Certificate {
    std::string stage;
    std::string input_digest;
    std::string output_digest;
    std::optional<Subdivision> subdivision;         // target-side refinement
    std::optional<GoodFunction> good;
    std::optional<Subdivision> source_subdivision;  // source-side refinement
    std::optional<GoodFunction> source_good;
    std::optional<CoveringData> covering;
    std::map<ConeId, IntMat> target_witness;  // sublattice bases per target cone
    std::map<ConeId, IntMat> source_witness;
    std::map<ConeId, IntVec> gorenstein_source;  // functionals per source cone
    std::map<ConeId, IntVec> gorenstein_target;
};

CoveringData covering_data(const ComplexMorphism& f);

struct ReduceFibersResult {
    LatticeAlteration target;
    LatticeAlteration source;
    ComplexMorphism lifted;
    CoveringData covering;
    Certificate certificate;
};

ReduceFibersResult reduce_fibers(const ComplexMorphism& f);

// Sublattice generated by the primitive ray generators, per cone.
LatticeAlteration index_one_alteration(const PolyhedralComplex& c);

struct GorensteinResult {
    bool ok = true;
    std::map<ConeId, IntVec> target_functionals;  // per target cone
    std::map<ConeId, IntVec> source_functionals;  // pullbacks per source cone
    std::vector<Witness> failures;                // nonempty indicates a bug
};

GorensteinResult gorenstein_certificate(const ComplexMorphism& f);

struct EquidimResult {
    Subdivision target_subdivision;  // composite refinement of the original target
    Subdivision source_subdivision;
    ComplexMorphism lifted;
    std::vector<Certificate> certificates;
};

EquidimResult equidimensionalize(const ComplexMorphism& f);

struct PipelineResult {
    ComplexMorphism final_morphism;
    std::vector<Certificate> certificates;
    Classification classification;
};

PipelineResult weak_semistable_pipeline(const ComplexMorphism& f);

// Scripted index-two repair: star the target at the given point, induce, star
// the source at the given center, triangulate without new rays, re-classify.
// `barycenter` is read in the chart of the unique maximal target cone of
// matching dimension; `center` in the chart of the matching source cone.
PipelineResult semistabilize_8_2(const ComplexMorphism& f, const RatVec& barycenter,
                                 const RatVec& center);

// Structural re-verification of an emitted certificate chain (digest chain,
// payload invariants, deterministic replay). Returns violations as data.
std::vector<std::string> verify_certificates(const ComplexMorphism& input,
                                             const std::vector<Certificate>& certs,
                                             const ComplexMorphism* expected_output = nullptr);

}  // namespace semistable
