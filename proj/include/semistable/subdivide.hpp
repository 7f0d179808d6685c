#pragma once

#include "semistable/morphism.hpp"

namespace semistable {

// A refinement of a polyhedral complex. Every refined cone carries an
// embedding of its chart into the chart of its carrier base cone; for each
// base cone, the refined cones carried into it cover it with pairwise
// disjoint relative interiors, and refined lattices are the saturated base
// lattices on their spans.
struct Subdivision {
    PolyhedralComplex refined;
    PolyhedralComplex base;
    std::map<ConeId, std::pair<ConeId, IntMat>> carrier;

    ConeId carrier_cone(ConeId refined_id) const;
    const IntMat& carrier_embedding(ConeId refined_id) const;
    // Realized rays of a refined cone inside its carrier's chart, lex-sorted.
    std::vector<IntVec> realized_in_carrier(ConeId refined_id) const;
    bool is_identity() const;
};

// Piecewise-linear certificate: for each base cone, a rational covector on
// every full-dimensional refined cell carried into it. Superadditive
// ("convex" in the source construction −Σ|l|) on each base cone, with the
// refined cells as maximal linear pieces.
struct GoodFunction {
    std::map<ConeId, std::map<ConeId, RatVec>> pieces;  // base id → cell id → covector
};

struct SubdivisionResult {
    Subdivision subdivision;
    GoodFunction good;
};

// Assembles a Subdivision from per-base-cone lists of full-dimensional
// subcones (ray lists in the base cone's chart). Cones absent from the map
// are left whole; face cones inherit the boundary structure, which must be
// consistent across parents. Verifies all subdivision invariants.
Subdivision build_subdivision(const PolyhedralComplex& base,
                              const std::map<ConeId, std::vector<std::vector<IntVec>>>& pieces);

Subdivision identity_subdivision(const PolyhedralComplex& base);

// Invariant checker used by every constructor; violations as data.
std::vector<ComplexViolation> verify_subdivision(const Subdivision& s);

// Star subdivision at a point in the relative interior of the named cone
// (coordinates in that cone's chart). Returns the subdivision plus the tent
// good function certifying projectivity.
SubdivisionResult star_subdivision(const PolyhedralComplex& c, ConeId at_cone, const RatVec& point);

// Projective simplicial subdivision using only existing rays (successive
// pulling at rays in canonical id order).
SubdivisionResult pull_simplicialize(const PolyhedralComplex& c);

// Source subdivision induced by a target subdivision: cones σ ∩ f⁻¹(τ'),
// plus the lifted morphism refined source → refined target.
struct InducedSubdivision {
    Subdivision source;
    ComplexMorphism lifted;
};

InducedSubdivision induced_subdivision(const ComplexMorphism& f, const Subdivision& s);

// Common-refinement subdivision determined by the facet hyperplanes of the
// given subcones (per base cone, ray lists in that cone's chart), restricted
// to each base cone.
Subdivision refine_common(const PolyhedralComplex& base,
                          const std::map<ConeId, std::vector<std::vector<IntVec>>>& subcones);

// Projective refinement of an arbitrary subdivision: per-cone wall functions
// −Σ|l|, inductive extension with minimal sufficient constants, summation,
// maximal-pieces decomposition.
SubdivisionResult projectivize(const PolyhedralComplex& base, const Subdivision& s);

struct GoodFunctionCheck {
    bool ok = true;
    std::string violation;
};

GoodFunctionCheck verify_good_function(const PolyhedralComplex& base, const Subdivision& s,
                                       const GoodFunction& g);

// Projective subdivision with all cones nonsingular: pull_simplicialize, then
// repeated star subdivision at the minimal parallelepiped point.
SubdivisionResult nonsingular_subdivision(const PolyhedralComplex& c);

// outer refines inner.refined; result refines inner.base.
Subdivision compose(const Subdivision& outer, const Subdivision& inner);

// Good function for the composite subdivision: inner certificate plus ε times
// the outer one, with ε chosen minimally by exact wall constraints.
GoodFunction compose_good_functions(const Subdivision& inner, const GoodFunction& g_inner,
                                    const Subdivision& outer, const GoodFunction& g_outer,
                                    const Subdivision& composed);

// Same cones, finite-index sublattices chosen consistently on faces.
struct LatticeAlteration {
    PolyhedralComplex altered;  // same ids as base, re-charted
    PolyhedralComplex base;
    std::map<ConeId, IntMat> witness;  // canonical basis of N'_σ inside chart(σ)

    bool is_identity() const;
};

// Lattice alteration after subdivision (fixed composition order).
struct Alteration {
    LatticeAlteration lattice_part;  // of subdivision_part.refined
    Subdivision subdivision_part;
};

LatticeAlteration apply_lattice_alteration(const PolyhedralComplex& base,
                                           const std::map<ConeId, IntMat>& witness);

struct InducedAlteration {
    LatticeAlteration source;
    ComplexMorphism lifted;
};

InducedAlteration induced_lattice_alteration(const ComplexMorphism& f, const LatticeAlteration& a);

// Restriction of a morphism along a source-only subdivision.
ComplexMorphism restrict_to_source_subdivision(const ComplexMorphism& f, const Subdivision& s);

}  // namespace semistable
