#pragma once

#include <vector>

#include "semistable/linalg.hpp"

namespace semistable {

// Description of the dual cone {y : v·y ≥ 0 for all v in V} as
// span(lineality) + cone(rays), with cone(rays) pointed and the rays its
// extreme rays, all primitive integer vectors in canonical (lex) order.
struct DualDescription {
    std::vector<IntVec> lineality;  // basis of V^⊥
    std::vector<IntVec> rays;
};

// Exact double description; `dim` is the ambient dimension. Works for any
// finite vector set, including empty (dual = all of Q^dim).
DualDescription dual_cone(const std::vector<IntVec>& vectors, std::size_t dim);

// cone(generators) contains no line and no generator is zero.
bool is_pointed(const std::vector<IntVec>& generators, std::size_t dim);

// Facet normals of a full-dimensional pointed cone given by generators.
std::vector<IntVec> facet_normals(const std::vector<IntVec>& generators, std::size_t dim);

// Extreme rays of {x : a·x ≥ 0 for a in normals}; throws if the set contains
// a line (callers intersect pointed cones).
std::vector<IntVec> rays_from_inequalities(const std::vector<IntVec>& normals, std::size_t dim);

std::size_t span_rank(const std::vector<IntVec>& vectors, std::size_t dim);

// Extreme rays of cone(vectors) (pointed, any dimension), primitive and
// lex-sorted. Throws if the conical hull contains a line.
std::vector<IntVec> extreme_rays(const std::vector<IntVec>& vectors, std::size_t dim);

// Integer basis of Z^dim ∩ span(vectors), canonical (HNF) columns.
IntMat saturated_span_basis(std::size_t dim, const std::vector<IntVec>& vectors);

// Lattice points of the rational polytope {x : A x ≥ b} (must be bounded),
// found by exact Fourier–Motzkin projection. Guarded by `limit` on the
// number of enumerated candidates.
std::vector<IntVec> polytope_lattice_points(const RatMat& a, const RatVec& b, std::size_t limit);

// Nonzero lattice points in the half-open parallelepiped {V·t : t in [0,1)^n}
// for a nonsingular integer matrix V, in canonical order.
std::vector<IntVec> parallelepiped_points(const IntMat& v);

// Hilbert basis of cone(rays) ∩ Z^dim for a pointed cone, canonical order.
// Test-oracle-grade; guarded by `limit`.
std::vector<IntVec> hilbert_basis(const std::vector<IntVec>& rays, std::size_t dim,
                                  std::size_t limit);

}  // namespace semistable
