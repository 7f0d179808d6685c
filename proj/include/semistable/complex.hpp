#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "semistable/cone.hpp"

namespace semistable {

using ConeId = int;

// Conical polyhedral complex: cones glued along faces through integral
// embeddings (abstract face poset). Every cone is full-dimensional in its own
// chart and its chart lattice is Z^dim; embeddings identify a face's lattice
// with the saturated sublattice of the parent's chart under the image span.
class PolyhedralComplex {
  public:
    std::map<ConeId, Cone> cones;
    // Strictly comparable pairs (face, parent), closed under composition.
    std::map<std::pair<ConeId, ConeId>, IntMat> embeddings;

    bool has_cone(ConeId id) const { return cones.count(id) != 0; }
    const Cone& cone(ConeId id) const;
    std::vector<ConeId> ids() const;
    ConeId zero_cone_id() const;

    bool is_face(ConeId face, ConeId parent) const;  // reflexive
    IntMat embedding(ConeId face, ConeId parent) const;

    std::vector<ConeId> faces_of(ConeId id) const;    // strict, sorted
    std::vector<ConeId> parents_of(ConeId id) const;  // strict, sorted
    std::vector<ConeId> maximal_cones() const;
    std::vector<ConeId> ray_cones() const;

    // Primitive realized rays of `face` inside `parent`'s chart, lex-sorted.
    std::vector<IntVec> realized_rays(ConeId face, ConeId parent) const;

    // The cone id realizing a given geometric face of `parent` (by its
    // lex-sorted primitive ray set); -1 if none.
    ConeId face_with_rays(ConeId parent, const std::vector<IntVec>& rays) const;

    // Carrier of a point v in parent's chart: the face id whose relative
    // interior contains v. Throws PointOutside.
    ConeId carrier(ConeId parent, const RatVec& v) const;
};

struct ComplexViolation {
    std::string invariant;
    std::vector<ConeId> cones;
    std::string detail;
};

std::vector<ComplexViolation> validate_complex(const PolyhedralComplex& c);

// Builds a complex from maximal cones in a common ambient chart, generating
// all faces and embeddings; cones are re-charted to their own spans with
// lattice Z^ambient ∩ span. Throws NotAFan on improper overlaps.
PolyhedralComplex fan(std::size_t ambient_rank, const std::vector<std::vector<IntVec>>& maximal);

// Ambient realization data for fans built by `fan` (chart bases per cone id,
// columns = basis of Z^ambient ∩ span(cone)).
struct FanRealization {
    std::size_t ambient_rank = 0;
    std::map<ConeId, IntMat> chart_basis;
};

PolyhedralComplex fan(std::size_t ambient_rank, const std::vector<std::vector<IntVec>>& maximal,
                      FanRealization* realization);

}  // namespace semistable
