#pragma once

#include <optional>
#include <vector>

#include "semistable/geometry.hpp"
#include "semistable/lattice.hpp"

namespace semistable {

// A strictly convex rational polyhedral cone, full-dimensional in its chart.
// The chart is the cone's lattice: internally every cone lives over Z^dim,
// and superlattices/sublattices are handled by re-charting (see complex and
// alteration machinery). Rays are primitive, extreme, lex-sorted.
class Cone {
  public:
    Cone() = default;

    // Canonicalizing constructor: drops redundant generators, primitivizes,
    // sorts. Throws NotStrictlyConvex / RankMismatch.
    static Cone make(std::size_t dim, const std::vector<IntVec>& generators);
    static Cone make_rational(std::size_t dim, const std::vector<RatVec>& generators);
    static Cone zero();

    std::size_t dim() const { return dim_; }
    const std::vector<IntVec>& rays() const { return rays_; }
    const std::vector<IntVec>& facets() const { return facets_; }
    bool is_zero_cone() const { return dim_ == 0; }
    bool is_simplicial() const { return rays_.size() == dim_; }

    // Sum of the primitive ray generators (zero vector for the zero cone).
    IntVec interior_point() const;

    bool operator==(const Cone& o) const { return dim_ == o.dim_ && rays_ == o.rays_; }
    bool operator!=(const Cone& o) const { return !(*this == o); }

  private:
    std::size_t dim_ = 0;
    std::vector<IntVec> rays_;
    std::vector<IntVec> facets_;
};

struct Face {
    std::vector<std::size_t> ray_indices;  // sorted indices into cone.rays()
    IntVec supporting;                     // ≥ 0 on the cone, = 0 exactly on the face
    std::size_t dim = 0;
};

// All faces (improper and zero included), deterministic order:
// by dimension, then lexicographically on ray index sets.
std::vector<Face> faces(const Cone& c);

enum class Location { Interior, Boundary, Outside };

struct LocateResult {
    Location location;
    std::optional<Face> face;  // set when on the boundary
};

LocateResult contains(const Cone& c, const RatVec& v);

// Index of the subgroup generated by the primitive ray generators in Z^dim.
// Throws NotSimplicial for non-simplicial cones.
Int multiplicity(const Cone& c);

bool is_nonsingular(const Cone& c);

// Integral covector pairing to -1 with every primitive ray generator, if any.
std::optional<IntVec> gorenstein_functional(const Cone& c);

// Rays of the face containing v in its relative interior (v must be in c).
std::vector<std::size_t> carrier_ray_set(const Cone& c, const RatVec& v);

}  // namespace semistable
