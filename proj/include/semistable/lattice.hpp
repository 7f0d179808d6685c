#pragma once

#include <optional>

#include "semistable/linalg.hpp"

namespace semistable {

// A finite-rank free abelian subgroup of Q^chart_dim, stored by a canonical
// (Hermite-reduced) rational basis matrix whose columns generate it. Two
// lattices are equal iff their canonical bases coincide.
class Lattice {
  public:
    Lattice() = default;

    static Lattice standard(std::size_t chart_dim);
    static Lattice zero(std::size_t chart_dim);
    // Canonicalizes arbitrary rational generators (dependent/redundant allowed).
    static Lattice from_generators(std::size_t chart_dim, const RatMat& generators);
    static Lattice from_generators(std::size_t chart_dim, const IntMat& generators);

    std::size_t chart_dim() const { return chart_dim_; }
    std::size_t rank() const { return basis_.cols; }
    const RatMat& basis() const { return basis_; }
    bool is_standard() const;

    // Coordinates of v in this basis, if v lies in the rational span.
    std::optional<RatVec> span_coords(const RatVec& v) const;
    bool contains(const RatVec& v) const;
    bool contains_lattice(const Lattice& sub) const;

    bool operator==(const Lattice& o) const {
        return chart_dim_ == o.chart_dim_ && basis_ == o.basis_;
    }
    bool operator!=(const Lattice& o) const { return !(*this == o); }

  private:
    std::size_t chart_dim_ = 0;
    RatMat basis_;  // chart_dim × rank, canonical
};

// [sup : sub]; requires equal rank and sub ⊆ sup.
Int lattice_index(const Lattice& sub, const Lattice& sup);

// Smallest sublattice of `ambient` containing `sub` with torsion-free quotient.
Lattice saturate(const Lattice& sub, const Lattice& ambient);

// Lattice generated by f(basis of l), canonicalized in the target chart.
Lattice image_lattice(const IntMat& f, const Lattice& l);

// source ∩ f⁻¹(target_sub).
Lattice preimage_lattice(const IntMat& f, const Lattice& source, const Lattice& target_sub);

struct PrimitivePoint {
    IntVec point;  // in lattice coordinates of l
    Rat multiple;  // v = multiple · point
};

// The primitive lattice point on the ray through v (v in chart coordinates).
PrimitivePoint primitive_of(const RatVec& v, const Lattice& l);

}  // namespace semistable
