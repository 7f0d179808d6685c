#pragma once

#include "semistable/complex.hpp"

namespace semistable {

// Polyhedral morphism: per-cone integral linear maps commuting with face
// embeddings, each mapping its cone into the assigned target cone.
struct ComplexMorphism {
    PolyhedralComplex source;
    PolyhedralComplex target;
    std::map<ConeId, ConeId> assignment;  // σ ↦ τ(σ)
    std::map<ConeId, IntMat> matrices;    // chart(σ) → chart(τ(σ))

    const IntMat& matrix(ConeId id) const;
    ConeId target_of(ConeId id) const;
};

// Validates all morphism invariants; throws Error with a reason on failure.
void validate_morphism(const ComplexMorphism& f);

struct ImageCone {
    ConeId target_cone;          // chart in which `rays` live
    std::vector<IntVec> rays;    // extreme rays of f(σ), primitive, lex-sorted
    ConeId minimal_face;         // smallest face of τ(σ) containing the image
};

// Exact image f(σ) inside τ(σ)'s chart.
ImageCone image_cone(const ComplexMorphism& f, ConeId sigma);

struct Witness {
    ConeId cone = -1;
    std::string detail;
};

struct CheckResult {
    bool ok = true;
    std::vector<Witness> witnesses;  // canonical order: ascending cone id
};

// No horizontal part: f⁻¹(0) = {0}; fails iff some ray maps to zero.
CheckResult has_no_horizontal(const ComplexMorphism& f);

// The image of every cone is a cone of the target.
CheckResult is_equidimensional(const ComplexMorphism& f);

// f(N_σ ∩ σ) = N_φ ∩ φ for every σ with image face φ (semigroup reading).
// Requires is_equidimensional and has_no_horizontal; throws PreconditionFailed.
CheckResult has_reduced_fibers(const ComplexMorphism& f);

// f(N_σ) = N_φ (lattice reading). Requires is_equidimensional.
CheckResult lattice_image_surjective(const ComplexMorphism& f);

enum class Level {
    NotEquidimensional,
    Equidimensional,
    WeaklySemistable,
    AlmostSemistable,
    Semistable,
};

std::string level_name(Level level);

struct Classification {
    bool no_horizontal = false;
    bool equidimensional = false;
    bool semigroup_reduced = false;    // f(N_σ∩σ) = N_φ∩φ
    bool lattice_surjective = false;   // f(N_σ) = N_φ
    bool reduced_fibers = false;           // both readings
    bool readings_disagree = false;
    bool base_nonsingular = false;         // target simplicial with index 1
    bool source_simplicial = false;
    bool source_index_one = false;
    bool primitive_edge_images = false;    // every source ray primitive ↦ target ray primitive
    Level level = Level::NotEquidimensional;
    std::vector<Witness> witnesses;
};

Classification classify(const ComplexMorphism& f);

}  // namespace semistable
