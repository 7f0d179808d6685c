#pragma once

#include <string>

#include "semistable/reduce.hpp"

namespace semistable {

// Canonical JSON document model, format "semistable/v1". All lattice data is
// serialized as decimal strings ("p" or reduced "p/q"); structural counts and
// ids are JSON numbers. Serialization is canonical: object keys sorted, cones
// by id, rays in canonical order. Parsing rejects unknown fields.
struct Document {
    std::string kind;  // complex | morphism | subdivision | lattice-alteration |
                       // certificate-bundle | pipeline-result
    std::optional<PolyhedralComplex> complex;
    std::optional<ComplexMorphism> morphism;
    std::optional<Subdivision> subdivision;
    std::optional<GoodFunction> good;  // present with subdivision when emitted
    std::optional<LatticeAlteration> alteration;
    std::optional<std::vector<Certificate>> certificates;
    std::optional<PipelineResult> pipeline;
};

Document parse_document(const std::string& text);
std::string serialize_document(const Document& doc);

// Typed helpers (canonical text).
std::string serialize_complex(const PolyhedralComplex& c);
std::string serialize_morphism(const ComplexMorphism& f);
std::string serialize_subdivision(const Subdivision& s, const GoodFunction* good);
std::string serialize_alteration(const LatticeAlteration& a);
std::string serialize_certificates(const std::vector<Certificate>& certs);
std::string serialize_pipeline_result(const PipelineResult& r);
std::string serialize_classification(const Classification& c);

// Deterministic digest (FNV-1a 64) of canonical text, as fixed-width hex.
std::string digest(const std::string& canonical_text);
std::string complex_digest(const PolyhedralComplex& c);
std::string morphism_digest(const ComplexMorphism& f);

}  // namespace semistable
