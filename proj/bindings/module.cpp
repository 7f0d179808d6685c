#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "semistable/io.hpp"

namespace py = pybind11;
using namespace semistable;

namespace {

ComplexMorphism morphism_from_text(const std::string& text) {
    Document doc = parse_document(text);
    if (!doc.morphism) throw SchemaError("/kind", "expected a morphism document");
    return *doc.morphism;
}

PolyhedralComplex complex_from_text(const std::string& text) {
    Document doc = parse_document(text);
    if (doc.complex) return *doc.complex;
    if (doc.morphism) return doc.morphism->source;
    throw SchemaError("/kind", "expected a complex document");
}

RatVec vector_from_strings(const std::vector<std::string>& entries) {
    RatVec out;
    for (const auto& e : entries) out.push_back(parse_rat(e));
    return out;
}

py::dict classification_dict(const Classification& c) {
    py::dict flags;
    flags["no_horizontal"] = c.no_horizontal;
    flags["equidimensional"] = c.equidimensional;
    flags["semigroup_reduced"] = c.semigroup_reduced;
    flags["lattice_surjective"] = c.lattice_surjective;
    flags["reduced_fibers"] = c.reduced_fibers;
    flags["readings_disagree"] = c.readings_disagree;
    flags["base_nonsingular"] = c.base_nonsingular;
    flags["source_simplicial"] = c.source_simplicial;
    flags["source_index_one"] = c.source_index_one;
    flags["primitive_edge_images"] = c.primitive_edge_images;
    py::list witnesses;
    for (const auto& w : c.witnesses) {
        py::dict jw;
        jw["cone"] = w.cone;
        jw["detail"] = w.detail;
        witnesses.append(jw);
    }
    py::dict out;
    out["level"] = level_name(c.level);
    out["flags"] = flags;
    out["witnesses"] = witnesses;
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Exact semistability toolkit for rational conical polyhedral complexes";

    // Translators run newest-first: register the base before the derived.
    py::register_exception<Error>(m, "ToolkitError");
    py::register_exception<PreconditionFailed>(m, "PreconditionFailed");
    py::register_exception<SchemaError>(m, "SchemaError");

    m.def("canonicalize", [](const std::string& text) {
        return serialize_document(parse_document(text));
    }, py::arg("text"), "Parse a document and return its canonical serialization.");

    m.def("validate", [](const std::string& text) {
        Document doc = parse_document(text);
        py::list out;
        if (doc.complex)
            for (const auto& v : validate_complex(*doc.complex)) out.append(v.invariant);
        return out;
    }, py::arg("text"), "Invariant violations of a complex document (empty when valid).");

    m.def("classify", [](const std::string& text) {
        return classification_dict(classify(morphism_from_text(text)));
    }, py::arg("text"), "Classify a morphism document per the semistability hierarchy.");

    m.def("check", [](const std::string& text, const std::string& property) {
        ComplexMorphism f = morphism_from_text(text);
        if (property == "no-horizontal") return has_no_horizontal(f).ok;
        if (property == "equidimensional") return is_equidimensional(f).ok;
        if (property == "reduced") return has_reduced_fibers(f).ok;
        if (property == "gorenstein") return gorenstein_certificate(f).ok;
        Classification c = classify(f);
        if (property == "weak") return c.level >= Level::WeaklySemistable;
        if (property == "almost") return c.level >= Level::AlmostSemistable;
        if (property == "semistable") return c.level >= Level::Semistable;
        throw Error("unknown property '" + property + "'");
    }, py::arg("text"), py::arg("property"));

    m.def("star_subdivision", [](const std::string& text, ConeId cone,
                                 const std::vector<std::string>& at) {
        PolyhedralComplex c = complex_from_text(text);
        auto r = star_subdivision(c, cone, vector_from_strings(at));
        return serialize_subdivision(r.subdivision, &r.good);
    }, py::arg("text"), py::arg("cone"), py::arg("at"));

    m.def("simplicialize", [](const std::string& text) {
        auto r = pull_simplicialize(complex_from_text(text));
        return serialize_subdivision(r.subdivision, &r.good);
    }, py::arg("text"), "Projective triangulation without new rays.");

    m.def("resolve", [](const std::string& text) {
        auto r = nonsingular_subdivision(complex_from_text(text));
        return serialize_subdivision(r.subdivision, &r.good);
    }, py::arg("text"), "Nonsingular projective refinement.");

    m.def("equidimensionalize", [](const std::string& text) {
        EquidimResult r = equidimensionalize(morphism_from_text(text));
        py::dict out;
        out["morphism"] = serialize_morphism(r.lifted);
        out["certificates"] = serialize_certificates(r.certificates);
        return out;
    }, py::arg("text"));

    m.def("reduce_fibers", [](const std::string& text) {
        ReduceFibersResult r = reduce_fibers(morphism_from_text(text));
        py::dict out;
        out["morphism"] = serialize_morphism(r.lifted);
        out["certificates"] = serialize_certificates({r.certificate});
        return out;
    }, py::arg("text"));

    m.def("pipeline", [](const std::string& text) {
        PipelineResult r = weak_semistable_pipeline(morphism_from_text(text));
        py::dict out;
        out["result"] = serialize_pipeline_result(r);
        out["certificates"] = serialize_certificates(r.certificates);
        out["classification"] = classification_dict(r.classification);
        return out;
    }, py::arg("text"), "Full weak semistable reduction with certificates.");

    m.def("recipe_8_2", [](const std::string& text, const std::vector<std::string>& barycenter,
                           const std::vector<std::string>& center) {
        PipelineResult r = semistabilize_8_2(morphism_from_text(text),
                                             vector_from_strings(barycenter),
                                             vector_from_strings(center));
        py::dict out;
        out["result"] = serialize_pipeline_result(r);
        out["classification"] = classification_dict(r.classification);
        return out;
    }, py::arg("text"), py::arg("barycenter"), py::arg("center"));

    m.def("verify_certificates", [](const std::string& morphism_text, const std::string& cert_text) {
        ComplexMorphism f = morphism_from_text(morphism_text);
        Document doc = parse_document(cert_text);
        if (!doc.certificates) throw SchemaError("/kind", "expected a certificate bundle");
        return verify_certificates(f, *doc.certificates);
    }, py::arg("morphism_text"), py::arg("cert_text"));

    m.def("hnf", [](const std::vector<std::vector<std::string>>& rows) {
        std::vector<IntVec> rws;
        for (const auto& r : rows) {
            IntVec row;
            for (const auto& e : r) row.push_back(parse_int(e));
            rws.push_back(row);
        }
        auto r = hnf(IntMat::from_rows(rws, rws.empty() ? 0 : rws[0].size()));
        std::vector<std::vector<std::string>> h;
        for (std::size_t i = 0; i < r.h.rows; ++i) {
            std::vector<std::string> row;
            for (std::size_t j = 0; j < r.h.cols; ++j) row.push_back(int_to_string(r.h.at(i, j)));
            h.push_back(row);
        }
        return h;
    }, py::arg("rows"), "Column Hermite normal form (entries as decimal strings).");

    m.attr("__version__") = "1.0.0";
}
