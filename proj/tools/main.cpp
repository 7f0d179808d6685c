#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "semistable/io.hpp"

using namespace semistable;
using nlohmann::json;

namespace {

constexpr int kOk = 0;        // success / property holds
constexpr int kFails = 1;     // property fails or recipe does not reach the level
constexpr int kBadInput = 2;  // schema / precondition / input errors

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Atomic write: temp file in the same directory, then rename.
void write_file(const std::string& path, const std::string& text) {
    std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error("cannot write " + tmp);
        out << text;
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0) throw Error("cannot rename " + tmp);
}

RatVec parse_vector_arg(const std::string& text) {
    RatVec out;
    std::string cur;
    std::istringstream ss(text);
    while (std::getline(ss, cur, ',')) out.push_back(parse_rat(cur));
    if (out.empty()) throw Error("empty vector argument");
    return out;
}

ComplexMorphism load_morphism(const std::string& path) {
    Document doc = parse_document(read_file(path));
    if (!doc.morphism) throw SchemaError("/kind", "expected a morphism document");
    return *doc.morphism;
}

PolyhedralComplex load_complex(const std::string& path) {
    Document doc = parse_document(read_file(path));
    if (doc.complex) return *doc.complex;
    if (doc.morphism) return doc.morphism->source;
    throw SchemaError("/kind", "expected a complex document");
}

json witnesses_json(const std::vector<Witness>& ws) {
    json out = json::array();
    for (const auto& w : ws) {
        json jw;
        jw["cone"] = w.cone;
        jw["detail"] = w.detail;
        out.push_back(jw);
    }
    return out;
}

void check_thread_override() {
    // The only recognized environment variable; execution is sequential, the
    // value is validated and an explicit 0 is rejected.
    if (const char* env = std::getenv("SEMISTABLE_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end == env || *end != '\0' || v < 1)
            throw Error("SEMISTABLE_THREADS must be a positive integer");
    }
}

int run(int argc, char** argv) {
    CLI::App app{"Exact semistability toolkit for rational conical polyhedral complexes"};
    app.require_subcommand(1);

    std::string in_path, out_path, cert_path, property, at_vec, barycenter, center;
    ConeId star_cone = -1;

    auto* validate_cmd = app.add_subcommand("validate", "check complex/morphism invariants");
    validate_cmd->add_option("input", in_path)->required();

    auto* classify_cmd = app.add_subcommand("classify", "classify a morphism");
    classify_cmd->add_option("input", in_path)->required();

    auto* check_cmd = app.add_subcommand("check", "check one property");
    check_cmd->add_option("--property", property)->required()->check(CLI::IsMember(
        {"no-horizontal", "equidimensional", "reduced", "weak", "almost", "semistable",
         "gorenstein"}));
    check_cmd->add_option("input", in_path)->required();

    auto* subdivide_cmd = app.add_subcommand("subdivide", "star subdivision of a complex");
    subdivide_cmd->add_option("--star", star_cone, "cone id carrying the point")->required();
    subdivide_cmd->add_option("--at", at_vec, "point in the cone's chart, comma-separated")->required();
    subdivide_cmd->add_option("input", in_path)->required();
    subdivide_cmd->add_option("-o,--output", out_path)->required();

    auto* simp_cmd = app.add_subcommand("simplicialize", "triangulate without new rays");
    simp_cmd->add_option("input", in_path)->required();
    simp_cmd->add_option("-o,--output", out_path)->required();

    auto* resolve_cmd = app.add_subcommand("resolve", "nonsingular projective refinement");
    resolve_cmd->add_option("input", in_path)->required();
    resolve_cmd->add_option("-o,--output", out_path)->required();

    auto* equi_cmd = app.add_subcommand("equidimensionalize", "make the morphism equidimensional");
    equi_cmd->add_option("input", in_path)->required();
    equi_cmd->add_option("-o,--output", out_path)->required();
    equi_cmd->add_option("--cert", cert_path)->required();

    auto* red_cmd = app.add_subcommand("reduce-fibers", "lattice alteration for reduced fibers");
    red_cmd->add_option("input", in_path)->required();
    red_cmd->add_option("-o,--output", out_path)->required();
    red_cmd->add_option("--cert", cert_path)->required();

    auto* pipe_cmd = app.add_subcommand("pipeline", "full weak semistable reduction");
    pipe_cmd->add_option("input", in_path)->required();
    pipe_cmd->add_option("-o,--output", out_path)->required();
    pipe_cmd->add_option("--cert", cert_path)->required();

    auto* verify_cmd = app.add_subcommand("verify-cert", "re-check an emitted certificate bundle");
    verify_cmd->add_option("input", in_path)->required();
    verify_cmd->add_option("cert", cert_path)->required();

    auto* recipe_cmd = app.add_subcommand("recipe-8-2", "barycenter/star repair recipe");
    recipe_cmd->add_option("input", in_path)->required();
    recipe_cmd->add_option("--barycenter", barycenter)->required();
    recipe_cmd->add_option("--center", center)->required();
    recipe_cmd->add_option("-o,--output", out_path)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kBadInput;
    }

    check_thread_override();

    if (validate_cmd->parsed()) {
        // Parsing enforces every invariant; semantic violations come back as
        // data with exit code 1, structural problems as schema errors.
        json out;
        out["valid"] = true;
        out["violations"] = json::array();
        try {
            Document doc = parse_document(read_file(in_path));
            if (doc.complex) {
                auto v = validate_complex(*doc.complex);
                for (const auto& violation : v) {
                    json jv;
                    jv["invariant"] = violation.invariant;
                    jv["cones"] = violation.cones;
                    jv["detail"] = violation.detail;
                    out["violations"].push_back(jv);
                }
                out["valid"] = v.empty();
            }
        } catch (const SchemaError& e) {
            if (e.reason.rfind("invariant '", 0) != 0) throw;
            json jv;
            jv["invariant"] = "parse";
            jv["path"] = e.path;
            jv["detail"] = e.reason;
            out["violations"].push_back(jv);
            out["valid"] = false;
        }
        std::cout << out.dump() << "\n";
        return out["valid"].get<bool>() ? kOk : kFails;
    }
    if (classify_cmd->parsed()) {
        ComplexMorphism f = load_morphism(in_path);
        Classification cls = classify(f);
        std::cout << serialize_classification(cls);
        return kOk;
    }
    if (check_cmd->parsed()) {
        ComplexMorphism f = load_morphism(in_path);
        json out;
        bool holds = false;
        if (property == "no-horizontal") {
            auto r = has_no_horizontal(f);
            holds = r.ok;
            out["witnesses"] = witnesses_json(r.witnesses);
        } else if (property == "equidimensional") {
            auto r = is_equidimensional(f);
            holds = r.ok;
            out["witnesses"] = witnesses_json(r.witnesses);
        } else if (property == "reduced") {
            auto r = has_reduced_fibers(f);
            holds = r.ok;
            out["witnesses"] = witnesses_json(r.witnesses);
        } else if (property == "gorenstein") {
            auto r = gorenstein_certificate(f);
            holds = r.ok;
            out["witnesses"] = witnesses_json(r.failures);
        } else {
            Classification cls = classify(f);
            Level need = property == "weak"     ? Level::WeaklySemistable
                         : property == "almost" ? Level::AlmostSemistable
                                                : Level::Semistable;
            holds = cls.level >= need;
            out["level"] = level_name(cls.level);
            out["witnesses"] = witnesses_json(cls.witnesses);
        }
        out["property"] = property;
        out["holds"] = holds;
        std::cout << out.dump() << "\n";
        return holds ? kOk : kFails;
    }
    if (subdivide_cmd->parsed()) {
        PolyhedralComplex c = load_complex(in_path);
        auto r = star_subdivision(c, star_cone, parse_vector_arg(at_vec));
        write_file(out_path, serialize_subdivision(r.subdivision, &r.good));
        return kOk;
    }
    if (simp_cmd->parsed()) {
        PolyhedralComplex c = load_complex(in_path);
        auto r = pull_simplicialize(c);
        write_file(out_path, serialize_subdivision(r.subdivision, &r.good));
        return kOk;
    }
    if (resolve_cmd->parsed()) {
        PolyhedralComplex c = load_complex(in_path);
        auto r = nonsingular_subdivision(c);
        write_file(out_path, serialize_subdivision(r.subdivision, &r.good));
        return kOk;
    }
    if (equi_cmd->parsed()) {
        ComplexMorphism f = load_morphism(in_path);
        EquidimResult r = equidimensionalize(f);
        write_file(out_path, serialize_morphism(r.lifted));
        write_file(cert_path, serialize_certificates(r.certificates));
        return kOk;
    }
    if (red_cmd->parsed()) {
        ComplexMorphism f = load_morphism(in_path);
        ReduceFibersResult r = reduce_fibers(f);
        write_file(out_path, serialize_morphism(r.lifted));
        write_file(cert_path, serialize_certificates({r.certificate}));
        return kOk;
    }
    if (pipe_cmd->parsed()) {
        ComplexMorphism f = load_morphism(in_path);
        PipelineResult r = weak_semistable_pipeline(f);
        write_file(out_path, serialize_pipeline_result(r));
        write_file(cert_path, serialize_certificates(r.certificates));
        std::cout << serialize_classification(r.classification);
        return r.classification.level >= Level::WeaklySemistable ? kOk : kFails;
    }
    if (verify_cmd->parsed()) {
        ComplexMorphism f = load_morphism(in_path);
        Document cdoc = parse_document(read_file(cert_path));
        if (!cdoc.certificates) throw SchemaError("/kind", "expected a certificate bundle");
        auto problems = verify_certificates(f, *cdoc.certificates);
        json out;
        out["valid"] = problems.empty();
        out["problems"] = problems;
        std::cout << out.dump() << "\n";
        return problems.empty() ? kOk : kFails;
    }
    if (recipe_cmd->parsed()) {
        ComplexMorphism f = load_morphism(in_path);
        PipelineResult r = semistabilize_8_2(f, parse_vector_arg(barycenter), parse_vector_arg(center));
        write_file(out_path, serialize_pipeline_result(r));
        std::cout << serialize_classification(r.classification);
        // The recipe is example-specific; reaching less than semistable is
        // reported as data with a failing exit code.
        return r.classification.level >= Level::Semistable ? kOk : kFails;
    }
    return kBadInput;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const SchemaError& e) {
        json out;
        out["error"] = "schema";
        out["path"] = e.path;
        out["reason"] = e.reason;
        std::cout << out.dump() << "\n";
        return kBadInput;
    } catch (const PreconditionFailed& e) {
        json out;
        out["error"] = "precondition";
        out["reason"] = e.what();
        std::cout << out.dump() << "\n";
        return kBadInput;
    } catch (const Error& e) {
        json out;
        out["error"] = "input";
        out["reason"] = e.what();
        std::cout << out.dump() << "\n";
        return kBadInput;
    } catch (const std::exception& e) {
        json out;
        out["error"] = "internal";
        out["reason"] = e.what();
        std::cout << out.dump() << "\n";
        return kBadInput;
    }
}
