#include "semistable/io.hpp"

#include <json.hpp>

#include <algorithm>

#include "semistable/errors.hpp"

namespace semistable {

using nlohmann::json;

namespace {

// -- strict field checking ----------------------------------------------------

void expect_fields(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed)
            if (it.key() == a) {
                ok = true;
                break;
            }
        if (!ok) throw SchemaError(path + "/" + it.key(), "unknown field");
    }
}

const json& field(const json& j, const std::string& path, const char* name) {
    auto it = j.find(name);
    if (it == j.end()) throw SchemaError(path + "/" + name, "missing field");
    return *it;
}

// -- scalars --------------------------------------------------------------------

json int_json(const Int& v) { return json(int_to_string(v)); }
json rat_json(const Rat& v) { return json(rat_to_string(v)); }

Int parse_int_json(const json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError(path, "expected an integer as a decimal string");
    try {
        return parse_int(j.get<std::string>());
    } catch (const Error& e) {
        throw SchemaError(path, e.what());
    }
}

Rat parse_rat_json(const json& j, const std::string& path) {
    if (!j.is_string()) throw SchemaError(path, "expected a rational as a decimal string");
    try {
        return parse_rat(j.get<std::string>());
    } catch (const Error& e) {
        throw SchemaError(path, e.what());
    }
}

json int_vec_json(const IntVec& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(int_json(x));
    return out;
}

json rat_vec_json(const RatVec& v) {
    json out = json::array();
    for (const auto& x : v) out.push_back(rat_json(x));
    return out;
}

IntVec parse_int_vec(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array");
    IntVec out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_int_json(j[i], path + "/" + std::to_string(i)));
    return out;
}

RatVec parse_rat_vec(const json& j, const std::string& path) {
    if (!j.is_array()) throw SchemaError(path, "expected an array");
    RatVec out;
    for (std::size_t i = 0; i < j.size(); ++i)
        out.push_back(parse_rat_json(j[i], path + "/" + std::to_string(i)));
    return out;
}

json int_mat_json(const IntMat& m) {
    json out = json::array();
    for (std::size_t r = 0; r < m.rows; ++r) out.push_back(int_vec_json(m.row(r)));
    return out;
}

IntMat parse_int_mat(const json& j, const std::string& path, std::size_t rows, std::size_t cols) {
    if (!j.is_array()) throw SchemaError(path, "expected a matrix (array of rows)");
    if (j.size() != rows) throw SchemaError(path, "expected " + std::to_string(rows) + " rows");
    std::vector<IntVec> rws;
    for (std::size_t r = 0; r < j.size(); ++r) {
        auto row = parse_int_vec(j[r], path + "/" + std::to_string(r));
        if (row.size() != cols) throw SchemaError(path + "/" + std::to_string(r), "bad row length");
        rws.push_back(row);
    }
    return IntMat::from_rows(rws, cols);
}

RatMat parse_rat_mat(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) throw SchemaError(path, "expected a nonempty matrix");
    std::vector<RatVec> rows;
    for (std::size_t r = 0; r < j.size(); ++r) rows.push_back(parse_rat_vec(j[r], path + "/" + std::to_string(r)));
    RatMat m(rows.size(), rows[0].size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != m.cols) throw SchemaError(path, "ragged matrix");
        for (std::size_t c = 0; c < m.cols; ++c) m.at(r, c) = rows[r][c];
    }
    return m;
}

// -- complexes --------------------------------------------------------------------

json complex_json(const PolyhedralComplex& c) {
    json cones = json::array();
    for (const auto& [id, cone] : c.cones) {
        json jc;
        jc["id"] = id;
        jc["rank"] = cone.dim();
        json rays = json::array();
        for (const auto& r : cone.rays()) rays.push_back(int_vec_json(r));
        jc["rays"] = rays;
        cones.push_back(jc);
    }
    json faces = json::array();
    for (const auto& [key, e] : c.embeddings) {
        json jf;
        jf["face"] = key.first;
        jf["parent"] = key.second;
        jf["embedding"] = int_mat_json(e);
        faces.push_back(jf);
    }
    json out;
    out["format"] = "semistable/v1";
    out["kind"] = "complex";
    out["mode"] = "abstract";
    out["cones"] = cones;
    out["faces"] = faces;
    return out;
}

// Parses a complex; per-cone rational lattice bases (non-default charts) are
// folded in by re-charting, recorded in chart_change (old chart → new chart
// conversion alters every matrix touching the cone).
PolyhedralComplex parse_complex_json(const json& j, const std::string& path,
                                     std::map<ConeId, RatMat>* chart_change) {
    expect_fields(j, path, {"format", "kind", "mode", "rank", "maximal_cones", "cones", "faces",
                            "lattices"});
    if (field(j, path, "kind").get<std::string>() != "complex")
        throw SchemaError(path + "/kind", "expected 'complex'");
    std::string mode = field(j, path, "mode").get<std::string>();
    if (mode == "fan") {
        expect_fields(j, path, {"format", "kind", "mode", "rank", "maximal_cones"});
        auto rank = field(j, path, "rank");
        if (!rank.is_number_unsigned()) throw SchemaError(path + "/rank", "expected a count");
        const json& mc = field(j, path, "maximal_cones");
        if (!mc.is_array()) throw SchemaError(path + "/maximal_cones", "expected an array");
        std::vector<std::vector<IntVec>> maximal;
        for (std::size_t i = 0; i < mc.size(); ++i) {
            std::vector<IntVec> gens;
            const json& cone = mc[i];
            if (!cone.is_array())
                throw SchemaError(path + "/maximal_cones/" + std::to_string(i), "expected an array");
            for (std::size_t g = 0; g < cone.size(); ++g)
                gens.push_back(parse_int_vec(
                    cone[g], path + "/maximal_cones/" + std::to_string(i) + "/" + std::to_string(g)));
            maximal.push_back(gens);
        }
        try {
            return fan(rank.get<std::size_t>(), maximal);
        } catch (const Error& e) {
            throw SchemaError(path, std::string("invalid fan: ") + e.what());
        }
    }
    if (mode != "abstract") throw SchemaError(path + "/mode", "expected 'fan' or 'abstract'");
    PolyhedralComplex out;
    const json& cones = field(j, path, "cones");
    if (!cones.is_array()) throw SchemaError(path + "/cones", "expected an array");
    for (std::size_t i = 0; i < cones.size(); ++i) {
        std::string cpath = path + "/cones/" + std::to_string(i);
        expect_fields(cones[i], cpath, {"id", "rank", "rays"});
        if (!field(cones[i], cpath, "id").is_number_integer())
            throw SchemaError(cpath + "/id", "expected an integer id");
        ConeId id = field(cones[i], cpath, "id").get<ConeId>();
        std::size_t rank = field(cones[i], cpath, "rank").get<std::size_t>();
        const json& rays = field(cones[i], cpath, "rays");
        std::vector<IntVec> rs;
        for (std::size_t r = 0; r < rays.size(); ++r) {
            auto v = parse_int_vec(rays[r], cpath + "/rays/" + std::to_string(r));
            if (v.size() != rank) throw SchemaError(cpath + "/rays", "ray length != rank");
            rs.push_back(v);
        }
        if (out.cones.count(id)) throw SchemaError(cpath + "/id", "duplicate cone id");
        try {
            out.cones[id] = rank == 0 ? Cone::zero() : Cone::make(rank, rs);
        } catch (const Error& e) {
            throw SchemaError(cpath, std::string("invalid cone: ") + e.what());
        }
    }
    const json& faces = field(j, path, "faces");
    if (!faces.is_array()) throw SchemaError(path + "/faces", "expected an array");
    for (std::size_t i = 0; i < faces.size(); ++i) {
        std::string fpath = path + "/faces/" + std::to_string(i);
        expect_fields(faces[i], fpath, {"face", "parent", "embedding"});
        ConeId f = field(faces[i], fpath, "face").get<ConeId>();
        ConeId p = field(faces[i], fpath, "parent").get<ConeId>();
        if (!out.cones.count(f) || !out.cones.count(p))
            throw SchemaError(fpath, "face relation names unknown cone");
        IntMat e = parse_int_mat(field(faces[i], fpath, "embedding"), fpath + "/embedding",
                                 out.cones[p].dim(), out.cones[f].dim());
        if (out.embeddings.count({f, p})) throw SchemaError(fpath, "duplicate face relation");
        out.embeddings[{f, p}] = e;
    }
    // Derive missing composite relations so that the stored poset is closed.
    bool changed = true;
    while (changed) {
        changed = false;
        for (const auto& [k1, e1] : out.embeddings)
            for (const auto& [k2, e2] : out.embeddings) {
                if (k1.second != k2.first) continue;
                if (out.embeddings.count({k1.first, k2.second})) continue;
                out.embeddings[{k1.first, k2.second}] = mat_mul(e2, e1);
                changed = true;
                break;
            }
    }
    // Optional per-cone lattices: re-chart so every stored lattice is standard.
    if (j.count("lattices")) {
        const json& ls = field(j, path, "lattices");
        if (!ls.is_object()) throw SchemaError(path + "/lattices", "expected an object");
        std::map<ConeId, RatMat> basis;
        for (auto it = ls.begin(); it != ls.end(); ++it) {
            ConeId id;
            try {
                id = std::stoi(it.key());
            } catch (...) {
                throw SchemaError(path + "/lattices/" + it.key(), "bad cone id");
            }
            if (!out.cones.count(id)) throw SchemaError(path + "/lattices/" + it.key(), "unknown cone");
            RatMat m = parse_rat_mat(*it, path + "/lattices/" + it.key());
            std::size_t d = out.cones[id].dim();
            if (m.rows != d || m.cols != d)
                throw SchemaError(path + "/lattices/" + it.key(), "basis must be rank × rank");
            basis[id] = m;
        }
        // Canonical chart basis per re-charted cone.
        std::map<ConeId, RatMat> change;  // new-chart ← old-chart conversion B⁻¹
        for (auto& [id, m] : basis) {
            Lattice l = Lattice::from_generators(out.cones[id].dim(), m);
            if (l.rank() != out.cones[id].dim())
                throw SchemaError(path + "/lattices/" + std::to_string(id), "basis not of full rank");
            change[id] = rat_inverse(l.basis());
        }
        PolyhedralComplex recharted;
        for (const auto& [id, cone] : out.cones) {
            auto it = change.find(id);
            if (it == change.end()) {
                recharted.cones[id] = cone;
                continue;
            }
            std::vector<IntVec> rays;
            for (const auto& r : cone.rays()) rays.push_back(primitive_vector(mat_apply(it->second, to_rat(r))));
            try {
                recharted.cones[id] = Cone::make(cone.dim(), rays);
            } catch (const Error& e) {
                throw SchemaError(path + "/lattices/" + std::to_string(id),
                                  std::string("re-charted cone invalid: ") + e.what());
            }
        }
        for (const auto& [key, e] : out.embeddings) {
            RatMat m = e.to_rat();
            auto itp = change.find(key.second);
            auto itf = change.find(key.first);
            if (itp != change.end()) m = mat_mul(itp->second, m);
            if (itf != change.end()) m = mat_mul(m, rat_inverse(itf->second));
            if (!is_integral(m))
                throw SchemaError(path + "/faces", "face embedding not integral in the given lattices");
            recharted.embeddings[key] = to_int(m);
        }
        out = recharted;
        if (chart_change) *chart_change = change;
    }
    auto bad = validate_complex(out);
    if (!bad.empty())
        throw SchemaError(path, "invariant '" + bad.front().invariant + "' fails: " +
                                    bad.front().detail);
    return out;
}

// -- morphisms ---------------------------------------------------------------------

json morphism_json(const ComplexMorphism& f) {
    json out;
    out["format"] = "semistable/v1";
    out["kind"] = "morphism";
    out["source"] = complex_json(f.source);
    out["target"] = complex_json(f.target);
    json assign = json::object();
    json mats = json::object();
    for (const auto& [id, t] : f.assignment) assign[std::to_string(id)] = t;
    for (const auto& [id, m] : f.matrices) mats[std::to_string(id)] = int_mat_json(m);
    out["assignment"] = assign;
    out["matrices"] = mats;
    return out;
}

ComplexMorphism parse_morphism_json(const json& j, const std::string& path) {
    expect_fields(j, path, {"format", "kind", "source", "target", "assignment", "matrices"});
    if (field(j, path, "kind").get<std::string>() != "morphism")
        throw SchemaError(path + "/kind", "expected 'morphism'");
    ComplexMorphism f;
    std::map<ConeId, RatMat> source_change, target_change;
    f.source = parse_complex_json(field(j, path, "source"), path + "/source", &source_change);
    f.target = parse_complex_json(field(j, path, "target"), path + "/target", &target_change);
    const json& assign = field(j, path, "assignment");
    if (!assign.is_object()) throw SchemaError(path + "/assignment", "expected an object");
    for (auto it = assign.begin(); it != assign.end(); ++it) {
        ConeId s;
        try {
            s = std::stoi(it.key());
        } catch (...) {
            throw SchemaError(path + "/assignment/" + it.key(), "bad cone id");
        }
        if (!it->is_number_integer())
            throw SchemaError(path + "/assignment/" + it.key(), "expected a target cone id");
        f.assignment[s] = it->get<ConeId>();
    }
    const json& mats = field(j, path, "matrices");
    if (!mats.is_object()) throw SchemaError(path + "/matrices", "expected an object");
    for (auto it = mats.begin(); it != mats.end(); ++it) {
        ConeId s;
        try {
            s = std::stoi(it.key());
        } catch (...) {
            throw SchemaError(path + "/matrices/" + it.key(), "bad cone id");
        }
        if (!f.source.has_cone(s) || !f.assignment.count(s))
            throw SchemaError(path + "/matrices/" + it.key(), "matrix names unassigned cone");
        ConeId t = f.assignment[s];
        if (!f.target.has_cone(t))
            throw SchemaError(path + "/assignment/" + it.key(), "unknown target cone");
        IntMat m = parse_int_mat(*it, path + "/matrices/" + it.key(), f.target.cone(t).dim(),
                                 f.source.cone(s).dim());
        // Fold in re-charted lattices on either side.
        RatMat mm = m.to_rat();
        auto itc = target_change.find(t);
        if (itc != target_change.end()) mm = mat_mul(itc->second, mm);
        auto isc = source_change.find(s);
        if (isc != source_change.end()) mm = mat_mul(mm, rat_inverse(isc->second));
        if (!is_integral(mm))
            throw SchemaError(path + "/matrices/" + it.key(),
                              "matrix is not integral in the given lattices");
        f.matrices[s] = to_int(mm);
    }
    try {
        validate_morphism(f);
    } catch (const Error& e) {
        throw SchemaError(path, std::string("invalid morphism: ") + e.what());
    }
    return f;
}

// -- subdivisions / alterations ----------------------------------------------------

json subdivision_json(const Subdivision& s, const GoodFunction* good) {
    json out;
    out["format"] = "semistable/v1";
    out["kind"] = "subdivision";
    out["base"] = complex_json(s.base);
    out["refined"] = complex_json(s.refined);
    json carrier = json::object();
    for (const auto& [id, data] : s.carrier) {
        json c;
        c["cone"] = data.first;
        c["embedding"] = int_mat_json(data.second);
        carrier[std::to_string(id)] = c;
    }
    out["carrier"] = carrier;
    if (good) {
        json g = json::object();
        for (const auto& [base_id, cells] : good->pieces) {
            json list = json::array();
            for (const auto& [cell, covector] : cells) {
                json e;
                e["cell"] = cell;
                e["covector"] = rat_vec_json(covector);
                list.push_back(e);
            }
            g[std::to_string(base_id)] = list;
        }
        out["good_function"] = g;
    }
    return out;
}

std::pair<Subdivision, std::optional<GoodFunction>> parse_subdivision_json(const json& j,
                                                                            const std::string& path) {
    expect_fields(j, path, {"format", "kind", "base", "refined", "carrier", "good_function"});
    if (field(j, path, "kind").get<std::string>() != "subdivision")
        throw SchemaError(path + "/kind", "expected 'subdivision'");
    Subdivision s;
    s.base = parse_complex_json(field(j, path, "base"), path + "/base", nullptr);
    s.refined = parse_complex_json(field(j, path, "refined"), path + "/refined", nullptr);
    const json& carrier = field(j, path, "carrier");
    if (!carrier.is_object()) throw SchemaError(path + "/carrier", "expected an object");
    for (auto it = carrier.begin(); it != carrier.end(); ++it) {
        ConeId id;
        try {
            id = std::stoi(it.key());
        } catch (...) {
            throw SchemaError(path + "/carrier/" + it.key(), "bad cone id");
        }
        if (!s.refined.has_cone(id)) throw SchemaError(path + "/carrier/" + it.key(), "unknown cone");
        std::string cpath = path + "/carrier/" + it.key();
        expect_fields(*it, cpath, {"cone", "embedding"});
        ConeId b = field(*it, cpath, "cone").get<ConeId>();
        if (!s.base.has_cone(b)) throw SchemaError(cpath + "/cone", "unknown base cone");
        s.carrier[id] = {b, parse_int_mat(field(*it, cpath, "embedding"), cpath + "/embedding",
                                          s.base.cone(b).dim(), s.refined.cone(id).dim())};
    }
    auto bad = verify_subdivision(s);
    if (!bad.empty())
        throw SchemaError(path,
                          "subdivision invariant '" + bad.front().invariant + "' fails: " +
                              bad.front().detail);
    std::optional<GoodFunction> good;
    if (j.count("good_function")) {
        GoodFunction g;
        const json& gj = j["good_function"];
        if (!gj.is_object()) throw SchemaError(path + "/good_function", "expected an object");
        for (auto it = gj.begin(); it != gj.end(); ++it) {
            ConeId base_id;
            try {
                base_id = std::stoi(it.key());
            } catch (...) {
                throw SchemaError(path + "/good_function/" + it.key(), "bad cone id");
            }
            std::map<ConeId, RatVec> cells;
            if (!it->is_array()) throw SchemaError(path + "/good_function/" + it.key(), "expected array");
            for (std::size_t i = 0; i < it->size(); ++i) {
                std::string epath = path + "/good_function/" + it.key() + "/" + std::to_string(i);
                expect_fields((*it)[i], epath, {"cell", "covector"});
                ConeId cell = field((*it)[i], epath, "cell").get<ConeId>();
                cells[cell] = parse_rat_vec(field((*it)[i], epath, "covector"), epath + "/covector");
            }
            g.pieces[base_id] = cells;
        }
        good = g;
    }
    return {s, good};
}

json alteration_json(const LatticeAlteration& a) {
    json out;
    out["format"] = "semistable/v1";
    out["kind"] = "lattice-alteration";
    out["base"] = complex_json(a.base);
    out["altered"] = complex_json(a.altered);
    json w = json::object();
    for (const auto& [id, m] : a.witness) w[std::to_string(id)] = int_mat_json(m);
    out["witness"] = w;
    return out;
}

LatticeAlteration parse_alteration_json(const json& j, const std::string& path) {
    expect_fields(j, path, {"format", "kind", "base", "altered", "witness"});
    if (field(j, path, "kind").get<std::string>() != "lattice-alteration")
        throw SchemaError(path + "/kind", "expected 'lattice-alteration'");
    PolyhedralComplex base = parse_complex_json(field(j, path, "base"), path + "/base", nullptr);
    const json& wj = field(j, path, "witness");
    if (!wj.is_object()) throw SchemaError(path + "/witness", "expected an object");
    std::map<ConeId, IntMat> witness;
    for (auto it = wj.begin(); it != wj.end(); ++it) {
        ConeId id;
        try {
            id = std::stoi(it.key());
        } catch (...) {
            throw SchemaError(path + "/witness/" + it.key(), "bad cone id");
        }
        if (!base.has_cone(id)) throw SchemaError(path + "/witness/" + it.key(), "unknown cone");
        std::size_t d = base.cone(id).dim();
        witness[id] = parse_int_mat(*it, path + "/witness/" + it.key(), d, d);
    }
    LatticeAlteration a;
    try {
        a = apply_lattice_alteration(base, witness);
    } catch (const Error& e) {
        throw SchemaError(path, std::string("invalid alteration: ") + e.what());
    }
    // The altered complex in the file must match the recomputed one.
    PolyhedralComplex altered = parse_complex_json(field(j, path, "altered"), path + "/altered", nullptr);
    if (complex_json(altered).dump() != complex_json(a.altered).dump())
        throw SchemaError(path + "/altered", "altered complex does not match the witness data");
    return a;
}

// -- certificates / pipeline results ------------------------------------------------

json covering_json(const CoveringData& c) {
    json out = json::array();
    for (const auto& e : c.entries) {
        json je;
        je["target_ray"] = e.target_ray;
        je["m"] = int_json(e.m);
        json src = json::array();
        for (const auto& [id, m] : e.sources) {
            json js;
            js["source_ray"] = id;
            js["multiplicity"] = int_json(m);
            src.push_back(js);
        }
        je["sources"] = src;
        out.push_back(je);
    }
    return out;
}

CoveringData parse_covering_json(const json& j, const std::string& path) {
    CoveringData out;
    if (!j.is_array()) throw SchemaError(path, "expected an array");
    for (std::size_t i = 0; i < j.size(); ++i) {
        std::string epath = path + "/" + std::to_string(i);
        expect_fields(j[i], epath, {"target_ray", "m", "sources"});
        CoveringEntry e;
        e.target_ray = field(j[i], epath, "target_ray").get<ConeId>();
        e.m = parse_int_json(field(j[i], epath, "m"), epath + "/m");
        const json& src = field(j[i], epath, "sources");
        for (std::size_t k = 0; k < src.size(); ++k) {
            std::string spath = epath + "/sources/" + std::to_string(k);
            expect_fields(src[k], spath, {"source_ray", "multiplicity"});
            e.sources.push_back({field(src[k], spath, "source_ray").get<ConeId>(),
                                 parse_int_json(field(src[k], spath, "multiplicity"),
                                                spath + "/multiplicity")});
        }
        out.entries.push_back(e);
    }
    return out;
}

json witness_map_json(const std::map<ConeId, IntMat>& w) {
    json out = json::object();
    for (const auto& [id, m] : w) out[std::to_string(id)] = int_mat_json(m);
    return out;
}

std::map<ConeId, IntMat> parse_witness_map(const json& j, const std::string& path) {
    std::map<ConeId, IntMat> out;
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        ConeId id;
        try {
            id = std::stoi(it.key());
        } catch (...) {
            throw SchemaError(path + "/" + it.key(), "bad cone id");
        }
        if (!it->is_array()) throw SchemaError(path + "/" + it.key(), "expected matrix");
        std::size_t rows = it->size();
        std::size_t cols = rows > 0 && (*it)[0].is_array() ? (*it)[0].size() : 0;
        out[id] = parse_int_mat(*it, path + "/" + it.key(), rows, cols);
    }
    return out;
}

json functional_map_json(const std::map<ConeId, IntVec>& f) {
    json out = json::object();
    for (const auto& [id, v] : f) out[std::to_string(id)] = int_vec_json(v);
    return out;
}

std::map<ConeId, IntVec> parse_functional_map(const json& j, const std::string& path) {
    std::map<ConeId, IntVec> out;
    if (!j.is_object()) throw SchemaError(path, "expected an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        ConeId id;
        try {
            id = std::stoi(it.key());
        } catch (...) {
            throw SchemaError(path + "/" + it.key(), "bad cone id");
        }
        out[id] = parse_int_vec(*it, path + "/" + it.key());
    }
    return out;
}

json certificate_json(const Certificate& c) {
    json out;
    out["stage"] = c.stage;
    out["input_digest"] = c.input_digest;
    out["output_digest"] = c.output_digest;
    if (c.subdivision)
        out["subdivision"] = json::parse(
            serialize_subdivision(*c.subdivision, c.good ? &*c.good : nullptr));
    if (c.source_subdivision)
        out["source_subdivision"] = json::parse(
            serialize_subdivision(*c.source_subdivision, c.source_good ? &*c.source_good : nullptr));
    if (c.covering) out["covering"] = covering_json(*c.covering);
    if (!c.target_witness.empty()) out["target_witness"] = witness_map_json(c.target_witness);
    if (!c.source_witness.empty()) out["source_witness"] = witness_map_json(c.source_witness);
    if (!c.gorenstein_source.empty())
        out["gorenstein_source"] = functional_map_json(c.gorenstein_source);
    if (!c.gorenstein_target.empty())
        out["gorenstein_target"] = functional_map_json(c.gorenstein_target);
    return out;
}

Certificate parse_certificate_json(const json& j, const std::string& path) {
    expect_fields(j, path,
                  {"stage", "input_digest", "output_digest", "subdivision", "source_subdivision",
                   "covering", "target_witness", "source_witness", "gorenstein_source",
                   "gorenstein_target"});
    Certificate c;
    c.stage = field(j, path, "stage").get<std::string>();
    c.input_digest = field(j, path, "input_digest").get<std::string>();
    c.output_digest = field(j, path, "output_digest").get<std::string>();
    if (j.count("subdivision")) {
        auto [s, g] = parse_subdivision_json(j["subdivision"], path + "/subdivision");
        c.subdivision = s;
        c.good = g;
    }
    if (j.count("source_subdivision")) {
        auto [s, g] = parse_subdivision_json(j["source_subdivision"], path + "/source_subdivision");
        c.source_subdivision = s;
        c.source_good = g;
    }
    if (j.count("covering")) c.covering = parse_covering_json(j["covering"], path + "/covering");
    if (j.count("target_witness"))
        c.target_witness = parse_witness_map(j["target_witness"], path + "/target_witness");
    if (j.count("source_witness"))
        c.source_witness = parse_witness_map(j["source_witness"], path + "/source_witness");
    if (j.count("gorenstein_source"))
        c.gorenstein_source = parse_functional_map(j["gorenstein_source"], path + "/gorenstein_source");
    if (j.count("gorenstein_target"))
        c.gorenstein_target = parse_functional_map(j["gorenstein_target"], path + "/gorenstein_target");
    return c;
}

json classification_json(const Classification& c) {
    json flags;
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
    json witnesses = json::array();
    for (const auto& w : c.witnesses) {
        json jw;
        jw["cone"] = w.cone;
        jw["detail"] = w.detail;
        witnesses.push_back(jw);
    }
    json out;
    out["level"] = level_name(c.level);
    out["flags"] = flags;
    out["witnesses"] = witnesses;
    return out;
}

}  // namespace

std::string serialize_complex(const PolyhedralComplex& c) { return complex_json(c).dump(2) + "\n"; }

std::string serialize_morphism(const ComplexMorphism& f) { return morphism_json(f).dump(2) + "\n"; }

std::string serialize_subdivision(const Subdivision& s, const GoodFunction* good) {
    return subdivision_json(s, good).dump(2) + "\n";
}

std::string serialize_alteration(const LatticeAlteration& a) {
    return alteration_json(a).dump(2) + "\n";
}

std::string serialize_certificates(const std::vector<Certificate>& certs) {
    json out;
    out["format"] = "semistable/v1";
    out["kind"] = "certificate-bundle";
    json stages = json::array();
    for (const auto& c : certs) stages.push_back(certificate_json(c));
    out["stages"] = stages;
    return out.dump(2) + "\n";
}

std::string serialize_pipeline_result(const PipelineResult& r) {
    json out;
    out["format"] = "semistable/v1";
    out["kind"] = "pipeline-result";
    out["morphism"] = json::parse(serialize_morphism(r.final_morphism));
    out["classification"] = classification_json(r.classification);
    json stages = json::array();
    for (const auto& c : r.certificates) stages.push_back(certificate_json(c));
    out["certificates"] = stages;
    return out.dump(2) + "\n";
}

std::string serialize_classification(const Classification& c) {
    return classification_json(c).dump(2) + "\n";
}

Document parse_document(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw SchemaError("/", std::string("not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw SchemaError("/", "expected a JSON object");
    if (!j.count("kind") || !j["kind"].is_string()) throw SchemaError("/kind", "missing document kind");
    if (j.count("format") && j["format"].get<std::string>() != "semistable/v1")
        throw SchemaError("/format", "unsupported format");
    Document doc;
    doc.kind = j["kind"].get<std::string>();
    if (doc.kind == "complex") {
        doc.complex = parse_complex_json(j, "/", nullptr);
    } else if (doc.kind == "morphism") {
        doc.morphism = parse_morphism_json(j, "/");
    } else if (doc.kind == "subdivision") {
        auto [s, g] = parse_subdivision_json(j, "/");
        doc.subdivision = s;
        doc.good = g;
    } else if (doc.kind == "lattice-alteration") {
        doc.alteration = parse_alteration_json(j, "/");
    } else if (doc.kind == "certificate-bundle") {
        expect_fields(j, "/", {"format", "kind", "stages"});
        const json& stages = field(j, "/", "stages");
        if (!stages.is_array()) throw SchemaError("/stages", "expected an array");
        std::vector<Certificate> certs;
        for (std::size_t i = 0; i < stages.size(); ++i)
            certs.push_back(parse_certificate_json(stages[i], "/stages/" + std::to_string(i)));
        doc.certificates = certs;
    } else if (doc.kind == "pipeline-result") {
        expect_fields(j, "/", {"format", "kind", "morphism", "classification", "certificates"});
        PipelineResult r;
        r.final_morphism = parse_morphism_json(field(j, "/", "morphism"), "/morphism");
        const json& stages = field(j, "/", "certificates");
        for (std::size_t i = 0; i < stages.size(); ++i)
            r.certificates.push_back(parse_certificate_json(stages[i], "/certificates/" + std::to_string(i)));
        r.classification = classify(r.final_morphism);
        doc.pipeline = r;
    } else {
        throw SchemaError("/kind", "unknown document kind '" + doc.kind + "'");
    }
    return doc;
}

std::string serialize_document(const Document& doc) {
    if (doc.complex) return serialize_complex(*doc.complex);
    if (doc.morphism) return serialize_morphism(*doc.morphism);
    if (doc.subdivision)
        return serialize_subdivision(*doc.subdivision, doc.good ? &*doc.good : nullptr);
    if (doc.alteration) return serialize_alteration(*doc.alteration);
    if (doc.certificates) return serialize_certificates(*doc.certificates);
    if (doc.pipeline) return serialize_pipeline_result(*doc.pipeline);
    throw Error("serialize_document: empty document");
}

std::string digest(const std::string& canonical_text) {
    // FNV-1a 64-bit; deterministic across platforms.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char ch : canonical_text) {
        h ^= ch;
        h *= 1099511628211ULL;
    }
    static const char* hex = "0123456789abcdef";
    std::string out(16, '0');
    for (int i = 15; i >= 0; --i) {
        out[i] = hex[h & 0xf];
        h >>= 4;
    }
    return out;
}

std::string complex_digest(const PolyhedralComplex& c) { return digest(serialize_complex(c)); }

std::string morphism_digest(const ComplexMorphism& f) { return digest(serialize_morphism(f)); }

}  // namespace semistable
