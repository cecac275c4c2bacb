#pragma once

#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "latfuse/bias_analysis.hpp"
#include "latfuse/direction.hpp"
#include "latfuse/fusion.hpp"
#include "latfuse/genetics.hpp"
#include "latfuse/landmarks.hpp"
#include "latfuse/latent_code.hpp"
#include "latfuse/oracle.hpp"

// Text formats, bit-exact per docs/FORMATS.md. Writers emit numbers with 17
// significant digits (lossless for doubles) and a fixed field order, so
// write -> read -> write is byte-identical. Readers go through nlohmann/json.

namespace latfuse::io {

inline std::string g17(double v) {
    if (!std::isfinite(v)) throw ContractError("cannot serialize a non-finite number");
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

inline std::string json_escape(const std::string& s) {
    std::string out;
    out.reserve(s.size() + 2);
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\n': out += "\\n"; break;
            case '\t': out += "\\t"; break;
            case '\r': out += "\\r"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out += c;
                }
        }
    }
    return out;
}

inline std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ContractError("cannot open file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ContractError("cannot write file '" + path + "'");
    out << content;
    if (!out) throw ContractError("write to '" + path + "' failed");
}

inline nlohmann::json parse_json(const std::string& text, const std::string& context) {
    try {
        return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
        throw ContractError("failed to parse " + context + ": " + e.what());
    }
}

namespace detail {

inline void append_row(std::string& s, const double* row, int dim) {
    s += '[';
    for (int d = 0; d < dim; ++d) {
        if (d) s += ',';
        s += g17(row[d]);
    }
    s += ']';
}

inline std::string matrix_json(const LayeredLatentCode& code) {
    std::string s = "[";
    for (int layer = 0; layer < code.layers(); ++layer) {
        if (layer) s += ',';
        s += '\n';
        append_row(s, code.row(layer), code.dim());
    }
    s += "\n]";
    return s;
}

inline LayeredLatentCode matrix_from_json(const nlohmann::json& j, int layers, int dim,
                                          const std::string& context) {
    if (!j.is_array() || static_cast<int>(j.size()) != layers)
        throw ContractError(context + ": data must be an array of " + std::to_string(layers) +
                            " rows");
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(layers) * dim);
    for (const auto& row : j) {
        if (!row.is_array() || static_cast<int>(row.size()) != dim)
            throw ContractError(context + ": every row must have " + std::to_string(dim) +
                                " numbers");
        for (const auto& v : row) {
            if (!v.is_number()) throw ContractError(context + ": data entries must be numbers");
            flat.push_back(v.get<double>());
        }
    }
    return LayeredLatentCode::from_rows(layers, dim, std::move(flat));
}

}  // namespace detail

// ---- latent code files -----------------------------------------------------

inline std::string code_to_json(const LayeredLatentCode& code) {
    return "{\"layers\":" + std::to_string(code.layers()) + ",\"dim\":" +
           std::to_string(code.dim()) + ",\"data\":" + detail::matrix_json(code) + "}\n";
}

inline LayeredLatentCode code_from_json(const nlohmann::json& j, const std::string& context) {
    if (!j.contains("layers") || !j.contains("dim") || !j.contains("data"))
        throw ContractError(context + ": expected fields layers, dim, data");
    const int layers = j.at("layers").get<int>();
    const int dim = j.at("dim").get<int>();
    return detail::matrix_from_json(j.at("data"), layers, dim, context);
}

inline void write_latent_code(const std::string& path, const LayeredLatentCode& code) {
    write_text_file(path, code_to_json(code));
}

inline LayeredLatentCode read_latent_code(const std::string& path) {
    return code_from_json(parse_json(read_text_file(path), "latent code '" + path + "'"),
                          "latent code '" + path + "'");
}

// ---- dataset files (one sample object per line) ----------------------------

inline std::string sample_to_line(const Sample& s) {
    std::string out = "{\"id\":\"" + json_escape(s.id) + "\",\"layers\":" +
                      std::to_string(s.code.layers()) + ",\"dim\":" +
                      std::to_string(s.code.dim()) + ",\"data\":[";
    for (int layer = 0; layer < s.code.layers(); ++layer) {
        if (layer) out += ',';
        detail::append_row(out, s.code.row(layer), s.code.dim());
    }
    out += "],\"attributes\":{";
    bool first = true;
    for (const auto& [k, v] : s.labels) {
        if (!first) out += ',';
        first = false;
        out += '"' + json_escape(k) + "\":" + g17(v);
    }
    out += "}}";
    return out;
}

inline std::string dataset_to_text(const Dataset& ds) {
    std::string out;
    for (const auto& s : ds.samples()) {
        out += sample_to_line(s);
        out += '\n';
    }
    return out;
}

inline void write_dataset(const std::string& path, const Dataset& ds) {
    write_text_file(path, dataset_to_text(ds));
}

inline Dataset dataset_from_text(const std::string& text, const std::string& context) {
    Dataset ds;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = context + " line " + std::to_string(lineno);
        const auto j = parse_json(line, where);
        if (!j.contains("id")) throw ContractError(where + ": sample is missing an id");
        Sample s;
        s.id = j.at("id").get<std::string>();
        s.code = code_from_json(j, where);
        if (j.contains("attributes")) {
            const auto& attrs = j.at("attributes");
            if (!attrs.is_object()) throw ContractError(where + ": attributes must be an object");
            for (auto it = attrs.begin(); it != attrs.end(); ++it) {
                if (!it.value().is_number())
                    throw ContractError(where + ": attribute '" + it.key() + "' must be a number");
                s.labels[it.key()] = it.value().get<double>();
            }
        }
        ds.add(std::move(s));
    }
    return ds;
}

inline Dataset read_dataset(const std::string& path) {
    return dataset_from_text(read_text_file(path), "dataset '" + path + "'");
}

// ---- landmark files (one object per line) -----------------------------------

inline std::vector<LandmarkSet> read_landmarks(const std::string& path) {
    std::istringstream in(read_text_file(path));
    std::vector<LandmarkSet> sets;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        const std::string where = "landmarks '" + path + "' line " + std::to_string(lineno);
        const auto j = parse_json(line, where);
        if (!j.contains("id") || !j.contains("landmarks"))
            throw ContractError(where + ": expected fields id and landmarks");
        LandmarkSet lm;
        lm.id = j.at("id").get<std::string>();
        for (const auto& pt : j.at("landmarks")) {
            if (!pt.is_array() || pt.size() != 2)
                throw ContractError(where + ": each landmark must be an [x, y] pair");
            lm.points.emplace_back(pt[0].get<double>(), pt[1].get<double>());
        }
        lm.check_valid();
        sets.push_back(std::move(lm));
    }
    return sets;
}

// ---- basis files -------------------------------------------------------------

inline std::string basis_to_json(const SemanticBasis& basis) {
    basis.check_shapes();
    const auto& first = basis.directions.front();
    std::string out = "{\"layers\":" + std::to_string(first.vector.layers()) + ",\"dim\":" +
                      std::to_string(first.vector.dim()) + ",\"mask\":[";
    for (std::size_t i = 0; i < first.mask.active().size(); ++i) {
        if (i) out += ',';
        out += std::to_string(first.mask.active()[i]);
    }
    out += "],\"orthonormal\":";
    out += basis.orthonormal ? "true" : "false";
    out += ",\"directions\":[";
    for (std::size_t i = 0; i < basis.directions.size(); ++i) {
        const auto& d = basis.directions[i];
        if (i) out += ',';
        out += "\n{\"attribute\":\"" + json_escape(d.attribute) + "\",\"magnitude\":" +
               g17(d.magnitude) + ",\"normalized\":" + (d.normalized ? "true" : "false") +
               ",\"vector\":[";
        for (int layer = 0; layer < d.vector.layers(); ++layer) {
            if (layer) out += ',';
            detail::append_row(out, d.vector.row(layer), d.vector.dim());
        }
        out += "]}";
    }
    out += "\n]";
    if (!basis.thresholds.empty()) {
        out += ",\"thresholds\":{";
        bool first_t = true;
        for (const auto& [k, t] : basis.thresholds) {
            if (!first_t) out += ',';
            first_t = false;
            out += "\n\"" + json_escape(k) + "\":{\"tau\":" + g17(t.tau) + ",\"spread\":" +
                   g17(t.spread) + "}";
        }
        out += "\n}";
    }
    out += "}\n";
    return out;
}

inline void write_basis(const std::string& path, const SemanticBasis& basis) {
    write_text_file(path, basis_to_json(basis));
}

inline SemanticBasis read_basis(const std::string& path) {
    const std::string context = "basis '" + path + "'";
    const auto j = parse_json(read_text_file(path), context);
    for (const char* field : {"layers", "dim", "mask", "orthonormal", "directions"})
        if (!j.contains(field))
            throw ContractError(context + ": missing field '" + std::string(field) + "'");
    const int layers = j.at("layers").get<int>();
    const int dim = j.at("dim").get<int>();
    LayerMask mask(j.at("mask").get<std::vector<int>>());
    SemanticBasis basis;
    basis.orthonormal = j.at("orthonormal").get<bool>();
    for (const auto& dj : j.at("directions")) {
        SemanticDirection d;
        d.attribute = dj.at("attribute").get<std::string>();
        d.magnitude = dj.at("magnitude").get<double>();
        d.normalized = dj.at("normalized").get<bool>();
        d.mask = mask;
        d.vector = detail::matrix_from_json(dj.at("vector"), layers, dim,
                                            context + " direction '" + d.attribute + "'");
        d.check_consistent();
        basis.directions.push_back(std::move(d));
    }
    if (basis.directions.empty()) throw ContractError(context + ": basis has no directions");
    if (j.contains("thresholds")) {
        for (auto it = j.at("thresholds").begin(); it != j.at("thresholds").end(); ++it) {
            ProjectionThreshold t;
            t.tau = it.value().at("tau").get<double>();
            t.spread = it.value().at("spread").get<double>();
            basis.thresholds[it.key()] = t;
        }
    }
    return basis;
}

// ---- genetics rules files -----------------------------------------------------

inline std::string mode_to_string(InheritanceMode m) {
    switch (m) {
        case InheritanceMode::mendelian: return "mendelian";
        case InheritanceMode::blend: return "blend";
        default: return "sex_influenced_baldness";
    }
}

inline InheritanceMode mode_from_string(const std::string& s) {
    if (s == "mendelian") return InheritanceMode::mendelian;
    if (s == "blend") return InheritanceMode::blend;
    if (s == "sex_influenced_baldness") return InheritanceMode::sex_influenced_baldness;
    throw ContractError("unknown inheritance mode '" + s + "'");
}

inline std::string rules_to_json(const GeneticsRuleSet& rs) {
    std::string out = "{\"seed\":" + std::to_string(rs.seed) + ",\"rules\":{";
    bool first = true;
    for (const auto& [name, rule] : rs.rules) {
        rule.check_valid();
        if (!first) out += ',';
        first = false;
        out += "\n\"" + json_escape(name) + "\":{\"mode\":\"" + mode_to_string(rule.mode) + "\"";
        if (rule.dominant_side)
            out += std::string(",\"dominant_side\":\"") +
                   (*rule.dominant_side == DominantSide::above ? "above" : "below") + "\"";
        if (rule.explicit_threshold)
            out += ",\"threshold\":{\"source\":\"explicit\",\"value\":" +
                   g17(*rule.explicit_threshold) + "}";
        else
            out += ",\"threshold\":{\"source\":\"dataset_mean\"}";
        out += "}";
    }
    out += "\n}}\n";
    return out;
}

inline void write_rules(const std::string& path, const GeneticsRuleSet& rs) {
    write_text_file(path, rules_to_json(rs));
}

inline GeneticsRuleSet read_rules(const std::string& path) {
    const std::string context = "rules '" + path + "'";
    const auto j = parse_json(read_text_file(path), context);
    GeneticsRuleSet rs;
    if (j.contains("seed")) rs.seed = j.at("seed").get<std::uint64_t>();
    if (!j.contains("rules") || !j.at("rules").is_object())
        throw ContractError(context + ": missing rules object");
    for (auto it = j.at("rules").begin(); it != j.at("rules").end(); ++it) {
        TraitRule r;
        r.attribute = it.key();
        const auto& rj = it.value();
        r.mode = mode_from_string(rj.at("mode").get<std::string>());
        if (rj.contains("dominant_side")) {
            const std::string side = rj.at("dominant_side").get<std::string>();
            if (side == "above") r.dominant_side = DominantSide::above;
            else if (side == "below") r.dominant_side = DominantSide::below;
            else throw ContractError(context + ": unknown dominant_side '" + side + "'");
        }
        if (rj.contains("threshold")) {
            const auto& tj = rj.at("threshold");
            const std::string source = tj.at("source").get<std::string>();
            if (source == "explicit") r.explicit_threshold = tj.at("value").get<double>();
            else if (source != "dataset_mean")
                throw ContractError(context + ": unknown threshold source '" + source + "'");
        }
        r.check_valid();
        rs.rules[it.key()] = std::move(r);
    }
    return rs;
}

// ---- oracle spec files ---------------------------------------------------------

inline OracleSpec read_oracle_spec(const std::string& path) {
    const std::string context = "oracle spec '" + path + "'";
    const auto j = parse_json(read_text_file(path), context);
    OracleSpec spec;
    for (const char* field : {"layers", "dim", "num_directions"})
        if (!j.contains(field))
            throw ContractError(context + ": missing field '" + std::string(field) + "'");
    spec.layers = j.at("layers").get<int>();
    spec.dim = j.at("dim").get<int>();
    spec.num_directions = j.at("num_directions").get<int>();
    if (j.contains("correlation"))
        spec.correlation = j.at("correlation").get<std::vector<std::vector<double>>>();
    if (j.contains("label_names"))
        spec.label_names = j.at("label_names").get<std::vector<std::string>>();
    if (j.contains("label_means"))
        spec.label_means = j.at("label_means").get<std::vector<double>>();
    if (j.contains("label_stds")) spec.label_stds = j.at("label_stds").get<std::vector<double>>();
    if (j.contains("noise_std")) spec.noise_std = j.at("noise_std").get<double>();
    if (j.contains("quantize_labels")) spec.quantize_labels = j.at("quantize_labels").get<bool>();
    if (j.contains("seed")) spec.seed = j.at("seed").get<std::uint64_t>();
    return spec;
}

// ---- plot data and reports ------------------------------------------------------

inline std::string csv17(double v) {
    if (!std::isfinite(v)) return "nan";  // b = 0 rows carry an undefined ratio
    return g17(v);
}

inline std::string coupling_table_to_csv(const std::vector<CouplingAnalysis>& rows) {
    std::string out = "b,sigma,b_prime,ratio,variance_ratio\n";
    for (const auto& r : rows)
        out += csv17(r.b) + "," + csv17(r.sigma) + "," + csv17(r.b_prime) + "," + csv17(r.ratio) +
               "," + csv17(r.variance_ratio) + "\n";
    return out;
}

inline std::string recovery_to_csv(const std::string& estimated_attribute,
                                   const std::vector<std::pair<std::string, double>>& report) {
    std::string out = "attribute,truth_attribute,cosine\n";
    for (const auto& [truth, cosine] : report)
        out += estimated_attribute + "," + truth + "," + g17(cosine) + "\n";
    return out;
}

inline std::string coupling_matrix_to_csv(const SemanticBasis& basis,
                                          const std::vector<std::vector<double>>& m) {
    std::string out = "attribute";
    for (const auto& d : basis.directions) out += "," + d.attribute;
    out += "\n";
    for (std::size_t i = 0; i < m.size(); ++i) {
        out += basis.directions[i].attribute;
        for (double v : m[i]) out += "," + g17(v);
        out += "\n";
    }
    return out;
}

inline std::string fusion_report_to_text(const MicroFusionResult& result, std::uint64_t seed) {
    std::string out =
        "{\"type\":\"metadata\",\"seed\":" + std::to_string(seed) +
        ",\"note\":\"phenotypes are classified by latent-space projection thresholds, a "
        "stand-in for re-measured landmarks; unresolved dominant genotypes Aa/AA are treated "
        "as equally likely\"}\n";
    for (const auto& d : result.decisions) {
        out += "{\"type\":\"decision\",\"attribute\":\"" + json_escape(d.decision.attribute) +
               "\",\"father_phenotype\":\"" + to_string(d.decision.father_phenotype) +
               "\",\"mother_phenotype\":\"" + to_string(d.decision.mother_phenotype) +
               "\",\"child_phenotype\":\"" + to_string(d.decision.child_phenotype) +
               "\",\"probability_used\":" + g17(d.decision.probability_used) +
               ",\"father_projection\":" + g17(d.p_father) +
               ",\"mother_projection\":" + g17(d.p_mother) +
               ",\"projection_before\":" + g17(d.p_child_before) +
               ",\"projection_after\":" + g17(d.p_child_after) + ",\"tau\":" + g17(d.tau) +
               ",\"case\":\"" + d.rule_case + "\"}\n";
    }
    return out;
}

}  // namespace latfuse::io
