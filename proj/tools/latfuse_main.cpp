// latfuse: file-driven pipeline for latent-space semantic direction
// estimation, orthogonalization, bias/variance diagnostics, and
// heredity-guided fusion of two parent latent codes.

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "latfuse/latfuse.hpp"

namespace {

using namespace latfuse;

LayerMask parse_mask(const std::string& text, int layers) {
    if (text == "all") return LayerMask::all(layers);
    std::vector<int> idx;
    std::string token;
    std::istringstream in(text);
    while (std::getline(in, token, ',')) {
        const auto dots = token.find("..");
        const auto dash = dots == std::string::npos ? token.find('-') : std::string::npos;
        if (dots != std::string::npos || dash != std::string::npos) {
            const std::size_t sep = dots != std::string::npos ? dots : dash;
            const std::size_t skip = dots != std::string::npos ? 2 : 1;
            const int first = std::stoi(token.substr(0, sep));
            const int last = std::stoi(token.substr(sep + skip));
            for (int i = first; i <= last; ++i) idx.push_back(i);
        } else if (!token.empty()) {
            idx.push_back(std::stoi(token));
        }
    }
    LayerMask mask{std::move(idx)};
    mask.check_valid_for(layers);
    return mask;
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string token;
    std::istringstream in(s);
    while (std::getline(in, token, sep)) out.push_back(token);
    return out;
}

EstimatorMethod parse_method(const std::string& m) {
    if (m == "basic") return EstimatorMethod::basic;
    if (m == "weighted") return EstimatorMethod::weighted;
    throw ContractError("unknown method '" + m + "' (expected basic or weighted)");
}

struct EstimateFlags {
    std::string dataset_path;
    std::vector<std::string> attributes;
    std::vector<std::string> conditions;
    std::string method = "basic";
    std::string mask = "";
    double min_delta = -1.0;  // <0: automatic
    std::uint64_t max_pairs = 0;
    std::uint64_t seed = 0;
    bool parallel = false;
};

SemanticBasis run_estimation(const Dataset& ds, const EstimateFlags& flags) {
    SemanticBasis basis;
    for (const auto& target : flags.attributes) {
        EstimatorConfig cfg;
        cfg.method = parse_method(flags.method);
        cfg.target = target;
        for (const auto& c : flags.conditions)
            if (c != target) cfg.conditioned.push_back(c);
        if (cfg.method == EstimatorMethod::weighted && cfg.conditioned.empty())
            throw ContractError("weighted estimation of '" + target +
                                "' needs at least one other conditioned attribute");
        if (flags.min_delta >= 0.0) cfg.min_delta = flags.min_delta;
        if (flags.max_pairs > 0) cfg.max_pairs = flags.max_pairs;
        if (!flags.mask.empty()) cfg.mask = parse_mask(flags.mask, ds.layers());
        cfg.seed = flags.seed;
        cfg.deterministic = !flags.parallel;
        basis.directions.push_back(estimate_direction(ds, cfg));
    }
    basis.orthonormal = false;
    return basis;
}

int run(int argc, char** argv) {
    CLI::App app{"latent-space semantic direction and heredity fusion toolkit"};
    app.require_subcommand(1);
    app.set_config("--config", "", "read option defaults from a TOML file; flags override");

    // ---- synth ----
    auto* synth = app.add_subcommand("synth", "generate a synthetic ground-truth dataset");
    std::string synth_spec, synth_out, synth_truth;
    std::uint64_t synth_n = 0, synth_seed = 0;
    synth->add_option("--spec", synth_spec, "oracle spec file")->required();
    synth->add_option("--n", synth_n, "number of samples")->required();
    auto* synth_seed_opt = synth->add_option("--seed", synth_seed, "overrides the spec seed");
    synth->add_option("--out", synth_out, "output dataset file")->required();
    synth->add_option("--truth-out", synth_truth, "output true-basis file");
    synth->callback([&] {
        OracleSpec spec = io::read_oracle_spec(synth_spec);
        if (synth_seed_opt->count() > 0) spec.seed = synth_seed;
        auto result = oracle_generate(spec, synth_n);
        io::write_dataset(synth_out, result.dataset);
        if (!synth_truth.empty()) io::write_basis(synth_truth, result.truth);
        std::cout << "wrote " << result.dataset.size() << " samples to " << synth_out << "\n";
    });

    // ---- labels ----
    auto* labels = app.add_subcommand("labels", "attach landmark-distance labels to latent codes");
    std::string labels_lm, labels_codes, labels_out;
    bool labels_norm = false;
    labels->add_option("--landmarks", labels_lm, "landmark file (one set per line)")->required();
    labels->add_option("--codes", labels_codes, "unlabeled dataset file")->required();
    labels->add_option("--out", labels_out, "output dataset file")->required();
    labels->add_flag("--normalize-interocular", labels_norm,
                     "divide labels by the interocular distance");
    labels->callback([&] {
        const Dataset codes = io::read_dataset(labels_codes);
        const auto landmarks = io::read_landmarks(labels_lm);
        LabelOptions opts;
        opts.normalize_interocular = labels_norm;
        const Dataset out = label_dataset(codes, landmarks, opts);
        io::write_dataset(labels_out, out);
        std::cout << "labeled " << out.size() << " samples with "
                  << builtin_attribute_table().size() << " attributes\n";
    });

    // ---- estimate ----
    auto* estimate = app.add_subcommand("estimate", "estimate semantic directions");
    EstimateFlags est;
    std::string est_out;
    estimate->add_option("--dataset", est.dataset_path, "labeled dataset file")->required();
    estimate->add_option("--attribute", est.attributes, "target attribute (repeatable)")
        ->required();
    estimate->add_option("--condition", est.conditions,
                         "conditioned attribute for the weighted method (repeatable)");
    estimate->add_option("--method", est.method, "basic or weighted (default basic)");
    estimate->add_option("--mask", est.mask,
                         "active layers, e.g. \"2..11\" (default for 18-layer codes), "
                         "\"all\", or \"0,3,5\"");
    estimate->add_option("--min-delta", est.min_delta,
                         "pair-discard threshold on |delta u_target| (default: 1 for integer "
                         "labels, 1e-6 otherwise)");
    estimate->add_option("--max-pairs", est.max_pairs, "cap on the pair count (seeded subsample)");
    estimate->add_option("--seed", est.seed, "seed for pair subsampling");
    estimate->add_flag("--parallel", est.parallel,
                       "chunked parallel reduction instead of the sequential reference order");
    estimate->add_option("--out", est_out, "output basis file")->required();
    estimate->callback([&] {
        const Dataset ds = io::read_dataset(est.dataset_path);
        const SemanticBasis basis = run_estimation(ds, est);
        io::write_basis(est_out, basis);
        std::cout << "estimated " << basis.directions.size() << " direction(s) from " << ds.size()
                  << " samples\n";
    });

    // ---- orthogonalize ----
    auto* orth = app.add_subcommand("orthogonalize", "Gram-Schmidt orthogonalization of a basis");
    std::vector<std::string> orth_in;
    std::string orth_order, orth_out, orth_thresholds_from, orth_rules;
    orth->add_option("--basis", orth_in, "input basis file(s); several are merged")->required();
    orth->add_option("--order", orth_order, "comma-separated attribute processing order");
    orth->add_option("--thresholds-from", orth_thresholds_from,
                     "reference dataset for projection thresholds");
    orth->add_option("--rules", orth_rules, "rules file supplying explicit thresholds");
    orth->add_option("--out", orth_out, "output basis file")->required();
    orth->callback([&] {
        SemanticBasis merged;
        for (const auto& path : orth_in) {
            SemanticBasis b = io::read_basis(path);
            for (auto& d : b.directions) merged.directions.push_back(std::move(d));
        }
        std::vector<std::size_t> order;
        if (!orth_order.empty()) {
            for (const auto& name : split(orth_order, ',')) {
                bool found = false;
                for (std::size_t i = 0; i < merged.directions.size(); ++i)
                    if (merged.directions[i].attribute == name) {
                        order.push_back(i);
                        found = true;
                        break;
                    }
                if (!found) throw ContractError("order names unknown attribute '" + name + "'");
            }
        }
        SemanticBasis out = gram_schmidt(merged, order);
        if (!orth_thresholds_from.empty()) {
            const Dataset ref = io::read_dataset(orth_thresholds_from);
            GeneticsRuleSet rules;
            if (!orth_rules.empty()) rules = io::read_rules(orth_rules);
            resolve_thresholds(out, ref, orth_rules.empty() ? nullptr : &rules);
        }
        io::write_basis(orth_out, out);
        double worst = 0.0;
        const auto m = coupling_matrix(out);
        for (std::size_t i = 0; i < m.size(); ++i)
            for (std::size_t j = i + 1; j < m.size(); ++j)
                worst = std::max(worst, std::abs(m[i][j]));
        std::cout << "orthonormal basis with " << out.directions.size()
                  << " direction(s), max |pairwise dot| = " << io::csv17(worst) << "\n";
    });

    // ---- fuse ----
    auto* fuse = app.add_subcommand("fuse", "macro + micro fusion of two parent codes");
    std::string fuse_father, fuse_mother, fuse_basis, fuse_rules, fuse_out, fuse_report;
    std::string fuse_layers, fuse_gender, fuse_age, fuse_thresholds_from;
    double fuse_lambda = 0.5;
    std::uint64_t fuse_seed = 0;
    bool fuse_skip_micro = false;
    fuse->add_option("--father", fuse_father, "father latent-code file")->required();
    fuse->add_option("--mother", fuse_mother, "mother latent-code file")->required();
    fuse->add_option("--basis", fuse_basis, "orthonormal basis file")->required();
    fuse->add_option("--rules", fuse_rules, "genetics rules file")->required();
    fuse->add_option("--lambda", fuse_lambda, "blend weight: 0 -> father, 1 -> mother");
    fuse->add_option("--layers", fuse_layers,
                     "per-resolution-layer parent choice, e.g. \"f,f,m,m,m,m,m,m,m\" "
                     "(overrides --lambda)");
    fuse->add_option("--gender-shift", fuse_gender, "parent:attribute:amount, e.g. father:gender:2");
    fuse->add_option("--age-shift", fuse_age, "attribute:amount applied after mixing");
    fuse->add_option("--thresholds-from", fuse_thresholds_from,
                     "reference dataset; resolves thresholds if the basis lacks them");
    fuse->add_flag("--skip-micro", fuse_skip_micro, "stop after macro fusion");
    fuse->add_option("--seed", fuse_seed, "seed for the heredity draws")->required();
    fuse->add_option("--out", fuse_out, "output child latent-code file")->required();
    fuse->add_option("--report", fuse_report, "output fusion report file");
    fuse->callback([&] {
        const LayeredLatentCode father = io::read_latent_code(fuse_father);
        const LayeredLatentCode mother = io::read_latent_code(fuse_mother);
        SemanticBasis basis = io::read_basis(fuse_basis);
        const GeneticsRuleSet rules = io::read_rules(fuse_rules);

        MacroConfig macro;
        if (!fuse_layers.empty()) {
            LayerSplitFusion splitCfg;
            for (const auto& token : split(fuse_layers, ',')) {
                if (token == "f" || token == "father") splitCfg.assignment.push_back(Parent::father);
                else if (token == "m" || token == "mother")
                    splitCfg.assignment.push_back(Parent::mother);
                else throw ContractError("--layers entries must be f or m, got '" + token + "'");
            }
            macro.method = std::move(splitCfg);
        } else {
            macro.method = BlendFusion{fuse_lambda};
        }
        if (!fuse_gender.empty()) {
            const auto parts = split(fuse_gender, ':');
            if (parts.size() != 3)
                throw ContractError("--gender-shift expects parent:attribute:amount");
            GenderShift gs;
            if (parts[0] == "father") gs.parent = Parent::father;
            else if (parts[0] == "mother") gs.parent = Parent::mother;
            else throw ContractError("--gender-shift parent must be father or mother");
            gs.attribute = parts[1];
            gs.amount = std::stod(parts[2]);
            macro.gender_shift = gs;
        }
        if (!fuse_age.empty()) {
            const auto parts = split(fuse_age, ':');
            if (parts.size() != 2) throw ContractError("--age-shift expects attribute:amount");
            macro.age_shift = AgeShift{parts[0], std::stod(parts[1])};
        }

        const LayeredLatentCode child_macro = macro_fuse(father, mother, macro, &basis);
        if (fuse_skip_micro) {
            io::write_latent_code(fuse_out, child_macro);
            if (!fuse_report.empty())
                io::write_text_file(fuse_report,
                                    "{\"type\":\"metadata\",\"note\":\"macro fusion only\"}\n");
            std::cout << "macro-fused child written to " << fuse_out << "\n";
            return;
        }
        if (basis.thresholds.empty() && !fuse_thresholds_from.empty()) {
            const Dataset ref = io::read_dataset(fuse_thresholds_from);
            resolve_thresholds(basis, ref, &rules);
        }
        Rng rng(fuse_seed);
        const MicroFusionResult result = micro_fuse(child_macro, father, mother, basis, rules, rng);
        io::write_latent_code(fuse_out, result.code);
        if (!fuse_report.empty())
            io::write_text_file(fuse_report, io::fusion_report_to_text(result, fuse_seed));
        std::cout << "fused child written to " << fuse_out << " (" << result.decisions.size()
                  << " heredity decisions)\n";
    });

    // ---- eval ----
    auto* eval = app.add_subcommand("eval", "diagnostics and plot-data emission");
    eval->require_subcommand(1);

    auto* recover = eval->add_subcommand("recover", "estimate and compare against a true basis");
    EstimateFlags rec;
    std::string rec_truth, rec_out;
    recover->add_option("--dataset", rec.dataset_path, "labeled dataset file")->required();
    recover->add_option("--truth", rec_truth, "true basis file")->required();
    recover->add_option("--method", rec.method, "basic or weighted");
    recover->add_option("--condition", rec.conditions, "conditioned attribute (repeatable)");
    recover->add_option("--mask", rec.mask, "active layers (default: all for the truth shape)");
    recover->add_option("--min-delta", rec.min_delta, "pair-discard threshold");
    recover->add_option("--seed", rec.seed, "seed");
    recover->add_option("--out", rec_out, "output CSV")->required();
    recover->callback([&] {
        const Dataset ds = io::read_dataset(rec.dataset_path);
        const SemanticBasis truth = io::read_basis(rec_truth);
        if (rec.mask.empty()) rec.mask = "all";
        std::string csv = "attribute,truth_attribute,cosine\n";
        bool all_ok = true;
        for (const auto& dir : truth.directions) {
            EstimateFlags one = rec;
            one.attributes = {dir.attribute};
            const SemanticBasis est = run_estimation(ds, one);
            for (const auto& [truth_attr, cosine] :
                 measure_recovery(est.directions.front(), truth)) {
                csv += dir.attribute + "," + truth_attr + "," + io::csv17(cosine) + "\n";
                if (truth_attr == dir.attribute && cosine < 0.99) all_ok = false;
            }
        }
        io::write_text_file(rec_out, csv);
        std::cout << (all_ok ? "all on-target cosines >= 0.99\n"
                             : "some on-target cosines < 0.99\n");
    });

    auto* coupling = eval->add_subcommand("coupling", "pairwise cosine matrix of a basis");
    std::string coup_basis, coup_out;
    coupling->add_option("--basis", coup_basis, "basis file")->required();
    coupling->add_option("--out", coup_out, "output CSV")->required();
    coupling->callback([&] {
        const SemanticBasis basis = io::read_basis(coup_basis);
        io::write_text_file(coup_out, io::coupling_matrix_to_csv(basis, coupling_matrix(basis)));
    });

    auto* grid = eval->add_subcommand(
        "ratio-grid", "b'/b and V'/V table over a (b, sigma) grid (Gaussian coupling model)");
    double b_min = 0.1, b_max = 0.9, b_step = 0.1;
    double s_min = 0.25, s_max = 4.0, s_step = 0.25;
    int grid_pairs = 200, grid_reps = 500;
    std::uint64_t grid_seed = 0;
    std::string grid_out;
    grid->add_option("--b-min", b_min);
    grid->add_option("--b-max", b_max);
    grid->add_option("--b-step", b_step);
    grid->add_option("--sigma-min", s_min);
    grid->add_option("--sigma-max", s_max);
    grid->add_option("--sigma-step", s_step);
    grid->add_option("--n-pairs", grid_pairs, "draws per replication");
    grid->add_option("--replications", grid_reps, "replications per cell");
    grid->add_option("--seed", grid_seed)->required();
    grid->add_option("--out", grid_out, "output CSV")->required();
    grid->callback([&] {
        std::vector<double> bs, sigmas;
        for (double b = b_min; b <= b_max + 1e-12; b += b_step) bs.push_back(b);
        for (double s = s_min; s <= s_max + 1e-12; s += s_step) sigmas.push_back(s);
        const auto rows = bias_variance_grid(bs, sigmas, grid_pairs, grid_reps, grid_seed);
        io::write_text_file(grid_out, io::coupling_table_to_csv(rows));
        std::cout << "wrote " << rows.size() << " grid cells to " << grid_out << "\n";
    });

    auto* ablate = eval->add_subcommand("ablate", "zero each resolution layer's codes in turn");
    std::string abl_code, abl_prefix;
    ablate->add_option("--code", abl_code, "latent-code file")->required();
    ablate->add_option("--out-prefix", abl_prefix, "output prefix; writes <prefix>r<k>.json")
        ->required();
    ablate->callback([&] {
        const LayeredLatentCode code = io::read_latent_code(abl_code);
        for (int r = 1; r <= code.layers() / 2; ++r) {
            io::write_latent_code(abl_prefix + "r" + std::to_string(r) + ".json",
                                  ablate_layers(code, r));
        }
        std::cout << "wrote " << code.layers() / 2 << " ablated codes\n";
    });

    auto* subspace = eval->add_subcommand("subspace", "max principal angle between two bases");
    std::string sub_a, sub_b;
    subspace->add_option("--basis", sub_a, "first orthonormal basis")->required();
    subspace->add_option("--basis2", sub_b, "second orthonormal basis")->required();
    subspace->callback([&] {
        const double angle = max_principal_angle(io::read_basis(sub_a), io::read_basis(sub_b));
        std::cout << "max principal angle: " << io::csv17(angle) << "\n";
    });

    // ---- extract ----
    auto* extract = app.add_subcommand("extract", "write one dataset sample as a latent-code file");
    std::string ext_dataset, ext_id, ext_out;
    extract->add_option("--dataset", ext_dataset, "dataset file")->required();
    extract->add_option("--id", ext_id, "sample id")->required();
    extract->add_option("--out", ext_out, "output latent-code file")->required();
    extract->callback([&] {
        const Dataset ds = io::read_dataset(ext_dataset);
        for (const auto& s : ds.samples()) {
            if (s.id == ext_id) {
                io::write_latent_code(ext_out, s.code);
                return;
            }
        }
        throw ContractError("no sample with id '" + ext_id + "' in '" + ext_dataset + "'");
    });

    // ---- rules-template ----
    auto* rules_cmd = app.add_subcommand("rules-template", "emit the built-in genetics rules");
    std::string rules_out;
    std::uint64_t rules_seed = 0;
    rules_cmd->add_option("--out", rules_out, "output rules file")->required();
    rules_cmd->add_option("--seed", rules_seed, "seed stored in the template");
    rules_cmd->callback([&] {
        GeneticsRuleSet rs = default_ruleset();
        rs.seed = rules_seed;
        io::write_rules(rules_out, rs);
    });

    CLI11_PARSE(app, argc, argv);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const latfuse::ContractError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const latfuse::NumericalError& e) {
        std::cerr << "numerical error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
