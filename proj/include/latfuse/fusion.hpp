#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "latfuse/direction.hpp"
#include "latfuse/genetics.hpp"
#include "latfuse/latent_code.hpp"

namespace latfuse {

enum class Parent { father, mother };

struct BlendFusion {
    double lambda = 0.5;  // 0 -> father, 1 -> mother
};

// Per-resolution-layer parent choice; entry r (0-based) assigns w rows 2r and
// 2r+1. Must cover all L/2 resolution layers.
struct LayerSplitFusion {
    std::vector<Parent> assignment;
};

struct GenderShift {
    std::string attribute;
    double amount = 2.0;  // about 2 units along the unit gender direction
    Parent parent = Parent::father;
};

struct AgeShift {
    std::string attribute;
    double amount = 0.0;
};

struct MacroConfig {
    std::variant<BlendFusion, LayerSplitFusion> method = BlendFusion{};
    std::optional<GenderShift> gender_shift;  // applied to one parent before mixing
    std::optional<AgeShift> age_shift;        // applied to the mix afterwards
};

// Holistic mix of the parents: lambda-blend or per-resolution-layer
// assignment, with optional gender alignment before and age shift after.
// Blend endpoints are returned bit-exactly.
inline LayeredLatentCode macro_fuse(const LayeredLatentCode& father,
                                    const LayeredLatentCode& mother, const MacroConfig& cfg,
                                    const SemanticBasis* shift_basis = nullptr) {
    if (!father.same_shape(mother)) throw ContractError("macro_fuse: parents differ in shape");

    const auto shifted = [&](const LayeredLatentCode& code, Parent who) -> LayeredLatentCode {
        if (!cfg.gender_shift || cfg.gender_shift->parent != who) return code;
        if (!shift_basis)
            throw ContractError("macro_fuse: gender shift configured without a basis");
        const SemanticDirection* dir = shift_basis->find(cfg.gender_shift->attribute);
        if (!dir)
            throw ContractError("macro_fuse: basis has no direction '" +
                                cfg.gender_shift->attribute + "'");
        return shift_along(code, *dir, cfg.gender_shift->amount);
    };
    const LayeredLatentCode f = shifted(father, Parent::father);
    const LayeredLatentCode m = shifted(mother, Parent::mother);

    LayeredLatentCode child;
    if (const auto* blend = std::get_if<BlendFusion>(&cfg.method)) {
        const double lambda = blend->lambda;
        if (!(lambda >= 0.0 && lambda <= 1.0))
            throw ContractError("macro_fuse: lambda must be in [0, 1]");
        if (lambda == 0.0) {
            child = f;
        } else if (lambda == 1.0) {
            child = m;
        } else {
            child = LayeredLatentCode(f.layers(), f.dim());
            const auto& ff = f.flat();
            const auto& mf = m.flat();
            auto& cf = child.flat();
            for (std::size_t i = 0; i < cf.size(); ++i)
                cf[i] = (1.0 - lambda) * ff[i] + lambda * mf[i];
        }
    } else {
        const auto& split = std::get<LayerSplitFusion>(cfg.method);
        const std::size_t n_res = static_cast<std::size_t>(f.layers() / 2);
        if (split.assignment.size() != n_res)
            throw ContractError("macro_fuse: layer assignment must cover all " +
                                std::to_string(n_res) + " resolution layers");
        child = LayeredLatentCode(f.layers(), f.dim());
        for (std::size_t r = 0; r < n_res; ++r) {
            const LayeredLatentCode& src = split.assignment[r] == Parent::father ? f : m;
            std::copy(src.row(static_cast<int>(2 * r)),
                      src.row(static_cast<int>(2 * r)) + 2 * f.dim(),
                      child.row(static_cast<int>(2 * r)));
        }
    }

    if (cfg.age_shift) {
        if (!shift_basis) throw ContractError("macro_fuse: age shift configured without a basis");
        const SemanticDirection* dir = shift_basis->find(cfg.age_shift->attribute);
        if (!dir)
            throw ContractError("macro_fuse: basis has no direction '" + cfg.age_shift->attribute +
                                "'");
        child = shift_along(child, *dir, cfg.age_shift->amount);
    }
    return child;
}

// Projections p_l = <code, n_l> over the mask plus the residual left after
// removing them. Requires an orthonormal basis so the split is exact.
struct FusionDecomposition {
    LayeredLatentCode residual;
    std::map<std::string, double> projections;
};

inline FusionDecomposition decompose(const LayeredLatentCode& code, const SemanticBasis& basis) {
    basis.check_orthonormal();
    if (!code.same_shape(basis.directions.front().vector))
        throw ContractError("decompose: code and basis differ in shape");
    const LayerMask& mask = basis.directions.front().mask;
    FusionDecomposition dec;
    dec.residual = code;
    for (const auto& dir : basis.directions) {
        const double p = dot_over_mask(code, dir.vector, mask);
        dec.projections[dir.attribute] = p;
        for (int layer : mask.active()) {
            double* rr = dec.residual.row(layer);
            const double* rd = dir.vector.row(layer);
            for (int d = 0; d < code.dim(); ++d) rr[d] -= p * rd[d];
        }
    }
    return dec;
}

inline LayeredLatentCode resynthesize(const FusionDecomposition& dec, const SemanticBasis& basis) {
    basis.check_orthonormal();
    if (dec.projections.size() != basis.directions.size())
        throw ContractError("resynthesize: projection count differs from basis size");
    if (!dec.residual.same_shape(basis.directions.front().vector))
        throw ContractError("resynthesize: residual and basis differ in shape");
    const LayerMask& mask = basis.directions.front().mask;
    LayeredLatentCode out = dec.residual;
    for (const auto& dir : basis.directions) {
        auto it = dec.projections.find(dir.attribute);
        if (it == dec.projections.end())
            throw ContractError("resynthesize: no projection for '" + dir.attribute + "'");
        const double p = it->second;
        for (int layer : mask.active()) {
            double* ro = out.row(layer);
            const double* rd = dir.vector.row(layer);
            for (int d = 0; d < out.dim(); ++d) ro[d] += p * rd[d];
        }
    }
    return out;
}

// One micro-fusion decision: the sampled phenotypes plus the projection move.
struct MicroDecision {
    PhenotypeDecision decision;
    double p_father = 0.0;
    double p_mother = 0.0;
    double p_child_before = 0.0;
    double p_child_after = 0.0;
    double tau = 0.0;
    std::string rule_case;  // "matched-parent", "step-to-recessive", "parent-interval", "blend"
};

struct MicroFusionResult {
    LayeredLatentCode code;
    std::vector<MicroDecision> decisions;
};

// Resolves each basis direction's projection threshold tau (mean projection of
// the reference dataset, or the rule's explicit threshold) and the projection
// spread (max - min), which sizes the micro-fusion search step.
inline void resolve_thresholds(SemanticBasis& basis, const Dataset& reference,
                               const GeneticsRuleSet* rules = nullptr) {
    basis.check_orthonormal();
    if (reference.size() == 0) throw ContractError("resolve_thresholds: empty reference dataset");
    if (reference.layers() != basis.directions.front().vector.layers() ||
        reference.dim() != basis.directions.front().vector.dim())
        throw ContractError("resolve_thresholds: dataset and basis differ in shape");
    const LayerMask& mask = basis.directions.front().mask;
    for (const auto& dir : basis.directions) {
        double sum = 0.0;
        double lo = std::numeric_limits<double>::infinity();
        double hi = -std::numeric_limits<double>::infinity();
        for (const auto& s : reference.samples()) {
            const double p = dot_over_mask(s.code, dir.vector, mask);
            sum += p;
            lo = std::min(lo, p);
            hi = std::max(hi, p);
        }
        ProjectionThreshold t;
        t.tau = sum / static_cast<double>(reference.size());
        t.spread = hi - lo;
        if (rules) {
            if (const TraitRule* rule = rules->find(dir.attribute); rule && rule->explicit_threshold)
                t.tau = *rule->explicit_threshold;
        }
        basis.thresholds[dir.attribute] = t;
    }
}

// Heredity-guided per-attribute adjustment of the macro-fused child code.
// For each basis direction, with p_f, p_m, p_c the father/mother/child
// projections classified against tau:
//   (a) one dominant, one recessive parent: draw the child phenotype and copy
//       the matching parent's projection;
//   (b) both dominant, draw recessive: from the less extreme parent's
//       projection, step toward the recessive side in increments of
//       0.05 * spread until the classification flips (cap 100 steps);
//   (c) both dominant with a dominant draw, both recessive, or no dominance
//       law: uniform draw within [min(p_f, p_m), max(p_f, p_m)];
//   (d) blend mode: the parents' midpoint.
// The residual and all masked-out layers are left untouched.
inline MicroFusionResult micro_fuse(const LayeredLatentCode& child_macro,
                                    const LayeredLatentCode& father,
                                    const LayeredLatentCode& mother, const SemanticBasis& basis,
                                    const GeneticsRuleSet& rules, Rng& rng) {
    basis.check_orthonormal();
    if (!child_macro.same_shape(father) || !child_macro.same_shape(mother))
        throw ContractError("micro_fuse: code shapes differ");
    if (!child_macro.same_shape(basis.directions.front().vector))
        throw ContractError("micro_fuse: code and basis differ in shape");
    const LayerMask& mask = basis.directions.front().mask;

    MicroFusionResult result;
    result.code = child_macro;
    for (const auto& dir : basis.directions) {
        auto th = basis.thresholds.find(dir.attribute);
        if (th == basis.thresholds.end())
            throw ContractError("micro_fuse: unresolved threshold for '" + dir.attribute + "'");
        const double tau = th->second.tau;

        MicroDecision md;
        md.decision.attribute = dir.attribute;
        md.tau = tau;
        md.p_father = dot_over_mask(father, dir.vector, mask);
        md.p_mother = dot_over_mask(mother, dir.vector, mask);
        md.p_child_before = dot_over_mask(result.code, dir.vector, mask);
        const double lo = std::min(md.p_father, md.p_mother);
        const double hi = std::max(md.p_father, md.p_mother);

        const TraitRule* rule = rules.find(dir.attribute);
        double p_new;
        if (rule && rule->mode == InheritanceMode::blend) {
            p_new = 0.5 * (md.p_father + md.p_mother);
            md.rule_case = "blend";
        } else if (rule && rule->mode == InheritanceMode::mendelian && rule->dominant_side) {
            const DominantSide side = *rule->dominant_side;
            const Phenotype pf = classify_trait(md.p_father, side, tau);
            const Phenotype pm = classify_trait(md.p_mother, side, tau);
            md.decision = sample_phenotype(pf, pm, *rule, rng);
            if (pf != pm) {
                // (a) copy the projection of the parent matching the draw
                const bool father_matches = pf == md.decision.child_phenotype;
                p_new = father_matches ? md.p_father : md.p_mother;
                md.rule_case = "matched-parent";
            } else if (pf == Phenotype::dominant &&
                       md.decision.child_phenotype == Phenotype::recessive) {
                // (b) cross the less obvious dominant side until recessive
                const double spread = th->second.spread;
                const double delta = 0.05 * spread;
                const double start = std::abs(md.p_father - tau) <= std::abs(md.p_mother - tau)
                                         ? md.p_father
                                         : md.p_mother;
                const double step = side == DominantSide::above ? -delta : delta;
                p_new = start;
                bool flipped = false;
                for (int k = 1; k <= 100; ++k) {
                    p_new = start + step * k;
                    if (classify_trait(p_new, side, tau) == Phenotype::recessive) {
                        flipped = true;
                        break;
                    }
                }
                if (!flipped)
                    throw NumericalError("micro_fuse: step cap exceeded for attribute '" +
                                         dir.attribute + "'");
                md.rule_case = "step-to-recessive";
            } else {
                // (c) move randomly within the parents' projections
                p_new = std::clamp(lo + rng.uniform() * (hi - lo), lo, hi);
                md.rule_case = "parent-interval";
            }
        } else {
            // no clear genetic rule (also covers sex-influenced rules, which
            // are not wired to projections)
            p_new = std::clamp(lo + rng.uniform() * (hi - lo), lo, hi);
            md.rule_case = "parent-interval";
        }

        const double shift = p_new - md.p_child_before;
        for (int layer : mask.active()) {
            double* rc = result.code.row(layer);
            const double* rd = dir.vector.row(layer);
            for (int d = 0; d < result.code.dim(); ++d) rc[d] += shift * rd[d];
        }
        md.p_child_after = p_new;
        result.decisions.push_back(std::move(md));
    }
    return result;
}

}  // namespace latfuse
