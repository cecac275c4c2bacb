#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latfuse/errors.hpp"
#include "latfuse/rng.hpp"

namespace latfuse {

enum class Phenotype { dominant, recessive, na };
enum class InheritanceMode { mendelian, blend, sex_influenced_baldness };
enum class DominantSide { above, below };
enum class Sex { male, female };

inline const char* to_string(Phenotype p) {
    switch (p) {
        case Phenotype::dominant: return "dominant";
        case Phenotype::recessive: return "recessive";
        default: return "n/a";
    }
}

// Inheritance law for one attribute. dominant_side says which side of the
// threshold is the dominant phenotype; attributes without a stated law keep
// mode mendelian with no dominant_side and fusion treats them as "no clear
// genetic rule". The threshold is the dataset mean unless given explicitly.
struct TraitRule {
    std::string attribute;
    InheritanceMode mode = InheritanceMode::mendelian;
    std::optional<DominantSide> dominant_side;
    std::optional<double> explicit_threshold;

    void check_valid() const {
        if (mode == InheritanceMode::blend && dominant_side)
            throw ContractError("blend rule for '" + attribute + "' cannot have a dominant side");
        if (explicit_threshold && !std::isfinite(*explicit_threshold))
            throw ContractError("threshold for '" + attribute + "' must be finite");
    }
};

struct GeneticsRuleSet {
    std::map<std::string, TraitRule> rules;
    std::uint64_t seed = 0;

    const TraitRule* find(const std::string& attribute) const {
        auto it = rules.find(attribute);
        return it == rules.end() ? nullptr : &it->second;
    }
};

struct PhenotypeDecision {
    std::string attribute;
    Phenotype father_phenotype = Phenotype::na;
    Phenotype mother_phenotype = Phenotype::na;
    Phenotype child_phenotype = Phenotype::na;
    double probability_used = 0.0;
};

// The built-in inheritance priors:
//   big eyes, big nose, prominent chin, thick lower lip  -> dominant above
//   thin upper lip                                        -> dominant below
//   skin color                                            -> blend
//   baldness                                              -> sex-influenced
//   eyebrow length, mouth width/length                    -> no stated law
inline GeneticsRuleSet default_ruleset() {
    GeneticsRuleSet rs;
    auto add = [&rs](const std::string& name, InheritanceMode mode,
                     std::optional<DominantSide> side) {
        TraitRule r;
        r.attribute = name;
        r.mode = mode;
        r.dominant_side = side;
        rs.rules[name] = std::move(r);
    };
    add("eye_width", InheritanceMode::mendelian, DominantSide::above);
    add("eye_length", InheritanceMode::mendelian, DominantSide::above);
    add("nose_width", InheritanceMode::mendelian, DominantSide::above);
    add("chin_sharpness", InheritanceMode::mendelian, DominantSide::above);
    add("upper_lip_thickness", InheritanceMode::mendelian, DominantSide::below);
    add("lower_lip_thickness", InheritanceMode::mendelian, DominantSide::above);
    add("eyebrow_length", InheritanceMode::mendelian, std::nullopt);
    add("mouth_width", InheritanceMode::mendelian, std::nullopt);
    add("mouth_length", InheritanceMode::mendelian, std::nullopt);
    add("skin_color", InheritanceMode::blend, std::nullopt);
    add("baldness", InheritanceMode::sex_influenced_baldness, std::nullopt);
    return rs;
}

// P(child shows the recessive phenotype). Dominant parents are Aa or AA with
// equal probability; recessive parents are aa.
//   dominant x recessive -> 1/4, dominant x dominant -> 1/16,
//   recessive x recessive -> 1.
inline double offspring_recessive_probability(Phenotype father, Phenotype mother) {
    if (father == Phenotype::na || mother == Phenotype::na)
        throw ContractError("offspring_recessive_probability needs resolved parent phenotypes");
    const auto transmit_a = [](Phenotype p) {
        // P(parent transmits allele a): aa -> 1; {Aa, AA} equally likely -> 1/4.
        return p == Phenotype::recessive ? 1.0 : 0.25;
    };
    return transmit_a(father) * transmit_a(mother);
}

// P(child is bald) by exact enumeration over parental genotype posteriors.
// Phenotype model: men are bald iff they carry at least one B, women iff BB.
// Genotype given phenotype: bald man Bb or BB (1/2 each); bald woman BB;
// non-bald man bb; non-bald woman Bb or bb (1/2 each).
inline double baldness_probability(bool father_bald, bool mother_bald, Sex child_sex) {
    struct GenotypeProb {
        int b_alleles;  // number of B alleles in the genotype
        double prob;
    };
    const auto genotypes = [](bool bald, bool male) {
        std::vector<GenotypeProb> g;
        if (male) {
            if (bald) g = {{2, 0.5}, {1, 0.5}};  // BB or Bb
            else g = {{0, 1.0}};                 // bb
        } else {
            if (bald) g = {{2, 1.0}};            // BB
            else g = {{1, 0.5}, {0, 0.5}};       // Bb or bb
        }
        return g;
    };

    double p = 0.0;
    for (const auto& f : genotypes(father_bald, true)) {
        for (const auto& m : genotypes(mother_bald, false)) {
            const double pf = f.b_alleles / 2.0;  // P(father transmits B)
            const double pm = m.b_alleles / 2.0;
            const double p_bb = pf * pm;
            const double p_any_b = 1.0 - (1.0 - pf) * (1.0 - pm);
            p += f.prob * m.prob * (child_sex == Sex::male ? p_any_b : p_bb);
        }
    }
    return p;
}

// Phenotype of a value against a resolved threshold; exact ties classify as
// recessive.
inline Phenotype classify_trait(double value, DominantSide side, double threshold) {
    if (!std::isfinite(value) || !std::isfinite(threshold))
        throw ContractError("classify_trait needs finite value and threshold");
    const bool dominant = side == DominantSide::above ? value > threshold : value < threshold;
    return dominant ? Phenotype::dominant : Phenotype::recessive;
}

inline Phenotype classify_trait(double value, const TraitRule& rule) {
    if (rule.mode != InheritanceMode::mendelian)
        throw ContractError("classify_trait: rule for '" + rule.attribute + "' is not mendelian");
    if (!rule.dominant_side)
        throw ContractError("classify_trait: rule for '" + rule.attribute +
                            "' has no dominance law");
    if (!rule.explicit_threshold)
        throw ContractError("classify_trait: threshold for '" + rule.attribute +
                            "' is unresolved");
    return classify_trait(value, *rule.dominant_side, *rule.explicit_threshold);
}

// Draws the child phenotype: recessive with offspring_recessive_probability.
inline PhenotypeDecision sample_phenotype(Phenotype father, Phenotype mother,
                                          const TraitRule& rule, Rng& rng) {
    if (rule.mode != InheritanceMode::mendelian || !rule.dominant_side)
        throw ContractError("sample_phenotype: rule for '" + rule.attribute +
                            "' has no mendelian dominance law");
    PhenotypeDecision d;
    d.attribute = rule.attribute;
    d.father_phenotype = father;
    d.mother_phenotype = mother;
    d.probability_used = offspring_recessive_probability(father, mother);
    d.child_phenotype = rng.uniform() < d.probability_used ? Phenotype::recessive
                                                           : Phenotype::dominant;
    return d;
}

}  // namespace latfuse
