#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "latfuse/genetics.hpp"

using namespace latfuse;

namespace {

// Exact rational enumeration oracle for the baldness model, in 16ths.
// Parent genotype tables (numerator out of 2 for each genotype's weight):
//   bald man: BB, Bb each 1/2; non-bald man: bb
//   bald woman: BB; non-bald woman: Bb, bb each 1/2
int baldness_oracle_sixteenths(bool father_bald, bool mother_bald, Sex sex) {
    struct G {
        int b;       // B alleles
        int weight;  // out of 2
    };
    const std::vector<G> father = father_bald ? std::vector<G>{{2, 1}, {1, 1}}
                                              : std::vector<G>{{0, 2}};
    const std::vector<G> mother = mother_bald ? std::vector<G>{{2, 2}}
                                              : std::vector<G>{{1, 1}, {0, 1}};
    int total = 0;  // in units of 1/(2*2*2*2) = 1/16: genotype weights (x2 each)
                    // times allele transmissions (x2 each)
    for (const auto& f : father) {
        for (const auto& m : mother) {
            for (int fa = 0; fa < 2; ++fa) {      // father allele slot
                for (int ma = 0; ma < 2; ++ma) {  // mother allele slot
                    const int child_b = (fa < f.b ? 1 : 0) + (ma < m.b ? 1 : 0);
                    const bool bald = sex == Sex::male ? child_b >= 1 : child_b == 2;
                    if (bald) total += f.weight * m.weight;
                }
            }
        }
    }
    return total;
}

}  // namespace

TEST_CASE("offspring recessive probabilities: 1/4, 1/16, 1") {
    CHECK(offspring_recessive_probability(Phenotype::dominant, Phenotype::recessive) == 0.25);
    CHECK(offspring_recessive_probability(Phenotype::dominant, Phenotype::dominant) == 0.0625);
    CHECK(offspring_recessive_probability(Phenotype::recessive, Phenotype::recessive) == 1.0);
}

TEST_CASE("offspring recessive probability is symmetric") {
    for (Phenotype a : {Phenotype::dominant, Phenotype::recessive})
        for (Phenotype b : {Phenotype::dominant, Phenotype::recessive})
            CHECK(offspring_recessive_probability(a, b) == offspring_recessive_probability(b, a));
    CHECK_THROWS_AS(offspring_recessive_probability(Phenotype::na, Phenotype::dominant),
                    ContractError);
}

TEST_CASE("baldness probability matches the exact enumeration oracle on all 8 combinations") {
    for (bool f : {false, true}) {
        for (bool m : {false, true}) {
            for (Sex sex : {Sex::male, Sex::female}) {
                const double p = baldness_probability(f, m, sex);
                const double oracle = baldness_oracle_sixteenths(f, m, sex) / 16.0;
                INFO("father_bald=" << f << " mother_bald=" << m
                                    << " sex=" << (sex == Sex::male ? "male" : "female"));
                CHECK(p == oracle);  // dyadic values: exact equality
                CHECK(p >= 0.0);
                CHECK(p <= 1.0);
            }
        }
    }
}

TEST_CASE("baldness spot values") {
    CHECK(baldness_probability(true, true, Sex::female) == 0.75);
    CHECK(baldness_probability(false, false, Sex::male) == 0.25);
    CHECK(baldness_probability(false, true, Sex::female) == 0.0);
}

TEST_CASE("classify_trait follows the dominant side with ties recessive") {
    CHECK(classify_trait(2.0, DominantSide::above, 1.0) == Phenotype::dominant);
    CHECK(classify_trait(0.5, DominantSide::above, 1.0) == Phenotype::recessive);
    CHECK(classify_trait(1.0, DominantSide::above, 1.0) == Phenotype::recessive);
    // thin upper lip is dominant: thick (above threshold) classifies recessive
    CHECK(classify_trait(2.0, DominantSide::below, 1.0) == Phenotype::recessive);
    CHECK(classify_trait(0.5, DominantSide::below, 1.0) == Phenotype::dominant);
    CHECK(classify_trait(1.0, DominantSide::below, 1.0) == Phenotype::recessive);
}

TEST_CASE("classify_trait via rule needs a resolved threshold and a law") {
    TraitRule rule;
    rule.attribute = "eye_width";
    rule.mode = InheritanceMode::mendelian;
    rule.dominant_side = DominantSide::above;
    CHECK_THROWS_AS(classify_trait(1.0, rule), ContractError);
    rule.explicit_threshold = 0.5;
    CHECK(classify_trait(1.0, rule) == Phenotype::dominant);
    rule.dominant_side.reset();
    CHECK_THROWS_AS(classify_trait(1.0, rule), ContractError);
}

TEST_CASE("default ruleset encodes the stated dominance laws") {
    const GeneticsRuleSet rs = default_ruleset();
    CHECK(rs.find("upper_lip_thickness")->dominant_side == DominantSide::below);
    CHECK(rs.find("lower_lip_thickness")->dominant_side == DominantSide::above);
    CHECK(rs.find("eye_width")->dominant_side == DominantSide::above);
    CHECK(rs.find("eye_length")->dominant_side == DominantSide::above);
    CHECK(rs.find("nose_width")->dominant_side == DominantSide::above);
    CHECK(rs.find("chin_sharpness")->dominant_side == DominantSide::above);
    CHECK(rs.find("skin_color")->mode == InheritanceMode::blend);
    CHECK_FALSE(rs.find("skin_color")->dominant_side.has_value());
    CHECK(rs.find("baldness")->mode == InheritanceMode::sex_influenced_baldness);
    // attributes without a stated law stay mendelian with no dominance side
    for (const char* name : {"eyebrow_length", "mouth_width", "mouth_length"}) {
        CHECK(rs.find(name)->mode == InheritanceMode::mendelian);
        CHECK_FALSE(rs.find(name)->dominant_side.has_value());
    }
}

TEST_CASE("sample_phenotype is deterministic per seed and certain for recessive pairs") {
    TraitRule rule;
    rule.attribute = "eye_width";
    rule.dominant_side = DominantSide::above;

    Rng r1(7), r2(7);
    const auto a = sample_phenotype(Phenotype::dominant, Phenotype::recessive, rule, r1);
    const auto b = sample_phenotype(Phenotype::dominant, Phenotype::recessive, rule, r2);
    CHECK(a.child_phenotype == b.child_phenotype);
    CHECK(a.probability_used == 0.25);

    Rng r3(1);
    for (int i = 0; i < 50; ++i) {
        const auto d = sample_phenotype(Phenotype::recessive, Phenotype::recessive, rule, r3);
        CHECK(d.child_phenotype == Phenotype::recessive);
        CHECK(d.probability_used == 1.0);
    }
}

TEST_CASE("sampled recessive frequencies converge to the Mendelian probabilities") {
    TraitRule rule;
    rule.attribute = "eye_width";
    rule.dominant_side = DominantSide::above;
    const int n = 100000;

    Rng rng(2024);
    int rec = 0;
    for (int i = 0; i < n; ++i)
        rec += sample_phenotype(Phenotype::dominant, Phenotype::recessive, rule, rng)
                       .child_phenotype == Phenotype::recessive;
    CHECK(std::abs(rec / double(n) - 0.25) < 0.01);

    Rng rng2(2025);
    rec = 0;
    for (int i = 0; i < n; ++i)
        rec += sample_phenotype(Phenotype::dominant, Phenotype::dominant, rule, rng2)
                       .child_phenotype == Phenotype::recessive;
    CHECK(std::abs(rec / double(n) - 0.0625) < 0.005);
}

TEST_CASE("trait rule validation") {
    TraitRule blend;
    blend.attribute = "skin_color";
    blend.mode = InheritanceMode::blend;
    blend.dominant_side = DominantSide::above;
    CHECK_THROWS_AS(blend.check_valid(), ContractError);
}
