#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "latfuse/estimator.hpp"
#include "latfuse/oracle.hpp"

using namespace latfuse;

TEST_CASE("noiseless oracle satisfies the linear model exactly") {
    OracleSpec spec;
    spec.layers = 3;
    spec.dim = 5;
    spec.num_directions = 2;
    spec.seed = 1;
    spec.quantize_labels = false;
    const auto r = oracle_generate(spec, 2);

    const auto& s1 = r.dataset.samples()[0];
    const auto& s2 = r.dataset.samples()[1];
    // w_1 - w_2 == sum_k (u_1k - u_2k) v_k entry by entry
    std::vector<double> expected(s1.code.flat().size(), 0.0);
    for (std::size_t k = 0; k < r.truth.directions.size(); ++k) {
        const std::string& name = r.truth.directions[k].attribute;
        const double du = s1.labels.at(name) - s2.labels.at(name);
        const auto& v = r.truth.directions[k].vector.flat();
        for (std::size_t i = 0; i < v.size(); ++i) expected[i] += du * v[i];
    }
    for (std::size_t i = 0; i < expected.size(); ++i) {
        const double got = s1.code.flat()[i] - s2.code.flat()[i];
        CHECK(std::abs(got - expected[i]) < 1e-10);
    }
}

TEST_CASE("same seed gives a bit-identical dataset") {
    OracleSpec spec;
    spec.layers = 2;
    spec.dim = 4;
    spec.num_directions = 2;
    spec.seed = 77;
    const auto a = oracle_generate(spec, 10);
    const auto b = oracle_generate(spec, 10);
    REQUIRE(a.dataset.size() == b.dataset.size());
    for (std::size_t i = 0; i < a.dataset.size(); ++i) {
        CHECK(a.dataset.samples()[i].code == b.dataset.samples()[i].code);
        CHECK(a.dataset.samples()[i].labels == b.dataset.samples()[i].labels);
        CHECK(a.dataset.samples()[i].id == b.dataset.samples()[i].id);
    }
    spec.seed = 78;
    const auto c = oracle_generate(spec, 10);
    CHECK(a.dataset.samples()[0].code != c.dataset.samples()[0].code);
}

TEST_CASE("truth basis is orthonormal and labels quantize to integers") {
    OracleSpec spec;
    spec.layers = 4;
    spec.dim = 8;
    spec.num_directions = 3;
    spec.seed = 5;
    spec.quantize_labels = true;
    const auto r = oracle_generate(spec, 50);
    r.truth.check_orthonormal();
    for (const auto& s : r.dataset.samples())
        for (const auto& [k, v] : s.labels) CHECK(v == std::floor(v));
}

TEST_CASE("empirical label correlation matches the spec within 0.03") {
    OracleSpec spec;
    spec.layers = 2;
    spec.dim = 4;
    spec.num_directions = 2;
    spec.seed = 11;
    spec.quantize_labels = false;
    spec.fill_defaults();
    spec.correlation[0][1] = spec.correlation[1][0] = 0.6;
    const auto r = oracle_generate(spec, 10000);

    double sx = 0, sy = 0, sxx = 0, syy = 0, sxy = 0;
    const double n = static_cast<double>(r.dataset.size());
    for (const auto& s : r.dataset.samples()) {
        const double x = s.labels.at("attr1");
        const double y = s.labels.at("attr2");
        sx += x;
        sy += y;
        sxx += x * x;
        syy += y * y;
        sxy += x * y;
    }
    const double cov = sxy / n - (sx / n) * (sy / n);
    const double vx = sxx / n - (sx / n) * (sx / n);
    const double vy = syy / n - (sy / n) * (sy / n);
    CHECK(cov / std::sqrt(vx * vy) == Catch::Approx(0.6).margin(0.03));
}

TEST_CASE("off-span noise leaves the truth identifiable") {
    OracleSpec spec;
    spec.layers = 4;
    spec.dim = 8;
    spec.num_directions = 2;
    spec.seed = 13;
    spec.noise_std = 2.0;
    const auto r = oracle_generate(spec, 300);
    // noise is orthogonal to the span: the estimator still recovers directions
    EstimatorConfig cfg;
    cfg.target = "attr1";
    cfg.mask = LayerMask::all(4);
    cfg.min_delta = 1.0;
    const auto est = estimate_basic(r.dataset, cfg);
    const auto report = measure_recovery(est, r.truth);
    CHECK(report[0].second > 0.98);
}

TEST_CASE("measure_recovery trivial values") {
    OracleSpec spec;
    spec.layers = 2;
    spec.dim = 4;
    spec.num_directions = 2;
    spec.seed = 17;
    const auto r = oracle_generate(spec, 5);
    const auto self = measure_recovery(r.truth.directions[0], r.truth);
    CHECK(self[0].second == Catch::Approx(1.0).margin(1e-12));
    CHECK(self[1].second == Catch::Approx(0.0).margin(1e-10));
}

TEST_CASE("basic estimator's off-target component tracks the label coupling b") {
    // with labels correlated at rho, the per-pair ratio mean is b = rho
    // (equal stds), so the off-target cosine approaches b / sqrt(1 + b^2);
    // averaged over repeated draws it must sit in a band around that value
    const double rho = 0.6;
    const double predicted = rho / std::sqrt(1.0 + rho * rho);
    double mean_cos = 0.0;
    const int reps = 10;
    for (int rep = 0; rep < reps; ++rep) {
        OracleSpec spec;
        spec.layers = 4;
        spec.dim = 16;
        spec.num_directions = 4;
        spec.seed = 1000 + rep;
        spec.fill_defaults();
        spec.correlation[0][1] = spec.correlation[1][0] = rho;
        const auto r = oracle_generate(spec, 1000);
        EstimatorConfig cfg;
        cfg.target = "attr1";
        cfg.mask = LayerMask::all(4);
        cfg.min_delta = 1.0;
        const auto est = estimate_basic(r.dataset, cfg);
        mean_cos += std::abs(measure_recovery(est, r.truth)[1].second);
    }
    mean_cos /= reps;
    CHECK(mean_cos == Catch::Approx(predicted).margin(0.05));
}

TEST_CASE("oracle spec validation") {
    OracleSpec spec;
    spec.layers = 2;
    spec.dim = 2;
    spec.num_directions = 5;  // more directions than dimensions
    CHECK_THROWS_AS(oracle_generate(spec, 10), ContractError);

    OracleSpec bad;
    bad.layers = 2;
    bad.dim = 4;
    bad.num_directions = 2;
    bad.correlation = {{1.0, 0.2}, {0.3, 1.0}};  // asymmetric
    CHECK_THROWS_AS(oracle_generate(bad, 10), ContractError);

    OracleSpec notpsd;
    notpsd.layers = 2;
    notpsd.dim = 4;
    notpsd.num_directions = 2;
    notpsd.correlation = {{1.0, 1.5}, {1.5, 1.0}};
    CHECK_THROWS_AS(oracle_generate(notpsd, 10), ContractError);

    OracleSpec ok;
    ok.layers = 2;
    ok.dim = 4;
    ok.num_directions = 2;
    CHECK_THROWS_AS(oracle_generate(ok, 1), ContractError);  // n >= 2
}
