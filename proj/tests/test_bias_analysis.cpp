#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "latfuse/bias_analysis.hpp"
#include "latfuse/rng.hpp"

using namespace latfuse;

namespace {

// Test-local oracle: fixed-step composite Simpson over [b - 10s, b + 10s]
// split at the |x| kink. Independent of the adaptive engine under test.
double fixed_simpson(double lo, double hi, int steps, double b, double sigma, bool with_x) {
    if (!(hi > lo)) return 0.0;
    const double h = (hi - lo) / steps;
    auto f = [&](double x) {
        const double g = std::exp(-(x - b) * (x - b) / (2 * sigma * sigma) - std::abs(x));
        return with_x ? x * g : g;
    };
    double acc = f(lo) + f(hi);
    for (int i = 1; i < steps; ++i) acc += f(lo + i * h) * (i % 2 ? 4.0 : 2.0);
    return acc * h / 3.0;
}

double oracle_b_prime(double b, double sigma) {
    const double lo = b - 10 * sigma, hi = b + 10 * sigma;
    double i0 = 0, i1 = 0;
    if (lo < 0 && hi > 0) {
        i0 = fixed_simpson(lo, 0, 20000, b, sigma, false) +
             fixed_simpson(0, hi, 20000, b, sigma, false);
        i1 = fixed_simpson(lo, 0, 20000, b, sigma, true) +
             fixed_simpson(0, hi, 20000, b, sigma, true);
    } else {
        i0 = fixed_simpson(lo, hi, 40000, b, sigma, false);
        i1 = fixed_simpson(lo, hi, 40000, b, sigma, true);
    }
    return i1 / i0;
}

// Test-local delta-method limit of the variance ratio V'/V: quadrature of
// E[w^2 (x - b')^2] / (E[w]^2 sigma^2) under x ~ N(b, sigma^2), w = e^-|x|.
double oracle_variance_ratio(double b, double sigma) {
    const double lo = b - 10 * sigma, hi = b + 10 * sigma;
    auto integrate = [&](auto f) {
        const int steps = 40000;
        auto weighted = [&](double x) {
            const double phi = std::exp(-(x - b) * (x - b) / (2 * sigma * sigma)) /
                               (sigma * std::sqrt(2 * 3.14159265358979323846));
            return f(x) * phi;
        };
        double acc = 0.0;
        std::vector<std::pair<double, double>> panels;
        if (lo < 0 && hi > 0)
            panels = {{lo, 0.0}, {0.0, hi}};
        else
            panels = {{lo, hi}};
        for (const auto& [a, c] : panels) {
            const double h = (c - a) / steps;
            double s = weighted(a) + weighted(c);
            for (int i = 1; i < steps; ++i) s += weighted(a + i * h) * (i % 2 ? 4.0 : 2.0);
            acc += s * h / 3.0;
        }
        return acc;
    };
    const double ew = integrate([](double x) { return std::exp(-std::abs(x)); });
    const double exw = integrate([](double x) { return x * std::exp(-std::abs(x)); });
    const double theta = exw / ew;
    const double v = integrate([theta](double x) {
        const double w = std::exp(-std::abs(x));
        return w * w * (x - theta) * (x - theta);
    });
    return v / (ew * ew * sigma * sigma);
}

}  // namespace

TEST_CASE("sigma -> 0 limit: ratio within 1e-3 of 1") {
    const CouplingAnalysis c = bias_ratio_quadrature(0.5, 1e-4);
    CHECK(c.ratio == Catch::Approx(1.0).margin(1e-3));
}

TEST_CASE("b = 0: b_prime vanishes by symmetry") {
    const CouplingAnalysis c = bias_ratio_quadrature(0.0, 1.0);
    CHECK(std::abs(c.b_prime) < 1e-9);
    CHECK(std::isnan(c.ratio));
}

TEST_CASE("quadrature matches the frozen independent value at (0.5, 1)") {
    // scipy adaptive quadrature at tolerance 1e-12 gives 0.24101855096501415
    const CouplingAnalysis c = bias_ratio_quadrature(0.5, 1.0);
    CHECK(c.b_prime == Catch::Approx(0.24101855096501415).margin(1e-8));
}

TEST_CASE("quadrature agrees with the fixed-step Simpson oracle across the grid") {
    for (double b : {0.1, 0.4, 0.8}) {
        for (double sigma : {0.25, 1.0, 3.75}) {
            const CouplingAnalysis c = bias_ratio_quadrature(b, sigma);
            CHECK(c.b_prime == Catch::Approx(oracle_b_prime(b, sigma)).margin(1e-7));
        }
    }
}

TEST_CASE("quadrature agrees with a self-normalized Monte Carlo oracle within 3 SE") {
    const double b = 0.5, sigma = 1.0;
    const CouplingAnalysis c = bias_ratio_quadrature(b, sigma);
    Rng rng(404);
    const std::size_t n = 2'000'000;
    double sw = 0, sxw = 0;
    std::vector<double> xs(n);
    for (auto& x : xs) {
        x = rng.normal(b, sigma);
        const double w = std::exp(-std::abs(x));
        sw += w;
        sxw += x * w;
    }
    const double mc = sxw / sw;
    double se2_num = 0;
    for (double x : xs) {
        const double w = std::exp(-std::abs(x));
        se2_num += w * w * (x - mc) * (x - mc);
    }
    const double se = std::sqrt(se2_num) / sw;
    CHECK(std::abs(c.b_prime - mc) < 3 * se);
}

TEST_CASE("ratio is below 1 and monotone decreasing in sigma") {
    for (double b : {0.2, 0.5, 0.8}) {
        double prev = 1.0;
        for (int i = 0; i < 20; ++i) {
            const double sigma = 0.1 + i * (4.0 - 0.1) / 19.0;
            const CouplingAnalysis c = bias_ratio_quadrature(b, sigma);
            CHECK(c.ratio < 1.0);
            CHECK(c.ratio > 0.0);
            CHECK(c.ratio < prev);
            prev = c.ratio;
        }
    }
}

TEST_CASE("bias_ratio_quadrature validates its domain") {
    CHECK_THROWS_AS(bias_ratio_quadrature(-0.1, 1.0), ContractError);
    CHECK_THROWS_AS(bias_ratio_quadrature(1.0, 1.0), ContractError);
    CHECK_THROWS_AS(bias_ratio_quadrature(0.5, 0.0), ContractError);
}

TEST_CASE("grid validates its inputs") {
    CHECK_THROWS_AS(bias_variance_grid({}, {1.0}, 10, 100, 1), ContractError);
    CHECK_THROWS_AS(bias_variance_grid({0.5}, {}, 10, 100, 1), ContractError);
    CHECK_THROWS_AS(bias_variance_grid({0.5}, {1.0}, 10, 99, 1), ContractError);
    CHECK_THROWS_AS(bias_variance_grid({0.5}, {1.0}, 1, 100, 1), ContractError);
}

TEST_CASE("grid cells are deterministic per (seed, cell) and order-independent") {
    const auto a = bias_variance_grid({0.2, 0.5}, {0.5, 1.0}, 50, 200, 99);
    const auto b = bias_variance_grid({0.2, 0.5}, {0.5, 1.0}, 50, 200, 99);
    REQUIRE(a.size() == 4);
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].variance_ratio == b[i].variance_ratio);
        CHECK(a[i].b_prime == b[i].b_prime);
    }
    // a sub-grid sharing (seed, b-index, sigma-index) reproduces the same cell
    const auto c = bias_variance_grid({0.2}, {0.5}, 50, 200, 99);
    CHECK(c[0].variance_ratio == a[0].variance_ratio);
}

TEST_CASE("variance ratio is about 1 for near-constant weights") {
    const auto rows = bias_variance_grid({0.5}, {1e-4}, 200, 500, 7);
    CHECK(rows[0].variance_ratio == Catch::Approx(1.0).margin(0.05));
}

TEST_CASE("variance reduction holds where the weight clips the |x| kink region") {
    // true (delta-method) ratios are well below 1 for these cells
    const auto rows = bias_variance_grid({0.1, 0.3}, {0.75, 1.5, 3.0}, 200, 500, 11);
    for (const auto& r : rows) CHECK(r.variance_ratio < 1.0);
}

TEST_CASE("Monte Carlo variance ratio matches the delta-method quadrature oracle") {
    // includes a sigma << b cell where the weighting inflates the variance:
    // the exponential weight acts as a pure tilt there, V'/V = (1+s^2)e^{s^2}
    // to leading order, which both routes must reproduce
    struct Cell {
        double b, sigma, tol;
    };
    for (const Cell cell : {Cell{0.9, 0.25, 0.12}, {0.1, 0.5, 0.08}, {0.5, 1.0, 0.08}}) {
        const auto rows = bias_variance_grid({cell.b}, {cell.sigma}, 400, 4000, 1234);
        const double oracle = oracle_variance_ratio(cell.b, cell.sigma);
        INFO("b=" << cell.b << " sigma=" << cell.sigma << " oracle=" << oracle);
        CHECK(rows[0].variance_ratio == Catch::Approx(oracle).margin(cell.tol));
    }
    // the frozen independent value for the tilt-inflation corner
    CHECK(oracle_variance_ratio(0.9, 0.25) == Catch::Approx(1.1279112693600233).margin(1e-3));
}
