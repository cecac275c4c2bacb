#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "latfuse/quadrature.hpp"
#include "latfuse/rng.hpp"

namespace latfuse {

// Coupling of a conditioned attribute m onto a target attribute l, modelled as
// du_m/du_l ~ Normal(b, sigma^2). b_prime is the residual mean after the
// exp(-|x|) weighting; ratio = b_prime/b; variance_ratio = V'/V compares the
// weighted and unweighted estimators of the v_m component.
struct CouplingAnalysis {
    double b = 0.0;
    double sigma = 0.0;
    double b_prime = 0.0;
    double ratio = std::numeric_limits<double>::quiet_NaN();
    double variance_ratio = std::numeric_limits<double>::quiet_NaN();
};

// b' = int x exp(-(x-b)^2/(2 s^2) - |x|) dx / int exp(-(x-b)^2/(2 s^2) - |x|) dx
// by adaptive quadrature. Substituting x = b + s t keeps the integrand O(1)
// for any sigma; the t domain [-12, 12] covers [b - 10 s, b + 10 s] with the
// Gaussian tail below 1e-30, and the |x| kink gets its own panel knot.
// b = 0 is allowed for the b_prime value alone; ratio is NaN there.
inline CouplingAnalysis bias_ratio_quadrature(double b, double sigma) {
    if (!std::isfinite(b) || !std::isfinite(sigma) || b < 0.0 || b >= 1.0 || !(sigma > 0.0))
        throw ContractError("bias_ratio_quadrature needs 0 <= b < 1 and sigma > 0");
    const auto g = [b, sigma](double t) {
        return std::exp(-0.5 * t * t - std::abs(b + sigma * t));
    };
    const auto xg = [b, sigma, &g](double t) { return (b + sigma * t) * g(t); };
    std::vector<double> knots = {-12.0, 0.0, 12.0};
    const double kink = -b / sigma;
    if (kink > -12.0 && kink < 12.0) knots.push_back(kink);
    const double i0 = integrate_piecewise(g, knots, 1e-10);
    const double i1 = integrate_piecewise(xg, knots, 1e-10);
    if (!(i0 > 0.0)) throw NumericalError("bias_ratio_quadrature: degenerate denominator");

    CouplingAnalysis out;
    out.b = b;
    out.sigma = sigma;
    out.b_prime = i1 / i0;
    if (b > 0.0) out.ratio = out.b_prime / b;
    return out;
}

namespace detail {

inline double sample_variance(const std::vector<double>& xs) {
    const std::size_t n = xs.size();
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (double x : xs) ss += (x - mean) * (x - mean);
    return ss / static_cast<double>(n - 1);
}

}  // namespace detail

// For every (b, sigma) cell: b'/b from quadrature plus a Monte Carlo V'/V.
// Each replication draws n_pairs ratios x ~ Normal(b, sigma^2) and forms the
// weighted (sum x w / sum w, w = exp(-|x|)) and unweighted means from the same
// draws; V' and V are the sample variances across replications. Every cell
// derives its own generator from (seed, b-index, sigma-index), so cells can be
// evaluated concurrently.
inline std::vector<CouplingAnalysis> bias_variance_grid(const std::vector<double>& b_values,
                                                        const std::vector<double>& sigma_values,
                                                        int n_pairs, int replications,
                                                        std::uint64_t seed) {
    if (b_values.empty() || sigma_values.empty())
        throw ContractError("bias_variance_grid needs non-empty b and sigma grids");
    if (replications < 100) throw ContractError("bias_variance_grid needs replications >= 100");
    if (n_pairs < 2) throw ContractError("bias_variance_grid needs n_pairs >= 2");

    std::vector<CouplingAnalysis> rows;
    rows.reserve(b_values.size() * sigma_values.size());
    for (std::size_t bi = 0; bi < b_values.size(); ++bi) {
        for (std::size_t si = 0; si < sigma_values.size(); ++si) {
            CouplingAnalysis cell = bias_ratio_quadrature(b_values[bi], sigma_values[si]);
            Rng rng(Rng::derive_seed(seed, bi, si));
            std::vector<double> weighted_means(replications), plain_means(replications);
            for (int rep = 0; rep < replications; ++rep) {
                double sx = 0.0, sw = 0.0, sxw = 0.0;
                for (int i = 0; i < n_pairs; ++i) {
                    const double x = rng.normal(cell.b, cell.sigma);
                    const double w = std::exp(-std::abs(x));
                    sx += x;
                    sw += w;
                    sxw += x * w;
                }
                if (!(sw > 0.0))
                    throw NumericalError("bias_variance_grid: weights underflowed to zero");
                weighted_means[rep] = sxw / sw;
                plain_means[rep] = sx / n_pairs;
            }
            cell.variance_ratio =
                detail::sample_variance(weighted_means) / detail::sample_variance(plain_means);
            rows.push_back(cell);
        }
    }
    return rows;
}

}  // namespace latfuse
