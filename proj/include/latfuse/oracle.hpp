#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <utility>
#include <vector>

#include "latfuse/direction.hpp"
#include "latfuse/latent_code.hpp"
#include "latfuse/rng.hpp"

namespace latfuse {

// Synthetic ground-truth latent model: codes are built as
//   w = wbar + sum_k u_k v_k + noise_std * eta,  eta orthogonal to span{v_k},
// with K orthonormal directions v_k and labels u drawn from a correlated
// Gaussian. Keeping the noise off-span leaves the truth exactly identifiable.
struct OracleSpec {
    int layers = 18;
    int dim = 512;
    int num_directions = 4;
    std::vector<std::vector<double>> correlation;  // K x K, unit diagonal, PSD
    std::vector<std::string> label_names;          // default attr1..attrK
    std::vector<double> label_means;               // default 30 per attribute
    std::vector<double> label_stds;                // default 5 per attribute
    double noise_std = 0.0;
    bool quantize_labels = true;  // round to integers to mimic pixel distances
    std::uint64_t seed = 0;

    void fill_defaults() {
        const std::size_t k = static_cast<std::size_t>(num_directions);
        if (correlation.empty()) {
            correlation.assign(k, std::vector<double>(k, 0.0));
            for (std::size_t i = 0; i < k; ++i) correlation[i][i] = 1.0;
        }
        if (label_names.empty())
            for (std::size_t i = 0; i < k; ++i) label_names.push_back("attr" + std::to_string(i + 1));
        if (label_means.empty()) label_means.assign(k, 30.0);
        if (label_stds.empty()) label_stds.assign(k, 5.0);
    }

    void check_valid() const {
        const std::size_t k = static_cast<std::size_t>(num_directions);
        if (num_directions < 1) throw ContractError("oracle needs at least one direction");
        if (static_cast<long long>(num_directions) > static_cast<long long>(layers) * dim)
            throw ContractError("oracle cannot have more directions than latent dimensions");
        if (correlation.size() != k) throw ContractError("correlation matrix must be K x K");
        for (std::size_t i = 0; i < k; ++i) {
            if (correlation[i].size() != k) throw ContractError("correlation matrix must be K x K");
            if (std::abs(correlation[i][i] - 1.0) > 1e-12)
                throw ContractError("correlation matrix must have unit diagonal");
            for (std::size_t j = 0; j < k; ++j)
                if (std::abs(correlation[i][j] - correlation[j][i]) > 1e-12)
                    throw ContractError("correlation matrix must be symmetric");
        }
        if (label_names.size() != k || label_means.size() != k || label_stds.size() != k)
            throw ContractError("label names/means/stds must have one entry per direction");
        if (noise_std < 0.0) throw ContractError("noise_std must be >= 0");
    }
};

namespace detail {

// Lower Cholesky factor tolerating a semidefinite matrix (zero pivots).
inline std::vector<std::vector<double>> cholesky_psd(
    const std::vector<std::vector<double>>& a) {
    const std::size_t k = a.size();
    std::vector<std::vector<double>> l(k, std::vector<double>(k, 0.0));
    for (std::size_t j = 0; j < k; ++j) {
        double d = a[j][j];
        for (std::size_t t = 0; t < j; ++t) d -= l[j][t] * l[j][t];
        if (d < -1e-10) throw ContractError("correlation matrix is not positive semidefinite");
        l[j][j] = std::sqrt(std::max(d, 0.0));
        for (std::size_t i = j + 1; i < k; ++i) {
            double s = a[i][j];
            for (std::size_t t = 0; t < j; ++t) s -= l[i][t] * l[j][t];
            l[i][j] = l[j][j] > 0.0 ? s / l[j][j] : 0.0;
        }
    }
    return l;
}

}  // namespace detail

struct OracleResult {
    Dataset dataset;
    SemanticBasis truth;
};

inline OracleResult oracle_generate(OracleSpec spec, std::size_t n) {
    spec.fill_defaults();
    spec.check_valid();
    if (n < 2) throw ContractError("oracle_generate needs n >= 2");
    const std::size_t k = static_cast<std::size_t>(spec.num_directions);
    const std::size_t dim = static_cast<std::size_t>(spec.layers) * spec.dim;
    Rng rng(spec.seed);

    // K orthonormal directions from a random Gaussian matrix.
    std::vector<std::vector<double>> dirs(k, std::vector<double>(dim));
    for (auto& v : dirs)
        for (auto& x : v) x = rng.normal();
    for (std::size_t i = 0; i < k; ++i) {
        for (int pass = 0; pass < 2; ++pass) {
            for (std::size_t j = 0; j < i; ++j) {
                double c = 0.0;
                for (std::size_t d = 0; d < dim; ++d) c += dirs[i][d] * dirs[j][d];
                for (std::size_t d = 0; d < dim; ++d) dirs[i][d] -= c * dirs[j][d];
            }
        }
        double nrm = 0.0;
        for (double x : dirs[i]) nrm += x * x;
        nrm = std::sqrt(nrm);
        if (!(nrm > 0.0)) throw NumericalError("oracle_generate: degenerate direction draw");
        for (auto& x : dirs[i]) x /= nrm;
    }

    const auto chol = detail::cholesky_psd(spec.correlation);
    std::vector<double> wbar(dim);
    for (auto& x : wbar) x = rng.normal();

    OracleResult out;
    out.dataset = Dataset(spec.layers, spec.dim);
    std::vector<double> xi(k), u(k), noise(dim);
    for (std::size_t s = 0; s < n; ++s) {
        for (auto& x : xi) x = rng.normal();
        for (std::size_t i = 0; i < k; ++i) {
            double acc = 0.0;
            for (std::size_t j = 0; j <= i; ++j) acc += chol[i][j] * xi[j];
            u[i] = spec.label_means[i] + spec.label_stds[i] * acc;
            if (spec.quantize_labels) u[i] = std::round(u[i]);
        }
        std::vector<double> w = wbar;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t d = 0; d < dim; ++d) w[d] += u[i] * dirs[i][d];
        if (spec.noise_std > 0.0) {
            for (auto& x : noise) x = rng.normal();
            for (std::size_t i = 0; i < k; ++i) {
                double c = 0.0;
                for (std::size_t d = 0; d < dim; ++d) c += noise[d] * dirs[i][d];
                for (std::size_t d = 0; d < dim; ++d) noise[d] -= c * dirs[i][d];
            }
            for (std::size_t d = 0; d < dim; ++d) w[d] += spec.noise_std * noise[d];
        }

        Sample sample;
        char idbuf[32];
        std::snprintf(idbuf, sizeof(idbuf), "s%06zu", s);
        sample.id = idbuf;
        sample.code = LayeredLatentCode::from_rows(spec.layers, spec.dim, std::move(w));
        for (std::size_t i = 0; i < k; ++i) sample.labels[spec.label_names[i]] = u[i];
        out.dataset.add(std::move(sample));
    }

    out.truth.orthonormal = true;
    for (std::size_t i = 0; i < k; ++i) {
        SemanticDirection d;
        d.attribute = spec.label_names[i];
        d.vector = LayeredLatentCode::from_rows(spec.layers, spec.dim, std::move(dirs[i]));
        d.mask = LayerMask::all(spec.layers);
        d.magnitude = 1.0;
        d.normalized = true;
        out.truth.directions.push_back(std::move(d));
    }
    return out;
}

// Cosine similarity of an estimate with each true direction.
inline std::vector<std::pair<std::string, double>> measure_recovery(
    const SemanticDirection& estimated, const SemanticBasis& truth) {
    std::vector<std::pair<std::string, double>> report;
    const auto& ef = estimated.vector.flat();
    double en = 0.0;
    for (double x : ef) en += x * x;
    en = std::sqrt(en);
    for (const auto& t : truth.directions) {
        if (!t.vector.same_shape(estimated.vector))
            throw ContractError("measure_recovery: shape mismatch");
        const auto& tf = t.vector.flat();
        double dot = 0.0, tn = 0.0;
        for (std::size_t i = 0; i < tf.size(); ++i) {
            dot += ef[i] * tf[i];
            tn += tf[i] * tf[i];
        }
        report.emplace_back(t.attribute, dot / (en * std::sqrt(tn)));
    }
    return report;
}

}  // namespace latfuse
