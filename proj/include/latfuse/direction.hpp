#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "latfuse/latent_code.hpp"

namespace latfuse {

// An estimated semantic direction: an L x D matrix that is exactly zero on
// rows outside its mask. When normalized, the Frobenius norm is 1.
// `magnitude` keeps the pre-normalization norm so label-unit steps stay
// computable after normalization.
struct SemanticDirection {
    std::string attribute;
    LayeredLatentCode vector;
    LayerMask mask{LayerMask::all(1)};
    double magnitude = 0.0;
    bool normalized = false;

    void check_consistent() const {
        mask.check_valid_for(vector.layers());
        for (int layer = 0; layer < vector.layers(); ++layer) {
            if (mask.contains(layer)) continue;
            const double* r = vector.row(layer);
            for (int d = 0; d < vector.dim(); ++d)
                if (r[d] != 0.0)
                    throw ContractError("direction '" + attribute +
                                        "' has nonzero entries outside its mask");
        }
    }
};

inline double dot_over_mask(const LayeredLatentCode& a, const LayeredLatentCode& b,
                            const LayerMask& mask) {
    double s = 0.0;
    for (int layer : mask.active()) {
        const double* ra = a.row(layer);
        const double* rb = b.row(layer);
        for (int d = 0; d < a.dim(); ++d) s += ra[d] * rb[d];
    }
    return s;
}

inline double norm_over_mask(const LayeredLatentCode& a, const LayerMask& mask) {
    return std::sqrt(dot_over_mask(a, a, mask));
}

// Per-attribute projection threshold tau (the phenotype decision boundary in
// projection space) and the projection spread of the reference dataset, which
// sizes the search step used by micro fusion.
struct ProjectionThreshold {
    double tau = 0.0;
    double spread = 0.0;
};

// Ordered set of directions sharing one mask and one shape.
struct SemanticBasis {
    std::vector<SemanticDirection> directions;
    bool orthonormal = false;
    std::map<std::string, ProjectionThreshold> thresholds;

    const SemanticDirection* find(const std::string& attribute) const {
        for (const auto& d : directions)
            if (d.attribute == attribute) return &d;
        return nullptr;
    }

    void check_shapes() const {
        if (directions.empty()) throw ContractError("basis has no directions");
        for (const auto& d : directions) {
            d.check_consistent();
            if (!d.vector.same_shape(directions.front().vector))
                throw ContractError("basis directions disagree on shape");
            if (!(d.mask == directions.front().mask))
                throw ContractError("basis directions disagree on mask");
        }
    }

    // Verifies the orthonormality invariant: pairwise |<n_i, n_j>| <= 1e-10
    // and each norm within 1e-12 of 1.
    void check_orthonormal() const {
        check_shapes();
        if (!orthonormal) throw ContractError("basis is not flagged orthonormal");
        const LayerMask& mask = directions.front().mask;
        for (std::size_t i = 0; i < directions.size(); ++i) {
            const double n = norm_over_mask(directions[i].vector, mask);
            if (std::abs(n - 1.0) > 1e-12)
                throw ContractError("direction '" + directions[i].attribute +
                                    "' is not unit-normalized");
            for (std::size_t j = i + 1; j < directions.size(); ++j)
                if (std::abs(dot_over_mask(directions[i].vector, directions[j].vector, mask)) > 1e-10)
                    throw ContractError("directions '" + directions[i].attribute + "' and '" +
                                        directions[j].attribute + "' are not orthogonal");
        }
    }
};

// code + amount * dir. Masked-out layers are copied bit-for-bit from the input.
inline LayeredLatentCode shift_along(const LayeredLatentCode& code, const SemanticDirection& dir,
                                     double amount) {
    if (!code.same_shape(dir.vector)) throw ContractError("shift_along: shape mismatch");
    if (!dir.normalized) throw ContractError("shift_along: direction is not normalized");
    const double n = norm_over_mask(dir.vector, dir.mask);
    if (std::abs(n - 1.0) > 1e-10)
        throw ContractError("shift_along: direction norm deviates from 1 by more than 1e-10");
    LayeredLatentCode out = code;
    for (int layer : dir.mask.active()) {
        double* ro = out.row(layer);
        const double* rd = dir.vector.row(layer);
        for (int d = 0; d < code.dim(); ++d) ro[d] += amount * rd[d];
    }
    out.check_finite();
    return out;
}

}  // namespace latfuse
