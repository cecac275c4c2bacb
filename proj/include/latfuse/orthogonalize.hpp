#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "latfuse/direction.hpp"

namespace latfuse {

namespace detail {

inline void axpy_over_mask(double alpha, const LayeredLatentCode& x, LayeredLatentCode& y,
                           const LayerMask& mask) {
    for (int layer : mask.active()) {
        const double* rx = x.row(layer);
        double* ry = y.row(layer);
        for (int d = 0; d < x.dim(); ++d) ry[d] += alpha * rx[d];
    }
}

inline void scale_over_mask(double alpha, LayeredLatentCode& x, const LayerMask& mask) {
    for (int layer : mask.active()) {
        double* r = x.row(layer);
        for (int d = 0; d < x.dim(); ++d) r[d] *= alpha;
    }
}

// Largest eigenvalue of a small symmetric matrix by cyclic Jacobi sweeps.
inline double max_eigenvalue_symmetric(std::vector<std::vector<double>> m) {
    const std::size_t k = m.size();
    if (k == 1) return m[0][0];
    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < k; ++p)
            for (std::size_t q = p + 1; q < k; ++q) off += m[p][q] * m[p][q];
        if (off < 1e-30) break;
        for (std::size_t p = 0; p < k; ++p) {
            for (std::size_t q = p + 1; q < k; ++q) {
                if (m[p][q] == 0.0) continue;
                const double theta = 0.5 * std::atan2(2.0 * m[p][q], m[q][q] - m[p][p]);
                const double c = std::cos(theta), s = std::sin(theta);
                for (std::size_t i = 0; i < k; ++i) {
                    const double mip = m[i][p], miq = m[i][q];
                    m[i][p] = c * mip - s * miq;
                    m[i][q] = s * mip + c * miq;
                }
                for (std::size_t i = 0; i < k; ++i) {
                    const double mpi = m[p][i], mqi = m[q][i];
                    m[p][i] = c * mpi - s * mqi;
                    m[q][i] = s * mpi + c * mqi;
                }
            }
        }
    }
    double best = m[0][0];
    for (std::size_t i = 1; i < k; ++i) best = std::max(best, m[i][i]);
    return best;
}

}  // namespace detail

// Classical Gram-Schmidt in the given processing order, each vector
// unit-normalized, with one re-orthogonalization pass if any pairwise inner
// product still exceeds 1e-10. Inner products are taken over the shared mask.
inline SemanticBasis gram_schmidt(const SemanticBasis& basis,
                                  const std::vector<std::size_t>& order = {}) {
    basis.check_shapes();
    const std::size_t k = basis.directions.size();
    std::vector<std::size_t> perm = order;
    if (perm.empty()) {
        perm.resize(k);
        std::iota(perm.begin(), perm.end(), 0);
    }
    if (perm.size() != k) throw ContractError("gram_schmidt: order size mismatch");
    std::vector<bool> used(k, false);
    for (std::size_t p : perm) {
        if (p >= k || used[p]) throw ContractError("gram_schmidt: order is not a permutation");
        used[p] = true;
    }

    const LayerMask mask = basis.directions.front().mask;
    SemanticBasis out;
    out.orthonormal = true;
    for (std::size_t l = 0; l < k; ++l) {
        const SemanticDirection& src = basis.directions[perm[l]];
        const double input_norm = norm_over_mask(src.vector, mask);
        LayeredLatentCode r = src.vector;
        for (std::size_t i = 0; i < l; ++i) {
            const LayeredLatentCode& n = out.directions[i].vector;
            const double c = dot_over_mask(r, n, mask) / dot_over_mask(n, n, mask);
            detail::axpy_over_mask(-c, n, r, mask);
        }
        const double res_norm = norm_over_mask(r, mask);
        if (res_norm < 1e-8 * input_norm)
            throw ContractError("gram_schmidt: direction '" + src.attribute +
                                "' is linearly dependent on the ones before it");
        detail::scale_over_mask(1.0 / res_norm, r, mask);
        SemanticDirection n;
        n.attribute = src.attribute;
        n.vector = std::move(r);
        n.mask = mask;
        n.magnitude = res_norm;
        n.normalized = true;
        out.directions.push_back(std::move(n));
    }

    double worst = 0.0;
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i + 1; j < k; ++j)
            worst = std::max(worst, std::abs(dot_over_mask(out.directions[i].vector,
                                                           out.directions[j].vector, mask)));
    if (worst > 1e-10) {
        for (std::size_t l = 1; l < k; ++l) {
            LayeredLatentCode& r = out.directions[l].vector;
            for (std::size_t i = 0; i < l; ++i) {
                const double c = dot_over_mask(r, out.directions[i].vector, mask);
                detail::axpy_over_mask(-c, out.directions[i].vector, r, mask);
            }
            detail::scale_over_mask(1.0 / norm_over_mask(r, mask), r, mask);
        }
        worst = 0.0;
        for (std::size_t i = 0; i < k; ++i)
            for (std::size_t j = i + 1; j < k; ++j)
                worst = std::max(worst, std::abs(dot_over_mask(out.directions[i].vector,
                                                               out.directions[j].vector, mask)));
        if (worst > 1e-10)
            throw NumericalError("gram_schmidt: re-orthogonalization left residual coupling " +
                                 std::to_string(worst));
    }
    return out;
}

// Pairwise cosine similarities of the basis directions (symmetric, unit
// diagonal). Intended as a coupling diagnostic on pre-orthogonalization
// estimates.
inline std::vector<std::vector<double>> coupling_matrix(const SemanticBasis& basis) {
    basis.check_shapes();
    const std::size_t k = basis.directions.size();
    const LayerMask& mask = basis.directions.front().mask;
    std::vector<double> norms(k);
    for (std::size_t i = 0; i < k; ++i)
        norms[i] = norm_over_mask(basis.directions[i].vector, mask);
    std::vector<std::vector<double>> m(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i) {
        m[i][i] = 1.0;
        for (std::size_t j = i + 1; j < k; ++j) {
            const double c = dot_over_mask(basis.directions[i].vector, basis.directions[j].vector,
                                           mask) /
                             (norms[i] * norms[j]);
            m[i][j] = c;
            m[j][i] = c;
        }
    }
    return m;
}

// Largest principal angle (radians) between the subspaces spanned by two
// orthonormal bases of equal size: asin of the largest singular value of the
// component of B orthogonal to span(A).
inline double max_principal_angle(const SemanticBasis& a, const SemanticBasis& b) {
    a.check_orthonormal();
    b.check_orthonormal();
    if (a.directions.size() != b.directions.size())
        throw ContractError("max_principal_angle: bases differ in size");
    if (!a.directions.front().vector.same_shape(b.directions.front().vector))
        throw ContractError("max_principal_angle: bases differ in shape");
    const LayerMask& mask = a.directions.front().mask;
    const std::size_t k = a.directions.size();

    std::vector<LayeredLatentCode> residuals;
    residuals.reserve(k);
    for (const auto& dir : b.directions) {
        LayeredLatentCode r = dir.vector;
        for (const auto& base : a.directions)
            detail::axpy_over_mask(-dot_over_mask(r, base.vector, mask), base.vector, r, mask);
        residuals.push_back(std::move(r));
    }
    std::vector<std::vector<double>> gram(k, std::vector<double>(k, 0.0));
    for (std::size_t i = 0; i < k; ++i)
        for (std::size_t j = i; j < k; ++j) {
            gram[i][j] = dot_over_mask(residuals[i], residuals[j], mask);
            gram[j][i] = gram[i][j];
        }
    const double lam = std::max(0.0, detail::max_eigenvalue_symmetric(gram));
    return std::asin(std::min(1.0, std::sqrt(lam)));
}

}  // namespace latfuse
