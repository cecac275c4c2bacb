#pragma once

#include <cmath>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <unordered_set>
#include <vector>

#include "latfuse/direction.hpp"
#include "latfuse/latent_code.hpp"
#include "latfuse/rng.hpp"

namespace latfuse {

enum class EstimatorMethod { basic, weighted };

struct EstimatorConfig {
    EstimatorMethod method = EstimatorMethod::basic;
    std::string target;
    std::vector<std::string> conditioned;
    // Pair-discard threshold on |u_i - u_j| for the target attribute. When
    // unset: 1.0 if the target labels are all integral (pixel-distance
    // regime, where the minimum nonzero difference is 1), else 1e-6.
    std::optional<double> min_delta;
    std::optional<std::size_t> max_pairs;
    std::optional<LayerMask> mask;  // default: layers 2..11 for L=18, else all
    std::uint64_t seed = 0;
    bool deterministic = true;  // sequential (i, j)-ascending reference reduction
};

namespace detail {

struct PairAccumulator {
    std::vector<double> sum;  // masked coordinates
    double weight_sum = 0.0;
    std::size_t admissible = 0;

    explicit PairAccumulator(std::size_t n) : sum(n, 0.0) {}

    void merge(const PairAccumulator& o) {
        for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += o.sum[i];
        weight_sum += o.weight_sum;
        admissible += o.admissible;
    }
};

// Flattened estimation inputs: per-sample masked latent rows plus the target
// and conditioning labels, extracted once so the pair sweep stays contiguous.
struct EstimationView {
    std::size_t n = 0;
    std::size_t width = 0;             // mask.count() * dim
    std::vector<double> codes;         // n * width
    std::vector<double> target_labels; // n
    std::vector<std::vector<double>> cond_labels;
};

inline std::size_t pair_count(std::size_t n) { return n * (n - 1) / 2; }

// Maps a flat pair index to (i, j), i < j, ordered (0,1), (0,2), ..., (1,2), ...
inline void pair_from_index(std::size_t idx, std::size_t n, std::size_t& i, std::size_t& j) {
    std::size_t row = 0;
    std::size_t row_len = n - 1;
    while (idx >= row_len) {
        idx -= row_len;
        ++row;
        --row_len;
    }
    i = row;
    j = row + 1 + idx;
}

// Accumulates weighted pair differences over pair indices [first, last) of the
// selected pair list (or of the full triangular enumeration when empty).
inline void sweep_pairs(const EstimationView& view, double min_delta, bool weighted,
                        const std::vector<std::size_t>* selected, std::size_t first,
                        std::size_t last, PairAccumulator& acc) {
    std::vector<double> diff(view.width);
    for (std::size_t p = first; p < last; ++p) {
        std::size_t i, j;
        pair_from_index(selected ? (*selected)[p] : p, view.n, i, j);
        const double dl = view.target_labels[i] - view.target_labels[j];
        if (std::abs(dl) < min_delta) continue;
        double wt = 1.0;
        if (weighted) {
            for (const auto& cond : view.cond_labels)
                wt *= std::exp(-std::abs((cond[i] - cond[j]) / dl));
        }
        const double* wi = view.codes.data() + i * view.width;
        const double* wj = view.codes.data() + j * view.width;
        const double inv = wt / dl;
        double* s = acc.sum.data();
        for (std::size_t d = 0; d < view.width; ++d) s[d] += (wi[d] - wj[d]) * inv;
        acc.weight_sum += wt;
        ++acc.admissible;
    }
}

inline bool labels_all_integral(const std::vector<double>& labels) {
    for (double v : labels)
        if (v != std::floor(v)) return false;
    return true;
}

}  // namespace detail

// Shared implementation of the basic and irrelevance-weighted pairwise
// difference estimators. The basic estimator averages (w_i - w_j)/(u_i - u_j)
// over admissible pairs; the weighted estimator multiplies each pair by
// exp(-|du_m/du_l|) per conditioned attribute m and normalizes by the weight
// sum. Masked-out layers are zeroed after averaging and the result is
// unit-normalized with the original norm kept in `magnitude`.
inline SemanticDirection estimate_direction(const Dataset& ds, const EstimatorConfig& cfg) {
    if (ds.size() < 2) throw ContractError("estimation needs at least 2 samples");
    if (!ds.has_attribute(cfg.target))
        throw ContractError("unknown target attribute '" + cfg.target + "'");
    const bool weighted = cfg.method == EstimatorMethod::weighted;
    if (weighted && cfg.conditioned.empty())
        throw ContractError("weighted estimation needs at least one conditioned attribute");
    for (const auto& m : cfg.conditioned) {
        if (m == cfg.target)
            throw ContractError("target '" + cfg.target + "' cannot be conditioned on itself");
        if (!ds.has_attribute(m)) throw ContractError("unknown conditioned attribute '" + m + "'");
    }

    LayerMask mask = cfg.mask ? *cfg.mask
                              : (ds.layers() == 18 ? LayerMask::middle_default()
                                                   : LayerMask::all(ds.layers()));
    mask.check_valid_for(ds.layers());

    detail::EstimationView view;
    view.n = ds.size();
    view.width = mask.count() * static_cast<std::size_t>(ds.dim());
    view.codes.reserve(view.n * view.width);
    view.target_labels.reserve(view.n);
    for (const auto& s : ds.samples()) {
        auto v = vector_view(s.code, mask);
        view.codes.insert(view.codes.end(), v.begin(), v.end());
        view.target_labels.push_back(s.labels.at(cfg.target));
    }
    if (weighted) {
        for (const auto& m : cfg.conditioned) {
            std::vector<double> col;
            col.reserve(view.n);
            for (const auto& s : ds.samples()) col.push_back(s.labels.at(m));
            view.cond_labels.push_back(std::move(col));
        }
    }

    double min_delta;
    if (cfg.min_delta) {
        min_delta = *cfg.min_delta;
        if (!(min_delta > 0.0)) throw ContractError("min_delta must be > 0");
    } else {
        min_delta = detail::labels_all_integral(view.target_labels) ? 1.0 : 1e-6;
    }

    const std::size_t total = detail::pair_count(view.n);
    std::optional<std::vector<std::size_t>> selection;
    if (cfg.max_pairs && *cfg.max_pairs < total) {
        // Floyd's algorithm: uniform subsample without replacement, then the
        // chosen pair indices are visited in ascending (i, j) order.
        const std::size_t k = *cfg.max_pairs;
        if (k == 0) throw ContractError("max_pairs must be positive");
        std::unordered_set<std::size_t> picked;
        picked.reserve(k);
        Rng rng(cfg.seed);
        for (std::size_t t = total - k; t < total; ++t) {
            std::size_t r = static_cast<std::size_t>(rng.uniform() * static_cast<double>(t + 1));
            if (r > t) r = t;
            picked.insert(picked.count(r) ? t : r);
        }
        std::vector<std::size_t> chosen(picked.begin(), picked.end());
        std::sort(chosen.begin(), chosen.end());
        selection = std::move(chosen);
    }
    const std::size_t n_iter = selection ? selection->size() : total;
    const std::vector<std::size_t>* sel = selection ? &*selection : nullptr;

    detail::PairAccumulator acc(view.width);
    if (cfg.deterministic || n_iter < (1u << 16)) {
        detail::sweep_pairs(view, min_delta, weighted, sel, 0, n_iter, acc);
    } else {
        // Fixed-size chunks merged in ascending chunk order: the reduction
        // tree does not depend on the thread count, so results are machine
        // independent (though not bit-identical to the sequential path).
        const std::size_t chunk = 1u << 16;
        const std::size_t n_chunks = (n_iter + chunk - 1) / chunk;
        std::vector<detail::PairAccumulator> parts(n_chunks, detail::PairAccumulator(view.width));
        const unsigned n_workers = std::max(1u, std::thread::hardware_concurrency());
        std::vector<std::future<void>> futs;
        for (unsigned w = 0; w < n_workers; ++w) {
            futs.push_back(std::async(std::launch::async, [&, w] {
                for (std::size_t c = w; c < n_chunks; c += n_workers)
                    detail::sweep_pairs(view, min_delta, weighted, sel, c * chunk,
                                        std::min(n_iter, (c + 1) * chunk), parts[c]);
            }));
        }
        for (auto& f : futs) f.get();
        for (const auto& p : parts) acc.merge(p);
    }

    if (acc.admissible == 0)
        throw ContractError("no admissible pairs: every |delta u_" + cfg.target +
                            "| is below min_delta");
    const double denom = weighted ? acc.weight_sum : static_cast<double>(acc.admissible);
    if (!(denom > 0.0)) throw NumericalError("all pair weights underflowed to zero");

    SemanticDirection dir;
    dir.attribute = cfg.target;
    dir.mask = mask;
    dir.vector = LayeredLatentCode(ds.layers(), ds.dim());
    std::size_t pos = 0;
    for (int layer : mask.active()) {
        double* r = dir.vector.row(layer);
        for (int d = 0; d < ds.dim(); ++d) r[d] = acc.sum[pos++] / denom;
    }
    dir.magnitude = norm_over_mask(dir.vector, mask);
    if (!(dir.magnitude > 0.0))
        throw NumericalError("estimated direction for '" + cfg.target + "' has zero magnitude");
    for (int layer : mask.active()) {
        double* r = dir.vector.row(layer);
        for (int d = 0; d < ds.dim(); ++d) r[d] /= dir.magnitude;
    }
    dir.normalized = true;
    dir.vector.check_finite();
    return dir;
}

inline SemanticDirection estimate_basic(const Dataset& ds, EstimatorConfig cfg) {
    cfg.method = EstimatorMethod::basic;
    cfg.conditioned.clear();
    return estimate_direction(ds, cfg);
}

inline SemanticDirection estimate_weighted(const Dataset& ds, EstimatorConfig cfg) {
    cfg.method = EstimatorMethod::weighted;
    return estimate_direction(ds, cfg);
}

}  // namespace latfuse
