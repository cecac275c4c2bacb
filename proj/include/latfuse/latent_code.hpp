#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "latfuse/errors.hpp"

namespace latfuse {

// An L x D matrix of layer vectors modelling a layered latent code
// (18 layers of dimension 512 by default, two layers per resolution level).
// Stored row-major; every entry must stay finite.
class LayeredLatentCode {
public:
    LayeredLatentCode() : layers_(0), dim_(0) {}

    LayeredLatentCode(int layers, int dim, double fill = 0.0)
        : layers_(layers), dim_(dim), data_(static_cast<std::size_t>(layers) * dim, fill) {
        if (layers <= 0 || dim <= 0)
            throw ContractError("latent code shape must be positive, got (" +
                                std::to_string(layers) + ", " + std::to_string(dim) + ")");
    }

    static LayeredLatentCode from_rows(int layers, int dim, std::vector<double> data) {
        LayeredLatentCode c(layers, dim);
        if (data.size() != c.data_.size())
            throw ContractError("latent code data size mismatch");
        c.data_ = std::move(data);
        c.check_finite();
        return c;
    }

    int layers() const { return layers_; }
    int dim() const { return dim_; }
    std::size_t size() const { return data_.size(); }

    double& at(int layer, int d) { return data_[static_cast<std::size_t>(layer) * dim_ + d]; }
    double at(int layer, int d) const { return data_[static_cast<std::size_t>(layer) * dim_ + d]; }

    double* row(int layer) { return data_.data() + static_cast<std::size_t>(layer) * dim_; }
    const double* row(int layer) const { return data_.data() + static_cast<std::size_t>(layer) * dim_; }

    const std::vector<double>& flat() const { return data_; }
    std::vector<double>& flat() { return data_; }

    bool same_shape(const LayeredLatentCode& o) const {
        return layers_ == o.layers_ && dim_ == o.dim_;
    }

    void check_finite() const {
        for (double v : data_)
            if (!std::isfinite(v)) throw ContractError("latent code contains a non-finite entry");
    }

    bool operator==(const LayeredLatentCode& o) const {
        return layers_ == o.layers_ && dim_ == o.dim_ && data_ == o.data_;
    }

private:
    int layers_;
    int dim_;
    std::vector<double> data_;
};

// Non-empty set of active layer indices. Indices are validated against a
// concrete layer count at the point of use.
class LayerMask {
public:
    explicit LayerMask(std::vector<int> active) : active_(std::move(active)) {
        std::sort(active_.begin(), active_.end());
        active_.erase(std::unique(active_.begin(), active_.end()), active_.end());
        if (active_.empty()) throw ContractError("layer mask must be non-empty");
        if (active_.front() < 0) throw ContractError("layer mask index must be non-negative");
    }

    static LayerMask all(int layers) {
        std::vector<int> v(layers);
        for (int i = 0; i < layers; ++i) v[i] = i;
        return LayerMask(std::move(v));
    }

    // The middle layers 2..11 (0-based): the first two and the last six of an
    // 18-layer code are left untouched.
    static LayerMask middle_default() { return range(2, 11); }

    static LayerMask range(int first, int last) {
        std::vector<int> v;
        for (int i = first; i <= last; ++i) v.push_back(i);
        return LayerMask(std::move(v));
    }

    const std::vector<int>& active() const { return active_; }
    std::size_t count() const { return active_.size(); }
    int max_index() const { return active_.back(); }

    bool contains(int layer) const {
        return std::binary_search(active_.begin(), active_.end(), layer);
    }

    void check_valid_for(int layers) const {
        if (active_.back() >= layers)
            throw ContractError("layer mask index " + std::to_string(active_.back()) +
                                " out of range for " + std::to_string(layers) + " layers");
    }

    LayerMask complement(int layers) const {
        check_valid_for(layers);
        std::vector<int> v;
        for (int i = 0; i < layers; ++i)
            if (!contains(i)) v.push_back(i);
        return LayerMask(std::move(v));
    }

    bool operator==(const LayerMask& o) const { return active_ == o.active_; }

private:
    std::vector<int> active_;
};

struct Sample {
    std::string id;
    LayeredLatentCode code;
    std::map<std::string, double> labels;
};

// Ordered sample collection; all samples share one shape and one label-key set.
class Dataset {
public:
    Dataset() : layers_(0), dim_(0) {}
    Dataset(int layers, int dim) : layers_(layers), dim_(dim) {}

    void add(Sample s) {
        if (layers_ == 0 && dim_ == 0) {
            layers_ = s.code.layers();
            dim_ = s.code.dim();
        }
        if (s.code.layers() != layers_ || s.code.dim() != dim_)
            throw ContractError("sample '" + s.id + "' shape differs from dataset shape");
        if (!samples_.empty()) {
            const auto& ref = samples_.front().labels;
            if (s.labels.size() != ref.size() ||
                !std::equal(ref.begin(), ref.end(), s.labels.begin(),
                            [](const auto& a, const auto& b) { return a.first == b.first; }))
                throw ContractError("sample '" + s.id + "' label keys differ from dataset");
        }
        samples_.push_back(std::move(s));
    }

    const std::vector<Sample>& samples() const { return samples_; }
    std::size_t size() const { return samples_.size(); }
    int layers() const { return layers_; }
    int dim() const { return dim_; }

    std::vector<std::string> attribute_names() const {
        std::vector<std::string> names;
        if (!samples_.empty())
            for (const auto& [k, v] : samples_.front().labels) names.push_back(k);
        return names;
    }

    bool has_attribute(const std::string& name) const {
        return !samples_.empty() && samples_.front().labels.count(name) > 0;
    }

private:
    int layers_;
    int dim_;
    std::vector<Sample> samples_;
};

// Concatenation of the active layers' rows in ascending layer order.
inline std::vector<double> vector_view(const LayeredLatentCode& code, const LayerMask& mask) {
    mask.check_valid_for(code.layers());
    std::vector<double> out;
    out.reserve(mask.count() * code.dim());
    for (int layer : mask.active())
        out.insert(out.end(), code.row(layer), code.row(layer) + code.dim());
    return out;
}

// Zeroes the two w-vector rows owned by one resolution layer (1-based, 1..L/2).
inline LayeredLatentCode ablate_layers(const LayeredLatentCode& code, int resolution_layer) {
    const int max_res = code.layers() / 2;
    if (resolution_layer < 1 || resolution_layer > max_res)
        throw ContractError("resolution layer " + std::to_string(resolution_layer) +
                            " out of range 1.." + std::to_string(max_res));
    LayeredLatentCode out = code;
    const int first = 2 * resolution_layer - 2;
    std::fill(out.row(first), out.row(first) + 2 * code.dim(), 0.0);
    return out;
}

}  // namespace latfuse
