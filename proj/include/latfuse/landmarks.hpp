#pragma once

#include <cmath>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "latfuse/latent_code.hpp"

namespace latfuse {

inline constexpr int kNumLandmarks = 68;

// 68 (x, y) landmark points in pixel units, 1-based numbering per the dlib-68
// convention: points[i] holds landmark i+1.
struct LandmarkSet {
    std::string id;
    std::vector<std::pair<double, double>> points;

    void check_valid() const {
        if (points.size() != kNumLandmarks)
            throw ContractError("landmark set '" + id + "' has " +
                                std::to_string(points.size()) + " points, expected 68");
        for (const auto& [x, y] : points)
            if (!std::isfinite(x) || !std::isfinite(y) || x < 0.0 || y < 0.0)
                throw ContractError("landmark set '" + id + "' has an invalid coordinate");
    }
};

// One measurable attribute: the label is the mean Euclidean distance over the
// listed landmark pairs (1-based indices).
struct AttributeDefinition {
    std::string name;
    std::vector<std::pair<int, int>> pairs;

    void check_valid() const {
        if (pairs.empty()) throw ContractError("attribute '" + name + "' has no landmark pairs");
        for (const auto& [a, b] : pairs)
            if (a < 1 || a > kNumLandmarks || b < 1 || b > kNumLandmarks)
                throw ContractError("attribute '" + name + "' references a landmark outside 1..68");
    }
};

// The nine face attributes and their landmark pairs.
inline const std::vector<AttributeDefinition>& builtin_attribute_table() {
    static const std::vector<AttributeDefinition> table = {
        {"eyebrow_length", {{18, 22}, {23, 27}}},
        {"eye_width", {{38, 42}, {45, 47}}},
        {"eye_length", {{37, 40}, {43, 46}}},
        {"nose_width", {{34, 36}, {32, 34}}},
        {"upper_lip_thickness", {{52, 63}, {51, 62}, {53, 64}}},
        {"lower_lip_thickness", {{58, 67}, {59, 68}, {57, 66}}},
        {"mouth_width", {{52, 58}, {51, 59}, {53, 57}}},
        {"mouth_length", {{49, 55}}},
        {"chin_sharpness", {{8, 10}, {7, 11}}},
    };
    return table;
}

struct LabelOptions {
    // Divide labels by the distance between the two eye centers. Off by
    // default: labels stay raw pixel distances.
    bool normalize_interocular = false;
};

inline double landmark_distance(const LandmarkSet& lm, int a, int b) {
    if (a < 1 || a > kNumLandmarks || b < 1 || b > kNumLandmarks)
        throw ContractError("landmark index out of range in '" + lm.id + "'");
    const auto& pa = lm.points[a - 1];
    const auto& pb = lm.points[b - 1];
    return std::hypot(pa.first - pb.first, pa.second - pb.second);
}

inline double interocular_distance(const LandmarkSet& lm) {
    double lx = 0, ly = 0, rx = 0, ry = 0;
    for (int i = 37; i <= 42; ++i) { lx += lm.points[i - 1].first; ly += lm.points[i - 1].second; }
    for (int i = 43; i <= 48; ++i) { rx += lm.points[i - 1].first; ry += lm.points[i - 1].second; }
    return std::hypot(lx / 6 - rx / 6, ly / 6 - ry / 6);
}

// Arithmetic mean over the attribute's pairs of the Euclidean distance
// between the two landmarks of each pair.
inline double compute_label(const LandmarkSet& lm, const AttributeDefinition& attr,
                            const LabelOptions& opts = {}) {
    lm.check_valid();
    attr.check_valid();
    double sum = 0.0;
    for (const auto& [a, b] : attr.pairs) sum += landmark_distance(lm, a, b);
    double label = sum / static_cast<double>(attr.pairs.size());
    if (opts.normalize_interocular) label /= interocular_distance(lm);
    return label;
}

// Attaches all built-in attribute labels to each sample; codes and landmark
// sets are matched one-to-one by id.
inline Dataset label_dataset(const Dataset& codes, const std::vector<LandmarkSet>& landmarks,
                             const LabelOptions& opts = {}) {
    std::map<std::string, const LandmarkSet*> by_id;
    for (const auto& lm : landmarks) {
        if (!by_id.emplace(lm.id, &lm).second)
            throw ContractError("duplicate landmark id '" + lm.id + "'");
    }
    std::set<std::string> seen;
    Dataset out(codes.layers(), codes.dim());
    for (const auto& s : codes.samples()) {
        auto it = by_id.find(s.id);
        if (it == by_id.end())
            throw ContractError("no landmark set for sample id '" + s.id + "'");
        if (!seen.insert(s.id).second)
            throw ContractError("duplicate sample id '" + s.id + "'");
        Sample labeled;
        labeled.id = s.id;
        labeled.code = s.code;
        for (const auto& attr : builtin_attribute_table())
            labeled.labels[attr.name] = compute_label(*it->second, attr, opts);
        out.add(std::move(labeled));
    }
    return out;
}

}  // namespace latfuse
