#pragma once

#include <array>
#include <span>
#include <string>

#include "atsc/errors.hpp"

namespace atsc {

// Raw per-approach densities (veh/km) at one instant.
struct DensitySnapshot {
    std::array<double, 4> values{};
    double t = 0.0;
};

enum class RewardAggregate { kProduct, kSum, kSumSquares };

inline RewardAggregate reward_aggregate_from_string(const std::string& s) {
    if (s == "product") return RewardAggregate::kProduct;
    if (s == "sum") return RewardAggregate::kSum;
    if (s == "sum_squares") return RewardAggregate::kSumSquares;
    throw ConfigError("reward.aggregate must be product|sum|sum_squares, got '" + s + "'");
}

inline const char* to_string(RewardAggregate a) {
    switch (a) {
        case RewardAggregate::kProduct: return "product";
        case RewardAggregate::kSum: return "sum";
        default: return "sum_squares";
    }
}

inline double density_product(const DensitySnapshot& s) {
    return s.values[0] * s.values[1] * s.values[2] * s.values[3];
}

inline double density_sum(const DensitySnapshot& s) {
    return s.values[0] + s.values[1] + s.values[2] + s.values[3];
}

inline double density_sum_squares(const DensitySnapshot& s) {
    double out = 0.0;
    for (double v : s.values) out += v * v;
    return out;
}

inline double aggregate_density(const DensitySnapshot& s, RewardAggregate a) {
    switch (a) {
        case RewardAggregate::kProduct: return density_product(s);
        case RewardAggregate::kSum: return density_sum(s);
        default: return density_sum_squares(s);
    }
}

// A reward and its clipped sign: +1 when densities fell, -1 when they rose,
// 0 on an exact tie.
struct RewardValue {
    double raw = 0.0;
    int clipped = 0;
};

inline int clip_sign(double raw) { return (raw > 0.0) - (raw < 0.0); }

// Difference of the chosen aggregate across two timestamps (earlier minus
// later, so falling density is rewarded).
inline RewardValue step_reward(const DensitySnapshot& before, const DensitySnapshot& after,
                               RewardAggregate aggregate) {
    if (!(before.t < after.t))
        throw ArgumentError("step_reward: snapshots must be strictly ordered in time");
    const double raw = aggregate_density(before, aggregate) - aggregate_density(after, aggregate);
    return {raw, clip_sign(raw)};
}

// Mean of the agents' clipped rewards.
inline double global_reward(std::span<const int> individual) {
    if (individual.empty()) throw ArgumentError("global_reward: no rewards given");
    double sum = 0.0;
    for (int r : individual) {
        if (r < -1 || r > 1)
            throw ArgumentError("global_reward: clipped rewards must lie in {-1,0,+1}");
        sum += r;
    }
    return sum / static_cast<double>(individual.size());
}

inline double global_reward(const std::array<int, 4>& individual) {
    return global_reward(std::span<const int>(individual.data(), individual.size()));
}

// Weighted fusion of the global and the individual reward, clipped. The
// default weight splits them evenly.
inline RewardValue combined_reward(double global, int individual, double global_weight = 0.5) {
    if (individual < -1 || individual > 1)
        throw ArgumentError("combined_reward: individual reward must lie in {-1,0,+1}");
    if (!(global_weight >= 0.0) || !(global_weight <= 1.0))
        throw ArgumentError("combined_reward: global_weight must lie in [0,1]");
    const double raw = global_weight * global + (1.0 - global_weight) * individual;
    return {raw, clip_sign(raw)};
}

} // namespace atsc
