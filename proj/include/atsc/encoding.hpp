#pragma once

#include <array>
#include <string>

#include "atsc/errors.hpp"
#include "atsc/sim/simulator.hpp"
#include "atsc/tensor.hpp"

namespace atsc {

struct PhaseOneHot {
    std::array<double, 4> bits{};
};

// Phase table row for the given phase index.
inline PhaseOneHot encode_phase(int phase_index) {
    if (phase_index < 0 || phase_index > 3)
        throw ArgumentError("encode_phase: index " + std::to_string(phase_index) +
                            " outside 0..3");
    PhaseOneHot p;
    p.bits[phase_index] = 1.0;
    return p;
}

// Densities normalized by the largest approach density. An all-zero input
// maps to the zero vector: an empty intersection carries no preference.
inline std::array<double, 4> encode_density(const std::array<double, 4>& raw) {
    double max = 0.0;
    for (int i = 0; i < 4; ++i) {
        if (raw[i] < 0.0)
            throw ArgumentError("encode_density: negative density at approach " +
                                std::to_string(i));
        max = std::max(max, raw[i]);
    }
    std::array<double, 4> out{};
    if (max > 0.0)
        for (int i = 0; i < 4; ++i) out[i] = raw[i] / max;
    return out;
}

struct SingleObservation {
    std::array<double, 4> encoded_density{};
    PhaseOneHot encoded_phase;

    std::array<double, 8> flat() const {
        return {encoded_density[0], encoded_density[1], encoded_density[2], encoded_density[3],
                encoded_phase.bits[0], encoded_phase.bits[1], encoded_phase.bits[2],
                encoded_phase.bits[3]};
    }

    Tensor to_tensor() const {
        Tensor t({8});
        const auto f = flat();
        for (int i = 0; i < 8; ++i) t[i] = f[i];
        return t;
    }
};

// 4x8 matrix: row 0 is the intersection itself, rows 1..3 its neighbors in
// declaration order, zero-padded when there are fewer than three.
struct MultiObservation {
    std::array<std::array<double, 8>, 4> rows{};

    Tensor to_tensor() const {
        Tensor t({4, 8});
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 8; ++c) t.at(r, c) = rows[r][c];
        return t;
    }
};

inline SingleObservation build_single_state(const Simulator& sim, int ix) {
    SingleObservation obs;
    obs.encoded_density = encode_density(sim.measure_density(ix));
    obs.encoded_phase = encode_phase(sim.current_phase(ix));
    return obs;
}

inline MultiObservation build_neighbor_matrix(const Simulator& sim, int ix,
                                              bool include_neighbors = true) {
    MultiObservation obs;
    obs.rows[0] = build_single_state(sim, ix).flat();
    if (include_neighbors) {
        const auto& neighbors = sim.topology().intersections[ix].neighbors;
        for (std::size_t r = 0; r < neighbors.size() && r < 3; ++r)
            obs.rows[r + 1] = build_single_state(sim, neighbors[r]).flat();
    }
    return obs;
}

} // namespace atsc
