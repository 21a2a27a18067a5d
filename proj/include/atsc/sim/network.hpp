#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <string>
#include <vector>

#include "atsc/errors.hpp"
#include "atsc/sim/plan.hpp"

namespace atsc {

// Approach slot order used everywhere: the phase table rows.
enum Slot : int { kUpper = 0, kRight = 1, kLower = 2, kLeft = 3 };

inline const char* slot_name(int slot) {
    static const char* names[4] = {"upper", "right", "lower", "left"};
    return names[slot];
}

inline int slot_from_name(const std::string& s) {
    for (int i = 0; i < 4; ++i)
        if (s == slot_name(i)) return i;
    throw ConfigError("unknown approach slot '" + s + "'");
}

// External arrival process at a boundary section. `deterministic` replaces
// the Weibull draw with a fixed gap equal to `scale` seconds. Disabled
// arrivals model a zero-demand dummy approach.
struct ArrivalSpec {
    double shape = 2.0;
    double scale = 12.0;
    bool deterministic = false;
    bool enabled = true;
};

struct VehicleRecord {
    std::uint64_t id = 0;
    double entry_time = 0.0;        // admission to the current section, seconds
    double ideal_travel_time = 0.0; // section length / free-flow speed, seconds
};

// A vehicle generated at the boundary but not yet admitted to its section.
struct PendingVehicle {
    std::uint64_t id = 0;
    double arrival_time = 0.0;
};

struct RoadSection {
    std::string id;
    double length_km = 0.5;
    double free_flow_kmh = 50.0;
    bool boundary = false;
    ArrivalSpec arrival;             // meaningful when boundary

    int feeds_intersection = -1;     // intersection this section leads into
    int feeds_slot = -1;             // approach slot at that intersection

    std::deque<VehicleRecord> queue;
    std::deque<PendingVehicle> virtual_queue; // boundary only
    double discharge_carry = 0.0;    // fractional saturation-flow accumulator
    std::uint64_t cumulative_entered = 0;
    std::uint64_t cumulative_exited = 0;

    double ideal_travel_s() const { return length_km / free_flow_kmh * 3600.0; }
};

struct IntersectionNode {
    std::string id;
    std::array<int, 4> approaches{-1, -1, -1, -1}; // section index per slot
    // Row = inbound slot, column = outbound slot. Row-stochastic.
    std::array<std::array<double, 4>, 4> turn{};
    // Section fed when leaving through each outbound slot; -1 = network exit.
    std::array<int, 4> downstream{-1, -1, -1, -1};
    std::vector<int> neighbors;      // intersection indices, declaration order

    int current_phase = 0;           // slot whose green is (or was last) active
    PhasePlan active_plan;
};

struct NetworkTopology {
    std::vector<IntersectionNode> intersections;
    std::vector<RoadSection> sections;
    std::vector<int> boundary_sections;

    int intersection_index(const std::string& id) const {
        for (std::size_t i = 0; i < intersections.size(); ++i)
            if (intersections[i].id == id) return static_cast<int>(i);
        return -1;
    }
};

// Structural validation; throws ConfigError naming the offending element.
inline void validate_topology(const NetworkTopology& topo) {
    if (topo.intersections.empty())
        throw ConfigError("topology: needs at least one intersection");
    for (std::size_t x = 0; x < topo.intersections.size(); ++x) {
        const IntersectionNode& node = topo.intersections[x];
        for (int s = 0; s < 4; ++s) {
            const int sec = node.approaches[s];
            if (sec < 0 || sec >= static_cast<int>(topo.sections.size()))
                throw ConfigError("intersection " + node.id + ": missing section at slot " +
                                  slot_name(s));
            if (topo.sections[sec].feeds_intersection != static_cast<int>(x))
                throw ConfigError("section " + topo.sections[sec].id +
                                  ": inconsistent feeds_intersection");
            double row = 0.0;
            for (int c = 0; c < 4; ++c) {
                if (node.turn[s][c] < 0.0)
                    throw ConfigError("intersection " + node.id + ": negative turn fraction in row " +
                                      slot_name(s));
                row += node.turn[s][c];
            }
            if (std::abs(row - 1.0) > 1e-9)
                throw ConfigError("intersection " + node.id + ": turn row " + slot_name(s) +
                                  " sums to " + std::to_string(row) + ", expected 1");
        }
        for (int n : node.neighbors) {
            if (n < 0 || n >= static_cast<int>(topo.intersections.size()))
                throw ConfigError("intersection " + node.id + ": neighbor index out of range");
            const IntersectionNode& other = topo.intersections[n];
            bool mutual = false;
            for (int m : other.neighbors) mutual |= (m == static_cast<int>(x));
            if (!mutual)
                throw ConfigError("adjacency not symmetric: " + node.id + " lists " + other.id +
                                  " but not vice versa");
        }
    }
    for (std::size_t s = 0; s < topo.sections.size(); ++s) {
        const RoadSection& sec = topo.sections[s];
        if (!(sec.length_km > 0.0))
            throw ConfigError("section " + sec.id + ": length must be > 0");
        if (!(sec.free_flow_kmh > 0.0))
            throw ConfigError("section " + sec.id + ": free-flow speed must be > 0");
        if (sec.boundary && sec.arrival.enabled) {
            if (!(sec.arrival.shape > 0.0) || !(sec.arrival.scale > 0.0))
                throw ConfigError("section " + sec.id + ": arrival parameters must be > 0");
        }
    }
}

} // namespace atsc
