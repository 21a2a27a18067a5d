#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "atsc/errors.hpp"
#include "atsc/sim/network.hpp"

namespace atsc {

struct SimConfig {
    double timestep = 1.0;          // seconds
    double saturation_flow = 0.5;   // vehicles per second of green per approach
    double intergreen = 0.0;        // all-red between phases, seconds
    double episode_duration = 3600; // seconds
    std::uint64_t rng_seed = 1;
    double jam_density = 0.0;       // veh/km storage cap at network entry; 0 = unbounded

    void validate() const {
        if (!(timestep > 0.0)) throw ConfigError("sim: timestep must be > 0");
        if (!(saturation_flow > 0.0)) throw ConfigError("sim: saturation_flow must be > 0");
        if (intergreen < 0.0) throw ConfigError("sim: intergreen must be >= 0");
        const double steps = episode_duration / timestep;
        if (!(episode_duration > 0.0) || std::abs(steps - std::round(steps)) > 1e-9)
            throw ConfigError("sim: episode_duration must be a positive multiple of timestep");
        if (jam_density < 0.0) throw ConfigError("sim: jam_density must be >= 0");
    }
};

struct ApproachSpec {
    double length_km = 0.5;
    double free_flow_kmh = 50.0;
    ArrivalSpec arrival;      // used when the slot ends up as a boundary section
    bool arrival_enabled = true;
};

struct IntersectionSpec {
    std::string id;
    std::vector<std::string> neighbors; // declaration order fixes observation row order
    std::array<ApproachSpec, 4> approaches;
    std::array<std::array<double, 4>, 4> turn = default_turn();

    // 1/3 to each non-origin direction; no U-turns.
    static std::array<std::array<double, 4>, 4> default_turn() {
        std::array<std::array<double, 4>, 4> t{};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) t[r][c] = (r == c) ? 0.0 : 1.0 / 3.0;
        return t;
    }
};

// A two-way road pair between port a_slot of intersection a and port b_slot
// of intersection b.
struct LinkSpec {
    std::string a;
    int a_slot = 0;
    std::string b;
    int b_slot = 0;
};

struct ScenarioConfig {
    std::string name = "custom";
    SimConfig sim;
    std::vector<IntersectionSpec> intersections;
    std::vector<LinkSpec> links;

    static ScenarioConfig builtin(const std::string& name);
    static bool is_builtin(const std::string& name);
    // Accepts a built-in name or a YAML file path.
    static ScenarioConfig load(const std::string& path_or_name);
    static ScenarioConfig from_yaml(const YAML::Node& root);
    YAML::Node to_yaml() const;

    const IntersectionSpec* find(const std::string& id) const {
        for (const auto& ix : intersections)
            if (ix.id == id) return &ix;
        return nullptr;
    }
};

// ---------------------------------------------------------------------------
// Topology construction

inline NetworkTopology build_network(const ScenarioConfig& cfg) {
    cfg.sim.validate();
    if (cfg.intersections.empty())
        throw ConfigError("scenario: needs at least one intersection");

    NetworkTopology topo;
    topo.intersections.resize(cfg.intersections.size());

    for (std::size_t x = 0; x < cfg.intersections.size(); ++x) {
        const IntersectionSpec& spec = cfg.intersections[x];
        if (topo.intersection_index(spec.id) != -1 &&
            topo.intersection_index(spec.id) != static_cast<int>(x))
            throw ConfigError("scenario: duplicate intersection id " + spec.id);
        IntersectionNode& node = topo.intersections[x];
        node.id = spec.id;
        node.turn = spec.turn;
        for (int s = 0; s < 4; ++s) {
            RoadSection sec;
            sec.id = spec.id + "." + slot_name(s);
            sec.length_km = spec.approaches[s].length_km;
            sec.free_flow_kmh = spec.approaches[s].free_flow_kmh;
            sec.arrival = spec.approaches[s].arrival;
            sec.boundary = true; // demoted when a link claims the port
            sec.feeds_intersection = static_cast<int>(x);
            sec.feeds_slot = s;
            if (!spec.approaches[s].arrival_enabled) sec.arrival.enabled = false;
            node.approaches[s] = static_cast<int>(topo.sections.size());
            topo.sections.push_back(std::move(sec));
        }
    }

    // Wire links: the inbound section at a port carries traffic from the peer.
    std::vector<std::array<bool, 4>> port_used(cfg.intersections.size(), {false, false, false, false});
    for (const LinkSpec& link : cfg.links) {
        const int ia = topo.intersection_index(link.a);
        const int ib = topo.intersection_index(link.b);
        if (ia < 0) throw ConfigError("link references unknown intersection " + link.a);
        if (ib < 0) throw ConfigError("link references unknown intersection " + link.b);
        if (ia == ib) throw ConfigError("link connects " + link.a + " to itself");
        if (link.a_slot < 0 || link.a_slot > 3 || link.b_slot < 0 || link.b_slot > 3)
            throw ConfigError("link " + link.a + "-" + link.b + ": slot out of range");
        if (port_used[ia][link.a_slot])
            throw ConfigError("intersection " + link.a + ": port " + slot_name(link.a_slot) +
                              " used by more than one link");
        if (port_used[ib][link.b_slot])
            throw ConfigError("intersection " + link.b + ": port " + slot_name(link.b_slot) +
                              " used by more than one link");
        port_used[ia][link.a_slot] = true;
        port_used[ib][link.b_slot] = true;

        IntersectionNode& na = topo.intersections[ia];
        IntersectionNode& nb = topo.intersections[ib];
        topo.sections[na.approaches[link.a_slot]].boundary = false;
        topo.sections[nb.approaches[link.b_slot]].boundary = false;
        na.downstream[link.a_slot] = nb.approaches[link.b_slot];
        nb.downstream[link.b_slot] = na.approaches[link.a_slot];
    }

    // Neighbor lists in declaration order; must agree with the link set.
    for (std::size_t x = 0; x < cfg.intersections.size(); ++x) {
        const IntersectionSpec& spec = cfg.intersections[x];
        std::vector<int> linked;
        for (const LinkSpec& link : cfg.links) {
            if (link.a == spec.id) linked.push_back(topo.intersection_index(link.b));
            if (link.b == spec.id) linked.push_back(topo.intersection_index(link.a));
        }
        for (const std::string& nid : spec.neighbors) {
            const int ni = topo.intersection_index(nid);
            if (ni < 0)
                throw ConfigError("intersection " + spec.id + ": unknown neighbor " + nid);
            bool has_link = false;
            for (int l : linked) has_link |= (l == ni);
            if (!has_link)
                throw ConfigError("intersection " + spec.id + ": neighbor " + nid +
                                  " has no link to it");
            topo.intersections[x].neighbors.push_back(ni);
        }
        if (topo.intersections[x].neighbors.size() != linked.size())
            throw ConfigError("intersection " + spec.id +
                              ": neighbor list does not cover its links");
    }

    for (int s = 0; s < static_cast<int>(topo.sections.size()); ++s)
        if (topo.sections[s].boundary) topo.boundary_sections.push_back(s);

    validate_topology(topo);
    return topo;
}

// ---------------------------------------------------------------------------
// Built-in scenarios

namespace detail {

inline IntersectionSpec make_intersection(const std::string& id, double length_km,
                                          double arrival_shape, double arrival_scale) {
    IntersectionSpec spec;
    spec.id = id;
    for (int s = 0; s < 4; ++s) {
        spec.approaches[s].length_km = length_km;
        spec.approaches[s].arrival.shape = arrival_shape;
        spec.approaches[s].arrival.scale = arrival_scale;
    }
    return spec;
}

} // namespace detail

inline bool ScenarioConfig::is_builtin(const std::string& name) {
    return name == "single" || name == "single_asym" || name == "single_det" ||
           name == "bengaluru6" || name == "corridor4";
}

inline ScenarioConfig ScenarioConfig::builtin(const std::string& name) {
    ScenarioConfig cfg;
    cfg.name = name;
    if (name == "single" || name == "single_asym" || name == "single_det") {
        IntersectionSpec a = detail::make_intersection("A", 0.5, 2.0, 14.1);
        if (name == "single_asym") {
            // One approach carries 3x the arrival rate of the others.
            a.approaches[kUpper].arrival.scale = 6.27;
            for (int s = 1; s < 4; ++s) a.approaches[s].arrival.scale = 18.81;
        } else if (name == "single_det") {
            // Fixed interarrival gaps; same 3:1 demand asymmetry.
            for (int s = 0; s < 4; ++s) {
                a.approaches[s].arrival.deterministic = true;
                a.approaches[s].arrival.scale = (s == kUpper) ? 5.5 : 16.5;
            }
        }
        cfg.intersections.push_back(a);
        return cfg;
    }
    if (name == "bengaluru6") {
        // Six-intersection urban patch. C meets B, D and E; D also meets A
        // and E; F hangs off E. Uniform 0.5 km sections.
        for (const char* id : {"A", "B", "C", "D", "E", "F"})
            cfg.intersections.push_back(detail::make_intersection(id, 0.5, 2.0, 15.0));
        auto set_neighbors = [&](const std::string& id, std::vector<std::string> ns) {
            for (auto& ix : cfg.intersections)
                if (ix.id == id) ix.neighbors = std::move(ns);
        };
        set_neighbors("A", {"D"});
        set_neighbors("B", {"C"});
        set_neighbors("C", {"D", "B", "E"});
        set_neighbors("D", {"A", "E", "C"});
        set_neighbors("E", {"C", "D", "F"});
        set_neighbors("F", {"E"});
        cfg.links = {
            {"C", kUpper, "B", kLower}, {"C", kLeft, "D", kRight}, {"C", kLower, "E", kUpper},
            {"D", kUpper, "A", kLower}, {"D", kLower, "E", kLeft}, {"E", kRight, "F", kLeft},
        };
        return cfg;
    }
    if (name == "corridor4") {
        // Four-intersection west-to-east arterial with through-traffic bias.
        const std::array<std::array<double, 4>, 4> arterial_turn = {{
            {0.0, 0.2, 0.6, 0.2},  // from north: mostly continue south
            {0.1, 0.0, 0.1, 0.8},  // from east: mostly continue west
            {0.6, 0.2, 0.0, 0.2},  // from south: mostly continue north
            {0.1, 0.8, 0.1, 0.0},  // from west: mostly continue east
        }};
        for (const char* id : {"I1", "I2", "I3", "I4"}) {
            IntersectionSpec ix = detail::make_intersection(id, 0.5, 2.0, 22.57);
            ix.turn = arterial_turn;
            cfg.intersections.push_back(ix);
        }
        cfg.intersections[0].approaches[kLeft].arrival.scale = 8.06;   // heavy eastbound feed
        cfg.intersections[3].approaches[kRight].arrival.scale = 11.28; // westbound feed
        cfg.intersections[0].neighbors = {"I2"};
        cfg.intersections[1].neighbors = {"I1", "I3"};
        cfg.intersections[2].neighbors = {"I2", "I4"};
        cfg.intersections[3].neighbors = {"I3"};
        cfg.links = {
            {"I1", kRight, "I2", kLeft},
            {"I2", kRight, "I3", kLeft},
            {"I3", kRight, "I4", kLeft},
        };
        return cfg;
    }
    throw ConfigError("unknown built-in scenario '" + name + "'");
}

// ---------------------------------------------------------------------------
// YAML round trip

namespace detail {

inline ArrivalSpec arrival_from_yaml(const YAML::Node& n, const ArrivalSpec& base) {
    ArrivalSpec a = base;
    if (!n) return a;
    if (n.IsScalar() && n.as<std::string>() == "none") {
        a.enabled = false;
        return a;
    }
    if (n["shape"]) a.shape = n["shape"].as<double>();
    if (n["scale"]) a.scale = n["scale"].as<double>();
    if (n["deterministic"]) a.deterministic = n["deterministic"].as<bool>();
    if (n["enabled"]) a.enabled = n["enabled"].as<bool>();
    return a;
}

inline YAML::Node arrival_to_yaml(const ArrivalSpec& a) {
    YAML::Node n;
    n["shape"] = a.shape;
    n["scale"] = a.scale;
    if (a.deterministic) n["deterministic"] = true;
    if (!a.enabled) n["enabled"] = false;
    return n;
}

} // namespace detail

inline ScenarioConfig ScenarioConfig::from_yaml(const YAML::Node& root) {
    ScenarioConfig cfg;
    if (root["name"]) cfg.name = root["name"].as<std::string>();
    if (const YAML::Node sim = root["sim"]) {
        if (sim["timestep"]) cfg.sim.timestep = sim["timestep"].as<double>();
        if (sim["saturation_flow"]) cfg.sim.saturation_flow = sim["saturation_flow"].as<double>();
        if (sim["intergreen"]) cfg.sim.intergreen = sim["intergreen"].as<double>();
        if (sim["episode_duration"]) cfg.sim.episode_duration = sim["episode_duration"].as<double>();
        if (sim["rng_seed"]) cfg.sim.rng_seed = sim["rng_seed"].as<std::uint64_t>();
        if (sim["jam_density"]) cfg.sim.jam_density = sim["jam_density"].as<double>();
    }

    ApproachSpec defaults;
    if (const YAML::Node d = root["defaults"]) {
        if (d["length_km"]) defaults.length_km = d["length_km"].as<double>();
        if (d["free_flow_kmh"]) defaults.free_flow_kmh = d["free_flow_kmh"].as<double>();
        defaults.arrival = detail::arrival_from_yaml(d["arrival"], defaults.arrival);
    }

    const YAML::Node ixs = root["intersections"];
    if (!ixs || !ixs.IsSequence())
        throw ConfigError("scenario: 'intersections' sequence is required");
    for (const YAML::Node& n : ixs) {
        IntersectionSpec spec;
        if (!n["id"]) throw ConfigError("scenario: intersection without id");
        spec.id = n["id"].as<std::string>();
        if (n["neighbors"])
            for (const YAML::Node& nb : n["neighbors"]) spec.neighbors.push_back(nb.as<std::string>());
        for (int s = 0; s < 4; ++s) spec.approaches[s] = defaults;
        if (const YAML::Node ap = n["approaches"]) {
            for (auto it = ap.begin(); it != ap.end(); ++it) {
                const int s = slot_from_name(it->first.as<std::string>());
                const YAML::Node& a = it->second;
                if (a["length_km"]) spec.approaches[s].length_km = a["length_km"].as<double>();
                if (a["free_flow_kmh"])
                    spec.approaches[s].free_flow_kmh = a["free_flow_kmh"].as<double>();
                spec.approaches[s].arrival =
                    detail::arrival_from_yaml(a["arrival"], spec.approaches[s].arrival);
                spec.approaches[s].arrival_enabled = spec.approaches[s].arrival.enabled;
            }
        }
        if (const YAML::Node t = n["turn"]) {
            if (!t.IsSequence() || t.size() != 4)
                throw ConfigError("intersection " + spec.id + ": turn must be 4 rows");
            for (int r = 0; r < 4; ++r) {
                if (!t[r].IsSequence() || t[r].size() != 4)
                    throw ConfigError("intersection " + spec.id + ": turn row " +
                                      std::to_string(r) + " must have 4 entries");
                for (int c = 0; c < 4; ++c) spec.turn[r][c] = t[r][c].as<double>();
            }
        }
        cfg.intersections.push_back(std::move(spec));
    }

    if (const YAML::Node links = root["links"]) {
        for (const YAML::Node& l : links) {
            if (!l.IsSequence() || l.size() != 4)
                throw ConfigError("scenario: each link must be [id, slot, id, slot]");
            LinkSpec link;
            link.a = l[0].as<std::string>();
            link.a_slot = slot_from_name(l[1].as<std::string>());
            link.b = l[2].as<std::string>();
            link.b_slot = slot_from_name(l[3].as<std::string>());
            cfg.links.push_back(link);
        }
    }
    return cfg;
}

inline YAML::Node ScenarioConfig::to_yaml() const {
    YAML::Node root;
    root["name"] = name;
    YAML::Node sim;
    sim["timestep"] = this->sim.timestep;
    sim["saturation_flow"] = this->sim.saturation_flow;
    sim["intergreen"] = this->sim.intergreen;
    sim["episode_duration"] = this->sim.episode_duration;
    sim["rng_seed"] = this->sim.rng_seed;
    sim["jam_density"] = this->sim.jam_density;
    root["sim"] = sim;
    for (const IntersectionSpec& spec : intersections) {
        YAML::Node n;
        n["id"] = spec.id;
        for (const std::string& nb : spec.neighbors) n["neighbors"].push_back(nb);
        YAML::Node ap;
        for (int s = 0; s < 4; ++s) {
            YAML::Node a;
            a["length_km"] = spec.approaches[s].length_km;
            a["free_flow_kmh"] = spec.approaches[s].free_flow_kmh;
            ArrivalSpec arr = spec.approaches[s].arrival;
            arr.enabled = spec.approaches[s].arrival_enabled;
            a["arrival"] = detail::arrival_to_yaml(arr);
            ap[slot_name(s)] = a;
        }
        n["approaches"] = ap;
        YAML::Node turn;
        for (int r = 0; r < 4; ++r) {
            YAML::Node row;
            for (int c = 0; c < 4; ++c) row.push_back(spec.turn[r][c]);
            turn.push_back(row);
        }
        n["turn"] = turn;
        root["intersections"].push_back(n);
    }
    for (const LinkSpec& link : links) {
        YAML::Node l;
        l.push_back(link.a);
        l.push_back(std::string(slot_name(link.a_slot)));
        l.push_back(link.b);
        l.push_back(std::string(slot_name(link.b_slot)));
        root["links"].push_back(l);
    }
    return root;
}

inline ScenarioConfig ScenarioConfig::load(const std::string& path_or_name) {
    if (is_builtin(path_or_name)) return builtin(path_or_name);
    if (!std::filesystem::exists(path_or_name))
        throw ConfigError("scenario '" + path_or_name + "' is neither a built-in name nor a file");
    try {
        return from_yaml(YAML::LoadFile(path_or_name));
    } catch (const YAML::Exception& e) {
        throw ConfigError("scenario " + path_or_name + ": " + e.what());
    }
}

} // namespace atsc
