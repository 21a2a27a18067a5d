#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <functional>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "atsc/rng.hpp"
#include "atsc/sim/network.hpp"
#include "atsc/sim/scenario.hpp"

namespace atsc {

enum class EventType : std::uint8_t { kArrival = 0, kAdmit = 1, kDischarge = 2 };

// Fixed-width record so event logs can be compared byte for byte.
struct Event {
    EventType type;
    double time;
    std::int32_t section;
    std::uint64_t vehicle;
    std::int32_t dest; // destination section for discharges; -1 network exit, -2 n/a
};

struct CycleRecord {
    int intersection = -1;
    double start_time = 0.0;
    double end_time = 0.0;
    std::array<double, 4> density_start{};
    std::array<double, 4> density_end{};
    std::array<std::uint64_t, 4> discharged{};
};

struct ExitRecord {
    double exit_time;
    double delay_s_per_km;
};

inline std::uint64_t fnv1a64(const void* data, std::size_t n, std::uint64_t h = 0xcbf29ce484222325ull) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < n; ++i) {
        h ^= p[i];
        h *= 0x100000001b3ull;
    }
    return h;
}

// Discrete-time point-queue traffic simulator. Vehicles travel a section at
// free-flow speed and stack in a vertical queue at the stop line; a green
// approach discharges at the saturation flow in FIFO order. All randomness
// comes from per-section generators derived from the scenario seed, so the
// arrival stream is identical no matter how the signals are controlled.
class Simulator {
public:
    using PlanProvider = std::function<PhasePlan(const Simulator&, int)>;

    explicit Simulator(const ScenarioConfig& scenario)
        : Simulator(build_network(scenario), scenario.sim) {}

    Simulator(NetworkTopology topo, SimConfig cfg) : topo_(std::move(topo)), cfg_(cfg) {
        cfg_.validate();
        signals_.resize(topo_.intersections.size());
        exits_.resize(topo_.intersections.size());
        route_acc_.assign(topo_.intersections.size(), {});
        next_arrival_.assign(topo_.sections.size(), 0.0);
        for (int s : topo_.boundary_sections) {
            const RoadSection& sec = topo_.sections[s];
            if (!sec.arrival.enabled) continue;
            arrival_rng_.emplace(s, Rng(derive_seed(cfg_.rng_seed,
                                                    fnv1a64(sec.id.data(), sec.id.size()))));
            next_arrival_[s] = draw_gap(s);
        }
    }

    const NetworkTopology& topology() const { return topo_; }
    const SimConfig& config() const { return cfg_; }
    double time() const { return clock_; }

    void set_plan_provider(int ix, PlanProvider p) { signals_[ix].provider = std::move(p); }

    // The plan takes effect at that intersection's next cycle start.
    void queue_plan(int ix, const PhasePlan& plan) {
        validate_phase_plan(plan, cfg_.timestep, cfg_.intergreen);
        signals_[ix].queued = plan;
    }

    // Advances by one timestep: arrivals, admissions, green discharges,
    // signal schedule bookkeeping.
    void step() {
        last_step_cycles_.clear();
        const double t0 = clock_;
        const double t1 = t0 + cfg_.timestep;

        for (std::size_t ix = 0; ix < signals_.size(); ++ix)
            if (!signals_[ix].in_cycle) start_cycle(static_cast<int>(ix), t0);

        for (int sidx : topo_.boundary_sections) process_boundary(sidx, t0, t1);

        for (std::size_t ix = 0; ix < signals_.size(); ++ix)
            if (signals_[ix].green) discharge(static_cast<int>(ix), t1);

        for (std::size_t ix = 0; ix < signals_.size(); ++ix)
            advance_signal(static_cast<int>(ix), t1);

        clock_ = t1;
    }

    // Cycles that completed during the most recent step().
    const std::vector<CycleRecord>& last_step_cycles() const { return last_step_cycles_; }

    // Runs intersection `ix` through one complete cycle under `plan`,
    // stepping the whole network each timestep. Any in-progress cycle at
    // `ix` is finished first under its existing plan.
    CycleRecord run_cycle(int ix, const PhasePlan& plan) {
        if (signals_[ix].in_cycle)
            while (!step_completed(ix)) {
            }
        queue_plan(ix, plan);
        std::optional<CycleRecord> record;
        while (!record) {
            step();
            for (const CycleRecord& r : last_step_cycles_)
                if (r.intersection == ix) record = r;
        }
        return *record;
    }

    // --- Metrics ------------------------------------------------------------

    // Instantaneous per-approach densities, vehicles per kilometer.
    std::array<double, 4> measure_density(int ix) const {
        std::array<double, 4> d{};
        const IntersectionNode& node = topo_.intersections[ix];
        for (int s = 0; s < 4; ++s) {
            const RoadSection& sec = topo_.sections[node.approaches[s]];
            d[s] = static_cast<double>(sec.queue.size()) / sec.length_km;
        }
        return d;
    }

    double mean_density(int ix) const {
        const auto d = measure_density(ix);
        return (d[0] + d[1] + d[2] + d[3]) / 4.0;
    }

    struct DelaySample {
        double value = 0.0;
        bool has_sample = false;
    };

    // Mean delay (s/km) over vehicles that left any approach of `ix` within
    // the trailing window. Vehicles still in the boundary virtual queue have
    // not entered a section and contribute nothing.
    DelaySample measure_delay(int ix, double window) const {
        if (!(window > 0.0)) throw ArgumentError("measure_delay: window must be > 0");
        const double cutoff = clock_ - window;
        double sum = 0.0;
        std::uint64_t n = 0;
        const auto& recs = exits_[ix];
        for (auto it = recs.rbegin(); it != recs.rend() && it->exit_time > cutoff; ++it) {
            sum += it->delay_s_per_km;
            ++n;
        }
        return n ? DelaySample{sum / static_cast<double>(n), true} : DelaySample{};
    }

    DelaySample network_delay(double window) const {
        if (!(window > 0.0)) throw ArgumentError("network_delay: window must be > 0");
        const double cutoff = clock_ - window;
        double sum = 0.0;
        std::uint64_t n = 0;
        for (const auto& recs : exits_)
            for (auto it = recs.rbegin(); it != recs.rend() && it->exit_time > cutoff; ++it) {
                sum += it->delay_s_per_km;
                ++n;
            }
        return n ? DelaySample{sum / static_cast<double>(n), true} : DelaySample{};
    }

    int current_phase(int ix) const { return topo_.intersections[ix].current_phase; }

    // --- Conservation counters ----------------------------------------------

    std::uint64_t generated() const { return generated_; }
    std::uint64_t admitted() const { return admitted_; }
    std::uint64_t exited_network() const { return exited_network_; }
    std::uint64_t in_system() const {
        std::uint64_t n = 0;
        for (const RoadSection& sec : topo_.sections) n += sec.queue.size();
        return n;
    }
    std::uint64_t in_virtual_queue() const {
        std::uint64_t n = 0;
        for (const RoadSection& sec : topo_.sections) n += sec.virtual_queue.size();
        return n;
    }

    // --- Event log -----------------------------------------------------------

    void set_record_events(bool on) { record_events_ = on; }
    const std::vector<Event>& events() const { return events_; }

    std::string events_bytes() const {
        std::string out;
        out.reserve(events_.size() * 25);
        for (const Event& e : events_) {
            append_raw(out, static_cast<std::uint8_t>(e.type));
            append_raw(out, e.time);
            append_raw(out, e.section);
            append_raw(out, e.vehicle);
            append_raw(out, e.dest);
        }
        return out;
    }

    // Hash over the arrival stream only; controllers must not affect it.
    std::uint64_t arrival_hash() const { return arrival_hash_; }

private:
    struct SignalState {
        bool in_cycle = false;
        int phase = 0;
        bool green = true;
        double remaining = 0.0;
        double cycle_start = 0.0;
        std::array<double, 4> density_start{};
        std::array<std::uint64_t, 4> discharged{};
        std::optional<PhasePlan> queued;
        PlanProvider provider;
    };

    template <typename T>
    static void append_raw(std::string& out, const T& v) {
        char buf[sizeof(T)];
        std::memcpy(buf, &v, sizeof(T));
        out.append(buf, sizeof(T));
    }

    void log_event(EventType type, double t, int section, std::uint64_t vehicle, int dest) {
        if (record_events_) events_.push_back({type, t, section, vehicle, dest});
    }

    double draw_gap(int sidx) {
        const ArrivalSpec& a = topo_.sections[sidx].arrival;
        if (a.deterministic) return a.scale;
        return sample_interarrival(arrival_rng_.at(sidx), a.shape, a.scale);
    }

    std::size_t entry_capacity(const RoadSection& sec) const {
        if (cfg_.jam_density <= 0.0) return static_cast<std::size_t>(-1);
        return static_cast<std::size_t>(cfg_.jam_density * sec.length_km);
    }

    void process_boundary(int sidx, double t0, double t1) {
        RoadSection& sec = topo_.sections[sidx];
        if (sec.arrival.enabled) {
            while (next_arrival_[sidx] <= t1 + 1e-12) {
                const std::uint64_t vid = next_vehicle_id_++;
                const double at = next_arrival_[sidx];
                sec.virtual_queue.push_back({vid, at});
                ++generated_;
                log_event(EventType::kArrival, at, sidx, vid, -2);
                arrival_hash_ = fnv1a64(&sidx, sizeof(sidx), arrival_hash_);
                arrival_hash_ = fnv1a64(&at, sizeof(at), arrival_hash_);
                arrival_hash_ = fnv1a64(&vid, sizeof(vid), arrival_hash_);
                next_arrival_[sidx] += draw_gap(sidx);
            }
        }
        const std::size_t cap = entry_capacity(sec);
        while (!sec.virtual_queue.empty() && sec.queue.size() < cap) {
            const PendingVehicle pv = sec.virtual_queue.front();
            sec.virtual_queue.pop_front();
            const double entry = std::max(pv.arrival_time, t0);
            sec.queue.push_back({pv.id, entry, sec.ideal_travel_s()});
            ++sec.cumulative_entered;
            ++admitted_;
            log_event(EventType::kAdmit, entry, sidx, pv.id, -2);
        }
    }

    void discharge(int ix, double t1) {
        SignalState& sig = signals_[ix];
        IntersectionNode& node = topo_.intersections[ix];
        const int slot = sig.phase;
        RoadSection& sec = topo_.sections[node.approaches[slot]];

        sec.discharge_carry += cfg_.saturation_flow * cfg_.timestep;
        const int allowed = static_cast<int>(std::floor(sec.discharge_carry + 1e-9));
        int served = 0;
        while (served < allowed && !sec.queue.empty()) {
            const VehicleRecord vr = sec.queue.front();
            if (vr.entry_time + vr.ideal_travel_time > t1 + 1e-9) break; // not yet at the line
            sec.queue.pop_front();
            ++served;
            ++sec.cumulative_exited;
            ++sig.discharged[slot];
            const double traversal = t1 - vr.entry_time;
            exits_[ix].push_back({t1, (traversal - vr.ideal_travel_time) / sec.length_km});

            const int out_slot = pick_turn(ix, slot);
            const int dest = node.downstream[out_slot];
            if (dest >= 0) {
                RoadSection& d = topo_.sections[dest];
                d.queue.push_back({vr.id, t1, d.ideal_travel_s()});
                ++d.cumulative_entered;
            } else {
                ++exited_network_;
            }
            log_event(EventType::kDischarge, t1, node.approaches[slot], vr.id, dest);
        }
        if (served == allowed)
            sec.discharge_carry -= served;
        else
            sec.discharge_carry = 0.0; // queue starved; surplus green is not banked
    }

    // Deterministic largest-remainder split across the turn row.
    int pick_turn(int ix, int slot) {
        auto& acc = route_acc_[ix][slot];
        const auto& row = topo_.intersections[ix].turn[slot];
        for (int c = 0; c < 4; ++c) acc[c] += row[c];
        int best = 0;
        for (int c = 1; c < 4; ++c)
            if (acc[c] > acc[best] + 1e-12) best = c;
        acc[best] -= 1.0;
        return best;
    }

    void start_cycle(int ix, double t) {
        SignalState& sig = signals_[ix];
        IntersectionNode& node = topo_.intersections[ix];
        PhasePlan plan = node.active_plan;
        if (sig.queued) {
            plan = *sig.queued;
            sig.queued.reset();
        } else if (sig.provider) {
            plan = sig.provider(*this, ix);
        }
        validate_phase_plan(plan, cfg_.timestep, cfg_.intergreen);
        node.active_plan = plan;
        sig.in_cycle = true;
        sig.cycle_start = t;
        sig.density_start = measure_density(ix);
        sig.discharged = {0, 0, 0, 0};
        sig.phase = 0;
        sig.green = true;
        sig.remaining = plan.greens[0];
        node.current_phase = 0;
        topo_.sections[node.approaches[0]].discharge_carry = 0.0;
        skip_empty_segments(ix, t);
    }

    // Moves past zero-length segments so the active segment always has
    // remaining > 0. May finalize the cycle only via advance_signal.
    void skip_empty_segments(int ix, double t) {
        SignalState& sig = signals_[ix];
        IntersectionNode& node = topo_.intersections[ix];
        while (sig.in_cycle && sig.remaining <= 1e-9) {
            if (sig.green) {
                if (cfg_.intergreen > 0.0) {
                    sig.green = false;
                    sig.remaining += cfg_.intergreen;
                    continue;
                }
            }
            if (sig.phase < 3) {
                ++sig.phase;
                sig.green = true;
                sig.remaining += node.active_plan.greens[sig.phase];
                node.current_phase = sig.phase;
                topo_.sections[node.approaches[sig.phase]].discharge_carry = 0.0;
            } else {
                finalize_cycle(ix, t);
                return;
            }
        }
    }

    void advance_signal(int ix, double t1) {
        SignalState& sig = signals_[ix];
        if (!sig.in_cycle) return;
        sig.remaining -= cfg_.timestep;
        skip_empty_segments(ix, t1);
    }

    void finalize_cycle(int ix, double end_time) {
        SignalState& sig = signals_[ix];
        CycleRecord rec;
        rec.intersection = ix;
        rec.start_time = sig.cycle_start;
        rec.end_time = end_time;
        rec.density_start = sig.density_start;
        rec.density_end = measure_density(ix);
        rec.discharged = sig.discharged;
        sig.in_cycle = false;
        last_step_cycles_.push_back(rec);
    }

    // One step; true if `ix` completed a cycle during it.
    bool step_completed(int ix) {
        step();
        for (const CycleRecord& r : last_step_cycles_)
            if (r.intersection == ix) return true;
        return false;
    }

    NetworkTopology topo_;
    SimConfig cfg_;
    double clock_ = 0.0;
    std::uint64_t next_vehicle_id_ = 1;
    std::uint64_t generated_ = 0;
    std::uint64_t admitted_ = 0;
    std::uint64_t exited_network_ = 0;
    std::uint64_t arrival_hash_ = 0xcbf29ce484222325ull;
    bool record_events_ = true;

    std::vector<SignalState> signals_;
    std::vector<std::vector<ExitRecord>> exits_;
    std::vector<std::array<std::array<double, 4>, 4>> route_acc_;
    std::vector<double> next_arrival_;
    std::unordered_map<int, Rng> arrival_rng_;
    std::vector<Event> events_;
    std::vector<CycleRecord> last_step_cycles_;
};

} // namespace atsc
