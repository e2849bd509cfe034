#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <vector>

#include "tsc/errors.hpp"
#include "tsc/signal.hpp"

namespace tsc {

inline constexpr int64_t kSecondsPerDay = 86400;

struct SimClock {
    int64_t t = 0;  // seconds since experiment start

    int64_t second_of_day() const { return t % kSecondsPerDay; }
    int64_t day_index() const { return t / kSecondsPerDay; }
    int day_of_week() const { return static_cast<int>(day_index() % 7); }
};

struct VolumeSegment {
    int64_t start_s = 0;
    int64_t end_s = 0;  // exclusive
    double vph = 0.0;
};

// Per-approach piecewise-constant daily demand.
struct VolumeProfile {
    std::vector<std::vector<VolumeSegment>> approaches;

    int n_approaches() const { return static_cast<int>(approaches.size()); }
    double volume_at(int approach, int64_t second_of_day) const;
    // Contiguous coverage of [0, 86400), segments >= 3600 s, vph >= 0.
    void validate() const;
    // Same but without the minimum-span rule (scenario overrides may split
    // segments into shorter pieces).
    void validate_coverage() const;
};

struct Vehicle {
    int64_t id = 0;
    int approach = 0;
    int64_t arrival_s = 0;      // entry to the link
    int64_t at_stopline_s = 0;  // arrival_s + free-flow travel time
    int64_t depart_s = -1;      // stop-line crossing; -1 until departed

    int64_t delay() const { return depart_s - at_stopline_s; }
};

struct SimParams {
    int free_flow_travel_s = 20;
    int startup_lost_s = 2;
    int saturation_headway_s = 2;
    bool deterministic_arrivals = false;  // fixed-headway mode for oracle tests

    void validate() const;
};

// Arrival randomness is a pure function of (day_seed, second_of_day,
// approach): identical seeds give identical streams for every controller.
struct ArrivalProcess {
    uint64_t day_seed = 0;
    bool deterministic = false;
};

// Per-approach Poisson draws with mean vph/3600 (or the evenly spaced
// deterministic pattern). Zero volume always yields zero arrivals.
std::vector<int> sample_arrivals(const VolumeProfile& profile, const SimClock& clock,
                                 const ArrivalProcess& rng);

struct TickOutcome {
    struct ApproachTick {
        int arrivals = 0;
        int discharged = 0;
        int queue_after = 0;
        Display shown = Display::Red;
    };
    int64_t t = 0;
    std::vector<ApproachTick> approaches;
    // (approach, residual queue) for greens that ended this tick nonempty
    std::vector<std::pair<int, int>> green_terminated;
    std::vector<Vehicle> departed;

    int total_discharged() const;
};

// Discrete-time (1 s tick) vertical-queue model of one intersection.
// Vehicles traverse the link in fixed time, stack at the stop line, and
// discharge on green after startup lost time at the saturation headway.
class Intersection {
public:
    Intersection(SimParams params, const VolumeProfile& profile,
                 std::vector<std::pair<int, int>> conflicting_approaches);

    void set_arrival_process(const ArrivalProcess& p) { arrivals_ = p; }

    // Advances one second under the given displays. Throws SafetyViolation
    // on conflicting greens.
    TickOutcome tick(const std::vector<Display>& shown, const SimClock& clock);

    int queue_length(int approach) const;
    // Presence detector: queued vehicle, or one within `horizon_s` of the
    // stop line.
    bool detector_presence(int approach, int64_t now, int horizon_s) const;

    int n_approaches() const { return static_cast<int>(lanes_.size()); }
    int64_t vehicles_in_system() const;
    // Everything still on the link or in a queue, in no particular order.
    std::vector<Vehicle> vehicles_in_flight() const;
    int64_t total_arrived() const { return total_arrived_; }
    int64_t total_departed() const { return total_departed_; }

private:
    struct Lane {
        std::deque<Vehicle> in_transit;  // ordered by at_stopline_s
        std::deque<Vehicle> queue;       // FIFO, arrival order
        int64_t server_free_s = 0;       // earliest second the next discharge may occur
        Display prev_shown = Display::Red;
    };

    SimParams params_;
    const VolumeProfile* profile_;
    ArrivalProcess arrivals_;
    std::vector<Lane> lanes_;
    std::vector<std::vector<bool>> conflict_;
    int64_t next_vehicle_id_ = 0;
    int64_t total_arrived_ = 0;
    int64_t total_departed_ = 0;
};

}  // namespace tsc
