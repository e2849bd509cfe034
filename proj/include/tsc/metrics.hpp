#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "tsc/signal.hpp"
#include "tsc/sim.hpp"

namespace tsc {

inline constexpr int kDelayBinSeconds = 900;  // 15-minute bins
inline constexpr int kDelayBins = kSecondsPerDay / kDelayBinSeconds;

struct VehicleRecord {
    int64_t id = 0;
    int approach = 0;
    int64_t arrival_s = 0;
    int64_t at_stopline_s = 0;
    int64_t depart_s = -1;  // -1: still in system when the run ended
};

struct TickRecord {
    int64_t t = 0;
    std::vector<int> queues;
    double reward = 0.0;
    int ring0_phase = 0;
    Interval ring0_interval = Interval::Green;
};

// Everything a run produces: per-vehicle times, optional per-tick traces,
// and the per-day totals behind the travel-time and delay figures.
struct MetricsLog {
    std::vector<VehicleRecord> vehicles;  // departed, plus end-of-run stragglers
    std::vector<TickRecord> ticks;        // populated only when keep_ticks
    std::vector<double> daily_ttt_s;      // vehicle-seconds in system per day
    int64_t total_arrived = 0;
    int64_t total_departed = 0;
    int64_t end_s = 0;  // run length in seconds

    // Delay of a vehicle; undeparted vehicles are censored at run end.
    int64_t vehicle_delay(const VehicleRecord& v) const {
        return (v.depart_s >= 0 ? v.depart_s : end_s) - v.at_stopline_s;
    }

    double total_travel_time_s() const;
    double mean_delay_s() const;

    struct BinnedDelay {
        std::array<double, kDelayBins> mean_delay_s{};
        std::array<int64_t, kDelayBins> vehicles{};
    };
    // Keyed by the second-of-day each vehicle would have crossed unimpeded.
    BinnedDelay binned_delay() const;

    // Mean delay over vehicles whose stop-line time falls in [start_s, end_s)
    // of the day.
    double window_mean_delay_s(int64_t start_sod, int64_t end_sod) const;
};

}  // namespace tsc
