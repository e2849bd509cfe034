#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "tsc/checkpoint.hpp"
#include "tsc/config.hpp"
#include "tsc/controllers.hpp"
#include "tsc/dqn.hpp"
#include "tsc/metrics.hpp"

namespace tsc {

// Sub-seed tags so training days and held-out evaluation days never share
// arrival streams.
inline constexpr uint64_t kEvalStreamTag = 0xE7A1;

// One run's worth of assembled pieces.
struct RunSetup {
    RingBarrierPlan plan;
    SimParams sim;
    VolumeProfile profile;
    RewardConfig reward;
    int detector_horizon_s = 2;
    bool keep_ticks = false;

    RunSetup(const ExperimentConfig& cfg, const std::string& scenario = "");
};

// Simulates consecutive full days under one controller, one arrival seed
// per day. Vehicle conservation is checked every tick. State (queues,
// signal, controller memory) carries across midnight.
MetricsLog run_days(Controller& controller, const RunSetup& setup,
                    const std::vector<uint64_t>& day_seeds);

inline MetricsLog run_day(Controller& controller, const RunSetup& setup, uint64_t day_seed) {
    return run_days(controller, setup, {day_seed});
}

// Held-out evaluation seeds shared by every controller in a comparison.
std::vector<uint64_t> evaluation_seeds(uint64_t master_seed, int n_days);

struct TrainArtifacts {
    Checkpoint checkpoint;
    std::vector<DayStats> days;
};

// Full training run with CSV logging; writes checkpoint<suffix>.json,
// train_log<suffix>.csv and daily_ttt<suffix>.csv under out_dir.
// override_size picks the network/encoder size (0 = config value).
TrainArtifacts train_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int override_size = 0, const std::string& suffix = "");

struct CompareEntry {
    std::string name;
    double mean_delay_s = 0.0;
    int64_t vehicles = 0;
    double ttt_s = 0.0;
    MetricsLog::BinnedDelay bins;
    double window_mean_delay_s = 0.0;  // inside the scenario window, if any
};

struct CompareResult {
    std::vector<CompareEntry> entries;
    int64_t window_start_s = -1;  // scenario (surge) window, -1 when none
    int64_t window_end_s = -1;

    const CompareEntry& by_name(const std::string& name) const;
    // percentage by which `name` improves on `baseline` (positive = lower delay)
    double reduction_pct(const std::string& name, const std::string& baseline) const;
};

// Runs the trained policy and both baselines over the same held-out days
// and bins average delay per 15 minutes.
CompareResult compare_controllers(const ExperimentConfig& cfg, const Checkpoint& ck,
                                  const std::string& scenario = "");

// --- output writers (deterministic byte-for-byte for identical inputs) ---

std::string format_fixed(double v);  // %.6f, locale-free

void write_vehicles_csv(const MetricsLog& log, const std::string& path);
void write_ticks_csv(const MetricsLog& log, const std::string& path);
void write_daily_ttt_csv(const std::vector<DayStats>& days, const std::string& path);
void write_compare_bins_csv(const CompareResult& r, const std::string& path);
void write_compare_summary_csv(const CompareResult& r, const std::string& path);

struct PlotSeries {
    std::string label;
    std::vector<double> x, y;
    std::string color = "#1f77b4";
};

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series);

}  // namespace tsc
