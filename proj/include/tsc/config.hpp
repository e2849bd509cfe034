#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "tsc/controllers.hpp"
#include "tsc/dqn.hpp"
#include "tsc/reward.hpp"
#include "tsc/signal.hpp"
#include "tsc/sim.hpp"

namespace tsc {

struct PlanWindow {
    int64_t start_s = 0;
    int64_t end_s = 0;
};

struct ScenarioOverride {
    int approach = 0;
    int64_t start_s = 0;
    int64_t end_s = 0;
    double vph = 0.0;
};

// Everything one experiment needs: demand, signal geometry, reward scheme,
// training schedule, baseline controller parameters, seeds.
struct ExperimentConfig {
    uint64_t seed = 1;
    int encoder_size = 80;
    std::vector<std::string> approach_names = {"EB", "WB", "NB", "SB"};
    SimParams sim;
    int min_green_s = 10;
    int yellow_s = 3;
    int all_red_s = 1;
    // custom ring-barrier plan; empty = the two-phase study plan
    std::vector<Phase> custom_phases;
    std::vector<std::pair<int, int>> custom_conflicts;
    VolumeProfile volumes;
    std::map<std::string, std::vector<ScenarioOverride>> scenarios;
    RewardConfig reward;
    EpsilonSchedule epsilon;
    TrainConfig train;
    int training_days = 61;
    int evaluation_days = 2;
    ActuatedConfig actuated;
    std::vector<PlanWindow> plan_windows;  // coordinated windows; the rest is the night plan
    std::optional<FixedTimeSchedule> explicit_fixed;  // overrides generated plans

    static ExperimentConfig defaults();
    static ExperimentConfig from_json_text(const std::string& text);
    static ExperimentConfig load(const std::string& path);

    void validate() const;

    RingBarrierPlan make_plan() const;
    // The daily profile with a named scenario's overrides applied; empty
    // name returns the base profile.
    VolumeProfile profile_with_scenario(const std::string& name) const;
    // Webster plans from the highest-volume hour of each window, unless the
    // config supplies plans explicitly.
    FixedTimeSchedule make_fixed_schedule() const;
    int approach_index(const std::string& name) const;
};

}  // namespace tsc
