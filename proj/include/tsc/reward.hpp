#pragma once

#include "tsc/sim.hpp"

namespace tsc {

struct RewardConfig {
    double discharge_reward = 20.0;     // utility per vehicle discharged
    double red_wait_penalty = 1.0;      // disutility per vehicle per second behind red
    double residual_penalty = 5.0;      // disutility per vehicle left when a green ends
    double queue_speed_threshold_kph = 15.0;  // informational in the vertical-queue model

    void validate() const {
        if (discharge_reward < 0 || red_wait_penalty < 0 || residual_penalty < 0)
            throw ConfigError("reward magnitudes must be >= 0");
    }
};

// Per-second utility: +20 per discharge, -1 per vehicle queued at a red
// display, -5 per vehicle still queued at the moment a green ends.
inline double compute_reward(const TickOutcome& outcome, const RewardConfig& cfg) {
    double r = 0.0;
    for (const auto& ap : outcome.approaches) {
        r += cfg.discharge_reward * ap.discharged;
        if (ap.shown == Display::Red) r -= cfg.red_wait_penalty * ap.queue_after;
    }
    for (const auto& [approach, residual] : outcome.green_terminated)
        r -= cfg.residual_penalty * residual;
    return r;
}

}  // namespace tsc
