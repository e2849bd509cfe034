#pragma once

#include "tsc/reward.hpp"
#include "tsc/signal.hpp"
#include "tsc/sim.hpp"

namespace tsc {

// One intersection plus its signal, stepped one second at a time. Shared by
// the training loop and the evaluation harness so both see identical
// dynamics.
struct EnvState {
    Intersection sim;
    RingBarrierState signal;
    SimClock clock;

    EnvState(const SimParams& params, const VolumeProfile& profile, const RingBarrierPlan& plan)
        : sim(params, profile, plan.conflict_pairs()), signal(initial_state(plan)) {}
};

struct EnvStepResult {
    TickOutcome outcome;
    double reward = 0.0;
    RingBarrierState signal_shown;  // the state whose indications this second displayed
};

// Applies an already-validated action, displays the resulting indications
// for this second, ticks the simulator, scores the reward, then advances
// the signal timers and the clock.
inline EnvStepResult env_step(EnvState& env, Action action, const RingBarrierPlan& plan,
                              const RewardConfig& reward_cfg) {
    env.signal = apply_action(env.signal, action, plan);
    EnvStepResult res;
    res.signal_shown = env.signal;
    res.outcome = env.sim.tick(indications(env.signal, plan), env.clock);
    res.reward = compute_reward(res.outcome, reward_cfg);
    env.signal = tick_signal(env.signal, plan);
    env.clock.t += 1;
    return res;
}

}  // namespace tsc
