#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "tsc/dqn.hpp"
#include "tsc/encoder.hpp"
#include "tsc/network.hpp"
#include "tsc/rng.hpp"
#include "tsc/signal.hpp"
#include "tsc/sim.hpp"

namespace tsc {

struct TimingPlan {
    int id = 0;
    int cycle_s = 60;
    std::vector<int> splits_s;  // by ring-1 phase position; green + clearance
};

struct ScheduleEntry {
    int64_t start_s = 0;
    int64_t end_s = 0;  // exclusive
    int plan_id = 0;
};

// Timing plans rotated over the day.
struct FixedTimeSchedule {
    std::vector<TimingPlan> plans;
    std::vector<ScheduleEntry> entries;

    const TimingPlan& active(int64_t second_of_day) const;
    // Entries contiguous over [0, 86400), splits sum to the cycle, every
    // green fits its phase's min green. Checked at load time.
    void validate(const RingBarrierPlan& plan) const;
};

// Webster-style plan: cycle (1.5 L + 5) / (1 - Y) clamped to [40, 120] and
// rounded to 5 s, greens split in proportion to the flow ratios. Throws
// ConfigError when Y = sum(v/s) reaches 1.
TimingPlan webster_plan(const std::vector<double>& critical_vph, double saturation_vph,
                        double lost_time_s, const std::vector<int>& clearance_s,
                        const std::vector<int>& min_green_s, int plan_id = 0);

// What a controller sees each second, before acting.
struct ControlContext {
    const std::vector<int>& queues;
    const std::vector<bool>& detector_on;
    const RingBarrierState& signal;
    const RingBarrierPlan& plan;
    const SimClock& clock;
    const ActionMask& mask;
};

class Controller {
public:
    virtual ~Controller() = default;
    virtual Action step(const ControlContext& ctx) = 0;
    virtual std::string name() const = 0;
};

// Advances both rings exactly when the active plan's split has elapsed.
class FixedTimeController : public Controller {
public:
    FixedTimeController(FixedTimeSchedule schedule, const RingBarrierPlan& plan);
    Action step(const ControlContext& ctx) override;
    std::string name() const override { return "fixed_time"; }

private:
    FixedTimeSchedule schedule_;
};

struct ActuatedConfig {
    double gap_s = 3.0;       // passage time on the detector phase
    int max_green_s = 30;     // detector-phase max
    std::vector<int> detector_approaches;  // minor street
    int64_t free_start_s = 82800;  // 23:00, wraps midnight
    int64_t free_end_s = 21600;    // 06:00
    int detector_horizon_s = 2;    // vehicle within this many seconds trips the detector

    bool in_free_window(int64_t second_of_day) const;
    void validate() const;
};

// Rests on the major street; serves the minor street on a detector call
// once the major guarantee has run, then gaps out or maxes out. Outside
// free mode the guarantees come from the timing plans.
class SemiActuatedController : public Controller {
public:
    SemiActuatedController(ActuatedConfig cfg, FixedTimeSchedule plans,
                           const RingBarrierPlan& plan);
    Action step(const ControlContext& ctx) override;
    std::string name() const override { return "semi_actuated"; }

private:
    bool detector_phase(int phase_id, const RingBarrierPlan& plan) const;

    ActuatedConfig cfg_;
    FixedTimeSchedule plans_;
    int seconds_since_call_ = 0;
};

// Greedy over the masked Q-values of a trained network; lowest index wins
// ties, no exploration.
Action drl_policy_step(const NetworkSpec& spec, const NetworkParams& params,
                       const FrameStack& stack, const ActionMask& mask);

class DrlController : public Controller {
public:
    DrlController(NetworkSpec spec, NetworkParams params, EncoderLayout layout);
    Action step(const ControlContext& ctx) override;
    std::string name() const override { return "drl"; }

private:
    NetworkSpec spec_;
    NetworkParams params_;
    EncoderLayout layout_;
    std::unique_ptr<FrameStack> stack_;
    ForwardCache cache_;
    std::vector<double> input_;
};

// Uniform over the rule checker's valid actions; used by fuzz tests.
class RandomController : public Controller {
public:
    explicit RandomController(uint64_t seed) : rng_(seed) {}
    Action step(const ControlContext& ctx) override;
    std::string name() const override { return "random"; }

private:
    SplitMix64 rng_;
};

}  // namespace tsc
