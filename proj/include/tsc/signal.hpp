#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "tsc/errors.hpp"

namespace tsc {

enum class Interval { Green = 0, Yellow = 1, AllRed = 2 };
enum class Display { Green = 0, Yellow = 1, Red = 2 };

// Index order is fixed: Q-value vectors and action masks align with it.
enum class Action {
    DoNothing = 0,
    AdvanceRing1 = 1,
    AdvanceRing2 = 2,
    AdvanceBoth = 3,
    AdvanceToBarrier = 4,
};
inline constexpr int kNumActions = 5;
using ActionMask = std::array<bool, kNumActions>;

const char* to_string(Action a);
const char* to_string(Interval iv);
const char* to_string(Display d);

struct Phase {
    int id = 0;
    int ring = 1;  // 1 or 2
    int barrier_group = 0;
    std::vector<int> served_approaches;
    int min_green_s = 10;
    int yellow_s = 3;
    int all_red_s = 1;
};

// Dual-ring phase organization. Phases in the same barrier group run
// concurrently across rings; rings cross barriers together.
class RingBarrierPlan {
public:
    RingBarrierPlan(std::vector<Phase> phases, int n_approaches,
                    std::vector<std::pair<int, int>> conflicting_approaches);

    // Two-phase single-intersection study plan: ring 1 = {major, minor},
    // ring 2 mirrors it, majors conflict with minors.
    static RingBarrierPlan two_phase(int min_green_s = 10, int yellow_s = 3, int all_red_s = 1);

    const Phase& phase(int id) const;
    const std::vector<int>& ring_sequence(int ring_index) const { return rings_[ring_index]; }
    int n_approaches() const { return n_approaches_; }
    int n_phases() const { return static_cast<int>(phases_.size()); }

    // Position of a phase within its ring's cyclic sequence.
    int position_in_ring(int phase_id) const;
    int next_phase_in_ring(int phase_id) const;
    // Last phase of the current barrier group along the ring ("the phase
    // before the next barrier"). May be the phase itself.
    int barrier_target(int phase_id) const;

    bool conflicting(int approach_a, int approach_b) const;
    std::vector<std::pair<int, int>> conflict_pairs() const;

private:
    void validate() const;

    std::vector<Phase> phases_;
    std::array<std::vector<int>, 2> rings_;  // phase ids in cycle order
    int n_approaches_ = 0;
    std::vector<std::vector<bool>> conflict_;
};

struct RingState {
    int phase_id = 0;
    Interval interval = Interval::Green;
    int time_in_interval_s = 0;
    int target_phase_id = 0;  // phase that turns green after clearance

    bool operator==(const RingState&) const = default;
};

struct RingBarrierState {
    std::array<RingState, 2> rings;
    // While positive only DoNothing is valid. Covers remaining clearance
    // during Yellow/AllRed, min green after a green begins, and any
    // training-time random freeze merged in by the caller.
    int lockout_remaining_s = 0;

    bool operator==(const RingBarrierState&) const = default;
};

// Both rings on the first phase of their sequence, green, min-green lockout.
RingBarrierState initial_state(const RingBarrierPlan& plan);

// The rule-checking module: which of the five actions may be taken now.
// DoNothing is always valid. Advances require the affected rings to be in
// green past min green with no lockout, and must keep barriers aligned.
ActionMask valid_actions(const RingBarrierState& state, const RingBarrierPlan& plan);

// Applies a valid action. Advancing moves the affected ring(s) into Yellow
// (age 0) and extends the lockout to cover the clearance. Throws
// RuleViolation for an action the rule checker does not allow.
RingBarrierState apply_action(const RingBarrierState& state, Action action,
                              const RingBarrierPlan& plan);

// Advances one second. Interval transitions fire when age+1 reaches the
// interval duration, so an interval of duration d is displayed for exactly
// d seconds (ages 0..d-1). Green onset reloads the lockout with min green.
RingBarrierState tick_signal(const RingBarrierState& state, const RingBarrierPlan& plan);

// Per-approach display. Approaches of an active green phase show Green, a
// clearing phase's approaches show Yellow, everything else Red.
std::vector<Display> indications(const RingBarrierState& state, const RingBarrierPlan& plan);

}  // namespace tsc
