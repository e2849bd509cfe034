#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <functional>
#include <vector>

#include "tsc/encoder.hpp"
#include "tsc/network.hpp"
#include "tsc/reward.hpp"
#include "tsc/rng.hpp"
#include "tsc/signal.hpp"

namespace tsc {

// The paper's three-stage schedule: fixed epsilon, linear anneal, small
// constant tail.
enum class TrainStage { Observe, Explore, Train };

struct EpsilonSchedule {
    double initial = 1.0;
    double final_eps = 0.005;
    int64_t observe_end_s = 129600;  // 1.5 days
    int64_t explore_end_s = 259200;  // 3 days

    void validate() const {
        if (initial < final_eps || final_eps < 0.0)
            throw ConfigError("epsilon schedule must anneal downward to >= 0");
        if (observe_end_s > explore_end_s)
            throw ConfigError("observation must end before exploration ends");
    }
};

double epsilon_at(int64_t t, const EpsilonSchedule& sched);
TrainStage stage_at(int64_t t, const EpsilonSchedule& sched);

// Watkins target with the maximum restricted to valid next actions. No
// terminal states: the intersection runs as a continuing task.
double q_target(double r, double gamma, const std::array<double, kNumActions>& next_q,
                const ActionMask& next_mask);

// Lowest valid index wins ties.
int masked_argmax(const std::array<double, kNumActions>& q, const ActionMask& mask);

struct ActionChoice {
    Action action = Action::DoNothing;
    // Nonzero only when a random DoNothing was freely chosen during
    // observe/explore: freeze further choices for this many seconds.
    int lockout_request_s = 0;
    bool random = false;
};

// Epsilon-greedy over valid actions. With a single valid action the choice
// is forced and consumes no randomness. A random DoNothing picked from two
// or more options during observe/explore draws a lockout in {0..15};
// q_fn is only invoked on the greedy path.
ActionChoice select_action_lazy(const std::function<std::array<double, kNumActions>()>& q_fn,
                                const ActionMask& mask, double eps, SplitMix64& rng,
                                TrainStage stage);

inline ActionChoice select_action(const std::array<double, kNumActions>& q,
                                  const ActionMask& mask, double eps, SplitMix64& rng,
                                  TrainStage stage) {
    return select_action_lazy([&] { return q; }, mask, eps, rng, stage);
}

// One step of experience. Frames are shared, so consecutive transitions
// cost one matrix each.
struct Transition {
    FrameStack s;
    Action a = Action::DoNothing;
    double r = 0.0;
    FrameStack s_next;
    ActionMask next_mask{};
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(size_t capacity) : capacity_(capacity) {}

    void push(Transition t) {
        if (buf_.size() == capacity_) buf_.pop_front();
        buf_.push_back(std::move(t));
    }
    size_t size() const { return buf_.size(); }
    size_t capacity() const { return capacity_; }
    const Transition& at(size_t i) const { return buf_[i]; }
    const Transition& sample(SplitMix64& rng) const {
        return buf_[static_cast<size_t>(rng.next_double() * static_cast<double>(buf_.size()))];
    }

private:
    size_t capacity_;
    std::deque<Transition> buf_;
};

enum class LossKind { Huber, Squared };

struct TrainConfig {
    double gamma = 0.99;
    double lr = 1e-4;
    int minibatch = 32;
    int train_period_s = 4;  // one gradient step per this many seconds
    int warmup = 5000;       // replay size before updates begin
    int replay_capacity = 100000;
    LossKind loss = LossKind::Huber;
    double huber_delta = 1.0;

    void validate() const {
        if (gamma < 0.0 || gamma >= 1.0) throw ConfigError("gamma must lie in [0, 1)");
        if (minibatch < 1 || train_period_s < 1 || warmup < 1 || replay_capacity < 1)
            throw ConfigError("bad training configuration");
    }
};

// Reusable buffers so the hot loop does not reallocate.
struct TrainScratch {
    ForwardCache cache_s, cache_next;
    NetworkParams grads;
    std::vector<double> input_s, input_next;
    std::vector<std::vector<double>> batch_inputs;
    bool ready = false;
};

struct GradSample {
    const double* input = nullptr;  // network-shaped state
    int action = 0;
    double target = 0.0;
};

// Mean loss over the batch and exact reverse-mode gradients of it,
// accumulated into `grads` (pre-zeroed by the caller). Targets are held
// constant; only the predicted Q of each sample's action carries gradient.
double loss_and_gradients(const NetworkSpec& spec, const NetworkParams& params,
                          const std::vector<GradSample>& batch, LossKind loss, double huber_delta,
                          NetworkParams& grads, ForwardCache& cache);

struct TrainStepResult {
    bool ran = false;  // false while the buffer is below warm-up
    double loss = 0.0;
};

// One uniform minibatch, targets from the current parameters, one Adam
// update. Throws TrainingDiverged if the loss goes non-finite.
TrainStepResult train_step(const NetworkSpec& spec, NetworkParams& params, AdamState& adam,
                           const ReplayBuffer& buffer, const TrainConfig& cfg, SplitMix64& rng,
                           TrainScratch& scratch);

struct DayStats {
    int day = 0;
    double total_travel_time_s = 0.0;  // vehicle-seconds in system, summed per tick
    int64_t vehicles_departed = 0;
    double mean_delay_s = 0.0;
    double mean_loss = 0.0;  // over this day's gradient steps
    double epsilon_end = 0.0;
};

struct TrainingSetup {
    RingBarrierPlan plan;
    SimParams sim;
    VolumeProfile profile;
    RewardConfig reward;
    int encoder_size = 80;
    TrainConfig train;
    EpsilonSchedule schedule;
    int days = 61;
    uint64_t seed = 1;
};

struct StepLogRow {
    int64_t t = 0;
    int64_t step = 0;
    double epsilon = 0.0;
    double loss = 0.0;
    double mean_reward = 0.0;  // over seconds since the previous step
};

struct TrainingResult {
    NetworkSpec spec;
    NetworkParams params;
    std::vector<DayStats> days;
    int64_t train_steps = 0;
};

// The full environment loop: encode, stack, select (mask, min-green and
// random freezes honored), act, simulate, score, store, periodically fit.
// A fresh arrival seed is derived for every simulated day; the whole run is
// a pure function of the setup.
TrainingResult run_training(const TrainingSetup& setup,
                            const std::function<void(const StepLogRow&)>& step_log = {});

}  // namespace tsc
