#include "tsc/dqn.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <string>

#include "tsc/env.hpp"

namespace tsc {

double epsilon_at(int64_t t, const EpsilonSchedule& sched) {
    if (t < sched.observe_end_s) return sched.initial;
    if (t >= sched.explore_end_s) return sched.final_eps;
    const double span = static_cast<double>(sched.explore_end_s - sched.observe_end_s);
    const double frac = static_cast<double>(t - sched.observe_end_s) / span;
    return sched.initial + (sched.final_eps - sched.initial) * frac;
}

TrainStage stage_at(int64_t t, const EpsilonSchedule& sched) {
    if (t < sched.observe_end_s) return TrainStage::Observe;
    if (t < sched.explore_end_s) return TrainStage::Explore;
    return TrainStage::Train;
}

double q_target(double r, double gamma, const std::array<double, kNumActions>& next_q,
                const ActionMask& next_mask) {
    double best = 0.0;
    bool any = false;
    for (int a = 0; a < kNumActions; ++a) {
        if (!next_mask[a]) continue;
        if (!any || next_q[a] > best) best = next_q[a];
        any = true;
    }
    if (!any) throw RuleViolation("next-action mask has no valid action");
    return r + gamma * best;
}

int masked_argmax(const std::array<double, kNumActions>& q, const ActionMask& mask) {
    int best = -1;
    for (int a = 0; a < kNumActions; ++a) {
        if (!mask[a]) continue;
        if (best < 0 || q[a] > q[best]) best = a;
    }
    if (best < 0) throw RuleViolation("action mask has no valid action");
    return best;
}

ActionChoice select_action_lazy(const std::function<std::array<double, kNumActions>()>& q_fn,
                                const ActionMask& mask, double eps, SplitMix64& rng,
                                TrainStage stage) {
    std::array<int, kNumActions> valid{};
    int n_valid = 0;
    for (int a = 0; a < kNumActions; ++a)
        if (mask[a]) valid[n_valid++] = a;
    if (n_valid == 0) throw RuleViolation("action mask has no valid action");

    ActionChoice choice;
    if (n_valid == 1) {
        choice.action = static_cast<Action>(valid[0]);
        return choice;
    }
    if (rng.next_double() < eps) {
        choice.random = true;
        choice.action = static_cast<Action>(valid[rng.next_below(n_valid)]);
        if (choice.action == Action::DoNothing && stage != TrainStage::Train)
            choice.lockout_request_s = rng.next_below(16);
        return choice;
    }
    choice.action = static_cast<Action>(masked_argmax(q_fn(), mask));
    return choice;
}

namespace {

double loss_value(double err, LossKind kind, double delta) {
    if (kind == LossKind::Squared) return 0.5 * err * err;
    const double a = std::abs(err);
    return a <= delta ? 0.5 * err * err : delta * (a - 0.5 * delta);
}

double loss_grad(double err, LossKind kind, double delta) {
    if (kind == LossKind::Squared) return err;
    return std::clamp(err, -delta, delta);
}

void zero_grads(NetworkParams& g) {
    for (auto& w : g.weights) std::fill(w.begin(), w.end(), 0.0);
    for (auto& b : g.biases) std::fill(b.begin(), b.end(), 0.0);
}

}  // namespace

double loss_and_gradients(const NetworkSpec& spec, const NetworkParams& params,
                          const std::vector<GradSample>& batch, LossKind loss, double huber_delta,
                          NetworkParams& grads, ForwardCache& cache) {
    const double n = static_cast<double>(batch.size());
    double loss_sum = 0.0;
    std::array<double, kNumActions> dq{};
    for (const GradSample& s : batch) {
        forward(spec, params, s.input, cache);
        const double err = cache.q()[s.action] - s.target;
        loss_sum += loss_value(err, loss, huber_delta);
        dq.fill(0.0);
        dq[s.action] = loss_grad(err, loss, huber_delta) / n;
        backward(spec, params, cache, dq.data(), grads);
    }
    return loss_sum / n;
}

TrainStepResult train_step(const NetworkSpec& spec, NetworkParams& params, AdamState& adam,
                           const ReplayBuffer& buffer, const TrainConfig& cfg, SplitMix64& rng,
                           TrainScratch& scratch) {
    TrainStepResult res;
    if (buffer.size() < static_cast<size_t>(cfg.warmup)) return res;

    if (!scratch.ready) {
        scratch.grads = zero_params(spec);
        scratch.ready = true;
    } else {
        zero_grads(scratch.grads);
    }

    // targets from the current parameters, then one descent step
    std::array<double, kNumActions> next_q{};
    std::vector<GradSample> batch(static_cast<size_t>(cfg.minibatch));
    scratch.batch_inputs.resize(batch.size());
    for (size_t i = 0; i < batch.size(); ++i) {
        const Transition& tr = buffer.sample(rng);
        stack_to_input(tr.s_next, scratch.input_next);
        forward(spec, params, scratch.input_next.data(), scratch.cache_next);
        std::copy_n(scratch.cache_next.q().data(), kNumActions, next_q.begin());
        stack_to_input(tr.s, scratch.batch_inputs[i]);
        batch[i] = {scratch.batch_inputs[i].data(), static_cast<int>(tr.a),
                    q_target(tr.r, cfg.gamma, next_q, tr.next_mask)};
    }
    res.ran = true;
    res.loss = loss_and_gradients(spec, params, batch, cfg.loss, cfg.huber_delta, scratch.grads,
                                  scratch.cache_s);
    if (!std::isfinite(res.loss))
        throw TrainingDiverged("non-finite loss at adam step " + std::to_string(adam.step + 1) +
                               " (replay size " + std::to_string(buffer.size()) + ")");

    AdamConfig acfg;
    acfg.lr = cfg.lr;
    adam_step(params, scratch.grads, adam, acfg);
    return res;
}

TrainingResult run_training(const TrainingSetup& setup,
                            const std::function<void(const StepLogRow&)>& step_log) {
    setup.schedule.validate();
    setup.train.validate();
    setup.reward.validate();

    const RingBarrierPlan& plan = setup.plan;
    const NetworkSpec spec = NetworkSpec::for_size(setup.encoder_size);
    const EncoderLayout layout = layout_for(setup.encoder_size, plan, setup.profile.n_approaches());

    NetworkParams params = init_params(spec, hash_combine(setup.seed, 3));
    AdamState adam = AdamState::zero(spec);
    ReplayBuffer buffer(static_cast<size_t>(setup.train.replay_capacity));
    SplitMix64 act_rng(hash_combine(setup.seed, 1));
    SplitMix64 replay_rng(hash_combine(setup.seed, 2));
    TrainScratch scratch;

    EnvState env(setup.sim, setup.profile, plan);

    TrainingResult result;
    result.spec = spec;
    result.train_steps = 0;

    std::vector<double> q_input;
    ForwardCache q_cache;

    // pending transition: completed once the next state and mask are known
    bool have_pending = false;
    FrameStack pending_s;
    Action pending_a = Action::DoNothing;
    double pending_r = 0.0;

    auto first_frame = std::make_shared<StateMatrix>(
        encode(std::vector<int>(plan.n_approaches(), 0), env.signal, env.clock, layout, plan));
    FrameStack stack(std::move(first_frame));
    bool first_tick = true;

    double reward_accum = 0.0;
    int64_t reward_ticks = 0;

    for (int day = 0; day < setup.days; ++day) {
        env.sim.set_arrival_process({hash_combine(setup.seed, static_cast<uint64_t>(day)),
                                     setup.sim.deterministic_arrivals});
        DayStats stats;
        stats.day = day;
        double loss_sum = 0.0;
        int64_t loss_n = 0;
        int64_t delay_sum = 0;

        for (int64_t s = 0; s < kSecondsPerDay; ++s) {
            const int64_t t = env.clock.t;

            std::vector<int> queues(plan.n_approaches());
            for (int a = 0; a < plan.n_approaches(); ++a) queues[a] = env.sim.queue_length(a);
            if (!first_tick)
                stack.push(std::make_shared<StateMatrix>(
                    encode(queues, env.signal, env.clock, layout, plan)));
            first_tick = false;

            const ActionMask mask = valid_actions(env.signal, plan);

            if (have_pending) {
                Transition tr;
                tr.s = pending_s;
                tr.a = pending_a;
                tr.r = pending_r;
                tr.s_next = stack;
                tr.next_mask = mask;
                buffer.push(std::move(tr));
            }

            const double eps = epsilon_at(t, setup.schedule);
            const TrainStage stage = stage_at(t, setup.schedule);
            const ActionChoice choice = select_action_lazy(
                [&] {
                    stack_to_input(stack, q_input);
                    forward(spec, params, q_input.data(), q_cache);
                    std::array<double, kNumActions> q{};
                    std::copy_n(q_cache.q().data(), kNumActions, q.begin());
                    return q;
                },
                mask, eps, act_rng, stage);

            EnvStepResult step = env_step(env, choice.action, plan, setup.reward);
            if (choice.lockout_request_s > 0)
                env.signal.lockout_remaining_s =
                    std::max(env.signal.lockout_remaining_s, choice.lockout_request_s);

            pending_s = stack;
            pending_a = choice.action;
            pending_r = step.reward;
            have_pending = true;

            reward_accum += step.reward;
            ++reward_ticks;
            stats.total_travel_time_s += static_cast<double>(env.sim.vehicles_in_system());
            for (const Vehicle& v : step.outcome.departed) delay_sum += v.delay();
            stats.vehicles_departed += static_cast<int64_t>(step.outcome.departed.size());

            if (t % setup.train.train_period_s == 0) {
                TrainStepResult ts =
                    train_step(spec, params, adam, buffer, setup.train, replay_rng, scratch);
                if (ts.ran) {
                    ++result.train_steps;
                    loss_sum += ts.loss;
                    ++loss_n;
                    if (step_log) {
                        StepLogRow row;
                        row.t = t;
                        row.step = result.train_steps;
                        row.epsilon = eps;
                        row.loss = ts.loss;
                        row.mean_reward = reward_accum / static_cast<double>(reward_ticks);
                        step_log(row);
                    }
                    reward_accum = 0.0;
                    reward_ticks = 0;
                }
            }
        }

        stats.mean_delay_s = stats.vehicles_departed > 0
                                 ? static_cast<double>(delay_sum) /
                                       static_cast<double>(stats.vehicles_departed)
                                 : 0.0;
        stats.mean_loss = loss_n > 0 ? loss_sum / static_cast<double>(loss_n) : 0.0;
        stats.epsilon_end = epsilon_at(env.clock.t - 1, setup.schedule);
        result.days.push_back(stats);
    }

    result.params = std::move(params);
    return result;
}

}  // namespace tsc
