#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <memory>

#include "tsc/dqn.hpp"

using namespace tsc;

namespace {

ActionMask mask_of(std::initializer_list<int> valid) {
    ActionMask m{};
    for (int a : valid) m[a] = true;
    return m;
}

Transition make_transition(double r, int action_idx, uint64_t tag) {
    auto fa = std::make_shared<StateMatrix>(24);
    fa->set(static_cast<int>(tag % 24), 0);
    auto fb = std::make_shared<StateMatrix>(24);
    fb->set(static_cast<int>(tag % 24), 1);
    Transition t;
    t.s = FrameStack(fa);
    t.s_next = FrameStack(fa);
    t.s_next.push(fb);
    t.a = static_cast<Action>(action_idx);
    t.r = r;
    t.next_mask = mask_of({0, 3});
    return t;
}

}  // namespace

TEST_CASE("q_target: direct substitutions") {
    CHECK(q_target(1.0, 0.0, {9, 9, 9, 9, 9}, mask_of({0, 1, 2, 3, 4})) == 1.0);
    CHECK(q_target(0.0, 0.5, {4, 1, 0, 2, 3}, mask_of({0, 1, 2, 3, 4})) == 2.0);
    // masking the best entry changes the max
    CHECK(q_target(1.0, 1.0, {9, 4, 1, 2, 3}, mask_of({1, 2, 3, 4})) == 5.0);
    CHECK_THROWS_AS(q_target(0.0, 0.9, {1, 2, 3, 4, 5}, ActionMask{}), RuleViolation);
}

// The update target written out directly from its definition, compared for
// exact floating-point equality on 1000 random tuples.
TEST_CASE("q_target: matches a direct transcription exactly") {
    SplitMix64 rng(2024);
    for (int i = 0; i < 1000; ++i) {
        const double r = (rng.next_double() - 0.5) * 200.0;
        const double gamma = rng.next_double();
        std::array<double, kNumActions> q{};
        for (double& v : q) v = (rng.next_double() - 0.5) * 100.0;
        ActionMask mask{};
        int n = 0;
        for (int a = 0; a < kNumActions; ++a) {
            mask[a] = rng.next_below(2) == 1;
            n += mask[a];
        }
        if (n == 0) mask[rng.next_below(kNumActions)] = true;

        double best = -1e300;
        for (int a = 0; a < kNumActions; ++a)
            if (mask[a] && q[a] > best) best = q[a];
        const double transcription = r + gamma * best;

        CHECK(q_target(r, gamma, q, mask) == transcription);
    }
}

TEST_CASE("epsilon schedule: pinned values and shape") {
    EpsilonSchedule sched;
    CHECK(epsilon_at(0, sched) == 1.0);
    CHECK(epsilon_at(259200, sched) == 0.005);
    CHECK(epsilon_at(400000, sched) == 0.005);
    CHECK(epsilon_at(194400, sched) == doctest::Approx(0.5025).epsilon(1e-12));
    CHECK(epsilon_at(129600, sched) == doctest::Approx(1.0));

    // non-increasing, piecewise linear with two knots (coarse scan here)
    double prev = epsilon_at(0, sched);
    for (int64_t t = 1; t < 300000; t += 13) {
        const double e = epsilon_at(t, sched);
        CHECK(e <= prev + 1e-15);
        prev = e;
    }
    CHECK(stage_at(0, sched) == TrainStage::Observe);
    CHECK(stage_at(129600, sched) == TrainStage::Explore);
    CHECK(stage_at(259200, sched) == TrainStage::Train);
}

TEST_CASE("masked argmax: lowest index wins ties, restricted to the mask") {
    CHECK(masked_argmax({5, 1, 1, 9, 2}, mask_of({0, 3})) == 3);
    CHECK(masked_argmax({5, 1, 1, 9, 2}, mask_of({0})) == 0);
    CHECK(masked_argmax({7, 1, 1, 7, 2}, mask_of({0, 3})) == 0);  // tie
}

TEST_CASE("masked argmax: invariant under adding a constant to all q") {
    SplitMix64 rng(8);
    for (int i = 0; i < 500; ++i) {
        std::array<double, kNumActions> q{};
        for (double& v : q) v = rng.next_double() * 10.0;
        ActionMask m{};
        m[rng.next_below(kNumActions)] = true;
        m[rng.next_below(kNumActions)] = true;
        m[0] = true;
        std::array<double, kNumActions> shifted = q;
        const double c = (rng.next_double() - 0.5) * 1000.0;
        for (double& v : shifted) v += c;
        CHECK(masked_argmax(q, m) == masked_argmax(shifted, m));
    }
}

TEST_CASE("select_action: greedy limit is the masked argmax") {
    SplitMix64 rng(4);
    auto choice =
        select_action({5, 1, 1, 9, 2}, mask_of({0, 3}), 0.0, rng, TrainStage::Train);
    CHECK(choice.action == Action::AdvanceBoth);
    CHECK_FALSE(choice.random);
    CHECK(choice.lockout_request_s == 0);
}

TEST_CASE("select_action: fully random splits evenly between two valid actions") {
    SplitMix64 rng(99);
    int count0 = 0;
    for (int i = 0; i < 1000000; ++i) {
        auto choice =
            select_action({0, 0, 0, 0, 0}, mask_of({0, 3}), 1.0, rng, TrainStage::Train);
        if (choice.action == Action::DoNothing) ++count0;
        CHECK(choice.lockout_request_s == 0);  // lockouts only in observe/explore
    }
    CHECK(count0 > 497000);
    CHECK(count0 < 503000);
}

TEST_CASE("select_action: random do-nothing in observe draws a 0..15 s freeze") {
    SplitMix64 rng(123);
    bool saw_positive = false;
    for (int i = 0; i < 2000; ++i) {
        auto choice =
            select_action({0, 0, 0, 0, 0}, mask_of({0, 3}), 1.0, rng, TrainStage::Observe);
        if (choice.action == Action::DoNothing) {
            CHECK(choice.lockout_request_s >= 0);
            CHECK(choice.lockout_request_s <= 15);
            saw_positive |= choice.lockout_request_s > 0;
        } else {
            CHECK(choice.lockout_request_s == 0);
        }
    }
    CHECK(saw_positive);
}

TEST_CASE("select_action: greedy do-nothing never requests a freeze") {
    SplitMix64 rng(5);
    auto choice =
        select_action({9, 0, 0, 1, 0}, mask_of({0, 3}), 0.0, rng, TrainStage::Observe);
    CHECK(choice.action == Action::DoNothing);
    CHECK(choice.lockout_request_s == 0);
}

TEST_CASE("select_action: a forced single action consumes no randomness") {
    SplitMix64 a(7), b(7);
    auto choice = select_action({0, 0, 0, 0, 0}, mask_of({0}), 1.0, a, TrainStage::Observe);
    CHECK(choice.action == Action::DoNothing);
    CHECK(choice.lockout_request_s == 0);
    CHECK(a.next() == b.next());  // stream untouched
}

TEST_CASE("replay buffer: strictly oldest-first eviction") {
    ReplayBuffer buf(100);
    for (int i = 0; i < 100 + 17; ++i) buf.push(make_transition(static_cast<double>(i), 0, i));
    CHECK(buf.size() == 100);
    // first 17 gone, order preserved
    for (size_t i = 0; i < buf.size(); ++i)
        CHECK(buf.at(i).r == doctest::Approx(static_cast<double>(i + 17)));
}

TEST_CASE("train_step: below warm-up is a no-op") {
    NetworkSpec spec = NetworkSpec::reduced();
    NetworkParams params = init_params(spec, 1);
    AdamState adam = AdamState::zero(spec);
    ReplayBuffer buf(1000);
    for (int i = 0; i < 9; ++i) buf.push(make_transition(1.0, 0, i));
    TrainConfig cfg;
    cfg.warmup = 10;
    SplitMix64 rng(1);
    TrainScratch scratch;
    auto res = train_step(spec, params, adam, buf, cfg, rng, scratch);
    CHECK_FALSE(res.ran);
    CHECK(adam.step == 0);
}

TEST_CASE("train_step: zero learning rate changes nothing but reports the loss") {
    NetworkSpec spec = NetworkSpec::reduced();
    NetworkParams params = init_params(spec, 1);
    const NetworkParams before = params;
    AdamState adam = AdamState::zero(spec);
    ReplayBuffer buf(1000);
    for (int i = 0; i < 20; ++i) buf.push(make_transition(2.0, 0, i));
    TrainConfig cfg;
    cfg.warmup = 10;
    cfg.minibatch = 4;
    cfg.lr = 0.0;
    SplitMix64 rng(1);
    TrainScratch scratch;
    auto res = train_step(spec, params, adam, buf, cfg, rng, scratch);
    CHECK(res.ran);
    CHECK(std::isfinite(res.loss));
    CHECK(params == before);
}

TEST_CASE("train_step: overfits a single repeated transition") {
    NetworkSpec spec = NetworkSpec::reduced();
    NetworkParams params = init_params(spec, 7);
    AdamState adam = AdamState::zero(spec);
    ReplayBuffer buf(4);
    buf.push(make_transition(5.0, 0, 1));
    TrainConfig cfg;
    cfg.warmup = 1;
    cfg.minibatch = 4;
    cfg.lr = 0.01;
    cfg.gamma = 0.5;
    cfg.loss = LossKind::Squared;
    SplitMix64 rng(3);
    TrainScratch scratch;

    const double initial = train_step(spec, params, adam, buf, cfg, rng, scratch).loss;
    double final_loss = initial;
    for (int i = 0; i < 499; ++i)
        final_loss = train_step(spec, params, adam, buf, cfg, rng, scratch).loss;
    CHECK(final_loss < 1e-3 * initial);
}

TEST_CASE("run_training: bit-identical day totals for the same seed") {
    TrainingSetup setup{RingBarrierPlan::two_phase(),
                        SimParams{},
                        VolumeProfile{},
                        RewardConfig{},
                        24,
                        TrainConfig{},
                        EpsilonSchedule{},
                        1,
                        2024};
    setup.profile.approaches = {{{0, kSecondsPerDay, 600.0}},
                                {{0, kSecondsPerDay, 600.0}},
                                {{0, kSecondsPerDay, 175.0}},
                                {{0, kSecondsPerDay, 175.0}}};
    setup.train.warmup = 1000000;  // no gradient steps: pure environment loop

    TrainingResult a = run_training(setup);
    TrainingResult b = run_training(setup);
    REQUIRE(a.days.size() == 1);
    CHECK(a.days[0].total_travel_time_s == b.days[0].total_travel_time_s);
    CHECK(a.days[0].vehicles_departed == b.days[0].vehicles_departed);
    CHECK(a.train_steps == 0);
    CHECK(a.days[0].epsilon_end == 1.0);  // the whole day sits in observation
    CHECK(a.days[0].total_travel_time_s > 0.0);
}
