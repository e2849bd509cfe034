#include "tsc/controllers.hpp"

#include <algorithm>
#include <cmath>

namespace tsc {

const TimingPlan& FixedTimeSchedule::active(int64_t second_of_day) const {
    for (const ScheduleEntry& e : entries)
        if (second_of_day >= e.start_s && second_of_day < e.end_s)
            for (const TimingPlan& p : plans)
                if (p.id == e.plan_id) return p;
    throw ConfigError("no timing plan scheduled for second " + std::to_string(second_of_day));
}

void FixedTimeSchedule::validate(const RingBarrierPlan& plan) const {
    if (plans.empty()) throw ConfigError("schedule has no timing plans");
    int64_t expect = 0;
    for (const ScheduleEntry& e : entries) {
        if (e.start_s != expect) throw ConfigError("timing plan schedule has a gap");
        if (e.end_s <= e.start_s) throw ConfigError("empty schedule entry");
        bool found = false;
        for (const TimingPlan& p : plans) found |= p.id == e.plan_id;
        if (!found) throw ConfigError("schedule references unknown plan id");
        expect = e.end_s;
    }
    if (expect != kSecondsPerDay) throw ConfigError("schedule must cover [0, 86400)");

    const auto& ring1 = plan.ring_sequence(0);
    for (const TimingPlan& p : plans) {
        if (p.splits_s.size() != ring1.size())
            throw ConfigError("plan " + std::to_string(p.id) + " split count mismatch");
        int sum = 0;
        for (size_t i = 0; i < ring1.size(); ++i) {
            const Phase& ph = plan.phase(ring1[i]);
            const int clearance = ph.yellow_s + ph.all_red_s;
            if (p.splits_s[i] < ph.min_green_s + clearance)
                throw ConfigError("split too short for min green on phase " +
                                  std::to_string(ph.id));
            sum += p.splits_s[i];
        }
        if (sum != p.cycle_s)
            throw ConfigError("splits of plan " + std::to_string(p.id) +
                              " do not sum to the cycle");
    }
}

TimingPlan webster_plan(const std::vector<double>& critical_vph, double saturation_vph,
                        double lost_time_s, const std::vector<int>& clearance_s,
                        const std::vector<int>& min_green_s, int plan_id) {
    const size_t n = critical_vph.size();
    if (n == 0 || clearance_s.size() != n || min_green_s.size() != n)
        throw ConfigError("webster inputs must have one entry per phase");
    if (saturation_vph <= 0) throw ConfigError("saturation flow must be positive");

    double y_sum = 0.0;
    std::vector<double> y(n);
    for (size_t i = 0; i < n; ++i) {
        if (critical_vph[i] < 0) throw ConfigError("negative critical volume");
        y[i] = critical_vph[i] / saturation_vph;
        y_sum += y[i];
    }
    if (y_sum >= 1.0) throw ConfigError("oversaturated: sum of flow ratios >= 1");

    double cycle = (1.5 * lost_time_s + 5.0) / (1.0 - y_sum);
    cycle = std::clamp(cycle, 40.0, 120.0);
    const int cycle_s = static_cast<int>(std::llround(cycle / 5.0)) * 5;

    // greens proportional to flow ratio, floored at min green
    const double green_total = static_cast<double>(cycle_s) - lost_time_s;
    std::vector<int> greens(n);
    for (size_t i = 0; i < n; ++i) {
        const double share = y_sum > 0.0 ? y[i] / y_sum : 1.0 / static_cast<double>(n);
        greens[i] = std::max(min_green_s[i], static_cast<int>(std::llround(share * green_total)));
    }
    TimingPlan plan;
    plan.id = plan_id;
    plan.cycle_s = cycle_s;
    plan.splits_s.resize(n);
    int sum = 0;
    for (size_t i = 0; i < n; ++i) {
        plan.splits_s[i] = greens[i] + clearance_s[i];
        sum += plan.splits_s[i];
    }
    // absorb rounding in the most generous phase that can take it
    int diff = plan.cycle_s - sum;
    while (diff != 0) {
        size_t pick = 0;
        for (size_t i = 1; i < n; ++i) {
            if (diff > 0 ? greens[i] > greens[pick]
                         : (greens[i] - min_green_s[i]) > (greens[pick] - min_green_s[pick]))
                pick = i;
        }
        const int step = diff > 0 ? 1 : -1;
        if (step < 0 && greens[pick] <= min_green_s[pick])
            throw ConfigError("cycle too short to honor min greens");
        greens[pick] += step;
        plan.splits_s[pick] += step;
        diff -= step;
    }
    return plan;
}

FixedTimeController::FixedTimeController(FixedTimeSchedule schedule, const RingBarrierPlan& plan)
    : schedule_(std::move(schedule)) {
    schedule_.validate(plan);
}

Action FixedTimeController::step(const ControlContext& ctx) {
    const RingState& r0 = ctx.signal.rings[0];
    if (r0.interval != Interval::Green) return Action::DoNothing;
    const TimingPlan& plan = schedule_.active(ctx.clock.second_of_day());
    const int pos = ctx.plan.position_in_ring(r0.phase_id);
    const Phase& ph = ctx.plan.phase(r0.phase_id);
    const int green_target = plan.splits_s[pos] - ph.yellow_s - ph.all_red_s;
    if (r0.time_in_interval_s >= green_target &&
        ctx.mask[static_cast<int>(Action::AdvanceBoth)])
        return Action::AdvanceBoth;
    return Action::DoNothing;
}

bool ActuatedConfig::in_free_window(int64_t sod) const {
    if (free_start_s <= free_end_s) return sod >= free_start_s && sod < free_end_s;
    return sod >= free_start_s || sod < free_end_s;  // wraps midnight
}

void ActuatedConfig::validate() const {
    if (gap_s <= 0) throw ConfigError("passage time must be positive");
    if (detector_approaches.empty()) throw ConfigError("actuated control needs detectors");
    if (max_green_s < 1) throw ConfigError("max green must be >= 1");
}

SemiActuatedController::SemiActuatedController(ActuatedConfig cfg, FixedTimeSchedule plans,
                                               const RingBarrierPlan& plan)
    : cfg_(std::move(cfg)), plans_(std::move(plans)) {
    cfg_.validate();
    plans_.validate(plan);
    if (plan.ring_sequence(0).size() != 2)
        throw ConfigError("semi-actuated controller expects a two-phase ring");
    if (cfg_.max_green_s < plan.phase(plan.ring_sequence(0)[1]).min_green_s)
        throw ConfigError("max green below min green");
}

bool SemiActuatedController::detector_phase(int phase_id, const RingBarrierPlan& plan) const {
    for (int a : plan.phase(phase_id).served_approaches)
        for (int d : cfg_.detector_approaches)
            if (a == d) return true;
    return false;
}

Action SemiActuatedController::step(const ControlContext& ctx) {
    const RingState& r0 = ctx.signal.rings[0];
    bool call = false;
    for (int a : cfg_.detector_approaches) call |= ctx.detector_on[a];

    if (r0.interval != Interval::Green) return Action::DoNothing;

    const int64_t sod = ctx.clock.second_of_day();
    const bool free = cfg_.in_free_window(sod);
    const Phase& ph = ctx.plan.phase(r0.phase_id);
    const int pos = ctx.plan.position_in_ring(r0.phase_id);

    if (detector_phase(r0.phase_id, ctx.plan)) {
        // minor green: extend on actuations, end on gap-out or max-out
        seconds_since_call_ = call ? 0 : seconds_since_call_ + 1;
        int max_green = cfg_.max_green_s;
        if (!free) {
            const TimingPlan& plan = plans_.active(sod);
            max_green = std::min(max_green,
                                 plan.splits_s[pos] - ph.yellow_s - ph.all_red_s);
        }
        const bool gap_out = static_cast<double>(seconds_since_call_) > cfg_.gap_s;
        const bool max_out = r0.time_in_interval_s >= max_green;
        if ((gap_out || max_out) && ctx.mask[static_cast<int>(Action::AdvanceBoth)])
            return Action::AdvanceBoth;
        return Action::DoNothing;
    }

    // major green: rest until a call has waited out the guarantee
    seconds_since_call_ = 0;
    if (!call) return Action::DoNothing;
    int guarantee = ph.min_green_s;
    if (!free) {
        const TimingPlan& plan = plans_.active(sod);
        guarantee = plan.splits_s[pos] - ph.yellow_s - ph.all_red_s;
    }
    if (r0.time_in_interval_s >= guarantee && ctx.mask[static_cast<int>(Action::AdvanceBoth)])
        return Action::AdvanceBoth;
    return Action::DoNothing;
}

Action drl_policy_step(const NetworkSpec& spec, const NetworkParams& params,
                       const FrameStack& stack, const ActionMask& mask) {
    std::vector<double> input;
    stack_to_input(stack, input);
    return static_cast<Action>(masked_argmax(q_values(spec, params, input.data()), mask));
}

DrlController::DrlController(NetworkSpec spec, NetworkParams params, EncoderLayout layout)
    : spec_(std::move(spec)), params_(std::move(params)), layout_(std::move(layout)) {
    spec_.validate();
}

Action DrlController::step(const ControlContext& ctx) {
    auto frame = std::make_shared<StateMatrix>(
        encode(ctx.queues, ctx.signal, ctx.clock, layout_, ctx.plan));
    if (!stack_)
        stack_ = std::make_unique<FrameStack>(std::move(frame));
    else
        stack_->push(std::move(frame));

    int n_valid = 0;
    int only = 0;
    for (int a = 0; a < kNumActions; ++a)
        if (ctx.mask[a]) {
            only = a;
            ++n_valid;
        }
    if (n_valid == 1) return static_cast<Action>(only);  // forced; skip the forward pass

    stack_to_input(*stack_, input_);
    forward(spec_, params_, input_.data(), cache_);
    std::array<double, kNumActions> q{};
    std::copy_n(cache_.q().data(), kNumActions, q.begin());
    return static_cast<Action>(masked_argmax(q, ctx.mask));
}

Action RandomController::step(const ControlContext& ctx) {
    std::array<int, kNumActions> valid{};
    int n = 0;
    for (int a = 0; a < kNumActions; ++a)
        if (ctx.mask[a]) valid[n++] = a;
    return static_cast<Action>(valid[rng_.next_below(n)]);
}

}  // namespace tsc
