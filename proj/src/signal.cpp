#include "tsc/signal.hpp"

#include <algorithm>
#include <set>

namespace tsc {

const char* to_string(Action a) {
    switch (a) {
        case Action::DoNothing: return "do_nothing";
        case Action::AdvanceRing1: return "advance_ring1";
        case Action::AdvanceRing2: return "advance_ring2";
        case Action::AdvanceBoth: return "advance_both";
        case Action::AdvanceToBarrier: return "advance_to_barrier";
    }
    return "?";
}

const char* to_string(Interval iv) {
    switch (iv) {
        case Interval::Green: return "green";
        case Interval::Yellow: return "yellow";
        case Interval::AllRed: return "all_red";
    }
    return "?";
}

const char* to_string(Display d) {
    switch (d) {
        case Display::Green: return "green";
        case Display::Yellow: return "yellow";
        case Display::Red: return "red";
    }
    return "?";
}

RingBarrierPlan::RingBarrierPlan(std::vector<Phase> phases, int n_approaches,
                                 std::vector<std::pair<int, int>> conflicting_approaches)
    : phases_(std::move(phases)), n_approaches_(n_approaches) {
    conflict_.assign(n_approaches_, std::vector<bool>(n_approaches_, false));
    for (auto [a, b] : conflicting_approaches) {
        if (a < 0 || a >= n_approaches_ || b < 0 || b >= n_approaches_)
            throw ConfigError("conflict pair references unknown approach");
        conflict_[a][b] = conflict_[b][a] = true;
    }
    for (const Phase& p : phases_) {
        if (p.ring != 1 && p.ring != 2) throw ConfigError("phase ring must be 1 or 2");
        rings_[p.ring - 1].push_back(p.id);
    }
    validate();
}

RingBarrierPlan RingBarrierPlan::two_phase(int min_green_s, int yellow_s, int all_red_s) {
    auto mk = [&](int id, int ring, int group, std::vector<int> served) {
        Phase p;
        p.id = id;
        p.ring = ring;
        p.barrier_group = group;
        p.served_approaches = std::move(served);
        p.min_green_s = min_green_s;
        p.yellow_s = yellow_s;
        p.all_red_s = all_red_s;
        return p;
    };
    // approaches: 0=EB, 1=WB (major street), 2=NB, 3=SB (minor street)
    std::vector<Phase> phases = {
        mk(1, 1, 0, {0, 1}),
        mk(2, 1, 1, {2, 3}),
        mk(3, 2, 0, {0, 1}),
        mk(4, 2, 1, {2, 3}),
    };
    std::vector<std::pair<int, int>> conflicts = {{0, 2}, {0, 3}, {1, 2}, {1, 3}};
    return RingBarrierPlan(std::move(phases), 4, std::move(conflicts));
}

const Phase& RingBarrierPlan::phase(int id) const {
    for (const Phase& p : phases_)
        if (p.id == id) return p;
    throw ConfigError("unknown phase id " + std::to_string(id));
}

int RingBarrierPlan::position_in_ring(int phase_id) const {
    const Phase& p = phase(phase_id);
    const auto& seq = rings_[p.ring - 1];
    auto it = std::find(seq.begin(), seq.end(), phase_id);
    return static_cast<int>(it - seq.begin());
}

int RingBarrierPlan::next_phase_in_ring(int phase_id) const {
    const Phase& p = phase(phase_id);
    const auto& seq = rings_[p.ring - 1];
    int pos = position_in_ring(phase_id);
    return seq[(pos + 1) % seq.size()];
}

int RingBarrierPlan::barrier_target(int phase_id) const {
    const Phase& p = phase(phase_id);
    const auto& seq = rings_[p.ring - 1];
    int pos = position_in_ring(phase_id);
    int group = p.barrier_group;
    // walk forward while staying in the same barrier group
    int target = phase_id;
    for (size_t k = 1; k < seq.size(); ++k) {
        int cand = seq[(pos + k) % seq.size()];
        if (phase(cand).barrier_group != group) break;
        target = cand;
    }
    return target;
}

bool RingBarrierPlan::conflicting(int a, int b) const { return conflict_[a][b]; }

std::vector<std::pair<int, int>> RingBarrierPlan::conflict_pairs() const {
    std::vector<std::pair<int, int>> out;
    for (int a = 0; a < n_approaches_; ++a)
        for (int b = a + 1; b < n_approaches_; ++b)
            if (conflict_[a][b]) out.emplace_back(a, b);
    return out;
}

void RingBarrierPlan::validate() const {
    if (rings_[0].empty() || rings_[1].empty())
        throw ConfigError("each ring needs at least one phase");
    std::set<int> ids;
    for (const Phase& p : phases_) {
        if (!ids.insert(p.id).second) throw ConfigError("duplicate phase id");
        if (p.min_green_s < 1) throw ConfigError("min_green_s must be >= 1");
        if (p.yellow_s < 0 || p.all_red_s < 0) throw ConfigError("negative clearance interval");
        for (int a : p.served_approaches)
            if (a < 0 || a >= n_approaches_) throw ConfigError("phase serves unknown approach");
    }
    // barrier group order must match across rings (rings cross barriers together)
    auto group_cycle = [&](const std::vector<int>& seq) {
        std::vector<int> order;
        for (int id : seq) {
            int g = phase(id).barrier_group;
            if (order.empty() || order.back() != g) order.push_back(g);
        }
        return order;
    };
    if (group_cycle(rings_[0]) != group_cycle(rings_[1]))
        throw ConfigError("barrier groups do not align across rings");
    // concurrent phases (same group, different rings) must not conflict
    for (int id1 : rings_[0])
        for (int id2 : rings_[1]) {
            const Phase& p1 = phase(id1);
            const Phase& p2 = phase(id2);
            if (p1.barrier_group != p2.barrier_group) continue;
            for (int a : p1.served_approaches)
                for (int b : p2.served_approaches)
                    if (conflict_[a][b])
                        throw ConfigError("concurrent phases serve conflicting approaches");
        }
}

RingBarrierState initial_state(const RingBarrierPlan& plan) {
    RingBarrierState s;
    int lockout = 0;
    for (int r = 0; r < 2; ++r) {
        int first = plan.ring_sequence(r).front();
        s.rings[r] = {first, Interval::Green, 0, first};
        lockout = std::max(lockout, plan.phase(first).min_green_s);
    }
    s.lockout_remaining_s = lockout;
    return s;
}

namespace {

bool ring_ready(const RingState& rs, const RingBarrierPlan& plan) {
    return rs.interval == Interval::Green &&
           rs.time_in_interval_s >= plan.phase(rs.phase_id).min_green_s;
}

// Enter green on the target phase; reloads lockout with min green.
void enter_green(RingState& rs, int& lockout, const RingBarrierPlan& plan) {
    rs.phase_id = rs.target_phase_id;
    rs.interval = Interval::Green;
    rs.time_in_interval_s = 0;
    lockout = std::max(lockout, plan.phase(rs.phase_id).min_green_s);
}

// Begin clearing toward `target`. Zero-length intervals are skipped.
void begin_clearance(RingState& rs, int target, int& lockout, const RingBarrierPlan& plan) {
    const Phase& cur = plan.phase(rs.phase_id);
    rs.target_phase_id = target;
    lockout = std::max(lockout, cur.yellow_s + cur.all_red_s);
    if (cur.yellow_s > 0) {
        rs.interval = Interval::Yellow;
        rs.time_in_interval_s = 0;
    } else if (cur.all_red_s > 0) {
        rs.interval = Interval::AllRed;
        rs.time_in_interval_s = 0;
    } else {
        enter_green(rs, lockout, plan);
    }
}

}  // namespace

ActionMask valid_actions(const RingBarrierState& state, const RingBarrierPlan& plan) {
    ActionMask mask{};
    mask[static_cast<int>(Action::DoNothing)] = true;
    if (state.lockout_remaining_s > 0) return mask;

    const RingState& r1 = state.rings[0];
    const RingState& r2 = state.rings[1];
    bool ready1 = ring_ready(r1, plan);
    bool ready2 = ring_ready(r2, plan);

    int next1 = plan.next_phase_in_ring(r1.phase_id);
    int next2 = plan.next_phase_in_ring(r2.phase_id);
    bool cross1 = plan.phase(next1).barrier_group != plan.phase(r1.phase_id).barrier_group;
    bool cross2 = plan.phase(next2).barrier_group != plan.phase(r2.phase_id).barrier_group;

    // a lone ring may not cross a barrier
    mask[static_cast<int>(Action::AdvanceRing1)] = ready1 && !cross1;
    mask[static_cast<int>(Action::AdvanceRing2)] = ready2 && !cross2;
    // rings either both stay inside the group or cross together
    mask[static_cast<int>(Action::AdvanceBoth)] =
        ready1 && ready2 && cross1 == cross2 &&
        plan.phase(next1).barrier_group == plan.phase(next2).barrier_group;

    // jump to the phase before the next barrier; only rings not already
    // there move, and at least one must move
    int tgt1 = plan.barrier_target(r1.phase_id);
    int tgt2 = plan.barrier_target(r2.phase_id);
    bool move1 = tgt1 != r1.phase_id;
    bool move2 = tgt2 != r2.phase_id;
    bool ok1 = !move1 || ready1;
    bool ok2 = !move2 || ready2;
    mask[static_cast<int>(Action::AdvanceToBarrier)] = (move1 || move2) && ok1 && ok2;

    return mask;
}

RingBarrierState apply_action(const RingBarrierState& state, Action action,
                              const RingBarrierPlan& plan) {
    ActionMask mask = valid_actions(state, plan);
    if (!mask[static_cast<int>(action)])
        throw RuleViolation(std::string("action not allowed by rule checker: ") +
                            to_string(action));

    RingBarrierState s = state;
    switch (action) {
        case Action::DoNothing:
            break;
        case Action::AdvanceRing1:
            begin_clearance(s.rings[0], plan.next_phase_in_ring(s.rings[0].phase_id),
                            s.lockout_remaining_s, plan);
            break;
        case Action::AdvanceRing2:
            begin_clearance(s.rings[1], plan.next_phase_in_ring(s.rings[1].phase_id),
                            s.lockout_remaining_s, plan);
            break;
        case Action::AdvanceBoth:
            for (int r = 0; r < 2; ++r)
                begin_clearance(s.rings[r], plan.next_phase_in_ring(s.rings[r].phase_id),
                                s.lockout_remaining_s, plan);
            break;
        case Action::AdvanceToBarrier:
            for (int r = 0; r < 2; ++r) {
                int tgt = plan.barrier_target(s.rings[r].phase_id);
                if (tgt != s.rings[r].phase_id)
                    begin_clearance(s.rings[r], tgt, s.lockout_remaining_s, plan);
            }
            break;
    }
    return s;
}

RingBarrierState tick_signal(const RingBarrierState& state, const RingBarrierPlan& plan) {
    RingBarrierState s = state;
    s.lockout_remaining_s = std::max(0, s.lockout_remaining_s - 1);
    for (int r = 0; r < 2; ++r) {
        RingState& rs = s.rings[r];
        const Phase& p = plan.phase(rs.phase_id);
        switch (rs.interval) {
            case Interval::Green:
                rs.time_in_interval_s += 1;
                break;
            case Interval::Yellow:
                if (rs.time_in_interval_s + 1 >= p.yellow_s) {
                    if (p.all_red_s > 0) {
                        rs.interval = Interval::AllRed;
                        rs.time_in_interval_s = 0;
                    } else {
                        enter_green(rs, s.lockout_remaining_s, plan);
                    }
                } else {
                    rs.time_in_interval_s += 1;
                }
                break;
            case Interval::AllRed:
                if (rs.time_in_interval_s + 1 >= p.all_red_s) {
                    enter_green(rs, s.lockout_remaining_s, plan);
                } else {
                    rs.time_in_interval_s += 1;
                }
                break;
        }
    }
    return s;
}

std::vector<Display> indications(const RingBarrierState& state, const RingBarrierPlan& plan) {
    std::vector<Display> out(plan.n_approaches(), Display::Red);
    // yellow first so that green from a concurrent ring wins
    for (int r = 0; r < 2; ++r) {
        const RingState& rs = state.rings[r];
        if (rs.interval == Interval::Yellow)
            for (int a : plan.phase(rs.phase_id).served_approaches) out[a] = Display::Yellow;
    }
    for (int r = 0; r < 2; ++r) {
        const RingState& rs = state.rings[r];
        if (rs.interval == Interval::Green)
            for (int a : plan.phase(rs.phase_id).served_approaches) out[a] = Display::Green;
    }
    for (int a = 0; a < plan.n_approaches(); ++a)
        for (int b = a + 1; b < plan.n_approaches(); ++b)
            if (out[a] == Display::Green && out[b] == Display::Green && plan.conflicting(a, b))
                throw SafetyViolation("conflicting approaches " + std::to_string(a) + " and " +
                                      std::to_string(b) + " both green");
    return out;
}

}  // namespace tsc
