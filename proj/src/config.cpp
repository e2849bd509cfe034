#include "tsc/config.hpp"

#include <algorithm>
#include <fstream>
#include <set>

#include <json.hpp>

namespace tsc {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it)
        if (!allowed.count(it.key()))
            throw ConfigError("unknown key \"" + it.key() + "\" in " + where);
}

std::vector<VolumeSegment> parse_segments(const json& j, const std::string& where) {
    std::vector<VolumeSegment> out;
    for (const json& s : j) {
        check_keys(s, where, {"start_s", "end_s", "vph"});
        out.push_back({s.at("start_s").get<int64_t>(), s.at("end_s").get<int64_t>(),
                       s.at("vph").get<double>()});
    }
    return out;
}

}  // namespace

ExperimentConfig ExperimentConfig::defaults() {
    ExperimentConfig c;
    // diurnal major-street demand; the minor street holds 175 vph
    std::vector<VolumeSegment> major = {
        {0, 21600, 300},     {21600, 36000, 900}, {36000, 54000, 600},
        {54000, 68400, 1000}, {68400, 82800, 400}, {82800, 86400, 150},
    };
    std::vector<VolumeSegment> minor = {{0, 86400, 175}};
    c.volumes.approaches = {major, major, minor, minor};
    c.scenarios["surge"] = {{3, 75600, 82800, 600.0}};  // 21:00-23:00 on SB
    c.plan_windows = {{21600, 36000}, {36000, 54000}, {54000, 68400}, {68400, 82800}};
    c.actuated.detector_approaches = {2, 3};
    return c;
}

int ExperimentConfig::approach_index(const std::string& name) const {
    for (size_t i = 0; i < approach_names.size(); ++i)
        if (approach_names[i] == name) return static_cast<int>(i);
    throw ConfigError("unknown approach \"" + name + "\"");
}

ExperimentConfig ExperimentConfig::from_json_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ConfigError(std::string("malformed config JSON: ") + e.what());
    }
    ExperimentConfig c = defaults();
    check_keys(j, "config",
               {"seed", "encoder_size", "approaches", "sim", "signal", "volumes", "scenarios",
                "reward", "epsilon", "train", "days", "controllers"});

    if (j.contains("seed")) c.seed = j["seed"].get<uint64_t>();
    if (j.contains("encoder_size")) c.encoder_size = j["encoder_size"].get<int>();
    if (j.contains("approaches")) {
        c.approach_names = j["approaches"].get<std::vector<std::string>>();
        if (c.approach_names.size() != 4) throw ConfigError("exactly 4 approaches supported");
    }
    if (j.contains("sim")) {
        const json& s = j["sim"];
        check_keys(s, "sim",
                   {"free_flow_travel_s", "startup_lost_s", "saturation_headway_s",
                    "deterministic_arrivals"});
        c.sim.free_flow_travel_s = s.value("free_flow_travel_s", c.sim.free_flow_travel_s);
        c.sim.startup_lost_s = s.value("startup_lost_s", c.sim.startup_lost_s);
        c.sim.saturation_headway_s = s.value("saturation_headway_s", c.sim.saturation_headway_s);
        c.sim.deterministic_arrivals =
            s.value("deterministic_arrivals", c.sim.deterministic_arrivals);
    }
    if (j.contains("signal")) {
        const json& s = j["signal"];
        check_keys(s, "signal", {"min_green_s", "yellow_s", "all_red_s", "phases", "conflicts"});
        c.min_green_s = s.value("min_green_s", c.min_green_s);
        c.yellow_s = s.value("yellow_s", c.yellow_s);
        c.all_red_s = s.value("all_red_s", c.all_red_s);
        if (s.contains("phases") != s.contains("conflicts"))
            throw ConfigError("custom signal plans need both phases and conflicts");
        if (s.contains("phases")) {
            for (const json& p : s["phases"]) {
                check_keys(p, "signal.phases",
                           {"id", "ring", "barrier_group", "approaches", "min_green_s",
                            "yellow_s", "all_red_s"});
                Phase ph;
                ph.id = p.at("id").get<int>();
                ph.ring = p.at("ring").get<int>();
                ph.barrier_group = p.at("barrier_group").get<int>();
                for (const json& a : p.at("approaches"))
                    ph.served_approaches.push_back(c.approach_index(a.get<std::string>()));
                ph.min_green_s = p.value("min_green_s", c.min_green_s);
                ph.yellow_s = p.value("yellow_s", c.yellow_s);
                ph.all_red_s = p.value("all_red_s", c.all_red_s);
                c.custom_phases.push_back(std::move(ph));
            }
            for (const json& pair : s["conflicts"]) {
                if (!pair.is_array() || pair.size() != 2)
                    throw ConfigError("signal.conflicts entries are [a, b] pairs");
                c.custom_conflicts.emplace_back(c.approach_index(pair[0].get<std::string>()),
                                                c.approach_index(pair[1].get<std::string>()));
            }
        }
    }
    if (j.contains("volumes")) {
        const json& v = j["volumes"];
        if (!v.is_object()) throw ConfigError("volumes must map approach name to segments");
        c.volumes.approaches.assign(c.approach_names.size(), {});
        for (auto it = v.begin(); it != v.end(); ++it)
            c.volumes.approaches[c.approach_index(it.key())] =
                parse_segments(it.value(), "volumes." + it.key());
    }
    if (j.contains("scenarios")) {
        c.scenarios.clear();
        const json& sc = j["scenarios"];
        for (auto it = sc.begin(); it != sc.end(); ++it) {
            std::vector<ScenarioOverride> ovs;
            for (const json& o : it.value()) {
                check_keys(o, "scenario " + it.key(), {"approach", "start_s", "end_s", "vph"});
                ovs.push_back({c.approach_index(o.at("approach").get<std::string>()),
                               o.at("start_s").get<int64_t>(), o.at("end_s").get<int64_t>(),
                               o.at("vph").get<double>()});
            }
            c.scenarios[it.key()] = std::move(ovs);
        }
    }
    if (j.contains("reward")) {
        const json& r = j["reward"];
        check_keys(r, "reward",
                   {"discharge_reward", "red_wait_penalty", "residual_penalty",
                    "queue_speed_threshold_kph"});
        c.reward.discharge_reward = r.value("discharge_reward", c.reward.discharge_reward);
        c.reward.red_wait_penalty = r.value("red_wait_penalty", c.reward.red_wait_penalty);
        c.reward.residual_penalty = r.value("residual_penalty", c.reward.residual_penalty);
        c.reward.queue_speed_threshold_kph =
            r.value("queue_speed_threshold_kph", c.reward.queue_speed_threshold_kph);
    }
    if (j.contains("epsilon")) {
        const json& e = j["epsilon"];
        check_keys(e, "epsilon", {"initial", "final", "observe_end_s", "explore_end_s"});
        c.epsilon.initial = e.value("initial", c.epsilon.initial);
        c.epsilon.final_eps = e.value("final", c.epsilon.final_eps);
        c.epsilon.observe_end_s = e.value("observe_end_s", c.epsilon.observe_end_s);
        c.epsilon.explore_end_s = e.value("explore_end_s", c.epsilon.explore_end_s);
    }
    if (j.contains("train")) {
        const json& t = j["train"];
        check_keys(t, "train",
                   {"gamma", "lr", "minibatch", "train_period_s", "warmup", "replay_capacity",
                    "loss", "huber_delta"});
        c.train.gamma = t.value("gamma", c.train.gamma);
        c.train.lr = t.value("lr", c.train.lr);
        c.train.minibatch = t.value("minibatch", c.train.minibatch);
        c.train.train_period_s = t.value("train_period_s", c.train.train_period_s);
        c.train.warmup = t.value("warmup", c.train.warmup);
        c.train.replay_capacity = t.value("replay_capacity", c.train.replay_capacity);
        if (t.contains("loss")) {
            const std::string kind = t["loss"].get<std::string>();
            if (kind == "huber")
                c.train.loss = LossKind::Huber;
            else if (kind == "squared")
                c.train.loss = LossKind::Squared;
            else
                throw ConfigError("loss must be \"huber\" or \"squared\"");
        }
        c.train.huber_delta = t.value("huber_delta", c.train.huber_delta);
    }
    if (j.contains("days")) {
        const json& d = j["days"];
        check_keys(d, "days", {"training", "evaluation"});
        c.training_days = d.value("training", c.training_days);
        c.evaluation_days = d.value("evaluation", c.evaluation_days);
    }
    if (j.contains("controllers")) {
        const json& ct = j["controllers"];
        check_keys(ct, "controllers", {"actuated", "plan_windows", "fixed_plans"});
        if (ct.contains("actuated")) {
            const json& a = ct["actuated"];
            check_keys(a, "actuated",
                       {"gap_s", "max_green_s", "detector_approaches", "free_start_s",
                        "free_end_s", "detector_horizon_s"});
            c.actuated.gap_s = a.value("gap_s", c.actuated.gap_s);
            c.actuated.max_green_s = a.value("max_green_s", c.actuated.max_green_s);
            c.actuated.free_start_s = a.value("free_start_s", c.actuated.free_start_s);
            c.actuated.free_end_s = a.value("free_end_s", c.actuated.free_end_s);
            c.actuated.detector_horizon_s =
                a.value("detector_horizon_s", c.actuated.detector_horizon_s);
            if (a.contains("detector_approaches")) {
                c.actuated.detector_approaches.clear();
                for (const json& n : a["detector_approaches"])
                    c.actuated.detector_approaches.push_back(
                        c.approach_index(n.get<std::string>()));
            }
        }
        if (ct.contains("plan_windows")) {
            c.plan_windows.clear();
            for (const json& w : ct["plan_windows"]) {
                check_keys(w, "plan_windows", {"start_s", "end_s"});
                c.plan_windows.push_back(
                    {w.at("start_s").get<int64_t>(), w.at("end_s").get<int64_t>()});
            }
        }
        if (ct.contains("fixed_plans")) {
            const json& fp = ct["fixed_plans"];
            check_keys(fp, "fixed_plans", {"plans", "schedule"});
            FixedTimeSchedule sched;
            for (const json& p : fp.at("plans")) {
                check_keys(p, "fixed_plans.plans", {"id", "cycle_s", "splits_s"});
                sched.plans.push_back({p.at("id").get<int>(), p.at("cycle_s").get<int>(),
                                       p.at("splits_s").get<std::vector<int>>()});
            }
            for (const json& e : fp.at("schedule")) {
                check_keys(e, "fixed_plans.schedule", {"start_s", "end_s", "plan_id"});
                sched.entries.push_back({e.at("start_s").get<int64_t>(),
                                         e.at("end_s").get<int64_t>(),
                                         e.at("plan_id").get<int>()});
            }
            c.explicit_fixed = std::move(sched);
        }
    }
    c.validate();
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot read config " + path);
    std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
    return from_json_text(text);
}

void ExperimentConfig::validate() const {
    sim.validate();
    volumes.validate();
    if (static_cast<int>(volumes.approaches.size()) != 4)
        throw ConfigError("volume profile must cover 4 approaches");
    reward.validate();
    epsilon.validate();
    train.validate();
    if (training_days < 1 || evaluation_days < 1) throw ConfigError("days must be >= 1");
    actuated.validate();
    if (encoder_size != 80 && encoder_size != 24)
        throw ConfigError("encoder_size must be 80 or 24");
    for (const auto& [name, ovs] : scenarios)
        for (const ScenarioOverride& o : ovs) {
            if (o.start_s < 0 || o.end_s > kSecondsPerDay || o.start_s >= o.end_s)
                throw ConfigError("scenario \"" + name + "\" window out of range");
            if (o.vph < 0) throw ConfigError("scenario \"" + name + "\" has negative volume");
            if (o.approach < 0 || o.approach >= 4)
                throw ConfigError("scenario \"" + name + "\" references unknown approach");
        }
    int64_t prev_end = -1;
    for (const PlanWindow& w : plan_windows) {
        if (w.start_s < 0 || w.end_s > kSecondsPerDay || w.start_s >= w.end_s)
            throw ConfigError("plan window out of range");
        if (prev_end >= 0 && w.start_s != prev_end)
            throw ConfigError("plan windows must be contiguous");
        prev_end = w.end_s;
    }
    if (explicit_fixed) explicit_fixed->validate(make_plan());
    make_fixed_schedule().validate(make_plan());
}

RingBarrierPlan ExperimentConfig::make_plan() const {
    if (!custom_phases.empty())
        return RingBarrierPlan(custom_phases, static_cast<int>(approach_names.size()),
                               custom_conflicts);
    return RingBarrierPlan::two_phase(min_green_s, yellow_s, all_red_s);
}

VolumeProfile ExperimentConfig::profile_with_scenario(const std::string& name) const {
    if (name.empty()) return volumes;
    auto it = scenarios.find(name);
    if (it == scenarios.end()) throw ConfigError("unknown scenario \"" + name + "\"");
    VolumeProfile p = volumes;
    for (const ScenarioOverride& o : it->second) {
        std::vector<VolumeSegment> out;
        for (const VolumeSegment& seg : p.approaches[o.approach]) {
            if (seg.end_s <= o.start_s || seg.start_s >= o.end_s) {
                out.push_back(seg);
                continue;
            }
            if (seg.start_s < o.start_s) out.push_back({seg.start_s, o.start_s, seg.vph});
            out.push_back({std::max(seg.start_s, o.start_s), std::min(seg.end_s, o.end_s), o.vph});
            if (seg.end_s > o.end_s) out.push_back({o.end_s, seg.end_s, seg.vph});
        }
        p.approaches[o.approach] = std::move(out);
    }
    p.validate_coverage();
    return p;
}

FixedTimeSchedule ExperimentConfig::make_fixed_schedule() const {
    if (explicit_fixed) return *explicit_fixed;

    const RingBarrierPlan plan = make_plan();
    const auto& ring1 = plan.ring_sequence(0);
    const double saturation = 3600.0 / sim.saturation_headway_s;

    std::vector<int> clearance, min_greens;
    double lost_time = 0.0;
    for (int id : ring1) {
        const Phase& ph = plan.phase(id);
        clearance.push_back(ph.yellow_s + ph.all_red_s);
        min_greens.push_back(ph.min_green_s);
        lost_time += ph.yellow_s + ph.all_red_s;
    }

    // highest hourly volume any served approach sees inside the window
    auto critical = [&](int64_t lo, int64_t hi) {
        std::vector<double> v;
        for (int id : ring1) {
            double worst = 0.0;
            for (int a : plan.phase(id).served_approaches)
                for (const VolumeSegment& seg : volumes.approaches[a])
                    if (seg.start_s < hi && seg.end_s > lo) worst = std::max(worst, seg.vph);
            v.push_back(worst);
        }
        return v;
    };

    FixedTimeSchedule sched;
    if (plan_windows.empty()) {
        sched.plans.push_back(webster_plan(critical(0, kSecondsPerDay), saturation, lost_time,
                                           clearance, min_greens, 0));
        sched.entries.push_back({0, kSecondsPerDay, 0});
        return sched;
    }
    // plan 0: the night plan, covering everything outside the windows
    {
        const int64_t first = plan_windows.front().start_s;
        const int64_t last = plan_windows.back().end_s;
        std::vector<double> v(ring1.size(), 0.0);
        if (first > 0) {
            auto head = critical(0, first);
            for (size_t i = 0; i < v.size(); ++i) v[i] = std::max(v[i], head[i]);
        }
        if (last < kSecondsPerDay) {
            auto tail = critical(last, kSecondsPerDay);
            for (size_t i = 0; i < v.size(); ++i) v[i] = std::max(v[i], tail[i]);
        }
        sched.plans.push_back(webster_plan(v, saturation, lost_time, clearance, min_greens, 0));
    }
    for (size_t i = 0; i < plan_windows.size(); ++i)
        sched.plans.push_back(webster_plan(critical(plan_windows[i].start_s, plan_windows[i].end_s),
                                           saturation, lost_time, clearance, min_greens,
                                           static_cast<int>(i) + 1));

    if (plan_windows.front().start_s > 0)
        sched.entries.push_back({0, plan_windows.front().start_s, 0});
    for (size_t i = 0; i < plan_windows.size(); ++i)
        sched.entries.push_back(
            {plan_windows[i].start_s, plan_windows[i].end_s, static_cast<int>(i) + 1});
    if (plan_windows.back().end_s < kSecondsPerDay)
        sched.entries.push_back({plan_windows.back().end_s, kSecondsPerDay, 0});
    return sched;
}

}  // namespace tsc
