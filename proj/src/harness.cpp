#include "tsc/harness.hpp"

#include <algorithm>
#include <cinttypes>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "tsc/env.hpp"

namespace tsc {

RunSetup::RunSetup(const ExperimentConfig& cfg, const std::string& scenario)
    : plan(cfg.make_plan()),
      sim(cfg.sim),
      profile(cfg.profile_with_scenario(scenario)),
      reward(cfg.reward),
      detector_horizon_s(cfg.actuated.detector_horizon_s) {}

MetricsLog run_days(Controller& controller, const RunSetup& setup,
                    const std::vector<uint64_t>& day_seeds) {
    EnvState env(setup.sim, setup.profile, setup.plan);
    MetricsLog log;

    std::vector<int> queues(setup.plan.n_approaches());
    std::vector<bool> detectors(setup.plan.n_approaches());

    for (uint64_t day_seed : day_seeds) {
        env.sim.set_arrival_process({day_seed, setup.sim.deterministic_arrivals});
        double ttt = 0.0;
        for (int64_t s = 0; s < kSecondsPerDay; ++s) {
            for (int a = 0; a < setup.plan.n_approaches(); ++a) {
                queues[a] = env.sim.queue_length(a);
                detectors[a] =
                    env.sim.detector_presence(a, env.clock.t, setup.detector_horizon_s);
            }
            const ActionMask mask = valid_actions(env.signal, setup.plan);
            const ControlContext ctx{queues,     detectors, env.signal,
                                     setup.plan, env.clock, mask};
            const Action action = controller.step(ctx);
            EnvStepResult res = env_step(env, action, setup.plan, setup.reward);

            if (env.sim.total_arrived() !=
                env.sim.vehicles_in_system() + env.sim.total_departed())
                throw SafetyViolation("vehicle conservation violated at t=" +
                                      std::to_string(res.outcome.t));

            ttt += static_cast<double>(env.sim.vehicles_in_system());
            for (const Vehicle& v : res.outcome.departed)
                log.vehicles.push_back({v.id, v.approach, v.arrival_s, v.at_stopline_s, v.depart_s});
            if (setup.keep_ticks) {
                TickRecord tr;
                tr.t = res.outcome.t;
                tr.queues.resize(setup.plan.n_approaches());
                for (int a = 0; a < setup.plan.n_approaches(); ++a)
                    tr.queues[a] = res.outcome.approaches[a].queue_after;
                tr.reward = res.reward;
                tr.ring0_phase = res.signal_shown.rings[0].phase_id;
                tr.ring0_interval = res.signal_shown.rings[0].interval;
                log.ticks.push_back(std::move(tr));
            }
        }
        log.daily_ttt_s.push_back(ttt);
    }

    log.end_s = env.clock.t;
    for (const Vehicle& v : env.sim.vehicles_in_flight())
        log.vehicles.push_back({v.id, v.approach, v.arrival_s, v.at_stopline_s, -1});
    std::sort(log.vehicles.begin(), log.vehicles.end(),
              [](const VehicleRecord& a, const VehicleRecord& b) { return a.id < b.id; });
    log.total_arrived = env.sim.total_arrived();
    log.total_departed = env.sim.total_departed();
    return log;
}

std::vector<uint64_t> evaluation_seeds(uint64_t master_seed, int n_days) {
    std::vector<uint64_t> seeds;
    for (int d = 0; d < n_days; ++d)
        seeds.push_back(hash_combine(hash_combine(master_seed, kEvalStreamTag),
                                     static_cast<uint64_t>(d)));
    return seeds;
}

TrainArtifacts train_experiment(const ExperimentConfig& cfg, const std::string& out_dir,
                                int override_size, const std::string& suffix) {
    std::filesystem::create_directories(out_dir);

    TrainingSetup ts{cfg.make_plan(), cfg.sim,     cfg.volumes,       cfg.reward,
                     override_size != 0 ? override_size : cfg.encoder_size,
                     cfg.train,      cfg.epsilon, cfg.training_days, cfg.seed};

    std::ofstream step_csv(out_dir + "/train_log" + suffix + ".csv", std::ios::binary);
    if (!step_csv) throw ConfigError("cannot write training log in " + out_dir);
    step_csv << "step,sim_second,epsilon,loss,mean_reward\n";

    TrainingResult result = run_training(ts, [&](const StepLogRow& row) {
        step_csv << row.step << ',' << row.t << ',' << format_fixed(row.epsilon) << ','
                 << format_fixed(row.loss) << ',' << format_fixed(row.mean_reward) << '\n';
    });

    TrainArtifacts art;
    art.checkpoint = {result.spec, result.params, result.train_steps, ts.encoder_size, cfg.seed};
    art.days = result.days;
    save_checkpoint(art.checkpoint, out_dir + "/checkpoint" + suffix + ".json");
    write_daily_ttt_csv(art.days, out_dir + "/daily_ttt" + suffix + ".csv");
    return art;
}

const CompareEntry& CompareResult::by_name(const std::string& name) const {
    for (const CompareEntry& e : entries)
        if (e.name == name) return e;
    throw ConfigError("no comparison entry named " + name);
}

double CompareResult::reduction_pct(const std::string& name, const std::string& baseline) const {
    const double a = by_name(name).mean_delay_s;
    const double b = by_name(baseline).mean_delay_s;
    if (b == 0.0) return 0.0;
    return (b - a) / b * 100.0;
}

CompareResult compare_controllers(const ExperimentConfig& cfg, const Checkpoint& ck,
                                  const std::string& scenario) {
    RunSetup setup(cfg, scenario);
    const std::vector<uint64_t> seeds = evaluation_seeds(cfg.seed, cfg.evaluation_days);
    const EncoderLayout layout = layout_for(ck.encoder_size, setup.plan, setup.plan.n_approaches());
    const FixedTimeSchedule fixed_sched = cfg.make_fixed_schedule();

    CompareResult result;
    if (!scenario.empty()) {
        for (const ScenarioOverride& o : cfg.scenarios.at(scenario)) {
            result.window_start_s = result.window_start_s < 0
                                        ? o.start_s
                                        : std::min(result.window_start_s, o.start_s);
            result.window_end_s = std::max(result.window_end_s, o.end_s);
        }
    }

    auto evaluate = [&](Controller& ctl) {
        MetricsLog log = run_days(ctl, setup, seeds);
        CompareEntry e;
        e.name = ctl.name();
        e.mean_delay_s = log.mean_delay_s();
        e.vehicles = static_cast<int64_t>(log.vehicles.size());
        e.ttt_s = log.total_travel_time_s();
        e.bins = log.binned_delay();
        if (result.window_start_s >= 0)
            e.window_mean_delay_s =
                log.window_mean_delay_s(result.window_start_s, result.window_end_s);
        result.entries.push_back(std::move(e));
    };

    DrlController drl(ck.spec, ck.params, layout);
    evaluate(drl);
    SemiActuatedController actuated(cfg.actuated, fixed_sched, setup.plan);
    evaluate(actuated);
    FixedTimeController fixed(fixed_sched, setup.plan);
    evaluate(fixed);
    return result;
}

std::string format_fixed(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

namespace {

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot write " + path);
    return f;
}

}  // namespace

void write_vehicles_csv(const MetricsLog& log, const std::string& path) {
    auto f = open_out(path);
    f << "vehicle_id,approach,arrival_s,at_stopline_s,depart_s,delay_s\n";
    for (const VehicleRecord& v : log.vehicles) {
        f << v.id << ',' << v.approach << ',' << v.arrival_s << ',' << v.at_stopline_s << ',';
        if (v.depart_s >= 0)
            f << v.depart_s;
        f << ',' << log.vehicle_delay(v) << '\n';
    }
}

void write_ticks_csv(const MetricsLog& log, const std::string& path) {
    auto f = open_out(path);
    f << "t,reward,ring1_phase,ring1_interval";
    if (!log.ticks.empty())
        for (size_t a = 0; a < log.ticks.front().queues.size(); ++a) f << ",queue_" << a;
    f << '\n';
    for (const TickRecord& tr : log.ticks) {
        f << tr.t << ',' << format_fixed(tr.reward) << ',' << tr.ring0_phase << ','
          << to_string(tr.ring0_interval);
        for (int q : tr.queues) f << ',' << q;
        f << '\n';
    }
}

void write_daily_ttt_csv(const std::vector<DayStats>& days, const std::string& path) {
    auto f = open_out(path);
    f << "day,total_travel_time_s,vehicles_departed,mean_delay_s,mean_loss,epsilon_end\n";
    for (const DayStats& d : days)
        f << d.day << ',' << format_fixed(d.total_travel_time_s) << ',' << d.vehicles_departed
          << ',' << format_fixed(d.mean_delay_s) << ',' << format_fixed(d.mean_loss) << ','
          << format_fixed(d.epsilon_end) << '\n';
}

void write_compare_bins_csv(const CompareResult& r, const std::string& path) {
    auto f = open_out(path);
    f << "bin_start_s,in_scenario_window";
    for (const CompareEntry& e : r.entries)
        f << ',' << e.name << "_mean_delay_s," << e.name << "_vehicles";
    f << '\n';
    for (int b = 0; b < kDelayBins; ++b) {
        const int64_t start = static_cast<int64_t>(b) * kDelayBinSeconds;
        const bool in_window =
            r.window_start_s >= 0 && start >= r.window_start_s && start < r.window_end_s;
        f << start << ',' << (in_window ? 1 : 0);
        for (const CompareEntry& e : r.entries)
            f << ',' << format_fixed(e.bins.mean_delay_s[b]) << ',' << e.bins.vehicles[b];
        f << '\n';
    }
}

void write_compare_summary_csv(const CompareResult& r, const std::string& path) {
    auto f = open_out(path);
    f << "controller,mean_delay_s,vehicles,total_travel_time_s,window_mean_delay_s,"
         "reduction_vs_fixed_time_pct,reduction_vs_semi_actuated_pct\n";
    for (const CompareEntry& e : r.entries) {
        f << e.name << ',' << format_fixed(e.mean_delay_s) << ',' << e.vehicles << ','
          << format_fixed(e.ttt_s) << ',' << format_fixed(e.window_mean_delay_s) << ','
          << format_fixed(r.reduction_pct(e.name, "fixed_time")) << ','
          << format_fixed(r.reduction_pct(e.name, "semi_actuated")) << '\n';
    }
}

void write_svg_plot(const std::string& path, const std::string& title,
                    const std::string& x_label, const std::string& y_label,
                    const std::vector<PlotSeries>& series) {
    const int w = 860, h = 480, ml = 70, mr = 20, mt = 40, mb = 50;
    double xmin = 1e300, xmax = -1e300, ymin = 1e300, ymax = -1e300;
    for (const PlotSeries& s : series)
        for (size_t i = 0; i < s.x.size(); ++i) {
            xmin = std::min(xmin, s.x[i]);
            xmax = std::max(xmax, s.x[i]);
            ymin = std::min(ymin, s.y[i]);
            ymax = std::max(ymax, s.y[i]);
        }
    if (xmin > xmax) {
        xmin = 0;
        xmax = 1;
        ymin = 0;
        ymax = 1;
    }
    if (xmax == xmin) xmax = xmin + 1;
    if (ymax == ymin) ymax = ymin + 1;
    ymin = std::min(ymin, 0.0);

    auto px = [&](double x) { return ml + (x - xmin) / (xmax - xmin) * (w - ml - mr); };
    auto py = [&](double y) { return h - mb - (y - ymin) / (ymax - ymin) * (h - mt - mb); };

    auto f = open_out(path);
    f << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h
      << "\" viewBox=\"0 0 " << w << ' ' << h << "\">\n";
    f << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    f << "<text x=\"" << w / 2 << "\" y=\"20\" text-anchor=\"middle\" font-size=\"15\">" << title
      << "</text>\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << h - mb << "\" x2=\"" << w - mr << "\" y2=\""
      << h - mb << "\" stroke=\"black\"/>\n";
    f << "<line x1=\"" << ml << "\" y1=\"" << mt << "\" x2=\"" << ml << "\" y2=\"" << h - mb
      << "\" stroke=\"black\"/>\n";
    for (int i = 0; i <= 4; ++i) {
        const double xv = xmin + (xmax - xmin) * i / 4.0;
        const double yv = ymin + (ymax - ymin) * i / 4.0;
        f << "<text x=\"" << px(xv) << "\" y=\"" << h - mb + 18
          << "\" text-anchor=\"middle\" font-size=\"11\">" << format_fixed(xv) << "</text>\n";
        f << "<text x=\"" << ml - 8 << "\" y=\"" << py(yv) + 4
          << "\" text-anchor=\"end\" font-size=\"11\">" << format_fixed(yv) << "</text>\n";
    }
    f << "<text x=\"" << w / 2 << "\" y=\"" << h - 12
      << "\" text-anchor=\"middle\" font-size=\"12\">" << x_label << "</text>\n";
    f << "<text x=\"16\" y=\"" << h / 2
      << "\" text-anchor=\"middle\" font-size=\"12\" transform=\"rotate(-90 16 " << h / 2
      << ")\">" << y_label << "</text>\n";
    int li = 0;
    for (const PlotSeries& s : series) {
        f << "<polyline fill=\"none\" stroke=\"" << s.color << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < s.x.size(); ++i)
            f << px(s.x[i]) << ',' << py(s.y[i]) << (i + 1 < s.x.size() ? " " : "");
        f << "\"/>\n";
        f << "<text x=\"" << w - mr - 150 << "\" y=\"" << mt + 16 * li
          << "\" font-size=\"12\" fill=\"" << s.color << "\">" << s.label << "</text>\n";
        ++li;
    }
    f << "</svg>\n";
}

}  // namespace tsc
