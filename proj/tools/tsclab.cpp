// Command-line front end: train the control policy, evaluate a checkpoint,
// compare it against the fixed-time and semi-actuated baselines, or dump
// the state encoding for inspection.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tsc/config.hpp"
#include "tsc/harness.hpp"

using namespace tsc;

namespace {

ExperimentConfig load_config(const std::string& path) {
    if (path.empty()) return ExperimentConfig::defaults();
    return ExperimentConfig::load(path);
}

void plot_daily_ttt(const std::vector<std::vector<DayStats>>& runs,
                    const std::vector<std::string>& labels, const std::string& path) {
    const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c"};
    std::vector<PlotSeries> series;
    for (size_t i = 0; i < runs.size(); ++i) {
        PlotSeries s;
        s.label = labels[i];
        s.color = colors[i % colors.size()];
        for (const DayStats& d : runs[i]) {
            s.x.push_back(static_cast<double>(d.day));
            s.y.push_back(d.total_travel_time_s);
        }
        series.push_back(std::move(s));
    }
    write_svg_plot(path, "Total travel time over simulated days", "training day",
                   "total travel time (veh-s)", series);
}

void plot_binned_delay(const CompareResult& result, const std::string& path) {
    const std::vector<std::string> colors = {"#1f77b4", "#d62728", "#2ca02c"};
    std::vector<PlotSeries> series;
    for (size_t i = 0; i < result.entries.size(); ++i) {
        PlotSeries s;
        s.label = result.entries[i].name;
        s.color = colors[i % colors.size()];
        for (int b = 0; b < kDelayBins; ++b) {
            s.x.push_back(static_cast<double>(b * kDelayBinSeconds) / 3600.0);
            s.y.push_back(result.entries[i].bins.mean_delay_s[b]);
        }
        series.push_back(std::move(s));
    }
    write_svg_plot(path, "Average delay by 15-minute bin", "hour of day", "average delay (s)",
                   series);
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"single-intersection signal control workbench"};
    app.require_subcommand(1);

    std::string config_path, checkpoint_path, out_dir = "out", scenario, size_arg = "config";
    uint64_t seed = 0;
    bool has_seed = false;
    int days = 0;
    bool plots = false;

    auto* train = app.add_subcommand("train", "train the control policy");
    train->add_option("--config", config_path, "experiment config JSON");
    train->add_option("--days", days, "override training days");
    train->add_option("--seed", seed, "override master seed")->each([&](std::string) {
        has_seed = true;
    });
    train->add_option("--out", out_dir, "output directory");
    train->add_option("--size", size_arg, "network/state size: 80, 24, config or both");
    train->add_flag("--plots", plots, "write SVG plots");

    auto* evaluate = app.add_subcommand("evaluate", "run a trained checkpoint by itself");
    evaluate->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
    evaluate->add_option("--config", config_path, "experiment config JSON");
    evaluate->add_option("--scenario", scenario, "volume scenario name");
    evaluate->add_option("--out", out_dir, "output directory");

    auto* compare = app.add_subcommand("compare", "trained policy vs baseline controllers");
    compare->add_option("--checkpoint", checkpoint_path, "checkpoint JSON")->required();
    compare->add_option("--config", config_path, "experiment config JSON");
    compare->add_option("--scenario", scenario, "volume scenario name");
    compare->add_option("--out", out_dir, "output directory");
    compare->add_flag("--plots", plots, "write SVG plots");

    auto* dump = app.add_subcommand("dump-state", "render one encoded state matrix");
    int dump_size = 24;
    std::vector<int> dump_queues = {0, 0, 0, 0};
    int64_t dump_second = 0;
    int dump_weekday = 0;
    int dump_phase = 1;
    std::string dump_interval = "green", bits_path;
    bool ascii = true;
    dump->add_option("--config", config_path, "experiment config JSON");
    dump->add_option("--size", dump_size, "matrix size (80 or 24)");
    dump->add_option("--queues", dump_queues, "queue length per approach")
        ->expected(4)
        ->delimiter(',');
    dump->add_option("--second", dump_second, "second of day");
    dump->add_option("--weekday", dump_weekday, "day of week, 0-6");
    dump->add_option("--phase", dump_phase, "active ring-1 phase position (1 or 2)");
    dump->add_option("--interval", dump_interval, "green, yellow or all_red");
    dump->add_flag("--ascii,!--no-ascii", ascii, "print the matrix as ASCII art");
    dump->add_option("--bits", bits_path, "write the packed row-major bitmap here");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*train) {
            ExperimentConfig cfg = load_config(config_path);
            if (has_seed) cfg.seed = seed;
            if (days > 0) cfg.training_days = days;
            cfg.validate();
            std::vector<std::vector<DayStats>> runs;
            std::vector<std::string> labels;
            auto run_one = [&](int size, const std::string& suffix) {
                TrainArtifacts art = train_experiment(cfg, out_dir, size, suffix);
                std::printf("trained %d days (size %d), %lld gradient steps -> %s\n",
                            cfg.training_days, art.checkpoint.encoder_size,
                            static_cast<long long>(art.checkpoint.train_steps),
                            (out_dir + "/checkpoint" + suffix + ".json").c_str());
                runs.push_back(art.days);
                labels.push_back(std::to_string(art.checkpoint.encoder_size) + "x" +
                                 std::to_string(art.checkpoint.encoder_size));
            };
            if (size_arg == "both") {
                run_one(80, "_80");
                run_one(24, "_24");
            } else if (size_arg == "config") {
                run_one(0, "");
            } else {
                run_one(std::stoi(size_arg), "");
            }
            if (plots) plot_daily_ttt(runs, labels, out_dir + "/daily_ttt.svg");
        } else if (*evaluate) {
            ExperimentConfig cfg = load_config(config_path);
            Checkpoint ck = load_checkpoint(checkpoint_path);
            RunSetup setup(cfg, scenario);
            setup.keep_ticks = true;
            DrlController ctl(ck.spec, ck.params,
                              layout_for(ck.encoder_size, setup.plan, setup.plan.n_approaches()));
            MetricsLog log = run_days(ctl, setup, evaluation_seeds(cfg.seed, cfg.evaluation_days));
            std::filesystem::create_directories(out_dir);
            write_vehicles_csv(log, out_dir + "/vehicles.csv");
            write_ticks_csv(log, out_dir + "/ticks.csv");
            std::printf("evaluated %d day(s): %lld vehicles, mean delay %s s\n",
                        cfg.evaluation_days, static_cast<long long>(log.vehicles.size()),
                        format_fixed(log.mean_delay_s()).c_str());
        } else if (*compare) {
            ExperimentConfig cfg = load_config(config_path);
            Checkpoint ck = load_checkpoint(checkpoint_path);
            CompareResult result = compare_controllers(cfg, ck, scenario);
            std::filesystem::create_directories(out_dir);
            write_compare_bins_csv(result, out_dir + "/compare_bins.csv");
            write_compare_summary_csv(result, out_dir + "/compare_summary.csv");
            if (plots) plot_binned_delay(result, out_dir + "/compare_delay.svg");
            for (const CompareEntry& e : result.entries)
                std::printf("%-14s mean delay %8s s over %lld vehicles\n", e.name.c_str(),
                            format_fixed(e.mean_delay_s).c_str(),
                            static_cast<long long>(e.vehicles));
            std::printf("drl vs fixed_time: %s%% lower delay\n",
                        format_fixed(result.reduction_pct("drl", "fixed_time")).c_str());
            std::printf("drl vs semi_actuated: %s%% lower delay\n",
                        format_fixed(result.reduction_pct("drl", "semi_actuated")).c_str());
        } else if (*dump) {
            ExperimentConfig cfg = load_config(config_path);
            RingBarrierPlan plan = cfg.make_plan();
            EncoderLayout layout = layout_for(dump_size, plan, plan.n_approaches());
            RingBarrierState sig = initial_state(plan);
            if (dump_phase < 1 || dump_phase > 2) throw ConfigError("--phase must be 1 or 2");
            for (int r = 0; r < 2; ++r) {
                sig.rings[r].phase_id = plan.ring_sequence(r)[dump_phase - 1];
                if (dump_interval == "green")
                    sig.rings[r].interval = Interval::Green;
                else if (dump_interval == "yellow")
                    sig.rings[r].interval = Interval::Yellow;
                else if (dump_interval == "all_red")
                    sig.rings[r].interval = Interval::AllRed;
                else
                    throw ConfigError("--interval must be green, yellow or all_red");
            }
            SimClock clock{static_cast<int64_t>(dump_weekday) * kSecondsPerDay + dump_second};
            StateMatrix m = encode(dump_queues, sig, clock, layout, plan);
            if (ascii) std::fputs(m.ascii().c_str(), stdout);
            if (!bits_path.empty()) {
                auto bytes = m.packed_bytes();
                std::ofstream f(bits_path, std::ios::binary);
                if (!f) throw ConfigError("cannot write " + bits_path);
                f.write(reinterpret_cast<const char*>(bytes.data()),
                        static_cast<std::streamsize>(bytes.size()));
            }
        }
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
