#include "dpglmb/config.hpp"
#include "dpglmb/errors.hpp"
#include "dpglmb/harness.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct RunOptions {
    std::string config;
    std::optional<int> runs;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> filter;
    std::optional<std::size_t> max_hyp;
    std::optional<std::string> out;
    std::optional<int> workers;
};

int cmd_run(const RunOptions& o) {
    dpglmb::ExperimentConfig cfg = dpglmb::load_config(o.config);
    if (o.runs) cfg.runs = *o.runs;
    if (o.seed) cfg.base_seed = *o.seed;
    if (o.filter) cfg.variant = dpglmb::parse_filter_variant(*o.filter);
    if (o.max_hyp) cfg.pipeline.glmb.max_hypotheses = *o.max_hyp;
    if (o.out) cfg.output_dir = *o.out;
    if (o.workers) cfg.workers = *o.workers;
    cfg.validate();

    std::cerr << "running " << cfg.runs << " " << dpglmb::to_string(cfg.variant) << " run(s) on the "
              << dpglmb::to_string(cfg.scenario.kind) << " scenario with " << cfg.workers << " worker(s)\n";
    const auto result = dpglmb::run_experiment(cfg, &std::cerr);
    dpglmb::emit_results(result, cfg.output_dir);
    std::cerr << "results written to " << cfg.output_dir << " (" << result.seconds << " s)\n";
    for (const auto& r : result.runs) {
        if (!r.completed) return kExitRuntime;
    }
    return 0;
}

int cmd_simulate(const std::string& config, const std::string& out) {
    const dpglmb::ExperimentConfig cfg = dpglmb::load_config(config);
    const dpglmb::Scenario scenario = dpglmb::make_scenario(cfg.scenario);
    std::filesystem::create_directories(out);

    std::ofstream truth(std::filesystem::path(out) / "truth.csv");
    if (!truth) throw dpglmb::IoError("cannot write truth.csv in '" + out + "'");
    dpglmb::write_truth_csv(truth, scenario);

    std::vector<dpglmb::MeasurementFrame> frames;
    for (int t = 1; t <= scenario.duration; ++t) {
        frames.push_back(dpglmb::simulate_frame(scenario, t, dpglmb::run_seed(cfg, 0)));
    }
    std::ofstream frames_out(std::filesystem::path(out) / "frames.csv");
    if (!frames_out) throw dpglmb::IoError("cannot write frames.csv in '" + out + "'");
    dpglmb::write_frames_csv(frames_out, frames);
    if (!truth || !frames_out) throw dpglmb::IoError("failed while writing to '" + out + "'");
    return 0;
}

int cmd_metrics(const std::string& truth_path, const std::string& tracks_path, const std::string& config) {
    const dpglmb::ExperimentConfig cfg = dpglmb::load_config(config);
    const auto truth = dpglmb::read_track_csv(truth_path);
    const auto tracks = dpglmb::read_track_csv(tracks_path);
    const int horizon = std::max({truth.last_time, tracks.last_time, cfg.scenario.shape.duration});
    std::cout << "time,ospa,ospa_loc,ospa_card,ospa2,ospa2_loc,ospa2_card\n";
    for (const auto& r : dpglmb::score_tracks(truth, tracks, cfg.metrics, horizon)) {
        std::cout << r.time << ',' << r.ospa.total << ',' << r.ospa.localization << ',' << r.ospa.cardinality << ','
                  << r.ospa2.total << ',' << r.ospa2.localization << ',' << r.ospa2.cardinality << '\n';
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Adaptive GLMB multi-object tracking experiments"};
    app.require_subcommand(1);

    RunOptions run;
    auto* run_cmd = app.add_subcommand("run", "Run Monte Carlo experiments and write CSV/JSON results");
    run_cmd->add_option("--config", run.config, "Configuration file")->required();
    run_cmd->add_option("--runs", run.runs, "Number of Monte Carlo runs");
    run_cmd->add_option("--seed", run.seed, "Base seed (run r uses seed + r)");
    run_cmd->add_option("--filter", run.filter, "dp-glmb or ideal-glmb");
    run_cmd->add_option("--max-hyp", run.max_hyp, "Maximum number of GLMB hypotheses");
    run_cmd->add_option("--out", run.out, "Output directory");
    run_cmd->add_option("--workers", run.workers, "Worker threads");

    std::string sim_config;
    std::string sim_out;
    auto* sim_cmd = app.add_subcommand("simulate", "Write ground truth and one run's measurement frames");
    sim_cmd->add_option("--config", sim_config, "Configuration file")->required();
    sim_cmd->add_option("--out", sim_out, "Output directory")->required();

    std::string truth_path;
    std::string tracks_path;
    std::string metrics_config;
    auto* metrics_cmd = app.add_subcommand("metrics", "Score a track file against ground truth (CSV to stdout)");
    metrics_cmd->add_option("--truth", truth_path, "Ground-truth CSV")->required();
    metrics_cmd->add_option("--tracks", tracks_path, "Estimated tracks CSV")->required();
    metrics_cmd->add_option("--config", metrics_config, "Configuration file (metric parameters)")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        if (*run_cmd) return cmd_run(run);
        if (*sim_cmd) return cmd_simulate(sim_config, sim_out);
        if (*metrics_cmd) return cmd_metrics(truth_path, tracks_path, metrics_config);
    } catch (const dpglmb::ConfigError& e) {
        std::cerr << "configuration error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
