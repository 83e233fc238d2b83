#include "dpglmb/harness.hpp"

#include "dpglmb/errors.hpp"
#include "dpglmb/pipeline.hpp"
#include "dpglmb/rng.hpp"

#include <nlohmann/json.hpp>

#include <atomic>
#include <chrono>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

namespace dpglmb {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(double v) {
    char buf[64];
    const auto r = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, r.ptr);
}

std::vector<Eigen::VectorXd> states_of(const std::vector<TrackEstimate>& tracks) {
    std::vector<Eigen::VectorXd> out;
    out.reserve(tracks.size());
    for (const auto& t : tracks) out.push_back(t.mean);
    return out;
}

BirthModel truth_births(const Scenario& scenario, double existence, const MatrixXd& covariance) {
    BirthModel b;
    for (const auto& t : scenario.tracks) {
        b.entries.push_back({Label{}, existence, GaussianMixture::single(Gaussian(t.initial_state, covariance))});
    }
    return b;
}

Moments moments(const std::vector<double>& v) {
    Moments m;
    if (v.empty()) return m;
    double s = 0.0;
    for (double x : v) s += x;
    m.mean = s / static_cast<double>(v.size());
    if (v.size() > 1) {
        double ss = 0.0;
        for (double x : v) ss += (x - m.mean) * (x - m.mean);
        m.stddev = std::sqrt(ss / static_cast<double>(v.size() - 1));
    }
    return m;
}

std::ofstream open_for_write(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write '" + path.string() + "'");
    return out;
}

void check_written(std::ofstream& out, const std::filesystem::path& path) {
    out.flush();
    if (!out) throw IoError("failed while writing '" + path.string() + "'");
}

std::string run_name(int index) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "run_%03d", index);
    return buf;
}

nlohmann::json ospa_json(const OspaValue& v) { return {v.total, v.localization, v.cardinality}; }

OspaValue ospa_from_json(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>(), j.at(2).get<double>()}; }

nlohmann::json moments_json(const Moments& m) { return {m.mean, m.stddev}; }

Moments moments_from_json(const nlohmann::json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

std::uint64_t run_seed(const ExperimentConfig& cfg, int run_index) {
    return cfg.base_seed + static_cast<std::uint64_t>(run_index);
}

RunResult run_single(const ExperimentConfig& cfg, const Scenario& scenario, int run_index) {
    const auto start = Clock::now();
    RunResult result;
    result.run_index = run_index;
    result.seed = run_seed(cfg, run_index);

    const Models models{scenario.motion, scenario.sensor};
    PipelineConfig pc = cfg.pipeline;
    const bool ideal = cfg.variant == FilterVariant::IdealGlmb;
    if (ideal && cfg.ideal_static_births) {
        pc.static_births = truth_births(scenario, cfg.ideal_static_existence, pc.birth.covariance);
    }

    try {
        DpGlmbState state = initial_pipeline_state(pc);
        LabeledTrackSet truth_set;
        LabeledTrackSet estimate_set;
        for (int t = 1; t <= scenario.duration; ++t) {
            const MeasurementFrame frame = simulate_frame(scenario, t, result.seed);
            const std::uint64_t gibbs_seed =
                derive_seed(result.seed, {static_cast<std::uint64_t>(Stream::Gibbs), static_cast<std::uint64_t>(t)});

            const auto step_start = Clock::now();
            auto [next, record] = ideal ? run_ideal_glmb_step(state, frame.measurements, models, pc, gibbs_seed)
                                        : dp_glmb_step(state, frame.measurements, models, pc, gibbs_seed);
            const double step_seconds = seconds_since(step_start);
            state = std::move(next);

            const auto truth = scenario.alive_at(t);
            std::vector<Eigen::VectorXd> truth_states;
            for (const auto& [label, x] : truth) {
                truth_states.push_back(x);
                truth_set[label][t] = x;
            }
            for (const auto& e : record.tracks) estimate_set[e.label][t] = e.mean;

            StepRecord s;
            s.time = t;
            s.true_cardinality = truth.size();
            s.estimated_cardinality = record.cardinality;
            s.ospa = ospa(states_of(record.tracks), truth_states, cfg.metrics);
            s.ospa2 = ospa2(estimate_set, truth_set, t, cfg.metrics);
            s.detection_probability = record.detection_probability;
            s.clutter_rate = record.clutter_rate;
            s.seconds = step_seconds;
            result.steps.push_back(s);
            result.tracks.push_back(std::move(record.tracks));
        }
        result.fallback_count = state.fallback_count;
        result.completed = true;
    } catch (const std::exception& e) {
        result.error = e.what();
    }
    result.seconds = seconds_since(start);
    return result;
}

std::vector<AggregateRow> aggregate_runs(const std::vector<RunResult>& runs) {
    std::vector<const RunResult*> done;
    for (const auto& r : runs) {
        if (r.completed) done.push_back(&r);
    }
    std::vector<AggregateRow> rows;
    if (done.empty()) return rows;
    const std::size_t horizon = done.front()->steps.size();
    for (const RunResult* r : done) {
        if (r->steps.size() != horizon) throw ContractViolation("aggregate_runs: runs have different lengths");
    }
    for (std::size_t k = 0; k < horizon; ++k) {
        auto collect = [&](auto field) {
            std::vector<double> v;
            v.reserve(done.size());
            for (const RunResult* r : done) v.push_back(field(r->steps[k]));
            return moments(v);
        };
        AggregateRow row;
        row.time = done.front()->steps[k].time;
        row.true_cardinality = collect([](const StepRecord& s) { return static_cast<double>(s.true_cardinality); }).mean;
        row.estimated_cardinality = collect([](const StepRecord& s) { return static_cast<double>(s.estimated_cardinality); });
        row.ospa = collect([](const StepRecord& s) { return s.ospa.total; });
        row.ospa_loc = collect([](const StepRecord& s) { return s.ospa.localization; });
        row.ospa_card = collect([](const StepRecord& s) { return s.ospa.cardinality; });
        row.ospa2 = collect([](const StepRecord& s) { return s.ospa2.total; });
        row.ospa2_loc = collect([](const StepRecord& s) { return s.ospa2.localization; });
        row.ospa2_card = collect([](const StepRecord& s) { return s.ospa2.cardinality; });
        row.detection_probability = collect([](const StepRecord& s) { return s.detection_probability; });
        row.clutter_rate = collect([](const StepRecord& s) { return s.clutter_rate; });
        rows.push_back(row);
    }
    return rows;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log) {
    cfg.validate();
    const auto start = Clock::now();
    const Scenario scenario = make_scenario(cfg.scenario);

    ExperimentResult result;
    result.config = cfg;
    result.runs.resize(static_cast<std::size_t>(cfg.runs));

    std::atomic<int> next{0};
    std::mutex log_mutex;
    auto worker = [&] {
        for (int r = next++; r < cfg.runs; r = next++) {
            result.runs[static_cast<std::size_t>(r)] = run_single(cfg, scenario, r);
            if (log) {
                const auto& rr = result.runs[static_cast<std::size_t>(r)];
                std::lock_guard lock(log_mutex);
                *log << run_name(r) << (rr.completed ? " done" : " FAILED: " + rr.error) << " (" << std::fixed
                     << std::setprecision(1) << rr.seconds << " s)" << std::defaultfloat << '\n';
            }
        }
    };
    const int workers = std::min(cfg.workers, cfg.runs);
    std::vector<std::thread> pool;
    for (int w = 1; w < workers; ++w) pool.emplace_back(worker);
    worker();
    for (auto& t : pool) t.join();

    std::size_t failed = 0;
    for (const auto& r : result.runs) failed += r.completed ? 0 : 1;
    if (failed > 0 && log) *log << "warning: " << failed << " run(s) failed; aggregating the completed runs\n";
    result.aggregate = aggregate_runs(result.runs);
    result.seconds = seconds_since(start);
    return result;
}

void write_run_csv(std::ostream& os, const RunResult& run) {
    os << "time,true_card,est_card,ospa,ospa_loc,ospa_card,ospa2,ospa2_loc,ospa2_card,est_pd,est_lambda\n";
    for (const auto& s : run.steps) {
        os << s.time << ',' << s.true_cardinality << ',' << s.estimated_cardinality << ',' << fmt(s.ospa.total) << ','
           << fmt(s.ospa.localization) << ',' << fmt(s.ospa.cardinality) << ',' << fmt(s.ospa2.total) << ','
           << fmt(s.ospa2.localization) << ',' << fmt(s.ospa2.cardinality) << ',' << fmt(s.detection_probability)
           << ',' << fmt(s.clutter_rate) << '\n';
    }
}

void write_tracks_csv(std::ostream& os, const RunResult& run) {
    os << "time,label,state\n";
    for (std::size_t k = 0; k < run.tracks.size(); ++k) {
        for (const auto& t : run.tracks[k]) {
            os << (k + 1) << ',' << t.label.to_string() << ',';
            for (Eigen::Index i = 0; i < t.mean.size(); ++i) os << (i ? " " : "") << fmt(t.mean(i));
            os << '\n';
        }
    }
}

void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows) {
    os << "time,true_card,mean_est_card,mean_ospa,mean_ospa_loc,mean_ospa_card,mean_ospa2,mean_ospa2_loc,"
          "mean_ospa2_card,mean_est_pd,mean_est_lambda,std_est_card,std_ospa,std_ospa_loc,std_ospa_card,std_ospa2,"
          "std_ospa2_loc,std_ospa2_card,std_est_pd,std_est_lambda\n";
    for (const auto& r : rows) {
        const Moments* cols[] = {&r.estimated_cardinality, &r.ospa,      &r.ospa_loc,  &r.ospa_card,
                                 &r.ospa2,                 &r.ospa2_loc, &r.ospa2_card, &r.detection_probability,
                                 &r.clutter_rate};
        os << r.time << ',' << fmt(r.true_cardinality);
        for (const Moments* m : cols) os << ',' << fmt(m->mean);
        for (const Moments* m : cols) os << ',' << fmt(m->stddev);
        os << '\n';
    }
}

std::string results_json(const ExperimentResult& result) {
    nlohmann::json j;
    j["config"] = result.config.echo();
    j["wall_seconds"] = result.seconds;
    nlohmann::json runs = nlohmann::json::array();
    for (const auto& r : result.runs) {
        nlohmann::json jr;
        jr["run"] = r.run_index;
        jr["seed"] = r.seed;
        jr["completed"] = r.completed;
        jr["error"] = r.error;
        jr["fallback_count"] = r.fallback_count;
        jr["wall_seconds"] = r.seconds;
        nlohmann::json steps = nlohmann::json::array();
        for (const auto& s : r.steps) {
            steps.push_back({{"time", s.time},
                             {"true_card", s.true_cardinality},
                             {"est_card", s.estimated_cardinality},
                             {"ospa", ospa_json(s.ospa)},
                             {"ospa2", ospa_json(s.ospa2)},
                             {"est_pd", s.detection_probability},
                             {"est_lambda", s.clutter_rate},
                             {"step_seconds", s.seconds}});
        }
        jr["steps"] = std::move(steps);
        runs.push_back(std::move(jr));
    }
    j["runs"] = std::move(runs);
    nlohmann::json agg = nlohmann::json::array();
    for (const auto& a : result.aggregate) {
        agg.push_back({{"time", a.time},
                       {"true_card", a.true_cardinality},
                       {"est_card", moments_json(a.estimated_cardinality)},
                       {"ospa", moments_json(a.ospa)},
                       {"ospa_loc", moments_json(a.ospa_loc)},
                       {"ospa_card", moments_json(a.ospa_card)},
                       {"ospa2", moments_json(a.ospa2)},
                       {"ospa2_loc", moments_json(a.ospa2_loc)},
                       {"ospa2_card", moments_json(a.ospa2_card)},
                       {"est_pd", moments_json(a.detection_probability)},
                       {"est_lambda", moments_json(a.clutter_rate)}});
    }
    j["aggregate"] = std::move(agg);
    return j.dump(1);
}

LoadedResults load_results_json(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    LoadedResults out;
    try {
        const nlohmann::json j = nlohmann::json::parse(in);
        for (const auto& jr : j.at("runs")) {
            RunResult r;
            r.run_index = jr.at("run").get<int>();
            r.seed = jr.at("seed").get<std::uint64_t>();
            r.completed = jr.at("completed").get<bool>();
            r.error = jr.at("error").get<std::string>();
            r.fallback_count = jr.at("fallback_count").get<std::size_t>();
            r.seconds = jr.at("wall_seconds").get<double>();
            for (const auto& js : jr.at("steps")) {
                StepRecord s;
                s.time = js.at("time").get<int>();
                s.true_cardinality = js.at("true_card").get<std::size_t>();
                s.estimated_cardinality = js.at("est_card").get<std::size_t>();
                s.ospa = ospa_from_json(js.at("ospa"));
                s.ospa2 = ospa_from_json(js.at("ospa2"));
                s.detection_probability = js.at("est_pd").get<double>();
                s.clutter_rate = js.at("est_lambda").get<double>();
                s.seconds = js.at("step_seconds").get<double>();
                r.steps.push_back(s);
            }
            out.runs.push_back(std::move(r));
        }
        for (const auto& ja : j.at("aggregate")) {
            AggregateRow a;
            a.time = ja.at("time").get<int>();
            a.true_cardinality = ja.at("true_card").get<double>();
            a.estimated_cardinality = moments_from_json(ja.at("est_card"));
            a.ospa = moments_from_json(ja.at("ospa"));
            a.ospa_loc = moments_from_json(ja.at("ospa_loc"));
            a.ospa_card = moments_from_json(ja.at("ospa_card"));
            a.ospa2 = moments_from_json(ja.at("ospa2"));
            a.ospa2_loc = moments_from_json(ja.at("ospa2_loc"));
            a.ospa2_card = moments_from_json(ja.at("ospa2_card"));
            a.detection_probability = moments_from_json(ja.at("est_pd"));
            a.clutter_rate = moments_from_json(ja.at("est_lambda"));
            out.aggregate.push_back(a);
        }
    } catch (const nlohmann::json::exception& e) {
        throw IoError("malformed results file '" + path.string() + "': " + e.what());
    }
    return out;
}

void emit_results(const ExperimentResult& result, const std::filesystem::path& out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw IoError("cannot create output directory '" + out_dir.string() + "': " + ec.message());

    for (const auto& r : result.runs) {
        if (!r.completed) continue;
        const auto run_path = out_dir / (run_name(r.run_index) + ".csv");
        auto run_out = open_for_write(run_path);
        write_run_csv(run_out, r);
        check_written(run_out, run_path);

        const auto tracks_path = out_dir / (run_name(r.run_index) + "_tracks.csv");
        auto tracks_out = open_for_write(tracks_path);
        write_tracks_csv(tracks_out, r);
        check_written(tracks_out, tracks_path);
    }
    const auto agg_path = out_dir / "aggregate.csv";
    auto agg_out = open_for_write(agg_path);
    write_aggregate_csv(agg_out, result.aggregate);
    check_written(agg_out, agg_path);

    const auto json_path = out_dir / "results.json";
    auto json_out = open_for_write(json_path);
    json_out << results_json(result) << '\n';
    check_written(json_out, json_path);
}

void write_truth_csv(std::ostream& os, const Scenario& scenario) {
    os << "time,label,state\n";
    for (int t = 1; t <= scenario.duration; ++t) {
        for (const auto& [label, x] : scenario.alive_at(t)) {
            os << t << ',' << label.to_string() << ',';
            for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? " " : "") << fmt(x(i));
            os << '\n';
        }
    }
}

void write_frames_csv(std::ostream& os, const std::vector<MeasurementFrame>& frames) {
    os << "time,z0,z1,origin\n";
    for (const auto& f : frames) {
        for (std::size_t k = 0; k < f.measurements.size(); ++k) {
            os << f.time << ',' << fmt(f.measurements[k](0)) << ',' << fmt(f.measurements[k](1)) << ','
               << f.provenance[k] << '\n';
        }
    }
}

TrackTable read_track_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot read '" + path.string() + "'");
    TrackTable table;
    std::string line;
    std::getline(in, line);  // header
    int line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto c1 = line.find(',');
        const auto c2 = c1 == std::string::npos ? std::string::npos : line.find(',', c1 + 1);
        if (c2 == std::string::npos) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected 'time,label,state'");
        }
        try {
            const int t = std::stoi(line.substr(0, c1));
            const Label label = parse_label(line.substr(c1 + 1, c2 - c1 - 1));
            std::istringstream ss(line.substr(c2 + 1));
            std::vector<double> v;
            double x = 0.0;
            while (ss >> x) v.push_back(x);
            if (v.size() < 2) throw ContractViolation("state needs at least two coordinates");
            table.tracks[label][t] = Eigen::Map<const VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
            table.last_time = std::max(table.last_time, t);
        } catch (const std::exception& e) {
            throw IoError(path.string() + ":" + std::to_string(line_no) + ": " + e.what());
        }
    }
    return table;
}

std::vector<ScoreRow> score_tracks(const TrackTable& truth, const TrackTable& estimate, const MetricConfig& cfg,
                                   int horizon) {
    std::vector<ScoreRow> rows;
    for (int t = 1; t <= horizon; ++t) {
        std::vector<Eigen::VectorXd> x;
        std::vector<Eigen::VectorXd> y;
        for (const auto& [label, hist] : estimate.tracks) {
            if (auto it = hist.find(t); it != hist.end()) x.push_back(it->second);
        }
        for (const auto& [label, hist] : truth.tracks) {
            if (auto it = hist.find(t); it != hist.end()) y.push_back(it->second);
        }
        rows.push_back({t, ospa(x, y, cfg), ospa2(estimate.tracks, truth.tracks, t, cfg)});
    }
    return rows;
}

}  // namespace dpglmb
