#pragma once

#include "dpglmb/config.hpp"
#include "dpglmb/glmb.hpp"
#include "dpglmb/metrics.hpp"
#include "dpglmb/sim.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace dpglmb {

/// Filesystem failure while writing or reading results (CLI exit code 2).
class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct StepRecord {
    int time = 0;
    std::size_t true_cardinality = 0;
    std::size_t estimated_cardinality = 0;
    OspaValue ospa;
    OspaValue ospa2;
    double detection_probability = 0.0;
    double clutter_rate = 0.0;
    double seconds = 0.0;  // wall clock, reported in JSON only
};

struct RunResult {
    int run_index = 0;
    std::uint64_t seed = 0;
    bool completed = false;
    std::string error;
    std::vector<StepRecord> steps;
    /// Estimated tracks per step (index = time - 1).
    std::vector<std::vector<TrackEstimate>> tracks;
    std::size_t fallback_count = 0;
    double seconds = 0.0;
};

/// Across-run mean and sample standard deviation of one per-step quantity.
struct Moments {
    double mean = 0.0;
    double stddev = 0.0;
};

struct AggregateRow {
    int time = 0;
    double true_cardinality = 0.0;
    Moments estimated_cardinality;
    Moments ospa;
    Moments ospa_loc;
    Moments ospa_card;
    Moments ospa2;
    Moments ospa2_loc;
    Moments ospa2_card;
    Moments detection_probability;
    Moments clutter_rate;
};

struct ExperimentResult {
    ExperimentConfig config;
    std::vector<RunResult> runs;
    std::vector<AggregateRow> aggregate;
    double seconds = 0.0;
};

/// Seed of run r: base_seed + r.
std::uint64_t run_seed(const ExperimentConfig& cfg, int run_index);

/// One Monte Carlo run of the configured filter on a fixed scenario. Frames
/// depend only on the run seed, so both filter variants see the same data.
RunResult run_single(const ExperimentConfig& cfg, const Scenario& scenario, int run_index);

/// All runs on a pool of cfg.workers threads, then aggregation over the runs
/// that completed. Failed runs are kept with their error message.
ExperimentResult run_experiment(const ExperimentConfig& cfg, std::ostream* log = nullptr);

std::vector<AggregateRow> aggregate_runs(const std::vector<RunResult>& runs);

/// Writes run_XXX.csv, run_XXX_tracks.csv, aggregate.csv and results.json.
void emit_results(const ExperimentResult& result, const std::filesystem::path& out_dir);

void write_run_csv(std::ostream& os, const RunResult& run);
void write_tracks_csv(std::ostream& os, const RunResult& run);
void write_aggregate_csv(std::ostream& os, const std::vector<AggregateRow>& rows);
std::string results_json(const ExperimentResult& result);

/// Reloads runs and aggregate from results.json (the config is kept only as its echo).
struct LoadedResults {
    std::vector<RunResult> runs;
    std::vector<AggregateRow> aggregate;
};
LoadedResults load_results_json(const std::filesystem::path& path);

/// Ground truth as "time,label,x0,x1,..." rows.
void write_truth_csv(std::ostream& os, const Scenario& scenario);
void write_frames_csv(std::ostream& os, const std::vector<MeasurementFrame>& frames);

/// Per-step states keyed by label, read from a truth or tracks CSV.
struct TrackTable {
    LabeledTrackSet tracks;
    int last_time = 0;
};
TrackTable read_track_csv(const std::filesystem::path& path);

struct ScoreRow {
    int time = 0;
    OspaValue ospa;
    OspaValue ospa2;
};
/// OSPA and OSPA^2 per step 1..horizon between two labeled track tables.
std::vector<ScoreRow> score_tracks(const TrackTable& truth, const TrackTable& estimate, const MetricConfig& cfg,
                                   int horizon);

}  // namespace dpglmb
