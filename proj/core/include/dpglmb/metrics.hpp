#pragma once

#include "dpglmb/types.hpp"

#include <Eigen/Dense>

#include <map>
#include <vector>

namespace dpglmb {

struct MetricConfig {
    double cutoff = 100.0;  // c, meters
    double order = 1.0;     // p
    int window = 10;        // w, steps (OSPA^2 only)

    void validate() const;
};

struct OspaValue {
    double total = 0.0;
    double localization = 0.0;
    double cardinality = 0.0;
};

/// OSPA between two point sets using Euclidean distance on the first two
/// coordinates (positions). Components satisfy total^p = loc^p + card^p.
OspaValue ospa(const std::vector<Eigen::VectorXd>& x, const std::vector<Eigen::VectorXd>& y, const MetricConfig& cfg);

/// OSPA for a precomputed distance matrix (rows: first set, cols: second set).
/// Distances are cut off at cfg.cutoff internally.
OspaValue ospa_from_distances(const Eigen::MatrixXd& distances, const MetricConfig& cfg);

/// Tracks keyed by label; each track maps step -> state (gaps allowed).
using TrackHistory = std::map<int, Eigen::VectorXd>;
using LabeledTrackSet = std::map<Label, TrackHistory>;

/// OSPA^2 at step t over the window [max(1, t-w+1), t]. Between two tracks the
/// base distance is the order-p mean over the window of the per-step cutoff
/// distance (c when only one is present, 0 when neither is), divided by the
/// window length. Tracks with no state inside the window are ignored.
OspaValue ospa2(const LabeledTrackSet& a, const LabeledTrackSet& b, int t, const MetricConfig& cfg);

}  // namespace dpglmb
