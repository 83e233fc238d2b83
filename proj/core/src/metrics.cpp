#include "dpglmb/metrics.hpp"

#include "dpglmb/assignment.hpp"
#include "dpglmb/errors.hpp"

#include <algorithm>
#include <cmath>

namespace dpglmb {

void MetricConfig::validate() const {
    if (!(cutoff > 0.0)) throw ContractViolation("metric cutoff must be positive");
    if (!(order >= 1.0)) throw ContractViolation("metric order must be at least 1");
    if (window < 1) throw ContractViolation("OSPA^2 window must be at least 1");
}

OspaValue ospa_from_distances(const Eigen::MatrixXd& distances, const MetricConfig& cfg) {
    cfg.validate();
    const auto nx = distances.rows();
    const auto ny = distances.cols();
    if (nx == 0 && ny == 0) return {};
    const double p = cfg.order;
    const double cp = std::pow(cfg.cutoff, p);
    if (nx == 0 || ny == 0) return {cfg.cutoff, 0.0, cfg.cutoff};

    // Assign the smaller set into the larger one.
    const bool transpose = nx > ny;
    const Eigen::MatrixXd d = transpose ? Eigen::MatrixXd(distances.transpose()) : distances;
    const Eigen::MatrixXd cost = d.cwiseMin(cfg.cutoff).array().pow(p).matrix();
    const AssignmentResult assignment = solve_assignment(cost);

    const auto n = static_cast<double>(std::max(nx, ny));
    const auto m = static_cast<double>(std::min(nx, ny));
    // Sum the matched costs in sorted order so the value does not depend on orientation.
    std::vector<double> matched;
    matched.reserve(assignment.row_to_col.size());
    for (std::size_t i = 0; i < assignment.row_to_col.size(); ++i) {
        matched.push_back(cost(static_cast<Eigen::Index>(i), assignment.row_to_col[i]));
    }
    std::sort(matched.begin(), matched.end());
    double matched_sum = 0.0;
    for (double v : matched) matched_sum += v;
    const double loc_p = matched_sum / n;
    const double card_p = cp * (n - m) / n;
    return {std::pow(loc_p + card_p, 1.0 / p), std::pow(loc_p, 1.0 / p), std::pow(card_p, 1.0 / p)};
}

OspaValue ospa(const std::vector<Eigen::VectorXd>& x, const std::vector<Eigen::VectorXd>& y, const MetricConfig& cfg) {
    Eigen::MatrixXd d(static_cast<Eigen::Index>(x.size()), static_cast<Eigen::Index>(y.size()));
    for (std::size_t i = 0; i < x.size(); ++i) {
        for (std::size_t j = 0; j < y.size(); ++j) {
            if (x[i].size() < 2 || y[j].size() < 2) throw ContractViolation("ospa: states need two position coordinates");
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = (x[i].head<2>() - y[j].head<2>()).norm();
        }
    }
    // Symmetry: evaluate in a canonical orientation so ospa(x,y) == ospa(y,x) bit for bit.
    if (x.size() > y.size()) return ospa_from_distances(d.transpose(), cfg);
    return ospa_from_distances(d, cfg);
}

namespace {

std::vector<const TrackHistory*> tracks_in_window(const LabeledTrackSet& set, int t0, int t1) {
    std::vector<const TrackHistory*> out;
    for (const auto& [label, hist] : set) {
        auto it = hist.lower_bound(t0);
        if (it != hist.end() && it->first <= t1) out.push_back(&hist);
    }
    return out;
}

}  // namespace

OspaValue ospa2(const LabeledTrackSet& a, const LabeledTrackSet& b, int t, const MetricConfig& cfg) {
    cfg.validate();
    if (t < 1) throw ContractViolation("ospa2: time step must be at least 1");
    const int t0 = std::max(1, t - cfg.window + 1);
    const int len = t - t0 + 1;
    const auto ta = tracks_in_window(a, t0, t);
    const auto tb = tracks_in_window(b, t0, t);

    const double p = cfg.order;
    const double cp = std::pow(cfg.cutoff, p);
    auto base = [&](const TrackHistory& x, const TrackHistory& y) {
        double acc = 0.0;
        for (int k = t0; k <= t; ++k) {
            const auto ix = x.find(k);
            const auto iy = y.find(k);
            const bool hx = ix != x.end();
            const bool hy = iy != y.end();
            if (hx && hy) {
                acc += std::pow(std::min(cfg.cutoff, (ix->second.head<2>() - iy->second.head<2>()).norm()), p);
            } else if (hx || hy) {
                acc += cp;
            }
        }
        return std::pow(acc / static_cast<double>(len), 1.0 / p);
    };

    // Canonical orientation: smaller set as rows, as in ospa().
    const bool swap = ta.size() > tb.size();
    const auto& rows = swap ? tb : ta;
    const auto& cols = swap ? ta : tb;
    Eigen::MatrixXd d(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(cols.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        for (std::size_t j = 0; j < cols.size(); ++j) {
            d(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = swap ? base(*cols[j], *rows[i]) : base(*rows[i], *cols[j]);
        }
    }
    return ospa_from_distances(d, cfg);
}

}  // namespace dpglmb
