#include "dpglmb/glmb.hpp"

#include "dpglmb/errors.hpp"
#include "dpglmb/rng.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <unordered_map>

namespace dpglmb {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

// Predicted (or birth) density of one row source, with the innovation of each
// mixture component and the gated per-measurement log-likelihoods.
struct RowSource {
    Label label;
    GaussianMixture predicted;
    std::vector<Innovation> innovations;
    std::vector<std::pair<int, double>> log_likelihood;  // (measurement, log sum_k w_k q_k(z))
    CostRow cost;
    PreparedRow prepared;
};

void gate_and_score(RowSource& src, const MeasurementSet& z, const SensorModel& sensor, double gate) {
    src.innovations.reserve(src.predicted.size());
    for (const auto& c : src.predicted.components) src.innovations.push_back(sensor.innovation(c.gaussian));
    std::vector<double> terms;
    for (std::size_t j = 0; j < z.size(); ++j) {
        terms.clear();
        bool inside = false;
        for (std::size_t k = 0; k < src.predicted.size(); ++k) {
            const Innovation& in = src.innovations[k];
            const VectorXd r = sensor.residual(z[j], in.z_pred);
            const double d2 = in.mahalanobis2(r);
            inside = inside || d2 <= gate;
            terms.push_back(safe_log(src.predicted.components[k].weight) + in.log_normalizer - 0.5 * d2);
        }
        if (!inside) continue;
        const double ll = log_sum_exp(terms);
        if (ll > kNegInf) src.log_likelihood.emplace_back(static_cast<int>(j), ll);
    }
}

// log-weight row: not-present, present-and-missed, present-and-detected(z).
CostRow make_row(double log_absent, double log_present, const RowSource& src, double log_pd, double log_qd,
                 double log_kappa) {
    CostRow row;
    row.die = log_absent;
    row.miss = log_present + log_qd;
    row.detections.reserve(src.log_likelihood.size());
    for (const auto& [j, ll] : src.log_likelihood) {
        row.detections.emplace_back(j, log_present + log_pd + ll - log_kappa);
    }
    return row;
}

GaussianMixture updated_density(const RowSource& src, int association, const MeasurementSet& z,
                                const SensorModel& sensor, const ReductionConfig& reduction) {
    if (association < 0) return src.predicted;
    GaussianMixture out;
    std::vector<double> logw;
    for (std::size_t k = 0; k < src.predicted.size(); ++k) {
        const auto& c = src.predicted.components[k];
        const Innovation& in = src.innovations[k];
        const VectorXd r = sensor.residual(z[static_cast<std::size_t>(association)], in.z_pred);
        logw.push_back(safe_log(c.weight) + in.log_likelihood(r));
        out.components.push_back({0.0, condition(c.gaussian, in, r)});
    }
    const double norm = log_sum_exp(logw);
    for (std::size_t k = 0; k < logw.size(); ++k) out.components[k].weight = std::exp(logw[k] - norm);
    if (out.size() > 1) out = gm_reduce(out, reduction);
    return out;
}

struct KeyHash {
    std::size_t operator()(const std::vector<std::int64_t>& key) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (auto v : key) {
            h ^= static_cast<std::size_t>(v);
            h *= 1099511628211ULL;
        }
        return h;
    }
};

struct Candidate {
    std::vector<std::int64_t> key;  // sorted codes source * (m + 1) + (association + 1)
    double log_weight;
};

}  // namespace

GlmbDensity GlmbDensity::empty_set(int time) {
    GlmbDensity d;
    d.time = time;
    d.hypotheses.push_back({{}, 0.0});
    return d;
}

double GlmbDensity::total_weight() const {
    double w = 0.0;
    for (const auto& h : hypotheses) w += std::exp(h.log_weight);
    return w;
}

std::vector<Label> GlmbDensity::labels(const GlmbHypothesis& h) const {
    std::vector<Label> out;
    out.reserve(h.tracks.size());
    for (int idx : h.tracks) out.push_back(track_table.at(static_cast<std::size_t>(idx)).label);
    return out;
}

std::vector<double> GlmbDensity::cardinality_distribution() const {
    std::size_t nmax = 0;
    for (const auto& h : hypotheses) nmax = std::max(nmax, h.tracks.size());
    std::vector<double> card(nmax + 1, 0.0);
    for (const auto& h : hypotheses) card[h.tracks.size()] += std::exp(h.log_weight);
    return card;
}

GlmbDensity joint_predict_update(const GlmbDensity& prior, const MeasurementSet& measurements, const BirthModel& births,
                                 const MotionModel& motion, const SensorModel& sensor, const FilterParams& params,
                                 std::uint64_t seed) {
    if (prior.hypotheses.empty()) throw ContractViolation("joint_predict_update: prior has no hypotheses");
    if (!(params.detection_probability > 0.0 && params.detection_probability < 1.0)) {
        throw ContractViolation("joint_predict_update: detection probability must lie in (0,1)");
    }
    if (!(params.clutter_rate > 0.0 && params.clutter_density > 0.0)) {
        throw ContractViolation("joint_predict_update: clutter rate and density must be positive");
    }
    if (params.max_hypotheses == 0) throw ContractViolation("joint_predict_update: max_hypotheses must be positive");
    if (motion.state_dim() != sensor.state_dim()) {
        throw ContractViolation("joint_predict_update: motion and sensor state dimensions differ");
    }

    const int time = prior.time + 1;
    const int m = static_cast<int>(measurements.size());
    const double log_pd = std::log(params.detection_probability);
    const double log_qd = std::log1p(-params.detection_probability);
    const double log_kappa = std::log(params.clutter_rate * params.clutter_density);
    const double ps = motion.survival_probability();
    const double log_ps = safe_log(ps);
    const double log_not_ps = safe_log(1.0 - ps);

    // Row sources: prior table entries first, then births with r_B > 0.
    const std::size_t n_table = prior.track_table.size();
    std::vector<char> referenced(n_table, 0);
    for (const auto& h : prior.hypotheses) {
        for (int idx : h.tracks) referenced.at(static_cast<std::size_t>(idx)) = 1;
    }
    std::vector<RowSource> sources(n_table);
    for (std::size_t i = 0; i < n_table; ++i) {
        if (!referenced[i]) continue;
        RowSource& src = sources[i];
        const Track& t = prior.track_table[i];
        src.label = t.label;
        for (const auto& c : t.density.components) src.predicted.components.push_back({c.weight, motion.predict(c.gaussian)});
        gate_and_score(src, measurements, sensor, params.gate_threshold);
        src.cost = make_row(log_not_ps, log_ps, src, log_pd, log_qd, log_kappa);
        src.prepared = prepare_row(src.cost);
    }
    std::vector<int> birth_rows;
    for (std::size_t b = 0; b < births.entries.size(); ++b) {
        const BirthEntry& e = births.entries[b];
        if (e.label.birth_time != time) {
            throw ContractViolation("joint_predict_update: birth label " + e.label.to_string() + " is not born at step " +
                                    std::to_string(time));
        }
        if (e.existence < 0.0 || e.existence > 1.0) throw ContractViolation("joint_predict_update: birth r outside [0,1]");
        if (e.existence == 0.0) continue;
        RowSource src;
        src.label = e.label;
        src.predicted = e.density;
        gate_and_score(src, measurements, sensor, params.gate_threshold);
        src.cost = make_row(safe_log(1.0 - e.existence), std::log(e.existence), src, log_pd, log_qd, log_kappa);
        src.prepared = prepare_row(src.cost);
        birth_rows.push_back(static_cast<int>(sources.size()));
        sources.push_back(std::move(src));
    }

    // Per-prior sample budgets proportional to sqrt(weight).
    const std::size_t total_budget =
        params.gibbs_iterations > 0 ? params.gibbs_iterations : std::max<std::size_t>(1000, 10 * params.max_hypotheses);
    const double max_log_w = std::max_element(prior.hypotheses.begin(), prior.hypotheses.end(), [](const auto& a, const auto& b) {
                                 return a.log_weight < b.log_weight;
                             })->log_weight;
    std::vector<double> sqrt_w(prior.hypotheses.size());
    for (std::size_t h = 0; h < sqrt_w.size(); ++h) sqrt_w[h] = std::exp(0.5 * (prior.hypotheses[h].log_weight - max_log_w));
    const double sqrt_total = std::accumulate(sqrt_w.begin(), sqrt_w.end(), 0.0);

    std::unordered_map<std::vector<std::int64_t>, double, KeyHash> merged;
    std::vector<const PreparedRow*> rows;
    std::vector<int> row_source;
    std::vector<std::int64_t> key;
    for (std::size_t h = 0; h < prior.hypotheses.size(); ++h) {
        const GlmbHypothesis& hyp = prior.hypotheses[h];
        rows.clear();
        row_source.clear();
        for (int idx : hyp.tracks) {
            rows.push_back(&sources[static_cast<std::size_t>(idx)].prepared);
            row_source.push_back(idx);
        }
        for (int b : birth_rows) {
            rows.push_back(&sources[static_cast<std::size_t>(b)].prepared);
            row_source.push_back(b);
        }
        // Start from survivors missed and births absent.
        AssociationMap initial(rows.size(), kMiss);
        for (std::size_t r = hyp.tracks.size(); r < rows.size(); ++r) initial[r] = kDie;

        const auto budget = std::max<std::size_t>(
            1, static_cast<std::size_t>(std::llround(static_cast<double>(total_budget) * sqrt_w[h] / sqrt_total)));
        const auto maps = gibbs_truncate(rows, m, budget, derive_seed(seed, {static_cast<std::uint64_t>(h)}), initial);

        for (const AssociationMap& map : maps) {
            double lw = hyp.log_weight;
            key.clear();
            for (std::size_t r = 0; r < map.size(); ++r) {
                const RowSource& src = sources[static_cast<std::size_t>(row_source[r])];
                const int a = map[r];
                if (a == kDie) {
                    lw += src.cost.die;
                    continue;
                }
                if (a == kMiss) {
                    lw += src.cost.miss;
                } else {
                    const auto it = std::find_if(src.cost.detections.begin(), src.cost.detections.end(),
                                                 [a](const auto& d) { return d.first == a; });
                    lw += it->second;
                }
                key.push_back(static_cast<std::int64_t>(row_source[r]) * (m + 1) + (a + 1));
            }
            if (lw == kNegInf || std::isnan(lw)) continue;
            std::sort(key.begin(), key.end());
            auto [it, inserted] = merged.try_emplace(key, lw);
            if (!inserted) {
                const double hi = std::max(it->second, lw);
                it->second = hi + std::log(std::exp(it->second - hi) + std::exp(lw - hi));
            }
        }
    }

    if (merged.empty()) throw NumericalDegeneracy("joint_predict_update: every sampled hypothesis has zero weight");

    std::vector<Candidate> candidates;
    candidates.reserve(merged.size());
    for (auto& [k, lw] : merged) candidates.push_back({k, lw});
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.log_weight != b.log_weight) return a.log_weight > b.log_weight;
        return a.key < b.key;
    });

    // Normalize, prune, cap and renormalize.
    std::vector<double> lws;
    lws.reserve(candidates.size());
    for (const auto& c : candidates) lws.push_back(c.log_weight);
    double norm = log_sum_exp(lws);
    const double log_prune = std::log(params.hypothesis_prune);
    std::size_t keep = 0;
    while (keep < candidates.size() && keep < params.max_hypotheses &&
           (keep == 0 || candidates[keep].log_weight - norm >= log_prune)) {
        ++keep;
    }
    candidates.resize(keep);
    lws.resize(keep);
    norm = log_sum_exp(lws);

    // Materialize the track entries used by surviving hypotheses.
    GlmbDensity out;
    out.time = time;
    std::unordered_map<std::int64_t, int> entry_of;
    out.hypotheses.reserve(candidates.size());
    for (const auto& c : candidates) {
        GlmbHypothesis hyp;
        hyp.log_weight = c.log_weight - norm;
        hyp.tracks.reserve(c.key.size());
        for (std::int64_t code : c.key) {
            auto [it, inserted] = entry_of.try_emplace(code, static_cast<int>(out.track_table.size()));
            if (inserted) {
                const auto src_idx = static_cast<std::size_t>(code / (m + 1));
                const int association = static_cast<int>(code % (m + 1)) - 1;
                const RowSource& src = sources[src_idx];
                out.track_table.push_back(
                    {src.label, updated_density(src, association, measurements, sensor, params.track_reduction),
                     association});
            }
            hyp.tracks.push_back(it->second);
        }
        std::sort(hyp.tracks.begin(), hyp.tracks.end(), [&out](int a, int b) {
            return out.track_table[static_cast<std::size_t>(a)].label < out.track_table[static_cast<std::size_t>(b)].label;
        });
        out.hypotheses.push_back(std::move(hyp));
    }
    return out;
}

std::vector<TrackEstimate> extract_estimate(const GlmbDensity& posterior) {
    if (posterior.hypotheses.empty()) return {};
    const std::vector<double> card = posterior.cardinality_distribution();
    const auto n_star = static_cast<std::size_t>(std::max_element(card.begin(), card.end()) - card.begin());

    const GlmbHypothesis* best = nullptr;
    std::vector<Label> best_labels;
    for (const auto& h : posterior.hypotheses) {
        if (h.tracks.size() != n_star) continue;
        if (best == nullptr || h.log_weight > best->log_weight) {
            best = &h;
            best_labels = posterior.labels(h);
        } else if (h.log_weight == best->log_weight) {
            auto labels = posterior.labels(h);
            if (labels < best_labels) {
                best = &h;
                best_labels = std::move(labels);
            }
        }
    }
    std::vector<TrackEstimate> out;
    if (best == nullptr) return out;
    for (int idx : best->tracks) {
        const Track& t = posterior.track_table[static_cast<std::size_t>(idx)];
        out.push_back({t.label, t.density.mean()});
    }
    return out;
}

std::vector<double> association_probability(const GlmbDensity& posterior, std::size_t num_measurements) {
    std::vector<double> r(num_measurements, 0.0);
    for (const auto& h : posterior.hypotheses) {
        const double w = std::exp(h.log_weight);
        for (int idx : h.tracks) {
            const int a = posterior.track_table.at(static_cast<std::size_t>(idx)).association;
            if (a < 0) continue;
            if (static_cast<std::size_t>(a) >= num_measurements) {
                throw ContractViolation("association_probability: stored association beyond the measurement set");
            }
            r[static_cast<std::size_t>(a)] += w;
        }
    }
    for (double& v : r) v = std::clamp(v, 0.0, 1.0);
    return r;
}

}  // namespace dpglmb
