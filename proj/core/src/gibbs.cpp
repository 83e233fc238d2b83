#include "dpglmb/gibbs.hpp"

#include "dpglmb/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <unordered_set>

namespace dpglmb {

namespace {

struct MapHash {
    std::size_t operator()(const AssociationMap& m) const noexcept {
        std::size_t h = 1469598103934665603ULL;
        for (int v : m) {
            h ^= static_cast<std::size_t>(v + 3);
            h *= 1099511628211ULL;
        }
        return h;
    }
};

}  // namespace

PreparedRow prepare_row(const CostRow& row) {
    double mx = std::max(row.die, row.miss);
    for (const auto& [j, w] : row.detections) mx = std::max(mx, w);
    PreparedRow out;
    if (!std::isfinite(mx)) return out;
    out.die = std::exp(row.die - mx);
    out.miss = std::exp(row.miss - mx);
    out.detections.reserve(row.detections.size());
    for (const auto& [j, w] : row.detections) out.detections.emplace_back(j, std::exp(w - mx));
    return out;
}

AssociationCost AssociationCost::from_dense(const Eigen::MatrixXd& log_weights) {
    if (log_weights.cols() < 2) throw ContractViolation("AssociationCost: need at least die and miss columns");
    AssociationCost cost;
    cost.num_measurements = static_cast<int>(log_weights.cols()) - 2;
    for (Eigen::Index i = 0; i < log_weights.rows(); ++i) {
        CostRow row;
        row.die = log_weights(i, 0);
        row.miss = log_weights(i, 1);
        for (Eigen::Index j = 2; j < log_weights.cols(); ++j) {
            if (log_weights(i, j) > -std::numeric_limits<double>::infinity()) {
                row.detections.emplace_back(static_cast<int>(j - 2), log_weights(i, j));
            }
        }
        cost.rows.push_back(std::move(row));
    }
    return cost;
}

bool is_valid_association(const AssociationMap& map, int num_measurements) {
    std::vector<char> used(static_cast<std::size_t>(std::max(num_measurements, 0)), 0);
    for (int a : map) {
        if (a < kDie || a >= num_measurements) return false;
        if (a >= 0) {
            if (used[static_cast<std::size_t>(a)]) return false;
            used[static_cast<std::size_t>(a)] = 1;
        }
    }
    return true;
}

double association_log_weight(std::span<const CostRow* const> rows, const AssociationMap& map) {
    if (map.size() != rows.size()) throw ContractViolation("association_log_weight: map/row count mismatch");
    double total = 0.0;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const CostRow& r = *rows[i];
        const int a = map[i];
        if (a == kDie) {
            total += r.die;
        } else if (a == kMiss) {
            total += r.miss;
        } else {
            const auto it = std::find_if(r.detections.begin(), r.detections.end(),
                                         [a](const auto& d) { return d.first == a; });
            if (it == r.detections.end()) return -std::numeric_limits<double>::infinity();
            total += it->second;
        }
    }
    return total;
}

double association_log_weight(const AssociationCost& cost, const AssociationMap& map) {
    std::vector<const CostRow*> ptrs;
    ptrs.reserve(cost.rows.size());
    for (const auto& r : cost.rows) ptrs.push_back(&r);
    return association_log_weight(ptrs, map);
}

std::vector<AssociationMap> gibbs_truncate(std::span<const PreparedRow* const> rows, int num_measurements,
                                           std::size_t iterations, std::uint64_t seed,
                                           const AssociationMap& initial) {
    const std::size_t n = rows.size();
    for (const PreparedRow* r : rows) {
        for (const auto& [j, w] : r->detections) {
            if (j < 0 || j >= num_measurements) throw ContractViolation("gibbs_truncate: measurement index out of range");
        }
    }
    if (!initial.empty() && (initial.size() != n || !is_valid_association(initial, num_measurements))) {
        throw ContractViolation("gibbs_truncate: invalid initial map");
    }

    AssociationMap current = initial.empty() ? AssociationMap(n, kMiss) : initial;
    std::vector<int> owner(static_cast<std::size_t>(std::max(num_measurements, 0)), -1);
    for (std::size_t i = 0; i < n; ++i) {
        if (current[i] >= 0) owner[static_cast<std::size_t>(current[i])] = static_cast<int>(i);
    }

    std::unordered_set<AssociationMap, MapHash> visited;
    visited.insert(current);

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    for (std::size_t sweep = 1; sweep < iterations; ++sweep) {
        for (std::size_t i = 0; i < n; ++i) {
            const PreparedRow& r = *rows[i];
            const int self = static_cast<int>(i);
            double total = r.die + r.miss;
            for (const auto& [j, w] : r.detections) {
                const int o = owner[static_cast<std::size_t>(j)];
                if (o == -1 || o == self) total += w;
            }
            if (!(total > 0.0)) continue;

            double u = unif(rng) * total;
            int choice;
            if (u < r.die) {
                choice = kDie;
            } else {
                u -= r.die;
                if (u < r.miss || r.detections.empty()) {
                    choice = kMiss;
                } else {
                    u -= r.miss;
                    choice = kMiss;
                    for (const auto& [j, w] : r.detections) {
                        const int o = owner[static_cast<std::size_t>(j)];
                        if (o != -1 && o != self) continue;
                        choice = j;
                        if (u < w) break;
                        u -= w;
                    }
                }
            }
            if (current[i] >= 0) owner[static_cast<std::size_t>(current[i])] = -1;
            current[i] = choice;
            if (choice >= 0) owner[static_cast<std::size_t>(choice)] = self;
        }
        visited.insert(current);
    }

    std::vector<AssociationMap> out(visited.begin(), visited.end());
    std::sort(out.begin(), out.end());
    return out;
}

std::vector<AssociationMap> gibbs_truncate(std::span<const CostRow* const> rows, int num_measurements,
                                           std::size_t iterations, std::uint64_t seed,
                                           const AssociationMap& initial) {
    std::vector<PreparedRow> prepared;
    prepared.reserve(rows.size());
    for (const CostRow* r : rows) prepared.push_back(prepare_row(*r));
    std::vector<const PreparedRow*> ptrs;
    ptrs.reserve(prepared.size());
    for (const auto& r : prepared) ptrs.push_back(&r);
    return gibbs_truncate(ptrs, num_measurements, iterations, seed, initial);
}

std::vector<AssociationMap> gibbs_truncate(const AssociationCost& cost, std::size_t iterations, std::uint64_t seed,
                                           const AssociationMap& initial) {
    std::vector<const CostRow*> ptrs;
    ptrs.reserve(cost.rows.size());
    for (const auto& r : cost.rows) ptrs.push_back(&r);
    return gibbs_truncate(ptrs, cost.num_measurements, iterations, seed, initial);
}

}  // namespace dpglmb
