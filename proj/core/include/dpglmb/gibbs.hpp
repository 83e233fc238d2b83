#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace dpglmb {

/// Association values used by AssociationMap entries.
inline constexpr int kDie = -2;   // track dies / birth is not born
inline constexpr int kMiss = -1;  // track exists but is not detected

/// Log-weights of one predicted track's association options. Detections not
/// listed (outside the gate) have weight zero.
struct CostRow {
    double die = 0.0;
    double miss = 0.0;
    std::vector<std::pair<int, double>> detections;  // (measurement index, log weight)
};

struct AssociationCost {
    std::vector<CostRow> rows;
    int num_measurements = 0;

    /// Dense log-weight matrix with columns [die, miss, z_0, ..., z_{m-1}];
    /// -inf entries become absent detections.
    static AssociationCost from_dense(const Eigen::MatrixXd& log_weights);
};

/// One entry per row: kDie, kMiss or a measurement index.
using AssociationMap = std::vector<int>;

/// True when no measurement is used by more than one row.
bool is_valid_association(const AssociationMap& map, int num_measurements);

/// Sum of the row log-weights selected by `map` (-inf if an entry is not available).
double association_log_weight(std::span<const CostRow* const> rows, const AssociationMap& map);
double association_log_weight(const AssociationCost& cost, const AssociationMap& map);

/// A cost row rescaled by its maximum and exponentiated, so that sampling
/// needs no exp() inside the sweep. Rows whose weights are all zero are inert.
struct PreparedRow {
    double die = 0.0;
    double miss = 0.0;
    std::vector<std::pair<int, double>> detections;
};

PreparedRow prepare_row(const CostRow& row);

/// Systematic-scan Gibbs sampler over rows. The chain starts from `initial`
/// (all-miss when empty), runs `iterations` sweeps (at least one sample, the
/// initial map) and returns the distinct maps visited, sorted
/// lexicographically. Deterministic given seed.
std::vector<AssociationMap> gibbs_truncate(std::span<const PreparedRow* const> rows, int num_measurements,
                                           std::size_t iterations, std::uint64_t seed,
                                           const AssociationMap& initial = {});
std::vector<AssociationMap> gibbs_truncate(std::span<const CostRow* const> rows, int num_measurements,
                                           std::size_t iterations, std::uint64_t seed,
                                           const AssociationMap& initial = {});
std::vector<AssociationMap> gibbs_truncate(const AssociationCost& cost, std::size_t iterations,
                                           std::uint64_t seed, const AssociationMap& initial = {});

}  // namespace dpglmb
