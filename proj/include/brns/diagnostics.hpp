#pragma once

#include <optional>
#include <span>
#include <vector>

#include "brns/runlog.hpp"
#include "brns/types.hpp"

namespace brns {

/// Upper-triangular cross-generation novelty matrix: entry (i, j), j >= i, is
/// the mean novelty of the generation-i population under the estimator state
/// of generation j. Absent entries (no stored snapshot) are NaN.
class QMatrix {
public:
    QMatrix() = default;
    explicit QMatrix(std::size_t generations);

    double at(std::size_t i, std::size_t j) const;
    void set(std::size_t i, std::size_t j, double value);
    bool present(std::size_t i, std::size_t j) const;
    std::size_t generations() const { return n_; }

    /// Present (j, value) pairs of row i, ascending j >= i.
    std::vector<std::pair<std::size_t, double>> row(std::size_t i) const;

private:
    std::size_t n_ = 0;
    std::vector<double> values_;
};

/// How the reference set of the generation-j novelty function is composed
/// when scoring a foreign population (archive estimator only).
enum class QReference {
    /// Archive at j plus the behaviors scored at generation j (the live
    /// reference set); entries belonging to the queried individual's id are
    /// excluded. Q(i,i) reproduces the live scores.
    GenJCandidates,
    /// Archive at j plus the queried population's own behaviors, without
    /// self-exclusion.
    QueryPopulation,
};

struct QMatrixParams {
    std::size_t k = 15;              // k-nn size for the archive estimator
    int stride = 1;                  // compute every stride-th (i, j)
    QReference reference = QReference::GenJCandidates;
};

QMatrix q_matrix(const RunLog& log, const QMatrixParams& params = {});

/// Mean over j > i of Q(i,j)/Q(i,i). Absent when Q(i,i) is missing or zero,
/// or no later entries exist.
std::optional<double> eta(const QMatrix& q, std::size_t i);

/// Number of significant novelty resurgences after the row minimum:
/// with m = argmin over the row (earliest on ties), counts entries after m
/// exceeding row[m] + epsilon (strict).
int kappa(std::span<const double> row, double epsilon);
std::optional<int> kappa(const QMatrix& q, std::size_t i, double epsilon);

/// 0.1 x median pairwise Euclidean distance. Throws with fewer than 2 points.
double epsilon_margin(std::span<const Vec> points);

/// Regular grid over [0,1]^d with nonnegative per-cell weights. Point counts
/// are the weight-1 special case. Out-of-range points are clamped to the
/// boundary cell and counted in clamped().
class GridHistogram {
public:
    explicit GridHistogram(std::vector<std::size_t> shape);

    void add(const Vec& point, double weight = 1.0);
    void set_cell(std::size_t flat_index, double weight);

    std::size_t cell_count() const { return weights_.size(); }
    std::size_t cell_index(const Vec& point) const;
    const std::vector<double>& weights() const { return weights_; }
    const std::vector<std::size_t>& shape() const { return shape_; }
    double total() const;
    std::size_t clamped() const { return clamped_; }

private:
    std::vector<std::size_t> shape_;
    std::vector<double> weights_;
    mutable std::size_t clamped_ = 0;
};

/// Fraction of cells holding positive weight.
double coverage(const GridHistogram& hist);

/// Jensen-Shannon distance (base-2, in [0,1]) between the normalized
/// histogram and the uniform distribution over its cells.
double uniformity_js(const GridHistogram& hist);

/// Jensen-Shannon distance between two weight vectors of equal length.
double js_distance(std::span<const double> p, std::span<const double> q);

struct PopulationDynamics {
    std::vector<double> mean_age;                              // per generation
    std::vector<std::optional<double>> mean_parent_distance;   // per generation
};

PopulationDynamics population_dynamics(const RunLog& log);

/// Cumulative fraction of grid cells ever visited by an evaluated behavior,
/// per generation.
std::vector<double> coverage_series(const RunLog& log, const std::vector<std::size_t>& grid);

struct DiagnosticsParams {
    std::vector<std::size_t> grid{6, 6};
    std::size_t k = 15;
    int q_stride = 1;
    QReference q_reference = QReference::GenJCandidates;
    /// Cap on points used for the epsilon median (uniform subsample).
    std::size_t epsilon_max_points = 2000;
    /// Per-axis sample points per cell when evaluating the novelty field.
    std::size_t field_samples_per_cell = 3;
    /// Generations 0..g_cut enter the eta/kappa summary means (-1: all).
    int g_cut = -1;
};

struct RunDiagnostics {
    QMatrix q;
    double epsilon = 0.0;
    std::vector<std::optional<double>> eta_per_generation;
    std::vector<std::optional<int>> kappa_per_generation;
    std::optional<double> eta_mean;
    std::optional<double> kappa_mean;
    std::vector<double> coverage;                      // cumulative, per generation
    std::vector<std::optional<double>> uniformity;     // per generation (stored states)
    PopulationDynamics dynamics;
};

/// Everything computed from one log. Pure: recomputation from a reloaded log
/// gives identical values.
RunDiagnostics compute_run_diagnostics(const RunLog& log, const DiagnosticsParams& params = {});

/// The margin's point set per the estimator's scoring space: behaviors for
/// the archive estimator, frozen-encoder embeddings for the encoder pair.
double epsilon_margin_for_log(const RunLog& log, std::size_t max_points = 2000);

/// Uniformity series for one log. Archive runs: JS distance of the archive
/// occupancy histogram to uniform. Encoder runs: JS distance of the novelty
/// field (mean predictor error sampled per cell) to uniform.
std::vector<std::optional<double>> uniformity_series(const RunLog& log,
                                                     const std::vector<std::size_t>& grid,
                                                     std::size_t field_samples_per_cell = 3);

}  // namespace brns
