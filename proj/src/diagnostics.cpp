#include "brns/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <unordered_map>

#include "brns/rng.hpp"

namespace brns {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

QMatrix::QMatrix(std::size_t generations)
    : n_(generations), values_(generations * generations, kNaN) {}

double QMatrix::at(std::size_t i, std::size_t j) const {
    if (i >= n_ || j >= n_) throw std::out_of_range("QMatrix index");
    return values_[i * n_ + j];
}

void QMatrix::set(std::size_t i, std::size_t j, double value) {
    if (i >= n_ || j >= n_) throw std::out_of_range("QMatrix index");
    values_[i * n_ + j] = value;
}

bool QMatrix::present(std::size_t i, std::size_t j) const {
    return !std::isnan(at(i, j));
}

std::vector<std::pair<std::size_t, double>> QMatrix::row(std::size_t i) const {
    std::vector<std::pair<std::size_t, double>> out;
    for (std::size_t j = i; j < n_; ++j)
        if (present(i, j)) out.emplace_back(j, at(i, j));
    return out;
}

namespace {

struct PopulationView {
    std::vector<std::uint64_t> ids;
    std::vector<Vec> behaviors;
};

std::vector<PopulationView> collect_populations(const RunLog& log) {
    std::vector<PopulationView> pops(log.generations.size());
    for (std::size_t g = 0; g < log.generations.size(); ++g) {
        for (const PopulationEntry& e : log.generations[g].population) {
            pops[g].ids.push_back(e.id);
            pops[g].behaviors.push_back(e.behavior);
        }
    }
    return pops;
}

/// The candidate set scored live at generation j (population of j-1 plus the
/// generation-j offspring; at j = 0 the initial population).
PopulationView candidates_at(const RunLog& log, std::size_t j) {
    PopulationView view;
    if (j > 0) {
        for (const PopulationEntry& e : log.generations[j - 1].population) {
            view.ids.push_back(e.id);
            view.behaviors.push_back(e.behavior);
        }
    }
    for (const OffspringRecord& o : log.generations[j].offspring) {
        view.ids.push_back(o.id);
        view.behaviors.push_back(o.behavior);
    }
    return view;
}

double prediction_error(const MlpNetwork& predictor, const Vec& frozen_embedding,
                        const Vec& behavior) {
    const Vec predicted = predictor.forward(behavior);
    return squared_distance(frozen_embedding, predicted);
}

QMatrix q_matrix_brns(const RunLog& log, const QMatrixParams& params) {
    const std::size_t n = log.generations.size();
    QMatrix q(n);
    if (!log.frozen_encoder) throw std::invalid_argument("log has no frozen encoder");
    const MlpNetwork& frozen = *log.frozen_encoder;
    const auto pops = collect_populations(log);

    const std::size_t stride = params.stride < 1 ? 1 : static_cast<std::size_t>(params.stride);

    // frozen embeddings of every population member, computed once
    std::vector<std::vector<Vec>> frozen_embeddings(n);
    for (std::size_t i = 0; i < n; i += stride) {
        frozen_embeddings[i].reserve(pops[i].behaviors.size());
        for (const Vec& b : pops[i].behaviors) frozen_embeddings[i].push_back(frozen.forward(b));
    }

    for (std::size_t j = 0; j < n; j += stride) {
        const auto& snapshot = log.generations[j].encoder_snapshot;
        if (!snapshot) continue;
        for (std::size_t i = 0; i <= j; i += stride) {
            const auto& pop = pops[i];
            if (pop.behaviors.empty()) continue;
            double sum = 0.0;
            for (std::size_t m = 0; m < pop.behaviors.size(); ++m)
                sum += prediction_error(*snapshot, frozen_embeddings[i][m], pop.behaviors[m]);
            q.set(i, j, sum / static_cast<double>(pop.behaviors.size()));
        }
    }
    return q;
}

QMatrix q_matrix_archive(const RunLog& log, const QMatrixParams& params) {
    const std::size_t n = log.generations.size();
    QMatrix q(n);
    const auto pops = collect_populations(log);
    const std::size_t stride = params.stride < 1 ? 1 : static_cast<std::size_t>(params.stride);

    ArchiveTimeline timeline(log);
    std::vector<double> scratch;
    for (std::size_t j = 0; j < n; ++j) {
        const std::vector<Vec>& archive_entries = timeline.at(static_cast<int>(j));
        if (j % stride != 0) continue;

        PopulationView reference_pop;
        std::unordered_map<std::uint64_t, std::size_t> index_of;
        if (params.reference == QReference::GenJCandidates) {
            reference_pop = candidates_at(log, j);
            index_of.reserve(reference_pop.ids.size());
            for (std::size_t idx = 0; idx < reference_pop.ids.size(); ++idx)
                index_of.emplace(reference_pop.ids[idx], idx);
        }

        for (std::size_t i = 0; i <= j; i += stride) {
            const auto& pop = pops[i];
            if (pop.behaviors.empty()) continue;

            const PopulationView& ref_pop =
                params.reference == QReference::GenJCandidates ? reference_pop : pops[i];
            const ReferenceSet ref{archive_entries, ref_pop.behaviors};

            double sum = 0.0;
            bool finite = true;
            for (std::size_t m = 0; m < pop.behaviors.size(); ++m) {
                std::optional<std::size_t> exclude;
                if (params.reference == QReference::GenJCandidates) {
                    const auto it = index_of.find(pop.ids[m]);
                    if (it != index_of.end()) exclude = it->second;
                }
                const double nov = knn_novelty(pop.behaviors[m], ref, params.k, exclude, scratch);
                if (!std::isfinite(nov)) {
                    finite = false;
                    break;
                }
                sum += nov;
            }
            // empty-reference edge cases stay absent rather than polluting the row
            if (finite) q.set(i, j, sum / static_cast<double>(pop.behaviors.size()));
        }
    }
    return q;
}

}  // namespace

QMatrix q_matrix(const RunLog& log, const QMatrixParams& params) {
    if (log.estimator == "brns") return q_matrix_brns(log, params);
    if (log.estimator == "archive") return q_matrix_archive(log, params);
    throw std::invalid_argument("unknown estimator in log: " + log.estimator);
}

std::optional<double> eta(const QMatrix& q, std::size_t i) {
    if (i >= q.generations() || !q.present(i, i)) return std::nullopt;
    const double base = q.at(i, i);
    if (base <= 0.0) return std::nullopt;
    double sum = 0.0;
    std::size_t count = 0;
    for (std::size_t j = i + 1; j < q.generations(); ++j) {
        if (!q.present(i, j)) continue;
        sum += q.at(i, j) / base;
        ++count;
    }
    if (count == 0) return std::nullopt;
    return sum / static_cast<double>(count);
}

int kappa(std::span<const double> row, double epsilon) {
    if (row.empty()) throw std::invalid_argument("kappa needs a nonempty row");
    std::size_t min_index = 0;
    for (std::size_t j = 1; j < row.size(); ++j)
        if (row[j] < row[min_index]) min_index = j;  // earliest index on ties
    int count = 0;
    for (std::size_t j = min_index + 1; j < row.size(); ++j)
        if (row[min_index] + epsilon < row[j]) ++count;
    return count;
}

std::optional<int> kappa(const QMatrix& q, std::size_t i, double epsilon) {
    const auto entries = q.row(i);
    if (entries.empty()) return std::nullopt;
    std::vector<double> values;
    values.reserve(entries.size());
    for (const auto& [j, v] : entries) values.push_back(v);
    return kappa(values, epsilon);
}

double epsilon_margin(std::span<const Vec> points) {
    if (points.size() < 2)
        throw std::invalid_argument("epsilon margin needs at least 2 points");
    std::vector<double> distances;
    distances.reserve(points.size() * (points.size() - 1) / 2);
    for (std::size_t a = 0; a < points.size(); ++a)
        for (std::size_t b = a + 1; b < points.size(); ++b)
            distances.push_back(euclidean_distance(points[a], points[b]));

    const std::size_t mid = distances.size() / 2;
    std::nth_element(distances.begin(), distances.begin() + mid, distances.end());
    double median = distances[mid];
    if (distances.size() % 2 == 0) {
        // average of the two central order statistics
        const double below = *std::max_element(distances.begin(), distances.begin() + mid);
        median = 0.5 * (median + below);
    }
    return 0.1 * median;
}

GridHistogram::GridHistogram(std::vector<std::size_t> shape) : shape_(std::move(shape)) {
    if (shape_.empty()) throw std::invalid_argument("grid needs at least one dimension");
    std::size_t cells = 1;
    for (std::size_t s : shape_) {
        if (s == 0) throw std::invalid_argument("grid dimensions must be positive");
        cells *= s;
    }
    weights_.assign(cells, 0.0);
}

std::size_t GridHistogram::cell_index(const Vec& point) const {
    if (point.size() != shape_.size())
        throw std::invalid_argument("point dimension does not match the grid");
    std::size_t flat = 0;
    bool clamped = false;
    for (std::size_t d = 0; d < shape_.size(); ++d) {
        double x = point[d];
        if (x < 0.0 || x > 1.0) {
            clamped = true;
            x = std::clamp(x, 0.0, 1.0);
        }
        auto idx = static_cast<std::size_t>(x * static_cast<double>(shape_[d]));
        if (idx >= shape_[d]) idx = shape_[d] - 1;  // x == 1.0 maps to the last cell
        flat = flat * shape_[d] + idx;
    }
    if (clamped) ++clamped_;
    return flat;
}

void GridHistogram::add(const Vec& point, double weight) {
    weights_[cell_index(point)] += weight;
}

void GridHistogram::set_cell(std::size_t flat_index, double weight) {
    weights_.at(flat_index) = weight;
}

double GridHistogram::total() const {
    double t = 0.0;
    for (double w : weights_) t += w;
    return t;
}

double coverage(const GridHistogram& hist) {
    std::size_t occupied = 0;
    for (double w : hist.weights())
        if (w > 0.0) ++occupied;
    return static_cast<double>(occupied) / static_cast<double>(hist.cell_count());
}

double js_distance(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size() || p.empty())
        throw std::invalid_argument("js_distance needs equal nonempty vectors");
    double pt = 0.0, qt = 0.0;
    for (double v : p) pt += v;
    for (double v : q) qt += v;
    if (pt <= 0.0 || qt <= 0.0) throw std::invalid_argument("js_distance needs positive mass");

    double divergence = 0.0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double pi = p[i] / pt;
        const double qi = q[i] / qt;
        const double mi = 0.5 * (pi + qi);
        if (pi > 0.0) divergence += 0.5 * pi * std::log2(pi / mi);
        if (qi > 0.0) divergence += 0.5 * qi * std::log2(qi / mi);
    }
    divergence = std::clamp(divergence, 0.0, 1.0);
    return std::sqrt(divergence);
}

double uniformity_js(const GridHistogram& hist) {
    if (hist.total() <= 0.0) throw std::invalid_argument("uniformity of an empty histogram");
    const std::vector<double> uniform(hist.cell_count(), 1.0);
    return js_distance(hist.weights(), uniform);
}

PopulationDynamics population_dynamics(const RunLog& log) {
    PopulationDynamics dyn;
    std::unordered_map<std::uint64_t, const Vec*> behavior_of;
    for (const GenerationRecord& rec : log.generations)
        for (const OffspringRecord& o : rec.offspring) behavior_of.emplace(o.id, &o.behavior);

    for (const GenerationRecord& rec : log.generations) {
        double age_sum = 0.0;
        for (const PopulationEntry& e : rec.population) age_sum += e.age;
        dyn.mean_age.push_back(rec.population.empty()
                                   ? 0.0
                                   : age_sum / static_cast<double>(rec.population.size()));

        double dist_sum = 0.0;
        std::size_t dist_count = 0;
        for (const OffspringRecord& o : rec.offspring) {
            if (!o.parent_id) continue;
            const auto it = behavior_of.find(*o.parent_id);
            if (it == behavior_of.end()) continue;
            dist_sum += euclidean_distance(o.behavior, *it->second);
            ++dist_count;
        }
        if (dist_count == 0)
            dyn.mean_parent_distance.push_back(std::nullopt);
        else
            dyn.mean_parent_distance.push_back(dist_sum / static_cast<double>(dist_count));
    }
    return dyn;
}

std::vector<double> coverage_series(const RunLog& log, const std::vector<std::size_t>& grid) {
    GridHistogram hist(grid);
    std::vector<double> series;
    series.reserve(log.generations.size());
    for (const GenerationRecord& rec : log.generations) {
        for (const OffspringRecord& o : rec.offspring) hist.add(o.behavior);
        series.push_back(coverage(hist));
    }
    return series;
}

double epsilon_margin_for_log(const RunLog& log, std::size_t max_points) {
    std::vector<Vec> points;
    for (const GenerationRecord& rec : log.generations)
        for (const OffspringRecord& o : rec.offspring) points.push_back(o.behavior);

    if (points.size() > max_points) {
        RngStream rng = RngStream(log.seed).split("epsilon_subsample");
        // partial Fisher-Yates; keep the first max_points
        for (std::size_t i = 0; i < max_points; ++i)
            std::swap(points[i], points[i + rng.uniform_index(points.size() - i)]);
        points.resize(max_points);
    }

    if (log.estimator == "brns") {
        if (!log.frozen_encoder) throw std::invalid_argument("log has no frozen encoder");
        for (Vec& p : points) p = log.frozen_encoder->forward(p);
    }
    return epsilon_margin(points);
}

std::vector<std::optional<double>> uniformity_series(const RunLog& log,
                                                     const std::vector<std::size_t>& grid,
                                                     std::size_t field_samples_per_cell) {
    const std::size_t n = log.generations.size();
    std::vector<std::optional<double>> series(n);

    if (log.estimator == "archive") {
        ArchiveTimeline timeline(log);
        for (std::size_t g = 0; g < n; ++g) {
            const auto& entries = timeline.at(static_cast<int>(g));
            if (entries.empty()) continue;
            GridHistogram hist(grid);
            for (const Vec& b : entries) hist.add(b);
            series[g] = uniformity_js(hist);
        }
        return series;
    }

    if (!log.frozen_encoder) throw std::invalid_argument("log has no frozen encoder");
    if (grid.size() != log.frozen_encoder->input_dim())
        throw std::invalid_argument("grid dimension does not match the behavior space");

    // fixed per-cell sample points: sub-grid centers
    const std::size_t cells = GridHistogram(grid).cell_count();
    std::vector<Vec> sample_points;
    std::vector<std::size_t> sample_cell;
    const std::size_t s = std::max<std::size_t>(1, field_samples_per_cell);
    std::vector<std::size_t> cell_idx(grid.size(), 0);
    for (std::size_t flat = 0; flat < cells; ++flat) {
        // decode flat index (row-major, matching GridHistogram)
        std::size_t rem = flat;
        for (std::size_t d = grid.size(); d-- > 0;) {
            cell_idx[d] = rem % grid[d];
            rem /= grid[d];
        }
        std::vector<std::size_t> sub(grid.size(), 0);
        const std::size_t sub_count = [&] {
            std::size_t c = 1;
            for (std::size_t d = 0; d < grid.size(); ++d) c *= s;
            return c;
        }();
        for (std::size_t k = 0; k < sub_count; ++k) {
            std::size_t rem2 = k;
            Vec point(grid.size());
            for (std::size_t d = grid.size(); d-- > 0;) {
                sub[d] = rem2 % s;
                rem2 /= s;
                const double cell_lo = static_cast<double>(cell_idx[d]) / grid[d];
                const double cell_w = 1.0 / grid[d];
                point[d] = cell_lo + cell_w * (static_cast<double>(sub[d]) + 0.5) / s;
            }
            sample_points.push_back(std::move(point));
            sample_cell.push_back(flat);
        }
    }

    std::vector<Vec> frozen_embeddings;
    frozen_embeddings.reserve(sample_points.size());
    for (const Vec& p : sample_points)
        frozen_embeddings.push_back(log.frozen_encoder->forward(p));

    for (std::size_t g = 0; g < n; ++g) {
        const auto& snapshot = log.generations[g].encoder_snapshot;
        if (!snapshot) continue;
        GridHistogram hist(grid);
        std::vector<double> cell_sum(cells, 0.0);
        std::vector<std::size_t> cell_n(cells, 0);
        for (std::size_t m = 0; m < sample_points.size(); ++m) {
            cell_sum[sample_cell[m]] +=
                prediction_error(*snapshot, frozen_embeddings[m], sample_points[m]);
            cell_n[sample_cell[m]] += 1;
        }
        for (std::size_t c = 0; c < cells; ++c)
            hist.set_cell(c, cell_n[c] ? cell_sum[c] / static_cast<double>(cell_n[c]) : 0.0);
        series[g] = uniformity_js(hist);
    }
    return series;
}

RunDiagnostics compute_run_diagnostics(const RunLog& log, const DiagnosticsParams& params) {
    RunDiagnostics out;
    QMatrixParams qp;
    qp.k = params.k;
    qp.stride = params.q_stride;
    qp.reference = params.q_reference;
    out.q = q_matrix(log, qp);
    out.epsilon = epsilon_margin_for_log(log, params.epsilon_max_points);

    const std::size_t n = out.q.generations();
    out.eta_per_generation.resize(n);
    out.kappa_per_generation.resize(n);
    double eta_sum = 0.0, kappa_sum = 0.0;
    std::size_t eta_n = 0, kappa_n = 0;
    const std::size_t cut =
        params.g_cut < 0 ? n : std::min<std::size_t>(n, static_cast<std::size_t>(params.g_cut) + 1);
    for (std::size_t i = 0; i < n; ++i) {
        out.eta_per_generation[i] = eta(out.q, i);
        out.kappa_per_generation[i] = kappa(out.q, i, out.epsilon);
        if (i < cut) {
            if (out.eta_per_generation[i]) {
                eta_sum += *out.eta_per_generation[i];
                ++eta_n;
            }
            if (out.kappa_per_generation[i]) {
                kappa_sum += *out.kappa_per_generation[i];
                ++kappa_n;
            }
        }
    }
    if (eta_n > 0) out.eta_mean = eta_sum / static_cast<double>(eta_n);
    if (kappa_n > 0) out.kappa_mean = kappa_sum / static_cast<double>(kappa_n);

    out.coverage = coverage_series(log, params.grid);
    out.uniformity = uniformity_series(log, params.grid, params.field_samples_per_cell);
    out.dynamics = population_dynamics(log);
    return out;
}

}  // namespace brns
