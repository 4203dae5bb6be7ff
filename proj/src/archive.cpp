#include "brns/archive.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace brns {

double knn_novelty(const Vec& b, const ReferenceSet& ref, std::size_t k,
                   std::optional<std::size_t> exclude_population_index,
                   std::vector<double>& scratch) {
    if (k == 0) throw std::invalid_argument("k must be >= 1");

    scratch.clear();
    scratch.reserve(ref.size());
    for (const Vec& entry : ref.archive) scratch.push_back(squared_distance(b, entry));
    for (std::size_t i = 0; i < ref.population.size(); ++i) {
        if (exclude_population_index && *exclude_population_index == i) continue;
        scratch.push_back(squared_distance(b, ref.population[i]));
    }

    if (scratch.empty()) return std::numeric_limits<double>::infinity();

    const std::size_t n = std::min(k, scratch.size());
    std::nth_element(scratch.begin(), scratch.begin() + (n - 1), scratch.end());
    double sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) sum += std::sqrt(scratch[i]);
    return sum / static_cast<double>(n);
}

double knn_novelty(const Vec& b, const ReferenceSet& ref, std::size_t k,
                   std::optional<std::size_t> exclude_population_index) {
    std::vector<double> scratch;
    return knn_novelty(b, ref, k, exclude_population_index, scratch);
}

ArchiveDelta archive_maintain(Archive& archive, std::span<const Vec> candidates,
                              RngStream& rng, std::span<const double> candidate_novelty) {
    ArchiveDelta delta;

    // pick up to growth_rate candidates
    const std::size_t take = std::min(archive.growth_rate, candidates.size());
    if (take > 0) {
        std::vector<std::size_t> order(candidates.size());
        std::iota(order.begin(), order.end(), 0);
        if (archive.add_policy == ArchiveAddPolicy::MostNovel) {
            if (candidate_novelty.size() != candidates.size())
                throw std::invalid_argument("most_novel policy needs candidate novelties");
            std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b2) {
                return candidate_novelty[a] > candidate_novelty[b2];
            });
        } else {
            // partial Fisher-Yates: uniform sample without replacement
            for (std::size_t i = 0; i < take; ++i)
                std::swap(order[i], order[i + rng.uniform_index(order.size() - i)]);
        }
        for (std::size_t i = 0; i < take; ++i)
            delta.added.push_back(candidates[order[i]]);
    }

    for (const Vec& entry : delta.added) archive.entries.push_back(entry);

    // uniform random eviction down to the bound
    while (archive.entries.size() > archive.max_size) {
        const std::size_t victim = rng.uniform_index(archive.entries.size());
        delta.removed.push_back(victim);
        archive.entries.erase(archive.entries.begin() +
                              static_cast<std::ptrdiff_t>(victim));
    }
    return delta;
}

void archive_apply_delta(Archive& archive, const ArchiveDelta& delta) {
    for (const Vec& entry : delta.added) archive.entries.push_back(entry);
    for (std::size_t victim : delta.removed) {
        if (victim >= archive.entries.size())
            throw std::out_of_range("archive delta eviction index out of range");
        archive.entries.erase(archive.entries.begin() +
                              static_cast<std::ptrdiff_t>(victim));
    }
}

std::vector<double> archive_novelty_all(std::span<const Individual> candidates,
                                        const Archive& archive, std::size_t k) {
    std::vector<Vec> behaviors;
    behaviors.reserve(candidates.size());
    for (const Individual& ind : candidates) {
        if (!ind.behavior) throw std::logic_error("unevaluated individual in novelty scoring");
        behaviors.push_back(*ind.behavior);
    }

    ReferenceSet ref{archive.entries, behaviors};
    std::vector<double> out(candidates.size());
    std::vector<double> scratch;
    for (std::size_t i = 0; i < candidates.size(); ++i)
        out[i] = knn_novelty(behaviors[i], ref, k, i, scratch);
    return out;
}

}  // namespace brns
