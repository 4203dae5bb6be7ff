#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "brns/rng.hpp"
#include "brns/types.hpp"

namespace brns {

/// Reference set for k-nn novelty: archive entries plus the current
/// population's behaviors, viewed together. Non-owning.
struct ReferenceSet {
    std::span<const Vec> archive;
    std::span<const Vec> population;

    std::size_t size() const { return archive.size() + population.size(); }
};

/// Mean Euclidean distance from b to its k nearest neighbours in ref.
///
/// exclude_population_index, when set, removes that population entry from the
/// neighbour set (an individual never counts itself; equal descriptors from
/// other individuals still do). If fewer than k neighbours are available the
/// mean runs over all of them; an empty reference set yields +infinity.
double knn_novelty(const Vec& b, const ReferenceSet& ref, std::size_t k,
                   std::optional<std::size_t> exclude_population_index = std::nullopt);

/// Workspace variant for hot loops: reuses the distance buffer.
double knn_novelty(const Vec& b, const ReferenceSet& ref, std::size_t k,
                   std::optional<std::size_t> exclude_population_index,
                   std::vector<double>& scratch);

enum class ArchiveAddPolicy { Random, MostNovel };

/// Bounded store of previously visited behavior descriptors.
struct Archive {
    std::vector<Vec> entries;
    std::size_t max_size = 10000;
    std::size_t growth_rate = 6;
    ArchiveAddPolicy add_policy = ArchiveAddPolicy::Random;
};

/// Result of one maintenance pass, in application order: entries appended,
/// then eviction indices (into the grown entry list) removed.
struct ArchiveDelta {
    std::vector<Vec> added;
    std::vector<std::size_t> removed;
};

/// Adds up to growth_rate candidates (policy-chosen) and evicts uniformly at
/// random down to max_size. Candidates are this generation's evaluated
/// offspring behaviors; for MostNovel their novelty scores must be supplied.
ArchiveDelta archive_maintain(Archive& archive, std::span<const Vec> candidates,
                              RngStream& rng,
                              std::span<const double> candidate_novelty = {});

/// Re-applies a recorded delta (replay path for stored run records).
void archive_apply_delta(Archive& archive, const ArchiveDelta& delta);

/// Scores every individual in candidates against archive + all candidate
/// behaviors, excluding itself from its own neighbour set. All candidates
/// must be evaluated. Returns one novelty per candidate.
std::vector<double> archive_novelty_all(std::span<const Individual> candidates,
                                        const Archive& archive, std::size_t k);

}  // namespace brns
