#pragma once

#include <cstdint>
#include <optional>
#include <vector>

namespace brns {

/// Dense real vector. Genotypes, behavior descriptors and embeddings all use it.
using Vec = std::vector<double>;

/// Closed interval, one per dimension where bounds vary.
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    bool operator==(const Interval&) const = default;
};

double squared_distance(const Vec& a, const Vec& b);
double euclidean_distance(const Vec& a, const Vec& b);

/// One member of the evolving population.
///
/// behavior / novelty / fitness are set by evaluation and scoring; before
/// that they are absent. age counts generations survived in the population
/// (offspring enter at 0).
struct Individual {
    std::uint64_t id = 0;
    Vec genotype;
    std::optional<Vec> behavior;
    std::optional<double> novelty;
    std::optional<double> fitness;
    int age = 0;
    std::optional<std::uint64_t> parent_id;
};

/// Individual that satisfied the task success predicate, with the generation
/// at which it was collected.
struct Solution {
    std::uint64_t id = 0;
    int generation = 0;
    Vec behavior;
};

}  // namespace brns
