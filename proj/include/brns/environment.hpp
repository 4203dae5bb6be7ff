#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "brns/maze.hpp"
#include "brns/types.hpp"

namespace brns {

struct EvalResult {
    Vec behavior;
    double fitness = 0.0;
};

/// Task interface for the evolutionary loop. Evaluations must be pure
/// functions of the genotype.
class Environment {
public:
    virtual ~Environment() = default;

    virtual std::size_t genotype_length() const = 0;
    virtual std::size_t behavior_dim() const = 0;
    virtual std::vector<Interval> behavior_bounds() const = 0;
    virtual EvalResult evaluate(const Vec& genotype) const = 0;

    /// Task success region (behavior space), when the task defines one.
    virtual std::optional<Vec> goal() const { return std::nullopt; }
    virtual double goal_radius() const { return 0.0; }
};

/// Maze navigation task: genotype encodes the controller weights, behavior is
/// the final normalized position.
class MazeEnvironment final : public Environment {
public:
    MazeEnvironment(MazeMap maze, MazeSimParams params = {});

    std::size_t genotype_length() const override;
    std::size_t behavior_dim() const override { return 2; }
    std::vector<Interval> behavior_bounds() const override;
    EvalResult evaluate(const Vec& genotype) const override;
    std::optional<Vec> goal() const override;
    double goal_radius() const override;

    const MazeMap& maze() const { return maze_; }
    const MazeSimParams& params() const { return params_; }

private:
    MazeMap maze_;
    MazeSimParams params_;
};

}  // namespace brns
