#include "brns/environment.hpp"

namespace brns {

MazeEnvironment::MazeEnvironment(MazeMap maze, MazeSimParams params)
    : maze_(std::move(maze)), params_(params) {}

std::size_t MazeEnvironment::genotype_length() const {
    return controller_weight_count(params_.sensor_count());
}

std::vector<Interval> MazeEnvironment::behavior_bounds() const {
    return {{0.0, 1.0}, {0.0, 1.0}};
}

EvalResult MazeEnvironment::evaluate(const Vec& genotype) const {
    RolloutResult r = rollout(genotype, maze_, params_);
    return {std::move(r.behavior), r.fitness};
}

std::optional<Vec> MazeEnvironment::goal() const {
    return maze_.normalized_goal();
}

double MazeEnvironment::goal_radius() const {
    return maze_.normalized_goal_radius();
}

}  // namespace brns
