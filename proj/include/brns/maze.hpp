#pragma once

#include <array>
#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "brns/mlp.hpp"
#include "brns/types.hpp"

namespace brns {

struct Point {
    double x = 0.0;
    double y = 0.0;
};

struct Segment {
    Point a;
    Point b;
};

/// 2-D maze: axis-aligned bounding box, wall segments (outer boundary
/// included), start pose and goal disc. World coordinates.
struct MazeMap {
    Interval bounds_x{0.0, 1.0};
    Interval bounds_y{0.0, 1.0};
    Point start{0.1, 0.1};
    Point goal{0.1, 0.9};
    double goal_radius = 0.05;
    std::vector<Segment> walls;

    double width() const { return bounds_x.hi - bounds_x.lo; }
    double height() const { return bounds_y.hi - bounds_y.lo; }

    /// Final position mapped to [0,1]^2.
    Vec normalize(Point p) const;
    /// Goal in normalized coordinates; radius normalized by width.
    Vec normalized_goal() const;
    double normalized_goal_radius() const;
};

/// Parses the maze file format: `bounds`/`start`/`goal`/`radius` header lines
/// followed by one `wall x1 y1 x2 y2` line per segment; '#' comments.
MazeMap load_maze(const std::filesystem::path& path);
MazeMap parse_maze(const std::string& text);
std::string maze_to_text(const MazeMap& maze);

/// The bundled deceptive maze (start bottom-left, goal top-left, the direct
/// route walled off so greedy distance-to-goal search stalls).
MazeMap default_deceptive_maze();

struct RobotState {
    Point position;
    double heading = 0.0;  // radians, 0 = +x
};

/// Simulation constants. All motion is per control step.
struct MazeSimParams {
    int steps = 400;
    double v_max = 0.01;             // forward displacement per step at full throttle
    double omega_max = 0.25;         // max turn per step, radians
    double sensor_range_factor = 0.25;  // max sensor range as a fraction of maze width
    double collision_slack = 1e-6;   // stop short of the wall by this much
    std::array<double, 5> sensor_angles{-1.5707963267948966, -0.7853981633974483, 0.0,
                                        0.7853981633974483, 1.5707963267948966};

    double sensor_range(const MazeMap& maze) const {
        return sensor_range_factor * maze.width();
    }
    std::size_t sensor_count() const { return sensor_angles.size(); }
};

/// Distance to the nearest wall along heading + angle_offset, capped at
/// max_range.
double raycast(const RobotState& state, const MazeMap& maze, double angle_offset,
               double max_range);

/// Controller architecture: sensor_count -> 10 -> 10 -> 2, tanh throughout.
std::vector<std::size_t> controller_dims(std::size_t sensor_count);
std::size_t controller_weight_count(std::size_t sensor_count);

/// Fills the fixed controller architecture from a flat genotype
/// (layer by layer, rows in order). Throws on length mismatch.
MlpNetwork controller_decode(const Vec& genotype, std::size_t sensor_count);

struct RolloutResult {
    Vec behavior;          // final position, normalized to [0,1]^2
    double fitness = 0.0;  // -distance(final, goal), logged only
    std::vector<Point> path;
};

/// Deterministic episode: at each step the controller maps normalized sensor
/// readings to (throttle, turn) in [-1,1]^2; throttle maps to [0, v_max],
/// turn to [-omega_max, omega_max]; motion stops at wall contact (no sliding).
RolloutResult rollout(const Vec& genotype, const MazeMap& maze,
                      const MazeSimParams& params);

/// Same, from an already decoded controller.
RolloutResult rollout(const MlpNetwork& controller, const MazeMap& maze,
                      const MazeSimParams& params);

}  // namespace brns
