#include "brns/maze.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace brns {

Vec MazeMap::normalize(Point p) const {
    return {(p.x - bounds_x.lo) / width(), (p.y - bounds_y.lo) / height()};
}

Vec MazeMap::normalized_goal() const {
    return normalize(goal);
}

double MazeMap::normalized_goal_radius() const {
    return goal_radius / width();
}

namespace {

double cross(double ax, double ay, double bx, double by) {
    return ax * by - ay * bx;
}

/// Intersection parameter t along o + t*d against segment a-b, if any.
/// d need not be unit length; hits are reported for t in [0, t_limit].
std::optional<double> ray_segment_hit(Point o, double dx, double dy, const Segment& seg,
                                      double t_limit) {
    const double sx = seg.b.x - seg.a.x;
    const double sy = seg.b.y - seg.a.y;
    const double denom = cross(dx, dy, sx, sy);
    if (denom == 0.0) return std::nullopt;  // parallel (collinear overlap ignored)
    const double qx = seg.a.x - o.x;
    const double qy = seg.a.y - o.y;
    const double t = cross(qx, qy, sx, sy) / denom;
    const double u = cross(qx, qy, dx, dy) / denom;
    if (t < 0.0 || t > t_limit || u < 0.0 || u > 1.0) return std::nullopt;
    return t;
}

}  // namespace

double raycast(const RobotState& state, const MazeMap& maze, double angle_offset,
               double max_range) {
    const double angle = state.heading + angle_offset;
    const double dx = std::cos(angle);
    const double dy = std::sin(angle);
    double best = max_range;
    for (const Segment& wall : maze.walls) {
        if (auto t = ray_segment_hit(state.position, dx, dy, wall, best)) best = *t;
    }
    return best;
}

std::vector<std::size_t> controller_dims(std::size_t sensor_count) {
    return {sensor_count, 10, 10, 2};
}

std::size_t controller_weight_count(std::size_t sensor_count) {
    const auto dims = controller_dims(sensor_count);
    std::size_t n = 0;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) n += dims[l] * dims[l + 1];
    return n;
}

MlpNetwork controller_decode(const Vec& genotype, std::size_t sensor_count) {
    const auto dims = controller_dims(sensor_count);
    const std::vector<Activation> acts(dims.size() - 1, Activation::Tanh);
    MlpNetwork net = MlpNetwork::zeros(dims, acts);
    if (genotype.size() != net.weight_count())
        throw std::invalid_argument("genotype length does not match controller weight count");
    net.unflatten(genotype);
    return net;
}

RolloutResult rollout(const Vec& genotype, const MazeMap& maze,
                      const MazeSimParams& params) {
    return rollout(controller_decode(genotype, params.sensor_count()), maze, params);
}

RolloutResult rollout(const MlpNetwork& controller, const MazeMap& maze,
                      const MazeSimParams& params) {
    const double max_range = params.sensor_range(maze);
    RobotState state{maze.start, 0.0};

    RolloutResult result;
    result.path.reserve(static_cast<std::size_t>(params.steps) + 1);
    result.path.push_back(state.position);

    Vec sensors(params.sensor_count());
    for (int step = 0; step < params.steps; ++step) {
        for (std::size_t s = 0; s < sensors.size(); ++s)
            sensors[s] = raycast(state, maze, params.sensor_angles[s], max_range) / max_range;

        const Vec control = controller.forward(sensors);
        state.heading += params.omega_max * control[1];
        // negative throttle means stop; speed stays in [0, v_max]
        const double speed = params.v_max * std::max(0.0, control[0]);

        if (speed > 0.0) {
            const double dx = speed * std::cos(state.heading);
            const double dy = speed * std::sin(state.heading);
            double t_hit = 1.0;
            bool hit = false;
            for (const Segment& wall : maze.walls) {
                if (auto t = ray_segment_hit(state.position, dx, dy, wall, t_hit)) {
                    t_hit = *t;
                    hit = true;
                }
            }
            double travel = t_hit * speed;
            if (hit) travel = std::max(0.0, travel - params.collision_slack);
            state.position.x += (travel / speed) * dx;
            state.position.y += (travel / speed) * dy;
            // boundary walls stop motion already; the clamp only matters for
            // maze files that ship without a full outer box
            state.position.x = std::clamp(state.position.x, maze.bounds_x.lo,
                                          maze.bounds_x.hi);
            state.position.y = std::clamp(state.position.y, maze.bounds_y.lo,
                                          maze.bounds_y.hi);
        }
        result.path.push_back(state.position);
    }

    result.behavior = maze.normalize(state.position);
    result.fitness = -euclidean_distance(result.behavior, maze.normalized_goal());
    return result;
}

namespace {

void add_box(MazeMap& maze) {
    const double x0 = maze.bounds_x.lo, x1 = maze.bounds_x.hi;
    const double y0 = maze.bounds_y.lo, y1 = maze.bounds_y.hi;
    maze.walls.push_back({{x0, y0}, {x1, y0}});
    maze.walls.push_back({{x1, y0}, {x1, y1}});
    maze.walls.push_back({{x1, y1}, {x0, y1}});
    maze.walls.push_back({{x0, y1}, {x0, y0}});
}

}  // namespace

MazeMap default_deceptive_maze() {
    MazeMap maze;
    maze.bounds_x = {0.0, 1.0};
    maze.bounds_y = {0.0, 1.0};
    maze.start = {0.08, 0.10};
    maze.goal = {0.10, 0.90};
    maze.goal_radius = 0.05;
    add_box(maze);
    // Start chamber: ceiling directly under the goal channel, exit bottom-right.
    maze.walls.push_back({{0.00, 0.55}, {0.65, 0.55}});
    maze.walls.push_back({{0.65, 0.55}, {0.65, 0.20}});
    // Right barrier, passable only over the top.
    maze.walls.push_back({{0.80, 0.00}, {0.80, 0.75}});
    // Shelf splitting the return path into two channels.
    maze.walls.push_back({{0.25, 0.75}, {0.65, 0.75}});
    return maze;
}

MazeMap parse_maze(const std::string& text) {
    MazeMap maze;
    maze.walls.clear();
    bool seen_bounds = false, seen_start = false, seen_goal = false, seen_radius = false;

    std::istringstream in(text);
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        std::istringstream ls(line);
        std::string key;
        if (!(ls >> key)) continue;

        auto want = [&](int n, double* out) {
            for (int i = 0; i < n; ++i)
                if (!(ls >> out[i]))
                    throw std::runtime_error("maze file line " + std::to_string(line_no) +
                                             ": expected " + std::to_string(n) +
                                             " numbers after '" + key + "'");
        };
        if (key == "bounds") {
            double v[4];
            want(4, v);
            maze.bounds_x = {v[0], v[2]};
            maze.bounds_y = {v[1], v[3]};
            seen_bounds = true;
        } else if (key == "start") {
            double v[2];
            want(2, v);
            maze.start = {v[0], v[1]};
            seen_start = true;
        } else if (key == "goal") {
            double v[2];
            want(2, v);
            maze.goal = {v[0], v[1]};
            seen_goal = true;
        } else if (key == "radius") {
            double v[1];
            want(1, v);
            maze.goal_radius = v[0];
            seen_radius = true;
        } else if (key == "wall") {
            double v[4];
            want(4, v);
            maze.walls.push_back({{v[0], v[1]}, {v[2], v[3]}});
        } else {
            throw std::runtime_error("maze file line " + std::to_string(line_no) +
                                     ": unknown key '" + key + "'");
        }
    }
    if (!seen_bounds || !seen_start || !seen_goal || !seen_radius)
        throw std::runtime_error("maze file missing bounds/start/goal/radius header");
    if (maze.width() <= 0.0 || maze.height() <= 0.0)
        throw std::runtime_error("maze bounds are degenerate");

    auto inside = [&](Point p) {
        return p.x > maze.bounds_x.lo && p.x < maze.bounds_x.hi && p.y > maze.bounds_y.lo &&
               p.y < maze.bounds_y.hi;
    };
    if (!inside(maze.start) || !inside(maze.goal))
        throw std::runtime_error("maze start/goal must lie strictly inside the bounds");
    return maze;
}

MazeMap load_maze(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open maze file: " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_maze(buf.str());
}

std::string maze_to_text(const MazeMap& maze) {
    std::ostringstream out;
    out.precision(17);
    out << "bounds " << maze.bounds_x.lo << ' ' << maze.bounds_y.lo << ' ' << maze.bounds_x.hi
        << ' ' << maze.bounds_y.hi << '\n';
    out << "start " << maze.start.x << ' ' << maze.start.y << '\n';
    out << "goal " << maze.goal.x << ' ' << maze.goal.y << '\n';
    out << "radius " << maze.goal_radius << '\n';
    for (const Segment& wall : maze.walls)
        out << "wall " << wall.a.x << ' ' << wall.a.y << ' ' << wall.b.x << ' ' << wall.b.y
            << '\n';
    return out.str();
}

}  // namespace brns
