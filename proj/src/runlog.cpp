#include "brns/runlog.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace brns {

using nlohmann::json;

json mlp_to_json(const MlpNetwork& net) {
    json j;
    std::vector<std::size_t> dims;
    std::vector<std::string> acts;
    double alpha = 0.01;
    for (const Layer& layer : net.layers()) {
        if (dims.empty()) dims.push_back(layer.in_dim);
        dims.push_back(layer.out_dim);
        acts.push_back(activation_name(layer.activation));
        alpha = layer.leaky_alpha;
    }
    j["dims"] = dims;
    j["activations"] = acts;
    j["leaky_alpha"] = alpha;
    j["weights"] = net.flatten();
    return j;
}

MlpNetwork mlp_from_json(const json& j) {
    const auto dims = j.at("dims").get<std::vector<std::size_t>>();
    const auto act_names = j.at("activations").get<std::vector<std::string>>();
    std::vector<Activation> acts;
    acts.reserve(act_names.size());
    for (const auto& name : act_names) acts.push_back(activation_from_name(name));
    MlpNetwork net = MlpNetwork::zeros(dims, acts);
    if (j.contains("leaky_alpha"))
        for (Layer& layer : net.layers()) layer.leaky_alpha = j.at("leaky_alpha").get<double>();
    net.unflatten(j.at("weights").get<Vec>());
    return net;
}

namespace {

// +infinity novelty (empty reference set) is stored as JSON null
json novelty_to_json(double v) {
    if (std::isinf(v)) return nullptr;
    return v;
}

double novelty_from_json(const json& j) {
    if (j.is_null()) return std::numeric_limits<double>::infinity();
    return j.get<double>();
}

json opt_id_to_json(const std::optional<std::uint64_t>& id) {
    if (!id) return nullptr;
    return *id;
}

std::optional<std::uint64_t> opt_id_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    return j.get<std::uint64_t>();
}

json generation_to_json(const GenerationRecord& rec) {
    json j;
    j["record"] = "generation";
    j["g"] = rec.generation;
    json offspring = json::array();
    for (const OffspringRecord& o : rec.offspring) {
        offspring.push_back({{"id", o.id},
                             {"parent", opt_id_to_json(o.parent_id)},
                             {"behavior", o.behavior},
                             {"novelty", novelty_to_json(o.novelty)},
                             {"fitness", o.fitness}});
    }
    j["offspring"] = std::move(offspring);
    json population = json::array();
    for (const PopulationEntry& p : rec.population) {
        population.push_back({{"id", p.id},
                              {"parent", opt_id_to_json(p.parent_id)},
                              {"age", p.age},
                              {"behavior", p.behavior},
                              {"novelty", novelty_to_json(p.novelty)}});
    }
    j["population"] = std::move(population);
    j["solutions"] = rec.new_solutions;
    if (rec.encoder_snapshot) j["encoder"] = mlp_to_json(*rec.encoder_snapshot);
    if (rec.archive_delta) {
        j["archive_delta"] = {{"added", rec.archive_delta->added},
                              {"removed", rec.archive_delta->removed}};
    }
    return j;
}

GenerationRecord generation_from_json(const json& j) {
    GenerationRecord rec;
    rec.generation = j.at("g").get<int>();
    for (const json& o : j.at("offspring")) {
        OffspringRecord r;
        r.id = o.at("id").get<std::uint64_t>();
        r.parent_id = opt_id_from_json(o.at("parent"));
        r.behavior = o.at("behavior").get<Vec>();
        r.novelty = novelty_from_json(o.at("novelty"));
        r.fitness = o.at("fitness").get<double>();
        rec.offspring.push_back(std::move(r));
    }
    for (const json& p : j.at("population")) {
        PopulationEntry e;
        e.id = p.at("id").get<std::uint64_t>();
        e.parent_id = opt_id_from_json(p.at("parent"));
        e.age = p.at("age").get<int>();
        e.behavior = p.at("behavior").get<Vec>();
        e.novelty = novelty_from_json(p.at("novelty"));
        rec.population.push_back(std::move(e));
    }
    rec.new_solutions = j.at("solutions").get<std::vector<std::uint64_t>>();
    if (j.contains("encoder")) rec.encoder_snapshot = mlp_from_json(j.at("encoder"));
    if (j.contains("archive_delta")) {
        ArchiveDelta delta;
        delta.added = j.at("archive_delta").at("added").get<std::vector<Vec>>();
        delta.removed = j.at("archive_delta").at("removed").get<std::vector<std::size_t>>();
        rec.archive_delta = std::move(delta);
    }
    return rec;
}

}  // namespace

std::string runlog_to_string(const RunLog& log) {
    std::ostringstream out;
    json header;
    header["record"] = "header";
    header["schema"] = kRunLogSchema;
    header["seed"] = log.seed;
    header["estimator"] = log.estimator;
    header["config_digest"] = log.config_digest;
    header["config"] = log.config_echo;
    out << header.dump() << '\n';

    if (log.frozen_encoder) {
        json rec;
        rec["record"] = "frozen_encoder";
        rec["net"] = mlp_to_json(*log.frozen_encoder);
        out << rec.dump() << '\n';
    }
    if (log.warmup_novelty_before || log.warmup_novelty_after) {
        json rec;
        rec["record"] = "warmup";
        rec["mean_novelty_before"] = log.warmup_novelty_before.value_or(-1.0);
        rec["mean_novelty_after"] = log.warmup_novelty_after.value_or(-1.0);
        out << rec.dump() << '\n';
    }
    for (const GenerationRecord& rec : log.generations)
        out << generation_to_json(rec).dump() << '\n';

    json end;
    end["record"] = "end";
    end["generations"] = log.generations.size();
    json sols = json::array();
    for (const Solution& s : log.solutions)
        sols.push_back({{"id", s.id}, {"generation", s.generation}, {"behavior", s.behavior}});
    end["solution_set"] = std::move(sols);
    out << end.dump() << '\n';
    return out.str();
}

void runlog_write(const RunLog& log, const std::filesystem::path& path) {
    {
        std::ofstream out(path, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write run log: " + path.string());
        out << runlog_to_string(log);
        if (!out) throw std::runtime_error("write failed: " + path.string());
    }
    if (!log.novelty_time_ms.empty()) {
        std::filesystem::path sidecar = path;
        sidecar += ".timings.csv";
        std::ofstream out(sidecar, std::ios::binary);
        if (!out) throw std::runtime_error("cannot write timings: " + sidecar.string());
        out << "generation,novelty_ms\n";
        char buf[64];
        for (std::size_t g = 0; g < log.novelty_time_ms.size(); ++g) {
            std::snprintf(buf, sizeof(buf), "%zu,%.17g\n", g, log.novelty_time_ms[g]);
            out << buf;
        }
    }
}

RunLog runlog_read(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open run log: " + path.string());

    RunLog log;
    bool have_header = false, have_end = false;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
        } catch (const json::parse_error& e) {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": not a run log record: " + e.what());
        }
        const std::string record = j.value("record", "");
        if (record == "header") {
            const std::string schema = j.value("schema", "");
            if (schema != kRunLogSchema)
                throw std::runtime_error(path.string() + ": schema mismatch: '" + schema +
                                         "' (expected '" + kRunLogSchema + "')");
            log.seed = j.at("seed").get<std::uint64_t>();
            log.estimator = j.at("estimator").get<std::string>();
            log.config_digest = j.at("config_digest").get<std::string>();
            log.config_echo = j.at("config");
            have_header = true;
        } else if (record == "frozen_encoder") {
            log.frozen_encoder = mlp_from_json(j.at("net"));
        } else if (record == "warmup") {
            log.warmup_novelty_before = j.at("mean_novelty_before").get<double>();
            log.warmup_novelty_after = j.at("mean_novelty_after").get<double>();
        } else if (record == "generation") {
            log.generations.push_back(generation_from_json(j));
        } else if (record == "end") {
            for (const json& s : j.at("solution_set")) {
                Solution sol;
                sol.id = s.at("id").get<std::uint64_t>();
                sol.generation = s.at("generation").get<int>();
                sol.behavior = s.at("behavior").get<Vec>();
                log.solutions.push_back(std::move(sol));
            }
            have_end = true;
        } else {
            throw std::runtime_error(path.string() + ":" + std::to_string(line_no) +
                                     ": unknown record type '" + record + "'");
        }
    }
    if (!have_header) throw std::runtime_error(path.string() + ": missing header record");
    if (!have_end) throw std::runtime_error(path.string() + ": truncated (no end record)");
    for (std::size_t g = 0; g < log.generations.size(); ++g)
        if (log.generations[g].generation != static_cast<int>(g))
            throw std::runtime_error(path.string() + ": generation indices not contiguous");

    std::filesystem::path sidecar = path;
    sidecar += ".timings.csv";
    if (std::filesystem::exists(sidecar)) {
        std::ifstream tin(sidecar);
        std::string tline;
        std::getline(tin, tline);  // header
        while (std::getline(tin, tline)) {
            const auto comma = tline.find(',');
            if (comma == std::string::npos) continue;
            log.novelty_time_ms.push_back(std::stod(tline.substr(comma + 1)));
        }
    }
    return log;
}

bool runlog_equal(const RunLog& a, const RunLog& b) {
    RunLog a2 = a, b2 = b;
    a2.novelty_time_ms.clear();
    b2.novelty_time_ms.clear();
    return runlog_to_string(a2) == runlog_to_string(b2);
}

ArchiveTimeline::ArchiveTimeline(const RunLog& log) : log_(&log) {}

const std::vector<Vec>& ArchiveTimeline::at(int generation) {
    if (generation < next_delta_)
        throw std::logic_error("ArchiveTimeline must be advanced in order");
    Archive scratch;
    while (next_delta_ < generation) {
        const auto& delta = log_->generations.at(next_delta_).archive_delta;
        if (delta) {
            scratch.entries = std::move(entries_);
            archive_apply_delta(scratch, *delta);
            entries_ = std::move(scratch.entries);
        }
        ++next_delta_;
    }
    return entries_;
}

}  // namespace brns
