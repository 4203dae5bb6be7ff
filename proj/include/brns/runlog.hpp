#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "brns/archive.hpp"
#include "brns/mlp.hpp"
#include "brns/types.hpp"

namespace brns {

inline constexpr const char* kRunLogSchema = "brns-runlog-v1";

nlohmann::json mlp_to_json(const MlpNetwork& net);
MlpNetwork mlp_from_json(const nlohmann::json& j);

/// Offspring evaluation record (at generation 0: the initial population).
struct OffspringRecord {
    std::uint64_t id = 0;
    std::optional<std::uint64_t> parent_id;
    Vec behavior;
    double novelty = 0.0;
    double fitness = 0.0;
};

/// Post-selection population member with the novelty it carried live.
struct PopulationEntry {
    std::uint64_t id = 0;
    std::optional<std::uint64_t> parent_id;
    int age = 0;
    Vec behavior;
    double novelty = 0.0;
};

struct GenerationRecord {
    int generation = 0;
    std::vector<OffspringRecord> offspring;
    std::vector<PopulationEntry> population;
    std::vector<std::uint64_t> new_solutions;
    /// Trainable encoder as used when scoring this generation
    /// (stored every snapshot_interval generations).
    std::optional<MlpNetwork> encoder_snapshot;
    /// Archive maintenance applied at the end of this generation.
    std::optional<ArchiveDelta> archive_delta;
};

/// Full record of one run: header metadata, per-generation records, solution
/// set, and the novelty-computation timings.
///
/// Serialized as line-delimited JSON: one header line, optional global records
/// (frozen encoder, warmup stats), one line per generation, one end line.
/// Timings are wall-clock measurements and live in a `<file>.timings.csv`
/// sidecar so the main file is byte-stable for a fixed (config, seed).
struct RunLog {
    std::uint64_t seed = 0;
    std::string estimator;  // "brns" | "archive"
    std::string config_digest;
    nlohmann::json config_echo;

    std::optional<MlpNetwork> frozen_encoder;  // brns only; fixed for the whole run
    std::optional<double> warmup_novelty_before;
    std::optional<double> warmup_novelty_after;

    std::vector<GenerationRecord> generations;
    std::vector<Solution> solutions;

    /// Per-generation novelty-computation wall time; parallel to generations.
    std::vector<double> novelty_time_ms;

    int generation_count() const { return static_cast<int>(generations.size()); }
};

/// Serializes the deterministic part of the log (everything but timings).
std::string runlog_to_string(const RunLog& log);

/// Writes `path` plus the `<path>.timings.csv` sidecar.
void runlog_write(const RunLog& log, const std::filesystem::path& path);

/// Reads a log written by runlog_write (sidecar optional). Throws on I/O
/// failure, malformed records, or a schema-version mismatch.
RunLog runlog_read(const std::filesystem::path& path);

/// Field-wise equality over the deterministic content (ignores timings).
bool runlog_equal(const RunLog& a, const RunLog& b);

/// Archive states over a run, reconstructed from the per-generation deltas.
/// State g is the archive as it stood when generation g was scored (deltas of
/// generations 0..g-1 applied).
class ArchiveTimeline {
public:
    explicit ArchiveTimeline(const RunLog& log);

    /// Advances to the scoring state of generation g. Generations must be
    /// requested in non-decreasing order.
    const std::vector<Vec>& at(int generation);

private:
    const RunLog* log_;
    std::vector<Vec> entries_;
    int next_delta_ = 0;  // index of the first unapplied delta
};

}  // namespace brns
