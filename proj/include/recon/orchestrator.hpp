#pragma once

#include <array>
#include <map>
#include <string>

#include "recon/store.hpp"

namespace recon {

enum class StageState { Pending, Running, Succeeded, Failed };

std::string to_string(StageState s);
StageState stage_state_from_string(const std::string& s);

struct StageRecord {
    std::string name;
    StageState state = StageState::Pending;
    int attempts = 0;          // executions so far
    int retry_budget = 0;      // retries left before Failed becomes terminal
    std::string output_key;    // set on success
    std::string output_digest; // content digest of the stage output
    std::string error;         // last failure message
    std::int64_t started_at = 0;
    std::int64_t finished_at = 0;
};

/// One reconstruction request moving through ingest -> preprocess ->
/// reconstruct. Stage k may run only after stage k-1 succeeded; a stage that
/// exhausts its retry budget fails the run terminally.
struct PipelineRun {
    std::string id;
    std::string dataset_key;
    std::array<StageRecord, 3> stages;

    static constexpr const char* kStageNames[3] = {"ingest", "preprocess", "reconstruct"};

    bool succeeded() const;
    bool failed() const;
    bool terminal() const { return succeeded() || failed(); }
    int stage_index(const std::string& name) const;
};

struct OrchestratorConfig {
    std::string bucket = "pipeline";
    int retries = 1;            // per stage
    int grid_resolution = 96;
    double grid_min = -0.5;     // cube bounds for carving
    double grid_max = 0.5;
    double tau = 0.5;           // mask sharpening threshold
};

/// The scheduler: owns run state in the object store, dispatches the stage
/// executors, and regenerates previews. Run state is persisted after every
/// transition so a new process can resume where the last one stopped.
class Orchestrator {
public:
    Orchestrator(ObjectStore& store, OrchestratorConfig config = {});

    /// Creates a run with all stages pending. The dataset object must exist.
    std::string submit(const std::string& dataset_key);

    /// Reload a run from its persisted state. Succeeded stages are verified
    /// against their recorded output digests; a stage whose output is gone
    /// or altered drops back to Pending.
    PipelineRun load_run(const std::string& run_id) const;

    /// Advance exactly one stage transition. Returns false when the run is
    /// already terminal. Stage failures are captured into the state machine.
    bool step(PipelineRun& run);

    /// Step until terminal, emitting the stage preview after each success.
    PipelineRun run_to_completion(const std::string& run_id);

    /// Write the preview for a finished stage under previews/ and return its
    /// key. ingest: first frame; preprocess: mask montage; reconstruct:
    /// mid-grid occupancy slice.
    std::string emit_preview(const PipelineRun& run, const std::string& stage);

    /// How many times this orchestrator instance executed the given stage
    /// (resume audits rely on this being zero for skipped stages).
    int executions(const std::string& stage) const;

    /// Test hook: make the next `times` executions of a stage fail.
    void inject_failure(const std::string& stage, int times = 1);

    const OrchestratorConfig& config() const { return cfg_; }

private:
    std::string state_key(const std::string& run_id) const;
    void persist(const PipelineRun& run) const;
    PipelineRun parse_state(const std::string& text) const;
    std::string execute_stage(PipelineRun& run, int idx);  // returns output key

    ObjectStore& store_;
    OrchestratorConfig cfg_;
    std::map<std::string, int> executions_;
    std::map<std::string, int> injected_failures_;
};

} // namespace recon
