#include <doctest.h>

#include <filesystem>

#include "recon/capture.hpp"
#include "recon/image.hpp"
#include "recon/orchestrator.hpp"
#include "recon/rng.hpp"

using namespace recon;

namespace {

std::filesystem::path fresh_dir(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / name;
    std::filesystem::remove_all(dir);
    return dir;
}

// Small dataset so orchestrator tests stay fast.
void seed_dataset(ObjectStore& store, const std::string& key, int frames = 4) {
    CaptureConfig cfg;
    cfg.frames = frames;
    cfg.intrinsics = CameraIntrinsics(64, 64, 80);
    Rng rng(111);
    cfg.drift = {{2, {rng.rotation(), {0.03, -0.02, 0.01}}}};
    store.put("pipeline", key, pack_dataset(export_session(capture_session(cfg))));
}

OrchestratorConfig small_config() {
    OrchestratorConfig cfg;
    cfg.grid_resolution = 24;
    return cfg;
}

} // namespace

TEST_SUITE("orchestrator") {

TEST_CASE("submit creates pending runs with distinct ids") {
    ObjectStore store(fresh_dir("recon-orch-submit"));
    Orchestrator orch(store, small_config());
    seed_dataset(store, "datasets/a.zip");

    const std::string r1 = orch.submit("datasets/a.zip");
    const std::string r2 = orch.submit("datasets/a.zip");
    CHECK(r1 != r2);

    const PipelineRun run = orch.load_run(r1);
    CHECK(run.dataset_key == "datasets/a.zip");
    for (const StageRecord& s : run.stages) {
        CHECK(s.state == StageState::Pending);
        CHECK(s.attempts == 0);
    }

    CHECK_THROWS_AS(orch.submit("datasets/missing.zip"), NotFoundError);
    CHECK_THROWS_AS(orch.load_run("run-9999"), NotFoundError);
}

TEST_CASE("a fresh run steps to three successes and the artifact manifest") {
    ObjectStore store(fresh_dir("recon-orch-run"));
    Orchestrator orch(store, small_config());
    seed_dataset(store, "datasets/a.zip");

    const std::string id = orch.submit("datasets/a.zip");
    PipelineRun run = orch.load_run(id);

    CHECK(orch.step(run));  // ingest
    CHECK(run.stages[0].state == StageState::Succeeded);
    CHECK(run.stages[1].state == StageState::Pending);

    CHECK(orch.step(run));  // preprocess
    CHECK(orch.step(run));  // reconstruct
    CHECK(run.succeeded());
    CHECK_FALSE(orch.step(run));  // terminal -> no-op

    for (const char* name : {"mesh.obj", "mesh.mtl", "texture_kd.png", "texture_ks.png",
                             "texture_n.png"})
        CHECK(store.exists("pipeline", "runs/" + id + "/artifacts/" + name));

    // intermediate outputs cached for every stage
    CHECK(store.exists("pipeline", "runs/" + id + "/ingest/dataset.zip"));
    CHECK(store.exists("pipeline", "runs/" + id + "/preprocess/dataset.zip"));
    CHECK(store.exists("pipeline", "runs/" + id + "/reconstruct/grid.bin"));
}

TEST_CASE("stage ordering: reconstruct never starts before preprocess succeeded") {
    ObjectStore store(fresh_dir("recon-orch-order"));
    Orchestrator orch(store, small_config());
    seed_dataset(store, "datasets/a.zip");
    const std::string id = orch.submit("datasets/a.zip");
    PipelineRun run = orch.load_run(id);

    while (!run.terminal()) {
        const StageState pre = run.stages[1].state;
        orch.step(run);
        if (run.stages[2].state != StageState::Pending)
            CHECK(pre == StageState::Succeeded);
    }
}

TEST_CASE("injected failure consumes the retry budget then fails the run") {
    ObjectStore store(fresh_dir("recon-orch-fail"));
    OrchestratorConfig cfg = small_config();
    cfg.retries = 1;
    Orchestrator orch(store, cfg);
    seed_dataset(store, "datasets/a.zip");
    const std::string id = orch.submit("datasets/a.zip");
    PipelineRun run = orch.load_run(id);

    orch.inject_failure("preprocess", 2);

    CHECK(orch.step(run));  // ingest ok
    CHECK(orch.step(run));  // preprocess attempt 1 fails -> back to Pending
    CHECK(run.stages[1].state == StageState::Pending);
    CHECK(run.stages[1].attempts == 1);
    CHECK(orch.step(run));  // attempt 2 fails -> Failed, budget exhausted
    CHECK(run.stages[1].state == StageState::Failed);
    CHECK(run.stages[1].attempts == 2);
    CHECK(run.stages[2].state == StageState::Pending);
    CHECK(run.failed());
    CHECK_FALSE(orch.step(run));
    CHECK(run.stages[1].error.find("injected failure") != std::string::npos);
}

TEST_CASE("stage errors are captured, not thrown") {
    ObjectStore store(fresh_dir("recon-orch-caught"));
    Orchestrator orch(store, small_config());
    // corrupt dataset: ingest must fail but step() must not throw
    store.put_text("pipeline", "datasets/junk.zip", "this is not a zip");
    const std::string id = orch.submit("datasets/junk.zip");
    PipelineRun run = orch.load_run(id);
    while (!run.terminal()) CHECK_NOTHROW(orch.step(run));
    CHECK(run.stages[0].state == StageState::Failed);
}

TEST_CASE("crash-resume skips succeeded stages via digests") {
    ObjectStore store(fresh_dir("recon-orch-resume"));
    seed_dataset(store, "datasets/a.zip");
    std::string id;

    {
        Orchestrator first(store, small_config());
        id = first.submit("datasets/a.zip");
        PipelineRun run = first.load_run(id);
        first.step(run);  // ingest
        first.step(run);  // preprocess
        CHECK(run.stages[1].state == StageState::Succeeded);
        // process "dies" here
    }

    Orchestrator second(store, small_config());
    const PipelineRun resumed = second.run_to_completion(id);
    CHECK(resumed.succeeded());
    CHECK(second.executions("ingest") == 0);
    CHECK(second.executions("preprocess") == 0);
    CHECK(second.executions("reconstruct") == 1);
}

TEST_CASE("a stage left Running by a dead process restarts from Pending") {
    ObjectStore store(fresh_dir("recon-orch-midcrash"));
    seed_dataset(store, "datasets/a.zip");
    std::string id;
    {
        Orchestrator first(store, small_config());
        id = first.submit("datasets/a.zip");
        PipelineRun run = first.load_run(id);
        first.step(run);  // ingest succeeds
    }
    // Simulate a crash mid-preprocess: the persisted record says Running.
    const std::string key = "runs/" + id + "/state.txt";
    std::string state = store.get_text("pipeline", key);
    const std::size_t pos = state.find("stage=preprocess state=Pending");
    REQUIRE(pos != std::string::npos);
    state.replace(pos, std::string("stage=preprocess state=Pending").size(),
                  "stage=preprocess state=Running");
    store.put_text("pipeline", key, state);

    Orchestrator second(store, small_config());
    const PipelineRun reloaded = second.load_run(id);
    CHECK(reloaded.stages[1].state == StageState::Pending);
    CHECK(second.run_to_completion(id).succeeded());
}

TEST_CASE("corrupt state records are rejected, not misread") {
    ObjectStore store(fresh_dir("recon-orch-badstate"));
    Orchestrator orch(store, small_config());
    seed_dataset(store, "datasets/a.zip");
    const std::string id = orch.submit("datasets/a.zip");

    const std::string key = "runs/" + id + "/state.txt";
    std::string state = store.get_text("pipeline", key);
    const std::size_t pos = state.find("attempts=0");
    REQUIRE(pos != std::string::npos);
    state.replace(pos, 10, "attempts=x");
    store.put_text("pipeline", key, state);
    CHECK_THROWS_AS(orch.load_run(id), FormatError);
}

TEST_CASE("resume re-runs a stage whose output was tampered with") {
    ObjectStore store(fresh_dir("recon-orch-tamper"));
    seed_dataset(store, "datasets/a.zip");
    std::string id;
    {
        Orchestrator first(store, small_config());
        id = first.submit("datasets/a.zip");
        PipelineRun run = first.load_run(id);
        first.step(run);
        first.step(run);
    }
    // overwrite the preprocess output with garbage
    store.put_text("pipeline", "runs/" + id + "/preprocess/dataset.zip", "junk");

    Orchestrator second(store, small_config());
    const PipelineRun reloaded = second.load_run(id);
    CHECK(reloaded.stages[1].state == StageState::Pending);

    const PipelineRun done = second.run_to_completion(id);
    CHECK(done.succeeded());
    CHECK(second.executions("preprocess") == 1);
}

TEST_CASE("previews exist for all three stages after a full run") {
    ObjectStore store(fresh_dir("recon-orch-preview"));
    Orchestrator orch(store, small_config());
    seed_dataset(store, "datasets/a.zip", 5);
    const std::string id = orch.submit("datasets/a.zip");
    const PipelineRun run = orch.run_to_completion(id);
    REQUIRE(run.succeeded());

    const std::vector<std::string> previews = store.list("pipeline", "runs/" + id + "/previews/");
    REQUIRE(previews.size() == 3);
    CHECK(previews[0] == "runs/" + id + "/previews/ingest.png");
    CHECK(previews[1] == "runs/" + id + "/previews/preprocess.png");
    CHECK(previews[2] == "runs/" + id + "/previews/reconstruct.png");

    // montage geometry: 5 masks of 512px tiles -> 3x2 grid
    const Image montage = png_decode(store.get("pipeline", previews[1]));
    CHECK(montage.width == 3 * 512);
    CHECK(montage.height == 2 * 512);

    // regeneration is idempotent
    const std::string before = store.digest("pipeline", previews[2]);
    orch.emit_preview(run, "reconstruct");
    CHECK(store.digest("pipeline", previews[2]) == before);

    // not-ready on a fresh run
    const std::string id2 = orch.submit("datasets/a.zip");
    const PipelineRun fresh = orch.load_run(id2);
    CHECK_THROWS_AS(orch.emit_preview(fresh, "preprocess"), NotReadyError);
}

TEST_CASE("run state text persists every field") {
    ObjectStore store(fresh_dir("recon-orch-state"));
    Orchestrator orch(store, small_config());
    seed_dataset(store, "datasets/a.zip");
    const std::string id = orch.submit("datasets/a.zip");
    PipelineRun run = orch.load_run(id);
    orch.step(run);

    const PipelineRun reloaded = orch.load_run(id);
    CHECK(reloaded.id == run.id);
    CHECK(reloaded.dataset_key == run.dataset_key);
    for (int i = 0; i < 3; ++i) {
        CHECK(reloaded.stages[i].name == run.stages[i].name);
        CHECK(reloaded.stages[i].state == run.stages[i].state);
        CHECK(reloaded.stages[i].attempts == run.stages[i].attempts);
        CHECK(reloaded.stages[i].output_key == run.stages[i].output_key);
        CHECK(reloaded.stages[i].output_digest == run.stages[i].output_digest);
    }
}

} // TEST_SUITE
