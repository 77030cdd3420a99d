#include "recon/orchestrator.hpp"

#include <chrono>
#include <cmath>
#include <sstream>

#include "recon/dataset.hpp"
#include "recon/preprocess.hpp"
#include "recon/reconstruct.hpp"

namespace recon {

namespace {

std::int64_t now_unix() {
    return std::chrono::duration_cast<std::chrono::seconds>(
               std::chrono::system_clock::now().time_since_epoch())
        .count();
}

void put32le(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get32le(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

constexpr char kGridMagic[8] = {'O', 'C', 'C', 'G', 'R', 'I', 'D', '1'};

std::vector<std::uint8_t> grid_to_bytes(const OccupancyGrid& g) {
    std::vector<std::uint8_t> out(kGridMagic, kGridMagic + 8);
    put32le(out, static_cast<std::uint32_t>(g.nx));
    put32le(out, static_cast<std::uint32_t>(g.ny));
    put32le(out, static_cast<std::uint32_t>(g.nz));
    out.insert(out.end(), g.occupancy.begin(), g.occupancy.end());
    return out;
}

struct GridSlice {
    int nx = 0, ny = 0, nz = 0;
    std::vector<std::uint8_t> occupancy;
};

GridSlice grid_from_bytes(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 20 || !std::equal(kGridMagic, kGridMagic + 8, bytes.begin()))
        throw FormatError("grid blob: bad magic");
    GridSlice g;
    g.nx = static_cast<int>(get32le(bytes.data() + 8));
    g.ny = static_cast<int>(get32le(bytes.data() + 12));
    g.nz = static_cast<int>(get32le(bytes.data() + 16));
    const std::size_t n = static_cast<std::size_t>(g.nx) * g.ny * g.nz;
    if (bytes.size() != 20 + n) throw FormatError("grid blob: size mismatch");
    g.occupancy.assign(bytes.begin() + 20, bytes.end());
    return g;
}

} // namespace

std::string to_string(StageState s) {
    switch (s) {
        case StageState::Pending: return "Pending";
        case StageState::Running: return "Running";
        case StageState::Succeeded: return "Succeeded";
        case StageState::Failed: return "Failed";
    }
    return "Unknown";
}

StageState stage_state_from_string(const std::string& s) {
    if (s == "Pending") return StageState::Pending;
    if (s == "Running") return StageState::Running;
    if (s == "Succeeded") return StageState::Succeeded;
    if (s == "Failed") return StageState::Failed;
    throw FormatError("run state: unknown stage state '" + s + "'");
}

bool PipelineRun::succeeded() const {
    for (const StageRecord& s : stages)
        if (s.state != StageState::Succeeded) return false;
    return true;
}

bool PipelineRun::failed() const {
    for (const StageRecord& s : stages)
        if (s.state == StageState::Failed) return true;
    return false;
}

int PipelineRun::stage_index(const std::string& name) const {
    for (int i = 0; i < 3; ++i)
        if (name == kStageNames[i]) return i;
    throw NotFoundError("run: unknown stage '" + name + "'");
}

Orchestrator::Orchestrator(ObjectStore& store, OrchestratorConfig config)
    : store_(store), cfg_(std::move(config)) {}

std::string Orchestrator::state_key(const std::string& run_id) const {
    return "runs/" + run_id + "/state.txt";
}

std::string Orchestrator::submit(const std::string& dataset_key) {
    if (!store_.exists(cfg_.bucket, dataset_key))
        throw NotFoundError("submit: dataset object '" + dataset_key + "' does not exist");

    int index = 0;
    char id[16];
    do {
        std::snprintf(id, sizeof(id), "run-%04d", index++);
    } while (store_.exists(cfg_.bucket, state_key(id)));

    PipelineRun run;
    run.id = id;
    run.dataset_key = dataset_key;
    for (int i = 0; i < 3; ++i) {
        run.stages[i].name = PipelineRun::kStageNames[i];
        run.stages[i].retry_budget = cfg_.retries;
    }
    persist(run);
    return run.id;
}

void Orchestrator::persist(const PipelineRun& run) const {
    std::ostringstream out;
    out << "run_id=" << run.id << "\n";
    out << "dataset_key=" << run.dataset_key << "\n";
    for (const StageRecord& s : run.stages) {
        out << "stage=" << s.name << " state=" << to_string(s.state)
            << " attempts=" << s.attempts << " budget=" << s.retry_budget
            << " started=" << s.started_at << " finished=" << s.finished_at
            << " output=" << s.output_key << " digest=" << s.output_digest
            << " error=" << s.error << "\n";
    }
    store_.put_text(cfg_.bucket, state_key(run.id), out.str());
}

PipelineRun Orchestrator::parse_state(const std::string& text) const {
    PipelineRun run;
    std::istringstream in(text);
    std::string line;
    int stage_idx = 0;
    while (std::getline(in, line)) {
        if (line.starts_with("run_id=")) {
            run.id = line.substr(7);
        } else if (line.starts_with("dataset_key=")) {
            run.dataset_key = line.substr(12);
        } else if (line.starts_with("stage=")) {
            if (stage_idx >= 3) throw FormatError("run state: too many stage lines");
            StageRecord& s = run.stages[stage_idx++];
            std::istringstream fields(line);
            std::string tok;
            try {
                while (fields >> tok) {
                    const std::size_t eq = tok.find('=');
                    if (eq == std::string::npos) continue;
                    const std::string key = tok.substr(0, eq);
                    const std::string val = tok.substr(eq + 1);
                    if (key == "stage") s.name = val;
                    else if (key == "state") s.state = stage_state_from_string(val);
                    else if (key == "attempts") s.attempts = std::stoi(val);
                    else if (key == "budget") s.retry_budget = std::stoi(val);
                    else if (key == "started") s.started_at = std::stoll(val);
                    else if (key == "finished") s.finished_at = std::stoll(val);
                    else if (key == "output") s.output_key = val;
                    else if (key == "digest") s.output_digest = val;
                    else if (key == "error") {
                        // error is the last field and may contain spaces
                        const std::size_t pos = line.find(" error=");
                        s.error = line.substr(pos + 7);
                        break;
                    }
                }
            } catch (const std::logic_error&) {
                throw FormatError("run state: unparseable stage line: " + line);
            }
        }
    }
    if (run.id.empty() || stage_idx != 3)
        throw FormatError("run state: incomplete record");
    return run;
}

PipelineRun Orchestrator::load_run(const std::string& run_id) const {
    if (!store_.exists(cfg_.bucket, state_key(run_id)))
        throw NotFoundError("load_run: no run '" + run_id + "'");
    PipelineRun run = parse_state(store_.get_text(cfg_.bucket, state_key(run_id)));

    // Content-addressed resume: a Succeeded stage whose output no longer
    // matches its digest must run again.
    bool changed = false;
    for (StageRecord& s : run.stages) {
        if (s.state != StageState::Succeeded) continue;
        bool ok = !s.output_key.empty() && store_.exists(cfg_.bucket, s.output_key) &&
                  store_.digest(cfg_.bucket, s.output_key) == s.output_digest;
        if (!ok) {
            s.state = StageState::Pending;
            s.output_key.clear();
            s.output_digest.clear();
            changed = true;
        }
    }
    // A stage left Running by a crashed process restarts from Pending.
    for (StageRecord& s : run.stages) {
        if (s.state == StageState::Running) {
            s.state = StageState::Pending;
            changed = true;
        }
    }
    if (changed) persist(run);
    return run;
}

std::string Orchestrator::execute_stage(PipelineRun& run, int idx) {
    const std::string& name = run.stages[idx].name;
    ++executions_[name];

    if (const auto it = injected_failures_.find(name);
        it != injected_failures_.end() && it->second > 0) {
        --it->second;
        throw Error("injected failure for stage " + name);
    }

    const std::string prefix = "runs/" + run.id + "/";
    if (name == "ingest") {
        const std::vector<std::uint8_t> bytes = store_.get(cfg_.bucket, run.dataset_key);
        unpack_dataset(bytes);  // validation only; bytes are cached verbatim
        const std::string key = prefix + "ingest/dataset.zip";
        store_.put(cfg_.bucket, key, bytes);
        return key;
    }
    if (name == "preprocess") {
        const DatasetArchive input =
            unpack_dataset(store_.get(cfg_.bucket, run.stages[0].output_key));
        PreprocessConfig pc;
        pc.tau = cfg_.tau;
        const DatasetArchive output = preprocess_stage(input, pc);
        const std::string key = prefix + "preprocess/dataset.zip";
        store_.put(cfg_.bucket, key, pack_dataset(output));
        return key;
    }
    if (name == "reconstruct") {
        const DatasetArchive input =
            unpack_dataset(store_.get(cfg_.bucket, run.stages[1].output_key));
        const ReconstructionResult result = reconstruct_dataset(
            input, cfg_.grid_resolution, cfg_.grid_min, cfg_.grid_max);

        const std::string art = prefix + "artifacts/";
        store_.put_text(cfg_.bucket, art + "mesh.obj", mesh_to_obj(result.mesh, "mesh.mtl"));
        store_.put_text(cfg_.bucket, art + "mesh.mtl", material_to_mtl());
        store_.put(cfg_.bucket, art + "texture_kd.png", png_encode(result.textures.kd));
        store_.put(cfg_.bucket, art + "texture_ks.png", png_encode(result.textures.ks));
        store_.put(cfg_.bucket, art + "texture_n.png", png_encode(result.textures.n));
        store_.put(cfg_.bucket, prefix + "reconstruct/grid.bin", grid_to_bytes(result.grid));
        return art + "mesh.obj";
    }
    throw NotFoundError("execute_stage: unknown stage '" + name + "'");
}

bool Orchestrator::step(PipelineRun& run) {
    if (run.terminal()) return false;

    int idx = -1;
    for (int i = 0; i < 3; ++i) {
        if (run.stages[i].state == StageState::Succeeded) continue;
        if (run.stages[i].state == StageState::Pending &&
            (i == 0 || run.stages[i - 1].state == StageState::Succeeded))
            idx = i;
        break;
    }
    if (idx < 0) return false;

    StageRecord& s = run.stages[idx];
    s.state = StageState::Running;
    s.started_at = now_unix();
    ++s.attempts;
    persist(run);

    try {
        const std::string key = execute_stage(run, idx);
        s.output_key = key;
        s.output_digest = store_.digest(cfg_.bucket, key);
        s.state = StageState::Succeeded;
        s.error.clear();
    } catch (const std::exception& e) {
        s.error = e.what();
        if (s.retry_budget > 0) {
            --s.retry_budget;
            s.state = StageState::Pending;
        } else {
            s.state = StageState::Failed;
        }
    }
    s.finished_at = now_unix();
    persist(run);
    return true;
}

PipelineRun Orchestrator::run_to_completion(const std::string& run_id) {
    PipelineRun run = load_run(run_id);
    while (!run.terminal())
        if (!step(run)) break;
    // Previews cover every finished stage, including stages completed by an
    // earlier process before a resume; emission is deterministic.
    for (const StageRecord& s : run.stages)
        if (s.state == StageState::Succeeded) emit_preview(run, s.name);
    return run;
}

std::string Orchestrator::emit_preview(const PipelineRun& run, const std::string& stage) {
    const int idx = run.stage_index(stage);
    const StageRecord& s = run.stages[idx];
    if (s.state != StageState::Succeeded || s.output_key.empty())
        throw NotReadyError("emit_preview: stage '" + stage + "' has no output yet");

    const std::string key = "runs/" + run.id + "/previews/" + stage + ".png";
    if (stage == "ingest") {
        const DatasetArchive a = unpack_dataset(store_.get(cfg_.bucket, s.output_key));
        store_.put(cfg_.bucket, key, png_encode(a.images.front()));
        return key;
    }
    if (stage == "preprocess") {
        const DatasetArchive a = unpack_dataset(store_.get(cfg_.bucket, s.output_key));
        const int n = static_cast<int>(a.masks.size());
        const int cols = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(n))));
        const int rows = (n + cols - 1) / cols;
        Image montage(cols * 512, rows * 512, 1);
        for (int i = 0; i < n; ++i) {
            const Image& m = a.masks[i];
            const int ox = (i % cols) * 512, oy = (i / cols) * 512;
            for (int y = 0; y < m.height; ++y)
                for (int x = 0; x < m.width; ++x)
                    montage.at(ox + x, oy + y) = m.at(x, y);
        }
        store_.put(cfg_.bucket, key, png_encode(montage));
        return key;
    }
    if (stage == "reconstruct") {
        const GridSlice g = grid_from_bytes(
            store_.get(cfg_.bucket, "runs/" + run.id + "/reconstruct/grid.bin"));
        Image slice(g.nx, g.ny, 1);
        const int z = g.nz / 2;
        for (int y = 0; y < g.ny; ++y)
            for (int x = 0; x < g.nx; ++x)
                slice.at(x, y) =
                    g.occupancy[static_cast<std::size_t>(x) +
                                static_cast<std::size_t>(g.nx) *
                                    (y + static_cast<std::size_t>(g.ny) * z)]
                        ? 255
                        : 0;
        store_.put(cfg_.bucket, key, png_encode(slice));
        return key;
    }
    throw NotFoundError("emit_preview: unknown stage '" + stage + "'");
}

int Orchestrator::executions(const std::string& stage) const {
    const auto it = executions_.find(stage);
    return it == executions_.end() ? 0 : it->second;
}

void Orchestrator::inject_failure(const std::string& stage, int times) {
    injected_failures_[stage] += times;
}

} // namespace recon
