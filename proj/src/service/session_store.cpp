#include <cstdlib>
#include <fstream>
#include <random>
#include <sstream>

#include "json_codec.hpp"
#include "scefis/error.hpp"
#include "scefis/service.hpp"

namespace scefis {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    if (!in) throw IoError("cannot open " + p.string());
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_atomic(const fs::path& p, const std::string& text) {
    const auto tmp = p.string() + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write " + tmp);
        out << text;
        out.flush();
        if (!out) throw IoError("write failed: " + tmp);
    }
    fs::rename(tmp, p);
}

std::string new_session_id() {
    static std::mutex mu;
    static std::mt19937_64 rng(std::random_device{}());
    std::lock_guard lock(mu);
    char buf[33];
    std::snprintf(buf, sizeof buf, "%016llx%016llx", static_cast<unsigned long long>(rng()),
                  static_cast<unsigned long long>(rng()));
    return buf;
}

bool valid_ref(const std::string& s) {
    if (s.empty() || s.size() > 128) return false;
    for (char c : s)
        if (!(std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_' || c == '.')) return false;
    return s != "." && s != "..";
}

}  // namespace

fs::path model_dir(const fs::path& data_dir, const std::string& dataset, const std::string& config) {
    return data_dir / "models" / (dataset + "__" + config);
}

void save_model(const TrainedModel& model, const fs::path& dir) {
    fs::create_directories(dir);
    write_atomic(dir / "selfconfig.json", self_config_to_json(model.self_config));
    write_atomic(dir / "rules.json", rule_base_to_json(model.rules));
    write_atomic(dir / "queue.json", json(model.queue).dump());
}

TrainedModel load_model(const fs::path& dir) {
    TrainedModel m;
    m.self_config = self_config_from_json(read_file(dir / "selfconfig.json"));
    m.rules = rule_base_from_json(read_file(dir / "rules.json"));
    try {
        m.queue = json::parse(read_file(dir / "queue.json")).get<std::vector<std::string>>();
    } catch (const json::exception& e) {
        throw IoError("queue.json: " + std::string(e.what()));
    }
    require(static_cast<int>(m.self_config.selected_columns.size()) == m.rules.input_dim,
            "model: rule base width does not match the selected features");
    return m;
}

TrainedModel train_model(const Dataset& dataset, const PipelineConfig& cfg) {
    Dataset ds = dataset;
    ds.make_splits(1, cfg.seed, cfg.train_count);
    const auto& split = ds.splits.front();
    DetectorOptions opts;
    opts.order = cfg.seed_order;
    const auto store = FeatureStore::build(ds, opts);

    std::vector<std::string> norm_ids = split.train;
    if (cfg.normalize_on_all_images)
        for (const auto& id : split.test) norm_ids.push_back(id);
    TrainedModel model;
    model.self_config = self_configure(ds, store, cfg, norm_ids).config;

    std::map<std::string, BestParamRecord> best;
    for (const auto& id : split.train) {
        const auto& s = ds.get(id);
        best[id] = best_parameter_search(s.image, s.gold, cfg.segmenter, store.contexts.at(id), id);
    }
    model.rules = train(ds, split.train, store, model.self_config, best, cfg);
    model.queue = split.test;
    return model;
}

fs::path resolve_data_dir(const fs::path& fallback) {
    if (const char* env = std::getenv("SCEFIS_DATA_DIR"); env && *env) return env;
    return fallback;
}

struct SessionStore::Context {
    std::string dataset;
    std::string config;
    Dataset ds;
    PipelineConfig cfg;
    FeatureStore store;
    TrainedModel model;
};

struct SessionStore::Session {
    std::string id;
    std::shared_ptr<Context> ctx;
    fs::path dir;
    std::shared_mutex mu;

    RuleBase rb;
    std::vector<std::string> queue;
    EvolutionLog history;
    std::vector<std::size_t> trajectory;
    std::optional<std::chrono::steady_clock::time_point> head_served;

    json state_json() const {
        json entries = json::array();
        for (const auto& e : history.entries) entries.push_back(codec::entry_to_json(e));
        return {{"seq", history.entries.size()},
                {"queue", queue},
                {"history", entries},
                {"trajectory", trajectory},
                {"rules", json::parse(rule_base_to_json(rb))}};
    }

    void append_event(const json& event) {
        std::ofstream out(dir / "events.jsonl", std::ios::binary | std::ios::app);
        if (!out) throw IoError("cannot append to the session event log");
        out << event.dump() << "\n";
        out.flush();
        if (!out) throw IoError("session event log write failed");
    }

    void snapshot() { write_atomic(dir / "state.json", state_json().dump()); }

    /// One feedback or skip step; shared by live submissions and replay.
    EvolutionEntry step(const std::string& image_id, const std::optional<BinaryMask>& corrected) {
        const auto& sample = ctx->ds.get(image_id);
        const auto prop = propose(rb, sample, ctx->store, ctx->model.self_config, ctx->cfg.segmenter);
        EvolutionEntry e;
        e.image_id = image_id;
        e.t_o = prop.t_o;
        e.t_star = prop.t_star;
        if (corrected) {
            e.score = jaccard(prop.mask, *corrected);
            rb = apply_feedback(rb, sample, *corrected, ctx->store, ctx->model.self_config, ctx->cfg.segmenter, e);
        } else {
            e.skipped = true;
            e.rule_count = rb.rule_count();
            e.rows_m = static_cast<std::size_t>(rb.rows());
        }
        queue.erase(queue.begin());
        history.entries.push_back(e);
        trajectory.push_back(e.rule_count);
        head_served.reset();
        return e;
    }

    void reset_to_model() {
        rb = ctx->model.rules;
        queue = ctx->model.queue;
        history = {};
        trajectory = {rb.rule_count()};
        head_served.reset();
    }
};

SessionStore::SessionStore(fs::path data_dir) : data_dir_(std::move(data_dir)) {
    fs::create_directories(data_dir_ / "sessions");
}

SessionStore::~SessionStore() = default;

void SessionStore::register_dataset(const std::string& name, const fs::path& root) {
    std::lock_guard lock(mu_);
    datasets_[name] = root;
}

void SessionStore::register_config(const std::string& name, const fs::path& file) {
    std::lock_guard lock(mu_);
    configs_[name] = file;
}

std::shared_ptr<SessionStore::Context> SessionStore::context(const std::string& dataset, const std::string& config) {
    // Caller holds mu_.
    const auto key = dataset + "__" + config;
    if (auto it = contexts_.find(key); it != contexts_.end()) return it->second;
    if (!valid_ref(dataset)) throw ServiceError(404, "unknown dataset '" + dataset + "'");
    if (!valid_ref(config)) throw ServiceError(404, "unknown config '" + config + "'");

    fs::path ds_root;
    if (auto it = datasets_.find(dataset); it != datasets_.end())
        ds_root = it->second;
    else
        ds_root = data_dir_ / "datasets" / dataset;
    if (!fs::is_directory(ds_root / "images"))
        throw ServiceError(404, "unknown dataset '" + dataset + "'",
                           "pass --dataset to `scefis serve` or place it under " + (data_dir_ / "datasets").string());
    fs::path cfg_file;
    if (auto it = configs_.find(config); it != configs_.end())
        cfg_file = it->second;
    else
        cfg_file = data_dir_ / "configs" / (config + ".cfg");
    if (!fs::is_regular_file(cfg_file))
        throw ServiceError(404, "unknown config '" + config + "'",
                           "pass --config to `scefis serve` or place it under " + (data_dir_ / "configs").string());
    const auto mdir = model_dir(data_dir_, dataset, config);
    if (!fs::is_regular_file(mdir / "rules.json"))
        throw ServiceError(404, "no trained rule base for dataset '" + dataset + "' and config '" + config + "'",
                           "run `scefis train --dataset " + ds_root.string() + " --config " + cfg_file.string() +
                               " --data-dir " + data_dir_.string() + "` first");

    auto ctx = std::make_shared<Context>();
    ctx->dataset = dataset;
    ctx->config = config;
    ctx->ds = Dataset::load(ds_root);
    ctx->cfg = PipelineConfig::load(cfg_file);
    ctx->model = load_model(mdir);
    DetectorOptions opts;
    opts.order = ctx->cfg.seed_order;
    ctx->store = FeatureStore::build(ctx->ds, opts);
    if (ctx->store.window_z != ctx->model.self_config.window_z)
        throw ServiceError(422, "dataset window size differs from the trained model",
                           "retrain the model for this dataset");
    for (const auto& id : ctx->model.queue) ctx->ds.index_of(id);
    contexts_[key] = ctx;
    return ctx;
}

std::string SessionStore::create_session(const std::string& dataset, const std::string& config) {
    std::lock_guard lock(mu_);
    auto ctx = context(dataset, config);
    auto s = std::make_shared<Session>();
    s->id = new_session_id();
    s->ctx = ctx;
    s->dir = data_dir_ / "sessions" / s->id;
    fs::create_directories(s->dir);
    s->reset_to_model();
    write_atomic(s->dir / "session.json",
                 json{{"id", s->id}, {"dataset", dataset}, {"config", config}, {"queue", s->queue}}.dump(1));
    std::ofstream(s->dir / "events.jsonl", std::ios::app).close();
    s->snapshot();
    sessions_[s->id] = s;
    return s->id;
}

std::shared_ptr<SessionStore::Session> SessionStore::open_session(const std::string& id) {
    // Caller holds mu_.
    const auto dir = data_dir_ / "sessions" / id;
    const auto meta = json::parse(read_file(dir / "session.json"));
    auto s = std::make_shared<Session>();
    s->id = id;
    s->dir = dir;
    s->ctx = context(meta.at("dataset").get<std::string>(), meta.at("config").get<std::string>());

    // Events up to the first unreadable line; a torn tail was never acknowledged.
    std::vector<json> events;
    bool torn = false;
    {
        std::ifstream in(dir / "events.jsonl");
        std::string line;
        while (std::getline(in, line)) {
            if (line.empty()) continue;
            try {
                events.push_back(json::parse(line));
            } catch (const json::exception&) {
                torn = true;
                break;
            }
        }
    }

    bool restored = false;
    if (fs::exists(dir / "state.json")) {
        try {
            const auto st = json::parse(read_file(dir / "state.json"));
            if (st.at("seq").get<std::size_t>() == events.size()) {
                s->rb = rule_base_from_json(st.at("rules").dump());
                s->queue = st.at("queue").get<std::vector<std::string>>();
                for (const auto& e : st.at("history")) s->history.entries.push_back(codec::entry_from_json(e));
                s->trajectory = st.at("trajectory").get<std::vector<std::size_t>>();
                restored = true;
            }
        } catch (const std::exception&) {
            restored = false;
        }
    }
    if (!restored) {
        s->reset_to_model();
        for (const auto& ev : events) {
            std::optional<BinaryMask> mask;
            if (ev.at("type") == "feedback") mask = decode_mask(base64_decode(ev.at("mask_png").get<std::string>()));
            s->step(ev.at("image_id").get<std::string>(), mask);
        }
    }
    if (torn || !restored) {
        // Later appends must not land after a partial line.
        std::string rewritten;
        for (const auto& ev : events) rewritten += ev.dump() + "\n";
        write_atomic(dir / "events.jsonl", rewritten);
        if (!restored) s->snapshot();
    }
    return s;
}

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) {
    std::lock_guard lock(mu_);
    if (auto it = sessions_.find(id); it != sessions_.end()) return it->second;
    if (!valid_ref(id) || !fs::is_regular_file(data_dir_ / "sessions" / id / "session.json"))
        throw ServiceError(404, "unknown session '" + id + "'");
    auto s = open_session(id);
    sessions_[id] = s;
    return s;
}

std::vector<std::string> SessionStore::session_ids() {
    std::vector<std::string> out;
    for (const auto& e : fs::directory_iterator(data_dir_ / "sessions"))
        if (fs::is_regular_file(e.path() / "session.json")) out.push_back(e.path().filename().string());
    std::sort(out.begin(), out.end());
    return out;
}

void SessionStore::expire_head(Session& s) {
    // Caller holds the session's exclusive lock.
    if (!s.head_served || s.queue.empty()) return;
    const auto limit = std::chrono::milliseconds(s.ctx->cfg.feedback_timeout_ms);
    if (std::chrono::steady_clock::now() - *s.head_served <= limit) return;
    const auto id = s.queue.front();
    s.append_event({{"seq", s.history.entries.size() + 1}, {"type", "skip"}, {"image_id", id}});
    s.step(id, std::nullopt);
    s.snapshot();
}

NextProposal SessionStore::next(const std::string& session_id) {
    auto s = find(session_id);
    {
        std::unique_lock lock(s->mu);
        expire_head(*s);
        if (!s->queue.empty() && !s->head_served) s->head_served = std::chrono::steady_clock::now();
    }
    std::shared_lock lock(s->mu);
    NextProposal out;
    out.rule_count = s->rb.rule_count();
    out.processed = s->history.entries.size();
    out.remaining = s->queue.size();
    if (s->queue.empty()) {
        out.complete = true;
        return out;
    }
    const auto& sample = s->ctx->ds.get(s->queue.front());
    const auto prop = propose(s->rb, sample, s->ctx->store, s->ctx->model.self_config, s->ctx->cfg.segmenter);
    out.image_id = sample.id;
    out.image = sample.image;
    out.mask = prop.mask;
    out.t_star = prop.t_star;
    out.t_o = prop.t_o;
    return out;
}

FeedbackResult SessionStore::submit(const std::string& session_id, const std::string& image_id,
                                    const BinaryMask& corrected) {
    auto s = find(session_id);
    std::unique_lock lock(s->mu);
    expire_head(*s);
    for (const auto& e : s->history.entries)
        if (e.image_id == image_id)
            throw ServiceError(409, "image '" + image_id + "' was already processed in this session",
                               "fetch the current proposal with GET /sessions/" + session_id + "/next");
    if (s->queue.empty()) throw ServiceError(409, "stream complete; no image awaits feedback");
    if (s->queue.front() != image_id)
        throw ServiceError(409, "feedback out of order: expected '" + s->queue.front() + "', got '" + image_id + "'");
    const auto& sample = s->ctx->ds.get(image_id);
    if (!corrected.same_shape(sample.image))
        throw ServiceError(422, "mask is " + std::to_string(corrected.width()) + "x" +
                                    std::to_string(corrected.height()) + ", image is " +
                                    std::to_string(sample.image.width()) + "x" + std::to_string(sample.image.height()));

    // Write-ahead: the event is durable before the in-memory state moves on.
    s->append_event({{"seq", s->history.entries.size() + 1},
                     {"type", "feedback"},
                     {"image_id", image_id},
                     {"mask_png", base64_encode(encode_png(corrected))}});
    const auto e = s->step(image_id, corrected);
    s->snapshot();
    return {e.image_id, e.t_b, e.score, e.rule_count, e.rows_m, e.appended_rows};
}

EvolutionLog SessionStore::log(const std::string& session_id) {
    auto s = find(session_id);
    std::shared_lock lock(s->mu);
    return s->history;
}

RuleStats SessionStore::stats(const std::string& session_id) {
    auto s = find(session_id);
    std::shared_lock lock(s->mu);
    return {s->rb.rule_count(), static_cast<std::size_t>(s->rb.rows()), s->trajectory};
}

RuleBase SessionStore::rules(const std::string& session_id) {
    auto s = find(session_id);
    std::shared_lock lock(s->mu);
    return s->rb;
}

RuleBase SessionStore::replay(const std::string& session_id) {
    auto s = find(session_id);
    std::shared_lock lock(s->mu);
    Session shadow;
    shadow.ctx = s->ctx;
    shadow.reset_to_model();
    std::ifstream in(s->dir / "events.jsonl");
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto ev = json::parse(line);
        std::optional<BinaryMask> mask;
        if (ev.at("type") == "feedback") mask = decode_mask(base64_decode(ev.at("mask_png").get<std::string>()));
        shadow.step(ev.at("image_id").get<std::string>(), mask);
    }
    return shadow.rb;
}

}  // namespace scefis
