#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <shared_mutex>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "scefis/pipeline.hpp"

namespace httplib {
class Server;
}

namespace scefis {

std::string base64_encode(std::span<const std::uint8_t> bytes);
std::vector<std::uint8_t> base64_decode(const std::string& text);

/// Error carrying an HTTP status (404 unknown reference, 409 conflict, 422 validation).
class ServiceError : public std::runtime_error {
public:
    ServiceError(int status, const std::string& msg, std::string hint = {})
        : std::runtime_error(msg), status_(status), hint_(std::move(hint)) {}
    int status() const { return status_; }
    const std::string& hint() const { return hint_; }

private:
    int status_;
    std::string hint_;
};

/// Everything a session needs that was produced offline by `scefis train`.
struct TrainedModel {
    SelfConfig self_config;
    RuleBase rules;
    std::vector<std::string> queue;  ///< test images of the configured first split, in order
};

/// `<data_dir>/models/<dataset>__<config>/`
std::filesystem::path model_dir(const std::filesystem::path& data_dir, const std::string& dataset,
                                const std::string& config);
void save_model(const TrainedModel& model, const std::filesystem::path& dir);
TrainedModel load_model(const std::filesystem::path& dir);

/// Trains on the first of the config's seeded splits; the queue is that split's test list.
TrainedModel train_model(const Dataset& ds, const PipelineConfig& cfg);

/// Data root: $SCEFIS_DATA_DIR if set, else `fallback`.
std::filesystem::path resolve_data_dir(const std::filesystem::path& fallback);

struct NextProposal {
    bool complete = false;
    std::string image_id;
    GrayImage image;
    BinaryMask mask;
    double t_star = 0.0;
    std::vector<double> t_o;
    std::size_t rule_count = 0;
    std::size_t remaining = 0;
    std::size_t processed = 0;
};

struct FeedbackResult {
    std::string image_id;
    double t_b = 0.0;
    double score = 0.0;
    std::size_t rule_count = 0;
    std::size_t rows_m = 0;
    int appended_rows = 0;
};

struct RuleStats {
    std::size_t rule_count = 0;
    std::size_t rows_m = 0;
    std::vector<std::size_t> trajectory;  ///< initial count, then one per processed image
};

/**
 * Sessions over trained models, persisted under `<data_dir>/sessions/<id>/`.
 *
 * Each session keeps an append-only `events.jsonl` (one line per feedback or skip event,
 * corrected mask included) and a rule-base snapshot rewritten atomically after every
 * event. A submission is acknowledged only after both are on disk. On open, a session
 * whose snapshot lags the event log is rebuilt by replaying the log from the model.
 */
class SessionStore {
public:
    explicit SessionStore(std::filesystem::path data_dir);
    ~SessionStore();

    void register_dataset(const std::string& name, const std::filesystem::path& root);
    void register_config(const std::string& name, const std::filesystem::path& file);

    std::string create_session(const std::string& dataset, const std::string& config);
    NextProposal next(const std::string& session_id);
    FeedbackResult submit(const std::string& session_id, const std::string& image_id, const BinaryMask& corrected);
    EvolutionLog log(const std::string& session_id);
    RuleStats stats(const std::string& session_id);
    std::vector<std::string> session_ids();

    /// Current rule base (a copy).
    RuleBase rules(const std::string& session_id);
    /// Rebuilds the rule base from the model and the event log alone.
    RuleBase replay(const std::string& session_id);

    const std::filesystem::path& data_dir() const { return data_dir_; }

private:
    struct Session;
    struct Context;

    std::shared_ptr<Session> find(const std::string& id);
    std::shared_ptr<Context> context(const std::string& dataset, const std::string& config);
    std::shared_ptr<Session> open_session(const std::string& id);
    void expire_head(Session& s);

    std::filesystem::path data_dir_;
    std::mutex mu_;
    std::map<std::string, std::filesystem::path> datasets_;
    std::map<std::string, std::filesystem::path> configs_;
    std::map<std::string, std::shared_ptr<Context>> contexts_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

/// Installs the JSON endpoints on `server`.
void install_routes(httplib::Server& server, SessionStore& store);

/// Blocking HTTP server on host:port.
void serve(SessionStore& store, const std::string& host, int port);

}  // namespace scefis
