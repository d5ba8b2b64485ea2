// Eigen before httplib: <resolv.h> defines a `_res` macro that breaks Eigen's headers.
#include "json_codec.hpp"
#include "scefis/error.hpp"
#include "scefis/service.hpp"

#include <httplib.h>

namespace scefis {
using nlohmann::json;

namespace {

void send(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& msg, const std::string& hint = {}) {
    json body = {{"error", msg}};
    if (!hint.empty()) body["hint"] = hint;
    send(res, status, body);
}

template <typename F>
httplib::Server::Handler guarded(F f) {
    return [f](const httplib::Request& req, httplib::Response& res) {
        try {
            f(req, res);
        } catch (const ServiceError& e) {
            send_error(res, e.status(), e.what(), e.hint());
        } catch (const json::exception& e) {
            send_error(res, 400, std::string("malformed request body: ") + e.what());
        } catch (const ContractViolation& e) {
            send_error(res, 422, e.what());
        } catch (const IoError& e) {
            send_error(res, 422, e.what());
        } catch (const std::exception& e) {
            send_error(res, 500, e.what());
        }
    };
}

json parse_body(const httplib::Request& req) {
    if (req.body.empty()) throw ServiceError(400, "request body required");
    return json::parse(req.body);
}

std::string required_string(const json& body, const char* key) {
    if (!body.contains(key) || !body[key].is_string()) throw ServiceError(400, std::string("missing field '") + key + "'");
    return body[key].get<std::string>();
}

}  // namespace

void install_routes(httplib::Server& server, SessionStore& store) {
    server.Get("/health", [](const httplib::Request&, httplib::Response& res) { send(res, 200, {{"status", "ok"}}); });

    server.Post("/sessions", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        const auto id = store.create_session(required_string(body, "dataset"), required_string(body, "config"));
        const auto stats = store.stats(id);
        send(res, 201, {{"session_id", id}, {"rule_count", stats.rule_count}});
    }));

    server.Get("/sessions", guarded([&store](const httplib::Request&, httplib::Response& res) {
        send(res, 200, {{"sessions", store.session_ids()}});
    }));

    server.Get(R"(/sessions/([^/]+)/next)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const auto p = store.next(req.matches[1]);
        if (p.complete) {
            send(res, 200, {{"status", "complete"}, {"processed", p.processed}, {"rule_count", p.rule_count}});
            return;
        }
        send(res, 200,
             {{"status", "pending"},
              {"image_id", p.image_id},
              {"width", p.image.width()},
              {"height", p.image.height()},
              {"image_png", base64_encode(encode_png(p.image))},
              {"mask_png", base64_encode(encode_png(p.mask))},
              {"t_star", p.t_star},
              {"t_o", p.t_o},
              {"rule_count", p.rule_count},
              {"remaining", p.remaining},
              {"processed", p.processed}});
    }));

    server.Post(R"(/sessions/([^/]+)/feedback)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const auto body = parse_body(req);
        const auto image_id = required_string(body, "image_id");
        BinaryMask mask;
        try {
            mask = decode_mask(base64_decode(required_string(body, "mask_png")));
        } catch (const IoError& e) {
            throw ServiceError(422, std::string("mask_png is not a decodable PNG: ") + e.what());
        }
        const auto r = store.submit(req.matches[1], image_id, mask);
        send(res, 200,
             {{"image_id", r.image_id},
              {"t_b", r.t_b},
              {"score", r.score},
              {"rule_count", r.rule_count},
              {"rows_m", r.rows_m},
              {"appended_rows", r.appended_rows}});
    }));

    server.Get(R"(/sessions/([^/]+)/log)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const std::string id = req.matches[1];
        const auto log = store.log(id);
        json entries = json::array();
        std::vector<double> scores;
        for (const auto& e : log.entries) {
            entries.push_back(codec::entry_to_json(e));
            if (!e.skipped) scores.push_back(e.score);
        }
        json body = {{"session_id", id}, {"entries", entries}};
        if (!scores.empty()) {
            const auto s = summarize(scores);
            body["summary"] = {{"mean", s.mean}, {"sd", s.sd}, {"ci_lo", s.ci_lo}, {"ci_hi", s.ci_hi}, {"n", s.n}};
        }
        send(res, 200, body);
    }));

    server.Get(R"(/sessions/([^/]+)/rules/stats)", guarded([&store](const httplib::Request& req, httplib::Response& res) {
        const auto s = store.stats(req.matches[1]);
        send(res, 200, {{"rule_count", s.rule_count}, {"rows_m", s.rows_m}, {"trajectory", s.trajectory}});
    }));
}

void serve(SessionStore& store, const std::string& host, int port) {
    httplib::Server server;
    install_routes(server, store);
    if (!server.listen(host, port)) throw IoError("cannot listen on " + host + ":" + std::to_string(port));
}

}  // namespace scefis
