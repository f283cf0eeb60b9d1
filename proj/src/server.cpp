#include <httplib.h>
#include <json.hpp>

#include <algorithm>
#include <cctype>

#include "owlink/workbench.hpp"

namespace owlink {

using nlohmann::json;

struct HttpService::Impl {
    Workspace& ws;
    httplib::Server server;

    explicit Impl(Workspace& w) : ws(w) { routes(); }

    static void reply(httplib::Response& res, int status, const json& data, const json& error) {
        res.status = status;
        res.set_content(json{{"data", data}, {"error", error}}.dump(), "application/json");
    }

    static void fail(httplib::Response& res, int status, const std::string& code, const std::string& message) {
        reply(res, status, nullptr, json{{"code", code}, {"message", message}});
    }

    static std::string param(const httplib::Request& req, const char* key, bool required = true) {
        if (req.has_param(key)) return req.get_param_value(key);
        if (required) throw WorkbenchError("bad-request", std::string("missing parameter '") + key + "'");
        return {};
    }

    static std::size_t count_param(const httplib::Request& req, const char* key, std::size_t fallback) {
        if (!req.has_param(key)) return fallback;
        const auto v = req.get_param_value(key);
        // stoull accepts a sign and wraps
        const bool digits = !v.empty() && std::all_of(v.begin(), v.end(), [](unsigned char c) { return std::isdigit(c); });
        try {
            if (digits) return std::stoull(v);
        } catch (const std::exception&) {
        }
        throw WorkbenchError("bad-request", std::string("parameter '") + key + "' must be a non-negative integer");
    }

    template <typename Fn>
    static auto guarded(Fn fn) {
        return [fn](const httplib::Request& req, httplib::Response& res) {
            try {
                fn(req, res);
            } catch (const WorkbenchError& e) {
                fail(res, e.status(), e.code(), e.what());
            } catch (const json::exception& e) {
                fail(res, 400, "bad-request", e.what());
            } catch (const std::exception& e) {
                fail(res, 500, "internal", e.what());
            }
        };
    }

    void routes() {
        server.Get("/stats", guarded([this](const httplib::Request&, httplib::Response& res) {
                       const auto s = ws.stats();
                       reply(res, 200,
                             json{{"split", s.split},
                                  {"vertices", s.vertices},
                                  {"relations", s.relations},
                                  {"closed_triples", s.closed_triples},
                                  {"closed_mentions", s.closed_mentions},
                                  {"closed_contexts", s.closed_contexts},
                                  {"split_mentions", s.split_mentions},
                                  {"split_contexts", s.split_contexts},
                                  {"split_tasks", s.split_tasks},
                                  {"overlay_active", s.overlay_active},
                                  {"overlay_log", s.overlay_log},
                                  {"has_model", s.has_model}},
                             nullptr);
                   }));

        server.Get("/ranking", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const auto page = ws.query_ranking(
                           param(req, "vertex"), param(req, "relation"), param(req, "direction"),
                           count_param(req, "limit", 20), count_param(req, "offset", 0),
                           parse_engine(param(req, "engine", false)));
                       json items = json::array();
                       for (const auto& it : page.items)
                           items.push_back({{"context", it.context},
                                            {"sentence", it.sentence},
                                            {"mention", it.mention},
                                            {"score", it.score}});
                       reply(res, 200, json{{"total", page.total}, {"offset", page.offset}, {"items", items}}, nullptr);
                   }));

        server.Get("/linking", guarded([this](const httplib::Request& req, httplib::Response& res) {
                       const auto page = ws.query_linking(
                           param(req, "mention"), param(req, "relation"), param(req, "direction"),
                           count_param(req, "limit", 20), count_param(req, "offset", 0),
                           parse_engine(param(req, "engine", false)));
                       json items = json::array();
                       for (const auto& it : page.items)
                           items.push_back({{"vertex", it.vertex}, {"label", it.label}, {"score", it.score}});
                       reply(res, 200, json{{"total", page.total}, {"offset", page.offset}, {"items", items}}, nullptr);
                   }));

        server.Post("/triples", guarded([this](const httplib::Request& req, httplib::Response& res) {
                        const auto body = json::parse(req.body);
                        auto field = [&](const char* k) {
                            if (!body.contains(k) || !body[k].is_string())
                                throw WorkbenchError("bad-request", std::string("body needs string field '") + k + "'");
                            return body[k].get<std::string>();
                        };
                        const auto id = ws.accept_triple(field("mention"), field("relation"), field("vertex"),
                                                         field("direction"));
                        reply(res, 200, json{{"id", id}}, nullptr);
                    }));

        server.Delete(R"(/triples/(\d+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                          const auto id = std::stoull(req.matches[1].str());
                          ws.retract_triple(id);
                          reply(res, 200, json{{"id", id}, {"retracted", true}}, nullptr);
                      }));

        server.Get("/export", guarded([this](const httplib::Request&, httplib::Response& res) {
                       const auto tsv = ws.export_tsv();
                       const auto rows = static_cast<std::size_t>(std::count(tsv.begin(), tsv.end(), '\n')) - 1;
                       reply(res, 200, json{{"rows", rows}, {"tsv", tsv}}, nullptr);
                   }));

        server.set_error_handler([](const httplib::Request&, httplib::Response& res) {
            if (res.body.empty()) fail(res, res.status, "not-found", "no such endpoint");
        });
    }
};

HttpService::HttpService(Workspace& ws) : impl_(std::make_unique<Impl>(ws)) {}

HttpService::~HttpService() = default;

int HttpService::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    if (!impl_->server.bind_to_port(host, port)) return -1;
    return port;
}

void HttpService::listen() { impl_->server.listen_after_bind(); }

void HttpService::stop() { impl_->server.stop(); }

}  // namespace owlink
