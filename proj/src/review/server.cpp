#include "radmark/error.hpp"
#include "radmark/review/service.hpp"

#include <httplib.h>

namespace radmark {

struct ReviewServer::Impl {
    explicit Impl(ReviewService& s) : service(s) {}
    ReviewService& service;
    httplib::Server http;
    int port = 0;
};

namespace {

void send(httplib::Response& res, const ApiResponse& api) {
    res.status = api.status;
    res.set_content(api.body, api.content_type);
}

std::optional<std::string> token_of(const httplib::Request& req) {
    if (req.has_header("X-Radmark-Token")) return req.get_header_value("X-Radmark-Token");
    return std::nullopt;
}

std::optional<std::size_t> size_param(const httplib::Request& req, const char* key) {
    if (!req.has_param(key)) return std::nullopt;
    const auto v = req.get_param_value(key);
    char* end = nullptr;
    const auto n = std::strtoull(v.c_str(), &end, 10);
    if (v.empty() || *end) return 0;
    return static_cast<std::size_t>(n);
}

} // namespace

ReviewServer::ReviewServer(ReviewService& service) : impl_(std::make_unique<Impl>(service)) {
    auto& http = impl_->http;
    auto& svc = impl_->service;
    const auto threads = static_cast<std::size_t>(svc.config().threads);
    http.new_task_queue = [threads] { return new httplib::ThreadPool(threads); };

    http.set_pre_routing_handler([&svc](const httplib::Request& req, httplib::Response& res) {
        if (req.path.rfind("/api/", 0) == 0 && !svc.authorized(token_of(req))) {
            send(res, {401, R"({"error":"unauthorized","message":"missing or wrong X-Radmark-Token"})"});
            return httplib::Server::HandlerResponse::Handled;
        }
        return httplib::Server::HandlerResponse::Unhandled;
    });
    http.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
        nlohmann::json body{{"error", "internal"}, {"message", "unexpected failure"}};
        try {
            std::rethrow_exception(ep);
        } catch (const Error& e) {
            body = {{"error", to_string(e.kind())}, {"message", e.what()}};
        } catch (const std::exception& e) {
            body["message"] = e.what();
        }
        send(res, {500, body.dump()});
    });

    const std::string id = "([A-Za-z0-9_][A-Za-z0-9._-]*)";
    http.Get("/api/health", [](const httplib::Request&, httplib::Response& res) { send(res, {200, R"({"ok":true})"}); });
    http.Get("/api/registry", [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.get_registry()); });
    http.Get("/api/images", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.list_images(size_param(req, "page").value_or(1), size_param(req, "page_size")));
    });
    http.Get("/api/images/" + id + "/render", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.render(req.matches[1], req.has_param("frame") ? req.get_param_value("frame") : "original"));
    });
    http.Get("/api/images/" + id + "/predictions",
             [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.predictions(req.matches[1])); });
    http.Get("/api/images/" + id + "/record",
             [&svc](const httplib::Request& req, httplib::Response& res) { send(res, svc.record(req.matches[1])); });
    http.Get("/api/images/" + id + "/revisions/([0-9]{1,6})", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.revision(req.matches[1], std::stoi(req.matches[2])));
    });
    http.Post("/api/images/" + id + "/corrections", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.post_corrections(req.matches[1], req.body));
    });
    http.Post("/api/images/" + id + "/finalize", [&svc](const httplib::Request& req, httplib::Response& res) {
        send(res, svc.finalize(req.matches[1], req.body));
    });
    http.Post("/api/export/training-pool",
              [&svc](const httplib::Request&, httplib::Response& res) { send(res, svc.export_training_pool()); });
}

ReviewServer::~ReviewServer() { stop(); }

int ReviewServer::bind() {
    const auto& cfg = impl_->service.config();
    if (cfg.port == 0) {
        impl_->port = impl_->http.bind_to_any_port(cfg.host);
        if (impl_->port < 0) throw ServiceError("cannot bind " + cfg.host);
    } else {
        if (!impl_->http.bind_to_port(cfg.host, cfg.port)) {
            throw ServiceError("cannot bind " + cfg.host + ":" + std::to_string(cfg.port));
        }
        impl_->port = cfg.port;
    }
    return impl_->port;
}

void ReviewServer::listen() { impl_->http.listen_after_bind(); }

void ReviewServer::stop() {
    if (impl_ && impl_->http.is_running()) impl_->http.stop();
}

} // namespace radmark
