#include "insightd/service.hpp"

#include "insightd/error.hpp"

#include <fmt/format.h>
#include <httplib.h>

#include <deque>
#include <sstream>

namespace insightd {

Session::Session(std::string id, std::shared_ptr<const Dataset> dataset, EngineConfig config)
    : id_(std::move(id)), dataset_(std::move(dataset)), engine_(dataset_, config) {}

Session::~Session() {
    engine_.cancel();
    if (runner_.joinable()) runner_.join();
}

void Session::start() {
    {
        std::lock_guard lock(mutex_);
        if (runner_.joinable()) return;
        tasks_ = plan(*dataset_);
    }
    runner_ = std::jthread([this] {
        auto tasks = [this] {
            std::lock_guard lock(mutex_);
            return tasks_;
        }();
        const auto summary = engine_.run(tasks, [this](TaskOutput out) { accept(std::move(out)); });
        std::lock_guard lock(mutex_);
        tasks_ = std::move(tasks);
        summary_ = summary;
        finished_cv_.notify_all();
    });
}

void Session::accept(TaskOutput output) {
    {
        std::lock_guard lock(mutex_);
        charts_[output.chart.chart_id] = std::move(output.chart);
    }
    feed_.add(std::move(output.insight));
}

bool Session::wait(std::chrono::milliseconds timeout) const {
    std::unique_lock lock(mutex_);
    return finished_cv_.wait_for(lock, timeout, [this] { return summary_.has_value(); });
}

std::size_t Session::planned_tasks() const {
    std::lock_guard lock(mutex_);
    return tasks_.size();
}

std::optional<RunSummary> Session::summary() const {
    std::lock_guard lock(mutex_);
    return summary_;
}

std::optional<ChartSpec> Session::chart(const std::string& chart_id) const {
    std::lock_guard lock(mutex_);
    const auto it = charts_.find(chart_id);
    if (it == charts_.end()) return std::nullopt;
    return it->second;
}

Insight Session::pin(const ChartSpec& chart, const std::string& title) {
    auto insight = feed_.pin(chart, title);
    auto stored = chart;
    stored.chart_id = insight.chart_ref;
    std::lock_guard lock(mutex_);
    charts_[stored.chart_id] = std::move(stored);
    return insight;
}

Service::Service(EngineConfig config) : config_(config) {}

std::shared_ptr<Session> Service::upload(std::string_view bytes, TableFormat format, std::string name) {
    auto dataset = std::make_shared<const Dataset>(parse_table(bytes, format, std::move(name)));
    std::shared_ptr<Session> previous;
    std::shared_ptr<Session> session;
    {
        std::lock_guard lock(mutex_);
        session = std::make_shared<Session>(fmt::format("s{}", next_session_++), std::move(dataset), config_);
        previous = std::exchange(session_, session);
    }
    if (previous) previous->engine().cancel();
    session->start();
    return session;
}

std::shared_ptr<Session> Service::session() const {
    std::lock_guard lock(mutex_);
    return session_;
}

namespace {

std::vector<std::string> split_list(const std::string& text) {
    std::vector<std::string> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

}  // namespace

FeedQuery feed_query_from_params(const std::multimap<std::string, std::string>& params) {
    FeedQuery q;
    for (const auto& [key, value] : params) {
        if (key == "sort") {
            if (value.empty()) continue;
            const auto s = parse_sort_key(value);
            if (!s) throw std::invalid_argument("unknown sort '" + value + "'");
            q.sort = *s;
        } else if (key == "kinds") {
            if (!q.kind_filter) q.kind_filter.emplace();
            for (const auto& k : split_list(value)) {
                const auto kind = parse_module_kind(k);
                if (!kind) throw std::invalid_argument("unknown kind '" + k + "'");
                q.kind_filter->insert(*kind);
            }
            if (q.kind_filter->empty()) q.kind_filter.reset();
        } else if (key == "q") {
            if (!value.empty()) q.text = value;
        } else if (key == "selected") {
            if (!q.selected_fields) q.selected_fields.emplace();
            for (auto& f : split_list(value)) q.selected_fields->insert(std::move(f));
        } else if (key == "group") {
            q.group_by_kind = value == "1" || value == "true" || value == "kind";
        }
    }
    return q;
}

struct HttpServer::Impl {
    explicit Impl(Service& s) : service(s) {}

    Service& service;
    httplib::Server server;

    static void reply_json(httplib::Response& res, int status, const Json& body) {
        res.status = status;
        res.set_content(body.dump(), "application/json");
    }

    static void reply_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
        reply_json(res, status, Json{{"error", code}, {"message", message}});
    }

    void routes();
    void upload(const httplib::Request& req, httplib::Response& res);
    void stream(const httplib::Request& req, httplib::Response& res);
};

void HttpServer::Impl::upload(const httplib::Request& req, httplib::Response& res) {
    std::string_view body = req.body;
    std::string name = "dataset";
    std::optional<TableFormat> format;
    if (req.has_param("format")) {
        format = parse_table_format(req.get_param_value("format"));
        if (!format) return reply_error(res, 400, "MalformedInput", "format must be csv or json");
    }
    if (req.is_multipart_form_data()) {
        if (req.files.empty()) return reply_error(res, 400, "MalformedInput", "multipart upload has no file part");
        const auto& part = req.files.begin()->second;
        body = part.content;
        if (!part.filename.empty()) name = part.filename;
        if (!format && part.filename.ends_with(".json")) format = TableFormat::json;
    }
    if (!format) {
        const auto type = req.get_header_value("Content-Type");
        format = type.find("json") != std::string::npos ? TableFormat::json : TableFormat::csv;
    }
    if (body.size() > kMaxUploadBytes) return reply_error(res, 413, "TooLarge", "upload exceeds 50 MB");
    try {
        const auto session = service.upload(body, *format, name);
        Json out;
        out["session_id"] = session->id();
        out["dataset"] = summary_json(session->dataset());
        out["tasks"] = session->planned_tasks();
        reply_json(res, 200, out);
    } catch (const Error& e) {
        reply_error(res, 400, to_string(e.code()), e.what());
    }
}

namespace {

struct StreamState {
    std::mutex mutex;
    std::condition_variable cv;
    std::vector<Insight> backlog;
    std::size_t backlog_sent = 0;
    std::deque<Insight> live;
    Feed::Subscription subscription;
};

std::string insight_line(const Insight& insight) {
    Json j;
    j["event"] = "insight";
    j["insight"] = to_json(insight);
    return j.dump() + "\n";
}

}  // namespace

void HttpServer::Impl::stream(const httplib::Request& req, httplib::Response& res) {
    auto session = service.session();
    if (!session || (req.has_param("session") && req.get_param_value("session") != session->id()))
        return reply_error(res, 404, "UnknownSession", "no such session");

    auto state = std::make_shared<StreamState>();
    std::weak_ptr<StreamState> weak = state;
    state->subscription = session->feed().subscribe([weak](const Insight& insight) {
        if (auto s = weak.lock()) {
            std::lock_guard lock(s->mutex);
            s->live.push_back(insight);
            s->cv.notify_all();
        }
    });
    state->backlog = std::move(state->subscription.backlog);

    res.set_header("Cache-Control", "no-cache");
    res.set_chunked_content_provider(
        "application/x-ndjson", [state, session](std::size_t, httplib::DataSink& sink) {
            if (!sink.is_writable()) return false;
            while (state->backlog_sent < state->backlog.size()) {
                const auto line = insight_line(state->backlog[state->backlog_sent++]);
                if (!sink.write(line.data(), line.size())) return false;
            }
            const auto summary = session->summary();
            std::deque<Insight> batch;
            {
                std::unique_lock lock(state->mutex);
                if (!summary && state->live.empty())
                    state->cv.wait_for(lock, std::chrono::milliseconds(100), [&] { return !state->live.empty(); });
                batch.swap(state->live);
            }
            for (const auto& insight : batch) {
                const auto line = insight_line(insight);
                if (!sink.write(line.data(), line.size())) return false;
            }
            // Every add() precedes the summary, so an empty queue after
            // observing the summary means the backlog is complete.
            if (summary && batch.empty()) {
                Json done;
                done["event"] = "run_complete";
                done["summary"] = Json{{"done", summary->done}, {"failed", summary->failed}, {"skipped", summary->skipped}};
                const auto line = done.dump() + "\n";
                sink.write(line.data(), line.size());
                sink.done();
            }
            return true;
        });
}

void HttpServer::Impl::routes() {
    server.set_payload_max_length(kMaxUploadBytes);

    server.Post("/datasets", [this](const httplib::Request& req, httplib::Response& res) { upload(req, res); });

    server.Get("/feed", [this](const httplib::Request& req, httplib::Response& res) {
        const auto session = service.session();
        FeedQuery q;
        try {
            q = feed_query_from_params(req.params);
        } catch (const std::invalid_argument& e) {
            return reply_error(res, 400, "BadQuery", e.what());
        }
        Json out = Json::array();
        if (session)
            for (const auto& insight : session->feed().query(q)) out.push_back(to_json(insight));
        reply_json(res, 200, out);
    });

    server.Get("/feed/stream", [this](const httplib::Request& req, httplib::Response& res) { stream(req, res); });

    server.Get(R"(/charts/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
        const auto session = service.session();
        const std::string id = req.matches[1];
        const auto chart = session ? session->chart(id) : std::nullopt;
        if (!chart) return reply_error(res, 404, "UnknownChart", "no chart '" + id + "'");
        reply_json(res, 200, to_json(*chart));
    });

    server.Post("/feed/pin", [this](const httplib::Request& req, httplib::Response& res) {
        const auto session = service.session();
        if (!session) return reply_error(res, 404, "UnknownSession", "upload a dataset first");
        try {
            const auto body = nlohmann::json::parse(req.body);
            if (!body.is_object() || !body.contains("chart"))
                return reply_error(res, 400, "InvalidChart", "body must be {chart, title}");
            const auto chart = chart_from_json(body["chart"]);
            const auto title = body.value("title", std::string{});
            reply_json(res, 200, to_json(session->pin(chart, title)));
        } catch (const nlohmann::json::exception& e) {
            reply_error(res, 400, "InvalidChart", e.what());
        } catch (const Error& e) {
            reply_error(res, 400, to_string(e.code()), e.what());
        }
    });

    server.Get("/health", [](const httplib::Request&, httplib::Response& res) {
        res.set_content("ok", "text/plain");
    });
}

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) { impl_->routes(); }

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host);
    return impl_->server.bind_to_port(host, port) ? port : -1;
}

bool HttpServer::serve() { return impl_->server.listen_after_bind(); }

void HttpServer::stop() {
    if (impl_) impl_->server.stop();
}

}  // namespace insightd
