#pragma once

#include "insightd/feed.hpp"
#include "insightd/json_io.hpp"
#include "insightd/scheduler.hpp"
#include "insightd/table.hpp"

#include <condition_variable>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

namespace insightd {

inline constexpr std::size_t kMaxUploadBytes = 50ull * 1024 * 1024;

/// One uploaded dataset, its feed, and the background engine run that fills it.
class Session {
public:
    Session(std::string id, std::shared_ptr<const Dataset> dataset, EngineConfig config);
    ~Session();

    Session(const Session&) = delete;
    Session& operator=(const Session&) = delete;

    /// Plans the tasks and starts the engine on a background thread.
    void start();

    /// Blocks until the run has finished; false on timeout.
    bool wait(std::chrono::milliseconds timeout) const;

    const std::string& id() const noexcept { return id_; }
    const Dataset& dataset() const noexcept { return *dataset_; }
    Feed& feed() noexcept { return feed_; }
    const Feed& feed() const noexcept { return feed_; }
    Engine& engine() noexcept { return engine_; }

    std::size_t planned_tasks() const;
    std::optional<RunSummary> summary() const;

    std::optional<ChartSpec> chart(const std::string& chart_id) const;

    /// Stores the chart under the pinned item's chart id.
    Insight pin(const ChartSpec& chart, const std::string& title);

private:
    void accept(TaskOutput output);

    std::string id_;
    std::shared_ptr<const Dataset> dataset_;
    Feed feed_;
    Engine engine_;

    mutable std::mutex mutex_;
    mutable std::condition_variable finished_cv_;
    std::map<std::string, ChartSpec> charts_;
    std::vector<ComputeTask> tasks_;
    std::optional<RunSummary> summary_;
    std::jthread runner_;
};

/// Single-session front end shared by the HTTP server and tests.
class Service {
public:
    explicit Service(EngineConfig config = {});

    /// Parses and replaces the active session; the run starts before this
    /// returns. Throws Error (MalformedInput, EmptyTable, DuplicateHeader).
    std::shared_ptr<Session> upload(std::string_view bytes, TableFormat format, std::string name = "dataset");

    std::shared_ptr<Session> session() const;
    const EngineConfig& config() const noexcept { return config_; }

private:
    EngineConfig config_;
    mutable std::mutex mutex_;
    std::shared_ptr<Session> session_;
    std::uint64_t next_session_ = 1;
};

/// HTTP surface:
///   POST /datasets[?format=csv|json]   raw body or multipart upload
///   GET  /feed?sort=&kinds=&q=&selected=&group=
///   GET  /feed/stream[?session=]       JSON lines, ends with run_complete
///   GET  /charts/{id}
///   POST /feed/pin                     {"chart": {...}, "title": "..."}
class HttpServer {
public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    HttpServer(const HttpServer&) = delete;
    HttpServer& operator=(const HttpServer&) = delete;

    /// Binds to the given port (0 picks a free one) and returns it, or -1.
    int bind(const std::string& host, int port);
    /// Serves until stop(); call after bind().
    bool serve();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

/// Parses the GET /feed query parameters.
FeedQuery feed_query_from_params(const std::multimap<std::string, std::string>& params);

}  // namespace insightd
