// insightd: proactive insight engine for tabular data.
//
//   insightd run <path> [--format json|md] [--out PATH] [--sort time|score|alpha]
//                       [--workers N] [--seed N] [--timeout SECS]
//   insightd serve [--host H] [--port P] [--workers N] [--seed N] [--timeout SECS]

#include "insightd/report.hpp"

#include <insightd/service.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <csignal>
#include <fstream>
#include <iostream>
#include <map>

namespace {

constexpr int kExitInputError = 2;

insightd::HttpServer* g_server = nullptr;

void handle_signal(int) {
    if (g_server) g_server->stop();
}

void add_engine_flags(CLI::App& cmd, std::optional<std::size_t>& workers, std::optional<std::uint64_t>& seed,
                      std::optional<double>& timeout) {
    cmd.add_option("--workers", workers, "Worker threads (default: $WORKERS or 4)")->check(CLI::PositiveNumber);
    cmd.add_option("--seed", seed, "Seed for clustering and chart sampling (default: $SEED or 0)");
    cmd.add_option("--timeout", timeout, "Per-task timeout in seconds (default: $TASK_TIMEOUT_SECS or 30)")
        ->check(CLI::PositiveNumber);
}

insightd::EngineConfig engine_config(const std::optional<std::size_t>& workers, const std::optional<std::uint64_t>& seed,
                                     const std::optional<double>& timeout) {
    auto config = insightd::EngineConfig::from_environment();
    if (workers) config.worker_count = *workers;
    if (seed) config.seed = *seed;
    if (timeout) config.per_task_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(*timeout * 1000.0));
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Proactive insight engine for tabular data"};
    app.require_subcommand(1);

    std::optional<std::size_t> workers;
    std::optional<std::uint64_t> seed;
    std::optional<double> timeout;

    auto* run = app.add_subcommand("run", "Analyse a CSV/JSON file and write the insight feed");
    std::string input;
    std::string out_path;
    insightd::cli::ReportFormat format = insightd::cli::ReportFormat::json;
    std::optional<insightd::SortKey> sort;
    run->add_option("path", input, "Input table (.csv or .json)")->required();
    run->add_option("--format", format, "Report format")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, insightd::cli::ReportFormat>{{"json", insightd::cli::ReportFormat::json},
                                                               {"md", insightd::cli::ReportFormat::md}}));
    run->add_option("--out", out_path, "Write the report here instead of stdout");
    run->add_option("--sort", sort, "Feed order")
        ->transform(CLI::CheckedTransformer(std::map<std::string, insightd::SortKey>{
            {"time", insightd::SortKey::time}, {"score", insightd::SortKey::score}, {"alpha", insightd::SortKey::alpha}}));
    add_engine_flags(*run, workers, seed, timeout);

    auto* serve = app.add_subcommand("serve", "Serve the HTTP API");
    std::string host = "127.0.0.1";
    int port = 8080;
    serve->add_option("--host", host, "Bind address");
    serve->add_option("--port", port, "Port (0 picks a free one)");
    add_engine_flags(*serve, workers, seed, timeout);

    CLI11_PARSE(app, argc, argv);

    insightd::EngineConfig config;
    try {
        config = engine_config(workers, seed, timeout);
    } catch (const std::invalid_argument& e) {
        std::cerr << "insightd: " << e.what() << "\n";
        return kExitInputError;
    }

    if (*run) {
        try {
            const auto outcome = insightd::cli::run_pipeline({input, format, sort, config});
            if (out_path.empty()) {
                std::cout << outcome.report;
            } else {
                std::ofstream out(out_path, std::ios::binary);
                out << outcome.report;
                if (!out) {
                    std::cerr << "insightd: cannot write " << out_path << "\n";
                    return 1;
                }
            }
            std::cerr << fmt::format("insightd: {} tasks, {} done, {} failed, {} skipped\n", outcome.planned,
                                     outcome.summary.done, outcome.summary.failed, outcome.summary.skipped);
        } catch (const insightd::cli::InputError& e) {
            std::cerr << "insightd: " << e.what() << "\n";
            return kExitInputError;
        }
        return 0;
    }

    insightd::Service service(config);
    insightd::HttpServer server(service);
    const int bound = server.bind(host, port);
    if (bound < 0) {
        std::cerr << "insightd: cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    g_server = &server;
    std::signal(SIGINT, handle_signal);
    std::signal(SIGTERM, handle_signal);
    std::cerr << fmt::format("insightd: listening on http://{}:{}\n", host, bound);
    server.serve();
    g_server = nullptr;
    return 0;
}
