#pragma once

#include <insightd/feed.hpp>
#include <insightd/scheduler.hpp>
#include <insightd/table.hpp>

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace insightd::cli {

enum class ReportFormat { json, md };

struct RunOptions {
    std::filesystem::path input;
    ReportFormat format = ReportFormat::json;
    std::optional<SortKey> sort;  // json defaults to time, md to score
    EngineConfig engine;
};

struct RunOutcome {
    std::string report;
    RunSummary summary;
    std::size_t planned = 0;
};

/// Thrown for unreadable or unparseable input (exit status 2).
struct InputError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

RunOutcome run_pipeline(const RunOptions& options);

std::string render_json(const std::vector<Insight>& items);
std::string render_markdown(const std::string& dataset_name, const std::vector<Insight>& items);

}  // namespace insightd::cli
