#include "insightd/report.hpp"

#include <insightd/error.hpp>
#include <insightd/json_io.hpp>

#include <fmt/format.h>

#include <fstream>
#include <memory>
#include <sstream>

namespace insightd::cli {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) throw InputError("cannot read " + path.string());
    return ss.str();
}

TableFormat format_for(const std::filesystem::path& path) {
    auto ext = path.extension().string();
    for (auto& c : ext) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return ext == ".json" ? TableFormat::json : TableFormat::csv;
}

}  // namespace

std::string render_json(const std::vector<Insight>& items) {
    Json out = Json::array();
    for (const auto& i : items) out.push_back(to_json(i));
    return out.dump(2) + "\n";
}

std::string render_markdown(const std::string& dataset_name, const std::vector<Insight>& items) {
    std::string out = fmt::format("# Insights for {}\n\n", dataset_name);
    for (const auto& i : items) {
        out += fmt::format("## {}\n\n{}\n\n", i.title, i.description);
        out += fmt::format("_{} · score {}_\n\n", to_string(i.kind), format_value(i.score));
    }
    return out;
}

RunOutcome run_pipeline(const RunOptions& options) {
    const auto bytes = read_file(options.input);
    std::shared_ptr<const Dataset> dataset;
    try {
        dataset = std::make_shared<const Dataset>(
            parse_table(bytes, format_for(options.input), options.input.filename().string()));
    } catch (const Error& e) {
        throw InputError(e.what());
    }

    auto tasks = plan(*dataset);
    Feed feed;
    Engine engine(dataset, options.engine);
    RunOutcome outcome;
    outcome.planned = tasks.size();
    outcome.summary = engine.run(tasks, [&](TaskOutput out) { feed.add(std::move(out.insight)); });

    const auto sort = options.sort.value_or(options.format == ReportFormat::md ? SortKey::score : SortKey::time);
    FeedQuery q;
    q.sort = sort;
    const auto items = feed.query(q);
    outcome.report = options.format == ReportFormat::md ? render_markdown(dataset->name(), items) : render_json(items);
    return outcome;
}

}  // namespace insightd::cli
