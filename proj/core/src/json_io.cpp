#include "insightd/json_io.hpp"

#include "insightd/error.hpp"

#include <fmt/format.h>

namespace insightd {

Json to_json(const Insight& insight) {
    Json j;
    j["id"] = insight.id;
    j["kind"] = to_string(insight.kind);
    j["fields"] = insight.field_names;
    j["title"] = insight.title;
    j["description"] = insight.description;
    j["score"] = insight.score;
    j["chart_id"] = insight.chart_ref;
    j["created_at"] = insight.created_at;
    j["origin"] = to_string(insight.origin);
    return j;
}

namespace {

Json encoding_json(const Encoding& e) {
    Json j;
    if (e.type == ChannelType::count)
        j["field"] = nullptr;
    else
        j["field"] = e.field;
    j["type"] = to_string(e.type);
    j["bin"] = e.binned;
    return j;
}

Json overlay_json(const Overlay& overlay) {
    Json j;
    if (const auto* line = std::get_if<RegressionLine>(&overlay)) {
        j["type"] = "regression_line";
        j["coefficients"] = line->coefficients;
    } else if (const auto* clusters = std::get_if<ClusterAssignment>(&overlay)) {
        j["type"] = "cluster_assignment";
        j["labels"] = clusters->labels;
    } else {
        j["type"] = "mean_rule";
        j["value"] = std::get<MeanRule>(overlay).value;
    }
    return j;
}

[[noreturn]] void invalid(const std::string& what) { throw Error(ErrorCode::InvalidChart, what); }

Encoding encoding_from(const nlohmann::json& j, const char* channel) {
    if (!j.is_object()) invalid(fmt::format("{} must be an object", channel));
    Encoding e;
    const auto type = j.value("type", std::string{});
    const auto parsed = parse_channel_type(type);
    if (!parsed) invalid(fmt::format("{}: unknown channel type '{}'", channel, type));
    e.type = *parsed;
    if (j.contains("field") && !j["field"].is_null()) {
        if (!j["field"].is_string()) invalid(fmt::format("{}: field must be a string", channel));
        e.field = j["field"].get<std::string>();
    }
    if (j.contains("bin")) {
        if (!j["bin"].is_boolean()) invalid(fmt::format("{}: bin must be a boolean", channel));
        e.binned = j["bin"].get<bool>();
    }
    return e;
}

}  // namespace

Json to_json(const ChartSpec& spec) {
    Json j;
    j["chart_id"] = spec.chart_id;
    j["mark"] = to_string(spec.mark);
    j["x"] = encoding_json(spec.x);
    j["y"] = encoding_json(spec.y);
    if (spec.color) j["color"] = encoding_json(*spec.color);
    j["overlays"] = Json::array();
    for (const auto& o : spec.overlays) j["overlays"].push_back(overlay_json(o));
    j["data"] = Json::array();
    for (const auto& row : spec.data.rows) {
        Json r = Json::object();
        for (std::size_t c = 0; c < row.size() && c < spec.data.columns.size(); ++c) {
            if (const auto* d = std::get_if<double>(&row[c]))
                r[spec.data.columns[c]] = *d;
            else
                r[spec.data.columns[c]] = std::get<std::string>(row[c]);
        }
        j["data"].push_back(std::move(r));
    }
    return j;
}

ChartSpec chart_from_json(const nlohmann::json& j) {
    if (!j.is_object()) invalid("chart must be an object");
    ChartSpec spec;
    if (j.contains("chart_id") && j["chart_id"].is_string()) spec.chart_id = j["chart_id"].get<std::string>();
    const auto mark = parse_mark(j.value("mark", std::string{}));
    if (!mark) invalid("unknown or missing mark");
    spec.mark = *mark;
    if (!j.contains("x") || !j.contains("y")) invalid("x and y encodings are required");
    spec.x = encoding_from(j["x"], "x");
    spec.y = encoding_from(j["y"], "y");
    if (j.contains("color") && !j["color"].is_null()) spec.color = encoding_from(j["color"], "color");

    if (j.contains("overlays")) {
        if (!j["overlays"].is_array()) invalid("overlays must be an array");
        for (const auto& o : j["overlays"]) {
            const auto type = o.is_object() ? o.value("type", std::string{}) : std::string{};
            try {
                if (type == "regression_line")
                    spec.overlays.emplace_back(RegressionLine{o.at("coefficients").get<std::vector<double>>()});
                else if (type == "cluster_assignment")
                    spec.overlays.emplace_back(ClusterAssignment{o.at("labels").get<std::vector<std::int64_t>>()});
                else if (type == "mean_rule")
                    spec.overlays.emplace_back(MeanRule{o.at("value").get<double>()});
                else
                    invalid("unknown overlay type '" + type + "'");
            } catch (const nlohmann::json::exception& e) {
                invalid(std::string("malformed overlay: ") + e.what());
            }
        }
    }

    if (j.contains("data")) {
        if (!j["data"].is_array()) invalid("data must be an array");
        for (const auto& row : j["data"]) {
            if (!row.is_object()) invalid("data rows must be objects");
            for (const auto& [key, _] : row.items())
                if (!spec.data.has_column(key)) spec.data.columns.push_back(key);
        }
        for (const auto& row : j["data"]) {
            std::vector<ChartCell> cells;
            for (const auto& col : spec.data.columns) {
                if (!row.contains(col)) invalid("data rows must share the same keys");
                const auto& v = row[col];
                if (v.is_number())
                    cells.emplace_back(v.get<double>());
                else if (v.is_string())
                    cells.emplace_back(v.get<std::string>());
                else
                    invalid("data cells must be numbers or strings");
            }
            spec.data.rows.push_back(std::move(cells));
        }
    }

    // An unnamed chart is acceptable on input; the receiver assigns an id.
    const bool unnamed = spec.chart_id.empty();
    if (unnamed) spec.chart_id = "unassigned";
    if (auto violations = validate(spec); !violations.empty()) {
        std::string joined;
        for (const auto& v : violations) joined += (joined.empty() ? "" : "; ") + v;
        invalid(joined);
    }
    if (unnamed) spec.chart_id.clear();
    return spec;
}

Json summary_json(const Dataset& dataset) {
    Json j;
    j["id"] = dataset.id();
    j["name"] = dataset.name();
    j["rows"] = dataset.row_count();
    j["fields"] = Json::array();
    for (const auto& f : dataset.fields())
        j["fields"].push_back(
            Json{{"name", f.name}, {"kind", to_string(f.kind)}, {"distinct", f.distinct_count}, {"missing", f.missing_count}});
    return j;
}

}  // namespace insightd
