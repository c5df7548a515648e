#include "insightd/scheduler.hpp"

#include "insightd/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <charconv>
#include <condition_variable>
#include <cstdlib>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace insightd {

std::string_view to_string(TaskState state) noexcept {
    switch (state) {
        case TaskState::pending: return "pending";
        case TaskState::running: return "running";
        case TaskState::done: return "done";
        case TaskState::failed: return "failed";
        case TaskState::skipped: return "skipped";
    }
    return "pending";
}

Schema schema_of(const Dataset& dataset) { return {dataset.row_count(), dataset.fields()}; }

std::vector<ModuleKind> default_registry() {
    return {ModuleKind::descriptive, ModuleKind::freq_counts, ModuleKind::freq_comb, ModuleKind::correlation,
            ModuleKind::kmeans,      ModuleKind::dbscan,      ModuleKind::linreg,    ModuleKind::polyreg};
}

bool is_high_cardinality(const Field& field, std::size_t row_count) noexcept {
    const double limit = std::min(static_cast<double>(kMaxFrequencyLevels), static_cast<double>(row_count) / 2.0);
    return static_cast<double>(field.distinct_count) > limit;
}

std::vector<ComputeTask> enumerate_tasks(const Schema& schema, const std::vector<ModuleKind>& registry) {
    const auto enabled = [&](ModuleKind k) { return std::find(registry.begin(), registry.end(), k) != registry.end(); };
    std::vector<ComputeTask> tasks;
    const auto add = [&](ModuleKind kind, std::vector<std::string> fields, TaskParams params = NoParams{}) {
        if (!enabled(kind)) return;
        ComputeTask t;
        t.id = tasks.size();
        t.kind = kind;
        t.field_names = std::move(fields);
        t.params = params;
        tasks.push_back(std::move(t));
    };

    std::vector<const Field*> numeric, counted, categorical;
    for (const auto& f : schema.fields) {
        if (f.kind == FieldKind::numerical) {
            numeric.push_back(&f);
        } else if (!is_high_cardinality(f, schema.row_count)) {
            counted.push_back(&f);
            if (f.kind == FieldKind::categorical) categorical.push_back(&f);
        }
    }

    for (const auto* f : numeric) add(ModuleKind::descriptive, {f->name});
    for (const auto* f : counted) add(ModuleKind::freq_counts, {f->name});
    for (std::size_t i = 0; i < categorical.size(); ++i)
        for (std::size_t j = i + 1; j < categorical.size(); ++j)
            add(ModuleKind::freq_comb, {categorical[i]->name, categorical[j]->name});
    for (std::size_t i = 0; i < numeric.size(); ++i) {
        for (std::size_t j = i + 1; j < numeric.size(); ++j) {
            const std::vector<std::string> pair{numeric[i]->name, numeric[j]->name};
            add(ModuleKind::correlation, pair);
            for (auto k : kKMeansClusterCounts) add(ModuleKind::kmeans, pair, ClusterCount{k});
            for (auto cfg : kDbscanConfigs) add(ModuleKind::dbscan, pair, cfg);
            add(ModuleKind::linreg, pair);
            for (auto d : kPolyDegrees) add(ModuleKind::polyreg, pair, PolyDegree{d});
        }
    }
    return tasks;
}

Estimate estimate(const ComputeTask& task, const DatasetMeta& meta) {
    const double rows = static_cast<double>(meta.row_count);
    Estimate e;
    switch (task.kind) {
        case ModuleKind::kmeans: {
            const auto* k = std::get_if<ClusterCount>(&task.params);
            e.cost = rows * static_cast<double>(k ? k->k : 1) * static_cast<double>(kKMeansMaxIterations);
            break;
        }
        case ModuleKind::dbscan: e.cost = rows * rows; break;
        default: e.cost = rows;
    }
    switch (task.kind) {
        case ModuleKind::descriptive:
        case ModuleKind::mean_variance:
        case ModuleKind::range:
        case ModuleKind::freq_counts: e.relevance = 3; break;
        case ModuleKind::correlation:
        case ModuleKind::freq_comb: e.relevance = 2; break;
        case ModuleKind::user_pinned: e.relevance = 0; break;
        default: e.relevance = 1;
    }
    return e;
}

std::vector<ComputeTask> order(std::vector<ComputeTask> tasks) {
    std::sort(tasks.begin(), tasks.end(), [](const ComputeTask& a, const ComputeTask& b) {
        if (a.relevance_estimate != b.relevance_estimate) return a.relevance_estimate > b.relevance_estimate;
        if (a.cost_estimate != b.cost_estimate) return a.cost_estimate < b.cost_estimate;
        return a.id < b.id;
    });
    return tasks;
}

std::vector<ComputeTask> plan(const Dataset& dataset) {
    auto tasks = enumerate_tasks(schema_of(dataset), default_registry());
    const DatasetMeta meta{dataset.row_count(), dataset.fields().size()};
    for (auto& t : tasks) {
        const auto e = estimate(t, meta);
        t.cost_estimate = e.cost;
        t.relevance_estimate = e.relevance;
    }
    return order(std::move(tasks));
}

namespace {

template <typename T>
T parse_env_number(const char* name, const char* text) {
    T value{};
    const std::string_view s(text);
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw std::invalid_argument(fmt::format("{}: cannot parse '{}'", name, s));
    return value;
}

std::string params_key(const TaskParams& params) {
    struct Visitor {
        std::string operator()(const NoParams&) const { return "-"; }
        std::string operator()(const ClusterCount& p) const { return fmt::format("k={}", p.k); }
        std::string operator()(const DensityParams& p) const { return fmt::format("eps={},min_pts={}", p.eps, p.min_pts); }
        std::string operator()(const PolyDegree& p) const { return fmt::format("degree={}", p.degree); }
    };
    return std::visit(Visitor{}, params);
}

}  // namespace

EngineConfig EngineConfig::from_environment(const std::function<const char*(const char*)>& getenv) {
    const auto lookup = [&](const char* name) -> const char* { return getenv ? getenv(name) : std::getenv(name); };
    EngineConfig config;
    if (const char* v = lookup("WORKERS"); v && *v) {
        config.worker_count = parse_env_number<std::size_t>("WORKERS", v);
        if (config.worker_count == 0) throw std::invalid_argument("WORKERS must be at least 1");
    }
    if (const char* v = lookup("TASK_TIMEOUT_SECS"); v && *v) {
        const double secs = parse_env_number<double>("TASK_TIMEOUT_SECS", v);
        if (!(secs > 0.0)) throw std::invalid_argument("TASK_TIMEOUT_SECS must be positive");
        config.per_task_timeout = std::chrono::milliseconds(static_cast<std::int64_t>(secs * 1000.0));
    }
    if (const char* v = lookup("SEED"); v && *v) config.seed = parse_env_number<std::uint64_t>("SEED", v);
    return config;
}

std::uint64_t task_seed(const Dataset& dataset, const ComputeTask& task, std::uint64_t run_seed) {
    std::string key = dataset.id();
    key += '|';
    key += to_string(task.kind);
    for (const auto& f : task.field_names) {
        key += '|';
        key += f;
    }
    key += '|' + params_key(task.params) + '|' + std::to_string(run_seed);
    return fnv1a(key);
}

std::string insight_id_for(const ComputeTask& task) { return fmt::format("t{}", task.id); }
std::string chart_id_for(const ComputeTask& task) { return fmt::format("c{}", task.id); }

std::map<ModuleKind, ModuleFn> default_modules() {
    std::map<ModuleKind, ModuleFn> m;
    const auto first = [](const ComputeTask& t) -> const std::string& { return t.field_names.at(0); };
    const auto second = [](const ComputeTask& t) -> const std::string& { return t.field_names.at(1); };

    m[ModuleKind::descriptive] = [=](const Dataset& d, const ComputeTask& t, std::uint64_t) -> AnalyticsResult {
        return describe(numeric_column(d, first(t)));
    };
    m[ModuleKind::mean_variance] = [=](const Dataset& d, const ComputeTask& t, std::uint64_t) -> AnalyticsResult {
        return mean_variance(numeric_column(d, first(t)));
    };
    m[ModuleKind::range] = [=](const Dataset& d, const ComputeTask& t, std::uint64_t) -> AnalyticsResult {
        return min_max(numeric_column(d, first(t)));
    };
    m[ModuleKind::freq_counts] = [=](const Dataset& d, const ComputeTask& t, std::uint64_t) -> AnalyticsResult {
        return freq_counts(category_column(d, first(t)));
    };
    m[ModuleKind::freq_comb] = [=](const Dataset& d, const ComputeTask& t, std::uint64_t) -> AnalyticsResult {
        const auto [a, b] = category_pairs(d, first(t), second(t));
        return freq_comb(a, b);
    };
    m[ModuleKind::correlation] = [=](const Dataset& d, const ComputeTask& t, std::uint64_t) -> AnalyticsResult {
        return pearson(pair_columns(d, first(t), second(t)));
    };
    m[ModuleKind::kmeans] = [=](const Dataset& d, const ComputeTask& t, std::uint64_t seed) -> AnalyticsResult {
        const auto points = to_points(pair_columns(d, first(t), second(t)));
        return kmeans(points, std::get<ClusterCount>(t.params).k, seed);
    };
    m[ModuleKind::dbscan] = [=](const Dataset& d, const ComputeTask& t, std::uint64_t) -> AnalyticsResult {
        const auto points = to_points(pair_columns(d, first(t), second(t)));
        const auto& p = std::get<DensityParams>(t.params);
        return dbscan(points, p.eps, p.min_pts);
    };
    m[ModuleKind::linreg] = [=](const Dataset& d, const ComputeTask& t, std::uint64_t) -> AnalyticsResult {
        return linreg(pair_columns(d, first(t), second(t)));
    };
    m[ModuleKind::polyreg] = [=](const Dataset& d, const ComputeTask& t, std::uint64_t) -> AnalyticsResult {
        const auto pairs = pair_columns(d, first(t), second(t));
        const auto degree = std::get<PolyDegree>(t.params).degree;
        // The feed wants at least one residual degree of freedom.
        if (pairs.size() < degree + 2)
            throw Error(ErrorCode::TooFewValues, fmt::format("degree {} fit needs {} rows", degree, degree + 2));
        return polyreg(pairs, degree);
    };
    return m;
}

Engine::Engine(std::shared_ptr<const Dataset> dataset, EngineConfig config)
    : dataset_(std::move(dataset)), config_(config), modules_(default_modules()) {
    if (!dataset_) throw std::invalid_argument("Engine needs a dataset");
    if (config_.worker_count == 0) config_.worker_count = 1;
}

void Engine::set_module(ModuleKind kind, ModuleFn fn) { modules_[kind] = std::move(fn); }

namespace {

TaskOutput compute(const Dataset& dataset, const ModuleFn& fn, const ComputeTask& task, std::uint64_t run_seed) {
    const auto seed = task_seed(dataset, task, run_seed);
    const auto result = fn(dataset, task, seed);

    TaskOutput out;
    auto& insight = out.insight;
    insight.id = insight_id_for(task);
    insight.kind = task.kind;
    insight.field_names = task.field_names;
    insight.title = render_title(task.kind, task.field_names, result);
    insight.description = render_description(task.kind, task.field_names, result);
    insight.score = score_insight(task.kind, result, {dataset.row_count(), dataset.fields().size()});
    insight.chart_ref = chart_id_for(task);
    insight.origin = Origin::auto_generated;
    out.chart = chart_for({task.kind, task.field_names, insight.chart_ref, seed}, result, dataset);
    return out;
}

// Shared between a waiting worker and the thread running one task, so an
// abandoned (timed out) task can finish without touching freed state.
struct TaskSlot {
    std::mutex mutex;
    std::condition_variable cv;
    bool finished = false;
    std::optional<TaskOutput> output;
    std::exception_ptr error;
};

}  // namespace

std::optional<TaskOutput> Engine::execute(const ComputeTask& task) const {
    const auto it = modules_.find(task.kind);
    if (it == modules_.end() || !it->second)
        throw std::logic_error("no module registered for " + std::string(to_string(task.kind)));
    try {
        return compute(*dataset_, it->second, task, config_.seed);
    } catch (const Error& e) {
        if (is_skip_signal(e.code())) return std::nullopt;
        throw;
    }
}

RunSummary Engine::run(std::vector<ComputeTask>& tasks, const InsightSink& sink) {
    std::atomic<std::size_t> next{0};
    std::atomic<std::size_t> done{0}, failed{0}, skipped{0};

    const auto worker = [&] {
        for (;;) {
            if (cancelled_.load()) return;
            const std::size_t index = next.fetch_add(1);
            if (index >= tasks.size()) return;
            auto& task = tasks[index];
            task.state = TaskState::running;

            const auto it = modules_.find(task.kind);
            if (it == modules_.end() || !it->second) {
                task.state = TaskState::failed;
                ++failed;
                continue;
            }

            auto slot = std::make_shared<TaskSlot>();
            std::thread([slot, dataset = dataset_, fn = it->second, task_copy = task, seed = config_.seed] {
                std::optional<TaskOutput> output;
                std::exception_ptr error;
                try {
                    output = compute(*dataset, fn, task_copy, seed);
                } catch (...) {
                    error = std::current_exception();
                }
                std::lock_guard lock(slot->mutex);
                slot->output = std::move(output);
                slot->error = error;
                slot->finished = true;
                slot->cv.notify_all();
            }).detach();

            std::unique_lock lock(slot->mutex);
            if (!slot->cv.wait_for(lock, config_.per_task_timeout, [&] { return slot->finished; })) {
                task.state = TaskState::failed;
                ++failed;
                continue;
            }
            if (slot->error) {
                bool skip = false;
                try {
                    std::rethrow_exception(slot->error);
                } catch (const Error& e) {
                    skip = is_skip_signal(e.code());
                } catch (...) {
                }
                task.state = skip ? TaskState::skipped : TaskState::failed;
                ++(skip ? skipped : failed);
                continue;
            }
            auto output = std::move(*slot->output);
            lock.unlock();
            task.state = TaskState::done;
            ++done;
            if (sink) {
                try {
                    sink(std::move(output));
                } catch (...) {
                    // A rejecting consumer does not change the task outcome.
                }
            }
        }
    };

    {
        std::vector<std::jthread> pool;
        const std::size_t workers = std::min(config_.worker_count, std::max<std::size_t>(1, tasks.size()));
        pool.reserve(workers);
        for (std::size_t i = 0; i < workers; ++i) pool.emplace_back(worker);
    }

    RunSummary summary{done.load(), failed.load(), skipped.load()};
    // Tasks never dispatched because of cancellation count as skipped.
    for (auto& t : tasks)
        if (t.state == TaskState::pending) {
            t.state = TaskState::skipped;
            ++summary.skipped;
        }
    return summary;
}

}  // namespace insightd
