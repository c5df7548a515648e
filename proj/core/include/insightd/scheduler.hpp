#pragma once

#include "insightd/analytics.hpp"
#include "insightd/chart.hpp"
#include "insightd/insight.hpp"
#include "insightd/table.hpp"

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace insightd {

struct NoParams {
    auto operator<=>(const NoParams&) const = default;
};
struct ClusterCount {
    std::size_t k = 0;
    auto operator<=>(const ClusterCount&) const = default;
};
struct DensityParams {
    double eps = 0.0;
    std::size_t min_pts = 0;
    auto operator<=>(const DensityParams&) const = default;
};
struct PolyDegree {
    std::size_t degree = 0;
    auto operator<=>(const PolyDegree&) const = default;
};
using TaskParams = std::variant<NoParams, ClusterCount, DensityParams, PolyDegree>;

enum class TaskState { pending, running, done, failed, skipped };

std::string_view to_string(TaskState state) noexcept;

struct ComputeTask {
    std::size_t id = 0;
    ModuleKind kind = ModuleKind::descriptive;
    std::vector<std::string> field_names;
    TaskParams params;
    double cost_estimate = 0.0;
    double relevance_estimate = 0.0;
    TaskState state = TaskState::pending;
};

/// Parameter grids for the multi-task modules.
inline constexpr std::size_t kKMeansClusterCounts[] = {3, 5, 7};
inline constexpr DensityParams kDbscanConfigs[] = {{0.05, 4}, {0.1, 8}};
inline constexpr std::size_t kPolyDegrees[] = {2, 3};
inline constexpr std::size_t kMaxFrequencyLevels = 100;

struct Schema {
    std::size_t row_count = 0;
    std::vector<Field> fields;
};

Schema schema_of(const Dataset& dataset);

/// Kinds the engine can enumerate, in enumeration order.
std::vector<ModuleKind> default_registry();

/// One task per applicable (kind, field set, params); ids are dense from 0
/// in enumeration order. Estimates are left at zero; see `estimate`.
std::vector<ComputeTask> enumerate_tasks(const Schema& schema, const std::vector<ModuleKind>& registry);

/// True when a categorical/temporal field has too many levels for frequency tasks.
bool is_high_cardinality(const Field& field, std::size_t row_count) noexcept;

struct Estimate {
    double cost = 0.0;
    double relevance = 0.0;
};
Estimate estimate(const ComputeTask& task, const DatasetMeta& meta);

/// Relevance descending, then cost ascending, then id ascending.
std::vector<ComputeTask> order(std::vector<ComputeTask> tasks);

struct EngineConfig {
    std::size_t worker_count = 4;
    std::chrono::milliseconds per_task_timeout{30'000};
    std::uint64_t seed = 0;

    /// Reads WORKERS, TASK_TIMEOUT_SECS and SEED. Unset variables keep
    /// defaults; malformed values throw std::invalid_argument.
    static EngineConfig from_environment(const std::function<const char*(const char*)>& getenv = nullptr);
};

struct RunSummary {
    std::size_t done = 0;
    std::size_t failed = 0;
    std::size_t skipped = 0;
    std::size_t total() const noexcept { return done + failed + skipped; }
};

/// What a finished task hands to the consumer. The sink is called from
/// worker threads and must tolerate concurrent calls.
struct TaskOutput {
    Insight insight;
    ChartSpec chart;
};
using InsightSink = std::function<void(TaskOutput)>;

/// A module implementation: computes the result for one task.
using ModuleFn = std::function<AnalyticsResult(const Dataset&, const ComputeTask&, std::uint64_t seed)>;

/// Per-task seed: hash of dataset id, field names, params and run seed.
std::uint64_t task_seed(const Dataset& dataset, const ComputeTask& task, std::uint64_t run_seed);

std::string insight_id_for(const ComputeTask& task);
std::string chart_id_for(const ComputeTask& task);

/// Executes tasks on a bounded pool. Tasks start strictly in the given
/// order; a task that throws or exceeds the timeout is recorded and never
/// stops the others.
class Engine {
public:
    explicit Engine(std::shared_ptr<const Dataset> dataset, EngineConfig config = {});

    /// Replace the implementation behind one module kind (tests inject faults here).
    void set_module(ModuleKind kind, ModuleFn fn);

    RunSummary run(std::vector<ComputeTask>& tasks, const InsightSink& sink);

    /// Stop dispatching new tasks; running ones finish or time out.
    void cancel() noexcept { cancelled_.store(true); }

    /// Computes one task synchronously, bypassing the pool.
    std::optional<TaskOutput> execute(const ComputeTask& task) const;

    const Dataset& dataset() const noexcept { return *dataset_; }
    const EngineConfig& config() const noexcept { return config_; }

private:
    std::shared_ptr<const Dataset> dataset_;
    EngineConfig config_;
    std::map<ModuleKind, ModuleFn> modules_;
    std::atomic<bool> cancelled_{false};
};

/// The stock module table.
std::map<ModuleKind, ModuleFn> default_modules();

/// enumerate + estimate + order for a dataset, using the default registry.
std::vector<ComputeTask> plan(const Dataset& dataset);

}  // namespace insightd
