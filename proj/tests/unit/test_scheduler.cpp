#include "oracles.hpp"
#include "support.hpp"

#include <insightd/error.hpp>
#include <insightd/scheduler.hpp>

#include <doctest.h>

#include <algorithm>
#include <chrono>
#include <mutex>
#include <random>
#include <thread>

using namespace insightd;

namespace {

std::shared_ptr<const Dataset> small_mixed(std::uint64_t seed = 1) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g;
    std::string text = "x,y,a,b\n";
    for (int i = 0; i < 60; ++i) {
        const double x = g(rng);
        text += fmt::format("{},{},{},{}\n", x, 2 * x + g(rng), "abc"[rng() % 3], "uv"[rng() % 2]);
    }
    return std::make_shared<const Dataset>(parse_table(text, TableFormat::csv, "mixed"));
}

Field field(std::string name, FieldKind kind, std::size_t distinct = 5) { return {std::move(name), kind, distinct, 0}; }

std::multiset<std::string> keys(const std::vector<ComputeTask>& tasks) {
    std::multiset<std::string> out;
    for (const auto& t : tasks) out.insert(oracle::task_key(t));
    return out;
}

struct Collector {
    std::mutex mutex;
    std::vector<TaskOutput> items;
    InsightSink sink() {
        return [this](TaskOutput o) {
            std::lock_guard lock(mutex);
            items.push_back(std::move(o));
        };
    }
};

}  // namespace

TEST_CASE("enumeration examples") {
    Schema s{100, {field("n1", FieldKind::numerical), field("n2", FieldKind::numerical),
                   field("c1", FieldKind::categorical), field("c2", FieldKind::categorical)}};
    CHECK(enumerate_tasks(s, default_registry()).size() == 14);

    Schema one{10, {field("n", FieldKind::numerical)}};
    const auto t = enumerate_tasks(one, default_registry());
    REQUIRE(t.size() == 1);
    CHECK(t[0].kind == ModuleKind::descriptive);

    Schema wide{3178, {field("name", FieldKind::categorical, 3000)}};
    CHECK(enumerate_tasks(wide, default_registry()).empty());

    Schema dated{50, {field("when", FieldKind::temporal), field("c", FieldKind::categorical)}};
    const auto d = enumerate_tasks(dated, default_registry());
    CHECK(d.size() == 2);  // two freq_counts, no temporal freq_comb
    CHECK(std::none_of(d.begin(), d.end(), [](const ComputeTask& x) { return x.kind == ModuleKind::freq_comb; }));
}

TEST_CASE("enumeration matches the brute-force enumerator") {
    std::mt19937_64 rng(77);
    for (int round = 0; round < 100; ++round) {
        Schema s;
        s.row_count = 10 + rng() % 400;
        const int nums = static_cast<int>(rng() % 7), cats = static_cast<int>(rng() % 7);
        for (int i = 0; i < nums; ++i) s.fields.push_back(field(fmt::format("n{}", i), FieldKind::numerical, 50));
        for (int i = 0; i < cats; ++i)
            s.fields.push_back(field(fmt::format("c{}", i), rng() % 4 ? FieldKind::categorical : FieldKind::temporal,
                                     1 + rng() % 250));
        std::shuffle(s.fields.begin(), s.fields.end(), rng);
        const auto tasks = enumerate_tasks(s, default_registry());
        CHECK(keys(tasks) == oracle::enumerate(s));
        std::set<std::size_t> ids;
        for (const auto& t : tasks) ids.insert(t.id);
        CHECK(ids.size() == tasks.size());
    }
}

TEST_CASE("estimates") {
    ComputeTask t;
    t.kind = ModuleKind::descriptive;
    auto e = estimate(t, {406, 9});
    CHECK(e.cost == 406);
    CHECK(e.relevance == 3);

    t.kind = ModuleKind::dbscan;
    t.params = DensityParams{0.05, 4};
    e = estimate(t, {10000, 2});
    CHECK(e.cost == 1e8);
    CHECK(e.relevance == 1);

    t.kind = ModuleKind::kmeans;
    t.params = ClusterCount{5};
    CHECK(estimate(t, {1000, 2}).cost == 5e5);

    t.kind = ModuleKind::correlation;
    t.params = NoParams{};
    CHECK(estimate(t, {10, 2}).relevance == 2);
    t.kind = ModuleKind::freq_comb;
    CHECK(estimate(t, {10, 2}).relevance == 2);
}

TEST_CASE("order") {
    const auto make = [](std::size_t id, ModuleKind kind, double cost, double rel) {
        ComputeTask t;
        t.id = id;
        t.kind = kind;
        t.cost_estimate = cost;
        t.relevance_estimate = rel;
        return t;
    };
    auto o = order({make(0, ModuleKind::kmeans, 10, 1), make(1, ModuleKind::correlation, 5, 2),
                    make(2, ModuleKind::descriptive, 5, 3)});
    CHECK(o[0].kind == ModuleKind::descriptive);
    CHECK(o[1].kind == ModuleKind::correlation);
    CHECK(o[2].kind == ModuleKind::kmeans);

    o = order({make(0, ModuleKind::correlation, 20, 2), make(1, ModuleKind::correlation, 10, 2)});
    CHECK(o[0].id == 1);
    o = order({make(4, ModuleKind::correlation, 10, 2), make(3, ModuleKind::correlation, 10, 2)});
    CHECK(o[0].id == 3);
}

TEST_CASE("run emits one insight per done task") {
    const auto d = small_mixed();
    auto tasks = plan(*d);
    REQUIRE(tasks.size() == 14);
    Collector c;
    Engine engine(d, {4, std::chrono::seconds(30), 0});
    const auto summary = engine.run(tasks, c.sink());
    CHECK(summary.total() == tasks.size());
    CHECK(summary.done == c.items.size());
    CHECK(summary.failed == 0);
    for (const auto& t : tasks) CHECK(t.state != TaskState::pending);
    for (const auto& o : c.items) {
        CHECK(o.insight.chart_ref == o.chart.chart_id);
        CHECK(validate(o.chart).empty());
        CHECK(o.insight.score >= 0.0);
        CHECK(o.insight.score <= 1.0);
    }
}

TEST_CASE("a failing module is isolated") {
    const auto d = small_mixed();
    auto tasks = plan(*d);
    Engine engine(d, {2, std::chrono::seconds(30), 0});
    engine.set_module(ModuleKind::correlation, [](const Dataset&, const ComputeTask&, std::uint64_t) -> AnalyticsResult {
        volatile int zero = 0;
        if (zero == 0) throw std::domain_error("division by zero");
        return Correlation{};
    });
    Collector c;
    const auto summary = engine.run(tasks, c.sink());
    CHECK(summary.done == 13);
    CHECK(summary.failed == 1);
    CHECK(c.items.size() == 13);
}

TEST_CASE("a hung module times out without stalling the run") {
    const auto d = small_mixed();
    auto tasks = plan(*d);
    Engine engine(d, {2, std::chrono::milliseconds(200), 0});
    engine.set_module(ModuleKind::linreg, [](const Dataset& ds, const ComputeTask& t, std::uint64_t) -> AnalyticsResult {
        std::this_thread::sleep_for(std::chrono::seconds(3));
        return linreg(pair_columns(ds, t.field_names[0], t.field_names[1]));
    });
    Collector c;
    const auto start = std::chrono::steady_clock::now();
    const auto summary = engine.run(tasks, c.sink());
    CHECK(std::chrono::steady_clock::now() - start < std::chrono::seconds(2));
    CHECK(summary.failed == 1);
    CHECK(summary.done == 13);
}

TEST_CASE("skip signals are counted as skipped") {
    const auto d = std::make_shared<const Dataset>(parse_table("x,y\n1,5\n2,5\n3,5\n4,5\n5,5\n", TableFormat::csv));
    auto tasks = plan(*d);
    Collector c;
    Engine engine(d, {1, std::chrono::seconds(30), 0});
    const auto summary = engine.run(tasks, c.sink());
    CHECK(summary.total() == tasks.size());
    CHECK(summary.failed == 0);
    CHECK(summary.skipped >= 1);  // correlation with constant y
    for (const auto& t : tasks)
        if (t.kind == ModuleKind::correlation) CHECK(t.state == TaskState::skipped);
}

TEST_CASE("serial runs follow the planned order and are reproducible") {
    const auto d = small_mixed(3);
    auto tasks = plan(*d);
    std::vector<std::string> want;
    for (const auto& t : tasks) want.push_back(insight_id_for(t));

    const auto once = [&] {
        auto copy = plan(*d);
        Collector c;
        Engine engine(d, {1, std::chrono::seconds(30), 9});
        engine.run(copy, c.sink());
        return std::move(c.items);
    };
    const auto a = once();
    const auto b = once();
    std::vector<std::string> got;
    for (const auto& o : a) got.push_back(o.insight.id);
    CHECK(got == want);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].insight.title == b[i].insight.title);
        CHECK(a[i].insight.description == b[i].insight.description);
        CHECK(a[i].insight.score == b[i].insight.score);
    }
}

TEST_CASE("descriptive insights precede the last clustering insight on cars") {
    const auto cars = test_support::cars();
    auto tasks = plan(*cars);
    CHECK(tasks.size() == 99);
    Collector c;
    Engine engine(cars, {4, std::chrono::seconds(30), 0});
    const auto summary = engine.run(tasks, c.sink());
    CHECK(summary.failed == 0);
    std::size_t last_descriptive = 0, last_cluster = 0;
    for (std::size_t i = 0; i < c.items.size(); ++i) {
        const auto k = c.items[i].insight.kind;
        if (k == ModuleKind::descriptive) last_descriptive = i;
        if (k == ModuleKind::kmeans || k == ModuleKind::dbscan) last_cluster = i;
    }
    CHECK(last_descriptive < last_cluster);
}

TEST_CASE("cancel stops dispatch") {
    const auto cars = test_support::cars();
    auto tasks = plan(*cars);
    Engine engine(cars, {1, std::chrono::seconds(30), 0});
    std::size_t seen = 0;
    const auto summary = engine.run(tasks, [&](TaskOutput) {
        if (++seen == 3) engine.cancel();
    });
    CHECK(summary.done == 3);
    CHECK(summary.total() == tasks.size());
}

TEST_CASE("task seeds and environment config") {
    const auto d = small_mixed();
    const auto tasks = plan(*d);
    CHECK(task_seed(*d, tasks[0], 1) == task_seed(*d, tasks[0], 1));
    CHECK(task_seed(*d, tasks[0], 1) != task_seed(*d, tasks[0], 2));
    CHECK(task_seed(*d, tasks[0], 1) != task_seed(*d, tasks[1], 1));

    const auto env = [](const char* name) -> const char* {
        const std::string n(name);
        if (n == "WORKERS") return "2";
        if (n == "TASK_TIMEOUT_SECS") return "1.5";
        if (n == "SEED") return "7";
        return nullptr;
    };
    const auto cfg = EngineConfig::from_environment(env);
    CHECK(cfg.worker_count == 2);
    CHECK(cfg.per_task_timeout == std::chrono::milliseconds(1500));
    CHECK(cfg.seed == 7);

    const auto defaults = EngineConfig::from_environment([](const char*) -> const char* { return nullptr; });
    CHECK(defaults.worker_count == 4);
    CHECK_THROWS(EngineConfig::from_environment([](const char*) -> const char* { return "zero"; }));
}
