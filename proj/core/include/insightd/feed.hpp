#pragma once

#include "insightd/chart.hpp"
#include "insightd/insight.hpp"

#include <cstdint>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

namespace insightd {

enum class SortKey { time, score, alpha };

std::string_view to_string(SortKey key) noexcept;
std::optional<SortKey> parse_sort_key(std::string_view text) noexcept;

struct FeedQuery {
    std::optional<std::set<ModuleKind>> kind_filter;
    std::optional<std::string> text;
    SortKey sort = SortKey::time;
    bool group_by_kind = false;
    std::optional<std::set<std::string>> selected_fields;
};

// The query pipeline stages, exposed for reuse and testing. All are pure.

bool matches_text(const Insight& insight, std::string_view needle);
std::vector<Insight> filter_kinds(std::vector<Insight> items, const std::set<ModuleKind>& kinds);
std::vector<Insight> search(std::vector<Insight> items, std::string_view needle);
/// time: newest first; score: descending, ties newest first; alpha: title
/// ascending, ties newest first.
std::vector<Insight> sort_items(std::vector<Insight> items, SortKey key);
/// Stable grouping by kind, groups in order of first appearance.
std::vector<Insight> group_by_kind(std::vector<Insight> items);
/// Categories (kinds) with at least one item touching a selected field move
/// to the front, one category at a time in order of first appearance; inside
/// each such category touching items precede the rest. Everything is stable.
std::vector<Insight> reorder_for_selection(std::vector<Insight> items, const std::set<std::string>& selected);

/// Runs filter, search, sort, selection reorder and grouping over a snapshot.
std::vector<Insight> run_query(std::vector<Insight> items, const FeedQuery& q);

/// Thread-safe insight feed. Writers may call add() concurrently with
/// readers; every read sees a consistent snapshot.
class Feed {
public:
    using Listener = std::function<void(const Insight&)>;

    class Subscription {
    public:
        Subscription() = default;
        Subscription(Subscription&&) noexcept = default;
        Subscription& operator=(Subscription&&) noexcept = default;
        ~Subscription();

        /// Items present at the moment of subscribing, in insertion order.
        std::vector<Insight> backlog;

    private:
        friend class Feed;
        std::weak_ptr<struct FeedState> state_;
        std::uint64_t token_ = 0;
    };

    Feed();

    /// Assigns created_at. Throws DuplicateId.
    Insight add(Insight insight);

    /// Throws InvalidChart when the spec has violations.
    Insight pin(const ChartSpec& chart, const std::string& title);

    std::vector<Insight> query(const FeedQuery& q) const;
    std::vector<Insight> reorder_for_selection(const std::set<std::string>& selected) const;
    std::vector<Insight> snapshot() const;
    std::size_t size() const;

    /// Atomically captures the backlog and registers a listener for every
    /// later add(). Listeners run under the feed lock, in insertion order,
    /// and must not call back into the feed.
    Subscription subscribe(Listener listener);

private:
    std::shared_ptr<struct FeedState> state_;
};

}  // namespace insightd
