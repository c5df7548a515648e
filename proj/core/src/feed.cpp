#include "insightd/feed.hpp"

#include "insightd/error.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <map>
#include <unordered_set>

namespace insightd {

struct FeedState {
    mutable std::mutex mutex;
    std::vector<Insight> items;
    std::unordered_set<std::string> ids;
    std::uint64_t next_sequence = 1;
    std::uint64_t next_pin = 1;
    std::uint64_t next_token = 1;
    std::map<std::uint64_t, Feed::Listener> listeners;
};

std::string_view to_string(SortKey key) noexcept {
    switch (key) {
        case SortKey::time: return "time";
        case SortKey::score: return "score";
        case SortKey::alpha: return "alpha";
    }
    return "time";
}

std::optional<SortKey> parse_sort_key(std::string_view text) noexcept {
    for (auto k : {SortKey::time, SortKey::score, SortKey::alpha})
        if (to_string(k) == text) return k;
    return std::nullopt;
}

namespace {

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

bool touches(const Insight& item, const std::set<std::string>& selected) {
    return std::any_of(item.field_names.begin(), item.field_names.end(),
                       [&](const std::string& f) { return selected.count(f) > 0; });
}

}  // namespace

bool matches_text(const Insight& insight, std::string_view needle) {
    const auto n = lower(needle);
    if (n.empty()) return true;
    if (lower(insight.title).find(n) != std::string::npos) return true;
    if (lower(insight.description).find(n) != std::string::npos) return true;
    return std::any_of(insight.field_names.begin(), insight.field_names.end(),
                       [&](const std::string& f) { return lower(f).find(n) != std::string::npos; });
}

std::vector<Insight> filter_kinds(std::vector<Insight> items, const std::set<ModuleKind>& kinds) {
    std::erase_if(items, [&](const Insight& i) { return kinds.count(i.kind) == 0; });
    return items;
}

std::vector<Insight> search(std::vector<Insight> items, std::string_view needle) {
    std::erase_if(items, [&](const Insight& i) { return !matches_text(i, needle); });
    return items;
}

std::vector<Insight> sort_items(std::vector<Insight> items, SortKey key) {
    const auto newer = [](const Insight& a, const Insight& b) {
        if (a.created_at != b.created_at) return a.created_at > b.created_at;
        return a.id < b.id;
    };
    switch (key) {
        case SortKey::time: std::stable_sort(items.begin(), items.end(), newer); break;
        case SortKey::score:
            std::stable_sort(items.begin(), items.end(), [&](const Insight& a, const Insight& b) {
                if (a.score != b.score) return a.score > b.score;
                return newer(a, b);
            });
            break;
        case SortKey::alpha:
            std::stable_sort(items.begin(), items.end(), [&](const Insight& a, const Insight& b) {
                if (a.title != b.title) return a.title < b.title;
                return newer(a, b);
            });
            break;
    }
    return items;
}

std::vector<Insight> group_by_kind(std::vector<Insight> items) {
    std::vector<ModuleKind> first_seen;
    for (const auto& i : items)
        if (std::find(first_seen.begin(), first_seen.end(), i.kind) == first_seen.end()) first_seen.push_back(i.kind);
    std::stable_sort(items.begin(), items.end(), [&](const Insight& a, const Insight& b) {
        return std::find(first_seen.begin(), first_seen.end(), a.kind) <
               std::find(first_seen.begin(), first_seen.end(), b.kind);
    });
    return items;
}

std::vector<Insight> reorder_for_selection(std::vector<Insight> items, const std::set<std::string>& selected) {
    if (selected.empty()) return items;
    std::vector<ModuleKind> promoted;
    for (const auto& i : items)
        if (touches(i, selected) && std::find(promoted.begin(), promoted.end(), i.kind) == promoted.end())
            promoted.push_back(i.kind);
    if (promoted.empty()) return items;

    std::vector<Insight> out;
    out.reserve(items.size());
    for (auto kind : promoted) {
        for (const auto& i : items)
            if (i.kind == kind && touches(i, selected)) out.push_back(i);
        for (const auto& i : items)
            if (i.kind == kind && !touches(i, selected)) out.push_back(i);
    }
    for (auto& i : items)
        if (std::find(promoted.begin(), promoted.end(), i.kind) == promoted.end()) out.push_back(std::move(i));
    return out;
}

std::vector<Insight> run_query(std::vector<Insight> items, const FeedQuery& q) {
    if (q.kind_filter) items = filter_kinds(std::move(items), *q.kind_filter);
    if (q.text) items = search(std::move(items), *q.text);
    items = sort_items(std::move(items), q.sort);
    if (q.selected_fields) items = reorder_for_selection(std::move(items), *q.selected_fields);
    if (q.group_by_kind) items = group_by_kind(std::move(items));
    return items;
}

Feed::Subscription::~Subscription() {
    if (auto state = state_.lock()) {
        std::lock_guard lock(state->mutex);
        state->listeners.erase(token_);
    }
}

Feed::Feed() : state_(std::make_shared<FeedState>()) {}

Insight Feed::add(Insight insight) {
    std::lock_guard lock(state_->mutex);
    if (insight.id.empty() || state_->ids.count(insight.id))
        throw Error(ErrorCode::DuplicateId, "insight id '" + insight.id + "' is empty or already in the feed");
    insight.created_at = state_->next_sequence++;
    state_->ids.insert(insight.id);
    state_->items.push_back(insight);
    for (auto& [_, listener] : state_->listeners) listener(insight);
    return insight;
}

Insight Feed::pin(const ChartSpec& chart, const std::string& title) {
    ChartSpec named = chart;
    if (named.chart_id.empty()) named.chart_id = "pending";
    if (auto violations = validate(named); !violations.empty())
        throw Error(ErrorCode::InvalidChart, violations.front());

    Insight insight;
    std::uint64_t n = 0;
    {
        std::lock_guard lock(state_->mutex);
        n = state_->next_pin++;
    }
    insight.id = fmt::format("pin{}", n);
    insight.chart_ref = fmt::format("p{}", n);
    insight.kind = ModuleKind::user_pinned;
    insight.origin = Origin::user;
    insight.score = 0.0;
    insight.title = title.empty() ? fmt::format("Pinned view {}", n) : title;
    for (const auto* e : {&chart.x, &chart.y})
        if (!e->field.empty()) insight.field_names.push_back(e->field);
    insight.description = fmt::format("Pinned {} chart", to_string(chart.mark));
    if (!insight.field_names.empty()) {
        insight.description += " of ";
        for (std::size_t i = 0; i < insight.field_names.size(); ++i)
            insight.description += (i ? " and " : "") + display_name(insight.field_names[i]);
    }
    insight.description += ".";
    return add(std::move(insight));
}

std::vector<Insight> Feed::snapshot() const {
    std::lock_guard lock(state_->mutex);
    return state_->items;
}

std::size_t Feed::size() const {
    std::lock_guard lock(state_->mutex);
    return state_->items.size();
}

std::vector<Insight> Feed::query(const FeedQuery& q) const { return run_query(snapshot(), q); }

std::vector<Insight> Feed::reorder_for_selection(const std::set<std::string>& selected) const {
    return insightd::reorder_for_selection(sort_items(snapshot(), SortKey::time), selected);
}

Feed::Subscription Feed::subscribe(Listener listener) {
    Subscription sub;
    std::lock_guard lock(state_->mutex);
    sub.backlog = state_->items;
    sub.token_ = state_->next_token++;
    sub.state_ = state_;
    state_->listeners.emplace(sub.token_, std::move(listener));
    return sub;
}

}  // namespace insightd
