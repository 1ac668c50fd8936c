#include "manet/suppression.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <sstream>

namespace manet {

const char*
to_string(IndexMode m)
{
    switch (m) {
        case IndexMode::Raw:
            return "raw";
        case IndexMode::Ema:
            return "ema";
        case IndexMode::Blend:
            return "blend";
    }
    return "?";
}

std::optional<IndexMode>
index_mode_from_string(std::string_view s)
{
    if (s == "raw")
        return IndexMode::Raw;
    if (s == "ema")
        return IndexMode::Ema;
    if (s == "blend")
        return IndexMode::Blend;
    return std::nullopt;
}

void
ConnectivityConfig::validate() const
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("connectivity alpha must lie in (0, 1)");
    // Negative thresholds are allowed: they turn the filter off.
    if (!(threshold <= 1.0))
        throw ConfigError("connectivity threshold must be <= 1");
    if (!(initial_mu >= 0.0 && initial_mu <= 1.0))
        throw ConfigError("connectivity initial_mu must lie in [0, 1]");
    if (!(boost >= 0.0 && boost <= 1.0))
        throw ConfigError("connectivity boost must lie in [0, 1]");
    if (attempt_timeout < 0)
        throw ConfigError("connectivity attempt_timeout must be >= 0");
}

ConnectivityRecord
ConnectivityRecord::fresh(const ConnectivityConfig& config)
{
    ConnectivityRecord r;
    r.mu = config.initial_mu;
    return r;
}

double
mu_raw(std::uint32_t successes, std::uint32_t attempts, double initial_mu)
{
    if (successes > attempts)
        throw InvariantViolation("more successes than attempts on a link");
    if (attempts == 0)
        return initial_mu;
    return static_cast<double>(successes) / static_cast<double>(attempts);
}

double
mu_ema_step(double mu_prev, int outcome, double alpha)
{
    if (!(alpha > 0.0 && alpha < 1.0))
        throw ConfigError("alpha must lie in (0, 1)");
    const double out = outcome != 0 ? 1.0 : 0.0;
    return std::clamp(alpha * out + (1.0 - alpha) * mu_prev, 0.0, 1.0);
}

bool
eligible(const ConnectivityRecord& record, const ConnectivityConfig& config)
{
    if (record.attempts < config.warmup)
        return true;
    return record.mu > config.threshold;
}

void
open_attempt(ConnectivityRecord& record, RreqId rreq_id, Tick now)
{
    if (record.pending.contains(rreq_id))
        throw InvariantViolation("attempt already open for this RREQ on this link");
    record.pending.emplace(rreq_id, now);
    ++record.attempts;
}

bool
resolve_attempt(ConnectivityRecord& record, RreqId rreq_id, bool success, const ConnectivityConfig& config)
{
    auto it = record.pending.find(rreq_id);
    if (it == record.pending.end())
        return false;
    record.pending.erase(it);
    if (success)
        ++record.successes;

    // Attempts still in flight have no outcome yet and stay out of the ratio.
    const auto resolved = record.attempts - static_cast<std::uint32_t>(record.pending.size());
    switch (config.mode) {
        case IndexMode::Raw:
            record.mu = mu_raw(record.successes, resolved, config.initial_mu);
            break;
        case IndexMode::Ema:
            record.mu = mu_ema_step(record.mu, success ? 1 : 0, config.alpha);
            break;
        case IndexMode::Blend: {
            const double ratio = mu_raw(record.successes, resolved, config.initial_mu);
            record.mu = std::clamp(config.alpha * ratio + (1.0 - config.alpha) * record.mu, 0.0, 1.0);
            break;
        }
    }
    return true;
}

void
boost_new_link(ConnectivityRecord& record, const ConnectivityConfig& config)
{
    record.mu = std::min(1.0, record.mu + config.boost);
}

ConnectivityTable::ConnectivityTable(ConnectivityConfig config, bool per_neighbor)
  : config_(config),
    per_neighbor_(per_neighbor)
{
}

ConnectivityTable::Key
ConnectivityTable::key(NodeId dest, NodeId neighbor) const
{
    // Aggregate mode folds every destination onto one sentinel key.
    return Key{per_neighbor_ ? NodeId{UINT32_MAX} : dest, neighbor};
}

const ConnectivityRecord*
ConnectivityTable::find(NodeId dest, NodeId neighbor) const
{
    auto it = records_.find(key(dest, neighbor));
    return it == records_.end() ? nullptr : &it->second;
}

ConnectivityRecord&
ConnectivityTable::at(NodeId dest, NodeId neighbor)
{
    auto [it, inserted] = records_.try_emplace(key(dest, neighbor), ConnectivityRecord::fresh(config_));
    return it->second;
}

bool
ConnectivityTable::eligible(NodeId dest, NodeId neighbor) const
{
    const auto* r = find(dest, neighbor);
    if (r == nullptr)
        return manet::eligible(ConnectivityRecord::fresh(config_), config_);
    return manet::eligible(*r, config_);
}

namespace {

std::string
format_number(double v)
{
    std::ostringstream os;
    os << v;
    return os.str();
}

template<typename T>
T
parse_number(std::string_view text, std::string_view label)
{
    T value{};
    const auto* end = text.data() + text.size();
    auto [ptr, ec] = std::from_chars(text.data(), end, value);
    if (ec != std::errc{} || ptr != end)
        throw ConfigError("bad number '" + std::string(text) + "' in strategy '" + std::string(label) + "'");
    return value;
}

std::vector<std::string_view>
split(std::string_view s, char sep)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto pos = s.find(sep, start);
        out.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos)
            break;
        start = pos + 1;
    }
    return out;
}

} // namespace

std::string
strategy_label(const Strategy& s)
{
    struct Labeler
    {
        std::string operator()(const Flood&) const { return "flood"; }
        std::string operator()(const Connectivity&) const { return "connectivity"; }
        std::string operator()(const Probabilistic& p) const { return "probabilistic:" + format_number(p.p); }
        std::string operator()(const CounterBased& c) const { return "counter:" + std::to_string(c.c); }
        std::string operator()(const DistanceBased& d) const { return "distance:" + format_number(d.d_min); }
        std::string operator()(const ExpandingRing& r) const
        {
            return "ring:" + std::to_string(r.ttl_start) + ":" + std::to_string(r.ttl_increment) + ":" +
                   std::to_string(r.ttl_threshold);
        }
    };
    return std::visit(Labeler{}, s);
}

Strategy
parse_strategy(std::string_view label, const ConnectivityConfig& connectivity_defaults)
{
    auto parts = split(label, ':');
    const auto name = parts.front();
    auto expect_args = [&](std::size_t n) {
        if (parts.size() != n + 1)
            throw ConfigError("strategy '" + std::string(label) + "' expects " + std::to_string(n) + " argument(s)");
    };

    Strategy s;
    if (name == "flood") {
        expect_args(0);
        s = Flood{};
    } else if (name == "connectivity") {
        expect_args(0);
        s = Connectivity{connectivity_defaults};
    } else if (name == "probabilistic") {
        expect_args(1);
        s = Probabilistic{parse_number<double>(parts[1], label)};
    } else if (name == "counter") {
        expect_args(1);
        s = CounterBased{parse_number<std::uint64_t>(parts[1], label)};
    } else if (name == "distance") {
        expect_args(1);
        s = DistanceBased{parse_number<double>(parts[1], label)};
    } else if (name == "ring") {
        expect_args(3);
        s = ExpandingRing{parse_number<std::uint32_t>(parts[1], label),
                          parse_number<std::uint32_t>(parts[2], label),
                          parse_number<std::uint32_t>(parts[3], label)};
    } else {
        throw ConfigError("unknown strategy '" + std::string(label) + "'");
    }
    validate(s);
    return s;
}

void
validate(const Strategy& s)
{
    if (const auto* c = std::get_if<Connectivity>(&s))
        c->config.validate();
    if (const auto* p = std::get_if<Probabilistic>(&s); p && !(p->p >= 0.0 && p->p <= 1.0))
        throw ConfigError("probabilistic p must lie in [0, 1]");
    if (const auto* d = std::get_if<DistanceBased>(&s); d && !(d->d_min >= 0.0))
        throw ConfigError("distance d_min must be >= 0");
    if (const auto* r = std::get_if<ExpandingRing>(&s); r && (r->ttl_start == 0 || r->ttl_threshold < r->ttl_start))
        throw ConfigError("expanding ring needs 1 <= ttl_start <= ttl_threshold");
}

namespace {

Selection
everyone(std::span<const NodeId> candidates)
{
    return Selection{{candidates.begin(), candidates.end()}, 0};
}

Selection
nobody(std::span<const NodeId> candidates)
{
    return Selection{{}, static_cast<std::uint32_t>(candidates.size())};
}

} // namespace

Selection
select_targets(const Strategy& strategy,
               const SelectionContext& ctx,
               const Rreq& rreq,
               std::span<const NodeId> candidates,
               Rng& rng)
{
    const bool originating = !ctx.previous_hop.has_value();

    if (std::holds_alternative<Flood>(strategy) || std::holds_alternative<ExpandingRing>(strategy))
        return everyone(candidates);

    if (std::holds_alternative<Connectivity>(strategy)) {
        if (ctx.connectivity == nullptr)
            throw ContractViolation("connectivity strategy needs the node's connectivity table");
        Selection out;
        for (NodeId n : candidates) {
            if (ctx.connectivity->eligible(rreq.dest, n))
                out.targets.push_back(n);
            else
                ++out.suppressed;
        }
        return out;
    }

    if (originating)
        return everyone(candidates);

    if (const auto* p = std::get_if<Probabilistic>(&strategy))
        return rng.coin(p->p) ? everyone(candidates) : nobody(candidates);

    if (const auto* c = std::get_if<CounterBased>(&strategy))
        return ctx.copies_heard <= c->c ? everyone(candidates) : nobody(candidates);

    if (const auto* d = std::get_if<DistanceBased>(&strategy)) {
        // Without positions there is nothing to measure; behave like flooding.
        if (!ctx.distance_from_previous)
            return everyone(candidates);
        return *ctx.distance_from_previous >= d->d_min ? everyone(candidates) : nobody(candidates);
    }

    return everyone(candidates);
}

std::uint32_t
expanding_ring_next_ttl(const ExpandingRing& schedule, std::uint32_t attempt_index, std::uint32_t node_count)
{
    if (attempt_index > 0) {
        const std::uint64_t previous =
          schedule.ttl_start + static_cast<std::uint64_t>(attempt_index - 1) * schedule.ttl_increment;
        if (previous >= schedule.ttl_threshold)
            return node_count;
    }
    const std::uint64_t ttl = schedule.ttl_start + static_cast<std::uint64_t>(attempt_index) * schedule.ttl_increment;
    return static_cast<std::uint32_t>(std::min<std::uint64_t>(ttl, schedule.ttl_threshold));
}

} // namespace manet
