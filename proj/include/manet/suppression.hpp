#pragma once

// RREQ forwarding-set policies. The connectivity-index learner keeps, per
// outgoing link, a count of RREQ attempts and of attempts answered by an
// RREP through that link, and only forwards on links whose index exceeds
// a threshold once a warm-up period is over. The other policies are the
// classic broadcast-storm baselines used for comparison.

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "manet/protocol.hpp"
#include "manet/rng.hpp"

namespace manet {

enum class IndexMode : std::uint8_t
{
    /// mu = successes / attempts
    Raw,
    /// mu <- alpha * outcome + (1 - alpha) * mu
    Ema,
    /// mu <- alpha * (successes / attempts) + (1 - alpha) * mu
    Blend,
};

const char* to_string(IndexMode m);
std::optional<IndexMode> index_mode_from_string(std::string_view s);

struct ConnectivityConfig
{
    IndexMode mode = IndexMode::Raw;
    double alpha = 0.3;
    double threshold = 0.5;
    double initial_mu = 1.0;
    std::uint32_t warmup = 10;
    double boost = 0.1;
    /// 0 means "use the discovery deadline".
    Tick attempt_timeout = 0;

    /// Throws ConfigError.
    void validate() const;

    bool operator==(const ConnectivityConfig&) const = default;
};

struct ConnectivityRecord
{
    std::uint32_t attempts = 0;
    std::uint32_t successes = 0;
    double mu = 1.0;
    std::map<RreqId, Tick> pending;

    static ConnectivityRecord fresh(const ConnectivityConfig& config);

    bool operator==(const ConnectivityRecord&) const = default;
};

/// successes / attempts, or initial_mu before the first attempt.
/// successes > attempts throws InvariantViolation.
double mu_raw(std::uint32_t successes, std::uint32_t attempts, double initial_mu = 1.0);

/// One smoothing step. alpha outside (0, 1) throws ConfigError.
double mu_ema_step(double mu_prev, int outcome, double alpha);

bool eligible(const ConnectivityRecord& record, const ConnectivityConfig& config);

/// Counts an attempt and remembers it as pending. The index itself only
/// moves when the attempt resolves. Throws InvariantViolation when the id
/// is already pending.
void open_attempt(ConnectivityRecord& record, RreqId rreq_id, Tick now);

/// Settles a pending attempt. Returns false (and leaves the record alone)
/// when the id is not pending, which happens for replies that arrive after
/// the attempt already timed out. Raw mode sets mu to successes over
/// resolved attempts.
bool resolve_attempt(ConnectivityRecord& record, RreqId rreq_id, bool success, const ConnectivityConfig& config);

void boost_new_link(ConnectivityRecord& record, const ConnectivityConfig& config);

/// Records keyed by (destination, neighbor). With `per_neighbor` set all
/// destinations share one record per neighbor.
class ConnectivityTable
{
  public:
    struct Key
    {
        NodeId dest;
        NodeId neighbor;

        friend constexpr auto operator<=>(const Key&, const Key&) = default;
    };

    ConnectivityTable() = default;
    explicit ConnectivityTable(ConnectivityConfig config, bool per_neighbor = false);

    const ConnectivityConfig& config() const { return config_; }
    bool per_neighbor() const { return per_neighbor_; }

    const ConnectivityRecord* find(NodeId dest, NodeId neighbor) const;
    ConnectivityRecord& at(NodeId dest, NodeId neighbor);

    /// A neighbor with no record yet is eligible (it is still warming up).
    bool eligible(NodeId dest, NodeId neighbor) const;

    const std::map<Key, ConnectivityRecord>& records() const { return records_; }

  private:
    Key key(NodeId dest, NodeId neighbor) const;

    ConnectivityConfig config_;
    bool per_neighbor_ = false;
    std::map<Key, ConnectivityRecord> records_;
};

struct Flood
{
    bool operator==(const Flood&) const = default;
};

struct Connectivity
{
    ConnectivityConfig config;

    bool operator==(const Connectivity&) const = default;
};

struct Probabilistic
{
    double p = 1.0;

    bool operator==(const Probabilistic&) const = default;
};

struct CounterBased
{
    std::uint64_t c = 0;

    bool operator==(const CounterBased&) const = default;
};

struct DistanceBased
{
    double d_min = 0.0;

    bool operator==(const DistanceBased&) const = default;
};

struct ExpandingRing
{
    std::uint32_t ttl_start = 1;
    std::uint32_t ttl_increment = 2;
    std::uint32_t ttl_threshold = 7;

    bool operator==(const ExpandingRing&) const = default;
};

using Strategy = std::variant<Flood, Connectivity, Probabilistic, CounterBased, DistanceBased, ExpandingRing>;

/// Compact label: flood, connectivity, probabilistic:P, counter:C,
/// distance:D, ring:START:INC:THRESHOLD.
std::string strategy_label(const Strategy& s);

/// Inverse of strategy_label. `connectivity` takes its config from
/// `connectivity_defaults`. Throws ConfigError.
Strategy parse_strategy(std::string_view label, const ConnectivityConfig& connectivity_defaults = {});

void validate(const Strategy& s);

/// What a node knows locally when it decides where to forward an RREQ.
struct SelectionContext
{
    NodeId me;
    /// Absent when `me` originates the RREQ.
    std::optional<NodeId> previous_hop;
    /// Copies of this RREQ heard so far, including the first.
    std::uint64_t copies_heard = 1;
    /// Distance between the previous hop and `me`, when positions are known.
    std::optional<double> distance_from_previous;
    const ConnectivityTable* connectivity = nullptr;
};

struct Selection
{
    std::vector<NodeId> targets;
    /// Candidates the policy excluded.
    std::uint32_t suppressed = 0;
};

/// Forwarding set for `rreq` among `candidates` (ascending NodeId, previous
/// hop already removed). The gossip-style policies (probabilistic, counter,
/// distance) only filter relays; an origin always sends to every candidate.
Selection select_targets(const Strategy& strategy,
                         const SelectionContext& ctx,
                         const Rreq& rreq,
                         std::span<const NodeId> candidates,
                         Rng& rng);

/// TTL for the 0-based attempt. Once the scheduled value would pass the
/// threshold the search falls back to a network-wide flood (`node_count`).
std::uint32_t expanding_ring_next_ttl(const ExpandingRing& schedule, std::uint32_t attempt_index, std::uint32_t node_count);

} // namespace manet
