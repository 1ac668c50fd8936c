#pragma once

// Per-node AODV state machine. The node never touches a clock, a socket or
// the topology: every entry point takes the current tick and returns the
// emissions (sends, timer requests, deliveries, drops and metric notices)
// for the engine to carry out.

#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <variant>
#include <vector>

#include "manet/protocol.hpp"
#include "manet/rng.hpp"
#include "manet/suppression.hpp"

namespace manet {

struct NodeConfig
{
    std::uint32_t node_count = 1;
    Tick hello_interval = 10;
    Tick hello_timeout = 25;
    Tick route_lifetime = 50;
    Tick discovery_deadline = 0;
    /// Total attempts per discovery, the first one included.
    std::uint32_t max_retries = 2;
    /// TTL of a non-ring RREQ; 0 means node_count.
    std::uint32_t flood_ttl = 0;
    bool intermediate_reply = true;
    /// Destination answers the first copy arriving from each neighbor
    /// instead of only the first copy overall.
    bool reply_each_neighbor = false;
    bool hello_enabled = true;
    bool per_neighbor_aggregate = false;
    Strategy strategy = Flood{};
    std::uint64_t seed = 0;

    Tick effective_deadline() const;
    std::uint32_t effective_flood_ttl() const { return flood_ttl == 0 ? node_count : flood_ttl; }
    Tick attempt_timeout() const;
};

enum class TimerKind : std::uint8_t
{
    Hello,
    DiscoveryDeadline,
    AttemptTimeout,
    RelayDecision,
};

const char* to_string(TimerKind k);

struct Timer
{
    TimerKind kind = TimerKind::Hello;
    NodeId dest;
    RreqId rreq;

    friend constexpr auto operator<=>(const Timer&, const Timer&) = default;
};

enum class DropReason : std::uint8_t
{
    TtlExpired,
    NoReversePath,
    NoRoute,
    DiscoveryFailed,
};

const char* to_string(DropReason r);

namespace notice {

struct RedundantRreq
{
    RreqId rreq;
    NodeId from;
};
struct Suppressed
{
    RreqId rreq;
    std::uint32_t count = 0;
};
struct DiscoveryStarted
{
    NodeId dest;
};
struct DiscoveryAttempt
{
    NodeId dest;
    RreqId rreq;
    std::uint32_t attempt = 0;
    std::uint32_t ttl = 0;
};
struct DiscoveryResolved
{
    NodeId dest;
    std::uint32_t hop_count = 0;
};
struct DiscoveryFailed
{
    NodeId dest;
};
/// RREP for an attempt that had already been settled.
struct LateReply
{
    RreqId rreq;
    NodeId neighbor;
};
struct LinkBoost
{
    NodeId dest;
    NodeId neighbor;
};

} // namespace notice

using Notice = std::variant<notice::RedundantRreq,
                            notice::Suppressed,
                            notice::DiscoveryStarted,
                            notice::DiscoveryAttempt,
                            notice::DiscoveryResolved,
                            notice::DiscoveryFailed,
                            notice::LateReply,
                            notice::LinkBoost>;

struct Send
{
    NodeId to;
    Packet packet;
};
/// Link-local broadcast (HELLO): reaches whoever is physically in range.
struct Broadcast
{
    Packet packet;
};
struct SetTimer
{
    Timer timer;
    Tick at = 0;
};
struct DeliverUp
{
    NodeId src;
    std::uint32_t payload_id = 0;
};
struct Drop
{
    Packet packet;
    DropReason reason = DropReason::NoRoute;
};

using Emission = std::variant<Send, Broadcast, SetTimer, DeliverUp, Drop, Notice>;
using Emissions = std::vector<Emission>;

struct Discovery
{
    RreqId rreq;
    /// 1-based.
    std::uint32_t attempt = 1;
    Tick deadline = 0;
};

/// RREQ waiting out the copy-counting window of the counter-based policy.
struct PendingRelay
{
    Rreq rreq;
    NodeId from;
    std::uint64_t copies = 1;
};

struct NodeState
{
    NodeId me;
    SeqNum seq;
    std::uint32_t next_rreq_id = 1;
    std::map<NodeId, RoutingEntry> routes;
    std::map<RreqId, ReversePathEntry> reverse_paths;
    std::set<RreqId> seen_rreqs;
    std::map<NodeId, Tick> neighbors;
    /// Neighbors that appeared after start-up and have not yet carried a reply.
    std::set<NodeId> fresh_links;
    std::map<NodeId, Discovery> pending_discoveries;
    ConnectivityTable connectivity;
    /// Links with an open connectivity attempt, per RREQ wave.
    std::map<RreqId, std::vector<std::pair<NodeId, NodeId>>> open_attempts;
    std::map<NodeId, std::deque<std::uint32_t>> outbox_queue;
    std::map<RreqId, PendingRelay> pending_relays;
    /// Neighbors already answered per RREQ when this node is the destination.
    std::map<RreqId, std::set<NodeId>> answered;
};

class AodvNode
{
  public:
    /// Returns the distance from this node to another one, if known.
    using DistanceFn = std::function<std::optional<double>(NodeId)>;

    AodvNode(NodeId me, NodeConfig config);

    NodeId id() const { return state_.me; }
    const NodeConfig& config() const { return config_; }
    const NodeState& state() const { return state_; }
    NodeState& state() { return state_; }

    void set_distance_fn(DistanceFn fn) { distance_ = std::move(fn); }

    /// Seeds the neighbor table as if a HELLO round had just completed and
    /// arms the periodic HELLO timer.
    Emissions start(const std::vector<NodeId>& initial_neighbors, Tick now);

    /// Dispatches a received packet.
    Emissions receive(const Packet& packet, NodeId from, Tick now);
    Emissions on_timer(const Timer& timer, Tick now);

    Emissions send_data(NodeId dest, std::uint32_t payload_id, Tick now);
    /// Throws InvalidDestination for dest == me.
    Emissions initiate_discovery(NodeId dest, Tick now);

    Emissions on_rreq(const Rreq& rreq, NodeId from, Tick now);
    Emissions on_rrep(const Rrep& rrep, NodeId from, Tick now);
    Emissions on_rerr(const Rerr& rerr, NodeId from, Tick now);
    Emissions on_hello(const Hello& hello, NodeId from, Tick now);
    Emissions on_data(const Data& data, NodeId from, Tick now);

    Emissions on_discovery_timeout(NodeId dest, RreqId rreq, Tick now);
    Emissions on_attempt_timeout(RreqId rreq, Tick now);
    Emissions on_relay_decision(RreqId rreq, Tick now);
    Emissions on_hello_tick(Tick now);
    Emissions on_route_timer(Tick now);
    Emissions on_link_break(NodeId lost_neighbor, Tick now);

    /// Link-layer notification used when HELLO beaconing is off.
    Emissions on_link_up(NodeId neighbor, Tick now);

    /// Valid route to `dest` at `now`, if any.
    const RoutingEntry* route_to(NodeId dest, Tick now) const;

    bool tracks_connectivity() const { return std::holds_alternative<Connectivity>(config_.strategy); }

  private:
    Emissions launch_attempt(NodeId dest, std::uint32_t attempt, Tick now);
    void relay_rreq(const Rreq& rreq, NodeId from, std::uint64_t copies, Tick now, Emissions& out);
    void send_rreq(const Rreq& rreq, const std::vector<NodeId>& targets, Tick now, Emissions& out);
    void answer_rreq(const Rreq& rreq, NodeId from, Tick now, Emissions& out);
    void settle_attempts(RreqId rreq);
    void flush_outbox(NodeId dest, Tick now, Emissions& out);
    void invalidate_via(NodeId neighbor, Tick now, Emissions& out);
    void rediscover(const std::vector<NodeId>& dests, Tick now, Emissions& out);
    bool install_route(const Rrep& rrep, NodeId from, Tick now);
    std::vector<NodeId> neighbor_list(std::optional<NodeId> excluding = std::nullopt) const;

    NodeConfig config_;
    NodeState state_;
    Rng rng_;
    DistanceFn distance_;
};

} // namespace manet
