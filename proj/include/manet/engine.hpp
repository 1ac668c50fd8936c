#pragma once

// Deterministic discrete-event engine. Events run in (tick, class, sender,
// insertion) order: topology changes first, then packet deliveries by
// ascending sender id, then timers and injected traffic. Nothing depends on
// wall-clock time or container iteration over pointers, so a scenario and
// seed fully determine the run.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <memory>
#include <optional>
#include <queue>
#include <set>
#include <utility>
#include <variant>
#include <vector>

#include "manet/aodv_node.hpp"
#include "manet/metrics.hpp"
#include "manet/protocol.hpp"
#include "manet/rng.hpp"
#include "manet/scenario.hpp"

namespace manet {

class Topology
{
  public:
    Topology() = default;
    explicit Topology(std::uint32_t node_count);

    std::uint32_t node_count() const { return static_cast<std::uint32_t>(adjacency_.size()); }

    /// Returns false when the link already exists. Unknown nodes or a
    /// self-link throw ValidationError.
    bool add_link(NodeId a, NodeId b, Tick delay = 1);
    bool remove_link(NodeId a, NodeId b);
    bool has_link(NodeId a, NodeId b) const;
    std::optional<Tick> delay(NodeId a, NodeId b) const;
    /// Ascending.
    std::vector<NodeId> peers(NodeId n) const;
    std::size_t link_count() const { return links_.size(); }
    const std::map<std::pair<NodeId, NodeId>, Tick>& links() const { return links_; }

    void add_drop(const DropSpec& drop) { drops_.push_back(drop); }
    bool drop_matches(Tick at, NodeId from, NodeId to, PacketType type) const;

    void set_position(NodeId n, Position p);
    std::optional<Position> position(NodeId n) const;
    std::optional<double> distance(NodeId a, NodeId b) const;

  private:
    void check(NodeId n) const;

    std::vector<std::set<NodeId>> adjacency_;
    std::map<std::pair<NodeId, NodeId>, Tick> links_;
    std::vector<DropSpec> drops_;
    std::vector<std::optional<Position>> positions_;
};

namespace event {

struct Deliver
{
    NodeId to;
    NodeId from;
    Packet packet;
};
struct TimerFire
{
    NodeId node;
    Timer timer;
};
struct LinkUp
{
    NodeId a;
    NodeId b;
    Tick delay = 1;
};
struct LinkDown
{
    NodeId a;
    NodeId b;
};
struct Inject
{
    NodeId node;
    NodeId dest;
    std::uint32_t payload_id = 0;
    /// 1-based traffic round.
    std::uint32_t round = 0;
};
struct MobilityStep
{
};

} // namespace event

using EventBody =
  std::variant<event::Deliver, event::TimerFire, event::LinkUp, event::LinkDown, event::Inject, event::MobilityStep>;

struct Event
{
    Tick at = 0;
    std::uint64_t seq = 0;
    EventBody body;
};

struct TransmitOutcome
{
    enum class Kind
    {
        Scheduled,
        Lost,
        LinkAbsent,
    };
    Kind kind = Kind::Scheduled;
    Tick deliver_at = 0;
};

TransmitOutcome transmit(const Topology& topology, NodeId from, NodeId to, const Packet& packet, Tick now);

enum class LinkChange
{
    Added,
    Removed,
    Unchanged,
};

/// Applies a LinkUp or LinkDown body. Any other body throws ContractViolation.
LinkChange apply_link_event(Topology& topology, const EventBody& body, Tick now);

class Engine
{
  public:
    /// `trace`, when given, receives one tab-separated line per event.
    explicit Engine(Scenario scenario, std::ostream* trace = nullptr);

    Engine(const Engine&) = delete;
    Engine& operator=(const Engine&) = delete;

    /// Runs to the scenario horizon and returns the final metrics.
    MetricsReport run();
    /// Processes every event scheduled at or before `t`.
    void run_until(Tick t);

    Tick now() const { return now_; }
    const Scenario& scenario() const { return scenario_; }
    const Topology& topology() const { return topology_; }
    const AodvNode& node(NodeId id) const { return *nodes_.at(id.value); }
    AodvNode& node(NodeId id) { return *nodes_.at(id.value); }
    const MetricsReport& metrics() const { return metrics_; }

    void schedule_data(NodeId origin, NodeId dest, Tick at, std::uint32_t round = 0);
    void schedule_link_up(NodeId a, NodeId b, Tick at, Tick delay = 1);
    void schedule_link_down(NodeId a, NodeId b, Tick at);

    /// Transmissions refused because the link was absent (sender, receiver).
    const std::vector<std::pair<NodeId, NodeId>>& refused_sends() const { return refused_; }

  private:
    struct Order
    {
        bool operator()(const Event& x, const Event& y) const;
    };

    void push(Tick at, EventBody body);
    void handle(const Event& ev);
    void dispatch(NodeId who, Emissions emissions);
    void send(NodeId from, NodeId to, const Packet& packet);
    void link_changed(NodeId a, NodeId b, LinkChange change);
    void move_nodes();
    void trace(Tick at, const std::string& node, const char* kind, const std::string& detail);
    std::uint32_t flow_round(NodeId origin, NodeId dest) const;
    bool periodic(const Event& ev) const;

    Scenario scenario_;
    Topology topology_;
    std::vector<std::unique_ptr<AodvNode>> nodes_;
    MetricsReport metrics_;
    std::priority_queue<Event, std::vector<Event>, Order> queue_;
    std::uint64_t next_seq_ = 0;
    std::uint32_t next_payload_ = 1;
    Tick now_ = 0;
    std::ostream* trace_ = nullptr;
    std::map<std::pair<NodeId, NodeId>, std::uint32_t> flow_rounds_;
    std::map<RreqId, std::uint32_t> rreq_rounds_;
    std::vector<std::pair<NodeId, NodeId>> refused_;

    struct Walker
    {
        Position target;
        double speed = 0.0;
        Tick pause_until = 0;
    };
    Rng mobility_rng_;
    std::vector<Walker> walkers_;
};

/// Convenience: build, run and return the report.
MetricsReport run(const Scenario& scenario, std::ostream* trace = nullptr);

} // namespace manet
