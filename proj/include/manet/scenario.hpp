#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "manet/protocol.hpp"
#include "manet/suppression.hpp"

namespace manet {

struct Position
{
    double x = 0.0;
    double y = 0.0;

    bool operator==(const Position&) const = default;
};

struct NodeSpec
{
    std::string name;
    std::optional<Position> pos;

    bool operator==(const NodeSpec&) const = default;
};

struct LinkSpec
{
    NodeId a;
    NodeId b;
    Tick delay = 1;

    bool operator==(const LinkSpec&) const = default;
};

struct LinkEventSpec
{
    Tick at = 0;
    bool up = false;
    NodeId a;
    NodeId b;
    Tick delay = 1;

    bool operator==(const LinkEventSpec&) const = default;
};

/// Scripted loss of a transmission sent at tick `at` over from -> to.
struct DropSpec
{
    Tick at = 0;
    NodeId from;
    NodeId to;
    /// Only packets of this type are lost; any packet when absent.
    std::optional<PacketType> packet;

    bool operator==(const DropSpec&) const = default;
};

/// `rounds` data packets from origin to dest, the k-th (0-based) injected at
/// start + k * interval. Each one that finds no route opens a discovery.
struct TrafficSpec
{
    NodeId origin;
    NodeId dest;
    Tick start = 0;
    Tick interval = 100;
    std::uint32_t rounds = 1;

    bool operator==(const TrafficSpec&) const = default;
};

enum class MobilityKind : std::uint8_t
{
    Static,
    Scripted,
    RandomWaypoint,
};

const char* to_string(MobilityKind k);

struct RandomWaypointSpec
{
    double width = 100.0;
    double height = 100.0;
    /// Distance units per tick.
    double speed_min = 0.5;
    double speed_max = 2.0;
    Tick pause = 0;
    double radio_range = 30.0;
    /// Ticks between position updates.
    Tick step = 1;

    bool operator==(const RandomWaypointSpec&) const = default;
};

struct TimingSpec
{
    Tick hello_interval = 10;
    Tick hello_timeout = 25;
    Tick route_lifetime = 50;
    /// 0 means 2 * node_count * max link delay.
    Tick discovery_deadline = 0;
    std::uint32_t max_retries = 2;
    /// 0 means node_count.
    std::uint32_t flood_ttl = 0;

    bool operator==(const TimingSpec&) const = default;
};

struct FlagSpec
{
    bool intermediate_reply = true;
    bool per_neighbor_aggregate = false;
    bool reply_each_neighbor = false;
    bool hello = true;

    bool operator==(const FlagSpec&) const = default;
};

struct Scenario
{
    int schema = 1;
    std::string name;
    std::string comment;
    std::vector<NodeSpec> nodes;
    std::vector<LinkSpec> links;
    MobilityKind mobility = MobilityKind::Static;
    std::optional<RandomWaypointSpec> random_waypoint;
    std::vector<LinkEventSpec> link_events;
    std::vector<DropSpec> drops;
    std::vector<TrafficSpec> traffic;
    Strategy strategy = Flood{};
    std::uint64_t seed = 1;
    /// 0 means horizon() picks one.
    Tick t_max = 0;
    TimingSpec timing;
    FlagSpec flags;

    std::uint32_t node_count() const { return static_cast<std::uint32_t>(nodes.size()); }
    Tick max_link_delay() const;
    Tick discovery_deadline() const;
    /// t_max, or the last scheduled activity plus enough time for every
    /// retry of the last discovery to play out.
    Tick horizon() const;

    std::optional<NodeId> find_node(std::string_view name) const;
    const std::string& node_name(NodeId id) const;

    /// Throws ValidationError.
    void validate() const;

    bool operator==(const Scenario&) const = default;
};

} // namespace manet
