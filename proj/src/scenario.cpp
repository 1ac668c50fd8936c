#include "manet/scenario.hpp"

#include <algorithm>
#include <set>

namespace manet {

const char*
to_string(MobilityKind k)
{
    switch (k) {
        case MobilityKind::Static:
            return "static";
        case MobilityKind::Scripted:
            return "scripted";
        case MobilityKind::RandomWaypoint:
            return "random_waypoint";
    }
    return "?";
}

Tick
Scenario::max_link_delay() const
{
    Tick d = 1;
    for (const auto& l : links)
        d = std::max(d, l.delay);
    for (const auto& e : link_events)
        d = std::max(d, e.delay);
    return d;
}

Tick
Scenario::discovery_deadline() const
{
    if (timing.discovery_deadline > 0)
        return timing.discovery_deadline;
    return 2 * static_cast<Tick>(node_count()) * max_link_delay();
}

Tick
Scenario::horizon() const
{
    if (t_max > 0)
        return t_max;
    Tick last = 0;
    for (const auto& t : traffic)
        last = std::max(last, t.start + static_cast<Tick>(t.rounds - 1) * t.interval);
    for (const auto& e : link_events)
        last = std::max(last, e.at);
    for (const auto& d : drops)
        last = std::max(last, d.at);
    return last + 4 * discovery_deadline() * std::max<Tick>(timing.max_retries, 1);
}

std::optional<NodeId>
Scenario::find_node(std::string_view n) const
{
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        if (nodes[i].name == n)
            return NodeId{static_cast<std::uint32_t>(i)};
    }
    return std::nullopt;
}

const std::string&
Scenario::node_name(NodeId id) const
{
    static const std::string unknown = "?";
    return id.value < nodes.size() ? nodes[id.value].name : unknown;
}

void
Scenario::validate() const
{
    auto fail = [](const std::string& what) { throw ValidationError(what); };
    auto check_id = [&](NodeId id, const std::string& where) {
        if (id.value >= nodes.size())
            fail(where + " references unknown node #" + std::to_string(id.value));
    };

    if (schema != 1)
        fail("unsupported schema " + std::to_string(schema));
    if (nodes.empty())
        fail("scenario has no nodes");

    std::set<std::string> names;
    for (const auto& n : nodes) {
        if (n.name.empty())
            fail("node with empty name");
        if (!names.insert(n.name).second)
            fail("duplicate node name '" + n.name + "'");
    }

    std::set<std::pair<NodeId, NodeId>> seen_links;
    for (const auto& l : links) {
        check_id(l.a, "link");
        check_id(l.b, "link");
        if (l.a == l.b)
            fail("self-link on '" + node_name(l.a) + "'");
        if (l.delay < 1)
            fail("link delay must be >= 1");
        if (!seen_links.insert(std::minmax(l.a, l.b)).second)
            fail("duplicate link " + node_name(l.a) + "-" + node_name(l.b));
    }

    for (const auto& e : link_events) {
        check_id(e.a, "link event");
        check_id(e.b, "link event");
        if (e.a == e.b)
            fail("link event on a self-link");
        if (e.at < 0 || e.delay < 1)
            fail("link event needs at >= 0 and delay >= 1");
    }
    if (!link_events.empty() && mobility != MobilityKind::Scripted)
        fail("link_up/link_down events require scripted mobility");

    if (mobility == MobilityKind::RandomWaypoint) {
        if (!random_waypoint)
            fail("random_waypoint mobility needs its parameters");
        if (!links.empty())
            fail("random_waypoint derives links from positions; explicit links are not allowed");
        const auto& rw = *random_waypoint;
        if (!(rw.width > 0 && rw.height > 0 && rw.radio_range > 0 && rw.speed_min >= 0 &&
              rw.speed_max >= rw.speed_min && rw.step >= 1 && rw.pause >= 0))
            fail("invalid random_waypoint parameters");
    } else if (random_waypoint) {
        fail("random_waypoint parameters given for " + std::string(to_string(mobility)) + " mobility");
    }

    for (const auto& d : drops) {
        check_id(d.from, "drop");
        check_id(d.to, "drop");
        if (d.at < 0)
            fail("drop tick must be >= 0");
    }

    const Tick deadline = discovery_deadline();
    for (const auto& t : traffic) {
        check_id(t.origin, "traffic");
        check_id(t.dest, "traffic");
        if (t.origin == t.dest)
            fail("traffic origin and destination are the same node");
        if (t.rounds < 1 || t.start < 0)
            fail("traffic needs rounds >= 1 and start >= 0");
        if (t.rounds > 1 && t.interval < 4 * deadline)
            fail("traffic rounds overlap: interval " + std::to_string(t.interval) + " < 4 x discovery deadline (" +
                 std::to_string(4 * deadline) + ")");
    }

    try {
        manet::validate(strategy);
    } catch (const ConfigError& e) {
        fail(e.what());
    }
    if (std::holds_alternative<DistanceBased>(strategy) || mobility == MobilityKind::RandomWaypoint) {
        if (mobility != MobilityKind::RandomWaypoint &&
            std::any_of(nodes.begin(), nodes.end(), [](const NodeSpec& n) { return !n.pos; }))
            fail("distance-based suppression needs a position for every node");
    }

    if (timing.hello_interval < 1 || timing.hello_timeout < 1 || timing.route_lifetime < 1)
        fail("timing intervals must be >= 1");
    if (timing.max_retries < 1)
        fail("max_retries must be >= 1");
    if (timing.discovery_deadline < 0 || t_max < 0)
        fail("discovery_deadline and t_max must be >= 0");
}

} // namespace manet
