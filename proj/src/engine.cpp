#include "manet/engine.hpp"

#include <cmath>
#include <ostream>
#include <sstream>

namespace manet {

// ---------------------------------------------------------------------------
// Topology

Topology::Topology(std::uint32_t node_count)
  : adjacency_(node_count),
    positions_(node_count)
{
}

void
Topology::check(NodeId n) const
{
    if (n.value >= adjacency_.size())
        throw ValidationError("unknown node #" + std::to_string(n.value));
}

bool
Topology::add_link(NodeId a, NodeId b, Tick delay)
{
    check(a);
    check(b);
    if (a == b)
        throw ValidationError("self-link on node #" + std::to_string(a.value));
    auto [it, inserted] = links_.try_emplace(std::minmax(a, b), delay);
    if (!inserted)
        return false;
    adjacency_[a.value].insert(b);
    adjacency_[b.value].insert(a);
    return true;
}

bool
Topology::remove_link(NodeId a, NodeId b)
{
    if (links_.erase(std::minmax(a, b)) == 0)
        return false;
    adjacency_[a.value].erase(b);
    adjacency_[b.value].erase(a);
    return true;
}

bool
Topology::has_link(NodeId a, NodeId b) const
{
    return links_.contains(std::minmax(a, b));
}

std::optional<Tick>
Topology::delay(NodeId a, NodeId b) const
{
    auto it = links_.find(std::minmax(a, b));
    if (it == links_.end())
        return std::nullopt;
    return it->second;
}

std::vector<NodeId>
Topology::peers(NodeId n) const
{
    check(n);
    return {adjacency_[n.value].begin(), adjacency_[n.value].end()};
}

bool
Topology::drop_matches(Tick at, NodeId from, NodeId to, PacketType type) const
{
    for (const auto& d : drops_) {
        if (d.at == at && d.from == from && d.to == to && (!d.packet || *d.packet == type))
            return true;
    }
    return false;
}

void
Topology::set_position(NodeId n, Position p)
{
    check(n);
    positions_[n.value] = p;
}

std::optional<Position>
Topology::position(NodeId n) const
{
    check(n);
    return positions_[n.value];
}

std::optional<double>
Topology::distance(NodeId a, NodeId b) const
{
    auto pa = position(a);
    auto pb = position(b);
    if (!pa || !pb)
        return std::nullopt;
    return std::hypot(pa->x - pb->x, pa->y - pb->y);
}

TransmitOutcome
transmit(const Topology& topology, NodeId from, NodeId to, const Packet& packet, Tick now)
{
    auto d = topology.delay(from, to);
    if (!d)
        return {TransmitOutcome::Kind::LinkAbsent, 0};
    if (topology.drop_matches(now, from, to, packet_type(packet)))
        return {TransmitOutcome::Kind::Lost, 0};
    return {TransmitOutcome::Kind::Scheduled, now + *d};
}

LinkChange
apply_link_event(Topology& topology, const EventBody& body, Tick /*now*/)
{
    if (const auto* up = std::get_if<event::LinkUp>(&body))
        return topology.add_link(up->a, up->b, up->delay) ? LinkChange::Added : LinkChange::Unchanged;
    if (const auto* down = std::get_if<event::LinkDown>(&body))
        return topology.remove_link(down->a, down->b) ? LinkChange::Removed : LinkChange::Unchanged;
    throw ContractViolation("apply_link_event: not a link event");
}

// ---------------------------------------------------------------------------
// Engine

namespace {

int
event_class(const EventBody& body)
{
    if (std::holds_alternative<event::Deliver>(body))
        return 1;
    if (std::holds_alternative<event::TimerFire>(body) || std::holds_alternative<event::Inject>(body))
        return 2;
    return 0;
}

std::uint32_t
event_sender(const EventBody& body)
{
    if (const auto* d = std::get_if<event::Deliver>(&body))
        return d->from.value;
    return 0;
}

} // namespace

bool
Engine::Order::operator()(const Event& x, const Event& y) const
{
    // priority_queue pops the greatest element; "greater" here means later.
    auto key = [](const Event& e) {
        return std::tuple{e.at, event_class(e.body), event_sender(e.body), e.seq};
    };
    return key(x) > key(y);
}

Engine::Engine(Scenario scenario, std::ostream* trace)
  : scenario_(std::move(scenario)),
    trace_(trace),
    mobility_rng_(scenario_.seed, 0x6d6f62696c697479ULL)
{
    scenario_.validate();
    const std::uint32_t n = scenario_.node_count();
    topology_ = Topology(n);

    for (std::uint32_t i = 0; i < n; ++i) {
        if (scenario_.nodes[i].pos)
            topology_.set_position(NodeId{i}, *scenario_.nodes[i].pos);
    }

    if (scenario_.mobility == MobilityKind::RandomWaypoint) {
        const auto& rw = *scenario_.random_waypoint;
        walkers_.resize(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            if (!scenario_.nodes[i].pos)
                topology_.set_position(NodeId{i},
                                       {mobility_rng_.uniform(0, rw.width), mobility_rng_.uniform(0, rw.height)});
            walkers_[i].target = {mobility_rng_.uniform(0, rw.width), mobility_rng_.uniform(0, rw.height)};
            walkers_[i].speed = mobility_rng_.uniform(rw.speed_min, rw.speed_max);
        }
        for (std::uint32_t i = 0; i < n; ++i) {
            for (std::uint32_t j = i + 1; j < n; ++j) {
                if (*topology_.distance(NodeId{i}, NodeId{j}) <= rw.radio_range)
                    topology_.add_link(NodeId{i}, NodeId{j});
            }
        }
    } else {
        for (const auto& l : scenario_.links)
            topology_.add_link(l.a, l.b, l.delay);
    }
    for (const auto& d : scenario_.drops)
        topology_.add_drop(d);

    NodeConfig base;
    base.node_count = n;
    base.hello_interval = scenario_.timing.hello_interval;
    base.hello_timeout = scenario_.timing.hello_timeout;
    base.route_lifetime = scenario_.timing.route_lifetime;
    base.discovery_deadline = scenario_.discovery_deadline();
    base.max_retries = scenario_.timing.max_retries;
    base.flood_ttl = scenario_.timing.flood_ttl;
    base.intermediate_reply = scenario_.flags.intermediate_reply;
    base.reply_each_neighbor = scenario_.flags.reply_each_neighbor;
    base.hello_enabled = scenario_.flags.hello;
    base.per_neighbor_aggregate = scenario_.flags.per_neighbor_aggregate;
    base.strategy = scenario_.strategy;
    base.seed = scenario_.seed;

    nodes_.reserve(n);
    for (std::uint32_t i = 0; i < n; ++i) {
        auto node = std::make_unique<AodvNode>(NodeId{i}, base);
        const NodeId me{i};
        node->set_distance_fn([this, me](NodeId other) { return topology_.distance(me, other); });
        nodes_.push_back(std::move(node));
    }
    for (std::uint32_t i = 0; i < n; ++i)
        dispatch(NodeId{i}, nodes_[i]->start(topology_.peers(NodeId{i}), 0));

    for (const auto& e : scenario_.link_events) {
        if (e.up)
            push(e.at, event::LinkUp{e.a, e.b, e.delay});
        else
            push(e.at, event::LinkDown{e.a, e.b});
    }
    for (const auto& t : scenario_.traffic) {
        for (std::uint32_t k = 0; k < t.rounds; ++k)
            push(t.start + static_cast<Tick>(k) * t.interval, event::Inject{t.origin, t.dest, next_payload_++, k + 1});
    }
    if (scenario_.mobility == MobilityKind::RandomWaypoint)
        push(scenario_.random_waypoint->step, event::MobilityStep{});
}

void
Engine::push(Tick at, EventBody body)
{
    queue_.push(Event{at, next_seq_++, std::move(body)});
}

void
Engine::schedule_data(NodeId origin, NodeId dest, Tick at, std::uint32_t round)
{
    push(at, event::Inject{origin, dest, next_payload_++, round});
}

void
Engine::schedule_link_up(NodeId a, NodeId b, Tick at, Tick delay)
{
    push(at, event::LinkUp{a, b, delay});
}

void
Engine::schedule_link_down(NodeId a, NodeId b, Tick at)
{
    push(at, event::LinkDown{a, b});
}

std::uint32_t
Engine::flow_round(NodeId origin, NodeId dest) const
{
    auto it = flow_rounds_.find({origin, dest});
    return it == flow_rounds_.end() ? 0 : it->second;
}

void
Engine::trace(Tick at, const std::string& node, const char* kind, const std::string& detail)
{
    if (trace_ != nullptr)
        *trace_ << at << '\t' << node << '\t' << kind << '\t' << detail << '\n';
}

void
Engine::run_until(Tick t)
{
    while (!queue_.empty() && queue_.top().at <= t) {
        Event ev = queue_.top();
        queue_.pop();
        now_ = ev.at;
        handle(ev);
    }
    now_ = std::max(now_, t);
}

bool
Engine::periodic(const Event& ev) const
{
    if (std::holds_alternative<event::MobilityStep>(ev.body))
        return true;
    if (const auto* t = std::get_if<event::TimerFire>(&ev.body))
        return t->timer.kind == TimerKind::Hello;
    if (const auto* d = std::get_if<event::Deliver>(&ev.body))
        return std::holds_alternative<Hello>(d->packet);
    return false;
}

MetricsReport
Engine::run()
{
    run_until(scenario_.horizon());
    while (!queue_.empty()) {
        if (!periodic(queue_.top()))
            metrics_.timed_out = true;
        queue_.pop();
    }
    return metrics_;
}

void
Engine::handle(const Event& ev)
{
    std::visit(
      [&](const auto& body) {
          using T = std::decay_t<decltype(body)>;
          if constexpr (std::is_same_v<T, event::Deliver>) {
              const std::string detail = "from=" + scenario_.node_name(body.from) + " " + describe(body.packet);
              if (!topology_.has_link(body.from, body.to)) {
                  record(metrics_, metric::Loss{packet_type(body.packet)});
                  trace(ev.at, scenario_.node_name(body.to), "rx-cancelled", detail);
                  return;
              }
              trace(ev.at, scenario_.node_name(body.to), "rx", detail);
              dispatch(body.to, node(body.to).receive(body.packet, body.from, now_));
          } else if constexpr (std::is_same_v<T, event::TimerFire>) {
              std::ostringstream os;
              os << to_string(body.timer.kind);
              if (body.timer.kind != TimerKind::Hello)
                  os << " dest=" << scenario_.node_name(body.timer.dest) << " id=" << body.timer.rreq.origin.value << '#'
                     << body.timer.rreq.id;
              trace(ev.at, scenario_.node_name(body.node), "timer", os.str());
              dispatch(body.node, node(body.node).on_timer(body.timer, now_));
          } else if constexpr (std::is_same_v<T, event::LinkUp> || std::is_same_v<T, event::LinkDown>) {
              const auto change = apply_link_event(topology_, body, now_);
              const bool up = std::is_same_v<T, event::LinkUp>;
              const std::string pair = scenario_.node_name(body.a) + "-" + scenario_.node_name(body.b);
              trace(ev.at, pair, up ? "link-up" : "link-down", change == LinkChange::Unchanged ? "no-op" : "applied");
              link_changed(body.a, body.b, change);
          } else if constexpr (std::is_same_v<T, event::Inject>) {
              trace(ev.at,
                    scenario_.node_name(body.node),
                    "inject",
                    "dest=" + scenario_.node_name(body.dest) + " payload=" + std::to_string(body.payload_id) +
                      " round=" + std::to_string(body.round));
              flow_rounds_[{body.node, body.dest}] = body.round;
              dispatch(body.node, node(body.node).send_data(body.dest, body.payload_id, now_));
          } else {
              move_nodes();
          }
      },
      ev.body);
}

void
Engine::link_changed(NodeId a, NodeId b, LinkChange change)
{
    if (scenario_.flags.hello || change == LinkChange::Unchanged)
        return;
    if (change == LinkChange::Added) {
        dispatch(a, node(a).on_link_up(b, now_));
        dispatch(b, node(b).on_link_up(a, now_));
    } else {
        dispatch(a, node(a).on_link_break(b, now_));
        dispatch(b, node(b).on_link_break(a, now_));
    }
}

void
Engine::move_nodes()
{
    const auto& rw = *scenario_.random_waypoint;
    const double step = static_cast<double>(rw.step);
    const std::uint32_t n = scenario_.node_count();
    for (std::uint32_t i = 0; i < n; ++i) {
        auto& w = walkers_[i];
        if (now_ < w.pause_until)
            continue;
        const NodeId id{i};
        Position p = *topology_.position(id);
        const double dx = w.target.x - p.x;
        const double dy = w.target.y - p.y;
        const double dist = std::hypot(dx, dy);
        const double travel = w.speed * step;
        if (dist <= travel) {
            p = w.target;
            w.pause_until = now_ + rw.pause;
            w.target = {mobility_rng_.uniform(0, rw.width), mobility_rng_.uniform(0, rw.height)};
            w.speed = mobility_rng_.uniform(rw.speed_min, rw.speed_max);
        } else {
            p.x += dx / dist * travel;
            p.y += dy / dist * travel;
        }
        topology_.set_position(id, p);
    }

    std::uint32_t changes = 0;
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const NodeId a{i};
            const NodeId b{j};
            const bool in_range = *topology_.distance(a, b) <= rw.radio_range;
            if (in_range && !topology_.has_link(a, b)) {
                topology_.add_link(a, b);
                link_changed(a, b, LinkChange::Added);
                ++changes;
            } else if (!in_range && topology_.has_link(a, b)) {
                topology_.remove_link(a, b);
                link_changed(a, b, LinkChange::Removed);
                ++changes;
            }
        }
    }
    trace(now_, "-", "mobility", "link-changes=" + std::to_string(changes));
    push(now_ + rw.step, event::MobilityStep{});
}

void
Engine::send(NodeId from, NodeId to, const Packet& packet)
{
    const auto type = packet_type(packet);
    std::uint32_t round = 0;
    if (const auto* rreq = std::get_if<Rreq>(&packet)) {
        if (auto it = rreq_rounds_.find(rreq->rreq_id); it != rreq_rounds_.end())
            round = it->second;
    }

    const auto outcome = transmit(topology_, from, to, packet, now_);
    switch (outcome.kind) {
        case TransmitOutcome::Kind::Scheduled:
            record(metrics_, metric::Transmission{type, from, to, round});
            push(outcome.deliver_at, event::Deliver{to, from, packet});
            break;
        case TransmitOutcome::Kind::Lost:
            record(metrics_, metric::Transmission{type, from, to, round});
            record(metrics_, metric::Loss{type});
            trace(now_, scenario_.node_name(from), "lost", "to=" + scenario_.node_name(to) + " " + describe(packet));
            break;
        case TransmitOutcome::Kind::LinkAbsent:
            record(metrics_, metric::LinkAbsent{type});
            refused_.emplace_back(from, to);
            trace(now_, scenario_.node_name(from), "link-absent", "to=" + scenario_.node_name(to) + " " + describe(packet));
            // Link-layer feedback: the sender learns right away that the peer is gone.
            dispatch(from, node(from).on_link_break(to, now_));
            break;
    }
}

void
Engine::dispatch(NodeId who, Emissions emissions)
{
    for (auto& e : emissions) {
        std::visit(
          [&](auto& em) {
              using T = std::decay_t<decltype(em)>;
              if constexpr (std::is_same_v<T, Send>) {
                  send(who, em.to, em.packet);
              } else if constexpr (std::is_same_v<T, Broadcast>) {
                  for (NodeId peer : topology_.peers(who))
                      send(who, peer, em.packet);
              } else if constexpr (std::is_same_v<T, SetTimer>) {
                  push(em.at, event::TimerFire{who, em.timer});
              } else if constexpr (std::is_same_v<T, DeliverUp>) {
                  record(metrics_, metric::DataDelivered{});
              } else if constexpr (std::is_same_v<T, Drop>) {
                  if (std::holds_alternative<Data>(em.packet))
                      record(metrics_, metric::DataDropped{});
                  trace(now_, scenario_.node_name(who), "drop", std::string(to_string(em.reason)) + " " + describe(em.packet));
              } else {
                  std::visit(
                    [&](const auto& n) {
                        using N = std::decay_t<decltype(n)>;
                        if constexpr (std::is_same_v<N, notice::RedundantRreq>) {
                            record(metrics_, metric::RedundantRx{who});
                        } else if constexpr (std::is_same_v<N, notice::Suppressed>) {
                            record(metrics_, metric::SuppressedForwards{n.count});
                        } else if constexpr (std::is_same_v<N, notice::DiscoveryStarted>) {
                            record(metrics_, metric::DiscoveryOpened{who, n.dest, flow_round(who, n.dest), now_});
                        } else if constexpr (std::is_same_v<N, notice::DiscoveryAttempt>) {
                            rreq_rounds_[n.rreq] = flow_round(who, n.dest);
                            record(metrics_, metric::DiscoveryAttempt{who, n.dest, n.ttl});
                        } else if constexpr (std::is_same_v<N, notice::DiscoveryResolved>) {
                            record(metrics_, metric::DiscoveryClosed{who, n.dest, now_, true, n.hop_count});
                        } else if constexpr (std::is_same_v<N, notice::DiscoveryFailed>) {
                            record(metrics_, metric::DiscoveryClosed{who, n.dest, now_, false, 0});
                        } else if constexpr (std::is_same_v<N, notice::LateReply>) {
                            record(metrics_, metric::LateReply{});
                        } else {
                            record(metrics_, metric::LinkBoost{});
                        }
                    },
                    em);
              }
          },
          e);
    }
}

MetricsReport
run(const Scenario& scenario, std::ostream* trace)
{
    Engine engine(scenario, trace);
    return engine.run();
}

} // namespace manet
