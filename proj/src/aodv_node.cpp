#include "manet/aodv_node.hpp"

#include <algorithm>

namespace manet {

Tick
NodeConfig::effective_deadline() const
{
    return discovery_deadline > 0 ? discovery_deadline : 2 * static_cast<Tick>(node_count);
}

Tick
NodeConfig::attempt_timeout() const
{
    if (const auto* c = std::get_if<Connectivity>(&strategy); c && c->config.attempt_timeout > 0)
        return c->config.attempt_timeout;
    return effective_deadline();
}

const char*
to_string(TimerKind k)
{
    switch (k) {
        case TimerKind::Hello:
            return "hello";
        case TimerKind::DiscoveryDeadline:
            return "discovery-deadline";
        case TimerKind::AttemptTimeout:
            return "attempt-timeout";
        case TimerKind::RelayDecision:
            return "relay-decision";
    }
    return "?";
}

const char*
to_string(DropReason r)
{
    switch (r) {
        case DropReason::TtlExpired:
            return "ttl-expired";
        case DropReason::NoReversePath:
            return "no-reverse-path";
        case DropReason::NoRoute:
            return "no-route";
        case DropReason::DiscoveryFailed:
            return "discovery-failed";
    }
    return "?";
}

AodvNode::AodvNode(NodeId me, NodeConfig config)
  : config_(std::move(config)),
    rng_(config_.seed, 0x9e3779b97f4a7c15ULL ^ me.value)
{
    validate(config_.strategy);
    state_.me = me;
    ConnectivityConfig cc;
    if (const auto* c = std::get_if<Connectivity>(&config_.strategy))
        cc = c->config;
    state_.connectivity = ConnectivityTable(cc, config_.per_neighbor_aggregate);
}

Emissions
AodvNode::start(const std::vector<NodeId>& initial_neighbors, Tick now)
{
    for (NodeId n : initial_neighbors)
        state_.neighbors[n] = now;
    Emissions out;
    if (config_.hello_enabled)
        out.emplace_back(SetTimer{Timer{TimerKind::Hello, {}, {}}, now + config_.hello_interval});
    return out;
}

std::vector<NodeId>
AodvNode::neighbor_list(std::optional<NodeId> excluding) const
{
    std::vector<NodeId> out;
    out.reserve(state_.neighbors.size());
    for (const auto& [n, last] : state_.neighbors) {
        if (!excluding || n != *excluding)
            out.push_back(n);
    }
    return out;
}

const RoutingEntry*
AodvNode::route_to(NodeId dest, Tick now) const
{
    auto it = state_.routes.find(dest);
    if (it == state_.routes.end() || !it->second.valid_at(now))
        return nullptr;
    return &it->second;
}

Emissions
AodvNode::receive(const Packet& packet, NodeId from, Tick now)
{
    return std::visit(
      [&](const auto& p) -> Emissions {
          using T = std::decay_t<decltype(p)>;
          if constexpr (std::is_same_v<T, Rreq>)
              return on_rreq(p, from, now);
          else if constexpr (std::is_same_v<T, Rrep>)
              return on_rrep(p, from, now);
          else if constexpr (std::is_same_v<T, Rerr>)
              return on_rerr(p, from, now);
          else if constexpr (std::is_same_v<T, Hello>)
              return on_hello(p, from, now);
          else
              return on_data(p, from, now);
      },
      packet);
}

Emissions
AodvNode::on_timer(const Timer& timer, Tick now)
{
    switch (timer.kind) {
        case TimerKind::Hello:
            return on_hello_tick(now);
        case TimerKind::DiscoveryDeadline:
            return on_discovery_timeout(timer.dest, timer.rreq, now);
        case TimerKind::AttemptTimeout:
            return on_attempt_timeout(timer.rreq, now);
        case TimerKind::RelayDecision:
            return on_relay_decision(timer.rreq, now);
    }
    return {};
}

// ---------------------------------------------------------------------------
// Data path

Emissions
AodvNode::send_data(NodeId dest, std::uint32_t payload_id, Tick now)
{
    Emissions out;
    if (dest == state_.me) {
        out.emplace_back(DeliverUp{state_.me, payload_id});
        return out;
    }
    if (const auto* route = route_to(dest, now)) {
        state_.routes[dest].active = true;
        out.emplace_back(Send{route->next_hop, Data{state_.me, dest, payload_id}});
        return out;
    }
    state_.outbox_queue[dest].push_back(payload_id);
    if (!state_.pending_discoveries.contains(dest)) {
        auto more = initiate_discovery(dest, now);
        out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
    return out;
}

Emissions
AodvNode::on_data(const Data& data, NodeId /*from*/, Tick now)
{
    Emissions out;
    if (data.dst == state_.me) {
        out.emplace_back(DeliverUp{data.src, data.payload_id});
    } else if (const auto* route = route_to(data.dst, now)) {
        out.emplace_back(Send{route->next_hop, data});
    } else {
        out.emplace_back(Drop{data, DropReason::NoRoute});
    }
    return out;
}

void
AodvNode::flush_outbox(NodeId dest, Tick now, Emissions& out)
{
    auto q = state_.outbox_queue.find(dest);
    if (q == state_.outbox_queue.end())
        return;
    const auto* route = route_to(dest, now);
    if (route == nullptr)
        return;
    state_.routes[dest].active = true;
    for (std::uint32_t payload : q->second)
        out.emplace_back(Send{route->next_hop, Data{state_.me, dest, payload}});
    state_.outbox_queue.erase(q);
}

// ---------------------------------------------------------------------------
// Route discovery

Emissions
AodvNode::initiate_discovery(NodeId dest, Tick now)
{
    if (dest == state_.me)
        throw InvalidDestination("a node cannot discover a route to itself");
    if (state_.pending_discoveries.contains(dest))
        return {};
    Emissions out;
    out.emplace_back(Notice{notice::DiscoveryStarted{dest}});
    auto more = launch_attempt(dest, 1, now);
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    return out;
}

Emissions
AodvNode::launch_attempt(NodeId dest, std::uint32_t attempt, Tick now)
{
    Emissions out;
    state_.seq.value += 1;
    const RreqId id{state_.me, state_.next_rreq_id++};
    state_.seen_rreqs.insert(id);

    std::uint32_t ttl = config_.effective_flood_ttl();
    if (const auto* ring = std::get_if<ExpandingRing>(&config_.strategy))
        ttl = expanding_ring_next_ttl(*ring, attempt - 1, config_.node_count);

    Rreq rreq;
    rreq.rreq_id = id;
    rreq.origin = state_.me;
    rreq.origin_seq = state_.seq;
    rreq.dest = dest;
    if (auto it = state_.routes.find(dest); it != state_.routes.end())
        rreq.dest_seq_known = it->second.dest_seq;
    rreq.hop_count = 0;
    rreq.ttl = ttl;

    out.emplace_back(Notice{notice::DiscoveryAttempt{dest, id, attempt, ttl}});

    const auto candidates = neighbor_list();
    SelectionContext ctx;
    ctx.me = state_.me;
    ctx.connectivity = &state_.connectivity;
    auto selection = select_targets(config_.strategy, ctx, rreq, candidates, rng_);
    if (selection.suppressed > 0)
        out.emplace_back(Notice{notice::Suppressed{id, selection.suppressed}});
    if (ttl > 0)
        send_rreq(rreq, selection.targets, now, out);

    const Tick deadline = now + config_.effective_deadline();
    state_.pending_discoveries[dest] = Discovery{id, attempt, deadline};
    out.emplace_back(SetTimer{Timer{TimerKind::DiscoveryDeadline, dest, id}, deadline});
    return out;
}

void
AodvNode::send_rreq(const Rreq& rreq, const std::vector<NodeId>& targets, Tick now, Emissions& out)
{
    if (targets.empty())
        return;
    const Rreq wire = relay_transform(rreq);
    const bool track = tracks_connectivity();
    for (NodeId to : targets) {
        if (track) {
            open_attempt(state_.connectivity.at(rreq.dest, to), rreq.rreq_id, now);
            state_.open_attempts[rreq.rreq_id].emplace_back(rreq.dest, to);
        }
        out.emplace_back(Send{to, wire});
    }
    if (track)
        out.emplace_back(SetTimer{Timer{TimerKind::AttemptTimeout, rreq.dest, rreq.rreq_id}, now + config_.attempt_timeout()});
}

Emissions
AodvNode::on_rreq(const Rreq& rreq, NodeId from, Tick now)
{
    Emissions out;
    if (is_duplicate(state_.seen_rreqs, rreq)) {
        out.emplace_back(Notice{notice::RedundantRreq{rreq.rreq_id, from}});
        if (auto pr = state_.pending_relays.find(rreq.rreq_id); pr != state_.pending_relays.end())
            ++pr->second.copies;
        if (config_.reply_each_neighbor && rreq.dest == state_.me && !state_.answered[rreq.rreq_id].contains(from))
            answer_rreq(rreq, from, now, out);
        return out;
    }

    state_.seen_rreqs.insert(rreq.rreq_id);
    state_.reverse_paths[rreq.rreq_id] = ReversePathEntry{rreq.rreq_id, from, now};

    if (rreq.dest == state_.me) {
        state_.seq.value += 1;
        answer_rreq(rreq, from, now, out);
        return out;
    }

    if (config_.intermediate_reply) {
        const auto* route = route_to(rreq.dest, now);
        if (route != nullptr && (!rreq.dest_seq_known || route->dest_seq >= *rreq.dest_seq_known)) {
            Rrep rrep{rreq.origin, rreq.dest, route->dest_seq, route->hop_count, rreq.rreq_id};
            out.emplace_back(Send{from, relay_transform(rrep)});
            return out;
        }
    }

    if (rreq.ttl == 0) {
        out.emplace_back(Drop{rreq, DropReason::TtlExpired});
        return out;
    }

    if (std::holds_alternative<CounterBased>(config_.strategy)) {
        state_.pending_relays[rreq.rreq_id] = PendingRelay{rreq, from, 1};
        out.emplace_back(SetTimer{Timer{TimerKind::RelayDecision, rreq.dest, rreq.rreq_id}, now + 1});
        return out;
    }

    relay_rreq(rreq, from, 1, now, out);
    return out;
}

void
AodvNode::answer_rreq(const Rreq& rreq, NodeId from, Tick /*now*/, Emissions& out)
{
    state_.answered[rreq.rreq_id].insert(from);
    Rrep rrep{rreq.origin, state_.me, state_.seq, 0, rreq.rreq_id};
    out.emplace_back(Send{from, relay_transform(rrep)});
}

void
AodvNode::relay_rreq(const Rreq& rreq, NodeId from, std::uint64_t copies, Tick now, Emissions& out)
{
    const auto candidates = neighbor_list(from);
    SelectionContext ctx;
    ctx.me = state_.me;
    ctx.previous_hop = from;
    ctx.copies_heard = copies;
    if (distance_)
        ctx.distance_from_previous = distance_(from);
    ctx.connectivity = &state_.connectivity;

    auto selection = select_targets(config_.strategy, ctx, rreq, candidates, rng_);
    if (selection.suppressed > 0)
        out.emplace_back(Notice{notice::Suppressed{rreq.rreq_id, selection.suppressed}});
    send_rreq(rreq, selection.targets, now, out);
}

Emissions
AodvNode::on_relay_decision(RreqId rreq, Tick now)
{
    Emissions out;
    auto it = state_.pending_relays.find(rreq);
    if (it == state_.pending_relays.end())
        return out;
    PendingRelay pending = std::move(it->second);
    state_.pending_relays.erase(it);
    relay_rreq(pending.rreq, pending.from, pending.copies, now, out);
    return out;
}

bool
AodvNode::install_route(const Rrep& rrep, NodeId from, Tick now)
{
    auto it = state_.routes.find(rrep.dest);
    RoutingEntry fresh{rrep.dest, from, rrep.hop_count, rrep.dest_seq, now + config_.route_lifetime, false};
    if (it == state_.routes.end()) {
        state_.routes.emplace(rrep.dest, fresh);
        return true;
    }
    RoutingEntry& cur = it->second;
    const bool better = !cur.valid_at(now) || rrep.dest_seq > cur.dest_seq ||
                        (rrep.dest_seq == cur.dest_seq && rrep.hop_count < cur.hop_count);
    if (better) {
        cur = fresh;
        return true;
    }
    if (rrep.dest_seq == cur.dest_seq && rrep.hop_count == cur.hop_count && from == cur.next_hop)
        cur.expiry = fresh.expiry;
    return false;
}

Emissions
AodvNode::on_rrep(const Rrep& rrep, NodeId from, Tick now)
{
    Emissions out;

    if (tracks_connectivity()) {
        auto* record = &state_.connectivity.at(rrep.dest, from);
        if (resolve_attempt(*record, rrep.rreq_id, true, state_.connectivity.config())) {
            if (auto oa = state_.open_attempts.find(rrep.rreq_id); oa != state_.open_attempts.end()) {
                auto& links = oa->second;
                std::erase(links, std::pair{rrep.dest, from});
                if (links.empty())
                    state_.open_attempts.erase(oa);
            }
            if (state_.fresh_links.erase(from) > 0) {
                boost_new_link(*record, state_.connectivity.config());
                out.emplace_back(Notice{notice::LinkBoost{rrep.dest, from}});
            }
        } else {
            out.emplace_back(Notice{notice::LateReply{rrep.rreq_id, from}});
        }
    }

    install_route(rrep, from, now);

    if (rrep.origin == state_.me) {
        auto pd = state_.pending_discoveries.find(rrep.dest);
        if (pd != state_.pending_discoveries.end()) {
            state_.pending_discoveries.erase(pd);
            out.emplace_back(Notice{notice::DiscoveryResolved{rrep.dest, rrep.hop_count}});
            flush_outbox(rrep.dest, now, out);
        }
        return out;
    }

    auto rp = state_.reverse_paths.find(rrep.rreq_id);
    if (rp == state_.reverse_paths.end()) {
        out.emplace_back(Drop{rrep, DropReason::NoReversePath});
        return out;
    }
    out.emplace_back(Send{rp->second.previous_hop, relay_transform(rrep)});
    return out;
}

void
AodvNode::settle_attempts(RreqId rreq)
{
    auto it = state_.open_attempts.find(rreq);
    if (it == state_.open_attempts.end())
        return;
    for (const auto& [dest, neighbor] : it->second)
        resolve_attempt(state_.connectivity.at(dest, neighbor), rreq, false, state_.connectivity.config());
    state_.open_attempts.erase(it);
}

Emissions
AodvNode::on_attempt_timeout(RreqId rreq, Tick /*now*/)
{
    settle_attempts(rreq);
    return {};
}

Emissions
AodvNode::on_discovery_timeout(NodeId dest, RreqId rreq, Tick now)
{
    Emissions out;
    auto it = state_.pending_discoveries.find(dest);
    if (it == state_.pending_discoveries.end() || it->second.rreq != rreq)
        return out; // stale timer
    const std::uint32_t attempt = it->second.attempt;
    state_.pending_discoveries.erase(it);
    settle_attempts(rreq);

    if (attempt < config_.max_retries) {
        auto more = launch_attempt(dest, attempt + 1, now);
        out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
        return out;
    }

    out.emplace_back(Notice{notice::DiscoveryFailed{dest}});
    if (auto q = state_.outbox_queue.find(dest); q != state_.outbox_queue.end()) {
        for (std::uint32_t payload : q->second)
            out.emplace_back(Drop{Data{state_.me, dest, payload}, DropReason::DiscoveryFailed});
        state_.outbox_queue.erase(q);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Maintenance

Emissions
AodvNode::on_hello(const Hello& hello, NodeId from, Tick now)
{
    (void)hello;
    if (!state_.neighbors.contains(from))
        state_.fresh_links.insert(from);
    state_.neighbors[from] = now;
    return {};
}

Emissions
AodvNode::on_link_up(NodeId neighbor, Tick now)
{
    if (!state_.neighbors.contains(neighbor))
        state_.fresh_links.insert(neighbor);
    state_.neighbors[neighbor] = now;
    return {};
}

Emissions
AodvNode::on_hello_tick(Tick now)
{
    Emissions out;
    if (config_.hello_enabled)
        out.emplace_back(Broadcast{Hello{state_.me, state_.seq}});

    std::vector<NodeId> lost;
    for (const auto& [n, last] : state_.neighbors) {
        if (last < now - config_.hello_timeout)
            lost.push_back(n);
    }
    for (NodeId n : lost) {
        auto more = on_link_break(n, now);
        out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }

    auto more = on_route_timer(now);
    out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));

    if (config_.hello_enabled)
        out.emplace_back(SetTimer{Timer{TimerKind::Hello, {}, {}}, now + config_.hello_interval});
    return out;
}

Emissions
AodvNode::on_route_timer(Tick now)
{
    Emissions out;
    std::vector<NodeId> waiting;
    for (auto it = state_.routes.begin(); it != state_.routes.end();) {
        if (it->second.expiry <= now) {
            const NodeId dest = it->first;
            auto q = state_.outbox_queue.find(dest);
            if (q != state_.outbox_queue.end() && !q->second.empty())
                waiting.push_back(dest);
            it = state_.routes.erase(it);
        } else {
            ++it;
        }
    }
    rediscover(waiting, now, out);

    // Reverse paths only matter while a reply can still come back.
    const Tick horizon = 2 * config_.effective_deadline() * std::max<std::uint32_t>(config_.max_retries, 1);
    std::erase_if(state_.reverse_paths, [&](const auto& kv) { return kv.second.created_at + horizon <= now; });
    return out;
}

void
AodvNode::rediscover(const std::vector<NodeId>& dests, Tick now, Emissions& out)
{
    for (NodeId d : dests) {
        if (state_.pending_discoveries.contains(d) || d == state_.me)
            continue;
        auto more = initiate_discovery(d, now);
        out.insert(out.end(), std::make_move_iterator(more.begin()), std::make_move_iterator(more.end()));
    }
}

void
AodvNode::invalidate_via(NodeId neighbor, Tick now, Emissions& out)
{
    std::vector<std::pair<NodeId, SeqNum>> unreachable;
    std::vector<NodeId> active;
    for (auto it = state_.routes.begin(); it != state_.routes.end();) {
        if (it->second.next_hop == neighbor) {
            unreachable.emplace_back(it->first, SeqNum{it->second.dest_seq.value + 1});
            if (it->second.active)
                active.push_back(it->first);
            it = state_.routes.erase(it);
        } else {
            ++it;
        }
    }
    if (unreachable.empty())
        return;
    for (NodeId n : neighbor_list(neighbor))
        out.emplace_back(Send{n, Rerr{unreachable}});
    rediscover(active, now, out);
}

Emissions
AodvNode::on_link_break(NodeId lost_neighbor, Tick now)
{
    Emissions out;
    state_.neighbors.erase(lost_neighbor);
    state_.fresh_links.erase(lost_neighbor);
    invalidate_via(lost_neighbor, now, out);
    return out;
}

Emissions
AodvNode::on_rerr(const Rerr& rerr, NodeId from, Tick now)
{
    Emissions out;
    std::vector<std::pair<NodeId, SeqNum>> lost;
    std::vector<NodeId> active;
    for (const auto& [dest, seq] : rerr.unreachable) {
        auto it = state_.routes.find(dest);
        if (it == state_.routes.end() || it->second.next_hop != from)
            continue;
        lost.emplace_back(dest, seq);
        if (it->second.active)
            active.push_back(dest);
        state_.routes.erase(it);
    }
    if (lost.empty())
        return out;
    for (NodeId n : neighbor_list(from))
        out.emplace_back(Send{n, Rerr{lost}});
    rediscover(active, now, out);
    return out;
}

} // namespace manet
