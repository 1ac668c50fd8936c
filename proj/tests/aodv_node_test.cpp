#include <gtest/gtest.h>

#include "manet/aodv_node.hpp"

using namespace manet;

namespace {

template<typename T>
std::vector<T>
all_of(const Emissions& out)
{
    std::vector<T> v;
    for (const auto& e : out) {
        if (const auto* x = std::get_if<T>(&e))
            v.push_back(*x);
    }
    return v;
}

template<typename N>
std::vector<N>
notices(const Emissions& out)
{
    std::vector<N> v;
    for (const auto& n : all_of<Notice>(out)) {
        if (const auto* x = std::get_if<N>(&n))
            v.push_back(*x);
    }
    return v;
}

NodeId
n(std::uint32_t v)
{
    return NodeId{v};
}

NodeConfig
config(std::uint32_t nodes = 6)
{
    NodeConfig c;
    c.node_count = nodes;
    return c;
}

AodvNode
started(std::uint32_t me, std::vector<NodeId> neighbors, NodeConfig c = config())
{
    AodvNode node(n(me), c);
    node.start(neighbors, 0);
    return node;
}

Rreq
incoming(std::uint32_t origin, std::uint32_t dest, std::uint32_t ttl, std::uint32_t id = 1)
{
    Rreq r;
    r.rreq_id = RreqId{n(origin), id};
    r.origin = n(origin);
    r.origin_seq = SeqNum{1};
    r.dest = n(dest);
    r.hop_count = 1;
    r.ttl = ttl;
    return r;
}

} // namespace

TEST(Start, SeedsNeighborsAndArmsHello)
{
    AodvNode node(n(0), config());
    const auto out = node.start({n(1), n(2)}, 0);
    EXPECT_EQ(node.state().neighbors.size(), 2u);
    EXPECT_TRUE(node.state().fresh_links.empty());
    const auto timers = all_of<SetTimer>(out);
    ASSERT_EQ(timers.size(), 1u);
    EXPECT_EQ(timers[0].timer.kind, TimerKind::Hello);
}

TEST(Discovery, SelfIsInvalid)
{
    auto node = started(0, {n(1)});
    EXPECT_THROW(node.initiate_discovery(n(0), 5), InvalidDestination);
}

TEST(Discovery, DataWithoutRouteFloodsRreq)
{
    auto node = started(0, {n(1), n(2)});
    const auto out = node.send_data(n(5), 7, 10);
    EXPECT_EQ(notices<notice::DiscoveryStarted>(out).size(), 1u);
    const auto sends = all_of<Send>(out);
    ASSERT_EQ(sends.size(), 2u);
    const auto& rreq = std::get<Rreq>(sends[0].packet);
    EXPECT_EQ(rreq.hop_count, 1u);
    EXPECT_EQ(rreq.ttl, 5u) << "ttl starts at node_count and the origin's send consumes one";
    EXPECT_EQ(node.state().outbox_queue.at(n(5)).size(), 1u);

    bool deadline = false;
    for (const auto& t : all_of<SetTimer>(out))
        deadline = deadline || t.timer.kind == TimerKind::DiscoveryDeadline;
    EXPECT_TRUE(deadline);

    // A second packet joins the queue without a second discovery.
    const auto again = node.send_data(n(5), 8, 11);
    EXPECT_TRUE(all_of<Send>(again).empty());
    EXPECT_EQ(node.state().outbox_queue.at(n(5)).size(), 2u);
}

TEST(Rreq, DestinationReplies)
{
    auto node = started(5, {n(3), n(4)});
    const auto out = node.on_rreq(incoming(0, 5, 3), n(3), 20);
    const auto sends = all_of<Send>(out);
    ASSERT_EQ(sends.size(), 1u);
    EXPECT_EQ(sends[0].to, n(3));
    const auto& rrep = std::get<Rrep>(sends[0].packet);
    EXPECT_EQ(rrep.hop_count, 1u);
    EXPECT_EQ(rrep.origin, n(0));

    // First copy overall only, by default.
    const auto dup = node.on_rreq(incoming(0, 5, 3), n(4), 20);
    EXPECT_TRUE(all_of<Send>(dup).empty());
    EXPECT_EQ(notices<notice::RedundantRreq>(dup).size(), 1u);
}

TEST(Rreq, DestinationCanAnswerEachNeighbor)
{
    auto c = config();
    c.reply_each_neighbor = true;
    auto node = started(5, {n(3), n(4)}, c);
    node.on_rreq(incoming(0, 5, 3), n(3), 20);
    const auto second = node.on_rreq(incoming(0, 5, 3), n(4), 20);
    ASSERT_EQ(all_of<Send>(second).size(), 1u);
    EXPECT_EQ(all_of<Send>(second)[0].to, n(4));
    const auto third = node.on_rreq(incoming(0, 5, 3), n(4), 21);
    EXPECT_TRUE(all_of<Send>(third).empty());
}

TEST(Rreq, RelayExcludesPreviousHop)
{
    auto node = started(2, {n(1), n(3), n(4)});
    const auto out = node.on_rreq(incoming(0, 5, 3), n(1), 20);
    const auto sends = all_of<Send>(out);
    ASSERT_EQ(sends.size(), 2u);
    EXPECT_EQ(sends[0].to, n(3));
    EXPECT_EQ(sends[1].to, n(4));
    EXPECT_EQ(std::get<Rreq>(sends[0].packet).ttl, 2u);
    EXPECT_EQ(node.state().reverse_paths.at(RreqId{n(0), 1}).previous_hop, n(1));
}

TEST(Rreq, ZeroTtlIsDropped)
{
    auto node = started(2, {n(1), n(3)});
    const auto out = node.on_rreq(incoming(0, 5, 0), n(1), 20);
    EXPECT_TRUE(all_of<Send>(out).empty());
    const auto drops = all_of<Drop>(out);
    ASSERT_EQ(drops.size(), 1u);
    EXPECT_EQ(drops[0].reason, DropReason::TtlExpired);
}

TEST(Rreq, IntermediateReplyFromFreshRoute)
{
    for (bool enabled : {true, false}) {
        auto c = config();
        c.intermediate_reply = enabled;
        auto node = started(2, {n(1), n(3)}, c);
        node.on_rrep(Rrep{n(4), n(5), SeqNum{3}, 1, RreqId{n(4), 1}}, n(3), 10);
        const auto out = node.on_rreq(incoming(0, 5, 3), n(1), 20);
        const auto sends = all_of<Send>(out);
        ASSERT_EQ(sends.size(), 1u);
        if (enabled) {
            EXPECT_EQ(sends[0].to, n(1));
            EXPECT_EQ(std::get<Rrep>(sends[0].packet).hop_count, 2u);
        } else {
            EXPECT_EQ(sends[0].to, n(3));
            EXPECT_TRUE(std::holds_alternative<Rreq>(sends[0].packet));
        }
    }
}

TEST(Rrep, OriginResolvesAndFlushesData)
{
    auto node = started(0, {n(1), n(2)});
    const auto start = node.send_data(n(5), 7, 10);
    const auto rreq = std::get<Rreq>(all_of<Send>(start)[0].packet);
    const auto out = node.on_rrep(Rrep{n(0), n(5), SeqNum{1}, 3, rreq.rreq_id}, n(2), 18);
    ASSERT_EQ(notices<notice::DiscoveryResolved>(out).size(), 1u);
    EXPECT_EQ(notices<notice::DiscoveryResolved>(out)[0].hop_count, 3u);
    const auto sends = all_of<Send>(out);
    ASSERT_EQ(sends.size(), 1u);
    EXPECT_EQ(sends[0].to, n(2));
    EXPECT_EQ(std::get<Data>(sends[0].packet).payload_id, 7u);
    const auto* route = node.route_to(n(5), 18);
    ASSERT_NE(route, nullptr);
    EXPECT_TRUE(route->active);
    EXPECT_EQ(route->expiry, 18 + node.config().route_lifetime);
}

TEST(Rrep, RelayedAlongReversePath)
{
    auto node = started(2, {n(1), n(3)});
    node.on_rreq(incoming(0, 5, 3), n(1), 20);
    const auto out = node.on_rrep(Rrep{n(0), n(5), SeqNum{1}, 1, RreqId{n(0), 1}}, n(3), 22);
    const auto sends = all_of<Send>(out);
    ASSERT_EQ(sends.size(), 1u);
    EXPECT_EQ(sends[0].to, n(1));
    EXPECT_EQ(std::get<Rrep>(sends[0].packet).hop_count, 2u);

    const auto orphan = node.on_rrep(Rrep{n(0), n(5), SeqNum{1}, 1, RreqId{n(0), 99}}, n(3), 22);
    ASSERT_EQ(all_of<Drop>(orphan).size(), 1u);
    EXPECT_EQ(all_of<Drop>(orphan)[0].reason, DropReason::NoReversePath);
}

TEST(Discovery, RetriesThenFails)
{
    auto c = config();
    c.max_retries = 2;
    auto node = started(0, {n(1)}, c);
    node.send_data(n(5), 7, 10);
    const auto first = node.state().pending_discoveries.at(n(5));

    const auto retry = node.on_discovery_timeout(n(5), first.rreq, first.deadline);
    const auto attempts = notices<notice::DiscoveryAttempt>(retry);
    ASSERT_EQ(attempts.size(), 1u);
    EXPECT_EQ(attempts[0].attempt, 2u);
    const auto second = node.state().pending_discoveries.at(n(5));
    EXPECT_NE(second.rreq, first.rreq);

    // The first attempt's timer is stale now.
    EXPECT_TRUE(node.on_discovery_timeout(n(5), first.rreq, second.deadline).empty());

    const auto fail = node.on_discovery_timeout(n(5), second.rreq, second.deadline);
    EXPECT_EQ(notices<notice::DiscoveryFailed>(fail).size(), 1u);
    ASSERT_EQ(all_of<Drop>(fail).size(), 1u);
    EXPECT_EQ(all_of<Drop>(fail)[0].reason, DropReason::DiscoveryFailed);
    EXPECT_TRUE(node.state().pending_discoveries.empty());
    EXPECT_FALSE(node.state().outbox_queue.contains(n(5)));
}

TEST(Maintenance, HelloTimeoutBreaksLink)
{
    auto node = started(2, {n(1), n(3)});
    node.on_rrep(Rrep{n(4), n(5), SeqNum{3}, 1, RreqId{n(4), 1}}, n(3), 1);
    node.on_hello(Hello{n(1), SeqNum{}}, n(1), 20);
    const auto out = node.on_hello_tick(30);
    EXPECT_FALSE(node.state().neighbors.contains(n(3)));
    EXPECT_TRUE(node.state().neighbors.contains(n(1)));
    const auto sends = all_of<Send>(out);
    ASSERT_EQ(sends.size(), 1u);
    EXPECT_EQ(sends[0].to, n(1));
    const auto& rerr = std::get<Rerr>(sends[0].packet);
    ASSERT_EQ(rerr.unreachable.size(), 1u);
    EXPECT_EQ(rerr.unreachable[0].first, n(5));
    EXPECT_EQ(all_of<Broadcast>(out).size(), 1u);
}

TEST(Maintenance, ActiveRouteBreakRediscovers)
{
    auto node = started(0, {n(1), n(2)});
    const auto start = node.send_data(n(5), 7, 10);
    const auto rreq = std::get<Rreq>(all_of<Send>(start)[0].packet);
    node.on_rrep(Rrep{n(0), n(5), SeqNum{1}, 3, rreq.rreq_id}, n(2), 18);

    const auto out = node.on_link_break(n(2), 20);
    EXPECT_EQ(notices<notice::DiscoveryStarted>(out).size(), 1u);
    EXPECT_EQ(node.route_to(n(5), 20), nullptr);
}

TEST(Maintenance, RerrOnlyFromNextHop)
{
    auto node = started(2, {n(1), n(3)});
    node.on_rrep(Rrep{n(4), n(5), SeqNum{3}, 1, RreqId{n(4), 1}}, n(3), 1);
    EXPECT_TRUE(node.on_rerr(Rerr{{{n(5), SeqNum{4}}}}, n(1), 5).empty());
    EXPECT_NE(node.route_to(n(5), 5), nullptr);

    const auto out = node.on_rerr(Rerr{{{n(5), SeqNum{4}}}}, n(3), 5);
    EXPECT_EQ(node.route_to(n(5), 5), nullptr);
    const auto sends = all_of<Send>(out);
    ASSERT_EQ(sends.size(), 1u);
    EXPECT_EQ(sends[0].to, n(1));
}

TEST(Maintenance, ExpiryRediscoversOnlyWithQueuedData)
{
    auto node = started(2, {n(1), n(3)});
    node.on_rrep(Rrep{n(4), n(5), SeqNum{3}, 1, RreqId{n(4), 1}}, n(3), 0);
    const auto out = node.on_route_timer(100);
    EXPECT_TRUE(node.state().routes.empty());
    EXPECT_TRUE(notices<notice::DiscoveryStarted>(out).empty());
}

TEST(Connectivity, AttemptsResolveOnReplyOrTimeout)
{
    auto c = config();
    ConnectivityConfig cc;
    c.strategy = Connectivity{cc};
    auto node = started(0, {n(1), n(2)}, c);
    const auto start = node.send_data(n(5), 7, 10);
    const auto rreq = std::get<Rreq>(all_of<Send>(start)[0].packet);
    EXPECT_EQ(node.state().connectivity.find(n(5), n(1))->attempts, 1u);

    node.on_rrep(Rrep{n(0), n(5), SeqNum{1}, 3, rreq.rreq_id}, n(2), 18);
    EXPECT_DOUBLE_EQ(node.state().connectivity.find(n(5), n(2))->mu, 1.0);

    node.on_attempt_timeout(rreq.rreq_id, 40);
    EXPECT_DOUBLE_EQ(node.state().connectivity.find(n(5), n(1))->mu, 0.0);

    // A reply after the timeout is reported, not counted.
    const auto late = node.on_rrep(Rrep{n(0), n(5), SeqNum{1}, 3, rreq.rreq_id}, n(1), 41);
    EXPECT_EQ(notices<notice::LateReply>(late).size(), 1u);
    EXPECT_EQ(node.state().connectivity.find(n(5), n(1))->successes, 0u);
}

TEST(Connectivity, NewLinkEarnsBoost)
{
    auto c = config();
    ConnectivityConfig cc;
    cc.mode = IndexMode::Ema;
    cc.initial_mu = 0.5;
    c.strategy = Connectivity{cc};
    auto node = started(0, {n(1)}, c);
    node.on_link_up(n(2), 5);
    EXPECT_TRUE(node.state().fresh_links.contains(n(2)));
    const auto start = node.send_data(n(5), 7, 10);
    const auto rreq = std::get<Rreq>(all_of<Send>(start)[0].packet);
    const auto out = node.on_rrep(Rrep{n(0), n(5), SeqNum{1}, 3, rreq.rreq_id}, n(2), 18);
    EXPECT_EQ(notices<notice::LinkBoost>(out).size(), 1u);
    EXPECT_FALSE(node.state().fresh_links.contains(n(2)));
    EXPECT_DOUBLE_EQ(node.state().connectivity.find(n(5), n(2))->mu, 0.3 + 0.7 * 0.5 + 0.1);
}

TEST(CounterBased, WaitsOneTickAndCountsCopies)
{
    auto c = config();
    c.strategy = CounterBased{1};
    auto node = started(2, {n(1), n(3), n(4)}, c);
    const auto first = node.on_rreq(incoming(0, 5, 3), n(1), 20);
    EXPECT_TRUE(all_of<Send>(first).empty());
    ASSERT_EQ(all_of<SetTimer>(first).size(), 1u);
    EXPECT_EQ(all_of<SetTimer>(first)[0].at, 21);
    node.on_rreq(incoming(0, 5, 3), n(3), 20);
    const auto decided = node.on_relay_decision(RreqId{n(0), 1}, 21);
    EXPECT_TRUE(all_of<Send>(decided).empty());
    ASSERT_EQ(notices<notice::Suppressed>(decided).size(), 1u);
    EXPECT_EQ(notices<notice::Suppressed>(decided)[0].count, 2u);
}
