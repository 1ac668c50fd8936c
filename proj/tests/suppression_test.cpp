#include <gtest/gtest.h>

#include <cmath>

#include "manet/suppression.hpp"

using namespace manet;

namespace {

RreqId
rid(std::uint32_t n)
{
    return RreqId{NodeId{0}, n};
}

std::vector<NodeId>
nodes(std::initializer_list<std::uint32_t> ids)
{
    std::vector<NodeId> out;
    for (auto i : ids)
        out.push_back(NodeId{i});
    return out;
}

Rreq
rreq_to(std::uint32_t dest)
{
    Rreq r;
    r.rreq_id = rid(1);
    r.dest = NodeId{dest};
    r.ttl = 5;
    return r;
}

} // namespace

TEST(MuRaw, Ratio)
{
    EXPECT_DOUBLE_EQ(mu_raw(6, 10), 0.6);
    EXPECT_DOUBLE_EQ(mu_raw(0, 10), 0.0);
    EXPECT_DOUBLE_EQ(mu_raw(0, 0, 0.8), 0.8);
    EXPECT_THROW(mu_raw(3, 2), InvariantViolation);
}

TEST(MuEma, StepAndRange)
{
    EXPECT_DOUBLE_EQ(mu_ema_step(1.0, 0, 0.3), 0.7);
    EXPECT_DOUBLE_EQ(mu_ema_step(0.5, 1, 0.5), 0.75);
    EXPECT_THROW(mu_ema_step(1.0, 0, 0.0), ConfigError);
    EXPECT_THROW(mu_ema_step(1.0, 0, 1.0), ConfigError);
}

TEST(MuEma, AllFailuresDecayGeometrically)
{
    Rng rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const double alpha = rng.uniform(0.001, 0.999);
        double mu = 1.0;
        for (int k = 1; k <= 50; ++k) {
            mu = mu_ema_step(mu, 0, alpha);
            ASSERT_NEAR(mu, std::pow(1.0 - alpha, k), 1e-12);
        }
    }
}

TEST(Eligibility, WarmupThenThreshold)
{
    ConnectivityConfig c;
    c.warmup = 2;
    c.threshold = 0.5;
    ConnectivityRecord r = ConnectivityRecord::fresh(c);
    r.mu = 0.0;
    r.attempts = 1;
    EXPECT_TRUE(eligible(r, c));
    r.attempts = 2;
    EXPECT_FALSE(eligible(r, c));
    r.mu = 0.5;
    EXPECT_FALSE(eligible(r, c)) << "threshold is strict";
    r.mu = 0.6;
    EXPECT_TRUE(eligible(r, c));
}

TEST(Attempts, OpenResolveRaw)
{
    ConnectivityConfig c;
    auto r = ConnectivityRecord::fresh(c);
    open_attempt(r, rid(1), 0);
    open_attempt(r, rid(2), 0);
    EXPECT_EQ(r.attempts, 2u);
    EXPECT_DOUBLE_EQ(r.mu, 1.0) << "mu only moves on resolution";
    EXPECT_THROW(open_attempt(r, rid(1), 1), InvariantViolation);

    EXPECT_TRUE(resolve_attempt(r, rid(1), false, c));
    EXPECT_DOUBLE_EQ(r.mu, 0.0);
    EXPECT_TRUE(resolve_attempt(r, rid(2), true, c));
    EXPECT_DOUBLE_EQ(r.mu, 0.5);
    EXPECT_EQ(r.successes, 1u);
}

TEST(Attempts, UnknownResolutionIsIgnored)
{
    ConnectivityConfig c;
    auto r = ConnectivityRecord::fresh(c);
    open_attempt(r, rid(1), 0);
    const auto before = r;
    EXPECT_FALSE(resolve_attempt(r, rid(7), true, c));
    EXPECT_EQ(r, before);
}

TEST(Attempts, EmaMode)
{
    ConnectivityConfig c;
    c.mode = IndexMode::Ema;
    c.alpha = 0.3;
    auto r = ConnectivityRecord::fresh(c);
    open_attempt(r, rid(1), 0);
    resolve_attempt(r, rid(1), false, c);
    EXPECT_DOUBLE_EQ(r.mu, 0.7);
}

TEST(Attempts, BlendStaysInRange)
{
    ConnectivityConfig c;
    c.mode = IndexMode::Blend;
    Rng rng(3);
    auto r = ConnectivityRecord::fresh(c);
    for (std::uint32_t i = 1; i < 300; ++i) {
        open_attempt(r, rid(i), i);
        resolve_attempt(r, rid(i), rng.coin(0.4), c);
        ASSERT_GE(r.mu, 0.0);
        ASSERT_LE(r.mu, 1.0);
    }
}

TEST(Boost, CappedAtOne)
{
    ConnectivityConfig c;
    auto r = ConnectivityRecord::fresh(c);
    r.mu = 0.45;
    boost_new_link(r, c);
    EXPECT_DOUBLE_EQ(r.mu, 0.55);
    r.mu = 0.95;
    boost_new_link(r, c);
    EXPECT_DOUBLE_EQ(r.mu, 1.0);
}

TEST(ConfigValidation, Bounds)
{
    ConnectivityConfig c;
    EXPECT_NO_THROW(c.validate());
    c.threshold = -1.0;
    EXPECT_NO_THROW(c.validate());
    c.alpha = 1.5;
    EXPECT_THROW(c.validate(), ConfigError);
    EXPECT_THROW(validate(Strategy{Probabilistic{1.2}}), ConfigError);
    EXPECT_THROW(validate(Strategy{ExpandingRing{0, 2, 7}}), ConfigError);
    EXPECT_THROW(validate(Strategy{ExpandingRing{5, 2, 3}}), ConfigError);
    EXPECT_THROW(validate(Strategy{DistanceBased{-1}}), ConfigError);
}

TEST(Table, PerDestinationAndAggregate)
{
    ConnectivityConfig c;
    ConnectivityTable per_dest(c);
    per_dest.at(NodeId{5}, NodeId{1}).mu = 0.2;
    EXPECT_EQ(per_dest.find(NodeId{6}, NodeId{1}), nullptr);
    EXPECT_TRUE(per_dest.eligible(NodeId{6}, NodeId{1})) << "unknown links are warming up";

    ConnectivityTable agg(c, true);
    agg.at(NodeId{5}, NodeId{1}).mu = 0.2;
    ASSERT_NE(agg.find(NodeId{6}, NodeId{1}), nullptr);
    EXPECT_DOUBLE_EQ(agg.find(NodeId{6}, NodeId{1})->mu, 0.2);
}

TEST(Labels, RoundTrip)
{
    ConnectivityConfig c;
    const Strategy all[] = {Flood{},          Connectivity{c},         Probabilistic{0.25},
                            CounterBased{3},  DistanceBased{12.5},     ExpandingRing{1, 2, 7}};
    for (const auto& s : all)
        EXPECT_EQ(parse_strategy(strategy_label(s), c), s) << strategy_label(s);
    EXPECT_EQ(strategy_label(ExpandingRing{1, 2, 7}), "ring:1:2:7");
    EXPECT_THROW(parse_strategy("gossip"), ConfigError);
    EXPECT_THROW(parse_strategy("probabilistic:abc"), ConfigError);
    EXPECT_THROW(parse_strategy("ring:1:2"), ConfigError);
}

TEST(Select, FloodTakesEveryone)
{
    Rng rng(1);
    SelectionContext ctx;
    ctx.previous_hop = NodeId{0};
    const auto cand = nodes({1, 2, 3});
    const auto sel = select_targets(Flood{}, ctx, rreq_to(9), cand, rng);
    EXPECT_EQ(sel.targets, cand);
    EXPECT_EQ(sel.suppressed, 0u);
}

TEST(Select, ConnectivityFiltersAtOrigin)
{
    Rng rng(1);
    ConnectivityConfig c;
    c.warmup = 0;
    ConnectivityTable table(c);
    table.at(NodeId{9}, NodeId{2}).mu = 0.1;
    SelectionContext ctx;
    ctx.connectivity = &table;
    const auto sel = select_targets(Connectivity{c}, ctx, rreq_to(9), nodes({1, 2, 3}), rng);
    EXPECT_EQ(sel.targets, nodes({1, 3}));
    EXPECT_EQ(sel.suppressed, 1u);

    ctx.connectivity = nullptr;
    EXPECT_THROW(select_targets(Connectivity{c}, ctx, rreq_to(9), nodes({1}), rng), ContractViolation);
}

TEST(Select, GossipPoliciesOnlyFilterRelays)
{
    Rng rng(1);
    SelectionContext origin;
    const auto cand = nodes({1, 2});
    EXPECT_EQ(select_targets(Probabilistic{0.0}, origin, rreq_to(9), cand, rng).targets, cand);

    SelectionContext relay;
    relay.previous_hop = NodeId{0};
    EXPECT_TRUE(select_targets(Probabilistic{0.0}, relay, rreq_to(9), cand, rng).targets.empty());

    relay.copies_heard = 3;
    EXPECT_TRUE(select_targets(CounterBased{2}, relay, rreq_to(9), cand, rng).targets.empty());
    EXPECT_EQ(select_targets(CounterBased{3}, relay, rreq_to(9), cand, rng).targets, cand);

    relay.distance_from_previous = 4.0;
    EXPECT_EQ(select_targets(DistanceBased{5.0}, relay, rreq_to(9), cand, rng).suppressed, 2u);
    relay.distance_from_previous = 6.0;
    EXPECT_EQ(select_targets(DistanceBased{5.0}, relay, rreq_to(9), cand, rng).targets, cand);
}

TEST(Select, SubsetAndDeterminism)
{
    ConnectivityConfig c;
    c.warmup = 0;
    Rng gen(42);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<NodeId> cand;
        for (std::uint32_t i = 1; i < 10; ++i) {
            if (gen.coin(0.6))
                cand.push_back(NodeId{i});
        }
        ConnectivityTable table(c);
        for (auto n : cand)
            table.at(NodeId{20}, n).mu = gen.uniform();
        SelectionContext ctx;
        ctx.previous_hop = NodeId{0};
        ctx.copies_heard = 1 + gen.below(4);
        ctx.distance_from_previous = gen.uniform(0, 50);
        ctx.connectivity = &table;
        const Strategy strategies[] = {Flood{}, Connectivity{c}, Probabilistic{gen.uniform()},
                                       CounterBased{gen.below(4)}, DistanceBased{gen.uniform(0, 50)}};
        const auto seed = gen.next();
        for (const auto& s : strategies) {
            Rng a(seed);
            Rng b(seed);
            const auto x = select_targets(s, ctx, rreq_to(20), cand, a);
            const auto y = select_targets(s, ctx, rreq_to(20), cand, b);
            ASSERT_EQ(x.targets, y.targets);
            ASSERT_EQ(x.targets.size() + x.suppressed, cand.size());
            ASSERT_TRUE(std::includes(cand.begin(), cand.end(), x.targets.begin(), x.targets.end()));
        }
    }
}

TEST(ExpandingRing, Schedule)
{
    const ExpandingRing r{1, 2, 7};
    const std::uint32_t expect[] = {1, 3, 5, 7, 30, 30};
    for (std::uint32_t i = 0; i < 6; ++i)
        EXPECT_EQ(expanding_ring_next_ttl(r, i, 30), expect[i]) << i;

    const ExpandingRing clipped{2, 4, 8};
    EXPECT_EQ(expanding_ring_next_ttl(clipped, 1, 30), 6u);
    EXPECT_EQ(expanding_ring_next_ttl(clipped, 2, 30), 8u);
    EXPECT_EQ(expanding_ring_next_ttl(clipped, 3, 30), 30u);
}
