#pragma once

#include <string>

#include "manet/scenario.hpp"
#include "manet/scenario_io.hpp"
#include "oracles.hpp"

namespace fixtures {

inline oracle::Graph
graph_of(const manet::Scenario& s)
{
    oracle::Graph g(s.node_count());
    for (const auto& l : s.links)
        oracle::connect(g, l.a.value, l.b.value);
    return g;
}

inline manet::NodeId
id(const manet::Scenario& s, const std::string& name)
{
    return *s.find_node(name);
}

/// Static scenario over `g` with a single origin -> dest delivery at t=100.
inline manet::Scenario
scenario_from_graph(const oracle::Graph& g, std::uint32_t origin, std::uint32_t dest)
{
    manet::Scenario s;
    s.name = "graph";
    for (std::uint32_t i = 0; i < g.size(); ++i)
        s.nodes.push_back({"G" + std::to_string(i), std::nullopt});
    for (std::uint32_t a = 0; a < g.size(); ++a) {
        for (auto b : g[a]) {
            if (a < b)
                s.links.push_back({manet::NodeId{a}, manet::NodeId{b}, 1});
        }
    }
    s.traffic.push_back({manet::NodeId{origin}, manet::NodeId{dest}, 100, 100, 1});
    return s;
}

/// Random graph with independent edge probability `p`.
template<typename Rng>
oracle::Graph
random_graph(std::uint32_t n, double p, Rng& rng)
{
    oracle::Graph g(n);
    for (std::uint32_t a = 0; a < n; ++a) {
        for (std::uint32_t b = a + 1; b < n; ++b) {
            if (rng.coin(p))
                oracle::connect(g, a, b);
        }
    }
    return g;
}

} // namespace fixtures
