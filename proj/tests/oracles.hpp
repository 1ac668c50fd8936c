#pragma once

// Reference models used by the tests. They work on plain adjacency sets and
// know nothing about the simulator's classes, so agreement between the two is
// meaningful.

#include <algorithm>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <utility>
#include <vector>

namespace oracle {

using Graph = std::vector<std::set<std::uint32_t>>;

inline void
connect(Graph& g, std::uint32_t a, std::uint32_t b)
{
    g[a].insert(b);
    g[b].insert(a);
}

inline void
disconnect(Graph& g, std::uint32_t a, std::uint32_t b)
{
    g[a].erase(b);
    g[b].erase(a);
}

/// Hop distance from `src`, -1 when unreachable.
inline std::vector<int>
bfs(const Graph& g, std::uint32_t src)
{
    std::vector<int> dist(g.size(), -1);
    std::deque<std::uint32_t> q{src};
    dist[src] = 0;
    while (!q.empty()) {
        auto u = q.front();
        q.pop_front();
        for (auto v : g[u]) {
            if (dist[v] < 0) {
                dist[v] = dist[u] + 1;
                q.push_back(v);
            }
        }
    }
    return dist;
}

/// Which directed sends a node is willing to make.
using SendMask = std::function<bool(std::uint32_t from, std::uint32_t to)>;

struct Walk
{
    std::uint64_t transmissions = 0;
    std::uint64_t redundant = 0;
    /// Directed sends in the order they happen.
    std::vector<std::pair<std::uint32_t, std::uint32_t>> sends;
    /// Node the first copy came from; absent for the origin and unreached nodes.
    std::vector<std::optional<std::uint32_t>> parent;
    std::vector<int> depth;
    bool reached_dest = false;
};

/// Synchronous unit-delay flood of one request. Every send decrements the
/// TTL, so a node first reached at depth k may relay only when k < ttl. The
/// destination never relays; of several copies landing in the same step the
/// one from the lowest sender id counts as first.
inline Walk
flood_walk(const Graph& g, std::uint32_t origin, std::uint32_t dest, std::uint32_t ttl, const SendMask& mask = {})
{
    Walk w;
    w.parent.assign(g.size(), std::nullopt);
    w.depth.assign(g.size(), -1);
    w.depth[origin] = 0;

    std::vector<std::pair<std::uint32_t, std::uint32_t>> wave;
    for (auto v : g[origin]) {
        if (!mask || mask(origin, v))
            wave.emplace_back(origin, v);
    }

    for (int step = 1; !wave.empty(); ++step) {
        std::sort(wave.begin(), wave.end());
        std::vector<std::uint32_t> fresh;
        for (const auto& [from, to] : wave) {
            ++w.transmissions;
            w.sends.emplace_back(from, to);
            if (w.depth[to] >= 0) {
                ++w.redundant;
                continue;
            }
            w.depth[to] = step;
            w.parent[to] = from;
            fresh.push_back(to);
        }
        wave.clear();
        for (auto u : fresh) {
            if (u == dest) {
                w.reached_dest = true;
                continue;
            }
            if (static_cast<std::uint32_t>(step) >= ttl)
                continue;
            for (auto v : g[u]) {
                if (v != *w.parent[u] && (!mask || mask(u, v)))
                    wave.emplace_back(u, v);
            }
        }
    }
    return w;
}

/// Per directed link: attempts and answered attempts.
struct LinkTally
{
    std::uint32_t attempts = 0;
    std::uint32_t successes = 0;
};

using Tally = std::map<std::pair<std::uint32_t, std::uint32_t>, LinkTally>;

/// One learning round. Every request send is an attempt. The destination
/// answers the first copy from each neighbour; each answer walks back along
/// first-copy parents and credits the send it retraces, unless a reply is
/// lost on a link listed in `lost_replies` (keyed as reply direction
/// from -> to), which ends that answer.
inline void
replay_round(const Graph& g,
             std::uint32_t origin,
             std::uint32_t dest,
             std::uint32_t ttl,
             const std::set<std::pair<std::uint32_t, std::uint32_t>>& lost_replies,
             Tally& tally,
             const SendMask& mask = {})
{
    const auto w = flood_walk(g, origin, dest, ttl, mask);
    std::set<std::pair<std::uint32_t, std::uint32_t>> credited;
    std::set<std::uint32_t> answered;
    for (const auto& [from, to] : w.sends) {
        tally[{from, to}].attempts += 1;
        if (to != dest || answered.contains(from))
            continue;
        answered.insert(from);
        // Reply travels dest -> from -> parent(from) -> ... -> origin.
        std::uint32_t at = dest;
        std::uint32_t next = from;
        while (true) {
            if (lost_replies.contains({at, next}))
                break;
            credited.insert({next, at});
            if (next == origin)
                break;
            at = next;
            next = *w.parent[at];
        }
    }
    for (const auto& link : credited)
        tally[link].successes += 1;
}

} // namespace oracle
