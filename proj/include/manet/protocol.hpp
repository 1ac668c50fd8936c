#pragma once

// Protocol value types shared by every layer of the simulator: identifiers,
// the packet variant and per-node table entries. Nothing in here holds
// mutable shared state.

#include <compare>
#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "manet/error.hpp"

namespace manet {

/// Simulation time in integer ticks.
using Tick = std::int64_t;

struct NodeId
{
    std::uint32_t value = 0;

    friend constexpr auto operator<=>(NodeId, NodeId) = default;
};

struct SeqNum
{
    std::uint32_t value = 0;

    friend constexpr auto operator<=>(SeqNum, SeqNum) = default;
};

/// (origin, id) names one RREQ wave network-wide.
struct RreqId
{
    NodeId origin;
    std::uint32_t id = 0;

    friend constexpr auto operator<=>(const RreqId&, const RreqId&) = default;
};

struct Rreq
{
    RreqId rreq_id;
    NodeId origin;
    SeqNum origin_seq;
    NodeId dest;
    std::optional<SeqNum> dest_seq_known;
    std::uint32_t hop_count = 0;
    std::uint32_t ttl = 0;

    bool operator==(const Rreq&) const = default;
};

struct Rrep
{
    NodeId origin;
    NodeId dest;
    SeqNum dest_seq;
    std::uint32_t hop_count = 0;
    RreqId rreq_id;

    bool operator==(const Rrep&) const = default;
};

struct Rerr
{
    std::vector<std::pair<NodeId, SeqNum>> unreachable;

    bool operator==(const Rerr&) const = default;
};

struct Hello
{
    NodeId sender;
    SeqNum seq;

    bool operator==(const Hello&) const = default;
};

struct Data
{
    NodeId src;
    NodeId dst;
    std::uint32_t payload_id = 0;

    bool operator==(const Data&) const = default;
};

using Packet = std::variant<Rreq, Rrep, Rerr, Hello, Data>;

enum class PacketType : std::uint8_t
{
    Rreq,
    Rrep,
    Rerr,
    Hello,
    Data,
};

inline PacketType
packet_type(const Packet& p)
{
    return static_cast<PacketType>(p.index());
}

const char* to_string(PacketType t);
std::optional<PacketType> packet_type_from_string(const std::string& s);

/// One-line human readable summary used in traces.
std::string describe(const Packet& p);

struct RoutingEntry
{
    NodeId dest;
    NodeId next_hop;
    std::uint32_t hop_count = 0;
    SeqNum dest_seq;
    Tick expiry = 0;
    /// Set once this node has originated DATA over the entry.
    bool active = false;

    bool valid_at(Tick now) const { return expiry > now; }

    bool operator==(const RoutingEntry&) const = default;
};

struct ReversePathEntry
{
    RreqId rreq_id;
    NodeId previous_hop;
    Tick created_at = 0;

    bool operator==(const ReversePathEntry&) const = default;
};

/// True iff the RREQ's id was already seen. Non-RREQ input throws ContractViolation.
bool is_duplicate(const std::set<RreqId>& seen, const Packet& rreq);
bool is_duplicate(const std::set<RreqId>& seen, const Rreq& rreq);

/// Per-hop bookkeeping applied to every RREQ/RREP transmission: hop_count
/// grows by one and, for RREQ, ttl shrinks by one. An RREQ whose ttl is
/// already zero throws NotRelayable; other packet kinds are not relayed
/// hop-by-hop and throw ContractViolation.
Packet relay_transform(const Packet& p);
Rreq relay_transform(const Rreq& p);
Rrep relay_transform(const Rrep& p);

} // namespace manet
