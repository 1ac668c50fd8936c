#include "manet/protocol.hpp"

#include <sstream>

namespace manet {

const char*
to_string(PacketType t)
{
    switch (t) {
        case PacketType::Rreq:
            return "RREQ";
        case PacketType::Rrep:
            return "RREP";
        case PacketType::Rerr:
            return "RERR";
        case PacketType::Hello:
            return "HELLO";
        case PacketType::Data:
            return "DATA";
    }
    return "?";
}

std::optional<PacketType>
packet_type_from_string(const std::string& s)
{
    for (auto t : {PacketType::Rreq, PacketType::Rrep, PacketType::Rerr, PacketType::Hello, PacketType::Data}) {
        if (s == to_string(t))
            return t;
    }
    return std::nullopt;
}

namespace {

struct Describer
{
    std::ostringstream& os;

    void operator()(const Rreq& p) const
    {
        os << "RREQ id=" << p.rreq_id.origin.value << '#' << p.rreq_id.id << " dest=" << p.dest.value
           << " hop=" << p.hop_count << " ttl=" << p.ttl;
    }
    void operator()(const Rrep& p) const
    {
        os << "RREP id=" << p.rreq_id.origin.value << '#' << p.rreq_id.id << " origin=" << p.origin.value
           << " dest=" << p.dest.value << " dseq=" << p.dest_seq.value << " hop=" << p.hop_count;
    }
    void operator()(const Rerr& p) const
    {
        os << "RERR";
        for (const auto& [d, s] : p.unreachable)
            os << ' ' << d.value << '@' << s.value;
    }
    void operator()(const Hello& p) const { os << "HELLO seq=" << p.seq.value; }
    void operator()(const Data& p) const
    {
        os << "DATA src=" << p.src.value << " dst=" << p.dst.value << " payload=" << p.payload_id;
    }
};

} // namespace

std::string
describe(const Packet& p)
{
    std::ostringstream os;
    std::visit(Describer{os}, p);
    return os.str();
}

bool
is_duplicate(const std::set<RreqId>& seen, const Rreq& rreq)
{
    return seen.contains(rreq.rreq_id);
}

bool
is_duplicate(const std::set<RreqId>& seen, const Packet& rreq)
{
    const auto* r = std::get_if<Rreq>(&rreq);
    if (r == nullptr)
        throw ContractViolation("is_duplicate: packet is not an RREQ");
    return is_duplicate(seen, *r);
}

Rreq
relay_transform(const Rreq& p)
{
    if (p.ttl == 0)
        throw NotRelayable("RREQ with ttl 0 cannot be relayed");
    Rreq out = p;
    out.hop_count += 1;
    out.ttl -= 1;
    return out;
}

Rrep
relay_transform(const Rrep& p)
{
    Rrep out = p;
    out.hop_count += 1;
    return out;
}

Packet
relay_transform(const Packet& p)
{
    if (const auto* q = std::get_if<Rreq>(&p))
        return relay_transform(*q);
    if (const auto* r = std::get_if<Rrep>(&p))
        return relay_transform(*r);
    throw ContractViolation(std::string("relay_transform: ") + to_string(packet_type(p)) + " is not relayed hop-by-hop");
}

} // namespace manet
