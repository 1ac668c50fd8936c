#include "manet/scenario_io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "json.hpp"
#include "manet/rng.hpp"

namespace manet {

using nlohmann::json;

namespace {

// ---------------------------------------------------------------------------
// Strict reader: every lookup records the key, finish() rejects the rest.

class Fields
{
  public:
    Fields(const json& j, std::string path)
      : j_(j),
        path_(std::move(path))
    {
        if (!j_.is_object())
            throw ParseError(path_, "expected an object");
    }

    const std::string& path() const { return path_; }
    std::string at(const std::string& key) const { return path_ + "." + key; }

    const json* find(const std::string& key)
    {
        known_.insert(key);
        auto it = j_.find(key);
        return it == j_.end() ? nullptr : &*it;
    }

    const json& need(const std::string& key)
    {
        const json* v = find(key);
        if (v == nullptr)
            throw ParseError(at(key), "missing required field");
        return *v;
    }

    void finish() const
    {
        for (auto it = j_.begin(); it != j_.end(); ++it) {
            if (!known_.contains(it.key()))
                throw ParseError(at(it.key()), "unknown field");
        }
    }

  private:
    const json& j_;
    std::string path_;
    std::set<std::string> known_;
};

std::uint64_t
as_u64(const json& v, const std::string& path)
{
    if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<std::int64_t>() >= 0))
        throw ParseError(path, "expected a non-negative integer");
    return v.get<std::uint64_t>();
}

std::uint32_t
as_u32(const json& v, const std::string& path)
{
    const auto x = as_u64(v, path);
    if (x > UINT32_MAX)
        throw ParseError(path, "integer out of range");
    return static_cast<std::uint32_t>(x);
}

Tick
as_tick(const json& v, const std::string& path)
{
    if (!v.is_number_integer())
        throw ParseError(path, "expected an integer tick");
    return v.get<Tick>();
}

double
as_double(const json& v, const std::string& path)
{
    if (!v.is_number())
        throw ParseError(path, "expected a number");
    return v.get<double>();
}

bool
as_bool(const json& v, const std::string& path)
{
    if (!v.is_boolean())
        throw ParseError(path, "expected true or false");
    return v.get<bool>();
}

std::string
as_string(const json& v, const std::string& path)
{
    if (!v.is_string())
        throw ParseError(path, "expected a string");
    return v.get<std::string>();
}

const json&
as_array(const json& v, const std::string& path)
{
    if (!v.is_array())
        throw ParseError(path, "expected an array");
    return v;
}

std::string
index_path(const std::string& base, std::size_t i)
{
    return base + "[" + std::to_string(i) + "]";
}

/// Node names resolve after the node list is known; dangling ones are a
/// validation (not schema) failure.
class Names
{
  public:
    explicit Names(const std::vector<NodeSpec>& nodes)
    {
        for (std::size_t i = 0; i < nodes.size(); ++i)
            ids_.emplace(nodes[i].name, NodeId{static_cast<std::uint32_t>(i)});
    }

    NodeId resolve(const json& v, const std::string& path) const
    {
        const auto name = as_string(v, path);
        auto it = ids_.find(name);
        if (it == ids_.end())
            throw ValidationError(path + ": unknown node '" + name + "'");
        return it->second;
    }

  private:
    std::map<std::string, NodeId> ids_;
};

Strategy
read_strategy(const json& j, const std::string& path)
{
    Fields f(j, path);
    const auto kind = as_string(f.need("kind"), f.at("kind"));
    Strategy s;
    if (kind == "flood") {
        s = Flood{};
    } else if (kind == "connectivity") {
        ConnectivityConfig c;
        if (const auto* v = f.find("mode")) {
            auto m = index_mode_from_string(as_string(*v, f.at("mode")));
            if (!m)
                throw ParseError(f.at("mode"), "expected raw, ema or blend");
            c.mode = *m;
        }
        if (const auto* v = f.find("alpha"))
            c.alpha = as_double(*v, f.at("alpha"));
        if (const auto* v = f.find("threshold"))
            c.threshold = as_double(*v, f.at("threshold"));
        if (const auto* v = f.find("initial_mu"))
            c.initial_mu = as_double(*v, f.at("initial_mu"));
        if (const auto* v = f.find("warmup"))
            c.warmup = as_u32(*v, f.at("warmup"));
        if (const auto* v = f.find("boost"))
            c.boost = as_double(*v, f.at("boost"));
        if (const auto* v = f.find("attempt_timeout"))
            c.attempt_timeout = as_tick(*v, f.at("attempt_timeout"));
        s = Connectivity{c};
    } else if (kind == "probabilistic") {
        s = Probabilistic{as_double(f.need("p"), f.at("p"))};
    } else if (kind == "counter") {
        s = CounterBased{as_u64(f.need("c"), f.at("c"))};
    } else if (kind == "distance") {
        s = DistanceBased{as_double(f.need("d_min"), f.at("d_min"))};
    } else if (kind == "expanding_ring") {
        ExpandingRing r;
        r.ttl_start = as_u32(f.need("ttl_start"), f.at("ttl_start"));
        r.ttl_increment = as_u32(f.need("ttl_increment"), f.at("ttl_increment"));
        r.ttl_threshold = as_u32(f.need("ttl_threshold"), f.at("ttl_threshold"));
        s = r;
    } else {
        throw ParseError(f.at("kind"), "unknown strategy kind '" + kind + "'");
    }
    f.finish();
    return s;
}

json
write_strategy(const Strategy& s)
{
    struct Writer
    {
        json operator()(const Flood&) const { return {{"kind", "flood"}}; }
        json operator()(const Connectivity& c) const
        {
            return {{"kind", "connectivity"},
                    {"mode", to_string(c.config.mode)},
                    {"alpha", c.config.alpha},
                    {"threshold", c.config.threshold},
                    {"initial_mu", c.config.initial_mu},
                    {"warmup", c.config.warmup},
                    {"boost", c.config.boost},
                    {"attempt_timeout", c.config.attempt_timeout}};
        }
        json operator()(const Probabilistic& p) const { return {{"kind", "probabilistic"}, {"p", p.p}}; }
        json operator()(const CounterBased& c) const { return {{"kind", "counter"}, {"c", c.c}}; }
        json operator()(const DistanceBased& d) const { return {{"kind", "distance"}, {"d_min", d.d_min}}; }
        json operator()(const ExpandingRing& r) const
        {
            return {{"kind", "expanding_ring"},
                    {"ttl_start", r.ttl_start},
                    {"ttl_increment", r.ttl_increment},
                    {"ttl_threshold", r.ttl_threshold}};
        }
    };
    return std::visit(Writer{}, s);
}

Position
read_position(const json& v, const std::string& path)
{
    if (!v.is_array() || v.size() != 2)
        throw ParseError(path, "expected [x, y]");
    return {as_double(v[0], index_path(path, 0)), as_double(v[1], index_path(path, 1))};
}

} // namespace

Scenario
parse_scenario(std::string_view text)
{
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError("$", std::string("malformed JSON: ") + e.what());
    }

    Scenario s;
    Fields top(doc, "$");

    s.schema = static_cast<int>(as_u32(top.need("schema"), top.at("schema")));
    if (s.schema != 1)
        throw ParseError(top.at("schema"), "unsupported schema version " + std::to_string(s.schema));
    s.name = as_string(top.need("name"), top.at("name"));
    if (const auto* v = top.find("comment"))
        s.comment = as_string(*v, top.at("comment"));

    const auto& nodes = as_array(top.need("nodes"), top.at("nodes"));
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        Fields f(nodes[i], index_path(top.at("nodes"), i));
        NodeSpec n;
        n.name = as_string(f.need("name"), f.at("name"));
        if (const auto* p = f.find("pos"))
            n.pos = read_position(*p, f.at("pos"));
        f.finish();
        s.nodes.push_back(std::move(n));
    }
    const Names names(s.nodes);

    if (const auto* links = top.find("links")) {
        as_array(*links, top.at("links"));
        for (std::size_t i = 0; i < links->size(); ++i) {
            Fields f((*links)[i], index_path(top.at("links"), i));
            LinkSpec l;
            l.a = names.resolve(f.need("a"), f.at("a"));
            l.b = names.resolve(f.need("b"), f.at("b"));
            if (const auto* d = f.find("delay"))
                l.delay = as_tick(*d, f.at("delay"));
            f.finish();
            s.links.push_back(l);
        }
    }

    if (const auto* m = top.find("mobility")) {
        Fields f(*m, top.at("mobility"));
        const auto model = as_string(f.need("model"), f.at("model"));
        if (model == "static") {
            s.mobility = MobilityKind::Static;
        } else if (model == "scripted") {
            s.mobility = MobilityKind::Scripted;
        } else if (model == "random_waypoint") {
            s.mobility = MobilityKind::RandomWaypoint;
            RandomWaypointSpec rw;
            rw.width = as_double(f.need("width"), f.at("width"));
            rw.height = as_double(f.need("height"), f.at("height"));
            rw.speed_min = as_double(f.need("speed_min"), f.at("speed_min"));
            rw.speed_max = as_double(f.need("speed_max"), f.at("speed_max"));
            rw.radio_range = as_double(f.need("radio_range"), f.at("radio_range"));
            if (const auto* v = f.find("pause"))
                rw.pause = as_tick(*v, f.at("pause"));
            if (const auto* v = f.find("step"))
                rw.step = as_tick(*v, f.at("step"));
            s.random_waypoint = rw;
        } else {
            throw ParseError(f.at("model"), "expected static, scripted or random_waypoint");
        }
        f.finish();
    }

    if (const auto* events = top.find("events")) {
        as_array(*events, top.at("events"));
        for (std::size_t i = 0; i < events->size(); ++i) {
            Fields f((*events)[i], index_path(top.at("events"), i));
            const Tick at = as_tick(f.need("at"), f.at("at"));
            const auto kind = as_string(f.need("kind"), f.at("kind"));
            if (kind == "link_up" || kind == "link_down") {
                LinkEventSpec e;
                e.at = at;
                e.up = kind == "link_up";
                e.a = names.resolve(f.need("a"), f.at("a"));
                e.b = names.resolve(f.need("b"), f.at("b"));
                if (const auto* d = f.find("delay"))
                    e.delay = as_tick(*d, f.at("delay"));
                s.link_events.push_back(e);
            } else if (kind == "drop") {
                DropSpec d;
                d.at = at;
                d.from = names.resolve(f.need("from"), f.at("from"));
                d.to = names.resolve(f.need("to"), f.at("to"));
                if (const auto* p = f.find("packet")) {
                    d.packet = packet_type_from_string(as_string(*p, f.at("packet")));
                    if (!d.packet)
                        throw ParseError(f.at("packet"), "expected RREQ, RREP, RERR, HELLO or DATA");
                }
                s.drops.push_back(d);
            } else {
                throw ParseError(f.at("kind"), "expected link_up, link_down or drop");
            }
            f.finish();
        }
    }

    if (const auto* traffic = top.find("traffic")) {
        as_array(*traffic, top.at("traffic"));
        for (std::size_t i = 0; i < traffic->size(); ++i) {
            Fields f((*traffic)[i], index_path(top.at("traffic"), i));
            TrafficSpec t;
            t.origin = names.resolve(f.need("origin"), f.at("origin"));
            t.dest = names.resolve(f.need("dest"), f.at("dest"));
            t.start = as_tick(f.need("start"), f.at("start"));
            if (const auto* v = f.find("interval"))
                t.interval = as_tick(*v, f.at("interval"));
            if (const auto* v = f.find("rounds"))
                t.rounds = as_u32(*v, f.at("rounds"));
            f.finish();
            s.traffic.push_back(t);
        }
    }

    if (const auto* st = top.find("strategy"))
        s.strategy = read_strategy(*st, top.at("strategy"));
    if (const auto* v = top.find("seed"))
        s.seed = as_u64(*v, top.at("seed"));
    if (const auto* v = top.find("t_max"))
        s.t_max = as_tick(*v, top.at("t_max"));

    if (const auto* t = top.find("timing")) {
        Fields f(*t, top.at("timing"));
        if (const auto* v = f.find("hello_interval"))
            s.timing.hello_interval = as_tick(*v, f.at("hello_interval"));
        if (const auto* v = f.find("hello_timeout"))
            s.timing.hello_timeout = as_tick(*v, f.at("hello_timeout"));
        if (const auto* v = f.find("route_lifetime"))
            s.timing.route_lifetime = as_tick(*v, f.at("route_lifetime"));
        if (const auto* v = f.find("discovery_deadline"))
            s.timing.discovery_deadline = as_tick(*v, f.at("discovery_deadline"));
        if (const auto* v = f.find("max_retries"))
            s.timing.max_retries = as_u32(*v, f.at("max_retries"));
        if (const auto* v = f.find("flood_ttl"))
            s.timing.flood_ttl = as_u32(*v, f.at("flood_ttl"));
        f.finish();
    }

    if (const auto* fl = top.find("flags")) {
        Fields f(*fl, top.at("flags"));
        if (const auto* v = f.find("intermediate_reply"))
            s.flags.intermediate_reply = as_bool(*v, f.at("intermediate_reply"));
        if (const auto* v = f.find("per_neighbor_aggregate"))
            s.flags.per_neighbor_aggregate = as_bool(*v, f.at("per_neighbor_aggregate"));
        if (const auto* v = f.find("reply_each_neighbor"))
            s.flags.reply_each_neighbor = as_bool(*v, f.at("reply_each_neighbor"));
        if (const auto* v = f.find("hello"))
            s.flags.hello = as_bool(*v, f.at("hello"));
        f.finish();
    }

    top.finish();
    s.validate();
    return s;
}

std::string
emit_scenario(const Scenario& s)
{
    auto name = [&](NodeId id) { return s.node_name(id); };

    json doc;
    doc["schema"] = s.schema;
    doc["name"] = s.name;
    doc["comment"] = s.comment;

    json nodes = json::array();
    for (const auto& n : s.nodes) {
        json j{{"name", n.name}};
        if (n.pos)
            j["pos"] = {n.pos->x, n.pos->y};
        nodes.push_back(std::move(j));
    }
    doc["nodes"] = std::move(nodes);

    json links = json::array();
    for (const auto& l : s.links)
        links.push_back({{"a", name(l.a)}, {"b", name(l.b)}, {"delay", l.delay}});
    doc["links"] = std::move(links);

    json mobility{{"model", to_string(s.mobility)}};
    if (s.random_waypoint) {
        const auto& rw = *s.random_waypoint;
        mobility["width"] = rw.width;
        mobility["height"] = rw.height;
        mobility["speed_min"] = rw.speed_min;
        mobility["speed_max"] = rw.speed_max;
        mobility["pause"] = rw.pause;
        mobility["radio_range"] = rw.radio_range;
        mobility["step"] = rw.step;
    }
    doc["mobility"] = std::move(mobility);

    json events = json::array();
    for (const auto& e : s.link_events) {
        events.push_back({{"at", e.at},
                          {"kind", e.up ? "link_up" : "link_down"},
                          {"a", name(e.a)},
                          {"b", name(e.b)},
                          {"delay", e.delay}});
    }
    for (const auto& d : s.drops) {
        json j{{"at", d.at}, {"kind", "drop"}, {"from", name(d.from)}, {"to", name(d.to)}};
        if (d.packet)
            j["packet"] = to_string(*d.packet);
        events.push_back(std::move(j));
    }
    doc["events"] = std::move(events);

    json traffic = json::array();
    for (const auto& t : s.traffic) {
        traffic.push_back({{"origin", name(t.origin)},
                           {"dest", name(t.dest)},
                           {"start", t.start},
                           {"interval", t.interval},
                           {"rounds", t.rounds}});
    }
    doc["traffic"] = std::move(traffic);

    doc["strategy"] = write_strategy(s.strategy);
    doc["seed"] = s.seed;
    doc["t_max"] = s.t_max;
    doc["timing"] = {{"hello_interval", s.timing.hello_interval},
                     {"hello_timeout", s.timing.hello_timeout},
                     {"route_lifetime", s.timing.route_lifetime},
                     {"discovery_deadline", s.timing.discovery_deadline},
                     {"max_retries", s.timing.max_retries},
                     {"flood_ttl", s.timing.flood_ttl}};
    doc["flags"] = {{"intermediate_reply", s.flags.intermediate_reply},
                    {"per_neighbor_aggregate", s.flags.per_neighbor_aggregate},
                    {"reply_each_neighbor", s.flags.reply_each_neighbor},
                    {"hello", s.flags.hello}};
    return doc.dump(2) + "\n";
}

Scenario
load_scenario_file(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ParseError(path, "no builtin scenario by that name and the file cannot be opened");
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_scenario(buf.str());
    } catch (const ParseError& e) {
        throw ParseError(path + ":" + e.path(), std::string(e.what()).substr(e.path().size() + 2));
    } catch (const ValidationError& e) {
        throw ValidationError(path + ": " + e.what());
    }
}

// ---------------------------------------------------------------------------
// Builtins

namespace {

Scenario
make_fig1()
{
    Scenario s;
    s.name = "fig1";
    s.comment = "Canonical 11-node flooding example, S to D. Node N17 is left out: S has exactly three "
                "neighbours (N1, N4, N7).";
    const std::vector<std::pair<const char*, Position>> nodes = {
      {"S", {0, 50}},   {"N1", {20, 80}}, {"N2", {40, 90}},  {"N3", {60, 80}}, {"N4", {20, 50}}, {"N5", {40, 55}},
      {"N6", {60, 45}}, {"N7", {20, 20}}, {"N8", {35, 5}}, {"N13", {38, 30}}, {"D", {80, 55}},
    };
    for (const auto& [n, p] : nodes)
        s.nodes.push_back({n, p});
    const std::vector<std::pair<const char*, const char*>> links = {
      {"S", "N1"},  {"S", "N4"},  {"S", "N7"},   {"N1", "N2"},  {"N2", "N3"},  {"N3", "D"},  {"N4", "N5"},
      {"N5", "N6"}, {"N6", "D"},  {"N5", "N3"},  {"N4", "N13"}, {"N7", "N13"}, {"N7", "N8"},
    };
    for (const auto& [a, b] : links)
        s.links.push_back({*s.find_node(a), *s.find_node(b), 1});
    s.traffic.push_back({*s.find_node("S"), *s.find_node("D"), 100, 100, 1});
    s.strategy = Flood{};
    return s;
}

Scenario
make_fig1_tables()
{
    Scenario s = make_fig1();
    s.name = "fig1-tables";
    s.comment = "Ten S-to-D discovery rounds on fig1 that train the connectivity tables. Round 7 loses the RREP "
                "on N4->S; from round 8 on N5 is cut off from N3 and N6. The destination answers one copy per "
                "neighbour so both the N1 and N4 branches can earn credit.";
    s.mobility = MobilityKind::Scripted;
    s.traffic.front().rounds = 10;
    s.drops.push_back({707, *s.find_node("N4"), *s.find_node("S"), PacketType::Rrep});
    s.link_events.push_back({750, false, *s.find_node("N5"), *s.find_node("N3"), 1});
    s.link_events.push_back({750, false, *s.find_node("N5"), *s.find_node("N6"), 1});
    s.strategy = Connectivity{ConnectivityConfig{}};
    s.flags.intermediate_reply = false;
    s.flags.reply_each_neighbor = true;
    return s;
}

Scenario
make_ring_demo()
{
    Scenario s;
    s.name = "ring-demo";
    s.comment = "Six-hop chain searched with an expanding ring (1, 3, 5, 7, then network-wide).";
    const char* names[] = {"S", "N1", "N2", "N3", "N4", "N5", "D"};
    for (int i = 0; i < 7; ++i)
        s.nodes.push_back({names[i], Position{20.0 * i, 0.0}});
    for (std::uint32_t i = 0; i + 1 < 7; ++i)
        s.links.push_back({NodeId{i}, NodeId{i + 1}, 1});
    s.traffic.push_back({NodeId{0}, NodeId{6}, 100, 100, 1});
    s.strategy = ExpandingRing{1, 2, 7};
    s.timing.max_retries = 5;
    return s;
}

Scenario
make_random(std::uint32_t n, std::uint64_t seed)
{
    Scenario s;
    s.name = "random-" + std::to_string(n);
    s.comment = "Seeded random geometric graph on a 100x100 plane, radio range 40.";
    s.seed = seed;
    Rng rng(seed, 0x72616e646f6dULL);
    for (std::uint32_t i = 0; i < n; ++i)
        s.nodes.push_back({"R" + std::to_string(i), Position{rng.uniform(0, 100), rng.uniform(0, 100)}});
    for (std::uint32_t i = 0; i < n; ++i) {
        for (std::uint32_t j = i + 1; j < n; ++j) {
            const auto& a = *s.nodes[i].pos;
            const auto& b = *s.nodes[j].pos;
            if (std::hypot(a.x - b.x, a.y - b.y) <= 40.0)
                s.links.push_back({NodeId{i}, NodeId{j}, 1});
        }
    }
    const Tick interval = std::max<Tick>(100, 4 * 2 * static_cast<Tick>(n));
    s.traffic.push_back({NodeId{0}, NodeId{n - 1}, 100, interval, 3});
    return s;
}

} // namespace

std::vector<std::string>
builtin_names()
{
    return {"fig1", "fig1-tables", "ring-demo", "random-N"};
}

Scenario
builtin(std::string_view name, std::uint64_t seed)
{
    Scenario s;
    if (name == "fig1") {
        s = make_fig1();
    } else if (name == "fig1-tables") {
        s = make_fig1_tables();
    } else if (name == "ring-demo") {
        s = make_ring_demo();
    } else if (name.starts_with("random-")) {
        const auto digits = name.substr(7);
        std::uint32_t n = 0;
        auto [ptr, ec] = std::from_chars(digits.data(), digits.data() + digits.size(), n);
        if (ec != std::errc{} || ptr != digits.data() + digits.size() || n < 2 || n > 500)
            throw UnknownScenario("random-N needs 2 <= N <= 500, got '" + std::string(name) + "'");
        return make_random(n, seed);
    } else {
        throw UnknownScenario("unknown builtin scenario '" + std::string(name) + "'");
    }
    s.seed = seed;
    return s;
}

Scenario
resolve_scenario(const std::string& name_or_path, std::uint64_t seed)
{
    const bool looks_builtin = name_or_path == "fig1" || name_or_path == "fig1-tables" ||
                               name_or_path == "ring-demo" || name_or_path.starts_with("random-");
    if (looks_builtin && !std::ifstream(name_or_path))
        return builtin(name_or_path, seed);
    return load_scenario_file(name_or_path);
}

} // namespace manet
