#include "manet/metrics.hpp"

#include <algorithm>
#include <charconv>
#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

namespace manet {

std::uint64_t
MetricsReport::discoveries_ok() const
{
    return static_cast<std::uint64_t>(
      std::count_if(discoveries.begin(), discoveries.end(), [](const auto& d) { return d.resolved_at.has_value(); }));
}

std::uint64_t
MetricsReport::discoveries_failed() const
{
    return static_cast<std::uint64_t>(
      std::count_if(discoveries.begin(), discoveries.end(), [](const auto& d) { return d.failed; }));
}

double
MetricsReport::mean_latency() const
{
    double sum = 0.0;
    std::uint64_t n = 0;
    for (const auto& d : discoveries) {
        if (d.resolved_at) {
            sum += static_cast<double>(*d.resolved_at - d.started_at);
            ++n;
        }
    }
    return n == 0 ? 0.0 : sum / static_cast<double>(n);
}

std::uint64_t
MetricsReport::rreq_tx_in_round(std::uint32_t round) const
{
    auto it = per_round_rreq_tx.find(round);
    return it == per_round_rreq_tx.end() ? 0 : it->second;
}

std::uint64_t
MetricsReport::rreq_tx_on(std::uint32_t round, NodeId from, NodeId to) const
{
    auto it = per_link_rreq_tx.find({round, from, to});
    return it == per_link_rreq_tx.end() ? 0 : it->second;
}

std::optional<std::uint32_t>
MetricsReport::last_round() const
{
    std::optional<std::uint32_t> out;
    for (const auto& d : discoveries)
        out = std::max(out.value_or(0), d.round);
    return out;
}

namespace {

DiscoveryRecord*
open_discovery(MetricsReport& r, NodeId origin, NodeId dest)
{
    for (auto it = r.discoveries.rbegin(); it != r.discoveries.rend(); ++it) {
        if (it->origin == origin && it->dest == dest && !it->closed())
            return &*it;
    }
    return nullptr;
}

struct Recorder
{
    MetricsReport& r;

    void operator()(const metric::Transmission& t) const
    {
        switch (t.type) {
            case PacketType::Rreq:
                ++r.rreq_tx;
                ++r.per_node_rreq_tx[t.from];
                ++r.per_round_rreq_tx[t.round];
                ++r.per_link_rreq_tx[{t.round, t.from, t.to}];
                break;
            case PacketType::Rrep:
                ++r.rrep_tx;
                break;
            case PacketType::Rerr:
                ++r.rerr_tx;
                break;
            case PacketType::Hello:
                ++r.hello_tx;
                break;
            case PacketType::Data:
                ++r.data_tx;
                break;
        }
    }
    void operator()(const metric::RedundantRx& x) const
    {
        ++r.redundant_rreq_rx;
        ++r.per_node_redundant_rx[x.at];
    }
    void operator()(const metric::SuppressedForwards& s) const { r.suppressed_forwards += s.count; }
    void operator()(const metric::Loss&) const { ++r.losses; }
    void operator()(const metric::LinkAbsent&) const { ++r.link_absent; }
    void operator()(const metric::DataDelivered&) const { ++r.data_delivered; }
    void operator()(const metric::DataDropped&) const { ++r.data_dropped; }
    void operator()(const metric::LateReply&) const { ++r.late_replies; }
    void operator()(const metric::LinkBoost&) const { ++r.link_boosts; }
    void operator()(const metric::DiscoveryOpened& d) const
    {
        DiscoveryRecord rec;
        rec.origin = d.origin;
        rec.dest = d.dest;
        rec.round = d.round;
        rec.started_at = d.at;
        r.discoveries.push_back(std::move(rec));
    }
    void operator()(const metric::DiscoveryAttempt& d) const
    {
        if (auto* rec = open_discovery(r, d.origin, d.dest))
            rec->attempt_ttls.push_back(d.ttl);
    }
    void operator()(const metric::DiscoveryClosed& d) const
    {
        auto* rec = open_discovery(r, d.origin, d.dest);
        if (rec == nullptr)
            return;
        if (d.ok) {
            rec->resolved_at = d.at;
            rec->hop_count = d.hop_count;
        } else {
            rec->failed = true;
        }
    }
};

} // namespace

void
record(MetricsReport& report, const MetricEvent& event)
{
    std::visit(Recorder{report}, event);
}

RunSummary
summarize(const MetricsReport& report, std::string scenario, std::string strategy, std::uint64_t seed)
{
    RunSummary s;
    s.scenario = std::move(scenario);
    s.strategy = std::move(strategy);
    s.seed = seed;
    s.rreq_tx = report.rreq_tx;
    s.rrep_tx = report.rrep_tx;
    s.rerr_tx = report.rerr_tx;
    s.hello_tx = report.hello_tx;
    s.data_tx = report.data_tx;
    s.redundant_rreq_rx = report.redundant_rreq_rx;
    s.suppressed_forwards = report.suppressed_forwards;
    s.discoveries_ok = report.discoveries_ok();
    s.discoveries_failed = report.discoveries_failed();
    s.mean_latency_ticks = report.mean_latency();
    s.last_round = report.last_round();
    if (s.last_round)
        s.last_round_rreq_tx = report.rreq_tx_in_round(*s.last_round);
    return s;
}

const char* const kMetricsCsvHeader = "scenario,strategy,seed,rreq_tx,rrep_tx,rerr_tx,hello_tx,data_tx,redundant_rreq_rx,"
                                      "suppressed_forwards,discoveries_ok,discoveries_failed,mean_latency_ticks";

void
write_metrics_csv_header(std::ostream& os)
{
    os << kMetricsCsvHeader << '\n';
}

namespace {

std::string
fixed3(double v)
{
    std::ostringstream os;
    os << std::fixed << std::setprecision(3) << v;
    return os.str();
}

std::vector<std::string>
split_csv_line(const std::string& line)
{
    std::vector<std::string> out;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    out.push_back(cur);
    return out;
}

std::uint64_t
to_u64(const std::string& s, const std::string& where)
{
    std::uint64_t v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw ParseError(where, "expected an unsigned integer, got '" + s + "'");
    return v;
}

double
to_double(const std::string& s, const std::string& where)
{
    std::istringstream is(s);
    double v = 0;
    is >> v;
    if (is.fail() || !is.eof())
        throw ParseError(where, "expected a number, got '" + s + "'");
    return v;
}

} // namespace

void
write_metrics_csv_row(std::ostream& os, const RunSummary& r)
{
    os << r.scenario << ',' << r.strategy << ',' << r.seed << ',' << r.rreq_tx << ',' << r.rrep_tx << ',' << r.rerr_tx
       << ',' << r.hello_tx << ',' << r.data_tx << ',' << r.redundant_rreq_rx << ',' << r.suppressed_forwards << ','
       << r.discoveries_ok << ',' << r.discoveries_failed << ',' << fixed3(r.mean_latency_ticks) << '\n';
}

std::vector<RunSummary>
read_metrics_csv(std::istream& is, const std::string& source)
{
    std::vector<RunSummary> rows;
    std::string line;
    std::size_t lineno = 0;
    bool header_seen = false;
    while (std::getline(is, line)) {
        ++lineno;
        if (!line.empty() && line.back() == '\r')
            line.pop_back();
        if (line.empty())
            continue;
        const std::string where = source + ":" + std::to_string(lineno);
        if (!header_seen) {
            if (line != kMetricsCsvHeader)
                throw ParseError(where, "not a metrics CSV header");
            header_seen = true;
            continue;
        }
        auto f = split_csv_line(line);
        if (f.size() != 13)
            throw ParseError(where, "expected 13 columns, got " + std::to_string(f.size()));
        RunSummary r;
        r.scenario = f[0];
        r.strategy = f[1];
        r.seed = to_u64(f[2], where);
        r.rreq_tx = to_u64(f[3], where);
        r.rrep_tx = to_u64(f[4], where);
        r.rerr_tx = to_u64(f[5], where);
        r.hello_tx = to_u64(f[6], where);
        r.data_tx = to_u64(f[7], where);
        r.redundant_rreq_rx = to_u64(f[8], where);
        r.suppressed_forwards = to_u64(f[9], where);
        r.discoveries_ok = to_u64(f[10], where);
        r.discoveries_failed = to_u64(f[11], where);
        r.mean_latency_ticks = to_double(f[12], where);
        rows.push_back(std::move(r));
    }
    if (!header_seen)
        throw ParseError(source, "empty metrics CSV");
    return rows;
}

ComparisonTable
compare(std::span<const RunSummary> runs)
{
    if (runs.empty())
        throw EmptyComparison("nothing to compare");

    const auto base_it =
      std::find_if(runs.begin(), runs.end(), [](const RunSummary& r) { return r.strategy == "flood"; });
    const RunSummary& base = base_it != runs.end() ? *base_it : runs.front();

    auto diff = [](std::uint64_t a, std::uint64_t b) { return static_cast<std::int64_t>(a) - static_cast<std::int64_t>(b); };

    ComparisonTable table;
    table.baseline = base.strategy;
    for (const auto& r : runs) {
        ComparisonRow row;
        row.run = r;
        const auto total = r.discoveries_ok + r.discoveries_failed;
        row.success_rate = total == 0 ? 0.0 : static_cast<double>(r.discoveries_ok) / static_cast<double>(total);
        row.rreq_saved = diff(base.rreq_tx, r.rreq_tx);
        row.rrep_saved = diff(base.rrep_tx, r.rrep_tx);
        row.redundant_saved = diff(base.redundant_rreq_rx, r.redundant_rreq_rx);
        row.total_control_saved = diff(base.rreq_tx + base.rrep_tx + base.rerr_tx, r.rreq_tx + r.rrep_tx + r.rerr_tx);
        if (base.last_round_rreq_tx && r.last_round_rreq_tx)
            row.last_round_rreq_saved = diff(*base.last_round_rreq_tx, *r.last_round_rreq_tx);
        table.rows.push_back(std::move(row));
    }
    return table;
}

ComparisonTable
compare(std::span<const std::pair<std::string, MetricsReport>> reports)
{
    std::vector<RunSummary> runs;
    runs.reserve(reports.size());
    for (const auto& [label, report] : reports)
        runs.push_back(summarize(report, "", label, 0));
    return compare(runs);
}

void
write_comparison_csv(std::ostream& os, const ComparisonTable& table)
{
    os << "strategy,rreq_tx,rrep_tx,rerr_tx,hello_tx,data_tx,redundant_rreq_rx,suppressed_forwards,discoveries_ok,"
          "discoveries_failed,success_rate,mean_latency_ticks,last_round,last_round_rreq_tx,baseline,rreq_saved,"
          "rrep_saved,redundant_saved,control_saved,last_round_rreq_saved\n";
    auto opt = [](const auto& v) { return v ? std::to_string(*v) : std::string(); };
    for (const auto& row : table.rows) {
        const auto& r = row.run;
        os << r.strategy << ',' << r.rreq_tx << ',' << r.rrep_tx << ',' << r.rerr_tx << ',' << r.hello_tx << ','
           << r.data_tx << ',' << r.redundant_rreq_rx << ',' << r.suppressed_forwards << ',' << r.discoveries_ok << ','
           << r.discoveries_failed << ',' << fixed3(row.success_rate) << ',' << fixed3(r.mean_latency_ticks) << ','
           << opt(r.last_round) << ',' << opt(r.last_round_rreq_tx) << ',' << table.baseline << ',' << row.rreq_saved
           << ',' << row.rrep_saved << ',' << row.redundant_saved << ',' << row.total_control_saved << ','
           << opt(row.last_round_rreq_saved) << '\n';
    }
}

namespace {

std::string
xml_escape(const std::string& s)
{
    std::string out;
    for (char c : s) {
        switch (c) {
            case '&':
                out += "&amp;";
                break;
            case '<':
                out += "&lt;";
                break;
            case '>':
                out += "&gt;";
                break;
            case '"':
                out += "&quot;";
                break;
            default:
                out.push_back(c);
        }
    }
    return out;
}

} // namespace

std::string
render_rreq_chart(const ComparisonTable& table, const std::string& title)
{
    constexpr int width = 800;
    constexpr int height = 400;
    constexpr int left = 70;
    constexpr int right = 20;
    constexpr int top = 50;
    constexpr int bottom = 70;
    const int plot_w = width - left - right;
    const int plot_h = height - top - bottom;

    std::uint64_t peak = 1;
    for (const auto& row : table.rows)
        peak = std::max(peak, row.run.rreq_tx);

    std::ostringstream os;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"" << height
       << "\" viewBox=\"0 0 " << width << ' ' << height << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << width << "\" height=\"" << height << "\" fill=\"white\"/>\n";
    os << "<text x=\"" << width / 2 << "\" y=\"28\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"18\">"
       << xml_escape(title) << "</text>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top + plot_h << "\" x2=\"" << left + plot_w << "\" y2=\""
       << top + plot_h << "\" stroke=\"black\"/>\n";
    os << "<line x1=\"" << left << "\" y1=\"" << top << "\" x2=\"" << left << "\" y2=\"" << top + plot_h
       << "\" stroke=\"black\"/>\n";
    os << "<text x=\"18\" y=\"" << top + plot_h / 2 << "\" transform=\"rotate(-90 18 " << top + plot_h / 2
       << ")\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"13\">RREQ transmissions</text>\n";

    const auto n = static_cast<int>(table.rows.size());
    const int slot = n == 0 ? plot_w : plot_w / n;
    const int bar = std::max(4, slot * 3 / 5);
    static constexpr const char* palette[] = {"#4e79a7", "#f28e2b", "#e15759", "#76b7b2", "#59a14f", "#edc948"};
    for (int i = 0; i < n; ++i) {
        const auto& r = table.rows[static_cast<std::size_t>(i)].run;
        const int h = static_cast<int>(static_cast<double>(r.rreq_tx) / static_cast<double>(peak) * plot_h);
        const int x = left + i * slot + (slot - bar) / 2;
        const int y = top + plot_h - h;
        os << "<rect x=\"" << x << "\" y=\"" << y << "\" width=\"" << bar << "\" height=\"" << h << "\" fill=\""
           << palette[static_cast<std::size_t>(i) % std::size(palette)] << "\"/>\n";
        os << "<text x=\"" << x + bar / 2 << "\" y=\"" << y - 6
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << r.rreq_tx << "</text>\n";
        os << "<text x=\"" << x + bar / 2 << "\" y=\"" << top + plot_h + 20
           << "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" << xml_escape(r.strategy)
           << "</text>\n";
    }
    os << "</svg>\n";
    return os.str();
}

} // namespace manet
