#pragma once

// Overhead accounting. Every transmission is counted per directed link, so
// a broadcast heard by k neighbors costs k.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <tuple>
#include <utility>
#include <variant>
#include <vector>

#include "manet/protocol.hpp"

namespace manet {

struct DiscoveryRecord
{
    NodeId origin;
    NodeId dest;
    std::uint32_t round = 0;
    Tick started_at = 0;
    std::optional<Tick> resolved_at;
    bool failed = false;
    std::uint32_t hop_count = 0;
    std::vector<std::uint32_t> attempt_ttls;

    bool closed() const { return failed || resolved_at.has_value(); }
};

namespace metric {

struct Transmission
{
    PacketType type;
    NodeId from;
    NodeId to;
    /// Traffic round the packet belongs to (RREQ only, 0 otherwise).
    std::uint32_t round = 0;
};
struct RedundantRx
{
    NodeId at;
};
struct SuppressedForwards
{
    std::uint32_t count = 0;
};
struct Loss
{
    PacketType type;
};
struct LinkAbsent
{
    PacketType type;
};
struct DataDelivered
{
};
struct DataDropped
{
};
struct LateReply
{
};
struct LinkBoost
{
};
struct DiscoveryOpened
{
    NodeId origin;
    NodeId dest;
    std::uint32_t round = 0;
    Tick at = 0;
};
struct DiscoveryAttempt
{
    NodeId origin;
    NodeId dest;
    std::uint32_t ttl = 0;
};
struct DiscoveryClosed
{
    NodeId origin;
    NodeId dest;
    Tick at = 0;
    bool ok = false;
    std::uint32_t hop_count = 0;
};

} // namespace metric

using MetricEvent = std::variant<metric::Transmission,
                                 metric::RedundantRx,
                                 metric::SuppressedForwards,
                                 metric::Loss,
                                 metric::LinkAbsent,
                                 metric::DataDelivered,
                                 metric::DataDropped,
                                 metric::LateReply,
                                 metric::LinkBoost,
                                 metric::DiscoveryOpened,
                                 metric::DiscoveryAttempt,
                                 metric::DiscoveryClosed>;

struct MetricsReport
{
    std::uint64_t rreq_tx = 0;
    std::uint64_t rrep_tx = 0;
    std::uint64_t rerr_tx = 0;
    std::uint64_t hello_tx = 0;
    std::uint64_t data_tx = 0;
    std::uint64_t redundant_rreq_rx = 0;
    std::map<NodeId, std::uint64_t> per_node_rreq_tx;
    /// Receiving node -> redundant copies.
    std::map<NodeId, std::uint64_t> per_node_redundant_rx;
    std::vector<DiscoveryRecord> discoveries;
    std::uint64_t suppressed_forwards = 0;

    std::uint64_t losses = 0;
    std::uint64_t link_absent = 0;
    std::uint64_t data_delivered = 0;
    std::uint64_t data_dropped = 0;
    std::uint64_t late_replies = 0;
    std::uint64_t link_boosts = 0;
    std::map<std::uint32_t, std::uint64_t> per_round_rreq_tx;
    /// (round, from, to) -> RREQ transmissions.
    std::map<std::tuple<std::uint32_t, NodeId, NodeId>, std::uint64_t> per_link_rreq_tx;
    /// Non-periodic events were still pending when the horizon was reached.
    bool timed_out = false;

    std::uint64_t discoveries_ok() const;
    std::uint64_t discoveries_failed() const;
    /// Mean ticks from start to resolution over resolved discoveries; 0 if none.
    double mean_latency() const;
    std::uint64_t rreq_tx_in_round(std::uint32_t round) const;
    std::uint64_t rreq_tx_on(std::uint32_t round, NodeId from, NodeId to) const;
    std::optional<std::uint32_t> last_round() const;
};

void record(MetricsReport& report, const MetricEvent& event);

/// One metrics CSV row.
struct RunSummary
{
    std::string scenario;
    std::string strategy;
    std::uint64_t seed = 0;
    std::uint64_t rreq_tx = 0;
    std::uint64_t rrep_tx = 0;
    std::uint64_t rerr_tx = 0;
    std::uint64_t hello_tx = 0;
    std::uint64_t data_tx = 0;
    std::uint64_t redundant_rreq_rx = 0;
    std::uint64_t suppressed_forwards = 0;
    std::uint64_t discoveries_ok = 0;
    std::uint64_t discoveries_failed = 0;
    double mean_latency_ticks = 0.0;
    /// Only known when summarised from a live report.
    std::optional<std::uint32_t> last_round;
    std::optional<std::uint64_t> last_round_rreq_tx;

    bool operator==(const RunSummary&) const = default;
};

RunSummary summarize(const MetricsReport& report, std::string scenario, std::string strategy, std::uint64_t seed);

extern const char* const kMetricsCsvHeader;

void write_metrics_csv_header(std::ostream& os);
void write_metrics_csv_row(std::ostream& os, const RunSummary& row);
/// Reads a metrics CSV (header required). Throws ParseError naming the line.
std::vector<RunSummary> read_metrics_csv(std::istream& is, const std::string& source = "csv");

struct ComparisonRow
{
    RunSummary run;
    double success_rate = 0.0;
    /// baseline - this row; positive means this row saved transmissions.
    std::int64_t rreq_saved = 0;
    std::int64_t rrep_saved = 0;
    std::int64_t redundant_saved = 0;
    std::int64_t total_control_saved = 0;
    std::optional<std::int64_t> last_round_rreq_saved;
};

struct ComparisonTable
{
    /// Strategy label of the row the deltas are taken against.
    std::string baseline;
    std::vector<ComparisonRow> rows;
};

/// Deltas are taken against the first "flood" row, or the first row when
/// no flood run is present. Empty input throws EmptyComparison.
ComparisonTable compare(std::span<const RunSummary> runs);
ComparisonTable compare(std::span<const std::pair<std::string, MetricsReport>> reports);

void write_comparison_csv(std::ostream& os, const ComparisonTable& table);

/// Self-contained 800x400 SVG bar chart of rreq_tx per strategy.
std::string render_rreq_chart(const ComparisonTable& table, const std::string& title);

} // namespace manet
