#include "manet/cli.hpp"

#include <cstdio>
#include <fstream>
#include <future>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "manet/engine.hpp"
#include "manet/error.hpp"
#include "manet/metrics.hpp"
#include "manet/scenario_io.hpp"

namespace manet {

namespace {

class UsageError : public std::runtime_error
{
  public:
    using std::runtime_error::runtime_error;
};

struct Overrides
{
    std::string scenario;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint32_t> rounds;
    std::optional<double> alpha;
    std::optional<double> threshold;
    std::optional<std::uint32_t> warmup;
    std::optional<std::string> mode;

    bool touches_connectivity() const { return alpha || threshold || warmup || mode; }
};

void
add_common(CLI::App& cmd, Overrides& o)
{
    cmd.add_option("--scenario", o.scenario, "Builtin name or scenario JSON path")->required();
    cmd.add_option("--seed", o.seed, "Run seed (also reshapes random-N)");
    cmd.add_option("--rounds", o.rounds, "Number of traffic rounds for every flow")->check(CLI::PositiveNumber);
    cmd.add_option("--alpha", o.alpha, "Connectivity EMA smoothing factor");
    cmd.add_option("--threshold", o.threshold, "Connectivity forwarding threshold");
    cmd.add_option("--warmup", o.warmup, "Attempts per link before filtering starts");
    cmd.add_option("--mode", o.mode, "Connectivity index mode")->check(CLI::IsMember({"raw", "ema", "blend"}));
}

Scenario
load(const Overrides& o)
{
    Scenario s = resolve_scenario(o.scenario, o.seed.value_or(1));
    if (o.seed)
        s.seed = *o.seed;
    if (o.rounds) {
        for (auto& t : s.traffic)
            t.rounds = *o.rounds;
    }
    return s;
}

ConnectivityConfig
connectivity_config(const Scenario& s, const Overrides& o)
{
    ConnectivityConfig c;
    if (const auto* conn = std::get_if<Connectivity>(&s.strategy))
        c = conn->config;
    if (o.alpha)
        c.alpha = *o.alpha;
    if (o.threshold)
        c.threshold = *o.threshold;
    if (o.warmup)
        c.warmup = *o.warmup;
    if (o.mode)
        c.mode = *index_mode_from_string(*o.mode);
    return c;
}

/// Scenario with `label` (or the scenario's own strategy when empty) and
/// the connectivity overrides applied.
Scenario
with_strategy(Scenario s, const std::string& label, const Overrides& o)
{
    const auto config = connectivity_config(s, o);
    if (!label.empty())
        s.strategy = parse_strategy(label, config);
    else if (auto* conn = std::get_if<Connectivity>(&s.strategy))
        conn->config = config;
    s.validate();
    return s;
}

std::ofstream
open_output(const std::string& path)
{
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw std::runtime_error("cannot open '" + path + "' for writing");
    return f;
}

void
print_summary(std::ostream& out, const Engine& engine, const MetricsReport& report)
{
    const auto& s = engine.scenario();
    out << "scenario " << s.name << "  strategy " << strategy_label(s.strategy) << "  seed " << s.seed << "\n";
    out << "transmissions: rreq " << report.rreq_tx << ", rrep " << report.rrep_tx << ", rerr " << report.rerr_tx
        << ", hello " << report.hello_tx << ", data " << report.data_tx << "\n";
    out << "redundant rreq receptions " << report.redundant_rreq_rx << ", suppressed forwards "
        << report.suppressed_forwards << "\n";
    out << "discoveries: " << report.discoveries_ok() << " ok, " << report.discoveries_failed() << " failed, mean latency "
        << std::fixed << std::setprecision(3) << report.mean_latency() << " ticks\n";
    out << "data: " << report.data_delivered << " delivered, " << report.data_dropped << " dropped\n";
    if (report.timed_out)
        out << "warning: events were still pending at the horizon\n";

    bool header = false;
    for (std::uint32_t i = 0; i < s.node_count(); ++i) {
        const auto& node = engine.node(NodeId{i});
        for (const auto& [key, rec] : node.state().connectivity.records()) {
            if (!header) {
                out << "connectivity index:\n";
                header = true;
            }
            out << "  " << s.node_name(NodeId{i}) << " -> " << s.node_name(key.neighbor);
            if (!node.state().connectivity.per_neighbor())
                out << " (dest " << s.node_name(key.dest) << ")";
            out << "  mu " << std::setprecision(6) << rec.mu << "  " << rec.successes << "/" << rec.attempts << "\n";
        }
    }
    out.unsetf(std::ios::floatfield);
}

int
cmd_list(std::ostream& out)
{
    for (const auto& name : builtin_names()) {
        const auto s = name == "random-N" ? builtin("random-12") : builtin(name);
        out << name << "\t" << s.comment << "\n";
    }
    return kExitOk;
}

int
cmd_show(const Overrides& o, const std::string& strategy, std::ostream& out)
{
    out << emit_scenario(with_strategy(load(o), strategy, o));
    return kExitOk;
}

int
cmd_run(const Overrides& o,
        const std::string& strategy,
        const std::string& out_path,
        const std::string& trace_path,
        std::ostream& out)
{
    const Scenario s = with_strategy(load(o), strategy, o);
    std::ofstream trace_file;
    if (!trace_path.empty())
        trace_file = open_output(trace_path);

    Engine engine(s, trace_path.empty() ? nullptr : &trace_file);
    const auto report = engine.run();
    const auto row = summarize(report, s.name, strategy_label(s.strategy), s.seed);

    print_summary(out, engine, report);
    if (out_path.empty()) {
        out << "\n";
        write_metrics_csv_header(out);
        write_metrics_csv_row(out, row);
    } else {
        auto f = open_output(out_path);
        write_metrics_csv_header(f);
        write_metrics_csv_row(f, row);
    }
    return kExitOk;
}

int
cmd_trace(const Overrides& o, const std::string& strategy, const std::string& out_path, std::ostream& out)
{
    const Scenario s = with_strategy(load(o), strategy, o);
    if (out_path.empty()) {
        run(s, &out);
    } else {
        auto f = open_output(out_path);
        run(s, &f);
    }
    return kExitOk;
}

int
cmd_compare(const Overrides& o,
            const std::vector<std::string>& strategies,
            const std::vector<std::string>& from_csv,
            const std::string& out_path,
            const std::string& svg_path,
            std::ostream& out)
{
    std::vector<RunSummary> rows;
    std::string title;
    if (!from_csv.empty()) {
        for (const auto& path : from_csv) {
            std::ifstream f(path);
            if (!f)
                throw ParseError(path, "cannot open metrics CSV");
            auto part = read_metrics_csv(f, path);
            rows.insert(rows.end(), part.begin(), part.end());
        }
        title = rows.empty() ? std::string("rreq_tx") : rows.front().scenario;
    } else {
        const Scenario base = load(o);
        bool any_connectivity = false;
        std::vector<Scenario> variants;
        for (const auto& label : strategies) {
            variants.push_back(with_strategy(base, label, o));
            any_connectivity = any_connectivity || std::holds_alternative<Connectivity>(variants.back().strategy);
        }
        if (o.touches_connectivity() && !any_connectivity)
            throw UsageError("--alpha/--threshold/--warmup/--mode need a connectivity strategy");

        std::vector<std::future<RunSummary>> jobs;
        for (const auto& v : variants) {
            jobs.push_back(std::async(std::launch::async, [v] {
                return summarize(run(v), v.name, strategy_label(v.strategy), v.seed);
            }));
        }
        for (auto& j : jobs)
            rows.push_back(j.get());
        title = base.name;
    }

    const auto table = compare(rows);
    if (out_path.empty()) {
        write_comparison_csv(out, table);
    } else {
        auto f = open_output(out_path);
        write_comparison_csv(f, table);
    }
    if (!svg_path.empty()) {
        auto f = open_output(svg_path);
        f << render_rreq_chart(table, title);
    }
    return kExitOk;
}

} // namespace

int
cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Discrete-event AODV simulator with RREQ suppression strategies", "manetsim"};
    app.require_subcommand(1);

    Overrides o;
    std::string strategy;
    std::string out_path;
    std::string trace_path;
    std::string svg_path;
    std::vector<std::string> strategies;
    std::vector<std::string> from_csv;

    auto* list = app.add_subcommand("list", "List builtin scenarios");

    auto* show = app.add_subcommand("show", "Print a scenario as canonical JSON");
    add_common(*show, o);
    show->add_option("--strategy", strategy, "Strategy label");

    auto* run_cmd = app.add_subcommand("run", "Run one scenario");
    add_common(*run_cmd, o);
    run_cmd->add_option("--strategy", strategy, "Strategy label (default: the scenario's own)");
    run_cmd->add_option("--out", out_path, "Metrics CSV path (default: stdout)");
    run_cmd->add_option("--trace", trace_path, "Event trace TSV path");

    auto* trace_cmd = app.add_subcommand("trace", "Run one scenario and print its event trace");
    add_common(*trace_cmd, o);
    trace_cmd->add_option("--strategy", strategy, "Strategy label");
    trace_cmd->add_option("--out", out_path, "Trace TSV path (default: stdout)");

    auto* cmp = app.add_subcommand("compare", "Compare strategies on one scenario");
    cmp->add_option("--scenario", o.scenario, "Builtin name or scenario JSON path");
    cmp->add_option("--seed", o.seed, "Run seed");
    cmp->add_option("--rounds", o.rounds, "Number of traffic rounds")->check(CLI::PositiveNumber);
    cmp->add_option("--alpha", o.alpha, "Connectivity EMA smoothing factor");
    cmp->add_option("--threshold", o.threshold, "Connectivity forwarding threshold");
    cmp->add_option("--warmup", o.warmup, "Attempts per link before filtering starts");
    cmp->add_option("--mode", o.mode, "Connectivity index mode")->check(CLI::IsMember({"raw", "ema", "blend"}));
    auto* strat_opt = cmp->add_option("--strategies", strategies, "Comma-separated strategy labels")->delimiter(',');
    auto* csv_opt = cmp->add_option("--from-csv", from_csv, "Compare rows from existing metrics CSV files");
    strat_opt->excludes(csv_opt);
    cmp->add_option("--out", out_path, "Comparison CSV path (default: stdout)");
    cmp->add_option("--svg", svg_path, "Write an rreq_tx bar chart here");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    }

    try {
        if (list->parsed())
            return cmd_list(out);
        if (cmp->parsed()) {
            if (from_csv.empty()) {
                if (strategies.empty())
                    throw UsageError("compare needs --strategies or --from-csv");
                if (o.scenario.empty())
                    throw UsageError("compare --strategies needs --scenario");
            } else if (!o.scenario.empty() || o.rounds || o.seed || o.touches_connectivity()) {
                throw UsageError("--from-csv cannot be combined with scenario options");
            }
            return cmd_compare(o, strategies, from_csv, out_path, svg_path, out);
        }

        if (o.touches_connectivity()) {
            const Scenario s = load(o);
            const bool conn = strategy.empty() ? std::holds_alternative<Connectivity>(s.strategy)
                                               : strategy == "connectivity";
            if (!conn)
                throw UsageError("--alpha/--threshold/--warmup/--mode need the connectivity strategy");
        }
        if (show->parsed())
            return cmd_show(o, strategy, out);
        if (run_cmd->parsed())
            return cmd_run(o, strategy, out_path, trace_path, out);
        if (trace_cmd->parsed())
            return cmd_trace(o, strategy, out_path, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const ParseError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const ValidationError& e) {
        err << "invalid scenario: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const ConfigError& e) {
        err << "invalid configuration: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const UnknownScenario& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const EmptyComparison& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "runtime failure: " << e.what() << "\n";
        return kExitRuntime;
    }
    return kExitInvalid;
}

int
cli_main(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    std::vector<const char*> argv{"manetsim"};
    for (const auto& a : args)
        argv.push_back(a.c_str());
    return cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace manet
