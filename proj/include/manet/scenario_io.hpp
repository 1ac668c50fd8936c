#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "manet/scenario.hpp"

namespace manet {

/// Parses a schema-1 scenario document. Structural problems (wrong type,
/// missing or unknown field) throw ParseError carrying the JSON path;
/// semantic ones (dangling node name, overlapping rounds, ...) throw
/// ValidationError.
Scenario parse_scenario(std::string_view text);

/// Canonical JSON for a scenario; every field is written out, so
/// parse_scenario(emit_scenario(s)) == s.
std::string emit_scenario(const Scenario& scenario);

Scenario load_scenario_file(const std::string& path);

/// Built-in scenarios: fig1, fig1-tables, ring-demo and random-N (N nodes,
/// e.g. random-12). `seed` only changes random-N's geometry and the run seed.
Scenario builtin(std::string_view name, std::uint64_t seed = 1);
std::vector<std::string> builtin_names();

/// A builtin name, or else a path to a scenario file.
Scenario resolve_scenario(const std::string& name_or_path, std::uint64_t seed = 1);

} // namespace manet
