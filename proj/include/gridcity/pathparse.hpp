#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "gridcity/routing.hpp"

namespace gridcity::pathparse {

struct Diagnostic {
    size_t position = 0;  // byte offset into the scored text
    std::string issue;
};

struct ParsedPath {
    std::vector<PathStep> steps;
    std::vector<Diagnostic> diagnostics;  // tolerated irregularities / stop reason
    bool complete = false;                // false when parsing stopped early
};

/// Extract ordered (road, direction, length) steps from free-form text.
/// The grammar is a deliberate superset of the generation templates:
/// go/head/along verb variants, case-insensitive directions, km/kilometers
/// or meter units (lengths normalized to km, default km when absent).
/// Parsing stops at the first unintelligible clause; canonical template
/// text always parses completely with no diagnostics.
ParsedPath parse_path(const std::string& text);

struct RelationalAnswer {
    std::optional<int64_t> distance_m;
    std::optional<double> azimuth_deg;
};

/// Extract meters and/or degrees from a relational answer; "X km" is
/// normalized to meters. Throws no-numeric-content when neither a distance
/// nor an azimuth can be found.
RelationalAnswer parse_relational_answer(const std::string& text);

}  // namespace gridcity::pathparse
