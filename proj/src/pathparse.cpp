#include "gridcity/pathparse.hpp"

#include <cctype>
#include <regex>

#include "gridcity/format.hpp"

namespace gridcity::pathparse {

namespace {

// Two clause shapes cover the template family and common LLM phrasings:
//   A: "go north on r_3 for 3km"        (verb dir on road for len)
//   B: "go along r_3 heading north for 3km"  (along road heading dir for len)
const std::regex& step_regex() {
    static const std::regex re(
        R"((?:go|goes|going|head|heads|heading|travel|travels|walk|walks|move|moves|proceed|proceeds|continue|continues|drive|drives)\s+(?:straight\s+)?)"
        R"((north|south|east|west)(?:ward|wards)?\s+(?:on|along|down|up)\s+(r_?\d+)\s+for\s+(\d+(?:\.\d+)?)\s*(km|kilometers?|kilometres?|meters?|metres?|m)?\b)"
        R"(|(?:(?:go|goes|going|head|heads|travel|travels|walk|walks|move|moves|proceed|proceeds|continue|continues|drive|drives)\s+)?)"
        R"(along\s+(r_?\d+)\s+(?:heading|going|facing|towards?)\s+(north|south|east|west)(?:ward|wards)?\s+for\s+(\d+(?:\.\d+)?)\s*(km|kilometers?|kilometres?|meters?|metres?|m)?\b)",
        std::regex::icase | std::regex::optimize);
    return re;
}

// Connective filler tolerated between step clauses.
const std::regex& glue_regex() {
    static const std::regex re(
        R"([\s,.;:]*(?:(?:then|and|next|after|that|first|second|third|finally|afterwards|lastly)\b[\s,.;:]*)*)",
        std::regex::icase | std::regex::optimize);
    return re;
}

// Recognized trajectory terminators ("and you will arrive at p_j.").
const std::regex& arrival_regex() {
    static const std::regex re(
        R"([\s,.;:]*(?:and\s+)?(?:(?:you\s+will|you'll)\s+)?(?:arrive|arrives|arriving)\s+at\s+[A-Za-z0-9_]+[\s.,!]*)"
        R"(|[\s,.;:]*to\s+reach\s+[A-Za-z0-9_]+[\s.,!]*)",
        std::regex::icase | std::regex::optimize);
    return re;
}

std::string lower(std::string s) {
    for (char& c : s) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return s;
}

std::string normalize_road_id(const std::string& raw) {
    std::string id = lower(raw);
    if (id.size() > 1 && id[1] != '_') id.insert(1, "_");
    return id;
}

bool is_glue(const std::string& s) { return std::regex_match(s, glue_regex()); }

bool is_terminator(const std::string& s) {
    return is_glue(s) || std::regex_match(s, arrival_regex());
}

}  // namespace

ParsedPath parse_path(const std::string& text) {
    ParsedPath out;
    auto begin = std::sregex_iterator(text.begin(), text.end(), step_regex());
    auto end = std::sregex_iterator();

    size_t consumed = 0;   // end offset of the last accepted clause
    bool stopped = false;
    for (auto it = begin; it != end && !stopped; ++it) {
        const std::smatch& m = *it;
        size_t pos = static_cast<size_t>(m.position(0));

        if (!out.steps.empty()) {
            std::string gap = text.substr(consumed, pos - consumed);
            if (!is_glue(gap)) {
                out.diagnostics.push_back({consumed, "unintelligible clause before next step"});
                stopped = true;
                break;
            }
        }

        bool form_a = m[1].matched;
        std::string dir_raw = form_a ? m[1].str() : m[6].str();
        std::string road_raw = form_a ? m[2].str() : m[5].str();
        std::string len_raw = form_a ? m[3].str() : m[7].str();
        std::string unit_raw = lower(form_a ? m[4].str() : m[8].str());

        double length = std::stod(len_raw);
        if (unit_raw.empty()) {
            out.diagnostics.push_back({pos, "missing length unit, assuming km"});
        } else if (unit_raw[0] == 'm') {
            length /= 1000.0;
            out.diagnostics.push_back({pos, "length given in meters, converted to km"});
        }
        if (!(length > 0.0)) {
            out.diagnostics.push_back({pos, "non-positive step length"});
            stopped = true;
            break;
        }

        std::string road = normalize_road_id(road_raw);
        if (road != lower(road_raw))
            out.diagnostics.push_back({pos, "road id normalized to underscore form"});

        PathStep step;
        step.road = road;
        step.direction = *direction_from_name(dir_raw);
        step.length = length;
        out.steps.push_back(std::move(step));
        consumed = pos + static_cast<size_t>(m.length(0));
    }

    if (stopped) {
        out.complete = false;
    } else if (out.steps.empty()) {
        out.complete = false;
        out.diagnostics.push_back({0, "no step clauses found"});
    } else {
        std::string tail = text.substr(consumed);
        out.complete = is_terminator(tail);
        if (!out.complete)
            out.diagnostics.push_back({consumed, "unparsed trailing text"});
    }
    return out;
}

RelationalAnswer parse_relational_answer(const std::string& text) {
    static const std::regex re(
        R"((-?\d+(?:\.\d+)?)\s*(kilometers?|kilometres?|km|meters?|metres?|m|degrees?)\b)",
        std::regex::icase | std::regex::optimize);

    RelationalAnswer answer;
    for (auto it = std::sregex_iterator(text.begin(), text.end(), re);
         it != std::sregex_iterator(); ++it) {
        double value = std::stod((*it)[1].str());
        std::string unit = lower((*it)[2].str());
        if (unit[0] == 'd') {
            if (!answer.azimuth_deg) answer.azimuth_deg = value;
        } else if (unit[0] == 'k') {
            if (!answer.distance_m) answer.distance_m = round_half_up(value * 1000.0);
        } else {
            if (!answer.distance_m) answer.distance_m = static_cast<int64_t>(std::llround(value));
        }
    }
    if (!answer.distance_m && !answer.azimuth_deg)
        fail("no-numeric-content", "no distance or azimuth found in answer text");
    return answer;
}

}  // namespace gridcity::pathparse
