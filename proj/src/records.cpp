#include "gridcity/records.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "gridcity/format.hpp"

namespace gridcity::records {

namespace {

std::string coord_component(double v) {
    if (is_integral_value(v)) return std::to_string(static_cast<int64_t>(v));
    return fmt_trim(v, 6);
}

[[noreturn]] void line_fail(const std::string& path, size_t line_no, const std::string& what) {
    fail("schema-violation", path + ":" + std::to_string(line_no) + ": " + what);
}

nlohmann::json parse_line(const std::string& path, size_t line_no, const std::string& line) {
    try {
        return nlohmann::json::parse(line);
    } catch (const std::exception& e) {
        line_fail(path, line_no, std::string("invalid JSON: ") + e.what());
    }
}

PathStep step_from_json(const nlohmann::json& js) {
    PathStep step;
    step.road = js.at("road").get<std::string>();
    auto dir = direction_from_name(js.at("dir").get<std::string>());
    if (!dir) throw std::runtime_error("bad direction '" + js.at("dir").get<std::string>() + "'");
    step.direction = *dir;
    step.length = js.at("len").get<double>();
    return step;
}

template <typename Fn>
void for_each_line(const std::string& path, Fn&& fn) {
    std::ifstream in(path);
    if (!in) fail("io-failure", "cannot open '" + path + "'");
    std::string line;
    size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        fn(line_no, line);
    }
}

}  // namespace

std::string coordinate_json(Coordinate c) {
    return "[" + coord_component(c.x) + ", " + coord_component(c.y) + "]";
}

std::string step_json(const PathStep& s) {
    std::string out = "{\"road\": \"" + s.road + "\", \"dir\": \"";
    out += direction_name(s.direction);
    out += "\", \"len\": ";
    out += is_integral_value(s.length) ? std::to_string(static_cast<int64_t>(s.length))
                                       : fmt_trim(s.length, 6);
    out += "}";
    return out;
}

std::string relational_line(const datagen::RelationalSample& s, std::string_view split) {
    std::string out = "{\"text\": \"";
    json_escape_to(out, s.text);
    out += "\", \"meta\": {\"id\": \"" + s.a + "|" + s.b + "|" + std::string(form_name(s.form));
    out += "\", \"a\": \"" + s.a + "\", \"b\": \"" + s.b + "\"";
    out += ", \"distance_m\": " + std::to_string(s.distance_m);
    out += ", \"azimuth_deg\": " + fmt_fixed(s.azimuth_deg, 2);
    out += ", \"form\": \"" + std::string(form_name(s.form)) + "\"";
    out += ", \"split\": \"" + std::string(split) + "\"}}";
    return out;
}

std::string trajectory_line(const GridWorld& world, const datagen::TrajectorySample& s,
                            std::string_view split) {
    const Trajectory& t = s.trajectory;
    std::string out = "{\"text\": \"";
    json_escape_to(out, s.text);
    out += "\", \"meta\": {\"id\": \"" + t.start + "|" + t.end + "|" +
           std::string(form_name(s.form));
    out += "\", \"start\": \"" + t.start + "\", \"end\": \"" + t.end + "\"";
    out += ", \"start_xy\": " + coordinate_json(world.poi(t.start).position);
    out += ", \"end_xy\": " + coordinate_json(world.poi(t.end).position);
    out += ", \"steps\": [";
    for (size_t i = 0; i < t.steps.size(); ++i) {
        if (i > 0) out += ", ";
        out += step_json(t.steps[i]);
    }
    out += "], \"cost\": " + fmt_fixed(t.cost, 6);
    out += ", \"form\": \"" + std::string(form_name(s.form)) + "\"";
    out += ", \"split\": \"" + std::string(split) + "\"}}";
    return out;
}

std::string region_line(const datagen::RegionQASample& s, size_t index) {
    char idbuf[24];
    std::snprintf(idbuf, sizeof(idbuf), "reg_%06zu", index);
    std::string out = "{\"text\": \"";
    json_escape_to(out, s.text);
    out += "\", \"meta\": {\"id\": \"";
    out += idbuf;
    out += "\", \"kind\": \"";
    if (const auto* circle = std::get_if<datagen::CircleRegion>(&s.region)) {
        out += "circle\", \"center\": \"" + circle->center + "\", \"radius_km\": " +
               fmt_trim(circle->radius_km, 1);
    } else {
        const auto& tri = std::get<datagen::TriangleRegion>(s.region);
        out += "triangle\", \"a\": \"" + tri.a + "\", \"b\": \"" + tri.b + "\", \"c\": \"" +
               tri.c + "\"";
    }
    out += ", \"query\": \"" + s.query + "\"";
    out += ", \"label\": \"" + std::string(s.label ? "yes" : "no") + "\"";
    out += ", \"split\": \"" + s.split + "\"}}";
    return out;
}

std::string step_target_line(const datagen::StepProbeTarget& t, std::string_view split) {
    std::string out = "{\"text\": \"";
    json_escape_to(out, t.prefix_text);
    out += "\", \"meta\": {\"id\": \"" + t.traj_id + "#" + std::to_string(t.step);
    out += "\", \"traj\": \"" + t.traj_id + "\", \"step\": " + std::to_string(t.step);
    out += ", \"target\": " + coordinate_json(t.position);
    out += ", \"split\": \"" + std::string(split) + "\"}}";
    return out;
}

std::string perturbed_line(const GridWorld& world, const Trajectory& trajectory,
                           std::string_view traj_id, const perturb::PerturbedCase& c,
                           const std::string& prefix_text) {
    std::string out = "{\"text\": \"";
    json_escape_to(out, prefix_text);
    out += "\", \"meta\": {\"id\": \"" + std::string(traj_id) + "|" +
           std::string(perturb::kind_name(c.spec.kind));
    out += "\", \"traj\": \"" + std::string(traj_id) + "\"";
    out += ", \"kind\": \"" + std::string(perturb::kind_name(c.spec.kind)) + "\"";
    out += ", \"step_index\": " + std::to_string(c.spec.step_index);
    out += ", \"original\": " + step_json(c.spec.original);
    out += ", \"replacement\": " + step_json(c.spec.replacement);
    out += ", \"p_perturb\": " + coordinate_json(c.spec.p_perturb);
    out += ", \"p_target\": " + coordinate_json(c.spec.p_target);
    out += ", \"prefix_steps\": [";
    for (size_t i = 0; i < c.prefix.size(); ++i) {
        if (i > 0) out += ", ";
        out += step_json(c.prefix[i]);
    }
    out += "], \"start\": \"" + trajectory.start + "\", \"end\": \"" + trajectory.end + "\"";
    out += ", \"start_xy\": " + coordinate_json(world.poi(trajectory.start).position);
    out += ", \"end_xy\": " + coordinate_json(world.poi(trajectory.end).position);
    out += "}}";
    return out;
}

std::vector<TruthCase> read_truth_cases(const std::string& path) {
    std::vector<TruthCase> cases;
    for_each_line(path, [&](size_t line_no, const std::string& line) {
        nlohmann::json js = parse_line(path, line_no, line);
        try {
            const auto& meta = js.at("meta");
            TruthCase tc;
            tc.id = meta.at("id").get<std::string>();
            tc.trajectory.start = meta.at("start").get<std::string>();
            tc.trajectory.end = meta.at("end").get<std::string>();
            tc.trajectory.cost = meta.value("cost", 0.0);
            for (const auto& step : meta.at("steps"))
                tc.trajectory.steps.push_back(step_from_json(step));
            cases.push_back(std::move(tc));
        } catch (const std::exception& e) {
            line_fail(path, line_no, e.what());
        }
    });
    return cases;
}

std::vector<PerturbedTruth> read_perturbed_cases(const std::string& path) {
    std::vector<PerturbedTruth> cases;
    for_each_line(path, [&](size_t line_no, const std::string& line) {
        nlohmann::json js = parse_line(path, line_no, line);
        try {
            const auto& meta = js.at("meta");
            PerturbedTruth pt;
            pt.id = meta.at("id").get<std::string>();
            pt.start = meta.at("start").get<std::string>();
            pt.end = meta.at("end").get<std::string>();
            for (const auto& step : meta.at("prefix_steps"))
                pt.prefix.push_back(step_from_json(step));
            cases.push_back(std::move(pt));
        } catch (const std::exception& e) {
            line_fail(path, line_no, e.what());
        }
    });
    return cases;
}

std::unordered_map<std::string, std::string> read_predictions(const std::string& path) {
    std::unordered_map<std::string, std::string> preds;
    for_each_line(path, [&](size_t line_no, const std::string& line) {
        nlohmann::json js = parse_line(path, line_no, line);
        try {
            std::string id = js.at("id").get<std::string>();
            if (!preds.emplace(id, js.at("text").get<std::string>()).second)
                line_fail(path, line_no, "duplicate prediction id '" + id + "'");
        } catch (const Error&) {
            throw;
        } catch (const std::exception& e) {
            line_fail(path, line_no, e.what());
        }
    });
    return preds;
}

std::vector<probe::HiddenVectorRecord> read_hidden_vectors(const std::string& path) {
    std::vector<probe::HiddenVectorRecord> recs;
    for_each_line(path, [&](size_t line_no, const std::string& line) {
        nlohmann::json js = parse_line(path, line_no, line);
        try {
            probe::HiddenVectorRecord rec;
            rec.id = js.at("id").get<std::string>();
            if (js.contains("step") && !js.at("step").is_null())
                rec.step = js.at("step").get<int>();
            rec.vec = js.at("vec").get<std::vector<double>>();
            if (js.contains("target") && !js.at("target").is_null())
                rec.target = js.at("target").get<std::vector<double>>();
            recs.push_back(std::move(rec));
        } catch (const std::exception& e) {
            line_fail(path, line_no, e.what());
        }
    });
    return recs;
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail("io-failure", "cannot open '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_text_file(const std::string& path, std::string_view content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) fail("io-failure", "cannot open '" + path + "' for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) fail("io-failure", "failed writing '" + path + "'");
}

struct LineWriter::Impl {
    std::string path;
    std::ofstream out;
    std::string buffer;
    size_t lines = 0;

    void flush() {
        out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
        if (!out) fail("io-failure", "failed writing '" + path + "'");
        buffer.clear();
    }
};

LineWriter::LineWriter(const std::string& path) : impl_(std::make_unique<Impl>()) {
    impl_->path = path;
    impl_->out.open(path, std::ios::binary);
    if (!impl_->out) fail("io-failure", "cannot open '" + path + "' for writing");
    impl_->buffer.reserve(1 << 22);
}

LineWriter::~LineWriter() {
    if (impl_ && impl_->out.is_open()) {
        impl_->flush();
        impl_->out.close();
    }
}

void LineWriter::line(std::string_view text) {
    impl_->buffer += text;
    impl_->buffer += '\n';
    ++impl_->lines;
    if (impl_->buffer.size() >= (1 << 22) - 4096) impl_->flush();
}

size_t LineWriter::lines_written() const { return impl_->lines; }

void LineWriter::close() {
    if (impl_->out.is_open()) {
        impl_->flush();
        impl_->out.close();
        if (!impl_->out) fail("io-failure", "failed closing '" + impl_->path + "'");
    }
}

}  // namespace gridcity::records
