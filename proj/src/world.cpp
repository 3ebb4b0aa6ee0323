#include "gridcity/world.hpp"

#include <cmath>
#include <numbers>

#include <nlohmann/json.hpp>

#include "gridcity/format.hpp"
#include "gridcity/rng.hpp"

namespace gridcity {

void WorldConfig::validate() const {
    if (grid_size < 2)
        fail("configuration-invalid", "grid_size must be at least 2");
    if (n_poi < 1 || n_poi > lattice_points())
        fail("configuration-invalid",
             "n_poi must be in [1, " + std::to_string(lattice_points()) + "]");
    if (!(weight_min > 0.0))
        fail("configuration-invalid", "weight_range minimum must be positive");
    if (!(weight_min <= weight_max))
        fail("configuration-invalid", "weight_range must satisfy min <= max");
}

double euclidean(Coordinate a, Coordinate b) {
    return std::hypot(b.x - a.x, b.y - a.y);
}

double azimuth_degrees(Coordinate from, Coordinate to) {
    double dx = to.x - from.x;
    double dy = to.y - from.y;
    if (dx == 0.0 && dy == 0.0)
        fail("coincident-points", "azimuth undefined for identical positions");
    // atan2(east, north): 0 = due north, 90 = due east, clockwise positive.
    double deg = std::atan2(dx, dy) * 180.0 / std::numbers::pi;
    if (deg <= -180.0) deg += 360.0;
    return deg;
}

GridWorld GridWorld::build(const WorldConfig& config) {
    config.validate();
    GridWorld world;
    world.config_ = config;

    const int g = config.grid_size;
    world.roads_.reserve(2 * (g + 1));
    RngStream weights(config.seed, "road-weights");
    for (int y = 0; y <= g; ++y) {
        Road r;
        r.id = "r_" + std::to_string(y + 1);
        r.orientation = Orientation::horizontal;
        r.offset = y;
        r.weight = weights.next_in(config.weight_min, config.weight_max);
        world.roads_.push_back(std::move(r));
    }
    for (int x = 0; x <= g; ++x) {
        Road r;
        r.id = "r_" + std::to_string(g + 2 + x);
        r.orientation = Orientation::vertical;
        r.offset = x;
        r.weight = weights.next_in(config.weight_min, config.weight_max);
        world.roads_.push_back(std::move(r));
    }

    // Distinct uniform lattice cells via partial Fisher-Yates, so full
    // occupancy (n_poi == lattice capacity) works without rejection.
    const int side = g + 1;
    const int64_t total = config.lattice_points();
    std::vector<int32_t> cells(total);
    for (int64_t i = 0; i < total; ++i) cells[i] = static_cast<int32_t>(i);
    RngStream placement(config.seed, "poi-positions");
    world.pois_.reserve(config.n_poi);
    for (int k = 0; k < config.n_poi; ++k) {
        int64_t j = k + static_cast<int64_t>(placement.next_below(total - k));
        std::swap(cells[k], cells[j]);
        Poi p;
        p.id = "p_" + std::to_string(k + 1);
        p.position = Coordinate{static_cast<double>(cells[k] % side),
                                static_cast<double>(cells[k] / side)};
        world.pois_.push_back(std::move(p));
    }

    world.rebuild_indexes();
    return world;
}

void GridWorld::rebuild_indexes() {
    road_index_.clear();
    poi_index_.clear();
    for (size_t i = 0; i < roads_.size(); ++i) road_index_.emplace(roads_[i].id, i);
    for (size_t i = 0; i < pois_.size(); ++i) poi_index_.emplace(pois_[i].id, i);
}

const Poi* GridWorld::find_poi(std::string_view id) const {
    auto it = poi_index_.find(std::string(id));
    return it == poi_index_.end() ? nullptr : &pois_[it->second];
}

const Road* GridWorld::find_road(std::string_view id) const {
    auto it = road_index_.find(std::string(id));
    return it == road_index_.end() ? nullptr : &roads_[it->second];
}

const Poi& GridWorld::poi(std::string_view id) const {
    const Poi* p = find_poi(id);
    if (!p) fail("unknown-poi", "no POI with id '" + std::string(id) + "'");
    return *p;
}

const Road& GridWorld::road(std::string_view id) const {
    const Road* r = find_road(id);
    if (!r) fail("unknown-road", "no road with id '" + std::string(id) + "'");
    return *r;
}

const Road& GridWorld::horizontal_road(int offset) const {
    return roads_.at(static_cast<size_t>(offset));
}

const Road& GridWorld::vertical_road(int offset) const {
    return roads_.at(static_cast<size_t>(config_.grid_size + 1 + offset));
}

double GridWorld::distance(std::string_view a, std::string_view b) const {
    return euclidean(poi(a).position, poi(b).position);
}

double GridWorld::azimuth(std::string_view a, std::string_view b) const {
    return azimuth_degrees(poi(a).position, poi(b).position);
}

std::string GridWorld::to_json() const {
    std::string out;
    out.reserve(64 * (roads_.size() + pois_.size()) + 256);
    out += "{\n  \"config\": {\"grid_size\": " + std::to_string(config_.grid_size);
    out += ", \"n_poi\": " + std::to_string(config_.n_poi);
    out += ", \"weight_min\": " + fmt_fixed(config_.weight_min, 6);
    out += ", \"weight_max\": " + fmt_fixed(config_.weight_max, 6);
    out += ", \"seed\": " + std::to_string(config_.seed) + "},\n";
    out += "  \"roads\": [\n";
    for (size_t i = 0; i < roads_.size(); ++i) {
        const Road& r = roads_[i];
        out += "    {\"id\": \"" + r.id + "\", \"orientation\": \"";
        out += (r.orientation == Orientation::horizontal ? "horizontal" : "vertical");
        out += "\", \"offset\": " + std::to_string(r.offset);
        out += ", \"weight\": " + fmt_fixed(r.weight, 6) + "}";
        out += (i + 1 < roads_.size()) ? ",\n" : "\n";
    }
    out += "  ],\n  \"pois\": [\n";
    for (size_t i = 0; i < pois_.size(); ++i) {
        const Poi& p = pois_[i];
        out += "    {\"id\": \"" + p.id + "\", \"x\": " +
               std::to_string(static_cast<int64_t>(p.position.x)) +
               ", \"y\": " + std::to_string(static_cast<int64_t>(p.position.y)) + "}";
        out += (i + 1 < pois_.size()) ? ",\n" : "\n";
    }
    out += "  ]\n}\n";
    return out;
}

GridWorld GridWorld::from_json(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const std::exception& e) {
        fail("schema-violation", std::string("world file is not valid JSON: ") + e.what());
    }
    try {
        GridWorld world;
        const auto& cfg = doc.at("config");
        world.config_.grid_size = cfg.at("grid_size").get<int>();
        world.config_.n_poi = cfg.at("n_poi").get<int>();
        world.config_.weight_min = cfg.at("weight_min").get<double>();
        world.config_.weight_max = cfg.at("weight_max").get<double>();
        world.config_.seed = cfg.at("seed").get<uint64_t>();
        for (const auto& jr : doc.at("roads")) {
            Road r;
            r.id = jr.at("id").get<std::string>();
            std::string o = jr.at("orientation").get<std::string>();
            if (o != "horizontal" && o != "vertical")
                fail("schema-violation", "bad road orientation '" + o + "'");
            r.orientation = o == "horizontal" ? Orientation::horizontal : Orientation::vertical;
            r.offset = jr.at("offset").get<int>();
            r.weight = jr.at("weight").get<double>();
            world.roads_.push_back(std::move(r));
        }
        for (const auto& jp : doc.at("pois")) {
            Poi p;
            p.id = jp.at("id").get<std::string>();
            p.position = Coordinate{jp.at("x").get<double>(), jp.at("y").get<double>()};
            world.pois_.push_back(std::move(p));
        }
        if (world.roads_.size() != static_cast<size_t>(2 * (world.config_.grid_size + 1)))
            fail("schema-violation", "road count does not match grid_size");
        if (world.pois_.size() != static_cast<size_t>(world.config_.n_poi))
            fail("schema-violation", "poi count does not match n_poi");
        world.rebuild_indexes();
        return world;
    } catch (const Error&) {
        throw;
    } catch (const std::exception& e) {
        fail("schema-violation", std::string("world file malformed: ") + e.what());
    }
}

}  // namespace gridcity
