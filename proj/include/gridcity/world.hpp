#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "gridcity/error.hpp"

namespace gridcity {

struct WorldConfig {
    int grid_size = 100;         // grid spans 0..grid_size km on both axes
    int n_poi = 1024;
    double weight_min = 0.8;     // road speed multipliers, higher = faster
    double weight_max = 1.2;
    uint64_t seed = 0;

    int64_t lattice_points() const {
        return static_cast<int64_t>(grid_size + 1) * (grid_size + 1);
    }
    void validate() const;  // throws configuration-invalid
};

struct Coordinate {
    double x = 0.0;  // east
    double y = 0.0;  // north

    bool operator==(const Coordinate&) const = default;
};

enum class Orientation : uint8_t { horizontal, vertical };

struct Road {
    std::string id;           // "r_k"
    Orientation orientation;  // horizontal: the line y = offset; vertical: x = offset
    int offset = 0;
    double weight = 1.0;
};

struct Poi {
    std::string id;  // "p_k"
    Coordinate position;  // integer components, on the lattice
};

double euclidean(Coordinate a, Coordinate b);

/// Bearing from `from` to `to` in degrees, clockwise from north, in
/// (-180, 180]. Throws coincident-points when the positions are equal.
double azimuth_degrees(Coordinate from, Coordinate to);

/// Immutable synthetic grid city: 2*(grid_size+1) axis-aligned roads with
/// speed weights and n_poi POIs at distinct lattice intersections.
class GridWorld {
public:
    static GridWorld build(const WorldConfig& config);

    const WorldConfig& config() const { return config_; }
    const std::vector<Road>& roads() const { return roads_; }
    const std::vector<Poi>& pois() const { return pois_; }
    int grid_size() const { return config_.grid_size; }

    const Poi& poi(std::string_view id) const;    // throws unknown-poi
    const Road& road(std::string_view id) const;  // throws unknown-road
    const Poi* find_poi(std::string_view id) const;
    const Road* find_road(std::string_view id) const;

    /// The road occupying the line y = offset / x = offset.
    const Road& horizontal_road(int offset) const;
    const Road& vertical_road(int offset) const;

    double distance(std::string_view a, std::string_view b) const;
    double azimuth(std::string_view a, std::string_view b) const;

    /// Canonical JSON document: fixed key order, weights at 6 decimals,
    /// byte-identical for identical (config, seed).
    std::string to_json() const;
    static GridWorld from_json(const std::string& text);  // throws schema-violation

private:
    GridWorld() = default;
    void rebuild_indexes();

    WorldConfig config_;
    std::vector<Road> roads_;  // horizontal y=0..g, then vertical x=0..g
    std::vector<Poi> pois_;
    std::unordered_map<std::string, size_t> road_index_;
    std::unordered_map<std::string, size_t> poi_index_;
};

}  // namespace gridcity
