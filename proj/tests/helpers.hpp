#pragma once

#include <algorithm>
#include <string>
#include <vector>

#include "gridcity/format.hpp"
#include "gridcity/world.hpp"

namespace testutil {

/// Hand-placed world: POIs at the given lattice points (p_1, p_2, ... in
/// order), per-road weights from `weights` (horizontal y=0..g then vertical
/// x=0..g) or all 1.0 when omitted.
inline gridcity::GridWorld make_world(int grid_size,
                                      const std::vector<std::pair<int, int>>& poi_xy,
                                      std::vector<double> weights = {}) {
    int n_roads = 2 * (grid_size + 1);
    if (weights.empty()) weights.assign(static_cast<size_t>(n_roads), 1.0);
    double wmin = *std::min_element(weights.begin(), weights.end());
    double wmax = *std::max_element(weights.begin(), weights.end());

    std::string js = "{\"config\": {\"grid_size\": " + std::to_string(grid_size);
    js += ", \"n_poi\": " + std::to_string(poi_xy.size());
    js += ", \"weight_min\": " + gridcity::fmt_fixed(wmin, 6);
    js += ", \"weight_max\": " + gridcity::fmt_fixed(wmax, 6);
    js += ", \"seed\": 0},\n\"roads\": [";
    for (int i = 0; i < n_roads; ++i) {
        bool horizontal = i <= grid_size;
        int offset = horizontal ? i : i - grid_size - 1;
        if (i > 0) js += ", ";
        js += "{\"id\": \"r_" + std::to_string(i + 1) + "\", \"orientation\": \"";
        js += horizontal ? "horizontal" : "vertical";
        js += "\", \"offset\": " + std::to_string(offset);
        js += ", \"weight\": " + gridcity::fmt_fixed(weights[static_cast<size_t>(i)], 6) + "}";
    }
    js += "],\n\"pois\": [";
    for (size_t k = 0; k < poi_xy.size(); ++k) {
        if (k > 0) js += ", ";
        js += "{\"id\": \"p_" + std::to_string(k + 1) + "\", \"x\": " +
              std::to_string(poi_xy[k].first) + ", \"y\": " + std::to_string(poi_xy[k].second) +
              "}";
    }
    js += "]}";
    return gridcity::GridWorld::from_json(js);
}

}  // namespace testutil
