#include "gridcity/datagen.hpp"

#include <algorithm>
#include <cmath>
#include <thread>
#include <unordered_set>

#include "gridcity/format.hpp"
#include "gridcity/rng.hpp"

namespace gridcity::datagen {

namespace {

std::string step_clause_on(const PathStep& s) {
    std::string out = "go ";
    out += direction_name(s.direction);
    out += " on ";
    out += s.road;
    out += " for ";
    out += fmt_trim(s.length, 6);
    out += "km";
    return out;
}

std::string step_clause_along(const PathStep& s) {
    std::string out = "go along ";
    out += s.road;
    out += " heading ";
    out += direction_name(s.direction);
    out += " for ";
    out += fmt_trim(s.length, 6);
    out += "km";
    return out;
}

double cross(Coordinate o, Coordinate a, Coordinate b) {
    return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

}  // namespace

std::string_view form_name(RelationalForm f) {
    switch (f) {
        case RelationalForm::statement1: return "statement-1";
        case RelationalForm::statement2: return "statement-2";
        case RelationalForm::statement3: return "statement-3";
        case RelationalForm::qa_dist: return "qa-dist";
        case RelationalForm::qa_azi: return "qa-azi";
        case RelationalForm::qa_both: return "qa-both";
    }
    return "statement-1";
}

std::string_view form_name(TrajectoryForm f) {
    switch (f) {
        case TrajectoryForm::narrative1: return "narrative-1";
        case TrajectoryForm::narrative2: return "narrative-2";
        case TrajectoryForm::qa1: return "qa-1";
        case TrajectoryForm::qa2: return "qa-2";
    }
    return "narrative-1";
}

RelationalForm relational_form_from_name(std::string_view name) {
    for (auto f : {RelationalForm::statement1, RelationalForm::statement2,
                   RelationalForm::statement3, RelationalForm::qa_dist, RelationalForm::qa_azi,
                   RelationalForm::qa_both})
        if (form_name(f) == name) return f;
    fail("configuration-invalid", "unknown relational form '" + std::string(name) + "'");
}

TrajectoryForm trajectory_form_from_name(std::string_view name) {
    for (auto f : {TrajectoryForm::narrative1, TrajectoryForm::narrative2, TrajectoryForm::qa1,
                   TrajectoryForm::qa2})
        if (form_name(f) == name) return f;
    fail("configuration-invalid", "unknown trajectory form '" + std::string(name) + "'");
}

RelationalSample render_relational(const GridWorld& world, std::string_view a,
                                   std::string_view b, RelationalForm form) {
    const Poi& pa = world.poi(a);
    const Poi& pb = world.poi(b);
    if (pa.position == pb.position)
        fail("coincident-pois", "relational sample requires distinct positions");

    RelationalSample s;
    s.a = pa.id;
    s.b = pb.id;
    s.form = form;
    s.distance_m = round_half_up(1000.0 * euclidean(pa.position, pb.position));
    s.azimuth_deg = round_decimals(azimuth_degrees(pa.position, pb.position), 2);

    const std::string dist = std::to_string(s.distance_m);
    const std::string azi = fmt_trim(s.azimuth_deg, 2);
    switch (form) {
        case RelationalForm::statement1:
            s.text = "The distance from " + s.a + " to " + s.b + " is " + dist +
                     " meters, with an azimuth of " + azi + " degrees.";
            break;
        case RelationalForm::statement2:
            s.text = "The distance from " + s.a + " to " + s.b + " is " + dist +
                     " meters, and the azimuth from " + s.a + " to " + s.b + " is " + azi +
                     " degrees.";
            break;
        case RelationalForm::statement3:
            s.text = "The azimuth from " + s.a + " to " + s.b + " is " + azi +
                     " degrees, with a distance of " + dist + " meters.";
            break;
        case RelationalForm::qa_dist:
            s.text = "Q: What is the distance from " + s.a + " to " + s.b + "? A: " + dist +
                     " meters.";
            break;
        case RelationalForm::qa_azi:
            s.text = "Q: What is the azimuth from " + s.a + " to " + s.b + "? A: " + azi +
                     " degrees.";
            break;
        case RelationalForm::qa_both:
            s.text = "Q: What is the azimuth and distance from " + s.a + " to " + s.b +
                     "? A: " + azi + " degrees and " + dist + " meters.";
            break;
    }
    return s;
}

TrajectorySample render_trajectory(const GridWorld& world, const Trajectory& t,
                                   TrajectoryForm form) {
    (void)world;
    if (t.steps.empty()) fail("empty-trajectory", "cannot render a trajectory without steps");

    TrajectorySample s;
    s.trajectory = t;
    s.form = form;
    switch (form) {
        case TrajectoryForm::narrative1: {
            std::string text = "Start at " + t.start;
            for (const PathStep& step : t.steps) text += ", then " + step_clause_on(step);
            text += ", and you will arrive at " + t.end + ".";
            s.text = std::move(text);
            break;
        }
        case TrajectoryForm::narrative2: {
            std::string text = "To get from " + t.start + " to " + t.end + ", ";
            for (size_t i = 0; i < t.steps.size(); ++i) {
                if (i > 0) text += ", then ";
                text += step_clause_along(t.steps[i]);
            }
            text += ".";
            s.text = std::move(text);
            break;
        }
        case TrajectoryForm::qa1: {
            std::string text =
                "What is the shortest path from " + t.start + " to " + t.end + "? Answer: First, ";
            for (size_t i = 0; i < t.steps.size(); ++i) {
                if (i > 0) text += ", then ";
                text += step_clause_on(t.steps[i]);
            }
            text += ".";
            s.text = std::move(text);
            break;
        }
        case TrajectoryForm::qa2: {
            std::string text =
                "What is the shortest path from " + t.start + " to " + t.end + "? Answer: ";
            for (size_t i = 0; i < t.steps.size(); ++i) {
                if (i > 0) text += ", then ";
                text += step_clause_along(t.steps[i]);
            }
            text += ".";
            // Capitalize the clause right after "Answer: " (Go along ...).
            s.text = std::move(text);
            break;
        }
    }
    if (form == TrajectoryForm::qa2) {
        size_t pos = s.text.find("Answer: ");
        if (pos != std::string::npos && pos + 8 < s.text.size())
            s.text[pos + 8] = static_cast<char>(std::toupper(s.text[pos + 8]));
    }
    return s;
}

std::string render_step_prefix(const Trajectory& t, size_t k) {
    std::string text = "Start at " + t.start + ",";
    for (size_t i = 0; i < k && i < t.steps.size(); ++i) {
        if (i > 0) text += ",";
        text += " then " + step_clause_on(t.steps[i]);
    }
    return text;
}

PairSplit split_pairs(const std::vector<std::string>& pois, int train_pct, int test_pct,
                      uint64_t seed) {
    if (train_pct <= 0 || test_pct <= 0 || train_pct + test_pct != 100)
        fail("invalid-ratio", "split ratio components must be positive and sum to 100");

    const size_t n = pois.size();
    std::vector<std::pair<uint32_t, uint32_t>> pairs;
    pairs.reserve(n * (n - 1) / 2);
    for (uint32_t i = 0; i < n; ++i)
        for (uint32_t j = i + 1; j < n; ++j) pairs.emplace_back(i, j);

    RngStream rng(seed, "pair-split");
    rng.shuffle(pairs);

    size_t n_train = pairs.size() * static_cast<size_t>(train_pct) / 100;  // floor for train
    PairSplit split;
    split.train.reserve(n_train);
    split.test.reserve(pairs.size() - n_train);
    for (size_t k = 0; k < pairs.size(); ++k) {
        auto& side = k < n_train ? split.train : split.test;
        side.emplace_back(pois[pairs[k].first], pois[pairs[k].second]);
    }
    return split;
}

std::string_view regime_name(Regime r) {
    return r == Regime::bridged ? "bridged" : "no-exposure";
}

Regime regime_from_name(std::string_view name) {
    if (name == "bridged") return Regime::bridged;
    if (name == "no-exposure") return Regime::no_exposure;
    fail("configuration-invalid", "unknown exposure regime '" + std::string(name) + "'");
}

ExposurePartition exposure_partition(const std::vector<std::string>& pois, Regime regime,
                                     int n_heldout, std::pair<int, int> ratio, uint64_t seed) {
    if (n_heldout < 0 || static_cast<size_t>(n_heldout) >= pois.size())
        fail("invalid-count", "n_heldout must be in [0, n_pois)");

    std::vector<uint32_t> order(pois.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    RngStream rng(seed, "exposure-heldout");
    rng.shuffle(order);

    std::vector<bool> is_heldout(pois.size(), false);
    for (int k = 0; k < n_heldout; ++k) is_heldout[order[static_cast<size_t>(k)]] = true;

    ExposurePartition part;
    part.regime = regime;
    for (size_t i = 0; i < pois.size(); ++i)
        (is_heldout[i] ? part.heldout : part.main).push_back(pois[i]);

    PairSplit main_split = split_pairs(part.main, ratio.first, ratio.second,
                                       RngStream(seed, "exposure-main-split").next_u64());
    part.train_pairs = std::move(main_split.train);
    part.test_pairs = std::move(main_split.test);

    if (regime == Regime::bridged) {
        for (const auto& m : part.main)
            for (const auto& h : part.heldout) part.train_pairs.emplace_back(m, h);
    }
    for (size_t i = 0; i < part.heldout.size(); ++i)
        for (size_t j = i + 1; j < part.heldout.size(); ++j)
            part.eval_pairs.emplace_back(part.heldout[i], part.heldout[j]);
    return part;
}

bool point_in_circle(Coordinate p, Coordinate center, double radius) {
    return euclidean(p, center) <= radius;
}

bool point_in_triangle(Coordinate p, Coordinate a, Coordinate b, Coordinate c) {
    double d1 = cross(a, b, p);
    double d2 = cross(b, c, p);
    double d3 = cross(c, a, p);
    bool has_neg = d1 < 0 || d2 < 0 || d3 < 0;
    bool has_pos = d1 > 0 || d2 > 0 || d3 > 0;
    return !(has_neg && has_pos);
}

std::vector<RegionQASample> gen_region_qa(const GridWorld& world, int n_samples, uint64_t seed,
                                          double radius_min, double radius_max) {
    const auto& pois = world.pois();
    if (pois.size() < 4) fail("insufficient-pois", "region QA needs at least 4 POIs");

    std::vector<uint32_t> order(pois.size());
    for (uint32_t i = 0; i < order.size(); ++i) order[i] = i;
    RngStream reserve_rng(seed, "region-reserved");
    reserve_rng.shuffle(order);
    const size_t n_reserved = pois.size() / 4;
    std::vector<bool> reserved(pois.size(), false);
    std::vector<uint32_t> anchors;  // POIs usable inside region definitions
    for (size_t k = 0; k < order.size(); ++k) {
        if (k < n_reserved)
            reserved[order[k]] = true;
        else
            anchors.push_back(order[k]);
    }
    std::sort(anchors.begin(), anchors.end());

    RngStream rng(seed, "region-samples");
    std::vector<RegionQASample> samples;
    samples.reserve(static_cast<size_t>(n_samples));
    while (samples.size() < static_cast<size_t>(n_samples)) {
        RegionQASample s;
        uint32_t query = static_cast<uint32_t>(rng.next_below(pois.size()));
        s.query = pois[query].id;
        s.split = reserved[query] ? "eval" : (rng.next_below(5) < 4 ? "train" : "test");
        Coordinate q = pois[query].position;

        if (rng.next_below(2) == 0) {
            uint32_t center = query;
            while (center == query)
                center = anchors[static_cast<size_t>(rng.next_below(anchors.size()))];
            double radius = round_decimals(rng.next_in(radius_min, radius_max), 1);
            s.region = CircleRegion{pois[center].id, radius};
            s.label = point_in_circle(q, pois[center].position, radius);
            s.text = "Q: Is " + s.query + " located within the circular region centered at " +
                     pois[center].id + " with a radius of " + fmt_trim(radius, 1) +
                     " km? A: " + (s.label ? "Yes." : "No.");
        } else {
            uint32_t ia = 0, ib = 0, ic = 0;
            Coordinate pa, pb, pc;
            do {
                ia = anchors[static_cast<size_t>(rng.next_below(anchors.size()))];
                ib = anchors[static_cast<size_t>(rng.next_below(anchors.size()))];
                ic = anchors[static_cast<size_t>(rng.next_below(anchors.size()))];
                pa = pois[ia].position;
                pb = pois[ib].position;
                pc = pois[ic].position;
            } while (ia == ib || ib == ic || ia == ic || cross(pa, pb, pc) == 0.0);
            s.region = TriangleRegion{pois[ia].id, pois[ib].id, pois[ic].id};
            s.label = point_in_triangle(q, pa, pb, pc);
            s.text = "Q: Is " + s.query + " located within the triangular region formed by " +
                     pois[ia].id + ", " + pois[ib].id + ", and " + pois[ic].id +
                     "? A: " + (s.label ? "Yes." : "No.");
        }
        samples.push_back(std::move(s));
    }
    return samples;
}

StepProbeSets gen_step_probe_targets(const GridWorld& world, const std::vector<Trajectory>& pool,
                                     int n_train, int n_eval,
                                     const std::vector<std::string>& heldout, uint64_t seed) {
    std::unordered_set<std::string> held(heldout.begin(), heldout.end());
    std::vector<size_t> train_candidates, eval_candidates;
    for (size_t i = 0; i < pool.size(); ++i) {
        bool a_held = held.count(pool[i].start) > 0;
        bool b_held = held.count(pool[i].end) > 0;
        if (!a_held && !b_held) train_candidates.push_back(i);
        if (a_held && b_held) eval_candidates.push_back(i);
    }
    if (train_candidates.size() < static_cast<size_t>(n_train) ||
        eval_candidates.size() < static_cast<size_t>(n_eval))
        fail("pool-exhausted", "trajectory pool cannot cover the requested counts");

    RngStream train_rng(seed, "step-train-sample");
    RngStream eval_rng(seed, "step-eval-sample");
    train_rng.shuffle(train_candidates);
    eval_rng.shuffle(eval_candidates);

    auto emit = [&](const Trajectory& t, std::vector<StepProbeTarget>& out) {
        Coordinate start = world.poi(t.start).position;
        Coordinate expected_end = world.poi(t.end).position;
        Coordinate current = start;
        for (size_t k = 1; k <= t.steps.size(); ++k) {
            MoveResult moved = move_along_road(world, current, t.steps[k - 1]);
            current = moved.position;
            StepProbeTarget target;
            target.traj_id = t.start + "|" + t.end;
            target.step = static_cast<int>(k);
            target.prefix_text = render_step_prefix(t, k);
            target.position = current;
            out.push_back(std::move(target));
        }
        if (!(current == expected_end))
            fail("internal", "trajectory simulation does not reach its endpoint");
    };

    StepProbeSets sets;
    for (int k = 0; k < n_train; ++k) emit(pool[train_candidates[static_cast<size_t>(k)]], sets.train);
    for (int k = 0; k < n_eval; ++k) emit(pool[eval_candidates[static_cast<size_t>(k)]], sets.eval);
    return sets;
}

// ---------------------------------------------------------------------------
// Corpus planning

namespace {

template <typename Form>
Form pick_form(const std::vector<Form>& forms, const std::string& a, const std::string& b,
               uint64_t seed, std::string_view site) {
    if (forms.empty()) fail("configuration-invalid", "template form list is empty");
    if (forms.size() == 1) return forms[0];
    RngStream rng(seed, std::string(site) + ":" + a + "|" + b);
    return forms[static_cast<size_t>(rng.next_below(forms.size()))];
}

}  // namespace

RelationalCorpusPlan plan_relational_corpus(const GridWorld& world, int train_pct, int test_pct,
                                            const TemplatePolicy& policy, uint64_t seed) {
    std::vector<std::string> ids;
    ids.reserve(world.pois().size());
    std::unordered_map<std::string, uint32_t> index;
    for (uint32_t i = 0; i < world.pois().size(); ++i) {
        ids.push_back(world.pois()[i].id);
        index.emplace(world.pois()[i].id, i);
    }
    PairSplit split = split_pairs(ids, train_pct, test_pct, seed);

    auto build_side = [&](const std::vector<PoiPair>& pairs,
                          const std::vector<RelationalForm>& forms, std::string_view site,
                          std::string_view order_label) {
        std::vector<RelationalEntry> entries;
        entries.reserve(pairs.size() * 2 * (policy.sample_one ? 1 : forms.size()));
        std::vector<std::pair<uint32_t, uint32_t>> ordered;
        ordered.reserve(pairs.size() * 2);
        for (const auto& [pa, pb] : pairs) {
            uint32_t ia = index.at(pa), ib = index.at(pb);
            ordered.emplace_back(ia, ib);
            ordered.emplace_back(ib, ia);
        }
        std::sort(ordered.begin(), ordered.end());
        for (auto [ia, ib] : ordered) {
            if (policy.sample_one) {
                RelationalForm f = pick_form(forms, ids[ia], ids[ib], seed, site);
                entries.push_back(RelationalEntry{ia, ib, f});
            } else {
                for (RelationalForm f : forms) entries.push_back(RelationalEntry{ia, ib, f});
            }
        }
        RngStream order_rng(seed, order_label);
        order_rng.shuffle(entries);
        return entries;
    };

    RelationalCorpusPlan plan;
    plan.train = build_side(split.train, policy.relational_train, "rel-form-train",
                            "rel-order-train");
    plan.test = build_side(split.test, policy.relational_eval, "rel-form-test", "rel-order-test");
    return plan;
}

Trajectory entry_to_trajectory(const GridWorld& world, const TrajectoryEntry& entry) {
    Trajectory t;
    t.start = world.pois()[entry.a].id;
    t.end = world.pois()[entry.b].id;
    t.cost = entry.cost;
    t.steps.reserve(entry.steps.size());
    for (const PackedStep& ps : entry.steps)
        t.steps.push_back(PathStep{world.roads()[ps.road].id, static_cast<Direction>(ps.dir),
                                   static_cast<double>(ps.len)});
    Simulation sim = simulate_steps(world, world.poi(t.start).position, t.steps);
    t.nodes = std::move(sim.trace);
    return t;
}

TrajectoryCorpusPlan plan_trajectory_corpus(const GridWorld& world, const RoadGraph& graph,
                                            const ExposurePartition& partition,
                                            const TemplatePolicy& policy, uint64_t seed,
                                            int jobs) {
    std::unordered_map<std::string, uint32_t> index;
    for (uint32_t i = 0; i < world.pois().size(); ++i) index.emplace(world.pois()[i].id, i);
    std::unordered_map<std::string, uint16_t> road_index;
    for (uint16_t i = 0; i < world.roads().size(); ++i) road_index.emplace(world.roads()[i].id, i);

    // Expand unordered pairs to ordered ones per side, then group all needed
    // (source, target) pairs by source so each source runs Dijkstra once.
    auto expand = [&](const std::vector<PoiPair>& pairs) {
        std::vector<std::pair<uint32_t, uint32_t>> ordered;
        ordered.reserve(pairs.size() * 2);
        for (const auto& [pa, pb] : pairs) {
            uint32_t ia = index.at(pa), ib = index.at(pb);
            ordered.emplace_back(ia, ib);
            ordered.emplace_back(ib, ia);
        }
        std::sort(ordered.begin(), ordered.end());
        return ordered;
    };
    std::vector<std::pair<uint32_t, uint32_t>> sides[3] = {
        expand(partition.train_pairs), expand(partition.test_pairs),
        expand(partition.eval_pairs)};

    std::vector<std::vector<std::pair<uint32_t, int>>> by_source(world.pois().size());
    for (int s = 0; s < 3; ++s)
        for (size_t k = 0; k < sides[s].size(); ++k)
            by_source[sides[s][k].first].emplace_back(sides[s][k].second, 0);

    // steps_for[(a,b)] -> packed steps + cost, computed in parallel by source.
    struct PairResult {
        double cost = 0;
        std::vector<PackedStep> steps;
    };
    std::vector<std::unordered_map<uint32_t, PairResult>> results(world.pois().size());

    std::vector<uint32_t> sources;
    for (uint32_t a = 0; a < by_source.size(); ++a)
        if (!by_source[a].empty()) sources.push_back(a);

    auto worker = [&](size_t begin, size_t stride) {
        for (size_t si = begin; si < sources.size(); si += stride) {
            uint32_t a = sources[si];
            const Poi& pa = world.pois()[a];
            auto tree = graph.dijkstra(graph.node_id(static_cast<int>(pa.position.x),
                                                     static_cast<int>(pa.position.y)));
            auto& bucket = results[a];
            for (auto [b, tag] : by_source[a]) {
                (void)tag;
                if (bucket.count(b)) continue;
                Trajectory t = graph.extract(tree, pa.id, world.pois()[b].id);
                PairResult r;
                r.cost = t.cost;
                r.steps.reserve(t.steps.size());
                for (const PathStep& step : t.steps)
                    r.steps.push_back(PackedStep{road_index.at(step.road),
                                                 static_cast<uint8_t>(step.direction),
                                                 static_cast<uint16_t>(step.length)});
                bucket.emplace(b, std::move(r));
            }
        }
    };
    int n_jobs = std::max(1, jobs);
    if (n_jobs == 1) {
        worker(0, 1);
    } else {
        std::vector<std::thread> threads;
        threads.reserve(static_cast<size_t>(n_jobs));
        for (int w = 0; w < n_jobs; ++w)
            threads.emplace_back(worker, static_cast<size_t>(w), static_cast<size_t>(n_jobs));
        for (auto& th : threads) th.join();
    }

    auto build_side = [&](const std::vector<std::pair<uint32_t, uint32_t>>& ordered,
                          const std::vector<TrajectoryForm>& forms, std::string_view site,
                          std::string_view order_label) {
        std::vector<TrajectoryEntry> entries;
        entries.reserve(ordered.size() * (policy.sample_one ? 1 : forms.size()));
        for (auto [a, b] : ordered) {
            const PairResult& r = results[a].at(b);
            if (policy.sample_one) {
                TrajectoryForm f = pick_form(forms, world.pois()[a].id, world.pois()[b].id,
                                             seed, site);
                entries.push_back(TrajectoryEntry{a, b, f, r.cost, r.steps});
            } else {
                for (TrajectoryForm f : forms)
                    entries.push_back(TrajectoryEntry{a, b, f, r.cost, r.steps});
            }
        }
        RngStream order_rng(seed, order_label);
        order_rng.shuffle(entries);
        return entries;
    };

    TrajectoryCorpusPlan plan;
    plan.train = build_side(sides[0], policy.trajectory_train, "traj-form-train",
                            "traj-order-train");
    plan.test = build_side(sides[1], policy.trajectory_eval, "traj-form-test",
                           "traj-order-test");
    plan.eval = build_side(sides[2], policy.trajectory_eval, "traj-form-eval",
                           "traj-order-eval");
    return plan;
}

}  // namespace gridcity::datagen
