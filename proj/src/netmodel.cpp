#include "cvlight/netmodel.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <stdexcept>

#include <nlohmann/json.hpp>

namespace cvlight {

using nlohmann::json;

const char* to_string(Turn t) {
    switch (t) {
        case Turn::through: return "through";
        case Turn::left: return "left";
        case Turn::right: return "right";
    }
    return "?";
}

const char* to_string(Heading h) {
    switch (h) {
        case Heading::north: return "north";
        case Heading::east: return "east";
        case Heading::south: return "south";
        case Heading::west: return "west";
    }
    return "?";
}

Heading turned(Heading h, Turn t) {
    // Right-hand traffic: a left turn from eastbound heads north.
    static constexpr Heading kLeft[4] = {Heading::west, Heading::north, Heading::east,
                                         Heading::south};
    static constexpr Heading kRight[4] = {Heading::east, Heading::south, Heading::west,
                                          Heading::north};
    switch (t) {
        case Turn::through: return h;
        case Turn::left: return kLeft[static_cast<int>(h)];
        case Turn::right: return kRight[static_cast<int>(h)];
    }
    return h;
}

int lane_capacity(double length_m, double vehicle_length_m, double min_gap_m) {
    const double footprint = vehicle_length_m + min_gap_m;
    if (footprint <= 0.0) throw std::invalid_argument("lane_capacity: nonpositive footprint");
    return std::max(1, static_cast<int>(std::floor(length_m / footprint)));
}

int RoadNetwork::capacity(LaneId id) const {
    return lane_capacity(lane(id).length_m, vehicle_length_m, min_gap_m);
}

LaneId RoadNetwork::pressure_pair(LaneId incoming) const {
    const Lane& from = lane(incoming);
    const Heading straight = link(from.link).heading;
    const Intersection& inter = intersection(from.downstream);
    for (LaneId out : inter.outgoing) {
        const Lane& cand = lane(out);
        if (link(cand.link).heading == straight && cand.index_in_link == from.index_in_link)
            return out;
    }
    for (MovementId mid : inter.movements) {
        const Movement& m = movement(mid);
        if (m.from_lane == incoming) return m.to_lane;
    }
    return kNone;
}

MovementId RoadNetwork::find_movement(LaneId from_lane, Turn turn) const {
    for (const Movement& m : movements)
        if (m.from_lane == from_lane && m.turn == turn) return m.id;
    return kNone;
}

std::vector<MovementId> RoadNetwork::movements_from(LaneId from_lane) const {
    std::vector<MovementId> out;
    for (const Movement& m : movements)
        if (m.from_lane == from_lane) out.push_back(m.id);
    return out;
}

double DemandSpec::rate_at(LaneId lane, double t) const {
    for (const EntryDemand& e : entries) {
        if (e.lane != lane) continue;
        for (const DemandStage& s : e.stages)
            if (t >= s.t_begin_s && t < s.t_end_s) return s.rate_veh_per_hour;
        return 0.0;
    }
    return 0.0;
}

std::vector<std::string> DemandSpec::validate(const RoadNetwork& net) const {
    std::vector<std::string> v;
    if (cv_penetration < 0.0 || cv_penetration > 1.0)
        v.push_back("cv_penetration outside [0,1]");
    const double sum = turns.left + turns.right + turns.through;
    if (turns.left < 0 || turns.right < 0 || turns.through < 0 || std::abs(sum - 1.0) > 1e-9)
        v.push_back("turn proportions must be non-negative and sum to 1");
    for (const EntryDemand& e : entries) {
        if (e.lane < 0 || e.lane >= static_cast<LaneId>(net.lanes.size()) ||
            !net.lane(e.lane).is_entry()) {
            v.push_back("demand entry references lane " + std::to_string(e.lane) +
                        " which is not a boundary entry");
            continue;
        }
        double prev_end = -1.0;
        for (const DemandStage& s : e.stages) {
            if (s.rate_veh_per_hour < 0.0)
                v.push_back("negative arrival rate on lane " + std::to_string(e.lane));
            if (s.t_end_s <= s.t_begin_s || s.t_begin_s < prev_end)
                v.push_back("demand stages not strictly increasing on lane " +
                            std::to_string(e.lane));
            prev_end = s.t_end_s;
        }
    }
    return v;
}

namespace {

struct GridBuilder {
    const GridSpec& spec;
    RoadNetwork net;

    // node key: intersections only; boundary ends use kNone
    IntersectionId node(int r, int c) const {
        if (r < 0 || r >= spec.rows || c < 0 || c >= spec.cols) return kNone;
        return r * spec.cols + c;
    }

    LinkId add_link(IntersectionId from, IntersectionId to, Heading h, bool arterial) {
        Link link;
        link.id = static_cast<LinkId>(net.links.size());
        link.heading = h;
        link.arterial = arterial;
        link.from = from;
        link.to = to;
        for (int idx = 0; idx < 2; ++idx) {
            Lane lane;
            lane.id = static_cast<LaneId>(net.lanes.size());
            lane.link = link.id;
            lane.index_in_link = idx;
            lane.length_m = spec.lane_length_m;
            lane.speed_limit_mps = spec.speed_limit_mps;
            lane.upstream = from;
            lane.downstream = to;
            link.lanes[static_cast<size_t>(idx)] = lane.id;
            net.lanes.push_back(lane);
        }
        net.links.push_back(link);
        return link.id;
    }

    LinkId outgoing_link(IntersectionId i, Heading h) const {
        for (const Link& l : net.links)
            if (l.from == i && l.heading == h) return l.id;
        return kNone;
    }

    void build_links() {
        // Horizontal (arterial) rows. Row parity picks the direction of
        // one-way couplets.
        for (int r = 0; r < spec.rows; ++r) {
            const bool east_only = spec.one_way_arterials && (r % 2 == 0);
            const bool west_only = spec.one_way_arterials && (r % 2 == 1);
            for (int c = 0; c <= spec.cols; ++c) {
                const IntersectionId west_node = node(r, c - 1);
                const IntersectionId east_node = node(r, c);
                if (!west_only) add_link(west_node, east_node, Heading::east, true);
                if (!east_only) add_link(east_node, west_node, Heading::west, true);
            }
        }
        // Vertical side streets, always two-way. Row index grows southward.
        for (int c = 0; c < spec.cols; ++c) {
            for (int r = 0; r <= spec.rows; ++r) {
                const IntersectionId north_node = node(r - 1, c);
                const IntersectionId south_node = node(r, c);
                add_link(north_node, south_node, Heading::south, false);
                add_link(south_node, north_node, Heading::north, false);
            }
        }
    }

    void add_movement(Intersection& inter, LaneId from, Turn turn) {
        const Lane& lane = net.lane(from);
        const LinkId target = outgoing_link(inter.id, turned(net.link(lane.link).heading, turn));
        if (target == kNone) return;
        Movement m;
        m.id = static_cast<MovementId>(net.movements.size());
        m.intersection = inter.id;
        m.from_lane = from;
        m.to_link = target;
        m.to_lane = net.link(target).lanes[static_cast<size_t>(lane.index_in_link)];
        m.turn = turn;
        net.movements.push_back(m);
        inter.movements.push_back(m.id);
    }

    void build_intersections() {
        net.intersections.resize(static_cast<size_t>(spec.rows) * spec.cols);
        for (int r = 0; r < spec.rows; ++r) {
            for (int c = 0; c < spec.cols; ++c) {
                Intersection& inter = net.intersections[static_cast<size_t>(node(r, c))];
                inter.id = node(r, c);
                inter.name = "i" + std::to_string(r) + "_" + std::to_string(c);
                inter.row = r;
                inter.col = c;
                for (int h = 0; h < 4; ++h) {
                    for (const Link& l : net.links) {
                        if (l.heading != static_cast<Heading>(h)) continue;
                        if (l.to == inter.id)
                            for (LaneId id : l.lanes) inter.incoming.push_back(id);
                        if (l.from == inter.id)
                            for (LaneId id : l.lanes) inter.outgoing.push_back(id);
                    }
                }
                for (LaneId in : inter.incoming) {
                    const Lane& lane = net.lane(in);
                    if (lane.index_in_link == 0) {
                        add_movement(inter, in, Turn::through);
                        add_movement(inter, in, Turn::right);
                    } else {
                        add_movement(inter, in, Turn::left);
                        // One-way grids can remove the left target; fall back
                        // so no lane dead-ends inside the network.
                        if (net.movements_from(in).empty()) {
                            add_movement(inter, in, Turn::through);
                            if (net.movements_from(in).empty())
                                add_movement(inter, in, Turn::right);
                        }
                    }
                }
                build_plan(inter);
            }
        }
    }

    void build_plan(Intersection& inter) {
        inter.plan = spec.plan_template;
        inter.plan.phases.clear();
        Phase arterial_phase, side_phase;
        for (MovementId mid : inter.movements) {
            const Movement& m = net.movements[static_cast<size_t>(mid)];
            const Heading h = net.link(net.lane(m.from_lane).link).heading;
            if (h == Heading::east || h == Heading::west)
                arterial_phase.movements.push_back(mid);
            else
                side_phase.movements.push_back(mid);
        }
        inter.plan.phases.push_back(arterial_phase);
        inter.plan.phases.push_back(side_phase);
        inter.arterial_phase = 0;
    }

    RoadNetwork finish() {
        for (const Lane& lane : net.lanes) {
            if (lane.is_entry()) net.entry_lanes.push_back(lane.id);
            if (lane.is_exit()) net.exit_lanes.push_back(lane.id);
        }
        net.detection_radius_m = spec.detection_radius_m;
        return std::move(net);
    }
};

}  // namespace

RoadNetwork build_grid(const GridSpec& spec) {
    if (spec.rows < 1 || spec.cols < 1)
        throw std::invalid_argument("build_grid: rows and cols must be >= 1");
    if (spec.lane_length_m <= 0.0)
        throw std::invalid_argument("build_grid: lane_length_m must be > 0");
    if (spec.speed_limit_mps <= 0.0)
        throw std::invalid_argument("build_grid: speed_limit_mps must be > 0");
    GridBuilder builder{spec, {}};
    builder.build_links();
    builder.build_intersections();
    return builder.finish();
}

std::vector<std::string> validate(const RoadNetwork& net) {
    std::vector<std::string> v;
    auto lane_tag = [](LaneId id) { return "lane " + std::to_string(id); };

    if (net.vehicle_length_m + net.min_gap_m <= 0.0)
        v.push_back("vehicle footprint must be positive");

    for (const Lane& lane : net.lanes) {
        if (lane.length_m <= 0.0) v.push_back(lane_tag(lane.id) + ": nonpositive length");
        if (lane.speed_limit_mps <= 0.0)
            v.push_back(lane_tag(lane.id) + ": nonpositive speed limit");
        if (lane.link < 0 || lane.link >= static_cast<LinkId>(net.links.size()))
            v.push_back(lane_tag(lane.id) + ": dangling link reference");
        else {
            const Link& link = net.link(lane.link);
            if (lane.upstream != link.from || lane.downstream != link.to)
                v.push_back(lane_tag(lane.id) + ": endpoint mismatch with its link");
        }
    }

    for (const Movement& m : net.movements) {
        if (net.lane(m.from_lane).downstream != m.intersection ||
            net.lane(m.to_lane).upstream != m.intersection)
            v.push_back("movement " + std::to_string(m.id) +
                        ": lanes not attached to its intersection");
    }

    for (const Intersection& inter : net.intersections) {
        const std::string tag = "intersection " + std::to_string(inter.id);
        std::set<MovementId> covered;
        std::set<std::set<MovementId>> phase_sets;
        for (const Phase& p : inter.plan.phases) {
            std::set<MovementId> s(p.movements.begin(), p.movements.end());
            if (!phase_sets.insert(s).second) v.push_back(tag + ": duplicate phase");
            covered.insert(s.begin(), s.end());
        }
        for (MovementId mid : inter.movements)
            if (!covered.count(mid))
                v.push_back(tag + ": unreachable movement " + std::to_string(mid));
        if (inter.plan.min_green_s > inter.plan.max_green_s)
            v.push_back(tag + ": green bound order (min_green > max_green)");
        if (inter.plan.yellow_s < 0.0 || inter.plan.all_red_s < 0.0)
            v.push_back(tag + ": negative yellow or all-red duration");
        for (LaneId in : inter.incoming)
            if (net.movements_from(in).empty())
                v.push_back(tag + ": dead-end incoming " + lane_tag(in));
    }

    // Connectivity over the undirected intersection graph.
    if (!net.intersections.empty()) {
        std::vector<char> seen(net.intersections.size(), 0);
        std::vector<IntersectionId> queue{0};
        seen[0] = 1;
        while (!queue.empty()) {
            IntersectionId i = queue.back();
            queue.pop_back();
            for (const Link& l : net.links) {
                IntersectionId other = kNone;
                if (l.from == i) other = l.to;
                if (l.to == i) other = l.from;
                if (other != kNone && !seen[static_cast<size_t>(other)]) {
                    seen[static_cast<size_t>(other)] = 1;
                    queue.push_back(other);
                }
            }
        }
        if (std::count(seen.begin(), seen.end(), 1) !=
            static_cast<long>(net.intersections.size()))
            v.push_back("network graph is not connected");
    }
    return v;
}

namespace {

json plan_to_json(const PhasePlan& plan) {
    json phases = json::array();
    for (const Phase& p : plan.phases) phases.push_back(p.movements);
    return json{{"min_green_s", plan.min_green_s},
                {"max_green_s", plan.max_green_s},
                {"yellow_s", plan.yellow_s},
                {"all_red_s", plan.all_red_s},
                {"phases", phases}};
}

PhasePlan plan_from_json(const json& doc) {
    PhasePlan plan;
    plan.min_green_s = doc.at("min_green_s").get<double>();
    plan.max_green_s = doc.at("max_green_s").get<double>();
    plan.yellow_s = doc.at("yellow_s").get<double>();
    plan.all_red_s = doc.at("all_red_s").get<double>();
    for (const json& p : doc.at("phases"))
        plan.phases.push_back(Phase{p.get<std::vector<MovementId>>()});
    return plan;
}

Turn turn_from_string(const std::string& s) {
    if (s == "through") return Turn::through;
    if (s == "left") return Turn::left;
    if (s == "right") return Turn::right;
    throw std::invalid_argument("unknown turn: " + s);
}

Heading heading_from_string(const std::string& s) {
    if (s == "north") return Heading::north;
    if (s == "east") return Heading::east;
    if (s == "south") return Heading::south;
    if (s == "west") return Heading::west;
    throw std::invalid_argument("unknown heading: " + s);
}

}  // namespace

json network_to_json(const RoadNetwork& net) {
    json doc;
    doc["format"] = "cvlight-network-v1";
    doc["detection_radius_m"] = net.detection_radius_m;
    doc["vehicle_length_m"] = net.vehicle_length_m;
    doc["min_gap_m"] = net.min_gap_m;
    doc["links"] = json::array();
    for (const Link& l : net.links)
        doc["links"].push_back(json{{"id", l.id},
                                    {"heading", to_string(l.heading)},
                                    {"arterial", l.arterial},
                                    {"from", l.from},
                                    {"to", l.to},
                                    {"lanes", l.lanes}});
    doc["lanes"] = json::array();
    for (const Lane& l : net.lanes)
        doc["lanes"].push_back(json{{"id", l.id},
                                    {"link", l.link},
                                    {"index_in_link", l.index_in_link},
                                    {"length_m", l.length_m},
                                    {"speed_limit_mps", l.speed_limit_mps},
                                    {"upstream", l.upstream},
                                    {"downstream", l.downstream}});
    doc["movements"] = json::array();
    for (const Movement& m : net.movements)
        doc["movements"].push_back(json{{"id", m.id},
                                        {"intersection", m.intersection},
                                        {"from_lane", m.from_lane},
                                        {"to_lane", m.to_lane},
                                        {"to_link", m.to_link},
                                        {"turn", to_string(m.turn)}});
    doc["intersections"] = json::array();
    for (const Intersection& i : net.intersections)
        doc["intersections"].push_back(json{{"id", i.id},
                                            {"name", i.name},
                                            {"row", i.row},
                                            {"col", i.col},
                                            {"incoming", i.incoming},
                                            {"outgoing", i.outgoing},
                                            {"movements", i.movements},
                                            {"arterial_phase", i.arterial_phase},
                                            {"phase_plan", plan_to_json(i.plan)}});
    doc["entry_lanes"] = net.entry_lanes;
    doc["exit_lanes"] = net.exit_lanes;
    return doc;
}

RoadNetwork network_from_json(const json& doc) {
    if (doc.value("format", "") != "cvlight-network-v1")
        throw std::invalid_argument("unsupported network document format");
    RoadNetwork net;
    net.detection_radius_m = doc.at("detection_radius_m").get<double>();
    net.vehicle_length_m = doc.value("vehicle_length_m", 5.0);
    net.min_gap_m = doc.value("min_gap_m", 2.5);
    for (const json& j : doc.at("links")) {
        Link l;
        l.id = j.at("id").get<LinkId>();
        l.heading = heading_from_string(j.at("heading").get<std::string>());
        l.arterial = j.at("arterial").get<bool>();
        l.from = j.at("from").get<IntersectionId>();
        l.to = j.at("to").get<IntersectionId>();
        auto lanes = j.at("lanes").get<std::vector<LaneId>>();
        if (lanes.size() != 2) throw std::invalid_argument("link must carry two lanes");
        l.lanes = {lanes[0], lanes[1]};
        net.links.push_back(l);
    }
    for (const json& j : doc.at("lanes")) {
        Lane l;
        l.id = j.at("id").get<LaneId>();
        l.link = j.at("link").get<LinkId>();
        l.index_in_link = j.at("index_in_link").get<int>();
        l.length_m = j.at("length_m").get<double>();
        l.speed_limit_mps = j.at("speed_limit_mps").get<double>();
        l.upstream = j.at("upstream").get<IntersectionId>();
        l.downstream = j.at("downstream").get<IntersectionId>();
        net.lanes.push_back(l);
    }
    for (const json& j : doc.at("movements")) {
        Movement m;
        m.id = j.at("id").get<MovementId>();
        m.intersection = j.at("intersection").get<IntersectionId>();
        m.from_lane = j.at("from_lane").get<LaneId>();
        m.to_lane = j.at("to_lane").get<LaneId>();
        m.to_link = j.at("to_link").get<LinkId>();
        m.turn = turn_from_string(j.at("turn").get<std::string>());
        net.movements.push_back(m);
    }
    for (const json& j : doc.at("intersections")) {
        Intersection i;
        i.id = j.at("id").get<IntersectionId>();
        i.name = j.at("name").get<std::string>();
        i.row = j.value("row", 0);
        i.col = j.value("col", 0);
        i.incoming = j.at("incoming").get<std::vector<LaneId>>();
        i.outgoing = j.at("outgoing").get<std::vector<LaneId>>();
        i.movements = j.at("movements").get<std::vector<MovementId>>();
        i.arterial_phase = j.at("arterial_phase").get<int>();
        i.plan = plan_from_json(j.at("phase_plan"));
        net.intersections.push_back(i);
    }
    net.entry_lanes = doc.at("entry_lanes").get<std::vector<LaneId>>();
    net.exit_lanes = doc.at("exit_lanes").get<std::vector<LaneId>>();
    return net;
}

json demand_to_json(const DemandSpec& demand) {
    json doc;
    doc["format"] = "cvlight-demand-v1";
    doc["cv_penetration"] = demand.cv_penetration;
    doc["turn_proportions"] = json{{"left", demand.turns.left},
                                   {"right", demand.turns.right},
                                   {"through", demand.turns.through}};
    doc["entries"] = json::array();
    for (const EntryDemand& e : demand.entries) {
        json stages = json::array();
        for (const DemandStage& s : e.stages)
            stages.push_back(json{{"t_begin_s", s.t_begin_s},
                                  {"t_end_s", s.t_end_s},
                                  {"rate_veh_per_hour", s.rate_veh_per_hour}});
        doc["entries"].push_back(json{{"lane", e.lane}, {"stages", stages}});
    }
    return doc;
}

DemandSpec demand_from_json(const json& doc) {
    DemandSpec demand;
    demand.cv_penetration = doc.at("cv_penetration").get<double>();
    const json& t = doc.at("turn_proportions");
    demand.turns = {t.at("left").get<double>(), t.at("right").get<double>(),
                    t.at("through").get<double>()};
    for (const json& e : doc.at("entries")) {
        EntryDemand entry;
        entry.lane = e.at("lane").get<LaneId>();
        for (const json& s : e.at("stages"))
            entry.stages.push_back(DemandStage{s.at("t_begin_s").get<double>(),
                                               s.at("t_end_s").get<double>(),
                                               s.at("rate_veh_per_hour").get<double>()});
        demand.entries.push_back(entry);
    }
    return demand;
}

}  // namespace cvlight
