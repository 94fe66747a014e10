#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

namespace cvlight {

using LaneId = int;
using LinkId = int;
using IntersectionId = int;
using MovementId = int;
constexpr int kNone = -1;

enum class Turn : uint8_t { through = 0, left = 1, right = 2 };
enum class Heading : uint8_t { north = 0, east = 1, south = 2, west = 3 };

const char* to_string(Turn t);
const char* to_string(Heading h);
Heading turned(Heading h, Turn t);

// A link is one directed roadway between two nodes. It carries two lanes:
// index 0 is the through+right lane, index 1 the left-turn lane.
struct Link {
    LinkId id = kNone;
    Heading heading = Heading::east;
    bool arterial = false;
    IntersectionId from = kNone;  // kNone: starts at the network boundary
    IntersectionId to = kNone;    // kNone: ends at the network boundary
    std::array<LaneId, 2> lanes{kNone, kNone};
};

struct Lane {
    LaneId id = kNone;
    LinkId link = kNone;
    int index_in_link = 0;  // 0 = through+right, 1 = left
    double length_m = 0.0;
    double speed_limit_mps = 0.0;
    IntersectionId upstream = kNone;
    IntersectionId downstream = kNone;

    bool is_entry() const { return upstream == kNone; }
    bool is_exit() const { return downstream == kNone; }
};

struct Movement {
    MovementId id = kNone;
    IntersectionId intersection = kNone;
    LaneId from_lane = kNone;
    LaneId to_lane = kNone;  // role-matched lane of the destination link
    LinkId to_link = kNone;
    Turn turn = Turn::through;
};

struct Phase {
    std::vector<MovementId> movements;
};

struct PhasePlan {
    std::vector<Phase> phases;
    double min_green_s = 7.0;
    double max_green_s = 40.0;
    double yellow_s = 1.0;
    double all_red_s = 2.0;
};

struct Intersection {
    IntersectionId id = kNone;
    std::string name;
    int row = 0;
    int col = 0;
    std::vector<LaneId> incoming;  // ordered by (link heading, lane index)
    std::vector<LaneId> outgoing;  // same ordering
    std::vector<MovementId> movements;
    PhasePlan plan;
    int arterial_phase = kNone;  // phase serving the arterial direction
};

struct RoadNetwork {
    std::vector<Lane> lanes;
    std::vector<Link> links;
    std::vector<Movement> movements;
    std::vector<Intersection> intersections;
    std::vector<LaneId> entry_lanes;
    std::vector<LaneId> exit_lanes;
    double detection_radius_m = 200.0;
    double vehicle_length_m = 5.0;
    double min_gap_m = 2.5;

    const Lane& lane(LaneId id) const { return lanes[static_cast<size_t>(id)]; }
    const Link& link(LinkId id) const { return links[static_cast<size_t>(id)]; }
    const Movement& movement(MovementId id) const { return movements[static_cast<size_t>(id)]; }
    const Intersection& intersection(IntersectionId id) const {
        return intersections[static_cast<size_t>(id)];
    }

    double vehicle_footprint_m() const { return vehicle_length_m + min_gap_m; }
    int capacity(LaneId id) const;

    // The outgoing lane paired with an incoming lane for pressure: the
    // role-matched lane of the straight-ahead link, or the lane's first
    // movement target when no straight-ahead link exists.
    LaneId pressure_pair(LaneId incoming) const;

    // Movement from `from_lane` with the given turn, or kNone.
    MovementId find_movement(LaneId from_lane, Turn turn) const;
    std::vector<MovementId> movements_from(LaneId from_lane) const;
};

// floor(length / footprint), at least one storable vehicle.
int lane_capacity(double length_m, double vehicle_length_m, double min_gap_m);

struct DemandStage {
    double t_begin_s = 0.0;
    double t_end_s = 0.0;
    double rate_veh_per_hour = 0.0;  // per lane
};

struct TurnProportions {
    double left = 0.1;
    double right = 0.1;
    double through = 0.8;
};

struct EntryDemand {
    LaneId lane = kNone;
    std::vector<DemandStage> stages;
};

struct DemandSpec {
    std::vector<EntryDemand> entries;
    TurnProportions turns;
    double cv_penetration = 0.1;

    double rate_at(LaneId lane, double t) const;
    std::vector<std::string> validate(const RoadNetwork& net) const;
};

struct GridSpec {
    int rows = 2;
    int cols = 2;
    double lane_length_m = 200.0;
    double speed_limit_mps = 13.89;
    PhasePlan plan_template;  // phases are generated; timing fields are used
    bool one_way_arterials = false;
    double detection_radius_m = 200.0;
};

// rows x cols grid with east-west arterials; each two-way approach carries a
// through+right lane and a left lane. With one_way_arterials, east-west rows
// alternate east/west one-way couplets while side streets stay two-way.
RoadNetwork build_grid(const GridSpec& spec);

// Every violated invariant, not just the first. Empty means well-formed.
std::vector<std::string> validate(const RoadNetwork& net);

nlohmann::json network_to_json(const RoadNetwork& net);
RoadNetwork network_from_json(const nlohmann::json& doc);

nlohmann::json demand_to_json(const DemandSpec& demand);
DemandSpec demand_from_json(const nlohmann::json& doc);

}  // namespace cvlight
