#pragma once

#include "normweaver/crdra.hpp"
#include "normweaver/mdp.hpp"
#include "normweaver/planner.hpp"

#include <array>
#include <string>
#include <vector>

namespace normweaver::vacuum {

/// A special mess with its own dirt counter (puddle, glass).
struct Mess {
    std::string name = "mess";
    int room = 0;
    int dirt = 1;
    bool damaging = false;   // vacuuming it costs health and raises robotDamaged
    bool harmful = false;    // a human entering its room unwarned is injured
    bool evaporates = false; // loses one unit per step unless vacuumed that step
};

/// Two rooms: 0 (west, docker) and 1 (east).
struct VacuumConfig {
    int battery_capacity = 10;
    int health_capacity = 10;
    double human_switch_prob = 0.125;
    double human_mess_prob = 0.2;
    int mess_increment = 2;
    int dirt_cap = 4;
    double talk_persist_prob = 0.8;
    int docker_room = 0;
    int robot_initial_room = 0;
    int human_initial_room = 1;
    bool human_initially_talking = false;
    bool human_moves_while_talking = false;
    bool warn_enabled = false;
    int move_cost = 1;
    int vacuum_cost = 2;
    int wait_cost = 1;
    int dock_gain = 3;
    int damage = 2;
    std::array<int, 2> initial_dirt{0, 0};
    std::vector<Mess> messes;

    /// Throws InvalidArgument when a field is out of range.
    void check() const;
};

/// Applies a JSON object of field overrides (`messes` replaces the whole list).
void apply_overrides(VacuumConfig& cfg, const std::string& json_text);
/// Applies one `key=value` override; the value is parsed as JSON (bare words as strings).
void apply_override(VacuumConfig& cfg, const std::string& assignment);
std::string config_to_json(const VacuumConfig& cfg);

struct VacuumState {
    int robot_room = 0;
    bool docked = false;
    int battery = 0;
    int health = 0;
    int human_room = 1;
    std::array<int, 2> dirt{0, 0};
    std::array<int, 2> mess_dirt{0, 0};
    std::array<bool, 2> warned{false, false};
    bool talking = false;
    bool just_damaged = false;
    bool just_injured = false;
    bool just_talked = false;

    bool dead() const { return battery == 0 || health == 0; }
    friend bool operator==(const VacuumState&, const VacuumState&) = default;
};

enum class Action { East, West, Vacuum, VacuumMess0, VacuumMess1, Dock, Undock, Wait, Warn, BeDead };
const char* action_name(Action a);

/// Propositions in atom-table order.
inline const std::vector<std::string>& atom_names() {
    static const std::vector<std::string> names{"roomsClean", "robotDamaged", "human_h1", "injured_h1", "talking_h1", "talk_r"};
    return names;
}

VacuumState initial_state(const VacuumConfig& cfg);
std::vector<Action> available(const VacuumState& s, const VacuumConfig& cfg);
/// Outcome distribution; throws InvalidArgument for an unavailable action.
std::vector<std::pair<VacuumState, double>> transition(const VacuumState& s, Action a, const VacuumConfig& cfg);
Valuation labeling(const VacuumState& s, const AtomTable& atoms);
std::string describe(const VacuumState& s, const VacuumConfig& cfg);

struct VacuumMdp {
    LabeledMdp mdp;
    std::vector<VacuumState> states; // by MDP state id
};

/// Reachable-state labeled MDP. Action ids follow the Action enum.
VacuumMdp build_mdp(const VacuumConfig& cfg);

struct Scenario {
    int id = 0;
    VacuumConfig config;
    std::vector<Norm> norms;
    PlannerConfig planner;
};

/// Scenarios 1–4 with their norms and γ = 0.99. Throws InvalidArgument otherwise.
Scenario scenario(int id);

/// Norm text of N1–N4 in norm-file syntax (with the `domain human = h1` line).
std::string norm_file(int scenario_id);

} // namespace normweaver::vacuum
