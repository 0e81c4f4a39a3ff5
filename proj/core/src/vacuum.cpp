#include "normweaver/vacuum.hpp"

#include "normweaver/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <deque>
#include <sstream>
#include <unordered_map>

namespace normweaver::vacuum {

using nlohmann::json;

const char* action_name(Action a) {
    switch (a) {
    case Action::East: return "east";
    case Action::West: return "west";
    case Action::Vacuum: return "vacuum";
    case Action::VacuumMess0: return "vacuum_m0";
    case Action::VacuumMess1: return "vacuum_m1";
    case Action::Dock: return "dock";
    case Action::Undock: return "undock";
    case Action::Wait: return "wait";
    case Action::Warn: return "warn";
    case Action::BeDead: return "beDead";
    }
    return "?";
}

void VacuumConfig::check() const {
    auto prob = [](double p, const char* what) {
        if (!(p >= 0.0 && p <= 1.0)) throw InvalidArgument(std::string(what) + " must lie in [0, 1]");
    };
    prob(human_switch_prob, "human_switch_prob");
    prob(human_mess_prob, "human_mess_prob");
    prob(talk_persist_prob, "talk_persist_prob");
    if (battery_capacity < 1 || battery_capacity > 63) throw InvalidArgument("battery_capacity must lie in [1, 63]");
    if (health_capacity < 1 || health_capacity > 63) throw InvalidArgument("health_capacity must lie in [1, 63]");
    if (dirt_cap < 1 || dirt_cap > 15) throw InvalidArgument("dirt_cap must lie in [1, 15]");
    if (mess_increment < 0 || mess_increment > dirt_cap) throw InvalidArgument("mess_increment must lie in [0, dirt_cap]");
    for (int r : {docker_room, robot_initial_room, human_initial_room})
        if (r < 0 || r > 1) throw InvalidArgument("rooms are 0 (west) and 1 (east)");
    for (int d : initial_dirt)
        if (d < 0 || d > dirt_cap) throw InvalidArgument("initial_dirt must lie in [0, dirt_cap]");
    if (messes.size() > 2) throw InvalidArgument("at most two special messes");
    for (const auto& m : messes) {
        if (m.room < 0 || m.room > 1) throw InvalidArgument("mess room must be 0 or 1");
        if (m.dirt < 0 || m.dirt > 15) throw InvalidArgument("mess dirt must lie in [0, 15]");
    }
    for (int c : {move_cost, vacuum_cost, wait_cost, dock_gain, damage})
        if (c < 0) throw InvalidArgument("costs must be nonnegative");
}

namespace {

void from_json(const json& j, Mess& m) {
    m.name = j.value("name", m.name);
    m.room = j.value("room", m.room);
    m.dirt = j.value("dirt", m.dirt);
    m.damaging = j.value("damaging", m.damaging);
    m.harmful = j.value("harmful", m.harmful);
    m.evaporates = j.value("evaporates", m.evaporates);
}

json to_json_value(const VacuumConfig& c) {
    json messes = json::array();
    for (const auto& m : c.messes)
        messes.push_back({{"name", m.name},
                          {"room", m.room},
                          {"dirt", m.dirt},
                          {"damaging", m.damaging},
                          {"harmful", m.harmful},
                          {"evaporates", m.evaporates}});
    return {{"battery_capacity", c.battery_capacity},
            {"health_capacity", c.health_capacity},
            {"human_switch_prob", c.human_switch_prob},
            {"human_mess_prob", c.human_mess_prob},
            {"mess_increment", c.mess_increment},
            {"dirt_cap", c.dirt_cap},
            {"talk_persist_prob", c.talk_persist_prob},
            {"docker_room", c.docker_room},
            {"robot_initial_room", c.robot_initial_room},
            {"human_initial_room", c.human_initial_room},
            {"human_initially_talking", c.human_initially_talking},
            {"human_moves_while_talking", c.human_moves_while_talking},
            {"warn_enabled", c.warn_enabled},
            {"move_cost", c.move_cost},
            {"vacuum_cost", c.vacuum_cost},
            {"wait_cost", c.wait_cost},
            {"dock_gain", c.dock_gain},
            {"damage", c.damage},
            {"initial_dirt", c.initial_dirt},
            {"messes", messes}};
}

void apply_json(VacuumConfig& c, const json& j) {
    if (!j.is_object()) throw InvalidArgument("scenario overrides must be a JSON object");
    const json known = to_json_value(c);
    for (const auto& [key, value] : j.items()) {
        if (!known.contains(key)) throw InvalidArgument("unknown scenario field '" + key + "'");
        try {
            if (key == "battery_capacity") c.battery_capacity = value.get<int>();
            else if (key == "health_capacity") c.health_capacity = value.get<int>();
            else if (key == "human_switch_prob") c.human_switch_prob = value.get<double>();
            else if (key == "human_mess_prob") c.human_mess_prob = value.get<double>();
            else if (key == "mess_increment") c.mess_increment = value.get<int>();
            else if (key == "dirt_cap") c.dirt_cap = value.get<int>();
            else if (key == "talk_persist_prob") c.talk_persist_prob = value.get<double>();
            else if (key == "docker_room") c.docker_room = value.get<int>();
            else if (key == "robot_initial_room") c.robot_initial_room = value.get<int>();
            else if (key == "human_initial_room") c.human_initial_room = value.get<int>();
            else if (key == "human_initially_talking") c.human_initially_talking = value.get<bool>();
            else if (key == "human_moves_while_talking") c.human_moves_while_talking = value.get<bool>();
            else if (key == "warn_enabled") c.warn_enabled = value.get<bool>();
            else if (key == "move_cost") c.move_cost = value.get<int>();
            else if (key == "vacuum_cost") c.vacuum_cost = value.get<int>();
            else if (key == "wait_cost") c.wait_cost = value.get<int>();
            else if (key == "dock_gain") c.dock_gain = value.get<int>();
            else if (key == "damage") c.damage = value.get<int>();
            else if (key == "initial_dirt") c.initial_dirt = value.get<std::array<int, 2>>();
            else if (key == "messes") {
                c.messes.clear();
                for (const auto& m : value) {
                    Mess mess;
                    from_json(m, mess);
                    c.messes.push_back(mess);
                }
            }
        } catch (const json::exception& e) {
            throw InvalidArgument("bad value for '" + key + "': " + e.what());
        }
    }
    c.check();
}

std::uint64_t pack(const VacuumState& s) {
    std::uint64_t k = 0;
    int shift = 0;
    auto put = [&](std::uint64_t v, int bits) {
        k |= v << shift;
        shift += bits;
    };
    put(static_cast<std::uint64_t>(s.robot_room), 1);
    put(s.docked, 1);
    put(static_cast<std::uint64_t>(s.battery), 6);
    put(static_cast<std::uint64_t>(s.health), 6);
    put(static_cast<std::uint64_t>(s.human_room), 1);
    for (int d : s.dirt) put(static_cast<std::uint64_t>(d), 4);
    for (int d : s.mess_dirt) put(static_cast<std::uint64_t>(d), 4);
    for (bool w : s.warned) put(w, 1);
    put(s.talking, 1);
    put(s.just_damaged, 1);
    put(s.just_injured, 1);
    put(s.just_talked, 1);
    return k;
}

bool unwarned_hazard(const VacuumState& s, const VacuumConfig& cfg, int room) {
    for (std::size_t i = 0; i < cfg.messes.size(); ++i)
        if (cfg.messes[i].harmful && cfg.messes[i].room == room && s.mess_dirt[i] > 0 && !s.warned[i]) return true;
    return false;
}

bool warn_available(const VacuumState& s, const VacuumConfig& cfg) {
    if (!cfg.warn_enabled || s.robot_room != s.human_room) return false;
    for (std::size_t i = 0; i < cfg.messes.size(); ++i)
        if (cfg.messes[i].harmful && s.mess_dirt[i] > 0 && !s.warned[i]) return true;
    return false;
}

} // namespace

void apply_overrides(VacuumConfig& cfg, const std::string& json_text) {
    json j;
    try {
        j = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), 0, e.byte);
    }
    apply_json(cfg, j);
}

void apply_override(VacuumConfig& cfg, const std::string& assignment) {
    auto eq = assignment.find('=');
    if (eq == std::string::npos) throw InvalidArgument("override must look like key=value");
    const auto key = assignment.substr(0, eq);
    const auto text = assignment.substr(eq + 1);
    json value = json::parse(text, nullptr, false);
    if (value.is_discarded()) value = text;
    apply_json(cfg, json{{key, value}});
}

std::string config_to_json(const VacuumConfig& cfg) { return to_json_value(cfg).dump(1); }

VacuumState initial_state(const VacuumConfig& cfg) {
    cfg.check();
    VacuumState s;
    s.robot_room = cfg.robot_initial_room;
    s.battery = cfg.battery_capacity;
    s.health = cfg.health_capacity;
    s.human_room = cfg.human_initial_room;
    s.dirt = cfg.initial_dirt;
    for (std::size_t i = 0; i < cfg.messes.size(); ++i) s.mess_dirt[i] = cfg.messes[i].dirt;
    s.talking = cfg.human_initially_talking;
    return s;
}

std::vector<Action> available(const VacuumState& s, const VacuumConfig& cfg) {
    if (s.dead()) return {Action::BeDead};
    if (s.docked) return {Action::Undock, Action::Wait};
    std::vector<Action> out;
    if (s.robot_room == 0) out.push_back(Action::East);
    if (s.robot_room == 1) out.push_back(Action::West);
    if (s.dirt[s.robot_room] > 0) out.push_back(Action::Vacuum);
    for (std::size_t i = 0; i < cfg.messes.size(); ++i)
        if (cfg.messes[i].room == s.robot_room && s.mess_dirt[i] > 0)
            out.push_back(i == 0 ? Action::VacuumMess0 : Action::VacuumMess1);
    if (s.robot_room == cfg.docker_room) out.push_back(Action::Dock);
    out.push_back(Action::Wait);
    if (warn_available(s, cfg)) out.push_back(Action::Warn);
    return out;
}

std::vector<std::pair<VacuumState, double>> transition(const VacuumState& s, Action a, const VacuumConfig& cfg) {
    const auto avail = available(s, cfg);
    if (std::find(avail.begin(), avail.end(), a) == avail.end())
        throw InvalidArgument(std::string("action ") + action_name(a) + " is unavailable");

    VacuumState r = s;
    r.just_damaged = r.just_injured = r.just_talked = false;
    std::array<bool, 2> vacuumed{false, false};
    auto spend = [&](int cost) { r.battery = std::max(0, r.battery - cost); };

    switch (a) {
    case Action::East:
        r.robot_room = 1;
        spend(cfg.move_cost);
        break;
    case Action::West:
        r.robot_room = 0;
        spend(cfg.move_cost);
        break;
    case Action::Vacuum:
        r.dirt[r.robot_room] -= 1;
        spend(cfg.vacuum_cost);
        break;
    case Action::VacuumMess0:
    case Action::VacuumMess1: {
        const std::size_t i = a == Action::VacuumMess0 ? 0 : 1;
        r.mess_dirt[i] -= 1;
        vacuumed[i] = true;
        spend(cfg.vacuum_cost);
        if (cfg.messes[i].damaging) {
            r.health = std::max(0, r.health - cfg.damage);
            r.just_damaged = true;
        }
        break;
    }
    case Action::Dock: r.docked = true; break;
    case Action::Undock: r.docked = false; break;
    case Action::Wait:
        if (r.docked) {
            r.battery = std::min(cfg.battery_capacity, r.battery + cfg.dock_gain);
        } else {
            spend(cfg.wait_cost);
        }
        break;
    case Action::Warn:
        spend(cfg.wait_cost);
        for (std::size_t i = 0; i < cfg.messes.size(); ++i)
            if (cfg.messes[i].harmful && r.mess_dirt[i] > 0) r.warned[i] = true;
        r.just_talked = true;
        break;
    case Action::BeDead: break;
    }

    for (std::size_t i = 0; i < cfg.messes.size(); ++i) {
        if (cfg.messes[i].evaporates && !vacuumed[i] && r.mess_dirt[i] > 0) r.mess_dirt[i] -= 1;
        if (r.mess_dirt[i] == 0) r.warned[i] = false;
    }

    std::vector<std::pair<VacuumState, double>> out;
    auto add = [&](const VacuumState& v, double p) {
        if (p <= 0.0) return;
        for (auto& [w, q] : out)
            if (w == v) {
                q += p;
                return;
            }
        out.emplace_back(v, p);
    };

    std::vector<std::pair<bool, double>> talk;
    if (s.talking) {
        talk = {{true, cfg.talk_persist_prob}, {false, 1.0 - cfg.talk_persist_prob}};
    } else {
        talk = {{false, 1.0}};
    }
    const int from = s.human_room;
    for (const auto& [talking, pt] : talk) {
        // A human on the phone at the start of the step stays put.
        const bool can_move = !s.talking || cfg.human_moves_while_talking;
        const double pm = can_move ? cfg.human_switch_prob : 0.0;
        for (const bool moved : {false, true}) {
            const double p_move = moved ? pm : 1.0 - pm;
            for (const bool mess : {false, true}) {
                const double p_mess = mess ? cfg.human_mess_prob : 1.0 - cfg.human_mess_prob;
                VacuumState v = r;
                v.talking = talking;
                if (mess) v.dirt[from] = std::min(cfg.dirt_cap, v.dirt[from] + cfg.mess_increment);
                if (moved) {
                    v.human_room = 1 - from;
                    if (unwarned_hazard(v, cfg, v.human_room)) v.just_injured = true;
                }
                add(v, pt * p_move * p_mess);
            }
        }
    }
    return out;
}

Valuation labeling(const VacuumState& s, const AtomTable& atoms) {
    Valuation v;
    const bool clean = s.dirt[0] == 0 && s.dirt[1] == 0 && s.mess_dirt[0] == 0 && s.mess_dirt[1] == 0;
    if (clean) v.insert(atoms.at("roomsClean"));
    if (s.just_damaged) v.insert(atoms.at("robotDamaged"));
    v.insert(atoms.at("human_h1"));
    if (s.just_injured) v.insert(atoms.at("injured_h1"));
    if (s.talking) v.insert(atoms.at("talking_h1"));
    if (s.just_talked) v.insert(atoms.at("talk_r"));
    return v;
}

std::string describe(const VacuumState& s, const VacuumConfig& cfg) {
    std::ostringstream os;
    os << "R" << s.robot_room + 1 << (s.docked ? "d" : "") << ":b" << s.battery << ":h" << s.health << ":H"
       << s.human_room + 1 << (s.talking ? "t" : "") << ":dirt" << s.dirt[0] << "/" << s.dirt[1];
    for (std::size_t i = 0; i < cfg.messes.size(); ++i)
        os << ":" << cfg.messes[i].name << s.mess_dirt[i] << (s.warned[i] ? "w" : "");
    if (s.just_damaged) os << ":damaged";
    if (s.just_injured) os << ":injured";
    if (s.just_talked) os << ":talked";
    return os.str();
}

VacuumMdp build_mdp(const VacuumConfig& cfg) {
    cfg.check();
    MdpBuilder b{AtomTable(atom_names())};
    for (int a = 0; a <= static_cast<int>(Action::BeDead); ++a) {
        std::string name = action_name(static_cast<Action>(a));
        if (a == static_cast<int>(Action::VacuumMess0) && !cfg.messes.empty()) name = "vacuum_" + cfg.messes[0].name;
        if (a == static_cast<int>(Action::VacuumMess1) && cfg.messes.size() > 1) name = "vacuum_" + cfg.messes[1].name;
        b.add_action(name);
    }

    VacuumMdp out;
    std::unordered_map<std::uint64_t, StateId> index;
    auto intern = [&](const VacuumState& s) {
        auto [it, inserted] = index.emplace(pack(s), static_cast<StateId>(out.states.size()));
        if (inserted) {
            out.states.push_back(s);
            b.add_state(describe(s, cfg), labeling(s, b.atoms()));
        }
        return it->second;
    };
    b.set_initial(intern(initial_state(cfg)));
    for (StateId x = 0; x < out.states.size(); ++x) {
        const VacuumState s = out.states[x];
        for (auto a : available(s, cfg))
            for (const auto& [next, p] : transition(s, a, cfg))
                b.add_transition(x, static_cast<ActionId>(a), intern(next), p);
    }
    out.mdp = b.build();
    return out;
}

std::string norm_file(int id) {
    if (id < 1 || id > 4) throw InvalidArgument("scenario must be 1, 2, 3 or 4");
    std::string out = "domain human = h1\n";
    out += "N1 1 :: G roomsClean\n";
    if (id >= 2) out += "N2 200 :: G !robotDamaged\n";
    if (id >= 3) out += "N3 40000 :: forall x:human. G (human(x) -> !injured(x))\n";
    if (id >= 4) out += "N4 5 :: forall h:human. G (human(h) -> (!talk(r) U !talking(h)))\n";
    return out;
}

Scenario scenario(int id) {
    Scenario s;
    s.id = id;
    s.norms = parse_norm_file(norm_file(id)).norms;
    s.planner.gamma = 0.99;
    auto& c = s.config;
    switch (id) {
    case 1: break;
    case 2: c.messes.push_back({"puddle", 0, 3, true, false, true}); break;
    case 3: c.messes.push_back({"glass", 0, 1, true, true, false}); break;
    case 4:
        c.messes.push_back({"glass", 0, 1, true, true, false});
        c.warn_enabled = true;
        c.battery_capacity = 5;
        c.human_mess_prob = 0.0;
        c.human_initially_talking = true;
        break;
    default: throw InvalidArgument("scenario must be 1, 2, 3 or 4");
    }
    return s;
}

} // namespace normweaver::vacuum
