#include "normweaver/error.hpp"
#include "normweaver/vacuum.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace normweaver;
using namespace normweaver::vacuum;

namespace {

bool has(const std::vector<Action>& v, Action a) { return std::find(v.begin(), v.end(), a) != v.end(); }

double prob_where(const std::vector<std::pair<VacuumState, double>>& out, auto pred) {
    double p = 0.0;
    for (const auto& [s, q] : out)
        if (pred(s)) p += q;
    return p;
}

bool labelled(const VacuumState& s, const char* atom) {
    const AtomTable atoms(atom_names());
    return labeling(s, atoms).contains(atoms.at(atom));
}

} // namespace

TEST(Initial, ScenarioOne) {
    const auto sc = scenario(1);
    const auto s = initial_state(sc.config);
    EXPECT_EQ(s.robot_room, 0);
    EXPECT_FALSE(s.docked);
    EXPECT_EQ(s.battery, 10);
    EXPECT_EQ(s.health, 10);
    EXPECT_EQ(s.human_room, 1);
    EXPECT_TRUE(labelled(s, "roomsClean"));
    EXPECT_TRUE(labelled(s, "human_h1"));
    EXPECT_FALSE(labelled(s, "robotDamaged"));
    EXPECT_FALSE(labelled(s, "talk_r"));
}

TEST(Initial, PuddleIsDirty) {
    const auto s = initial_state(scenario(2).config);
    EXPECT_EQ(s.mess_dirt[0], 3);
    EXPECT_FALSE(labelled(s, "roomsClean"));
}

TEST(Initial, ScenarioFourHumanOnThePhone) {
    const auto sc = scenario(4);
    const auto s = initial_state(sc.config);
    EXPECT_TRUE(s.talking);
    EXPECT_EQ(s.human_room, 1);
    EXPECT_EQ(s.battery, 5);
    EXPECT_EQ(sc.norms.size(), 4U);
    EXPECT_THROW(scenario(5), InvalidArgument);
}

TEST(Transition, VacuumRemovesOneUnit) {
    VacuumConfig cfg;
    cfg.human_mess_prob = 0.0;
    auto s = initial_state(cfg);
    s.dirt[0] = 2;
    const auto out = transition(s, Action::Vacuum, cfg);
    for (const auto& [t, p] : out) {
        EXPECT_EQ(t.dirt[0], 1);
        EXPECT_EQ(t.battery, 8);
    }
}

TEST(Transition, DockedWaitRecharges) {
    VacuumConfig cfg;
    auto s = initial_state(cfg);
    s.docked = true;
    s.battery = 3;
    for (const auto& [t, p] : transition(s, Action::Wait, cfg)) EXPECT_EQ(t.battery, 6);
    s.battery = 9;
    for (const auto& [t, p] : transition(s, Action::Wait, cfg)) EXPECT_EQ(t.battery, 10);
}

TEST(Transition, UnavailableActionThrows) {
    VacuumConfig cfg;
    const auto s = initial_state(cfg);
    EXPECT_THROW(transition(s, Action::Vacuum, cfg), InvalidArgument);
    EXPECT_THROW(transition(s, Action::West, cfg), InvalidArgument);
}

TEST(Transition, UnwarnedGlassInjuresEnteringHuman) {
    const auto cfg = scenario(3).config;
    auto s = initial_state(cfg);
    const auto out = transition(s, Action::Wait, cfg);
    EXPECT_NEAR(prob_where(out, [](const VacuumState& t) { return t.just_injured; }), 0.125, 1e-12);
    for (const auto& [t, p] : out) {
        EXPECT_EQ(t.just_injured, t.human_room == 0);
        if (t.just_injured) {
            EXPECT_TRUE(labelled(t, "injured_h1"));
        }
    }
}

TEST(Transition, GlassDamageIsOneStepEvent) {
    auto cfg = scenario(3).config;
    cfg.human_mess_prob = 0.0;
    cfg.human_switch_prob = 0.0;
    const auto s = initial_state(cfg);
    const auto after = transition(s, Action::VacuumMess0, cfg);
    ASSERT_EQ(after.size(), 1U);
    const auto& d = after[0].first;
    EXPECT_TRUE(labelled(d, "robotDamaged"));
    EXPECT_EQ(d.health, 8);
    EXPECT_EQ(d.mess_dirt[0], 0);
    const auto next = transition(d, Action::Wait, cfg);
    EXPECT_FALSE(labelled(next[0].first, "robotDamaged"));
}

TEST(Transition, PuddleEvaporates) {
    auto cfg = scenario(2).config;
    cfg.human_mess_prob = 0.0;
    auto s = initial_state(cfg);
    for (int expect : {2, 1, 0, 0}) {
        s = transition(s, Action::Wait, cfg)[0].first;
        EXPECT_EQ(s.mess_dirt[0], expect);
    }
}

TEST(Transition, WarnNeedsCoLocation) {
    const auto cfg = scenario(4).config;
    auto s = initial_state(cfg);
    EXPECT_FALSE(has(available(s, cfg), Action::Warn));
    s.robot_room = 1;
    ASSERT_TRUE(has(available(s, cfg), Action::Warn));
    const auto out = transition(s, Action::Warn, cfg);
    for (const auto& [t, p] : out) {
        EXPECT_TRUE(t.warned[0]);
        EXPECT_TRUE(labelled(t, "talk_r"));
        EXPECT_EQ(t.battery, s.battery - 1);
    }
    // Talking at the start of the step keeps the human in place.
    for (const auto& [t, p] : out) EXPECT_EQ(t.human_room, 1);
    EXPECT_NEAR(prob_where(out, [](const VacuumState& t) { return t.talking; }), 0.8, 1e-12);
    // Once warned, the option disappears.
    EXPECT_FALSE(has(available(out[0].first, cfg), Action::Warn));
}

TEST(Transition, TalkingDoesNotRestart) {
    auto cfg = scenario(4).config;
    auto s = initial_state(cfg);
    s.talking = false;
    for (const auto& [t, p] : transition(s, Action::Wait, cfg)) EXPECT_FALSE(t.talking);
}

TEST(Dead, OnlyBeDeadAndAbsorbing) {
    VacuumConfig cfg;
    auto s = initial_state(cfg);
    s.battery = 0;
    ASSERT_EQ(available(s, cfg), std::vector<Action>{Action::BeDead});
    cfg.human_mess_prob = 0.0;
    cfg.human_switch_prob = 0.0;
    const auto out = transition(s, Action::BeDead, cfg);
    ASSERT_EQ(out.size(), 1U);
    EXPECT_EQ(out[0].first, s);

    auto h = initial_state(cfg);
    h.health = 0;
    EXPECT_TRUE(h.dead());
    EXPECT_EQ(available(h, cfg), std::vector<Action>{Action::BeDead});
}

TEST(Mdp, ScenariosValidate) {
    for (int id = 1; id <= 4; ++id) {
        const auto vm = build_mdp(scenario(id).config);
        EXPECT_TRUE(validate(vm.mdp).empty()) << id;
        EXPECT_EQ(vm.states.size(), vm.mdp.num_states());
        EXPECT_LE(vm.mdp.num_states(), 100000U);
        EXPECT_EQ(vm.states[vm.mdp.initial()], initial_state(scenario(id).config));
        for (StateId s = 0; s < vm.mdp.num_states(); ++s)
            if (vm.states[s].dead()) {
                ASSERT_EQ(vm.mdp.csr().num_choices(s), 1U);
                const auto c = vm.mdp.csr().first_choice(s);
                EXPECT_EQ(vm.mdp.choice_action(c), static_cast<ActionId>(Action::BeDead));
            }
    }
}

TEST(Mdp, MessActionNamedAfterMess) {
    const auto vm = build_mdp(scenario(3).config);
    EXPECT_EQ(vm.mdp.action_name(static_cast<ActionId>(Action::VacuumMess0)), "vacuum_glass");
}

TEST(Config, OverridesAndChecks) {
    VacuumConfig cfg;
    apply_override(cfg, "human_mess_prob=0");
    EXPECT_EQ(cfg.human_mess_prob, 0.0);
    apply_override(cfg, "battery_capacity=7");
    EXPECT_EQ(cfg.battery_capacity, 7);
    apply_overrides(cfg, R"({"messes": [{"name": "oil", "room": 1, "dirt": 2}]})");
    ASSERT_EQ(cfg.messes.size(), 1U);
    EXPECT_EQ(cfg.messes[0].name, "oil");
    EXPECT_EQ(cfg.messes[0].room, 1);

    VacuumConfig back;
    apply_overrides(back, config_to_json(cfg));
    EXPECT_EQ(back.battery_capacity, 7);
    EXPECT_EQ(back.messes[0].dirt, 2);

    EXPECT_THROW(apply_override(cfg, "battery_capacity"), InvalidArgument);
    EXPECT_THROW(apply_overrides(cfg, "{"), ParseError);
    VacuumConfig bad;
    bad.human_switch_prob = 1.5;
    EXPECT_THROW(bad.check(), InvalidArgument);
    bad = VacuumConfig{};
    bad.mess_increment = 9;
    EXPECT_THROW(initial_state(bad), InvalidArgument);
}

TEST(Config, NormFiles) {
    for (int id = 1; id <= 4; ++id) {
        const auto nf = parse_norm_file(norm_file(id));
        EXPECT_EQ(nf.norms.size(), static_cast<std::size_t>(id));
        EXPECT_EQ(nf.norms[0].name, "N1");
    }
    const auto nf = parse_norm_file(norm_file(4));
    EXPECT_EQ(nf.norms[1].weight, 200.0);
    EXPECT_EQ(nf.norms[2].weight, 40000.0);
    EXPECT_EQ(nf.norms[3].weight, 5.0);
    EXPECT_THROW(norm_file(0), InvalidArgument);
}

TEST(Property, RangesHoldUnderRandomSimulation) {
    std::mt19937_64 rng(113);
    for (int id = 1; id <= 4; ++id) {
        const auto cfg = scenario(id).config;
        auto s = initial_state(cfg);
        for (int step = 0; step < 25000; ++step) {
            const auto acts = available(s, cfg);
            ASSERT_FALSE(acts.empty());
            const auto out = transition(s, acts[rng() % acts.size()], cfg);
            double total = 0.0;
            for (const auto& [t, p] : out) {
                ASSERT_GT(p, 0.0);
                total += p;
            }
            ASSERT_NEAR(total, 1.0, 1e-12);
            double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
            s = out.back().first;
            for (const auto& [t, p] : out) {
                if (u < p) {
                    s = t;
                    break;
                }
                u -= p;
            }
            ASSERT_GE(s.battery, 0);
            ASSERT_LE(s.battery, cfg.battery_capacity);
            ASSERT_GE(s.health, 0);
            ASSERT_LE(s.health, cfg.health_capacity);
            for (int r = 0; r < 2; ++r) {
                ASSERT_GE(s.dirt[r], 0);
                ASSERT_LE(s.dirt[r], cfg.dirt_cap);
                ASSERT_GE(s.mess_dirt[r], 0);
            }
            // Restart after death so the walk keeps exploring.
            if (s.dead()) s = initial_state(cfg);
        }
    }
}
