#include "normweaver/error.hpp"
#include "normweaver/planner.hpp"
#include "normweaver/value_iteration.hpp"
#include "normweaver/vacuum.hpp"
#include "support.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <optional>
#include <random>

using namespace normweaver;

namespace {

Norm norm(std::string_view text, double w = 1.0, std::string name = "n") {
    AtomTable atoms;
    return Norm{std::move(name), w, parse_ltl(text, atoms)};
}

Valuation val(const AtomTable& atoms, std::initializer_list<const char*> names) {
    Valuation v;
    for (auto n : names) v.insert(atoms.at(n));
    return v;
}

LabeledMdp single_state(bool p) {
    MdpBuilder b{AtomTable({"p"})};
    const auto go = b.add_action("go");
    const auto s = b.add_state("s", p ? val(b.atoms(), {"p"}) : Valuation{});
    b.add_transition(s, go, s, 1.0);
    return b.build();
}

// s0 (no p) -> s1 (p), s1 absorbing.
LabeledMdp enter_good() {
    MdpBuilder b{AtomTable({"p"})};
    const auto go = b.add_action("go");
    const auto s0 = b.add_state("s0", {});
    const auto s1 = b.add_state("s1", val(b.atoms(), {"p"}));
    b.add_transition(s0, go, s1, 1.0);
    b.add_transition(s1, go, s1, 1.0);
    return b.build();
}

// a: "stay" loops for free; "go" visits b, which has p. b returns to a.
LabeledMdp loop_or_visit() {
    MdpBuilder b{AtomTable({"p"})};
    const auto stay = b.add_action("stay");
    const auto go = b.add_action("go");
    const auto a = b.add_state("a", {});
    const auto bb = b.add_state("b", val(b.atoms(), {"p"}));
    b.add_transition(a, stay, a, 1.0);
    b.add_transition(a, go, bb, 1.0);
    b.add_transition(bb, go, a, 1.0);
    return b.build();
}

std::optional<AmalgamatedPolicy> try_plan(const LabeledMdp& m, const std::vector<Norm>& norms, const PlannerConfig& cfg) {
    try {
        return plan(m, norms, cfg);
    } catch (const NoAmecFound&) {
        return std::nullopt;
    }
}

double bellman(const AmalgamatedPolicy& pol, StateId x) {
    const auto& p = *pol.product;
    const auto& g = p.csr();
    double best = std::numeric_limits<double>::infinity();
    for (auto c = g.first_choice(x); c < g.end_choice(x); ++c) {
        double q = p.choice_weight(c);
        const auto succ = g.successors(c);
        const auto pr = g.probabilities(c);
        for (std::size_t k = 0; k < succ.size(); ++k) q += pol.config.gamma * pr[k] * pol.viol[succ[k]];
        best = std::min(best, q);
    }
    return best;
}

} // namespace

TEST(Config, Validation) {
    PlannerConfig cfg;
    EXPECT_NO_THROW(cfg.check());
    cfg.gamma = 1.0;
    EXPECT_THROW(cfg.check(), InvalidArgument);
    cfg = {};
    cfg.epsilon = 0.0;
    EXPECT_THROW(cfg.check(), InvalidArgument);
    cfg = {};
    cfg.tolerance = 0.0;
    EXPECT_THROW(cfg.check(), InvalidArgument);
    EXPECT_THROW(plan(single_state(true), {}, PlannerConfig{}), InvalidArgument);
}

TEST(AmecVi, ZeroCostAmec) {
    const auto pol = plan(single_state(true), {norm("G p")}, PlannerConfig{});
    EXPECT_EQ(pol.initial_value(), 0.0);
    for (StateId x = 1; x < pol.product->num_states(); ++x)
        if (pol.amec.amec_of[x] >= 0) {
            EXPECT_EQ(pol.amec.value[x], 0.0);
        }
}

TEST(AmecVi, SuspendForever) {
    const auto pol = plan(single_state(false), {norm("G p")}, PlannerConfig{});
    const auto& p = *pol.product;
    bool found = false;
    for (StateId x = 1; x < p.num_states(); ++x) {
        if (pol.amec.amec_of[x] < 0) continue;
        EXPECT_NEAR(pol.amec.value[x], 100.0, 1e-6);
        found = true;
    }
    EXPECT_TRUE(found);
    EXPECT_NEAR(pol.max_cost(), 100.0, 1e-12);
    // Keeping at the dummy step enters the violated sink, which is frozen at the maximum cost one step later.
    EXPECT_NEAR(pol.initial_value(), 99.0, 1e-6);
}

TEST(AmecVi, TwoStateHandSolved) {
    // a -> b -> a forced; b has p and the norm is G !p with w=1. Inside the AMEC the norm is suspended on every
    // move into b: v_a = 1 + g v_b, v_b = g v_a, so v_a = 1/(1-g^2) and v_b = g/(1-g^2).
    MdpBuilder b{AtomTable({"p"})};
    const auto go = b.add_action("go");
    const auto sa = b.add_state("a", {});
    const auto sb = b.add_state("b", val(b.atoms(), {"p"}));
    b.add_transition(sa, go, sb, 1.0);
    b.add_transition(sb, go, sa, 1.0);
    PlannerConfig cfg;
    cfg.gamma = 0.5;
    const auto pol = plan(b.build(), {norm("G !p")}, cfg);
    const auto& p = *pol.product;
    int seen = 0;
    for (StateId x = 1; x < p.num_states(); ++x) {
        if (pol.amec.amec_of[x] < 0) continue;
        const double expected = p.env_state(x) == sa ? 1.0 / 0.75 : 0.5 / 0.75;
        EXPECT_NEAR(pol.amec.value[x], expected, 1e-8) << p.describe(x);
        ++seen;
    }
    EXPECT_EQ(seen, 2);
    for (StateId x = 0; x < p.num_states(); ++x)
        if (!pol.no_update[x]) {
            EXPECT_NEAR(pol.viol[x], bellman(pol, x), 1e-8);
        }
}

TEST(Meta, OptimalRestrictionStillAccepting) {
    // Single G F p over the visit loop: every cycle is free and the restriction keeps the a -> b -> a cycle.
    const auto pol = plan(loop_or_visit(), {norm("G F p")}, PlannerConfig{});
    EXPECT_GE(pol.interior.meta_components, 1U);
    const auto& p = *pol.product;
    bool meta_a = false, meta_b = false;
    for (StateId x = 1; x < p.num_states(); ++x) {
        if (pol.interior.mode[x] != InteriorMode::Meta) continue;
        (p.env_state(x) == 0 ? meta_a : meta_b) = true;
    }
    EXPECT_TRUE(meta_a && meta_b);
    EXPECT_NEAR(pol.initial_value(), 0.0, 1e-9);
}

TEST(Meta, FreeNonAcceptingLoopFallsBack) {
    // G F p is satisfied only by visiting b, which G !p prices at 1 per visit. The AMEC values ignore acceptance,
    // so the free self-loop at a is the optimal restriction and no accepting component survives inside it.
    PlannerConfig cfg;
    const auto pol = plan(loop_or_visit(), {norm("G F p", 0.001), norm("G !p", 1.0)}, cfg);
    EXPECT_GT(pol.interior.fallback_states, 0U);
}

TEST(Meta, EpsilonGreedyFrequency) {
    PlannerConfig cfg;
    cfg.epsilon = 0.01;
    auto pol = plan(loop_or_visit(), {norm("G F p", 0.001), norm("G !p", 1.0)}, cfg);
    StateId x = 0;
    for (StateId s = 1; s < pol.product->num_states(); ++s)
        if (pol.interior.mode[s] == InteriorMode::EpsilonGreedy) {
            x = s;
            break;
        }
    ASSERT_NE(x, 0U);
    pol.follow_interior[x] = 1;
    std::mt19937_64 rng(7);
    int best = 0;
    const int draws = 10000;
    for (int i = 0; i < draws; ++i) best += pol.choose(x, rng) == pol.interior.best[x];
    const double expected = 1.0 - cfg.epsilon + cfg.epsilon / static_cast<double>(pol.interior.choices[x].size());
    EXPECT_NEAR(static_cast<double>(best) / draws, expected, 0.005);
}

TEST(Global, FreeEntryIntoZeroCostAmec) {
    const auto pol = plan(enter_good(), {norm("F p")}, PlannerConfig{});
    EXPECT_NEAR(pol.initial_value(), 0.0, 1e-12);
}

TEST(Global, OneSuspensionAtStart) {
    const auto pol = plan(enter_good(), {norm("G p")}, PlannerConfig{});
    EXPECT_NEAR(pol.initial_value(), 1.0, 1e-9);
    const auto c = pol.preferred(ConflictProduct::kDummy);
    EXPECT_EQ(pol.product->choice_mask(c), 1U);
}

TEST(Global, NoAmecIsReported) {
    EXPECT_THROW(plan(single_state(false), {norm("F p")}, PlannerConfig{}), NoAmecFound);
}

TEST(Scenario, PuddleIsLeftToEvaporate) {
    auto sc = vacuum::scenario(2);
    sc.config.human_mess_prob = 0.0;
    const auto vm = vacuum::build_mdp(sc.config);
    const auto pol = plan(vm.mdp, sc.norms, sc.planner);
    EXPECT_NEAR(pol.initial_value(), 2.9701, 1e-4);
    // Walk the states the policy can actually reach.
    const auto& g = pol.product->csr();
    std::vector<char> seen(pol.product->num_states(), 0);
    std::vector<StateId> stack{ConflictProduct::kDummy};
    seen[0] = 1;
    while (!stack.empty()) {
        const auto x = stack.back();
        stack.pop_back();
        for (auto c : pol.support(x)) {
            if (x != ConflictProduct::kDummy) {
                ASSERT_NE(vm.mdp.action_name(pol.product->choice_action(c)), "vacuum_puddle") << pol.product->describe(x);
            }
            for (auto t : g.successors(c))
                if (!seen[t]) {
                    seen[t] = 1;
                    stack.push_back(t);
                }
        }
    }
}

TEST(Scenario, GlassIsVacuumedFirst) {
    const auto sc = vacuum::scenario(3);
    const auto vm = vacuum::build_mdp(sc.config);
    const auto pol = plan(vm.mdp, sc.norms, sc.planner);
    const auto& p = *pol.product;
    const auto entry = p.csr().successors(pol.preferred(ConflictProduct::kDummy))[0];
    for (auto c : pol.support(entry)) EXPECT_EQ(vm.mdp.action_name(p.choice_action(c)), "vacuum_glass");
}

TEST(PlannerProperty, InvariantsOnRandomInstances) {
    std::mt19937_64 rng(101);
    PlannerConfig cfg;
    cfg.gamma = 0.9;
    int planned = 0;
    for (int i = 0; i < 150; ++i) {
        const auto m = nwtest::random_mdp(rng, 4, 2);
        std::vector<Norm> norms{Norm{"a", 1.0, nwtest::random_fragment_formula(rng)},
                                Norm{"b", 3.0, nwtest::random_fragment_formula(rng)}};
        const auto pol = try_plan(m, norms, cfg);
        if (!pol) continue;
        ++planned;
        for (StateId x = 0; x < pol->product->num_states(); ++x) {
            ASSERT_GE(pol->viol[x], -1e-12);
            ASSERT_LE(pol->viol[x], pol->max_cost() + 1e-9);
            if (pol->no_update[x]) {
                ASSERT_EQ(pol->viol[x], pol->max_cost());
                continue;
            }
            ASSERT_FALSE(pol->restriction[x].empty());
            ASSERT_NEAR(pol->viol[x], bellman(*pol, x), 1e-6);
            if (pol->amec.amec_of[x] >= 0) {
                ASSERT_LE(pol->viol[x], pol->amec.value[x] + 1e-7);
            }
        }
    }
    EXPECT_GT(planned, 50);
}

TEST(PlannerProperty, RaisingAWeightNeverHelps) {
    std::mt19937_64 rng(103);
    PlannerConfig cfg;
    cfg.gamma = 0.9;
    for (int i = 0; i < 80; ++i) {
        const auto m = nwtest::random_mdp(rng, 4, 2);
        std::vector<Norm> norms{Norm{"a", 1.0, nwtest::random_fragment_formula(rng)},
                                Norm{"b", 2.0, nwtest::random_fragment_formula(rng)}};
        const auto base = try_plan(m, norms, cfg);
        if (!base) continue;
        norms[1].weight = 5.0;
        const auto heavier = try_plan(m, norms, cfg);
        ASSERT_TRUE(heavier.has_value());
        ASSERT_GE(heavier->initial_value(), base->initial_value() - 1e-7);
    }
}

TEST(PlannerProperty, ScaleEquivariance) {
    std::mt19937_64 rng(107);
    PlannerConfig cfg;
    cfg.gamma = 0.9;
    for (int i = 0; i < 80; ++i) {
        const auto m = nwtest::random_mdp(rng, 4, 2);
        std::vector<Norm> norms{Norm{"a", 1.0, nwtest::random_fragment_formula(rng)},
                                Norm{"b", 2.0, nwtest::random_fragment_formula(rng)}};
        const auto base = try_plan(m, norms, cfg);
        if (!base) continue;
        for (auto& n : norms) n.weight *= 4.0;
        const auto scaled = try_plan(m, norms, cfg);
        ASSERT_TRUE(scaled.has_value());
        for (StateId x = 0; x < base->product->num_states(); ++x) {
            ASSERT_NEAR(scaled->viol[x], 4.0 * base->viol[x], 1e-6 * std::max(1.0, scaled->viol[x]));
            ASSERT_EQ(scaled->restriction[x], base->restriction[x]) << base->product->describe(x);
        }
    }
}

TEST(PlannerProperty, MatchesHorizonSearch) {
    std::mt19937_64 rng(109);
    PlannerConfig cfg;
    cfg.gamma = 0.99;
    int checked = 0;
    while (checked < 30) {
        const auto m = nwtest::random_mdp(rng, 2, 2);
        std::vector<Crdra> crdras;
        std::vector<Norm> norms;
        for (double w : {1.0, 2.0}) {
            norms.push_back(Norm{"n", w, nwtest::random_fragment_formula(rng)});
            crdras.push_back(build_crdra(norms.back(), compile_norm(norms.back())));
        }
        const auto oracle = nwtest::conflict_oracle(m, crdras, cfg.gamma, 12);
        if (oracle.states > 8 || !oracle.has_amec) continue;
        const auto pol = plan(m, norms, cfg);
        const double bound = std::pow(cfg.gamma, 12) * oracle.max_cost;
        ASSERT_LE(std::abs(pol.initial_value() - oracle.horizon_value), bound + 1e-9);
        ++checked;
    }
}

TEST(ValueIteration, JacobiIsThreadCountInvariant) {
    std::mt19937_64 rng(113);
    const auto m = nwtest::random_mdp(rng, 60, 3);
    std::vector<double> cost(m.csr().num_choices());
    std::uniform_real_distribution<double> u(0.0, 5.0);
    for (auto& c : cost) c = u(rng);
    ViProblem p;
    p.mdp = &m.csr();
    p.discount = 0.95;
    p.choice_cost = cost;
    p.sweep = Sweep::Jacobi;
    p.threads = 1;
    const auto one = value_iteration(p, std::vector<double>(m.num_states(), 0.0));
    p.threads = 4;
    const auto four = value_iteration(p, std::vector<double>(m.num_states(), 0.0));
    EXPECT_EQ(one.sweeps, four.sweeps);
    EXPECT_EQ(one.values, four.values);
    p.sweep = Sweep::GaussSeidel;
    const auto gs = value_iteration(p, std::vector<double>(m.num_states(), 0.0));
    for (StateId s = 0; s < m.num_states(); ++s) EXPECT_NEAR(gs.values[s], one.values[s], 1e-6);
}
