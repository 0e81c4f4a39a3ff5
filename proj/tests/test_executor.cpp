#include "normweaver/error.hpp"
#include "normweaver/executor.hpp"
#include "normweaver/vacuum.hpp"
#include "support.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <cmath>
#include <map>
#include <optional>
#include <random>
#include <set>

using namespace normweaver;

namespace {

Norm norm(std::string_view text, double w = 1.0, std::string name = "n") {
    AtomTable atoms;
    return Norm{std::move(name), w, parse_ltl(text, atoms)};
}

LabeledMdp single_state(bool p) {
    MdpBuilder b{AtomTable({"p", "q"})};
    const auto go = b.add_action("go");
    Valuation v;
    if (p) v.insert(0);
    const auto s = b.add_state("s", v);
    b.add_transition(s, go, s, 1.0);
    return b.build();
}

std::optional<AmalgamatedPolicy> try_plan(const LabeledMdp& m, const std::vector<Norm>& norms, double gamma = 0.9) {
    PlannerConfig cfg;
    cfg.gamma = gamma;
    cfg.prune_dominated = false;
    try {
        return plan(m, norms, cfg);
    } catch (const NoAmecFound&) {
        return std::nullopt;
    }
}

// Random walk of `length` observed states, following uniformly drawn actions.
std::vector<std::pair<ActionId, StateId>> random_history(const LabeledMdp& m, std::mt19937_64& rng, std::size_t length) {
    std::vector<std::pair<ActionId, StateId>> out;
    StateId s = m.initial();
    for (std::size_t t = 0; t < length; ++t) {
        const auto& g = m.csr();
        const auto first = g.first_choice(s), last = g.end_choice(s);
        const auto c = first + static_cast<ChoiceId>(rng() % (last - first));
        const auto succ = g.successors(c);
        const auto next = succ[rng() % succ.size()];
        out.emplace_back(m.choice_action(c), next);
        s = next;
    }
    return out;
}

} // namespace

TEST(Interpreter, KeepableStartCostsNothing) {
    const auto pol = plan(single_state(true), {norm("G p")}, PlannerConfig{});
    const HistoryInterpreter h(pol, 0);
    EXPECT_EQ(h.time(), 0U);
    EXPECT_EQ(h.selected_cost(), 0.0);
    EXPECT_FALSE(h.fell_back());
}

TEST(Interpreter, ViolatedStartSuspends) {
    const auto pol = plan(single_state(false), {norm("G p")}, PlannerConfig{});
    const HistoryInterpreter h(pol, 0);
    // live (suspended) and sink (kept)
    EXPECT_EQ(h.candidates().size(), 2U);
    EXPECT_EQ(h.selected_cost(), 1.0);
    EXPECT_EQ(h.candidates()[h.selected()].mask, 1U);
}

TEST(Interpreter, CandidateBoundForTwoNorms) {
    std::mt19937_64 rng(101);
    for (int i = 0; i < 50; ++i) {
        const auto m = nwtest::random_mdp(rng, 4, 2);
        const std::vector<Norm> norms{Norm{"a", 1.0, nwtest::random_fragment_formula(rng)},
                                      Norm{"b", 2.0, nwtest::random_fragment_formula(rng)}};
        const auto pol = try_plan(m, norms);
        if (!pol) continue;
        const HistoryInterpreter h(*pol, m.initial());
        const auto& c = pol->product->crdras();
        EXPECT_LE(h.candidates().size(), c[0].num_states() * c[1].num_states());
    }
}

TEST(Interpreter, RejectsWrongInitialState) {
    MdpBuilder b{AtomTable({"p"})};
    const auto go = b.add_action("go");
    const auto s0 = b.add_state("s0", {});
    const auto s1 = b.add_state("s1", {});
    b.add_transition(s0, go, s1, 1.0);
    b.add_transition(s1, go, s1, 1.0);
    const auto pol = plan(b.build(), {norm("G !p")}, PlannerConfig{});
    EXPECT_THROW(HistoryInterpreter(pol, 1), InvalidArgument);
}

TEST(Interpreter, ImpossibleObservation) {
    MdpBuilder b{AtomTable({"p"})};
    const auto go = b.add_action("go");
    const auto s0 = b.add_state("s0", {});
    const auto s1 = b.add_state("s1", {});
    b.add_transition(s0, go, s1, 1.0);
    b.add_transition(s1, go, s1, 1.0);
    const auto pol = plan(b.build(), {norm("G !p")}, PlannerConfig{});
    HistoryInterpreter h(pol, 0);
    EXPECT_THROW(h.observe(go, 0), ImpossibleObservation);
    EXPECT_THROW(h.observe(go, 7), ImpossibleObservation);
    h.observe(go, 1);
    EXPECT_EQ(h.time(), 1U);
    EXPECT_EQ(h.env_state(), 1U);
}

TEST(Interpreter, SuspendingAtStepTAddsDiscountedWeight) {
    // p holds except at the observed state s1 at t = 2.
    MdpBuilder b{AtomTable({"p"})};
    const auto go = b.add_action("go");
    Valuation p;
    p.insert(0);
    const auto a = b.add_state("a", p);
    const auto a2 = b.add_state("a2", p);
    const auto bad = b.add_state("bad", {});
    const auto after = b.add_state("after", p);
    b.add_transition(a, go, a2, 1.0);
    b.add_transition(a2, go, bad, 1.0);
    b.add_transition(bad, go, after, 1.0);
    b.add_transition(after, go, after, 1.0);
    PlannerConfig cfg;
    cfg.gamma = 0.9;
    const auto pol = plan(b.build(), {norm("G p")}, cfg);
    HistoryInterpreter h(pol, a);
    h.observe(go, a2);
    h.observe(go, bad);
    EXPECT_NEAR(h.selected_cost(), 0.81, 1e-12);
    h.observe(go, after);
    EXPECT_NEAR(h.selected_cost(), 0.81, 1e-12);
    const auto chain = h.chain(h.selected());
    ASSERT_EQ(chain.size(), 4U);
    for (std::size_t t = 0; t < 4; ++t) EXPECT_EQ(h.candidates(t)[chain[t]].mask, t == 2 ? 1U : 0U);
}

TEST(Interpreter, SelectionWeighsLookaheadAsConfigured) {
    std::mt19937_64 rng(103);
    for (bool plus_one : {true, false}) {
        for (int i = 0; i < 40; ++i) {
            const auto m = nwtest::random_mdp(rng, 4, 2);
            PlannerConfig cfg;
            cfg.gamma = 0.9;
            cfg.lookahead_t_plus_one = plus_one;
            std::optional<AmalgamatedPolicy> pol;
            try {
                pol = plan(m, {Norm{"a", 1.0, nwtest::random_fragment_formula(rng)}, Norm{"b", 3.0, nwtest::random_fragment_formula(rng)}}, cfg);
            } catch (const NoAmecFound&) {
                continue;
            }
            HistoryInterpreter h(*pol, m.initial());
            for (const auto& [act, next] : random_history(m, rng, 5)) {
                h.observe(act, next);
                if (h.fell_back()) continue;
                const double look = std::pow(0.9, static_cast<double>(plus_one ? h.time() + 1 : h.time()));
                double best = std::numeric_limits<double>::infinity();
                StateId best_state = 0;
                for (const auto& c : h.candidates()) {
                    if (c.product_state >= pol->product->num_states() || pol->no_update[c.product_state]) continue;
                    const double v = c.cost + look * pol->viol[c.product_state];
                    if (v < best || (v == best && c.product_state < best_state)) {
                        best = v;
                        best_state = c.product_state;
                    }
                }
                ASSERT_EQ(h.selected_state(), best_state);
            }
        }
    }
}

TEST(InterpreterProperty, DynamicProgramMatchesExhaustiveSearch) {
    std::mt19937_64 rng(107);
    int checked = 0;
    while (checked < 60) {
        const auto m = nwtest::random_mdp(rng, 4, 2);
        const std::size_t n = 1 + rng() % 2;
        std::vector<Norm> norms;
        for (std::size_t i = 0; i < n; ++i) norms.push_back(Norm{"n" + std::to_string(i), 1.0 + static_cast<double>(i), nwtest::random_fragment_formula(rng)});
        const auto pol = try_plan(m, norms);
        if (!pol) continue;
        const auto history = random_history(m, rng, 5);
        HistoryInterpreter h(*pol, m.initial());
        std::vector<StateId> states{m.initial()};
        for (const auto& [act, next] : history) {
            h.observe(act, next);
            states.push_back(next);
        }
        const auto oracle = nwtest::brute_force_reinterpretation(m, pol->product->crdras(), states, 0.9);
        std::map<std::vector<AutomatonState>, double> got;
        for (const auto& c : h.candidates()) got.emplace(c.q, c.cost);
        ASSERT_EQ(got.size(), oracle.size());
        for (const auto& [q, cost] : oracle) {
            ASSERT_TRUE(got.count(q));
            ASSERT_NEAR(got[q], cost, 1e-12);
        }
        ++checked;
    }
}

TEST(InterpreterProperty, CandidatesAreReachableProductStates) {
    std::mt19937_64 rng(109);
    for (int i = 0; i < 60; ++i) {
        const auto m = nwtest::random_mdp(rng, 4, 2);
        const auto pol = try_plan(m, {Norm{"a", 1.0, nwtest::random_fragment_formula(rng)}});
        if (!pol) continue;
        const auto& p = *pol->product;
        HistoryInterpreter h(*pol, m.initial());
        std::set<StateId> frontier;
        for (auto c = p.csr().first_choice(ConflictProduct::kDummy); c < p.csr().end_choice(ConflictProduct::kDummy); ++c)
            for (auto t : p.csr().successors(c)) frontier.insert(t);
        auto check = [&] {
            for (const auto& c : h.candidates()) {
                ASSERT_LT(c.product_state, p.num_states());
                ASSERT_TRUE(frontier.count(c.product_state));
                ASSERT_EQ(p.env_state(c.product_state), h.env_state());
            }
        };
        check();
        for (const auto& [act, next] : random_history(m, rng, 5)) {
            std::set<StateId> step;
            for (auto x : frontier)
                for (auto c = p.csr().first_choice(x); c < p.csr().end_choice(x); ++c) {
                    if (p.choice_action(c) != act) continue;
                    for (auto t : p.csr().successors(c))
                        if (p.env_state(t) == next) step.insert(t);
                }
            frontier = std::move(step);
            h.observe(act, next);
            check();
        }
    }
}

TEST(Select, SingletonRestrictionIsDeterministic) {
    const auto pol = plan(single_state(true), {norm("G p")}, PlannerConfig{});
    const HistoryInterpreter h(pol, 0);
    std::mt19937_64 rng(1);
    for (int i = 0; i < 20; ++i) {
        const auto sel = select_action(h, pol, rng);
        EXPECT_EQ(sel.action, 0U);
        EXPECT_EQ(sel.mask, 0U);
    }
}

TEST(Episode, SeededRunsRepeat) {
    const auto sc = vacuum::scenario(1);
    const auto vm = vacuum::build_mdp(sc.config);
    const auto pol = plan(vm.mdp, sc.norms, sc.planner);
    const auto a = run_episode(pol, 200, 5), b = run_episode(pol, 200, 5);
    ASSERT_EQ(a.steps.size(), 200U);
    for (std::size_t t = 0; t < a.steps.size(); ++t) {
        ASSERT_EQ(a.steps[t].env_state, b.steps[t].env_state);
        ASSERT_EQ(a.steps[t].action, b.steps[t].action);
    }
    EXPECT_EQ(a.total_cost, b.total_cost);
    EXPECT_THROW(run_episode(pol, 0, 5), InvalidArgument);
}

TEST(Episode, AccumulatedCostMatchesStepWeights) {
    const auto sc = vacuum::scenario(1);
    const auto vm = vacuum::build_mdp(sc.config);
    const auto pol = plan(vm.mdp, sc.norms, sc.planner);
    for (std::uint64_t k = 0; k < 5; ++k) {
        const auto tr = run_episode(pol, 300, episode_seed(17, k));
        double sum = 0.0;
        for (const auto& s : tr.steps) {
            sum += std::pow(sc.planner.gamma, static_cast<double>(s.t)) * s.step_weight;
            ASSERT_NEAR(s.accumulated, sum, 1e-9);
        }
        EXPECT_NEAR(tr.total_cost, sum, 1e-9);
    }
}

TEST(Episode, SeedsAreDistinct) {
    std::set<std::uint64_t> seen;
    for (std::uint64_t master : {0ULL, 1ULL, 42ULL})
        for (std::size_t k = 0; k < 1000; ++k) seen.insert(episode_seed(master, k));
    EXPECT_EQ(seen.size(), 3000U);
    EXPECT_EQ(episode_seed(42, 3), episode_seed(42, 3));
}

TEST(Episode, PuddleWithoutHumanMessCosts29701) {
    auto sc = vacuum::scenario(2);
    sc.config.human_mess_prob = 0.0;
    const auto vm = vacuum::build_mdp(sc.config);
    const auto pol = plan(vm.mdp, sc.norms, sc.planner);
    const auto tr = run_episode(pol, 100, 3);
    EXPECT_NEAR(tr.total_cost, 2.9701, 1e-9);
    for (const auto& s : tr.steps) EXPECT_EQ(s.norm_actions[0] == NormAction::Susp, s.t <= 2) << "t=" << s.t;
}

TEST(Episode, GlassVacuumedAtFirstOpportunity) {
    const auto sc = vacuum::scenario(3);
    const auto vm = vacuum::build_mdp(sc.config);
    const auto pol = plan(vm.mdp, sc.norms, sc.planner);
    const auto tr = run_episode(pol, 60, 11);
    std::optional<std::size_t> first;
    for (const auto& s : tr.steps)
        if (s.action == static_cast<ActionId>(vacuum::Action::VacuumMess0)) {
            first = s.t;
            break;
        }
    ASSERT_TRUE(first.has_value());
    // The robot heads straight for the glass: no other vacuuming or waiting happens before it.
    for (std::size_t t = 0; t < *first; ++t) {
        const auto a = static_cast<vacuum::Action>(tr.steps[t].action);
        EXPECT_TRUE(a == vacuum::Action::East || a == vacuum::Action::West || a == vacuum::Action::Undock) << vacuum::action_name(a);
    }
    // The step after the damaging vacuum suspends N2 at weight 200.
    bool charged = false;
    for (const auto& s : tr.steps) charged = charged || s.step_weight >= 200.0;
    EXPECT_TRUE(charged);
}

TEST(Export, CsvAndJson) {
    auto sc = vacuum::scenario(2);
    sc.config.human_mess_prob = 0.0;
    const auto vm = vacuum::build_mdp(sc.config);
    const auto pol = plan(vm.mdp, sc.norms, sc.planner);
    const auto tr = run_episode(pol, 10, 3);

    const auto csv = trace_to_csv(tr, vm.mdp);
    std::size_t rows = 0;
    for (char c : csv) rows += c == '\n';
    EXPECT_EQ(rows, 11U);
    EXPECT_EQ(csv.rfind("t,state,labels,action,", 0), 0U);

    const auto doc = nlohmann::json::parse(trace_to_json(tr, vm.mdp));
    EXPECT_EQ(doc["steps"].size(), 10U);
    EXPECT_EQ(doc["seed"].get<std::uint64_t>(), 3U);
    EXPECT_NEAR(doc["total_cost"].get<double>(), tr.total_cost, 1e-12);
    EXPECT_EQ(doc["steps"][0]["norm_actions"].size(), sc.norms.size());
    EXPECT_EQ(doc["steps"][0]["automaton_states"].size(), sc.norms.size());
}
