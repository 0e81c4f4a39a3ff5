#pragma once

#include "normweaver/planner.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace normweaver {

/// One reinterpretation of the history ending in a given automaton-state tuple.
struct Candidate {
    std::vector<AutomatonState> q;
    double cost = 0.0;       // C_t
    std::int32_t pred = -1;  // index into the previous layer
    NormMask mask = 0;       // norm actions on the transition into this candidate
    StateId product_state = 0;
};

/// Online belief over product states consistent with the observed
/// environment history, with minimal accumulated suspension cost per
/// automaton-state tuple.
class HistoryInterpreter {
public:
    /// R_0 from the dummy transition. Throws InvalidArgument if `s0` is not the planned initial state.
    HistoryInterpreter(const AmalgamatedPolicy& policy, StateId s0);

    /// Relaxes over every norm mask for the observed transition (s_{t-1}, a_{t-1}, s_t).
    /// Throws ImpossibleObservation when T(s_{t-1}, a_{t-1}, s_t) = 0.
    void observe(ActionId executed, StateId s_next);

    std::size_t time() const noexcept { return layers_.size() - 1; }
    StateId env_state() const noexcept { return env_.back(); }
    const std::vector<Candidate>& candidates() const { return layers_.back(); }
    const std::vector<Candidate>& candidates(std::size_t t) const { return layers_.at(t); }

    /// Index into candidates() of s⊗_t.
    std::size_t selected() const noexcept { return selected_; }
    StateId selected_state() const { return candidates()[selected_].product_state; }
    double selected_cost() const { return candidates()[selected_].cost; }
    /// Whether every candidate was in noUpdate and the cheapest was taken instead.
    bool fell_back() const noexcept { return fell_back_; }

    /// Back-pointer chain of a current candidate: entry t is the candidate index at time t.
    std::vector<std::size_t> chain(std::size_t index) const;

private:
    void finish_layer(std::vector<Candidate> layer);

    const AmalgamatedPolicy* policy_;
    std::vector<std::vector<Candidate>> layers_;
    std::vector<StateId> env_;
    std::size_t selected_ = 0;
    bool fell_back_ = false;
};

/// Environment action of a product choice drawn from the amalgamated policy at s⊗_t.
struct Selection {
    ChoiceId choice;
    ActionId action;
    NormMask mask;
};
Selection select_action(const HistoryInterpreter& h, const AmalgamatedPolicy& policy, std::mt19937_64& rng);

struct TraceStep {
    std::size_t t = 0;
    StateId env_state = 0;
    Valuation label;
    ActionId action = 0;
    std::vector<NormAction> norm_actions;   // from the final interpretation
    std::vector<NormAction> online_actions; // as interpreted at time t
    double step_weight = 0.0;               // Σ suspended weights, undiscounted
    double accumulated = 0.0;               // Σ_{k≤t} γ^k · step weight
    std::vector<AutomatonState> automaton_states;
    StateId product_state = 0;
};

struct ExecutionTrace {
    std::vector<std::string> norm_names;
    std::vector<std::string> atom_names;
    std::vector<TraceStep> steps;
    double total_cost = 0.0;
    std::size_t revisions = 0; // steps whose final norm actions differ from the online ones
    std::size_t fallbacks = 0; // steps where every candidate was in noUpdate
    std::uint64_t seed = 0;
};

/// Simulates `horizon` steps from the initial state.
ExecutionTrace run_episode(const AmalgamatedPolicy& policy, std::size_t horizon, std::uint64_t seed);

/// Seed of episode `k` derived from a master seed.
std::uint64_t episode_seed(std::uint64_t master, std::size_t k);

std::string trace_to_csv(const ExecutionTrace& trace, const LabeledMdp& m);
std::string trace_to_json(const ExecutionTrace& trace, const LabeledMdp& m);

} // namespace normweaver
