#pragma once

#include "normweaver/automata.hpp"
#include "normweaver/end_components.hpp"
#include "normweaver/mdp.hpp"

#include <vector>

namespace normweaver {

/// M× = M ⊗ D over reachable (s, q) pairs.
struct ProductMdp {
    Csr csr;
    std::vector<StateId> env_state;          // per product state
    std::vector<AutomatonState> dra_state;   // per product state
    std::vector<ActionId> choice_action;     // per product choice
    std::vector<RabinPair> pairs;            // of the automaton
    StateId initial = 0;

    std::size_t num_states() const noexcept { return csr.num_states(); }
    /// Rabin pairs lifted to product states.
    std::vector<StatePair> lifted_pairs() const;
};

/// Initial state (s0, δ(q0, L(s0))); successors follow q' = δ(q, L(s')).
/// Throws AtomMismatch when an automaton proposition is missing from the model.
ProductMdp build_product(const LabeledMdp& m, const Dra& d);

/// MECs where some pair has no Fin state and at least one Inf state.
std::vector<EndComponent> accepting_mecs(const ProductMdp& p, const std::vector<EndComponent>& mecs);

/// All accepting end components, including those hidden inside a MEC that
/// touches Fin. Their union is the exact S_good.
std::vector<EndComponent> accepting_components(const ProductMdp& p);

struct MaxProbResult {
    std::vector<double> probability;               // per product state
    std::vector<std::vector<ChoiceId>> restriction; // A*(s); empty where no action helps
    std::vector<char> good;                         // S_good membership
    std::size_t sweeps = 0;
    double residual = 0.0;
};

/// Maximum probability of reaching the union of `amecs`, with A* = argmax choices.
MaxProbResult max_satisfaction_probability(const ProductMdp& p, const std::vector<EndComponent>& amecs,
                                           double tolerance = 1e-9);

} // namespace normweaver
