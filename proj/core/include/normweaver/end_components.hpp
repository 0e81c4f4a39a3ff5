#pragma once

#include "normweaver/mdp.hpp"

#include <vector>

namespace normweaver {

/// ⟨S_E, A_E⟩: sorted states, and for each of them the allowed global choice ids.
struct EndComponent {
    std::vector<StateId> states;
    std::vector<std::vector<ChoiceId>> choices; // parallel to `states`

    bool contains(StateId s) const;
    /// Allowed choices at `s`; empty if `s` is not in the component.
    const std::vector<ChoiceId>& allowed(StateId s) const;
};

/// Optional restriction of an MDP to a sub-MDP. Empty vectors mean "everything".
struct SubMdp {
    std::vector<char> states;  // size |S|
    std::vector<char> choices; // size |C|
};

/// Maximal end components by iterated SCC pruning. Components are ordered by
/// their smallest state id.
std::vector<EndComponent> maximal_end_components(const Csr& m, const SubMdp& restrict_to = {});

/// Per-state membership flags for a Rabin pair, lifted to the states of an MDP.
struct StatePair {
    std::vector<char> fin;
    std::vector<char> inf;
};

/// Accepting end components for a conjunction of Rabin conditions: for every
/// condition some pair (Fin, Inf) must have no Fin state in the component and
/// at least one Inf state. Every combination of pairs is tried; the returned
/// components are pairwise disjoint and each is maximal for the combination
/// that produced it among states not already covered.
std::vector<EndComponent> accepting_end_components(const Csr& m, const std::vector<std::vector<StatePair>>& conditions,
                                                   const SubMdp& restrict_to = {});

/// True when `ec` is closed under its choices and strongly connected.
bool is_end_component(const Csr& m, const EndComponent& ec);

} // namespace normweaver
