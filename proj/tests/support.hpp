#pragma once

#include "normweaver/automata.hpp"
#include "normweaver/conflict_product.hpp"
#include "normweaver/crdra.hpp"
#include "normweaver/mdp.hpp"

#include <random>
#include <string>
#include <vector>

namespace nwtest {

using namespace normweaver;

// Random labeled MDP over atoms {p, q}. Every state has at least one action.
LabeledMdp random_mdp(std::mt19937_64& rng, int states, int actions, const std::vector<std::string>& atoms = {"p", "q"});

// Random formula from the supported fragment over the given atoms.
LtlFormula random_fragment_formula(std::mt19937_64& rng, const std::vector<std::string>& atoms = {"p", "q"});

// Every formula of height <= depth over the atoms, where an atom has height 1
// and each of ! X F G & | U adds one level.
std::vector<LtlFormula> all_formulas(int depth, const std::vector<std::string>& atoms);

// Every lasso with 0 <= |prefix| <= max_prefix and 1 <= |cycle| <= max_cycle over 2^|atoms| letters.
std::vector<Lasso> all_lassos(std::size_t num_atoms, std::size_t max_prefix, std::size_t max_cycle);

// Size of the reachable (s, q) product, counted independently of the library.
std::size_t product_size(const LabeledMdp& m, const Dra& d);

// Maximum probability of acceptance by enumerating stationary deterministic
// product policies, solving each induced chain exactly.
double brute_force_max_probability(const LabeledMdp& m, const Dra& d);

struct ConflictOracle {
    std::size_t states = 0;       // including the dummy
    double horizon_value = 0.0;   // horizon-H minimum from the dummy
    double max_cost = 0.0;        // Σ w / (1 − γ)
    bool has_amec = false;
};

// Rebuilds the conflict product, finds accepting end components by subset
// enumeration, freezes states that cannot reach them at the maximum cost,
// and runs H steps of backward induction with terminal value 0.
ConflictOracle conflict_oracle(const LabeledMdp& m, const std::vector<Crdra>& norms, double gamma, int horizon);

// Minimal discounted suspension cost of every automaton-state tuple reachable
// after observing `states` (s0..sT), by enumerating all mask sequences.
std::vector<std::pair<std::vector<AutomatonState>, double>> brute_force_reinterpretation(
    const LabeledMdp& m, const std::vector<Crdra>& norms, const std::vector<StateId>& states, double gamma);

} // namespace nwtest
