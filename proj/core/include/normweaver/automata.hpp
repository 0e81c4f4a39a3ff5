#pragma once

#include "normweaver/ltl.hpp"

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

namespace normweaver {

using AutomatonState = std::uint32_t;

/// Index into the automaton's own alphabet: bit i is proposition i of the automaton.
using Letter = std::uint32_t;

struct RabinPair {
    std::vector<AutomatonState> fin; // sorted, unique
    std::vector<AutomatonState> inf; // sorted, unique

    bool in_fin(AutomatonState q) const;
    bool in_inf(AutomatonState q) const;

    friend bool operator==(const RabinPair&, const RabinPair&) = default;
};

/// Maps valuations over a model's AtomTable to letters of one automaton.
class LetterMap {
public:
    LetterMap() = default;
    explicit LetterMap(std::vector<std::size_t> atom_indices) : atoms_(std::move(atom_indices)) {}

    Letter operator()(Valuation v) const {
        Letter out = 0;
        for (std::size_t i = 0; i < atoms_.size(); ++i)
            if (v.contains(atoms_[i])) out |= Letter{1} << i;
        return out;
    }

private:
    std::vector<std::size_t> atoms_;
};

struct DraRun {
    std::vector<AutomatonState> states; // q0, q1, ..., one more than the word length
};

/// Deterministic Rabin automaton over the alphabet 2^AP of its own propositions.
///
/// The transition table is dense over (state, letter) with 2^|AP| letters per
/// state, so it is total by construction. Propositions are kept by name and
/// bound to a model's AtomTable with bind().
class Dra {
public:
    static constexpr std::size_t kMaxPropositions = 16;

    Dra(std::vector<std::string> propositions, AutomatonState num_states, AutomatonState initial,
        std::vector<AutomatonState> delta, std::vector<RabinPair> pairs, std::vector<std::string> state_names = {});

    const std::vector<std::string>& propositions() const noexcept { return props_; }
    std::size_t num_states() const noexcept { return num_states_; }
    std::size_t num_letters() const noexcept { return std::size_t{1} << props_.size(); }
    AutomatonState initial() const noexcept { return initial_; }
    const std::vector<RabinPair>& pairs() const noexcept { return pairs_; }
    const std::string& state_name(AutomatonState q) const { return names_.at(q); }

    AutomatonState step(AutomatonState q, Letter letter) const { return delta_[(std::size_t{q} << props_.size()) | letter]; }

    /// Throws AtomMismatch when a proposition is absent from `atoms`.
    LetterMap bind(const AtomTable& atoms) const;

    DraRun run(const std::vector<Valuation>& word, const AtomTable& atoms) const;

    /// Letter of the automaton alphabet under a named valuation (used by tests and tools).
    Letter letter_of(const std::vector<std::string>& true_props) const;

private:
    std::vector<std::string> props_;
    AutomatonState num_states_;
    AutomatonState initial_;
    std::vector<AutomatonState> delta_;
    std::vector<RabinPair> pairs_;
    std::vector<std::string> names_;
};

/// Rabin acceptance of the ultimately periodic run on prefix · cycle^ω.
bool dra_accepts_lasso(const Dra& d, const Lasso& w, const AtomTable& atoms);

/// True when `a` and `b` are equal up to a renaming of states (and order of pairs).
bool isomorphic(const Dra& a, const Dra& b);

/// Translates an NNF formula of the supported fragment into a complete DRA.
///
/// The fragment is every positive boolean combination of
///   - safety formulas (literals, X, &, |, G),
///   - co-safety formulas (literals, X, &, |, F, U),
///   - recurrence formulas `G psi` (possibly under X) where psi combines
///     literals with a single repeated eventuality `F b` or `a U b` over
///     literal combinations, e.g. `G F p` or `G (h -> (!t U !s))`.
/// Throws UnsupportedFragment naming the offending subformula otherwise.
Dra ltl_to_dra(const LtlFormula& f);

/// Reads a deterministic state-based Rabin automaton in the HOA v1 format with explicit labels.
Dra import_hoa(std::string_view text);

/// Writes `d` in the HOA v1 format; pair i is encoded as Fin(2i) & Inf(2i+1).
std::string export_hoa(const Dra& d, const std::string& name = "");

} // namespace normweaver
