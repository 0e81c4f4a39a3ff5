#pragma once

#include "normweaver/ltl.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace normweaver {

using StateId = std::uint32_t;
using ActionId = std::uint32_t;
using ChoiceId = std::uint64_t;

/// Compressed sparse rows over (state -> choices -> successors).
///
/// Choices of a state are contiguous; successors of a choice are sorted by
/// state id with duplicates merged. Every MDP-shaped object in the library
/// (environment, product, conflict product) exposes one of these.
struct Csr {
    std::vector<ChoiceId> state_offsets{0};  // size |S|+1
    std::vector<std::size_t> choice_offsets{0}; // size |C|+1
    std::vector<StateId> targets;
    std::vector<double> probs;

    std::size_t num_states() const noexcept { return state_offsets.size() - 1; }
    std::size_t num_choices() const noexcept { return choice_offsets.size() - 1; }
    ChoiceId first_choice(StateId s) const { return state_offsets[s]; }
    ChoiceId end_choice(StateId s) const { return state_offsets[s + 1]; }
    std::size_t num_choices(StateId s) const { return static_cast<std::size_t>(end_choice(s) - first_choice(s)); }

    std::span<const StateId> successors(ChoiceId c) const {
        return {targets.data() + choice_offsets[c], choice_offsets[c + 1] - choice_offsets[c]};
    }
    std::span<const double> probabilities(ChoiceId c) const {
        return {probs.data() + choice_offsets[c], choice_offsets[c + 1] - choice_offsets[c]};
    }

    /// Appends one choice to the state currently being filled. Successors are
    /// sorted and merged.
    void push_choice(std::vector<std::pair<StateId, double>> dist);
    /// Closes the state currently being filled.
    void close_state() { state_offsets.push_back(num_choices()); }
};

/// Labeled MDP ⟨S, U, A, T, s0, Π, L⟩.
class LabeledMdp {
public:
    std::size_t num_states() const noexcept { return csr_.num_states(); }
    std::size_t num_actions() const noexcept { return action_names_.size(); }
    StateId initial() const noexcept { return initial_; }
    const AtomTable& atoms() const noexcept { return atoms_; }
    Valuation label(StateId s) const { return labels_.at(s); }
    const std::string& state_name(StateId s) const { return state_names_.at(s); }
    const std::string& action_name(ActionId a) const { return action_names_.at(a); }
    const std::vector<std::string>& action_names() const noexcept { return action_names_; }

    const Csr& csr() const noexcept { return csr_; }
    /// Action of a global choice id.
    ActionId choice_action(ChoiceId c) const { return choice_actions_[c]; }
    /// A(s), ascending.
    std::vector<ActionId> available(StateId s) const;
    /// Choice of `a` at `s`, or nullopt when unavailable.
    std::optional<ChoiceId> choice(StateId s, ActionId a) const;
    /// T(s, a, s').
    double probability(StateId s, ActionId a, StateId target) const;

private:
    friend class MdpBuilder;

    AtomTable atoms_;
    std::vector<std::string> action_names_;
    std::vector<std::string> state_names_;
    std::vector<Valuation> labels_;
    StateId initial_ = 0;
    Csr csr_;
    std::vector<ActionId> choice_actions_;
};

/// Single-owner builder. States and actions get dense ids in insertion order.
class MdpBuilder {
public:
    explicit MdpBuilder(AtomTable atoms = {});

    ActionId add_action(std::string name);
    StateId add_state(std::string name, Valuation label);
    void add_transition(StateId from, ActionId action, StateId to, double prob);
    /// Declares `action` available at `from` even with no transitions yet (reported by validate).
    void declare_available(StateId from, ActionId action);
    void set_initial(StateId s) { initial_ = s; }

    std::size_t num_states() const noexcept { return names_.size(); }
    AtomTable& atoms() noexcept { return atoms_; }

    /// Throws ModelError for dangling state/action ids. Stochasticity is
    /// checked by validate(), not here.
    LabeledMdp build() const;

private:
    AtomTable atoms_;
    std::vector<std::string> actions_;
    std::vector<std::string> names_;
    std::vector<Valuation> labels_;
    struct Edge {
        StateId from;
        ActionId action;
        StateId to;
        double prob;
    };
    std::vector<Edge> edges_;
    StateId initial_ = 0;
};

struct Violation {
    enum class Kind { NonStochastic, NegativeProbability, EmptyAvailability, DanglingId, UnknownAtom };
    Kind kind;
    StateId state = 0;
    std::string message;
};

/// Empty iff the MDP is well-formed (rows sum to 1 within 1e-9, A(s) nonempty, ids in range).
std::vector<Violation> validate(const LabeledMdp& m, double tolerance = 1e-9);
std::string to_string(const std::vector<Violation>& report);

struct MdpPath {
    std::vector<StateId> states;   // s0, s1, ...
    std::vector<ActionId> actions; // a0, a1, ...; size states.size() - 1
};

/// σ_i = L(s_i). Throws InvalidArgument when the path is not a path of `m`.
std::vector<Valuation> induced_word(const LabeledMdp& m, const MdpPath& p);

/// JSON interchange:
/// { "atoms": [..], "actions": [..], "states": [names], "labels": [[atoms]..] | {name: [atoms]},
///   "initial": name, "transitions": [ {"from": s, "action": a, "to": {s': p, ..}} ] }
/// States and actions may be referenced by name or index.
LabeledMdp mdp_from_json(const std::string& text);
std::string mdp_to_json(const LabeledMdp& m);

} // namespace normweaver
