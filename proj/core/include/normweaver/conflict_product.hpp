#pragma once

#include "normweaver/crdra.hpp"
#include "normweaver/end_components.hpp"
#include "normweaver/mdp.hpp"

#include <limits>
#include <memory>
#include <span>
#include <unordered_map>
#include <vector>

namespace normweaver {

using NormMask = std::uint32_t; // bit i set: norm i suspended

struct ConflictProductOptions {
    std::size_t max_states = 5'000'000;
    /// Skip choices that suspend a norm whose automaton would not move under
    /// keep on any successor; they match a cheaper choice in every successor.
    bool prune_dominated = true;
};

/// M⊗ over (S ∪ {s₋₁}) × Q₁ × … × Qₙ. State 0 is the dummy s⊗₋₁; every other
/// state is reachable from it. Choices pair an environment action (or the
/// dummy action a₋₁) with a norm mask.
class ConflictProduct {
public:
    static constexpr StateId kDummy = 0;
    static constexpr StateId kNoEnvState = std::numeric_limits<StateId>::max();
    static constexpr ActionId kDummyAction = std::numeric_limits<ActionId>::max();

    ConflictProduct(std::shared_ptr<const LabeledMdp> m, std::vector<Crdra> crdras, const ConflictProductOptions& opts = {});
    ConflictProduct(const LabeledMdp& m, std::vector<Crdra> crdras, const ConflictProductOptions& opts = {})
        : ConflictProduct(std::make_shared<const LabeledMdp>(m), std::move(crdras), opts) {}

    const Csr& csr() const noexcept { return csr_; }
    const LabeledMdp& env() const noexcept { return *env_; }
    const std::vector<Crdra>& crdras() const noexcept { return crdras_; }
    std::size_t num_norms() const noexcept { return crdras_.size(); }
    std::size_t num_states() const noexcept { return csr_.num_states(); }
    std::size_t num_choices() const noexcept { return csr_.num_choices(); }
    /// |U⊗| = (|U| + 1) · 2ⁿ, independent of pruning.
    std::size_t num_product_actions() const noexcept { return (env_->num_actions() + 1) << num_norms(); }
    std::size_t pruned_choices() const noexcept { return pruned_; }

    bool is_dummy(StateId x) const noexcept { return x == kDummy; }
    StateId env_state(StateId x) const { return env_states_[x]; }
    std::span<const AutomatonState> automaton_states(StateId x) const {
        return {q_.data() + static_cast<std::size_t>(x) * num_norms(), num_norms()};
    }

    ActionId choice_action(ChoiceId c) const { return choice_action_[c]; }
    NormMask choice_mask(ChoiceId c) const { return choice_mask_[c]; }
    double choice_weight(ChoiceId c) const { return choice_weight_[c]; }
    std::span<const double> choice_weights() const noexcept { return choice_weight_; }
    double mask_weight(NormMask mask) const;
    double total_weight() const noexcept { return total_weight_; }

    /// Product state for (s, q₁…qₙ), if materialized.
    std::optional<StateId> find(StateId s, std::span<const AutomatonState> q) const;

    /// q'ᵢ for norm i under the observed successor s'.
    AutomatonState next_automaton_state(std::size_t norm, AutomatonState q, StateId s_next, bool suspended) const {
        return suspended ? q : next_[norm][static_cast<std::size_t>(q) * env_->num_states() + s_next];
    }

    /// Rabin pairs of each norm lifted to product states (dummy in no set).
    std::vector<std::vector<StatePair>> lifted_conditions() const;

    std::string describe(StateId x) const;

private:
    std::uint64_t key(StateId s, std::span<const AutomatonState> q) const;

    std::shared_ptr<const LabeledMdp> env_;
    std::vector<Crdra> crdras_;
    std::vector<std::vector<AutomatonState>> next_; // per norm: [q * |S| + s'] -> δ(q, L(s'))
    Csr csr_;
    std::vector<StateId> env_states_;
    std::vector<AutomatonState> q_;
    std::vector<ActionId> choice_action_;
    std::vector<NormMask> choice_mask_;
    std::vector<double> choice_weight_;
    std::vector<std::uint64_t> radix_;
    std::vector<StateId> dense_index_;
    std::unordered_map<std::uint64_t, StateId> sparse_index_;
    bool dense_ = true;
    double total_weight_ = 0.0;
    std::size_t pruned_ = 0;
};

} // namespace normweaver
