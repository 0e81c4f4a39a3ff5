#pragma once

#include "normweaver/conflict_product.hpp"
#include "normweaver/crdra.hpp"
#include "normweaver/end_components.hpp"
#include "normweaver/mdp.hpp"

#include <memory>
#include <optional>
#include <random>
#include <vector>

namespace normweaver {

struct PlannerConfig {
    double gamma = 0.99;
    double tolerance = 1e-9;     // VI residual
    double tie_tolerance = 1e-9; // argmin width for A*
    double epsilon = 0.01;
    bool meta_amec = true;
    std::size_t max_sweeps = 1'000'000;
    std::size_t max_states = 5'000'000;
    bool prune_dominated = true;
    /// Executor: weigh Viol* by γ^{t+1} (as printed) instead of γ^t.
    bool lookahead_t_plus_one = true;
    unsigned threads = 0;

    /// Throws InvalidArgument unless γ ∈ [0,1), ε ∈ (0,1), tolerances > 0.
    void check() const;
};

/// Values and argmin restrictions of the AMEC-restricted problems.
struct AmecValues {
    std::vector<EndComponent> amecs;
    std::vector<std::int32_t> amec_of;            // per product state, -1 outside
    std::vector<double> value;                    // Viol*_E per product state (0 outside)
    std::vector<std::vector<ChoiceId>> optimal;   // A*_E per product state
    std::size_t sweeps = 0;
};

AmecValues amec_violation_vi(const ConflictProduct& p, std::vector<EndComponent> amecs, const PlannerConfig& cfg);

enum class InteriorMode : std::uint8_t { None, Meta, EpsilonGreedy };

/// π^AMEC: uniform over a meta-AMEC restriction, or ε-greedy around the lowest-id optimal choice.
struct InteriorPolicy {
    std::vector<InteriorMode> mode;             // per product state
    std::vector<std::vector<ChoiceId>> choices; // Meta: the restriction; EpsilonGreedy: all of A_E
    std::vector<ChoiceId> best;                 // EpsilonGreedy: greedy choice
    std::size_t meta_components = 0;
    std::size_t fallback_states = 0;
};

InteriorPolicy meta_amec_refinement(const ConflictProduct& p, const AmecValues& amec, const PlannerConfig& cfg);

struct PlanStats {
    std::size_t env_states = 0;
    std::size_t product_states = 0;
    std::size_t product_choices = 0;
    std::size_t pruned_choices = 0;
    std::size_t product_actions = 0;
    std::size_t amecs = 0;
    std::size_t meta_components = 0;
    std::size_t fallback_states = 0;
    std::size_t no_update_states = 0;
    std::size_t amec_sweeps = 0;
    std::size_t global_sweeps = 0;
    double global_residual = 0.0;
    double seconds_product = 0.0;
    double seconds_mec = 0.0;
    double seconds_amec_vi = 0.0;
    double seconds_global_vi = 0.0;
    double seconds_total = 0.0;
};

class AmalgamatedPolicy {
public:
    std::shared_ptr<const ConflictProduct> product;
    PlannerConfig config;
    PlanStats stats;

    std::vector<double> viol;                     // Viol*(s)
    std::vector<std::vector<ChoiceId>> restriction; // A*(s)
    std::vector<char> no_update;
    AmecValues amec;
    InteriorPolicy interior;
    std::vector<char> follow_interior; // amalgamation: π^AMEC here, else A*

    double initial_value() const { return viol[ConflictProduct::kDummy]; }
    double max_cost() const;

    /// Draws a product choice at `x`: π^AMEC inside AMECs (unless the global
    /// sweep found something cheaper), uniform over A* elsewhere.
    ChoiceId choose(StateId x, std::mt19937_64& rng) const;
    /// Lowest-id choice the policy may take at `x`.
    ChoiceId preferred(StateId x) const;
    /// Every choice the policy takes at `x` with positive probability.
    std::vector<ChoiceId> support(StateId x) const;
};

AmalgamatedPolicy global_violation_vi(std::shared_ptr<const ConflictProduct> p, AmecValues amec, InteriorPolicy interior,
                                      const PlannerConfig& cfg);

/// Full pipeline. `automata[i]`, when set, replaces the built-in translation of norm i.
AmalgamatedPolicy plan(std::shared_ptr<const LabeledMdp> m, const std::vector<Norm>& norms, const PlannerConfig& cfg,
                       const std::vector<std::optional<Dra>>& automata = {});
AmalgamatedPolicy plan(const LabeledMdp& m, const std::vector<Norm>& norms, const PlannerConfig& cfg,
                       const std::vector<std::optional<Dra>>& automata = {});

} // namespace normweaver
