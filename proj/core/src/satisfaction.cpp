#include "normweaver/satisfaction.hpp"

#include "normweaver/value_iteration.hpp"

#include <algorithm>
#include <deque>
#include <unordered_map>

namespace normweaver {

std::vector<StatePair> ProductMdp::lifted_pairs() const {
    std::vector<StatePair> out;
    for (const auto& pair : pairs) {
        StatePair sp{std::vector<char>(num_states(), 0), std::vector<char>(num_states(), 0)};
        for (StateId s = 0; s < num_states(); ++s) {
            sp.fin[s] = pair.in_fin(dra_state[s]);
            sp.inf[s] = pair.in_inf(dra_state[s]);
        }
        out.push_back(std::move(sp));
    }
    return out;
}

ProductMdp build_product(const LabeledMdp& m, const Dra& d) {
    const auto letters = d.bind(m.atoms());
    const auto& env = m.csr();
    ProductMdp p;
    p.pairs = d.pairs();

    std::unordered_map<std::uint64_t, StateId> index;
    auto key = [&](StateId s, AutomatonState q) { return std::uint64_t{s} * d.num_states() + q; };
    auto intern = [&](StateId s, AutomatonState q) {
        auto [it, inserted] = index.emplace(key(s, q), static_cast<StateId>(p.env_state.size()));
        if (inserted) {
            p.env_state.push_back(s);
            p.dra_state.push_back(q);
        }
        return it->second;
    };

    const StateId s0 = m.initial();
    p.initial = intern(s0, d.step(d.initial(), letters(m.label(s0))));
    // States are numbered in BFS order, so filling rows in id order is a BFS.
    for (StateId x = 0; x < p.env_state.size(); ++x) {
        const StateId s = p.env_state[x];
        const AutomatonState q = p.dra_state[x];
        for (ChoiceId c = env.first_choice(s); c < env.end_choice(s); ++c) {
            std::vector<std::pair<StateId, double>> dist;
            auto succ = env.successors(c);
            auto probs = env.probabilities(c);
            for (std::size_t i = 0; i < succ.size(); ++i)
                dist.emplace_back(intern(succ[i], d.step(q, letters(m.label(succ[i])))), probs[i]);
            p.csr.push_choice(std::move(dist));
            p.choice_action.push_back(m.choice_action(c));
        }
        p.csr.close_state();
    }
    return p;
}

std::vector<EndComponent> accepting_mecs(const ProductMdp& p, const std::vector<EndComponent>& mecs) {
    std::vector<EndComponent> out;
    for (const auto& ec : mecs) {
        const bool ok = std::any_of(p.pairs.begin(), p.pairs.end(), [&](const RabinPair& pair) {
            bool fin = false;
            bool inf = false;
            for (auto s : ec.states) {
                fin = fin || pair.in_fin(p.dra_state[s]);
                inf = inf || pair.in_inf(p.dra_state[s]);
            }
            return !fin && inf;
        });
        if (ok) out.push_back(ec);
    }
    return out;
}

std::vector<EndComponent> accepting_components(const ProductMdp& p) {
    return accepting_end_components(p.csr, {p.lifted_pairs()});
}

MaxProbResult max_satisfaction_probability(const ProductMdp& p, const std::vector<EndComponent>& amecs, double tolerance) {
    const auto n = p.num_states();
    MaxProbResult r;
    r.good.assign(n, 0);
    for (const auto& ec : amecs)
        for (auto s : ec.states) r.good[s] = 1;

    ViProblem vi;
    vi.mdp = &p.csr;
    vi.objective = Objective::Maximize;
    vi.discount = 1.0;
    vi.frozen = r.good;
    vi.tolerance = tolerance;
    std::vector<double> init(n, 0.0);
    for (StateId s = 0; s < n; ++s)
        if (r.good[s]) init[s] = 1.0;
    auto res = value_iteration(vi, std::move(init));
    r.probability = std::move(res.values);
    r.sweeps = res.sweeps;
    r.residual = res.residual;

    r.restriction.resize(n);
    for (const auto& ec : amecs)
        for (std::size_t i = 0; i < ec.states.size(); ++i) r.restriction[ec.states[i]] = ec.choices[i];
    for (StateId s = 0; s < n; ++s)
        if (!r.good[s] && r.probability[s] > 0.0) r.restriction[s] = optimal_choices(vi, s, r.probability, 1e-9);
    return r;
}

} // namespace normweaver
