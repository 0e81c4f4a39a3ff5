#include "normweaver/planner.hpp"

#include "normweaver/error.hpp"
#include "normweaver/value_iteration.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace normweaver {

namespace {

using Clock = std::chrono::steady_clock;

double since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

// A state keeps π^AMEC unless the global sweep beat the AMEC value by more than VI noise.
bool improved(double global, double local) { return global < local - 1e-6 * std::max(1.0, std::abs(local)); }

ViProblem base_problem(const ConflictProduct& p, const PlannerConfig& cfg) {
    ViProblem vi;
    vi.mdp = &p.csr();
    vi.objective = Objective::Minimize;
    vi.discount = cfg.gamma;
    vi.choice_cost = p.choice_weights();
    vi.tolerance = cfg.tolerance;
    vi.max_sweeps = cfg.max_sweeps;
    vi.threads = cfg.threads;
    return vi;
}

} // namespace

void PlannerConfig::check() const {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("gamma must lie in [0, 1)");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw InvalidArgument("epsilon must lie in (0, 1)");
    if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
    if (!(tie_tolerance >= 0.0)) throw InvalidArgument("tie tolerance must be nonnegative");
    if (max_sweeps == 0) throw InvalidArgument("sweep cap must be positive");
}

AmecValues amec_violation_vi(const ConflictProduct& p, std::vector<EndComponent> amecs, const PlannerConfig& cfg) {
    const auto n = p.num_states();
    AmecValues out;
    out.amec_of.assign(n, -1);
    out.value.assign(n, 0.0);
    out.optimal.resize(n);

    // AMECs are disjoint and closed, so one restricted sweep solves all of them.
    ViProblem vi = base_problem(p, cfg);
    vi.active.assign(n, 0);
    vi.choice_allowed.assign(p.num_choices(), 0);
    for (std::size_t j = 0; j < amecs.size(); ++j) {
        const auto& ec = amecs[j];
        for (std::size_t k = 0; k < ec.states.size(); ++k) {
            out.amec_of[ec.states[k]] = static_cast<std::int32_t>(j);
            vi.active[ec.states[k]] = 1;
            for (auto c : ec.choices[k]) vi.choice_allowed[c] = 1;
        }
    }
    auto res = value_iteration(vi, std::vector<double>(n, 0.0));
    out.value = std::move(res.values);
    out.sweeps = res.sweeps;
    for (StateId s = 0; s < n; ++s)
        if (out.amec_of[s] >= 0) out.optimal[s] = optimal_choices(vi, s, out.value, cfg.tie_tolerance);
    out.amecs = std::move(amecs);
    return out;
}

InteriorPolicy meta_amec_refinement(const ConflictProduct& p, const AmecValues& amec, const PlannerConfig& cfg) {
    const auto n = p.num_states();
    InteriorPolicy out;
    out.mode.assign(n, InteriorMode::None);
    out.choices.resize(n);
    out.best.assign(n, 0);

    if (cfg.meta_amec) {
        SubMdp sub{std::vector<char>(n, 0), std::vector<char>(p.num_choices(), 0)};
        for (StateId s = 0; s < n; ++s) {
            if (amec.amec_of[s] < 0) continue;
            sub.states[s] = 1;
            for (auto c : amec.optimal[s]) sub.choices[c] = 1;
        }
        auto meta = accepting_end_components(p.csr(), p.lifted_conditions(), sub);
        out.meta_components = meta.size();
        for (const auto& ec : meta)
            for (std::size_t k = 0; k < ec.states.size(); ++k) {
                out.mode[ec.states[k]] = InteriorMode::Meta;
                out.choices[ec.states[k]] = ec.choices[k];
            }
    }
    for (StateId s = 0; s < n; ++s) {
        if (amec.amec_of[s] < 0 || out.mode[s] == InteriorMode::Meta) continue;
        out.mode[s] = InteriorMode::EpsilonGreedy;
        out.choices[s] = amec.amecs[amec.amec_of[s]].allowed(s);
        out.best[s] = amec.optimal[s].front();
        ++out.fallback_states;
    }
    return out;
}

AmalgamatedPolicy global_violation_vi(std::shared_ptr<const ConflictProduct> product, AmecValues amec,
                                      InteriorPolicy interior, const PlannerConfig& cfg) {
    const auto& p = *product;
    const auto& csr = p.csr();
    const auto n = p.num_states();
    if (amec.amecs.empty()) throw NoAmecFound("the conflict product has no accepting end component");
    const double max_cost = p.total_weight() / (1.0 - cfg.gamma);

    AmalgamatedPolicy out;
    out.config = cfg;

    // noUpdate: no path to any AMEC state.
    std::vector<std::vector<StateId>> preds(n);
    for (StateId s = 0; s < n; ++s)
        for (ChoiceId c = csr.first_choice(s); c < csr.end_choice(s); ++c)
            for (auto t : csr.successors(c)) preds[t].push_back(s);
    std::vector<char> reaches(n, 0);
    std::vector<StateId> todo;
    for (StateId s = 0; s < n; ++s)
        if (amec.amec_of[s] >= 0) {
            reaches[s] = 1;
            todo.push_back(s);
        }
    while (!todo.empty()) {
        auto t = todo.back();
        todo.pop_back();
        for (auto s : preds[t])
            if (!reaches[s]) {
                reaches[s] = 1;
                todo.push_back(s);
            }
    }
    preds.clear();
    preds.shrink_to_fit();
    out.no_update.assign(n, 0);
    for (StateId s = 0; s < n; ++s) out.no_update[s] = !reaches[s];

    std::vector<double> init(n, max_cost);
    for (StateId s = 0; s < n; ++s)
        if (amec.amec_of[s] >= 0) init[s] = amec.value[s];

    ViProblem vi = base_problem(p, cfg);
    vi.frozen = out.no_update;
    auto res = value_iteration(vi, std::move(init));
    out.viol = std::move(res.values);
    out.stats.global_sweeps = res.sweeps;
    out.stats.global_residual = res.residual;

    out.restriction.resize(n);
    for (StateId s = 0; s < n; ++s) {
        if (out.no_update[s]) {
            for (ChoiceId c = csr.first_choice(s); c < csr.end_choice(s); ++c) out.restriction[s].push_back(c);
            continue;
        }
        // Prefer choices that keep some mass off noUpdate.
        std::vector<ChoiceId> live;
        for (ChoiceId c = csr.first_choice(s); c < csr.end_choice(s); ++c) {
            auto succ = csr.successors(c);
            if (std::any_of(succ.begin(), succ.end(), [&](StateId t) { return !out.no_update[t]; })) live.push_back(c);
        }
        double best = std::numeric_limits<double>::infinity();
        for (auto c : live) best = std::min(best, q_value(vi, c, out.viol));
        for (auto c : live)
            if (q_value(vi, c, out.viol) <= best + cfg.tie_tolerance) out.restriction[s].push_back(c);
        if (out.restriction[s].empty()) out.restriction[s] = optimal_choices(vi, s, out.viol, cfg.tie_tolerance);
    }

    out.follow_interior.assign(n, 0);
    for (StateId s = 0; s < n; ++s)
        if (amec.amec_of[s] >= 0 && !improved(out.viol[s], amec.value[s])) out.follow_interior[s] = 1;

    out.stats.product_states = n;
    out.stats.product_choices = p.num_choices();
    out.stats.pruned_choices = p.pruned_choices();
    out.stats.product_actions = p.num_product_actions();
    out.stats.env_states = p.env().num_states();
    out.stats.amecs = amec.amecs.size();
    out.stats.amec_sweeps = amec.sweeps;
    out.stats.meta_components = interior.meta_components;
    out.stats.fallback_states = interior.fallback_states;
    out.stats.no_update_states = static_cast<std::size_t>(std::count(out.no_update.begin(), out.no_update.end(), 1));
    out.amec = std::move(amec);
    out.interior = std::move(interior);
    out.product = std::move(product);
    return out;
}

double AmalgamatedPolicy::max_cost() const { return product->total_weight() / (1.0 - config.gamma); }

std::vector<ChoiceId> AmalgamatedPolicy::support(StateId x) const {
    if (follow_interior[x]) {
        if (interior.mode[x] == InteriorMode::Meta) return interior.choices[x];
        if (interior.mode[x] == InteriorMode::EpsilonGreedy) return interior.choices[x];
    }
    return restriction[x];
}

ChoiceId AmalgamatedPolicy::preferred(StateId x) const {
    if (follow_interior[x] && interior.mode[x] == InteriorMode::EpsilonGreedy) return interior.best[x];
    auto s = support(x);
    if (s.empty()) throw Error("empty action restriction at product state " + product->describe(x));
    return s.front();
}

ChoiceId AmalgamatedPolicy::choose(StateId x, std::mt19937_64& rng) const {
    auto uniform = [&](const std::vector<ChoiceId>& v) {
        if (v.empty()) throw Error("empty action restriction at product state " + product->describe(x));
        std::uniform_int_distribution<std::size_t> pick(0, v.size() - 1);
        return v[pick(rng)];
    };
    if (follow_interior[x]) {
        if (interior.mode[x] == InteriorMode::Meta) return uniform(interior.choices[x]);
        if (interior.mode[x] == InteriorMode::EpsilonGreedy) {
            std::uniform_real_distribution<double> coin(0.0, 1.0);
            if (coin(rng) < config.epsilon) return uniform(interior.choices[x]);
            return interior.best[x];
        }
    }
    return uniform(restriction[x]);
}

AmalgamatedPolicy plan(std::shared_ptr<const LabeledMdp> m, const std::vector<Norm>& norms, const PlannerConfig& cfg,
                       const std::vector<std::optional<Dra>>& automata) {
    cfg.check();
    if (norms.empty()) throw InvalidArgument("planning needs at least one norm");
    const auto t0 = Clock::now();

    std::vector<Crdra> crdras;
    for (std::size_t i = 0; i < norms.size(); ++i) {
        const bool supplied = i < automata.size() && automata[i].has_value();
        crdras.push_back(build_crdra(norms[i], supplied ? *automata[i] : compile_norm(norms[i])));
    }

    auto t = Clock::now();
    ConflictProductOptions opts;
    opts.max_states = cfg.max_states;
    opts.prune_dominated = cfg.prune_dominated;
    auto product = std::make_shared<const ConflictProduct>(std::move(m), std::move(crdras), opts);
    const double t_product = since(t);

    t = Clock::now();
    auto amecs = accepting_end_components(product->csr(), product->lifted_conditions());
    const double t_mec = since(t);

    t = Clock::now();
    auto values = amec_violation_vi(*product, std::move(amecs), cfg);
    auto interior = meta_amec_refinement(*product, values, cfg);
    const double t_amec = since(t);

    t = Clock::now();
    auto policy = global_violation_vi(product, std::move(values), std::move(interior), cfg);
    policy.stats.seconds_global_vi = since(t);
    policy.stats.seconds_product = t_product;
    policy.stats.seconds_mec = t_mec;
    policy.stats.seconds_amec_vi = t_amec;
    policy.stats.seconds_total = since(t0);
    return policy;
}

AmalgamatedPolicy plan(const LabeledMdp& m, const std::vector<Norm>& norms, const PlannerConfig& cfg,
                       const std::vector<std::optional<Dra>>& automata) {
    return plan(std::make_shared<const LabeledMdp>(m), norms, cfg, automata);
}

} // namespace normweaver
