#include "normweaver/value_iteration.hpp"

#include "normweaver/error.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <thread>

namespace normweaver {

unsigned worker_threads() {
    if (const char* env = std::getenv("NORMWEAVER_THREADS")) {
        const long v = std::strtol(env, nullptr, 10);
        if (v >= 1) return static_cast<unsigned>(v);
    }
    return std::max(1U, std::thread::hardware_concurrency());
}

double q_value(const ViProblem& p, ChoiceId c, std::span<const double> values) {
    const auto& m = *p.mdp;
    double acc = 0.0;
    auto succ = m.successors(c);
    auto probs = m.probabilities(c);
    for (std::size_t i = 0; i < succ.size(); ++i) acc += probs[i] * values[succ[i]];
    return (p.choice_cost.empty() ? 0.0 : p.choice_cost[c]) + p.discount * acc;
}

namespace {

bool allowed(const ViProblem& p, ChoiceId c) { return p.choice_allowed.empty() || p.choice_allowed[c]; }

bool updated(const ViProblem& p, StateId s) {
    if (!p.frozen.empty() && p.frozen[s]) return false;
    return p.active.empty() || p.active[s];
}

// Best Q-value over allowed choices; NaN if none.
double backup(const ViProblem& p, StateId s, std::span<const double> values) {
    const auto& m = *p.mdp;
    const bool minimize = p.objective == Objective::Minimize;
    double best = std::numeric_limits<double>::quiet_NaN();
    for (ChoiceId c = m.first_choice(s); c < m.end_choice(s); ++c) {
        if (!allowed(p, c)) continue;
        const double q = q_value(p, c, values);
        if (std::isnan(best) || (minimize ? q < best : q > best)) best = q;
    }
    return best;
}

} // namespace

ViResult value_iteration(const ViProblem& p, std::vector<double> initial) {
    if (!p.mdp) throw InvalidArgument("value iteration without an MDP");
    const auto n = p.mdp->num_states();
    if (initial.size() != n) throw InvalidArgument("initial value vector has the wrong size");
    if (p.discount < 0.0 || p.discount > 1.0) throw InvalidArgument("discount must lie in [0, 1]");

    std::vector<StateId> work;
    for (StateId s = 0; s < n; ++s)
        if (updated(p, s)) work.push_back(s);

    ViResult r;
    r.values = std::move(initial);
    if (p.sweep == Sweep::GaussSeidel) {
        for (r.sweeps = 1; r.sweeps <= p.max_sweeps; ++r.sweeps) {
            double residual = 0.0;
            for (auto s : work) {
                const double v = backup(p, s, r.values);
                if (std::isnan(v)) continue;
                residual = std::max(residual, std::abs(v - r.values[s]));
                r.values[s] = v;
            }
            r.residual = residual;
            if (residual < p.tolerance) {
                r.converged = true;
                break;
            }
        }
        r.sweeps = std::min(r.sweeps, p.max_sweeps);
        return r;
    }

    const unsigned threads = std::max(1U, std::min<unsigned>(p.threads ? p.threads : worker_threads(),
                                                             static_cast<unsigned>(work.size() / 4096 + 1)));
    std::vector<double> next = r.values;
    std::vector<double> local(threads, 0.0);
    auto sweep_range = [&](unsigned k) {
        const std::size_t lo = work.size() * k / threads;
        const std::size_t hi = work.size() * (k + 1) / threads;
        double residual = 0.0;
        for (std::size_t i = lo; i < hi; ++i) {
            const auto s = work[i];
            const double v = backup(p, s, r.values);
            if (std::isnan(v)) continue;
            residual = std::max(residual, std::abs(v - r.values[s]));
            next[s] = v;
        }
        local[k] = residual;
    };
    for (r.sweeps = 1; r.sweeps <= p.max_sweeps; ++r.sweeps) {
        if (threads == 1) {
            sweep_range(0);
        } else {
            std::vector<std::jthread> pool;
            for (unsigned k = 1; k < threads; ++k) pool.emplace_back(sweep_range, k);
            sweep_range(0);
        }
        for (auto s : work) r.values[s] = next[s];
        r.residual = *std::max_element(local.begin(), local.end());
        if (r.residual < p.tolerance) {
            r.converged = true;
            break;
        }
    }
    r.sweeps = std::min(r.sweeps, p.max_sweeps);
    return r;
}

std::vector<ChoiceId> optimal_choices(const ViProblem& p, StateId s, std::span<const double> values, double tol) {
    const double best = backup(p, s, values);
    std::vector<ChoiceId> out;
    if (std::isnan(best)) return out;
    const auto& m = *p.mdp;
    for (ChoiceId c = m.first_choice(s); c < m.end_choice(s); ++c)
        if (allowed(p, c) && std::abs(q_value(p, c, values) - best) <= tol) out.push_back(c);
    return out;
}

} // namespace normweaver
