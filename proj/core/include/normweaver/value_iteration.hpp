#pragma once

#include "normweaver/mdp.hpp"

#include <span>
#include <vector>

namespace normweaver {

enum class Objective { Minimize, Maximize };

enum class Sweep {
    /// In-place updates in state order. Deterministic; single thread.
    GaussSeidel,
    /// Reads only the previous iterate; may fan out over threads with bit-identical results.
    Jacobi,
};

/// V(s) = opt_c [ cost(c) + discount · Σ P(c, s') V(s') ] over the allowed choices of s.
struct ViProblem {
    const Csr* mdp = nullptr;
    Objective objective = Objective::Minimize;
    double discount = 1.0;
    std::span<const double> choice_cost; // empty means all zero
    std::vector<char> frozen;            // states whose value never changes
    std::vector<char> active;            // states that are updated; empty means all non-frozen
    std::vector<char> choice_allowed;    // empty means all
    double tolerance = 1e-9;
    std::size_t max_sweeps = 1'000'000;
    Sweep sweep = Sweep::GaussSeidel;
    unsigned threads = 0; // 0: worker_threads()
};

struct ViResult {
    std::vector<double> values;
    std::size_t sweeps = 0;
    double residual = 0.0;
    bool converged = false;
};

/// Iterates from `initial` until the largest change in one sweep is below the
/// tolerance. States that are active but have no allowed choice keep their value.
ViResult value_iteration(const ViProblem& p, std::vector<double> initial);

double q_value(const ViProblem& p, ChoiceId c, std::span<const double> values);

/// Allowed choices of `s` whose Q-value is within `tol` of the optimum, ascending.
std::vector<ChoiceId> optimal_choices(const ViProblem& p, StateId s, std::span<const double> values, double tol = 1e-9);

/// Worker count: NORMWEAVER_THREADS if set (≥1), else hardware concurrency.
unsigned worker_threads();

} // namespace normweaver
