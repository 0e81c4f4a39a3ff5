#include "support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

namespace nwtest {

LabeledMdp random_mdp(std::mt19937_64& rng, int states, int actions, const std::vector<std::string>& atoms) {
    MdpBuilder b{AtomTable(atoms)};
    for (int a = 0; a < actions; ++a) b.add_action("a" + std::to_string(a));
    std::uniform_int_distribution<std::uint64_t> label(0, (std::uint64_t{1} << atoms.size()) - 1);
    for (int s = 0; s < states; ++s) b.add_state("s" + std::to_string(s), Valuation(label(rng)));
    std::uniform_int_distribution<int> pick(0, states - 1);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int s = 0; s < states; ++s) {
        bool any = false;
        for (int a = 0; a < actions; ++a) {
            if (unit(rng) > 0.7 && !(a == actions - 1 && !any)) continue;
            any = true;
            const int t1 = pick(rng);
            const int t2 = pick(rng);
            if (t1 == t2 || unit(rng) < 0.4) {
                b.add_transition(s, a, t1, 1.0);
            } else {
                const double p = std::round(unit(rng) * 8.0 + 1.0) / 10.0; // 0.1 .. 0.9
                b.add_transition(s, a, t1, p);
                b.add_transition(s, a, t2, 1.0 - p);
            }
        }
    }
    b.set_initial(0);
    return b.build();
}

LtlFormula random_fragment_formula(std::mt19937_64& rng, const std::vector<std::string>& atoms) {
    std::uniform_int_distribution<std::size_t> atom(0, atoms.size() - 1);
    std::bernoulli_distribution neg(0.3);
    auto lit = [&] {
        auto a = LtlFormula::atom(atoms[atom(rng)]);
        return neg(rng) ? LtlFormula::negation(a) : a;
    };
    using F = LtlFormula;
    std::uniform_int_distribution<int> shape(0, 12);
    switch (shape(rng)) {
    case 0: return F::globally(lit());
    case 1: return F::finally(lit());
    case 2: return F::globally(F::finally(lit()));
    case 3: return F::until(lit(), lit());
    case 4: return F::next(lit());
    case 5: return F::globally(F::disjunction(lit(), F::next(lit())));
    case 6: return F::finally(F::conjunction(lit(), F::next(lit())));
    case 7: return F::globally(F::implication(lit(), F::finally(lit())));
    case 8: return F::globally(F::implication(lit(), F::until(lit(), lit())));
    case 9: return F::conjunction(F::globally(lit()), F::finally(lit()));
    case 10: return F::conjunction(F::globally(F::finally(lit())), F::globally(F::finally(lit())));
    case 11: return F::disjunction(F::globally(lit()), F::finally(lit()));
    default: return F::next(F::globally(lit()));
    }
}

std::vector<LtlFormula> all_formulas(int depth, const std::vector<std::string>& atoms) {
    std::vector<std::vector<LtlFormula>> by_height(static_cast<std::size_t>(depth) + 1);
    for (const auto& a : atoms) by_height[1].push_back(LtlFormula::atom(a));
    for (int h = 2; h <= depth; ++h) {
        auto& out = by_height[h];
        for (const auto& f : by_height[h - 1]) {
            out.push_back(LtlFormula::negation(f));
            out.push_back(LtlFormula::next(f));
            out.push_back(LtlFormula::finally(f));
            out.push_back(LtlFormula::globally(f));
        }
        std::vector<LtlFormula> lower;
        for (int k = 1; k < h; ++k) lower.insert(lower.end(), by_height[k].begin(), by_height[k].end());
        const auto top = by_height[h - 1].size();
        const auto below = lower.size() - top; // heights < h-1 come first
        for (std::size_t i = 0; i < lower.size(); ++i)
            for (std::size_t j = 0; j < lower.size(); ++j) {
                if (i < below && j < below) continue; // neither operand has height h-1
                out.push_back(LtlFormula::conjunction(lower[i], lower[j]));
                out.push_back(LtlFormula::disjunction(lower[i], lower[j]));
                out.push_back(LtlFormula::until(lower[i], lower[j]));
            }
    }
    std::vector<LtlFormula> all;
    for (const auto& v : by_height) all.insert(all.end(), v.begin(), v.end());
    return all;
}

std::vector<Lasso> all_lassos(std::size_t num_atoms, std::size_t max_prefix, std::size_t max_cycle) {
    const std::uint64_t letters = std::uint64_t{1} << num_atoms;
    std::vector<std::vector<std::vector<Valuation>>> by_length{{{}}};
    for (std::size_t len = 1; len <= std::max(max_prefix, max_cycle); ++len) {
        std::vector<std::vector<Valuation>> next;
        for (const auto& w : by_length.back())
            for (std::uint64_t l = 0; l < letters; ++l) {
                auto v = w;
                v.push_back(Valuation(l));
                next.push_back(std::move(v));
            }
        by_length.push_back(std::move(next));
    }
    std::vector<Lasso> out;
    for (std::size_t p = 0; p <= max_prefix; ++p)
        for (std::size_t c = 1; c <= max_cycle; ++c)
            for (const auto& pre : by_length[p])
                for (const auto& cyc : by_length[c]) out.push_back({pre, cyc});
    return out;
}

namespace {

struct Chain {
    std::vector<std::pair<StateId, AutomatonState>> states;
    std::vector<std::vector<std::vector<std::pair<std::size_t, double>>>> choices; // per state, per action
};

Chain explore(const LabeledMdp& m, const Dra& d) {
    const auto letters = d.bind(m.atoms());
    Chain c;
    std::map<std::pair<StateId, AutomatonState>, std::size_t> index;
    auto intern = [&](StateId s, AutomatonState q) {
        auto [it, inserted] = index.emplace(std::make_pair(s, q), c.states.size());
        if (inserted) c.states.emplace_back(s, q);
        return it->second;
    };
    intern(m.initial(), d.step(d.initial(), letters(m.label(m.initial()))));
    for (std::size_t x = 0; x < c.states.size(); ++x) {
        const auto [s, q] = c.states[x];
        std::vector<std::vector<std::pair<std::size_t, double>>> acts;
        for (auto a : m.available(s)) {
            std::vector<std::pair<std::size_t, double>> dist;
            for (StateId t = 0; t < m.num_states(); ++t) {
                const double p = m.probability(s, a, t);
                if (p > 0.0) dist.emplace_back(intern(t, d.step(q, letters(m.label(t)))), p);
            }
            acts.push_back(std::move(dist));
        }
        c.choices.push_back(std::move(acts));
    }
    return c;
}

// Solves A x = b by Gaussian elimination with partial pivoting.
std::vector<double> solve(std::vector<std::vector<double>> a, std::vector<double> b) {
    const std::size_t n = b.size();
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(a[r][col]) > std::abs(a[piv][col])) piv = r;
        std::swap(a[col], a[piv]);
        std::swap(b[col], b[piv]);
        for (std::size_t r = 0; r < n; ++r) {
            if (r == col || a[r][col] == 0.0) continue;
            const double f = a[r][col] / a[col][col];
            for (std::size_t k = col; k < n; ++k) a[r][k] -= f * a[col][k];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t i = 0; i < n; ++i) b[i] /= a[i][i];
    return b;
}

// closure[i][j]: j reachable from i (reflexive).
std::vector<std::vector<char>> closure(const std::vector<std::vector<double>>& p) {
    const std::size_t n = p.size();
    std::vector<std::vector<char>> r(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) {
        r[i][i] = 1;
        for (std::size_t j = 0; j < n; ++j)
            if (p[i][j] > 0.0) r[i][j] = 1;
    }
    for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i)
            if (r[i][k])
                for (std::size_t j = 0; j < n; ++j)
                    if (r[k][j]) r[i][j] = 1;
    return r;
}

} // namespace

std::size_t product_size(const LabeledMdp& m, const Dra& d) { return explore(m, d).states.size(); }

double brute_force_max_probability(const LabeledMdp& m, const Dra& d) {
    const auto c = explore(m, d);
    const std::size_t n = c.states.size();
    std::vector<std::size_t> pick(n, 0);
    double best = 0.0;
    while (true) {
        std::vector<std::vector<double>> p(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            for (const auto& [j, pr] : c.choices[i][pick[i]]) p[i][j] += pr;
        const auto r = closure(p);
        std::vector<char> target(n, 0);
        for (std::size_t i = 0; i < n; ++i) {
            bool bottom = true;
            for (std::size_t j = 0; j < n; ++j)
                if (r[i][j] && !r[j][i]) bottom = false;
            if (!bottom) continue;
            for (const auto& pair : d.pairs()) {
                bool fin = false, inf = false;
                for (std::size_t j = 0; j < n; ++j) {
                    if (!r[i][j]) continue;
                    fin = fin || pair.in_fin(c.states[j].second);
                    inf = inf || pair.in_inf(c.states[j].second);
                }
                if (!fin && inf) target[i] = 1;
            }
        }
        // Unknowns: states that can reach the target but are not in it.
        std::vector<std::size_t> var(n, n);
        std::vector<std::size_t> vars;
        for (std::size_t i = 0; i < n; ++i) {
            if (target[i]) continue;
            bool reaches = false;
            for (std::size_t j = 0; j < n; ++j) reaches = reaches || (r[i][j] && target[j]);
            if (reaches) {
                var[i] = vars.size();
                vars.push_back(i);
            }
        }
        double value = target[0] ? 1.0 : 0.0;
        if (!target[0] && var[0] != n) {
            const std::size_t k = vars.size();
            std::vector<std::vector<double>> a(k, std::vector<double>(k, 0.0));
            std::vector<double> b(k, 0.0);
            for (std::size_t v = 0; v < k; ++v) {
                const auto i = vars[v];
                a[v][v] = 1.0;
                for (std::size_t j = 0; j < n; ++j) {
                    if (target[j]) b[v] += p[i][j];
                    else if (var[j] != n) a[v][var[j]] -= p[i][j];
                }
            }
            value = solve(std::move(a), std::move(b))[var[0]];
        }
        best = std::max(best, value);

        std::size_t i = 0;
        while (i < n && ++pick[i] == c.choices[i].size()) pick[i++] = 0;
        if (i == n) break;
    }
    return best;
}

ConflictOracle conflict_oracle(const LabeledMdp& m, const std::vector<Crdra>& norms, double gamma, int horizon) {
    const std::size_t n = norms.size();
    const NormMask masks = NormMask{1} << n;
    std::vector<LetterMap> letters;
    for (const auto& c : norms) letters.push_back(c.dra().bind(m.atoms()));
    auto weight = [&](NormMask mask) {
        double w = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            if ((mask >> i) & 1U) w += norms[i].weight();
        return w;
    };

    using Key = std::pair<std::int64_t, std::vector<AutomatonState>>;
    std::map<Key, std::size_t> index;
    std::vector<Key> states;
    struct Choice {
        double cost;
        std::vector<std::pair<std::size_t, double>> succ;
    };
    std::vector<std::vector<Choice>> choices;
    auto intern = [&](const Key& k) {
        auto [it, inserted] = index.emplace(k, states.size());
        if (inserted) states.push_back(k);
        return it->second;
    };
    auto advance = [&](const std::vector<AutomatonState>& q, StateId t, NormMask mask) {
        std::vector<AutomatonState> out(n);
        for (std::size_t i = 0; i < n; ++i)
            out[i] = (mask >> i) & 1U ? q[i] : norms[i].step(q[i], letters[i](m.label(t)), NormAction::Keep);
        return out;
    };
    std::vector<AutomatonState> q0(n);
    for (std::size_t i = 0; i < n; ++i) q0[i] = norms[i].initial();
    intern({-1, q0});
    for (std::size_t x = 0; x < states.size(); ++x) {
        const auto key = states[x];
        std::vector<Choice> cs;
        if (key.first < 0) {
            for (NormMask mask = 0; mask < masks; ++mask)
                cs.push_back({weight(mask), {{intern({m.initial(), advance(key.second, m.initial(), mask)}), 1.0}}});
        } else {
            const auto s = static_cast<StateId>(key.first);
            for (auto a : m.available(s))
                for (NormMask mask = 0; mask < masks; ++mask) {
                    Choice c{weight(mask), {}};
                    for (StateId t = 0; t < m.num_states(); ++t) {
                        const double p = m.probability(s, a, t);
                        if (p > 0.0) c.succ.emplace_back(intern({t, advance(key.second, t, mask)}), p);
                    }
                    cs.push_back(std::move(c));
                }
        }
        choices.push_back(std::move(cs));
    }

    const std::size_t N = states.size();
    ConflictOracle out;
    out.states = N;
    double total = 0.0;
    for (const auto& c : norms) total += c.weight();
    out.max_cost = total / (1.0 - gamma);

    // Accepting end components by subset enumeration (the dummy has no predecessors).
    std::vector<char> good(N, 0);
    if (N <= 20) {
        for (std::uint32_t set = 1; set < (std::uint32_t{1} << N); ++set) {
            if (set & 1U) continue;
            auto in = [&](std::size_t x) { return (set >> x) & 1U; };
            std::vector<std::vector<std::size_t>> adj(N);
            bool ok = true;
            for (std::size_t x = 0; x < N && ok; ++x) {
                if (!in(x)) continue;
                bool any = false;
                for (const auto& c : choices[x]) {
                    bool closed = true;
                    for (const auto& [t, p] : c.succ) closed = closed && in(t);
                    if (!closed) continue;
                    any = true;
                    for (const auto& [t, p] : c.succ) adj[x].push_back(t);
                }
                ok = any;
            }
            if (!ok) continue;
            std::vector<std::size_t> members;
            for (std::size_t x = 0; x < N; ++x)
                if (in(x)) members.push_back(x);
            // Strongly connected: every member reaches every other member.
            for (auto src : members) {
                std::vector<char> seen(N, 0);
                std::vector<std::size_t> todo{src};
                seen[src] = 1;
                while (!todo.empty()) {
                    auto x = todo.back();
                    todo.pop_back();
                    for (auto t : adj[x])
                        if (!seen[t]) {
                            seen[t] = 1;
                            todo.push_back(t);
                        }
                }
                for (auto t : members) ok = ok && seen[t];
            }
            if (!ok) continue;
            for (std::size_t i = 0; i < n && ok; ++i) {
                bool some = false;
                for (const auto& pair : norms[i].dra().pairs()) {
                    bool fin = false, inf = false;
                    for (auto x : members) {
                        fin = fin || pair.in_fin(states[x].second[i]);
                        inf = inf || pair.in_inf(states[x].second[i]);
                    }
                    some = some || (!fin && inf);
                }
                ok = some;
            }
            if (ok)
                for (auto x : members) good[x] = 1;
        }
    }
    out.has_amec = std::find(good.begin(), good.end(), 1) != good.end();

    std::vector<char> reach = good;
    for (bool changed = true; changed;) {
        changed = false;
        for (std::size_t x = 0; x < N; ++x) {
            if (reach[x]) continue;
            for (const auto& c : choices[x])
                for (const auto& [t, p] : c.succ)
                    if (reach[t] && !reach[x]) {
                        reach[x] = 1;
                        changed = true;
                    }
        }
    }

    std::vector<double> v(N, 0.0);
    for (std::size_t x = 0; x < N; ++x)
        if (!reach[x]) v[x] = out.max_cost;
    for (int k = 0; k < horizon; ++k) {
        std::vector<double> next = v;
        for (std::size_t x = 0; x < N; ++x) {
            if (!reach[x]) continue;
            double best = std::numeric_limits<double>::infinity();
            for (const auto& c : choices[x]) {
                double q = c.cost;
                for (const auto& [t, p] : c.succ) q += gamma * p * v[t];
                best = std::min(best, q);
            }
            next[x] = best;
        }
        v = std::move(next);
    }
    out.horizon_value = v[0];
    return out;
}

std::vector<std::pair<std::vector<AutomatonState>, double>> brute_force_reinterpretation(
    const LabeledMdp& m, const std::vector<Crdra>& norms, const std::vector<StateId>& states, double gamma) {
    const std::size_t n = norms.size();
    const std::size_t per_step = std::size_t{1} << n;
    std::vector<LetterMap> letters;
    for (const auto& c : norms) letters.push_back(c.dra().bind(m.atoms()));
    std::size_t sequences = 1;
    for (std::size_t t = 0; t < states.size(); ++t) sequences *= per_step;

    std::map<std::vector<AutomatonState>, double> best;
    for (std::size_t code = 0; code < sequences; ++code) {
        std::vector<AutomatonState> q(n);
        for (std::size_t i = 0; i < n; ++i) q[i] = norms[i].initial();
        double cost = 0.0;
        std::size_t rest = code;
        for (std::size_t t = 0; t < states.size(); ++t) {
            const auto mask = static_cast<NormMask>(rest % per_step);
            rest /= per_step;
            double w = 0.0;
            for (std::size_t i = 0; i < n; ++i) {
                const auto a = (mask >> i) & 1U ? NormAction::Susp : NormAction::Keep;
                q[i] = norms[i].step(q[i], letters[i](m.label(states[t])), a);
                w += norms[i].weight(q[i], 0, a);
            }
            cost = t == 0 ? w : cost + std::pow(gamma, static_cast<double>(t)) * w;
        }
        auto [it, inserted] = best.emplace(q, cost);
        if (!inserted) it->second = std::min(it->second, cost);
    }
    return {best.begin(), best.end()};
}

} // namespace nwtest
