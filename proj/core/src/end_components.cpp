#include "normweaver/end_components.hpp"

#include <algorithm>
#include <limits>

namespace normweaver {

bool EndComponent::contains(StateId s) const { return std::binary_search(states.begin(), states.end(), s); }

const std::vector<ChoiceId>& EndComponent::allowed(StateId s) const {
    static const std::vector<ChoiceId> none;
    auto it = std::lower_bound(states.begin(), states.end(), s);
    if (it == states.end() || *it != s) return none;
    return choices[static_cast<std::size_t>(it - states.begin())];
}

namespace {

constexpr std::uint32_t kNone = std::numeric_limits<std::uint32_t>::max();

// Tarjan's algorithm without recursion over the sub-MDP graph.
// Returns the component id per state (kNone for inactive states).
std::vector<std::uint32_t> scc(const Csr& m, const std::vector<char>& state_in, const std::vector<char>& choice_in) {
    const auto n = m.num_states();
    // State-level adjacency of the active sub-MDP.
    std::vector<std::size_t> offsets(n + 1, 0);
    std::vector<StateId> adj;
    for (StateId s = 0; s < n; ++s) {
        if (state_in[s])
            for (ChoiceId c = m.first_choice(s); c < m.end_choice(s); ++c)
                if (choice_in[c])
                    for (auto t : m.successors(c)) adj.push_back(t);
        offsets[s + 1] = adj.size();
    }

    std::vector<std::uint32_t> index(n, kNone), low(n, 0), comp(n, kNone);
    std::vector<char> on_stack(n, 0);
    std::vector<StateId> stack;
    std::vector<std::pair<StateId, std::size_t>> frames;
    std::uint32_t next_index = 0;
    std::uint32_t next_comp = 0;

    for (StateId root = 0; root < n; ++root) {
        if (!state_in[root] || index[root] != kNone) continue;
        frames.emplace_back(root, offsets[root]);
        index[root] = low[root] = next_index++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!frames.empty()) {
            auto& [v, pos] = frames.back();
            if (pos < offsets[v + 1]) {
                const StateId w = adj[pos++];
                if (index[w] == kNone) {
                    index[w] = low[w] = next_index++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    frames.emplace_back(w, offsets[w]);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            if (low[v] == index[v]) {
                StateId w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp[w] = next_comp;
                } while (w != v);
                ++next_comp;
            }
            const StateId done = v;
            frames.pop_back();
            if (!frames.empty()) {
                auto& parent = frames.back().first;
                low[parent] = std::min(low[parent], low[done]);
            }
        }
    }
    return comp;
}

} // namespace

std::vector<EndComponent> maximal_end_components(const Csr& m, const SubMdp& restrict_to) {
    const auto n = m.num_states();
    std::vector<char> state_in = restrict_to.states.empty() ? std::vector<char>(n, 1) : restrict_to.states;
    std::vector<char> choice_in = restrict_to.choices.empty() ? std::vector<char>(m.num_choices(), 1) : restrict_to.choices;

    std::vector<std::uint32_t> comp;
    while (true) {
        // Drop choices that leave the state set, then states without choices, to a fixpoint.
        bool pruned = true;
        while (pruned) {
            pruned = false;
            for (StateId s = 0; s < n; ++s) {
                if (!state_in[s]) continue;
                bool any = false;
                for (ChoiceId c = m.first_choice(s); c < m.end_choice(s); ++c) {
                    if (!choice_in[c]) continue;
                    for (auto t : m.successors(c))
                        if (!state_in[t]) {
                            choice_in[c] = 0;
                            break;
                        }
                    any = any || choice_in[c];
                }
                if (!any) {
                    state_in[s] = 0;
                    pruned = true;
                }
            }
        }

        comp = scc(m, state_in, choice_in);
        bool changed = false;
        for (StateId s = 0; s < n; ++s) {
            if (!state_in[s]) continue;
            for (ChoiceId c = m.first_choice(s); c < m.end_choice(s); ++c) {
                if (!choice_in[c]) continue;
                for (auto t : m.successors(c))
                    if (comp[t] != comp[s]) {
                        choice_in[c] = 0;
                        changed = true;
                        break;
                    }
            }
        }
        if (!changed) break;
    }

    std::vector<std::uint32_t> slot(n, kNone);
    std::vector<EndComponent> out;
    for (StateId s = 0; s < n; ++s) {
        if (!state_in[s]) continue;
        if (slot[comp[s]] == kNone) {
            slot[comp[s]] = static_cast<std::uint32_t>(out.size());
            out.emplace_back();
        }
        auto& ec = out[slot[comp[s]]];
        ec.states.push_back(s);
        auto& allowed = ec.choices.emplace_back();
        for (ChoiceId c = m.first_choice(s); c < m.end_choice(s); ++c)
            if (choice_in[c]) allowed.push_back(c);
    }
    return out;
}

std::vector<EndComponent> accepting_end_components(const Csr& m, const std::vector<std::vector<StatePair>>& conditions,
                                                   const SubMdp& restrict_to) {
    const auto n = m.num_states();
    const std::vector<char> base = restrict_to.states.empty() ? std::vector<char>(n, 1) : restrict_to.states;
    std::vector<char> covered(n, 0);
    std::vector<EndComponent> out;
    for (const auto& c : conditions)
        if (c.empty()) return out;

    std::vector<std::size_t> pick(conditions.size(), 0);
    while (true) {
        SubMdp sub{base, restrict_to.choices};
        for (StateId s = 0; s < n; ++s) {
            if (covered[s]) sub.states[s] = 0;
            for (std::size_t i = 0; i < conditions.size(); ++i)
                if (conditions[i][pick[i]].fin[s]) sub.states[s] = 0;
        }
        for (auto& ec : maximal_end_components(m, sub)) {
            bool accepting = true;
            for (std::size_t i = 0; i < conditions.size() && accepting; ++i) {
                const auto& inf = conditions[i][pick[i]].inf;
                accepting = std::any_of(ec.states.begin(), ec.states.end(), [&](StateId s) { return inf[s] != 0; });
            }
            if (!accepting) continue;
            for (auto s : ec.states) covered[s] = 1;
            out.push_back(std::move(ec));
        }

        std::size_t i = 0;
        while (i < pick.size() && ++pick[i] == conditions[i].size()) pick[i++] = 0;
        if (i == pick.size()) break;
    }
    std::sort(out.begin(), out.end(), [](const EndComponent& a, const EndComponent& b) { return a.states[0] < b.states[0]; });
    return out;
}

bool is_end_component(const Csr& m, const EndComponent& ec) {
    if (ec.states.empty() || ec.choices.size() != ec.states.size()) return false;
    std::vector<std::vector<StateId>> fwd(ec.states.size()), bwd(ec.states.size());
    auto pos = [&](StateId s) -> std::size_t {
        auto it = std::lower_bound(ec.states.begin(), ec.states.end(), s);
        return (it == ec.states.end() || *it != s) ? ec.states.size() : static_cast<std::size_t>(it - ec.states.begin());
    };
    for (std::size_t i = 0; i < ec.states.size(); ++i) {
        if (ec.choices[i].empty()) return false;
        for (auto c : ec.choices[i]) {
            if (c < m.first_choice(ec.states[i]) || c >= m.end_choice(ec.states[i])) return false;
            for (auto t : m.successors(c)) {
                auto j = pos(t);
                if (j == ec.states.size()) return false;
                fwd[i].push_back(static_cast<StateId>(j));
                bwd[j].push_back(static_cast<StateId>(i));
            }
        }
    }
    auto reaches_all = [&](const std::vector<std::vector<StateId>>& g) {
        std::vector<char> seen(g.size(), 0);
        std::vector<StateId> todo{0};
        seen[0] = 1;
        std::size_t count = 1;
        while (!todo.empty()) {
            auto v = todo.back();
            todo.pop_back();
            for (auto w : g[v])
                if (!seen[w]) {
                    seen[w] = 1;
                    ++count;
                    todo.push_back(w);
                }
        }
        return count == g.size();
    };
    return reaches_all(fwd) && reaches_all(bwd);
}

} // namespace normweaver
