#include "normweaver/executor.hpp"

#include "normweaver/error.hpp"

#include <json.hpp>

#include <cmath>
#include <limits>
#include <map>
#include <sstream>

namespace normweaver {

namespace {
constexpr StateId kMissing = std::numeric_limits<StateId>::max();
}

HistoryInterpreter::HistoryInterpreter(const AmalgamatedPolicy& policy, StateId s0) : policy_(&policy) {
    const auto& p = *policy.product;
    if (s0 != p.env().initial()) throw InvalidArgument("observed initial state differs from the planned one");
    const auto n = p.num_norms();

    std::vector<Candidate> layer;
    std::map<std::vector<AutomatonState>, std::size_t> index;
    const auto q0 = p.automaton_states(ConflictProduct::kDummy);
    for (NormMask mask = 0; mask < (NormMask{1} << n); ++mask) {
        Candidate c;
        c.q.resize(n);
        for (std::size_t i = 0; i < n; ++i) c.q[i] = p.next_automaton_state(i, q0[i], s0, (mask >> i) & 1U);
        c.cost = p.mask_weight(mask);
        c.mask = mask;
        auto [it, inserted] = index.emplace(c.q, layer.size());
        if (inserted) {
            layer.push_back(std::move(c));
        } else if (c.cost < layer[it->second].cost) {
            layer[it->second] = std::move(c);
        }
    }
    env_.push_back(s0);
    finish_layer(std::move(layer));
}

void HistoryInterpreter::observe(ActionId executed, StateId s_next) {
    const auto& p = *policy_->product;
    const auto& env = p.env();
    const StateId s = env_.back();
    if (s_next >= env.num_states() || env.probability(s, executed, s_next) <= 0.0)
        throw ImpossibleObservation("transition " + env.state_name(s) + " --" +
                                    (executed < env.num_actions() ? env.action_name(executed) : std::string("?")) +
                                    "--> " + (s_next < env.num_states() ? env.state_name(s_next) : std::string("?")) +
                                    " has probability zero");
    const auto n = p.num_norms();
    const std::size_t t = layers_.size();
    const double discount = std::pow(policy_->config.gamma, static_cast<double>(t));

    std::vector<Candidate> layer;
    std::map<std::vector<AutomatonState>, std::size_t> index;
    const auto& prev = layers_.back();
    std::vector<AutomatonState> q(n);
    for (std::size_t k = 0; k < prev.size(); ++k) {
        for (NormMask mask = 0; mask < (NormMask{1} << n); ++mask) {
            for (std::size_t i = 0; i < n; ++i) q[i] = p.next_automaton_state(i, prev[k].q[i], s_next, (mask >> i) & 1U);
            const double cost = prev[k].cost + discount * p.mask_weight(mask);
            auto it = index.find(q);
            if (it == index.end()) {
                index.emplace(q, layer.size());
                layer.push_back({q, cost, static_cast<std::int32_t>(k), mask, 0});
            } else if (cost < layer[it->second].cost) {
                layer[it->second] = {q, cost, static_cast<std::int32_t>(k), mask, 0};
            }
        }
    }
    env_.push_back(s_next);
    finish_layer(std::move(layer));
}

void HistoryInterpreter::finish_layer(std::vector<Candidate> layer) {
    const auto& policy = *policy_;
    const auto& p = *policy.product;
    const std::size_t t = layers_.size();
    const double lookahead =
        std::pow(policy.config.gamma, static_cast<double>(policy.config.lookahead_t_plus_one ? t + 1 : t));

    for (auto& c : layer) c.product_state = p.find(env_.back(), c.q).value_or(kMissing);

    auto better = [&](std::size_t a, double va, std::size_t b, double vb) {
        return va < vb || (va == vb && layer[a].product_state < layer[b].product_state);
    };
    std::size_t best = layer.size();
    double best_value = 0.0;
    for (std::size_t k = 0; k < layer.size(); ++k) {
        const auto x = layer[k].product_state;
        if (x == kMissing || policy.no_update[x]) continue;
        const double v = layer[k].cost + lookahead * policy.viol[x];
        if (best == layer.size() || better(k, v, best, best_value)) {
            best = k;
            best_value = v;
        }
    }
    fell_back_ = best == layer.size();
    if (fell_back_) {
        for (std::size_t k = 0; k < layer.size(); ++k) {
            if (layer[k].product_state == kMissing) continue;
            if (best == layer.size() || better(k, layer[k].cost, best, best_value)) {
                best = k;
                best_value = layer[k].cost;
            }
        }
    }
    if (best == layer.size()) throw Error("no reinterpretation of the history reaches a planned product state");
    selected_ = best;
    layers_.push_back(std::move(layer));
}

std::vector<std::size_t> HistoryInterpreter::chain(std::size_t index) const {
    std::vector<std::size_t> out(layers_.size());
    for (std::size_t t = layers_.size(); t-- > 0;) {
        out[t] = index;
        index = static_cast<std::size_t>(layers_[t][index].pred);
    }
    return out;
}

Selection select_action(const HistoryInterpreter& h, const AmalgamatedPolicy& policy, std::mt19937_64& rng) {
    const StateId x = h.selected_state();
    const auto& p = *policy.product;
    const ChoiceId c = h.fell_back() ? p.csr().first_choice(x) : policy.choose(x, rng);
    return {c, p.choice_action(c), p.choice_mask(c)};
}

std::uint64_t episode_seed(std::uint64_t master, std::size_t k) {
    // splitmix64
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (static_cast<std::uint64_t>(k) + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

ExecutionTrace run_episode(const AmalgamatedPolicy& policy, std::size_t horizon, std::uint64_t seed) {
    if (horizon == 0) throw InvalidArgument("horizon must be at least 1");
    const auto& p = *policy.product;
    const auto& env = p.env();
    const auto n = p.num_norms();
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> unit(0.0, 1.0);

    ExecutionTrace trace;
    trace.seed = seed;
    for (const auto& c : p.crdras()) trace.norm_names.push_back(c.norm().name);
    trace.atom_names = env.atoms().names();

    HistoryInterpreter h(policy, env.initial());
    std::vector<NormMask> online;
    for (std::size_t t = 0; t < horizon; ++t) {
        const auto sel = select_action(h, policy, rng);
        TraceStep step;
        step.t = t;
        step.env_state = h.env_state();
        step.label = env.label(step.env_state);
        step.action = sel.action;
        step.product_state = h.selected_state();
        online.push_back(h.candidates()[h.selected()].mask);
        trace.fallbacks += h.fell_back();
        trace.steps.push_back(std::move(step));
        if (t + 1 == horizon) break;

        const auto c = *env.choice(h.env_state(), sel.action);
        auto succ = env.csr().successors(c);
        auto probs = env.csr().probabilities(c);
        double u = unit(rng);
        StateId next = succ.back();
        for (std::size_t i = 0; i < succ.size(); ++i) {
            if (u < probs[i]) {
                next = succ[i];
                break;
            }
            u -= probs[i];
        }
        h.observe(sel.action, next);
    }

    const auto chain = h.chain(h.selected());
    for (std::size_t t = 0; t < trace.steps.size(); ++t) {
        const auto& cand = h.candidates(t)[chain[t]];
        auto& step = trace.steps[t];
        for (std::size_t i = 0; i < n; ++i) {
            step.norm_actions.push_back((cand.mask >> i) & 1U ? NormAction::Susp : NormAction::Keep);
            step.online_actions.push_back((online[t] >> i) & 1U ? NormAction::Susp : NormAction::Keep);
        }
        step.step_weight = p.mask_weight(cand.mask);
        step.accumulated = cand.cost;
        step.automaton_states = cand.q;
        if (cand.mask != online[t]) ++trace.revisions;
    }
    trace.total_cost = trace.steps.back().accumulated;
    return trace;
}

std::string trace_to_csv(const ExecutionTrace& trace, const LabeledMdp& m) {
    std::ostringstream os;
    os.precision(17);
    os << "t,state,labels,action";
    for (const auto& n : trace.norm_names) os << "," << n;
    os << ",step_weight,accumulated";
    for (const auto& n : trace.norm_names) os << ",q_" << n;
    os << ",revised\n";
    for (const auto& s : trace.steps) {
        std::string labels = s.label.to_string(m.atoms());
        labels = labels.substr(1, labels.size() - 2);
        for (auto& ch : labels)
            if (ch == ',') ch = ' ';
        os << s.t << "," << m.state_name(s.env_state) << "," << labels << "," << m.action_name(s.action);
        for (auto a : s.norm_actions) os << "," << to_string(a);
        os << "," << s.step_weight << "," << s.accumulated;
        for (auto q : s.automaton_states) os << "," << q;
        os << "," << (s.norm_actions != s.online_actions ? 1 : 0) << "\n";
    }
    return os.str();
}

std::string trace_to_json(const ExecutionTrace& trace, const LabeledMdp& m) {
    using nlohmann::json;
    json steps = json::array();
    for (const auto& s : trace.steps) {
        json labels = json::array();
        for (std::size_t a = 0; a < m.atoms().size(); ++a)
            if (s.label.contains(a)) labels.push_back(m.atoms().name(a));
        json actions = json::array();
        json online = json::array();
        for (std::size_t i = 0; i < s.norm_actions.size(); ++i) {
            actions.push_back(to_string(s.norm_actions[i]));
            online.push_back(to_string(s.online_actions[i]));
        }
        steps.push_back({{"t", s.t},
                         {"state", m.state_name(s.env_state)},
                         {"labels", labels},
                         {"action", m.action_name(s.action)},
                         {"norm_actions", actions},
                         {"online_norm_actions", online},
                         {"step_weight", s.step_weight},
                         {"accumulated", s.accumulated},
                         {"automaton_states", s.automaton_states}});
    }
    json doc{{"seed", trace.seed},
             {"norms", trace.norm_names},
             {"total_cost", trace.total_cost},
             {"revisions", trace.revisions},
             {"fallbacks", trace.fallbacks},
             {"steps", steps}};
    return doc.dump(1);
}

} // namespace normweaver
