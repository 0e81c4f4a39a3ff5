#include "normweaver/mdp.hpp"

#include "normweaver/error.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>
#include <sstream>

namespace normweaver {

void Csr::push_choice(std::vector<std::pair<StateId, double>> dist) {
    std::sort(dist.begin(), dist.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < dist.size(); ++i) {
        if (!targets.empty() && targets.size() > choice_offsets.back() && targets.back() == dist[i].first) {
            probs.back() += dist[i].second;
        } else {
            targets.push_back(dist[i].first);
            probs.push_back(dist[i].second);
        }
    }
    choice_offsets.push_back(targets.size());
}

std::vector<ActionId> LabeledMdp::available(StateId s) const {
    std::vector<ActionId> out;
    for (ChoiceId c = csr_.first_choice(s); c < csr_.end_choice(s); ++c) out.push_back(choice_actions_[c]);
    return out;
}

std::optional<ChoiceId> LabeledMdp::choice(StateId s, ActionId a) const {
    const auto begin = choice_actions_.begin() + static_cast<std::ptrdiff_t>(csr_.first_choice(s));
    const auto end = choice_actions_.begin() + static_cast<std::ptrdiff_t>(csr_.end_choice(s));
    auto it = std::lower_bound(begin, end, a);
    if (it == end || *it != a) return std::nullopt;
    return static_cast<ChoiceId>(it - choice_actions_.begin());
}

double LabeledMdp::probability(StateId s, ActionId a, StateId target) const {
    auto c = choice(s, a);
    if (!c) return 0.0;
    auto succ = csr_.successors(*c);
    auto it = std::lower_bound(succ.begin(), succ.end(), target);
    if (it == succ.end() || *it != target) return 0.0;
    return csr_.probabilities(*c)[static_cast<std::size_t>(it - succ.begin())];
}

MdpBuilder::MdpBuilder(AtomTable atoms) : atoms_(std::move(atoms)) {}

ActionId MdpBuilder::add_action(std::string name) {
    actions_.push_back(std::move(name));
    return static_cast<ActionId>(actions_.size() - 1);
}

StateId MdpBuilder::add_state(std::string name, Valuation label) {
    names_.push_back(std::move(name));
    labels_.push_back(label);
    return static_cast<StateId>(names_.size() - 1);
}

void MdpBuilder::add_transition(StateId from, ActionId action, StateId to, double prob) {
    edges_.push_back({from, action, to, prob});
}

void MdpBuilder::declare_available(StateId from, ActionId action) {
    edges_.push_back({from, action, from, 0.0});
}

LabeledMdp MdpBuilder::build() const {
    const auto n = names_.size();
    if (n == 0) throw ModelError("MDP has no states");
    if (initial_ >= n) throw ModelError("initial state " + std::to_string(initial_) + " out of range");
    std::vector<std::map<ActionId, std::vector<std::pair<StateId, double>>>> rows(n);
    for (const auto& e : edges_) {
        if (e.from >= n || e.to >= n)
            throw ModelError("transition references unknown state " + std::to_string(std::max(e.from, e.to)));
        if (e.action >= actions_.size()) throw ModelError("transition references unknown action " + std::to_string(e.action));
        auto& dist = rows[e.from][e.action];
        if (e.prob != 0.0) dist.emplace_back(e.to, e.prob);
    }
    LabeledMdp m;
    m.atoms_ = atoms_;
    m.action_names_ = actions_;
    m.state_names_ = names_;
    m.labels_ = labels_;
    m.initial_ = initial_;
    for (std::size_t s = 0; s < n; ++s) {
        for (auto& [a, dist] : rows[s]) {
            m.csr_.push_choice(std::move(dist));
            m.choice_actions_.push_back(a);
        }
        m.csr_.close_state();
    }
    return m;
}

std::vector<Violation> validate(const LabeledMdp& m, double tolerance) {
    std::vector<Violation> out;
    const auto& csr = m.csr();
    const std::uint64_t known = m.atoms().size() >= 64 ? ~std::uint64_t{0} : (std::uint64_t{1} << m.atoms().size()) - 1;
    if (m.num_states() == 0) out.push_back({Violation::Kind::EmptyAvailability, 0, "MDP has no states"});
    if (m.num_states() > 0 && m.initial() >= m.num_states())
        out.push_back({Violation::Kind::DanglingId, m.initial(), "initial state out of range"});
    for (StateId s = 0; s < m.num_states(); ++s) {
        if (csr.num_choices(s) == 0)
            out.push_back({Violation::Kind::EmptyAvailability, s, "state " + m.state_name(s) + " has no available action"});
        if (m.label(s).bits() & ~known)
            out.push_back({Violation::Kind::UnknownAtom, s, "state " + m.state_name(s) + " carries an unknown atom"});
        for (ChoiceId c = csr.first_choice(s); c < csr.end_choice(s); ++c) {
            const auto& action = m.action_name(m.choice_action(c));
            double sum = 0.0;
            auto succ = csr.successors(c);
            auto probs = csr.probabilities(c);
            for (std::size_t i = 0; i < succ.size(); ++i) {
                if (succ[i] >= m.num_states())
                    out.push_back({Violation::Kind::DanglingId, s, "successor out of range from " + m.state_name(s)});
                if (probs[i] < 0.0)
                    out.push_back({Violation::Kind::NegativeProbability, s,
                                   "negative probability in row (" + m.state_name(s) + ", " + action + ")"});
                sum += probs[i];
            }
            if (std::abs(sum - 1.0) > tolerance) {
                std::ostringstream os;
                os << "row (" << m.state_name(s) << ", " << action << ") sums to " << sum;
                out.push_back({Violation::Kind::NonStochastic, s, os.str()});
            }
        }
    }
    return out;
}

std::string to_string(const std::vector<Violation>& report) {
    std::string out;
    for (const auto& v : report) out += v.message + "\n";
    return out;
}

std::vector<Valuation> induced_word(const LabeledMdp& m, const MdpPath& p) {
    if (p.states.empty()) throw InvalidArgument("empty path");
    if (p.actions.size() + 1 != p.states.size()) throw InvalidArgument("path needs one action per transition");
    std::vector<Valuation> out;
    for (std::size_t i = 0; i < p.states.size(); ++i) {
        if (p.states[i] >= m.num_states()) throw InvalidArgument("path state out of range");
        if (i > 0 && m.probability(p.states[i - 1], p.actions[i - 1], p.states[i]) <= 0.0)
            throw InvalidArgument("path step " + std::to_string(i - 1) + " has zero probability");
        out.push_back(m.label(p.states[i]));
    }
    return out;
}

} // namespace normweaver
