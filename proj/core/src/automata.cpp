#include "normweaver/automata.hpp"

#include "normweaver/error.hpp"

#include <algorithm>
#include <deque>
#include <set>

namespace normweaver {

bool RabinPair::in_fin(AutomatonState q) const { return std::binary_search(fin.begin(), fin.end(), q); }
bool RabinPair::in_inf(AutomatonState q) const { return std::binary_search(inf.begin(), inf.end(), q); }

Dra::Dra(std::vector<std::string> propositions, AutomatonState num_states, AutomatonState initial,
         std::vector<AutomatonState> delta, std::vector<RabinPair> pairs, std::vector<std::string> state_names)
    : props_(std::move(propositions)), num_states_(num_states), initial_(initial), delta_(std::move(delta)),
      pairs_(std::move(pairs)), names_(std::move(state_names)) {
    if (props_.size() > kMaxPropositions) throw InvalidArgument("automaton has too many propositions");
    for (std::size_t i = 0; i < props_.size(); ++i) {
        if (!AtomTable::is_identifier(props_[i])) throw InvalidArgument("invalid proposition '" + props_[i] + "'");
        for (std::size_t j = 0; j < i; ++j)
            if (props_[i] == props_[j]) throw InvalidArgument("duplicate proposition '" + props_[i] + "'");
    }
    if (num_states_ == 0) throw InvalidArgument("automaton needs at least one state");
    if (initial_ >= num_states_) throw InvalidArgument("initial state out of range");
    if (delta_.size() != (std::size_t{num_states_} << props_.size()))
        throw InvalidArgument("transition table is not total");
    for (auto t : delta_)
        if (t >= num_states_) throw InvalidArgument("transition target out of range");
    if (pairs_.empty()) throw InvalidArgument("automaton needs at least one Rabin pair");
    for (auto& p : pairs_) {
        for (auto* set : {&p.fin, &p.inf}) {
            std::sort(set->begin(), set->end());
            set->erase(std::unique(set->begin(), set->end()), set->end());
            if (!set->empty() && set->back() >= num_states_) throw InvalidArgument("Rabin pair names unknown state");
        }
    }
    if (names_.empty())
        for (AutomatonState q = 0; q < num_states_; ++q) names_.push_back("q" + std::to_string(q));
    if (names_.size() != num_states_) throw InvalidArgument("state name count mismatch");
}

LetterMap Dra::bind(const AtomTable& atoms) const {
    std::vector<std::size_t> idx;
    idx.reserve(props_.size());
    for (const auto& p : props_) {
        auto found = atoms.find(p);
        if (!found) throw AtomMismatch("automaton proposition '" + p + "' is not in the model's atom table");
        idx.push_back(*found);
    }
    return LetterMap(std::move(idx));
}

DraRun Dra::run(const std::vector<Valuation>& word, const AtomTable& atoms) const {
    const auto letters = bind(atoms);
    DraRun r;
    r.states.reserve(word.size() + 1);
    r.states.push_back(initial_);
    for (auto v : word) r.states.push_back(step(r.states.back(), letters(v)));
    return r;
}

Letter Dra::letter_of(const std::vector<std::string>& true_props) const {
    Letter out = 0;
    for (std::size_t i = 0; i < props_.size(); ++i)
        if (std::find(true_props.begin(), true_props.end(), props_[i]) != true_props.end()) out |= Letter{1} << i;
    return out;
}

bool dra_accepts_lasso(const Dra& d, const Lasso& w, const AtomTable& atoms) {
    if (w.cycle.empty()) throw InvalidArgument("lasso cycle must be nonempty");
    const auto letters = d.bind(atoms);
    AutomatonState q = d.initial();
    for (auto v : w.prefix) q = d.step(q, letters(v));

    // The state at the start of each cycle traversal is eventually periodic.
    std::vector<AutomatonState> starts;
    std::vector<std::vector<AutomatonState>> visited;
    while (true) {
        auto seen = std::find(starts.begin(), starts.end(), q);
        if (seen != starts.end()) {
            std::vector<bool> infinitely(d.num_states(), false);
            for (auto it = visited.begin() + (seen - starts.begin()); it != visited.end(); ++it)
                for (auto s : *it) infinitely[s] = true;
            for (const auto& pair : d.pairs()) {
                bool fin_hit = false;
                bool inf_hit = false;
                for (AutomatonState s = 0; s < d.num_states(); ++s) {
                    if (!infinitely[s]) continue;
                    fin_hit = fin_hit || pair.in_fin(s);
                    inf_hit = inf_hit || pair.in_inf(s);
                }
                if (!fin_hit && inf_hit) return true;
            }
            return false;
        }
        starts.push_back(q);
        auto& trail = visited.emplace_back();
        for (auto v : w.cycle) {
            q = d.step(q, letters(v));
            trail.push_back(q);
        }
    }
}

bool isomorphic(const Dra& a, const Dra& b) {
    if (a.num_states() != b.num_states() || a.pairs().size() != b.pairs().size()) return false;
    const auto& pa = a.propositions();
    const auto& pb = b.propositions();
    if (pa.size() != pb.size()) return false;
    // letter of a -> letter of b
    std::vector<std::size_t> prop_map(pa.size());
    for (std::size_t i = 0; i < pa.size(); ++i) {
        auto it = std::find(pb.begin(), pb.end(), pa[i]);
        if (it == pb.end()) return false;
        prop_map[i] = static_cast<std::size_t>(it - pb.begin());
    }
    auto map_letter = [&](Letter l) {
        Letter out = 0;
        for (std::size_t i = 0; i < pa.size(); ++i)
            if ((l >> i) & 1U) out |= Letter{1} << prop_map[i];
        return out;
    };

    constexpr AutomatonState kUnset = ~AutomatonState{0};
    std::vector<AutomatonState> fwd(a.num_states(), kUnset), bwd(b.num_states(), kUnset);
    std::deque<AutomatonState> queue{a.initial()};
    fwd[a.initial()] = b.initial();
    bwd[b.initial()] = a.initial();
    while (!queue.empty()) {
        auto q = queue.front();
        queue.pop_front();
        for (Letter l = 0; l < a.num_letters(); ++l) {
            auto qa = a.step(q, l);
            auto qb = b.step(fwd[q], map_letter(l));
            if (fwd[qa] == kUnset && bwd[qb] == kUnset) {
                fwd[qa] = qb;
                bwd[qb] = qa;
                queue.push_back(qa);
            } else if (fwd[qa] != qb || bwd[qb] != qa) {
                return false;
            }
        }
    }
    if (std::find(fwd.begin(), fwd.end(), kUnset) != fwd.end()) return false;

    auto canon = [](const std::vector<RabinPair>& pairs, const std::vector<AutomatonState>* map) {
        std::set<std::pair<std::vector<AutomatonState>, std::vector<AutomatonState>>> out;
        for (const auto& p : pairs) {
            auto fin = p.fin;
            auto inf = p.inf;
            if (map) {
                for (auto& s : fin) s = (*map)[s];
                for (auto& s : inf) s = (*map)[s];
            }
            std::sort(fin.begin(), fin.end());
            std::sort(inf.begin(), inf.end());
            out.emplace(std::move(fin), std::move(inf));
        }
        return out;
    };
    return canon(a.pairs(), &fwd) == canon(b.pairs(), nullptr);
}

} // namespace normweaver
