// LTL -> DRA for a fragment, by formula progression.
//
// The normalized formula is split into a positive boolean combination of
// components. Each component is run as a progression automaton whose states
// are canonical DNFs of pending obligations:
//   safety     accepts iff it never progresses to false,
//   co-safety  accepts iff it reaches true (absorbing),
//   recurrence accepts iff it never reaches false and returns infinitely
//              often to the bare `G psi` state (no eventuality pending).
// The DRA is the synchronous product of all components. Each clause of the
// component-level DNF yields one Rabin pair; clauses that need two or more
// recurrence components carry a round-robin counter.

#include "normweaver/automata.hpp"
#include "normweaver/error.hpp"

#include <algorithm>
#include <deque>
#include <map>
#include <optional>
#include <tuple>

namespace normweaver {
namespace {

using F = LtlFormula;

// ---------------------------------------------------------------------------
// Normalization (on NNF input)

F mk_and(const F& a, const F& b) {
    if (a.op() == LtlOp::False || b.op() == LtlOp::False) return F::falsity();
    if (a.op() == LtlOp::True) return b;
    if (b.op() == LtlOp::True) return a;
    if (a == b) return a;
    return F::conjunction(a, b);
}

F mk_or(const F& a, const F& b) {
    if (a.op() == LtlOp::True || b.op() == LtlOp::True) return F::truth();
    if (a.op() == LtlOp::False) return b;
    if (b.op() == LtlOp::False) return a;
    if (a == b) return a;
    return F::disjunction(a, b);
}

F mk_next(const F& a) {
    switch (a.op()) {
    case LtlOp::True:
    case LtlOp::False: return a;
    case LtlOp::And: return mk_and(mk_next(a.lhs()), mk_next(a.rhs()));
    case LtlOp::Or: return mk_or(mk_next(a.lhs()), mk_next(a.rhs()));
    default: return F::next(a);
    }
}

F mk_globally(const F& a) {
    switch (a.op()) {
    case LtlOp::True:
    case LtlOp::False:
    case LtlOp::Globally: return a;
    case LtlOp::And: return mk_and(mk_globally(a.lhs()), mk_globally(a.rhs()));
    case LtlOp::Next: return mk_next(mk_globally(a.child(0)));
    default: return F::globally(a);
    }
}

F mk_finally(const F& a) {
    switch (a.op()) {
    case LtlOp::True:
    case LtlOp::False:
    case LtlOp::Finally: return a;
    case LtlOp::Next: return mk_next(mk_finally(a.child(0)));
    default: return F::finally(a);
    }
}

F mk_until(const F& a, const F& b) {
    if (b.op() == LtlOp::True || b.op() == LtlOp::False) return b;
    if (a.op() == LtlOp::False) return b;
    if (a.op() == LtlOp::True) return mk_finally(b);
    return F::until(a, b);
}

F normalize(const F& f) {
    switch (f.op()) {
    case LtlOp::And: return mk_and(normalize(f.lhs()), normalize(f.rhs()));
    case LtlOp::Or: return mk_or(normalize(f.lhs()), normalize(f.rhs()));
    case LtlOp::Next: return mk_next(normalize(f.child(0)));
    case LtlOp::Finally: return mk_finally(normalize(f.child(0)));
    case LtlOp::Globally: return mk_globally(normalize(f.child(0)));
    case LtlOp::Until: return mk_until(normalize(f.lhs()), normalize(f.rhs()));
    default: return f;
    }
}

// ---------------------------------------------------------------------------
// Syntactic classes

bool is_literal_boolean(const F& f) {
    switch (f.op()) {
    case LtlOp::True:
    case LtlOp::False:
    case LtlOp::Atom: return true;
    case LtlOp::Not: return f.child(0).op() == LtlOp::Atom;
    case LtlOp::And:
    case LtlOp::Or: return is_literal_boolean(f.lhs()) && is_literal_boolean(f.rhs());
    default: return false;
    }
}

bool is_safety(const F& f) {
    if (is_literal_boolean(f)) return true;
    switch (f.op()) {
    case LtlOp::Next:
    case LtlOp::Globally: return is_safety(f.child(0));
    case LtlOp::And:
    case LtlOp::Or: return is_safety(f.lhs()) && is_safety(f.rhs());
    default: return false;
    }
}

bool is_cosafety(const F& f) {
    if (is_literal_boolean(f)) return true;
    switch (f.op()) {
    case LtlOp::Next:
    case LtlOp::Finally: return is_cosafety(f.child(0));
    case LtlOp::And:
    case LtlOp::Or:
    case LtlOp::Until: return is_cosafety(f.lhs()) && is_cosafety(f.rhs());
    default: return false;
    }
}

bool is_eventuality(const F& f) {
    if (f.op() == LtlOp::Finally) return is_literal_boolean(f.child(0));
    if (f.op() == LtlOp::Until) return is_literal_boolean(f.lhs()) && is_literal_boolean(f.rhs());
    return false;
}

// psi of a recurrence `G psi`: literals combined with one repeated eventuality.
bool recurrence_body(const F& f, std::optional<F>& eventuality) {
    if (is_literal_boolean(f)) return true;
    if (is_eventuality(f)) {
        if (eventuality && !(*eventuality == f)) return false;
        eventuality = f;
        return true;
    }
    if (f.op() == LtlOp::And || f.op() == LtlOp::Or)
        return recurrence_body(f.lhs(), eventuality) && recurrence_body(f.rhs(), eventuality);
    return false;
}

bool is_recurrence(const F& f) {
    if (f.op() == LtlOp::Next) return is_recurrence(f.child(0));
    if (f.op() != LtlOp::Globally) return false;
    std::optional<F> e;
    return recurrence_body(f.child(0), e) && e.has_value();
}

enum class Kind { Safety, CoSafety, Recurrence };

struct Component {
    Kind kind;
    F formula;
};

// Positive boolean structure over component indices, as a minimized DNF.
using Clause = std::vector<int>;
using Dnf = std::vector<Clause>;

Dnf minimize(Dnf d) {
    for (auto& c : d) {
        std::sort(c.begin(), c.end());
        c.erase(std::unique(c.begin(), c.end()), c.end());
    }
    std::sort(d.begin(), d.end(), [](const Clause& a, const Clause& b) {
        return a.size() != b.size() ? a.size() < b.size() : a < b;
    });
    d.erase(std::unique(d.begin(), d.end()), d.end());
    Dnf out;
    for (auto& c : d) {
        bool subsumed = std::any_of(out.begin(), out.end(), [&](const Clause& k) {
            return std::includes(c.begin(), c.end(), k.begin(), k.end());
        });
        if (!subsumed) out.push_back(std::move(c));
    }
    return out;
}

Dnf dnf_or(const Dnf& a, const Dnf& b) {
    Dnf out = a;
    out.insert(out.end(), b.begin(), b.end());
    return minimize(std::move(out));
}

Dnf dnf_and(const Dnf& a, const Dnf& b) {
    Dnf out;
    for (const auto& x : a)
        for (const auto& y : b) {
            Clause c = x;
            c.insert(c.end(), y.begin(), y.end());
            out.push_back(std::move(c));
        }
    return minimize(std::move(out));
}

Dnf decompose(const F& f, std::vector<Component>& comps) {
    auto leaf = [&](Kind k) {
        comps.push_back({k, f});
        return Dnf{{static_cast<int>(comps.size() - 1)}};
    };
    if (is_safety(f)) return leaf(Kind::Safety);
    if (is_cosafety(f)) return leaf(Kind::CoSafety);
    if (f.op() == LtlOp::And) return dnf_and(decompose(f.lhs(), comps), decompose(f.rhs(), comps));
    if (f.op() == LtlOp::Or) return dnf_or(decompose(f.lhs(), comps), decompose(f.rhs(), comps));
    if (is_recurrence(f)) return leaf(Kind::Recurrence);
    throw UnsupportedFragment(f.to_string(), "not a boolean combination of safety, co-safety and recurrence formulas");
}

// ---------------------------------------------------------------------------
// Progression over interned formulas

class Progression {
public:
    explicit Progression(const std::vector<std::string>& props) : props_(props) {}

    int intern(const F& f) {
        Key key{f.op(), "", -1, -1};
        if (f.op() == LtlOp::Atom) {
            key = {f.op(), f.proposition(), -1, -1};
        } else {
            if (f.arity() > 0) std::get<2>(key) = intern(f.child(0));
            if (f.arity() > 1) std::get<3>(key) = intern(f.child(1));
        }
        auto [it, inserted] = ids_.emplace(key, static_cast<int>(nodes_.size()));
        if (inserted) {
            int prop = -1;
            if (f.op() == LtlOp::Atom)
                prop = static_cast<int>(std::find(props_.begin(), props_.end(), f.proposition()) - props_.begin());
            nodes_.push_back({f.op(), std::get<2>(key), std::get<3>(key), prop, f});
        }
        return it->second;
    }

    Dnf to_dnf(int id) const {
        const auto& n = nodes_[id];
        switch (n.op) {
        case LtlOp::True: return Dnf{Clause{}};
        case LtlOp::False: return Dnf{};
        case LtlOp::And: return dnf_and(to_dnf(n.a), to_dnf(n.b));
        case LtlOp::Or: return dnf_or(to_dnf(n.a), to_dnf(n.b));
        default: return Dnf{Clause{id}};
        }
    }

    Dnf progress(const Dnf& state, Letter letter) {
        Dnf out;
        for (const auto& clause : state) {
            Dnf acc{Clause{}};
            for (int id : clause) {
                acc = dnf_and(acc, progress_atom(id, letter));
                if (acc.empty()) break;
            }
            out.insert(out.end(), acc.begin(), acc.end());
        }
        return minimize(std::move(out));
    }

    std::string to_string(const Dnf& d) const {
        if (d.empty()) return "false";
        std::string out;
        for (std::size_t i = 0; i < d.size(); ++i) {
            if (i) out += " | ";
            if (d[i].empty()) out += "true";
            for (std::size_t j = 0; j < d[i].size(); ++j) {
                if (j) out += " & ";
                const auto& f = nodes_[d[i][j]].formula;
                const bool wrap = d.size() > 1 || d[i].size() > 1;
                const bool compound = f.op() == LtlOp::Until;
                out += (wrap && compound) ? "(" + f.to_string() + ")" : f.to_string();
            }
        }
        return out;
    }

private:
    using Key = std::tuple<LtlOp, std::string, int, int>;
    struct Node {
        LtlOp op;
        int a;
        int b;
        int prop;
        F formula;
    };

    const Dnf& progress_atom(int id, Letter letter) {
        auto key = std::make_pair(id, letter);
        if (auto it = cache_.find(key); it != cache_.end()) return it->second;
        const auto n = nodes_[id];
        Dnf out;
        switch (n.op) {
        case LtlOp::True: out = Dnf{Clause{}}; break;
        case LtlOp::False: break;
        case LtlOp::Atom:
            if ((letter >> n.prop) & 1U) out = Dnf{Clause{}};
            break;
        case LtlOp::Not:
            if (!((letter >> nodes_[n.a].prop) & 1U)) out = Dnf{Clause{}};
            break;
        case LtlOp::And: out = dnf_and(progress_atom(n.a, letter), progress_atom(n.b, letter)); break;
        case LtlOp::Or: out = dnf_or(progress_atom(n.a, letter), progress_atom(n.b, letter)); break;
        case LtlOp::Next: out = to_dnf(n.a); break;
        case LtlOp::Finally: out = dnf_or(progress_atom(n.a, letter), Dnf{Clause{id}}); break;
        case LtlOp::Globally: out = dnf_and(progress_atom(n.a, letter), Dnf{Clause{id}}); break;
        case LtlOp::Until:
            out = dnf_or(progress_atom(n.b, letter), dnf_and(progress_atom(n.a, letter), Dnf{Clause{id}}));
            break;
        case LtlOp::Implies: throw InvalidArgument("implication in normalized formula");
        }
        return cache_.emplace(key, std::move(out)).first->second;
    }

    std::vector<std::string> props_;
    std::map<Key, int> ids_;
    std::vector<Node> nodes_;
    std::map<std::pair<int, Letter>, Dnf> cache_;
};

struct ComponentAutomaton {
    Kind kind;
    std::vector<Dnf> states;
    std::map<Dnf, std::uint32_t> index;
    Dnf clean; // recurrence only: the bare G psi state

    std::uint32_t add(const Dnf& d) {
        auto [it, inserted] = index.emplace(d, static_cast<std::uint32_t>(states.size()));
        if (inserted) states.push_back(d);
        return it->second;
    }
    bool is_false(std::uint32_t s) const { return states[s].empty(); }
    bool is_true(std::uint32_t s) const { return states[s].size() == 1 && states[s][0].empty(); }
    bool is_clean(std::uint32_t s) const { return states[s] == clean; }
};

F strip_next(const F& f) { return f.op() == LtlOp::Next ? strip_next(f.child(0)) : f; }

} // namespace

Dra ltl_to_dra(const LtlFormula& input) {
    const F f = normalize(is_nnf(input) ? input : to_nnf(input));
    const auto props = f.propositions();
    if (props.size() > Dra::kMaxPropositions) throw UnsupportedFragment(f.to_string(), "too many propositions");

    std::vector<Component> comps;
    const Dnf structure = decompose(f, comps);

    Progression prog(props);
    std::vector<ComponentAutomaton> autos(comps.size());
    std::vector<std::uint32_t> initial;
    for (std::size_t i = 0; i < comps.size(); ++i) {
        autos[i].kind = comps[i].kind;
        const int id = prog.intern(comps[i].formula);
        initial.push_back(autos[i].add(prog.to_dnf(id)));
        if (comps[i].kind == Kind::Recurrence) autos[i].clean = Dnf{Clause{prog.intern(strip_next(comps[i].formula))}};
    }

    struct ClauseInfo {
        std::vector<int> safety, cosafety, recurrence;
        int counter = -1; // index into the counter part of a product state
    };
    std::vector<ClauseInfo> clauses;
    int num_counters = 0;
    for (const auto& c : structure) {
        ClauseInfo info;
        for (int k : c) {
            switch (comps[k].kind) {
            case Kind::Safety: info.safety.push_back(k); break;
            case Kind::CoSafety: info.cosafety.push_back(k); break;
            case Kind::Recurrence: info.recurrence.push_back(k); break;
            }
        }
        if (info.recurrence.size() >= 2) info.counter = num_counters++;
        clauses.push_back(std::move(info));
    }

    // Product state: component states followed by clause counters.
    using Tuple = std::vector<std::uint32_t>;
    std::map<Tuple, AutomatonState> index;
    std::vector<Tuple> tuples;
    auto add = [&](const Tuple& t) {
        auto [it, inserted] = index.emplace(t, static_cast<AutomatonState>(tuples.size()));
        if (inserted) tuples.push_back(t);
        return it->second;
    };
    Tuple init = initial;
    init.resize(comps.size() + num_counters, 0);
    add(init);

    const std::size_t letters = std::size_t{1} << props.size();
    std::vector<AutomatonState> delta;
    for (std::size_t s = 0; s < tuples.size(); ++s) {
        for (Letter l = 0; l < letters; ++l) {
            Tuple next(comps.size() + num_counters);
            for (std::size_t i = 0; i < comps.size(); ++i) {
                const Dnf& cur = autos[i].states[tuples[s][i]];
                next[i] = autos[i].add(prog.progress(cur, l));
            }
            for (const auto& info : clauses) {
                if (info.counter < 0) continue;
                const auto m = static_cast<std::uint32_t>(info.recurrence.size());
                std::uint32_t k = tuples[s][comps.size() + info.counter];
                if (k == m) k = 0;
                while (k < m && autos[info.recurrence[k]].is_clean(next[info.recurrence[k]])) ++k;
                next[comps.size() + info.counter] = k;
            }
            delta.push_back(add(next));
        }
        if (tuples.size() > 100000) throw UnsupportedFragment(f.to_string(), "automaton too large");
    }

    const auto n = static_cast<AutomatonState>(tuples.size());
    std::vector<RabinPair> pairs;
    for (const auto& info : clauses) {
        RabinPair p;
        const bool only_cosafe = info.safety.empty() && info.recurrence.empty();
        for (AutomatonState q = 0; q < n; ++q) {
            const auto& t = tuples[q];
            if (only_cosafe) {
                bool all_true = std::all_of(info.cosafety.begin(), info.cosafety.end(),
                                            [&](int k) { return autos[k].is_true(t[k]); });
                if (all_true) p.inf.push_back(q);
                continue;
            }
            bool fin = false;
            for (int k : info.safety) fin = fin || autos[k].is_false(t[k]);
            for (int k : info.recurrence) fin = fin || autos[k].is_false(t[k]);
            for (int k : info.cosafety) fin = fin || !autos[k].is_true(t[k]);
            if (fin) p.fin.push_back(q);

            bool inf = false;
            if (info.recurrence.empty()) {
                inf = !fin;
            } else if (info.recurrence.size() == 1) {
                inf = autos[info.recurrence[0]].is_clean(t[info.recurrence[0]]);
            } else {
                inf = t[comps.size() + info.counter] == info.recurrence.size();
            }
            if (inf) p.inf.push_back(q);
        }
        if (std::find(pairs.begin(), pairs.end(), p) == pairs.end()) pairs.push_back(std::move(p));
    }

    std::vector<std::string> names;
    for (const auto& t : tuples) {
        std::string name;
        for (std::size_t i = 0; i < comps.size(); ++i) {
            if (i) name += " ; ";
            name += prog.to_string(autos[i].states[t[i]]);
        }
        for (int c = 0; c < num_counters; ++c) name += " #" + std::to_string(t[comps.size() + c]);
        names.push_back(std::move(name));
    }
    return Dra(props, n, 0, std::move(delta), std::move(pairs), std::move(names));
}

} // namespace normweaver
