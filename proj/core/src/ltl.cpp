#include "normweaver/ltl.hpp"

#include "normweaver/error.hpp"

#include <algorithm>
#include <functional>
#include <unordered_set>

namespace normweaver {

// ---------------------------------------------------------------------------
// AtomTable / Valuation

AtomTable::AtomTable(const std::vector<std::string>& names) {
    for (const auto& n : names) intern(n);
}

bool AtomTable::is_identifier(std::string_view name) {
    if (name.empty()) return false;
    auto alpha = [](char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_'; };
    auto digit = [](char c) { return c >= '0' && c <= '9'; };
    if (!alpha(name.front())) return false;
    return std::all_of(name.begin(), name.end(), [&](char c) { return alpha(c) || digit(c); });
}

std::size_t AtomTable::intern(std::string_view name) {
    if (auto found = find(name)) return *found;
    if (!is_identifier(name)) throw InvalidArgument("invalid proposition name '" + std::string(name) + "'");
    if (names_.size() >= kMaxAtoms)
        throw InvalidArgument("atom table full (" + std::to_string(kMaxAtoms) + " propositions)");
    names_.emplace_back(name);
    index_.emplace(names_.back(), names_.size() - 1);
    return names_.size() - 1;
}

std::optional<std::size_t> AtomTable::find(std::string_view name) const {
    auto it = index_.find(std::string(name));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::size_t AtomTable::at(std::string_view name) const {
    if (auto found = find(name)) return *found;
    throw AtomMismatch("unknown proposition '" + std::string(name) + "'");
}

std::string Valuation::to_string(const AtomTable& atoms) const {
    std::string out = "{";
    bool first = true;
    for (std::size_t i = 0; i < atoms.size(); ++i) {
        if (!contains(i)) continue;
        if (!first) out += ",";
        out += atoms.name(i);
        first = false;
    }
    return out + "}";
}

// ---------------------------------------------------------------------------
// LtlFormula

struct LtlFormula::Node {
    LtlOp op;
    std::string name;
    std::vector<std::string> args;
    std::vector<LtlFormula> children;
};

LtlFormula LtlFormula::make(LtlOp op, std::vector<LtlFormula> children) {
    auto node = std::make_shared<Node>();
    node->op = op;
    node->children = std::move(children);
    return LtlFormula(std::move(node));
}

LtlFormula LtlFormula::truth() {
    static const LtlFormula t = make(LtlOp::True, {});
    return t;
}

LtlFormula LtlFormula::falsity() {
    static const LtlFormula f = make(LtlOp::False, {});
    return f;
}

LtlFormula LtlFormula::atom(std::string name, std::vector<std::string> args) {
    if (!AtomTable::is_identifier(name)) throw InvalidArgument("invalid atom name '" + name + "'");
    for (const auto& a : args)
        if (!AtomTable::is_identifier(a)) throw InvalidArgument("invalid atom argument '" + a + "'");
    auto node = std::make_shared<Node>();
    node->op = LtlOp::Atom;
    node->name = std::move(name);
    node->args = std::move(args);
    return LtlFormula(std::move(node));
}

LtlFormula LtlFormula::negation(LtlFormula f) { return make(LtlOp::Not, {std::move(f)}); }
LtlFormula LtlFormula::conjunction(LtlFormula a, LtlFormula b) { return make(LtlOp::And, {std::move(a), std::move(b)}); }
LtlFormula LtlFormula::disjunction(LtlFormula a, LtlFormula b) { return make(LtlOp::Or, {std::move(a), std::move(b)}); }
LtlFormula LtlFormula::implication(LtlFormula a, LtlFormula b) { return make(LtlOp::Implies, {std::move(a), std::move(b)}); }
LtlFormula LtlFormula::next(LtlFormula f) { return make(LtlOp::Next, {std::move(f)}); }
LtlFormula LtlFormula::finally(LtlFormula f) { return make(LtlOp::Finally, {std::move(f)}); }
LtlFormula LtlFormula::globally(LtlFormula f) { return make(LtlOp::Globally, {std::move(f)}); }
LtlFormula LtlFormula::until(LtlFormula a, LtlFormula b) { return make(LtlOp::Until, {std::move(a), std::move(b)}); }

LtlOp LtlFormula::op() const noexcept { return node_->op; }
std::size_t LtlFormula::arity() const noexcept { return node_->children.size(); }
const LtlFormula& LtlFormula::child(std::size_t i) const { return node_->children.at(i); }

const std::string& LtlFormula::name() const {
    if (op() != LtlOp::Atom) throw InvalidArgument("name() on a non-atom formula");
    return node_->name;
}

const std::vector<std::string>& LtlFormula::args() const {
    if (op() != LtlOp::Atom) throw InvalidArgument("args() on a non-atom formula");
    return node_->args;
}

std::string LtlFormula::proposition() const {
    std::string out = name();
    for (const auto& a : args()) out += "_" + a;
    return out;
}

std::size_t LtlFormula::depth() const {
    std::size_t d = 0;
    for (const auto& c : node_->children) d = std::max(d, c.depth());
    return d + 1;
}

std::size_t LtlFormula::size() const {
    std::size_t s = 1;
    for (const auto& c : node_->children) s += c.size();
    return s;
}

std::vector<std::string> LtlFormula::propositions() const {
    std::vector<std::string> out;
    std::function<void(const LtlFormula&)> walk = [&](const LtlFormula& f) {
        if (f.op() == LtlOp::Atom) {
            auto p = f.proposition();
            if (std::find(out.begin(), out.end(), p) == out.end()) out.push_back(std::move(p));
            return;
        }
        for (std::size_t i = 0; i < f.arity(); ++i) walk(f.child(i));
    };
    walk(*this);
    return out;
}

bool operator==(const LtlFormula& a, const LtlFormula& b) {
    if (a.node_ == b.node_) return true;
    if (a.op() != b.op()) return false;
    if (a.op() == LtlOp::Atom) return a.node_->name == b.node_->name && a.node_->args == b.node_->args;
    if (a.arity() != b.arity()) return false;
    for (std::size_t i = 0; i < a.arity(); ++i)
        if (!(a.child(i) == b.child(i))) return false;
    return true;
}

namespace {

// Binding strength, loosest first; mirrors the parser.
int level(LtlOp op) {
    switch (op) {
    case LtlOp::Implies: return 0;
    case LtlOp::Or: return 1;
    case LtlOp::And: return 2;
    case LtlOp::Until: return 3;
    default: return 4;
    }
}

void print(const LtlFormula& f, int min_level, std::string& out) {
    const int own = level(f.op());
    const bool parens = own < min_level;
    if (parens) out += "(";
    switch (f.op()) {
    case LtlOp::True: out += "true"; break;
    case LtlOp::False: out += "false"; break;
    case LtlOp::Atom:
        out += f.name();
        if (!f.args().empty()) {
            out += "(";
            for (std::size_t i = 0; i < f.args().size(); ++i) {
                if (i) out += ", ";
                out += f.args()[i];
            }
            out += ")";
        }
        break;
    case LtlOp::Not:
        out += "!";
        print(f.child(0), 4, out);
        break;
    case LtlOp::Next:
    case LtlOp::Finally:
    case LtlOp::Globally:
        out += f.op() == LtlOp::Next ? "X " : f.op() == LtlOp::Finally ? "F " : "G ";
        print(f.child(0), 4, out);
        break;
    case LtlOp::And:
        print(f.lhs(), 2, out);
        out += " & ";
        print(f.rhs(), 3, out);
        break;
    case LtlOp::Or:
        print(f.lhs(), 1, out);
        out += " | ";
        print(f.rhs(), 2, out);
        break;
    case LtlOp::Implies:
        print(f.lhs(), 1, out);
        out += " -> ";
        print(f.rhs(), 0, out);
        break;
    case LtlOp::Until:
        print(f.lhs(), 4, out);
        out += " U ";
        print(f.rhs(), 3, out);
        break;
    }
    if (parens) out += ")";
}

} // namespace

std::string LtlFormula::to_string() const {
    std::string out;
    print(*this, 0, out);
    return out;
}

// ---------------------------------------------------------------------------
// Grounding

namespace {

LtlFormula rebuild(const LtlFormula& f, const std::vector<LtlFormula>& kids) {
    switch (f.op()) {
    case LtlOp::Not: return LtlFormula::negation(kids[0]);
    case LtlOp::Next: return LtlFormula::next(kids[0]);
    case LtlOp::Finally: return LtlFormula::finally(kids[0]);
    case LtlOp::Globally: return LtlFormula::globally(kids[0]);
    case LtlOp::And: return LtlFormula::conjunction(kids[0], kids[1]);
    case LtlOp::Or: return LtlFormula::disjunction(kids[0], kids[1]);
    case LtlOp::Implies: return LtlFormula::implication(kids[0], kids[1]);
    case LtlOp::Until: return LtlFormula::until(kids[0], kids[1]);
    default: return f;
    }
}

LtlFormula map_atoms(const LtlFormula& f, const std::function<LtlFormula(const LtlFormula&)>& fn) {
    if (f.op() == LtlOp::Atom) return fn(f);
    if (f.arity() == 0) return f;
    std::vector<LtlFormula> kids;
    kids.reserve(f.arity());
    for (std::size_t i = 0; i < f.arity(); ++i) kids.push_back(map_atoms(f.child(i), fn));
    return rebuild(f, kids);
}

} // namespace

LtlFormula flatten_atoms(const LtlFormula& f) {
    return map_atoms(f, [](const LtlFormula& a) {
        return a.args().empty() ? a : LtlFormula::atom(a.proposition());
    });
}

LtlFormula ground(const QuantifiedFormula& qf, const Domain& domain) {
    std::vector<const std::vector<std::string>*> entity_sets;
    for (const auto& v : qf.variables) {
        auto it = domain.find(v.sort);
        if (it == domain.end()) throw GroundingError("unknown sort '" + v.sort + "' for variable " + v.name);
        if (it->second.empty()) throw GroundingError("empty domain for sort '" + v.sort + "'");
        entity_sets.push_back(&it->second);
    }
    if (qf.variables.empty()) return flatten_atoms(qf.body);

    std::vector<std::size_t> cursor(qf.variables.size(), 0);
    std::optional<LtlFormula> result;
    while (true) {
        std::map<std::string, std::string> binding;
        for (std::size_t i = 0; i < cursor.size(); ++i) binding[qf.variables[i].name] = (*entity_sets[i])[cursor[i]];
        auto instance = map_atoms(qf.body, [&](const LtlFormula& a) {
            std::string flat = a.name();
            for (const auto& arg : a.args()) {
                auto b = binding.find(arg);
                flat += "_" + (b == binding.end() ? arg : b->second);
            }
            return LtlFormula::atom(flat);
        });
        result = result ? LtlFormula::conjunction(*result, instance) : instance;

        std::size_t k = cursor.size();
        while (k > 0) {
            --k;
            if (++cursor[k] < entity_sets[k]->size()) break;
            cursor[k] = 0;
            if (k == 0) return *result;
        }
    }
}

// ---------------------------------------------------------------------------
// Negation normal form

namespace {

LtlFormula nnf(const LtlFormula& f, bool negated) {
    using F = LtlFormula;
    switch (f.op()) {
    case LtlOp::True: return negated ? F::falsity() : f;
    case LtlOp::False: return negated ? F::truth() : f;
    case LtlOp::Atom: return negated ? F::negation(f) : f;
    case LtlOp::Not: return nnf(f.child(0), !negated);
    case LtlOp::And:
        return negated ? F::disjunction(nnf(f.lhs(), true), nnf(f.rhs(), true))
                       : F::conjunction(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case LtlOp::Or:
        return negated ? F::conjunction(nnf(f.lhs(), true), nnf(f.rhs(), true))
                       : F::disjunction(nnf(f.lhs(), false), nnf(f.rhs(), false));
    case LtlOp::Implies:
        return negated ? F::conjunction(nnf(f.lhs(), false), nnf(f.rhs(), true))
                       : F::disjunction(nnf(f.lhs(), true), nnf(f.rhs(), false));
    case LtlOp::Next: return F::next(nnf(f.child(0), negated));
    case LtlOp::Finally: return negated ? F::globally(nnf(f.child(0), true)) : F::finally(nnf(f.child(0), false));
    case LtlOp::Globally: return negated ? F::finally(nnf(f.child(0), true)) : F::globally(nnf(f.child(0), false));
    case LtlOp::Until:
        if (!negated) return F::until(nnf(f.lhs(), false), nnf(f.rhs(), false));
        {
            // !(a U b) == (!b U (!a & !b)) | G !b
            auto not_a = nnf(f.lhs(), true);
            auto not_b = nnf(f.rhs(), true);
            return F::disjunction(F::until(not_b, F::conjunction(not_a, not_b)), F::globally(not_b));
        }
    }
    return f;
}

} // namespace

LtlFormula to_nnf(const LtlFormula& f) { return nnf(f, false); }

bool is_nnf(const LtlFormula& f) {
    switch (f.op()) {
    case LtlOp::Implies: return false;
    case LtlOp::Not: return f.child(0).op() == LtlOp::Atom;
    default:
        for (std::size_t i = 0; i < f.arity(); ++i)
            if (!is_nnf(f.child(i))) return false;
        return true;
    }
}

// ---------------------------------------------------------------------------
// Lasso semantics

namespace {

class LassoEvaluator {
public:
    LassoEvaluator(const Lasso& w, const AtomTable& atoms) : w_(w), atoms_(atoms), n_(w.length()) {}

    const std::vector<bool>& eval(const LtlFormula& f) {
        if (auto it = memo_.find(f.identity()); it != memo_.end()) return it->second;
        std::vector<bool> out(n_, false);
        switch (f.op()) {
        case LtlOp::True: std::fill(out.begin(), out.end(), true); break;
        case LtlOp::False: break;
        case LtlOp::Atom: {
            const auto idx = atoms_.at(f.proposition());
            for (std::size_t i = 0; i < n_; ++i) out[i] = w_.at(i).contains(idx);
            break;
        }
        case LtlOp::Not: {
            const auto& a = eval(f.child(0));
            for (std::size_t i = 0; i < n_; ++i) out[i] = !a[i];
            break;
        }
        case LtlOp::And:
        case LtlOp::Or:
        case LtlOp::Implies: {
            const auto a = eval(f.lhs());
            const auto& b = eval(f.rhs());
            for (std::size_t i = 0; i < n_; ++i)
                out[i] = f.op() == LtlOp::And ? (a[i] && b[i]) : f.op() == LtlOp::Or ? (a[i] || b[i]) : (!a[i] || b[i]);
            break;
        }
        case LtlOp::Next: {
            const auto& a = eval(f.child(0));
            for (std::size_t i = 0; i < n_; ++i) out[i] = a[w_.successor(i)];
            break;
        }
        case LtlOp::Finally: out = least_until(std::vector<bool>(n_, true), eval(f.child(0))); break;
        case LtlOp::Until: {
            const auto a = eval(f.lhs());
            out = least_until(a, eval(f.rhs()));
            break;
        }
        case LtlOp::Globally: {
            // Greatest fixpoint of g = a & X g.
            const auto a = eval(f.child(0));
            out.assign(n_, true);
            for (bool changed = true; changed;) {
                changed = false;
                for (std::size_t i = n_; i-- > 0;) {
                    const bool v = a[i] && out[w_.successor(i)];
                    if (v != out[i]) {
                        out[i] = v;
                        changed = true;
                    }
                }
            }
            break;
        }
        }
        return memo_.emplace(f.identity(), std::move(out)).first->second;
    }

private:
    // Least fixpoint of u = b | (a & X u).
    std::vector<bool> least_until(const std::vector<bool>& a, const std::vector<bool>& b) const {
        std::vector<bool> u(n_, false);
        for (bool changed = true; changed;) {
            changed = false;
            for (std::size_t i = n_; i-- > 0;) {
                const bool v = b[i] || (a[i] && u[w_.successor(i)]);
                if (v != u[i]) {
                    u[i] = v;
                    changed = true;
                }
            }
        }
        return u;
    }

    const Lasso& w_;
    const AtomTable& atoms_;
    std::size_t n_;
    std::unordered_map<const void*, std::vector<bool>> memo_;
};

} // namespace

bool evaluate_on_lasso(const LtlFormula& f, const Lasso& w, const AtomTable& atoms) {
    if (w.cycle.empty()) throw InvalidArgument("lasso cycle must be nonempty");
    LassoEvaluator ev(w, atoms);
    return ev.eval(f)[0];
}

} // namespace normweaver
