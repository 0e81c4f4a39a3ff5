#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace normweaver {

/// Interned set of atomic propositions. Indices are dense and stable.
class AtomTable {
public:
    static constexpr std::size_t kMaxAtoms = 64;

    AtomTable() = default;
    explicit AtomTable(const std::vector<std::string>& names);

    /// Returns the index of `name`, adding it if absent. Throws InvalidArgument
    /// for malformed identifiers or when the table is full.
    std::size_t intern(std::string_view name);
    std::optional<std::size_t> find(std::string_view name) const;
    std::size_t at(std::string_view name) const;

    const std::string& name(std::size_t index) const { return names_.at(index); }
    const std::vector<std::string>& names() const noexcept { return names_; }
    std::size_t size() const noexcept { return names_.size(); }

    static bool is_identifier(std::string_view name);

private:
    std::vector<std::string> names_;
    std::unordered_map<std::string, std::size_t> index_;
};

/// The set of propositions true at one time step, as a bitset over an AtomTable.
class Valuation {
public:
    constexpr Valuation() = default;
    constexpr explicit Valuation(std::uint64_t bits) : bits_(bits) {}

    constexpr bool contains(std::size_t atom) const { return (bits_ >> atom) & 1U; }
    constexpr Valuation& insert(std::size_t atom) {
        bits_ |= std::uint64_t{1} << atom;
        return *this;
    }
    constexpr Valuation& erase(std::size_t atom) {
        bits_ &= ~(std::uint64_t{1} << atom);
        return *this;
    }
    constexpr std::uint64_t bits() const { return bits_; }

    friend constexpr bool operator==(Valuation, Valuation) = default;
    friend constexpr auto operator<=>(Valuation, Valuation) = default;

    std::string to_string(const AtomTable& atoms) const;

private:
    std::uint64_t bits_ = 0;
};

enum class LtlOp : std::uint8_t {
    True,
    False,
    Atom,
    Not,
    And,
    Or,
    Implies,
    Next,
    Finally,
    Globally,
    Until,
};

/// Immutable LTL syntax tree with shared subterms.
///
/// Atoms are kept by name. A parameterized atom such as `injured(x)` keeps its
/// argument list until grounding mangles it into a flat proposition
/// (`injured_h1`).
class LtlFormula {
public:
    static LtlFormula truth();
    static LtlFormula falsity();
    static LtlFormula atom(std::string name, std::vector<std::string> args = {});
    static LtlFormula negation(LtlFormula f);
    static LtlFormula conjunction(LtlFormula a, LtlFormula b);
    static LtlFormula disjunction(LtlFormula a, LtlFormula b);
    static LtlFormula implication(LtlFormula a, LtlFormula b);
    static LtlFormula next(LtlFormula f);
    static LtlFormula finally(LtlFormula f);
    static LtlFormula globally(LtlFormula f);
    static LtlFormula until(LtlFormula a, LtlFormula b);

    LtlOp op() const noexcept;
    std::size_t arity() const noexcept;
    const LtlFormula& child(std::size_t i) const;
    const LtlFormula& lhs() const { return child(0); }
    const LtlFormula& rhs() const { return child(1); }

    /// Atom name without arguments. Only valid for Atom nodes.
    const std::string& name() const;
    const std::vector<std::string>& args() const;
    /// Flat proposition name: `name` or `name_arg1_arg2...`.
    std::string proposition() const;

    std::size_t depth() const;
    std::size_t size() const;
    /// Flat proposition names occurring in the formula, in first-occurrence order.
    std::vector<std::string> propositions() const;

    /// Concrete syntax accepted by parse_ltl, fully parenthesized where needed.
    std::string to_string() const;

    /// Address of the shared node; identical for structurally shared subterms.
    const void* identity() const noexcept { return node_.get(); }

    friend bool operator==(const LtlFormula& a, const LtlFormula& b);
    friend bool operator!=(const LtlFormula& a, const LtlFormula& b) { return !(a == b); }

private:
    struct Node;
    explicit LtlFormula(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
    static LtlFormula make(LtlOp op, std::vector<LtlFormula> children);

    std::shared_ptr<const Node> node_;
};

/// Universally quantified formula template, e.g. `forall x:human. G(human(x) -> !injured(x))`.
struct QuantifiedFormula {
    struct Variable {
        std::string name;
        std::string sort;
    };
    std::vector<Variable> variables;
    LtlFormula body = LtlFormula::truth();
};

using Domain = std::map<std::string, std::vector<std::string>>;

/// Ultimately periodic word prefix · cycle^ω.
struct Lasso {
    std::vector<Valuation> prefix;
    std::vector<Valuation> cycle;

    std::size_t length() const noexcept { return prefix.size() + cycle.size(); }
    /// Position following `i` in the unrolled representation.
    std::size_t successor(std::size_t i) const noexcept {
        return i + 1 < length() ? i + 1 : prefix.size();
    }
    const Valuation& at(std::size_t i) const {
        return i < prefix.size() ? prefix[i] : cycle[i - prefix.size()];
    }
};

/// Parses concrete LTL syntax and interns every proposition in `atoms`.
///
/// Grammar (tightest first): prefix `!`, `X`, `F`, `G`; infix `U` (right
/// associative); `&`; `|`; `->` (right associative). Atoms are identifiers,
/// optionally applied to identifier arguments (`talk(r)` becomes `talk_r`).
LtlFormula parse_ltl(std::string_view text, AtomTable& atoms);

/// Parses an optionally quantified template: `forall x:sort, y:sort. body`.
/// Arguments that are not bound variables are treated as constants.
QuantifiedFormula parse_quantified(std::string_view text);

/// Conjunction over every substitution of the bound variables by entities of
/// their sort. Parameterized atoms become flat propositions.
LtlFormula ground(const QuantifiedFormula& qf, const Domain& domain);

/// Replaces parameterized atoms by their flat proposition names.
LtlFormula flatten_atoms(const LtlFormula& f);

/// Negation normal form over {atom, !atom, &, |, X, U, G, F, true, false}.
///
/// Negated Until is rewritten with the weak-until identity
/// `!(a U b) == (!b U (!a & !b)) | G !b`, so Release never appears.
LtlFormula to_nnf(const LtlFormula& f);

bool is_nnf(const LtlFormula& f);

/// Exact LTL semantics on an ultimately periodic word. Every proposition of
/// `f` must be present in `atoms`.
bool evaluate_on_lasso(const LtlFormula& f, const Lasso& w, const AtomTable& atoms);

} // namespace normweaver
