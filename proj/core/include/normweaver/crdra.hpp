#pragma once

#include "normweaver/automata.hpp"
#include "normweaver/ltl.hpp"

#include <string>
#include <string_view>
#include <vector>

namespace normweaver {

struct Norm {
    std::string name;
    double weight = 1.0; // > 0
    LtlFormula formula = LtlFormula::truth();
};

enum class NormAction : std::uint8_t { Keep = 0, Susp = 1 };

const char* to_string(NormAction a);

/// Conflict-resolution DRA: the underlying DRA read over Σ × {keep, susp}.
/// keep follows δ at weight 0; susp stays put at weight w.
class Crdra {
public:
    Crdra(Norm norm, Dra dra);

    const Norm& norm() const noexcept { return norm_; }
    const Dra& dra() const noexcept { return dra_; }
    double weight() const noexcept { return norm_.weight; }
    std::size_t num_states() const noexcept { return dra_.num_states(); }
    AutomatonState initial() const noexcept { return dra_.initial(); }

    AutomatonState step(AutomatonState q, Letter l, NormAction a) const { return a == NormAction::Keep ? dra_.step(q, l) : q; }
    double weight(AutomatonState, Letter, NormAction a) const { return a == NormAction::Keep ? 0.0 : norm_.weight; }

private:
    Norm norm_;
    Dra dra_;
};

/// Throws InvalidArgument when the weight is not a positive finite number.
Crdra build_crdra(const Norm& n, const Dra& d);

/// One transition (q_t, (σ_t, ã_t)); σ_t is a letter of the underlying DRA.
struct CrdraStep {
    AutomatonState state;
    Letter letter;
    NormAction action;
};

/// prefix · cycle^ω. An empty cycle denotes a finite sequence.
struct CrdraTransitionSeq {
    std::vector<CrdraStep> prefix;
    std::vector<CrdraStep> cycle;
};

/// True when consecutive states follow δ^C (including the wrap of the cycle).
bool is_valid(const Crdra& c, const CrdraTransitionSeq& seq);

/// Σ_t γ^t W(q_t, σ_t, ã_t), in closed form for the cycle.
/// Throws InvalidArgument for γ ∉ [0,1) or an invalid sequence.
double violation_cost(const Crdra& c, const CrdraTransitionSeq& seq, double gamma);

/// Compiles a norm with the built-in translator.
Dra compile_norm(const Norm& n);

/// Norm file: one norm per line, `[name] <weight> :: <formula>`; `#` comments;
/// `domain <sort> = e1, e2, ...` declares entities used to ground quantified formulas.
/// Unnamed norms are called N1, N2, ... by position.
struct NormFile {
    std::vector<Norm> norms;
    Domain domain;
};
NormFile parse_norm_file(std::string_view text, const Domain& defaults = {});

} // namespace normweaver
