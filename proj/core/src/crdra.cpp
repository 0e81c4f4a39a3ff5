#include "normweaver/crdra.hpp"

#include "normweaver/error.hpp"

#include <cmath>

namespace normweaver {

const char* to_string(NormAction a) { return a == NormAction::Keep ? "keep" : "susp"; }

Crdra::Crdra(Norm norm, Dra dra) : norm_(std::move(norm)), dra_(std::move(dra)) {
    if (!(norm_.weight > 0.0) || !std::isfinite(norm_.weight))
        throw InvalidArgument("norm '" + norm_.name + "' needs a positive weight");
}

Crdra build_crdra(const Norm& n, const Dra& d) { return Crdra(n, d); }

bool is_valid(const Crdra& c, const CrdraTransitionSeq& seq) {
    const CrdraStep* prev = nullptr;
    auto check = [&](const CrdraStep& s) {
        if (s.state >= c.num_states() || s.letter >= c.dra().num_letters()) return false;
        if (prev && c.step(prev->state, prev->letter, prev->action) != s.state) return false;
        prev = &s;
        return true;
    };
    for (const auto& s : seq.prefix)
        if (!check(s)) return false;
    for (const auto& s : seq.cycle)
        if (!check(s)) return false;
    if (!seq.cycle.empty()) {
        const auto& last = seq.cycle.back();
        if (c.step(last.state, last.letter, last.action) != seq.cycle.front().state) return false;
    }
    return true;
}

double violation_cost(const Crdra& c, const CrdraTransitionSeq& seq, double gamma) {
    if (!(gamma >= 0.0 && gamma < 1.0)) throw InvalidArgument("discount must lie in [0, 1)");
    if (!is_valid(c, seq)) throw InvalidArgument("transition sequence does not follow the CRDRA");
    double total = 0.0;
    for (std::size_t t = 0; t < seq.prefix.size(); ++t) {
        const auto& s = seq.prefix[t];
        total += std::pow(gamma, static_cast<double>(t)) * c.weight(s.state, s.letter, s.action);
    }
    if (!seq.cycle.empty()) {
        double loop = 0.0;
        for (std::size_t t = 0; t < seq.cycle.size(); ++t) {
            const auto& s = seq.cycle[t];
            loop += std::pow(gamma, static_cast<double>(t)) * c.weight(s.state, s.letter, s.action);
        }
        const auto period = static_cast<double>(seq.cycle.size());
        total += std::pow(gamma, static_cast<double>(seq.prefix.size())) * loop / (1.0 - std::pow(gamma, period));
    }
    return total;
}

} // namespace normweaver
