#include "normweaver/conflict_product.hpp"

#include "normweaver/error.hpp"

#include <sstream>

namespace normweaver {

namespace {
constexpr StateId kUnset = std::numeric_limits<StateId>::max();
constexpr std::uint64_t kDenseLimit = 50'000'000;
} // namespace

ConflictProduct::ConflictProduct(std::shared_ptr<const LabeledMdp> m, std::vector<Crdra> crdras,
                                 const ConflictProductOptions& opts)
    : env_(std::move(m)), crdras_(std::move(crdras)) {
    const auto n = crdras_.size();
    if (n == 0) throw InvalidArgument("conflict product needs at least one norm");
    if (n > 16) throw InvalidArgument("conflict product supports at most 16 norms");
    const auto& env = *env_;
    const auto num_env = env.num_states();

    // δᵢ(q, L(s')) for every automaton state and environment state.
    next_.resize(n);
    std::uint64_t tuples = 1;
    for (std::size_t i = 0; i < n; ++i) {
        const auto& d = crdras_[i].dra();
        const auto letters = d.bind(env.atoms());
        next_[i].resize(d.num_states() * num_env);
        for (AutomatonState q = 0; q < d.num_states(); ++q)
            for (StateId s = 0; s < num_env; ++s) next_[i][q * num_env + s] = d.step(q, letters(env.label(s)));
        radix_.push_back(tuples);
        tuples *= d.num_states();
        total_weight_ += crdras_[i].weight();
    }
    dense_ = tuples * num_env <= kDenseLimit;
    if (dense_) dense_index_.assign(tuples * num_env, kUnset);

    auto intern = [&](StateId s, const std::vector<AutomatonState>& q) {
        const auto k = key(s, q);
        StateId* slot;
        if (dense_) {
            slot = &dense_index_[k];
        } else {
            slot = &sparse_index_.try_emplace(k, kUnset).first->second;
        }
        if (*slot == kUnset) {
            if (env_states_.size() >= opts.max_states)
                throw SizeGuardExceeded("conflict product exceeds " + std::to_string(opts.max_states) + " states");
            *slot = static_cast<StateId>(env_states_.size());
            env_states_.push_back(s);
            q_.insert(q_.end(), q.begin(), q.end());
        }
        return *slot;
    };

    std::vector<AutomatonState> q0(n);
    for (std::size_t i = 0; i < n; ++i) q0[i] = crdras_[i].initial();
    env_states_.push_back(kNoEnvState);
    q_.insert(q_.end(), q0.begin(), q0.end());

    const NormMask masks = NormMask{1} << n;
    std::vector<AutomatonState> q(n), q_next(n);
    std::vector<std::pair<StateId, double>> dist;

    auto emit = [&](ActionId action, NormMask mask, std::span<const StateId> succ, std::span<const double> probs) {
        dist.clear();
        for (std::size_t j = 0; j < succ.size(); ++j) {
            for (std::size_t i = 0; i < n; ++i) q_next[i] = next_automaton_state(i, q[i], succ[j], (mask >> i) & 1U);
            dist.emplace_back(intern(succ[j], q_next), probs[j]);
        }
        csr_.push_choice(dist);
        choice_action_.push_back(action);
        choice_mask_.push_back(mask);
        choice_weight_.push_back(mask_weight(mask));
    };

    // Bit i of the result: suspending norm i can change the successor somewhere.
    auto movable = [&](std::span<const StateId> succ) {
        NormMask out = 0;
        for (std::size_t i = 0; i < n; ++i)
            for (auto s : succ)
                if (next_automaton_state(i, q[i], s, false) != q[i]) {
                    out |= NormMask{1} << i;
                    break;
                }
        return out;
    };

    for (StateId x = 0; x < env_states_.size(); ++x) {
        for (std::size_t i = 0; i < n; ++i) q[i] = q_[static_cast<std::size_t>(x) * n + i];
        if (x == kDummy) {
            const StateId s0 = env.initial();
            const double one = 1.0;
            const std::span<const StateId> succ(&s0, 1);
            const NormMask useful = opts.prune_dominated ? movable(succ) : masks - 1;
            for (NormMask mask = 0; mask < masks; ++mask) {
                if (mask & ~useful) {
                    ++pruned_;
                    continue;
                }
                emit(kDummyAction, mask, succ, std::span<const double>(&one, 1));
            }
        } else {
            const auto& ecsr = env.csr();
            const StateId s = env_states_[x];
            for (ChoiceId c = ecsr.first_choice(s); c < ecsr.end_choice(s); ++c) {
                auto succ = ecsr.successors(c);
                const NormMask useful = opts.prune_dominated ? movable(succ) : masks - 1;
                for (NormMask mask = 0; mask < masks; ++mask) {
                    if (mask & ~useful) {
                        ++pruned_;
                        continue;
                    }
                    emit(env.choice_action(c), mask, succ, ecsr.probabilities(c));
                }
            }
        }
        csr_.close_state();
    }
}

double ConflictProduct::mask_weight(NormMask mask) const {
    double w = 0.0;
    for (std::size_t i = 0; i < crdras_.size(); ++i)
        if ((mask >> i) & 1U) w += crdras_[i].weight();
    return w;
}

std::uint64_t ConflictProduct::key(StateId s, std::span<const AutomatonState> q) const {
    std::uint64_t k = 0;
    for (std::size_t i = 0; i < q.size(); ++i) k += radix_[i] * q[i];
    return static_cast<std::uint64_t>(s) * (radix_.back() * crdras_.back().num_states()) + k;
}

std::optional<StateId> ConflictProduct::find(StateId s, std::span<const AutomatonState> q) const {
    if (s >= env_->num_states() || q.size() != num_norms()) return std::nullopt;
    for (std::size_t i = 0; i < q.size(); ++i)
        if (q[i] >= crdras_[i].num_states()) return std::nullopt;
    const auto k = key(s, q);
    if (dense_) {
        const auto x = dense_index_[k];
        if (x == kUnset) return std::nullopt;
        return x;
    }
    auto it = sparse_index_.find(k);
    if (it == sparse_index_.end()) return std::nullopt;
    return it->second;
}

std::vector<std::vector<StatePair>> ConflictProduct::lifted_conditions() const {
    std::vector<std::vector<StatePair>> out(num_norms());
    for (std::size_t i = 0; i < num_norms(); ++i) {
        for (const auto& pair : crdras_[i].dra().pairs()) {
            StatePair sp{std::vector<char>(num_states(), 0), std::vector<char>(num_states(), 0)};
            for (StateId x = 1; x < num_states(); ++x) {
                const auto q = automaton_states(x)[i];
                sp.fin[x] = pair.in_fin(q);
                sp.inf[x] = pair.in_inf(q);
            }
            out[i].push_back(std::move(sp));
        }
    }
    return out;
}

std::string ConflictProduct::describe(StateId x) const {
    if (x == kDummy) return "dummy";
    std::ostringstream os;
    os << env_->state_name(env_states_[x]) << " |";
    for (auto q : automaton_states(x)) os << " " << q;
    return os.str();
}

} // namespace normweaver
