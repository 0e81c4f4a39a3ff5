#pragma once

#include "normweaver/planner.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>

namespace normweaver {

inline constexpr int kPlanFormatVersion = 1;

/// 64-bit FNV-1a.
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

/// Hash of everything a plan depends on: the model, the norms and the planner settings
/// that change the computed values (timing and thread count excluded).
std::string input_hash(const LabeledMdp& m, const std::vector<Norm>& norms, const PlannerConfig& cfg);

/// Writes the plan as JSON: Viol*, A*, AMEC membership and interior policy, noUpdate, config, stats.
void save_plan(std::ostream& os, const AmalgamatedPolicy& policy, const std::string& hash);

/// Restores a policy over an already-built product. Throws PlanMismatch when
/// `expected_hash` differs from the stored one or the shapes disagree, ParseError on malformed input.
AmalgamatedPolicy load_plan(std::istream& is, std::shared_ptr<const ConflictProduct> product,
                            const std::string& expected_hash);

/// Reads only the stored hash and config.
struct PlanHeader {
    int version = 0;
    std::string hash;
    PlannerConfig config;
};
PlanHeader read_plan_header(std::istream& is);

} // namespace normweaver
