#include "normweaver/plan_io.hpp"

#include "normweaver/error.hpp"

#include <json.hpp>

#include <cstdio>
#include <istream>
#include <ostream>

namespace normweaver {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
    std::uint64_t h = seed;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

namespace {

json config_json(const PlannerConfig& c) {
    return {{"gamma", c.gamma},
            {"tolerance", c.tolerance},
            {"tie_tolerance", c.tie_tolerance},
            {"epsilon", c.epsilon},
            {"meta_amec", c.meta_amec},
            {"max_sweeps", c.max_sweeps},
            {"max_states", c.max_states},
            {"prune_dominated", c.prune_dominated},
            {"lookahead_t_plus_one", c.lookahead_t_plus_one}};
}

PlannerConfig config_from(const json& j) {
    PlannerConfig c;
    c.gamma = j.at("gamma").get<double>();
    c.tolerance = j.at("tolerance").get<double>();
    c.tie_tolerance = j.at("tie_tolerance").get<double>();
    c.epsilon = j.at("epsilon").get<double>();
    c.meta_amec = j.at("meta_amec").get<bool>();
    c.max_sweeps = j.at("max_sweeps").get<std::size_t>();
    c.max_states = j.at("max_states").get<std::size_t>();
    c.prune_dominated = j.at("prune_dominated").get<bool>();
    c.lookahead_t_plus_one = j.at("lookahead_t_plus_one").get<bool>();
    return c;
}

json stats_json(const PlanStats& s) {
    return {{"env_states", s.env_states},
            {"product_states", s.product_states},
            {"product_choices", s.product_choices},
            {"pruned_choices", s.pruned_choices},
            {"product_actions", s.product_actions},
            {"amecs", s.amecs},
            {"meta_components", s.meta_components},
            {"fallback_states", s.fallback_states},
            {"no_update_states", s.no_update_states},
            {"amec_sweeps", s.amec_sweeps},
            {"global_sweeps", s.global_sweeps},
            {"global_residual", s.global_residual},
            {"seconds_product", s.seconds_product},
            {"seconds_mec", s.seconds_mec},
            {"seconds_amec_vi", s.seconds_amec_vi},
            {"seconds_global_vi", s.seconds_global_vi},
            {"seconds_total", s.seconds_total}};
}

PlanStats stats_from(const json& j) {
    PlanStats s;
    s.env_states = j.at("env_states").get<std::size_t>();
    s.product_states = j.at("product_states").get<std::size_t>();
    s.product_choices = j.at("product_choices").get<std::size_t>();
    s.pruned_choices = j.at("pruned_choices").get<std::size_t>();
    s.product_actions = j.at("product_actions").get<std::size_t>();
    s.amecs = j.at("amecs").get<std::size_t>();
    s.meta_components = j.at("meta_components").get<std::size_t>();
    s.fallback_states = j.at("fallback_states").get<std::size_t>();
    s.no_update_states = j.at("no_update_states").get<std::size_t>();
    s.amec_sweeps = j.at("amec_sweeps").get<std::size_t>();
    s.global_sweeps = j.at("global_sweeps").get<std::size_t>();
    s.global_residual = j.at("global_residual").get<double>();
    s.seconds_product = j.at("seconds_product").get<double>();
    s.seconds_mec = j.at("seconds_mec").get<double>();
    s.seconds_amec_vi = j.at("seconds_amec_vi").get<double>();
    s.seconds_global_vi = j.at("seconds_global_vi").get<double>();
    s.seconds_total = j.at("seconds_total").get<double>();
    return s;
}

std::string hex(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

template <class T>
std::vector<T> sized(const json& j, const char* key, std::size_t n) {
    auto v = j.at(key).get<std::vector<T>>();
    if (v.size() != n) throw PlanMismatch(std::string("plan field '") + key + "' has the wrong length");
    return v;
}

void check_choices(const std::vector<std::vector<ChoiceId>>& v, const ConflictProduct& p) {
    for (StateId s = 0; s < v.size(); ++s)
        for (auto c : v[s])
            if (c < p.csr().first_choice(s) || c >= p.csr().end_choice(s))
                throw PlanMismatch("plan refers to a choice outside its state");
}

} // namespace

std::string input_hash(const LabeledMdp& m, const std::vector<Norm>& norms, const PlannerConfig& cfg) {
    std::uint64_t h = fnv1a(mdp_to_json(m));
    for (const auto& n : norms) {
        json j{{"name", n.name}, {"weight", n.weight}, {"formula", n.formula.to_string()}};
        h = fnv1a(j.dump(), h);
    }
    h = fnv1a(config_json(cfg).dump(), h);
    return hex(h);
}

void save_plan(std::ostream& os, const AmalgamatedPolicy& policy, const std::string& hash) {
    const auto& p = *policy.product;
    json comps = json::array();
    for (const auto& ec : policy.amec.amecs) comps.push_back({{"states", ec.states}, {"choices", ec.choices}});
    std::vector<int> modes;
    modes.reserve(policy.interior.mode.size());
    for (auto m : policy.interior.mode) modes.push_back(static_cast<int>(m));

    json doc{{"format", "normweaver-plan"},
             {"version", kPlanFormatVersion},
             {"hash", hash},
             {"config", config_json(policy.config)},
             {"stats", stats_json(policy.stats)},
             {"states", p.num_states()},
             {"choices", p.num_choices()},
             {"viol", policy.viol},
             {"no_update", policy.no_update},
             {"restriction", policy.restriction},
             {"follow_interior", policy.follow_interior},
             {"amec",
              {{"components", comps},
               {"amec_of", policy.amec.amec_of},
               {"value", policy.amec.value},
               {"optimal", policy.amec.optimal},
               {"sweeps", policy.amec.sweeps}}},
             {"interior",
              {{"mode", modes},
               {"choices", policy.interior.choices},
               {"best", policy.interior.best},
               {"meta_components", policy.interior.meta_components},
               {"fallback_states", policy.interior.fallback_states}}}};
    os << doc.dump() << '\n';
}

namespace {

json parse_doc(std::istream& is) {
    json doc;
    try {
        doc = json::parse(is);
    } catch (const json::parse_error& e) {
        throw ParseError(std::string("plan artifact: ") + e.what(), 0, e.byte);
    }
    if (!doc.is_object() || doc.value("format", "") != "normweaver-plan")
        throw ParseError("not a normweaver plan artifact", 0, 0);
    if (doc.value("version", 0) != kPlanFormatVersion)
        throw PlanMismatch("unsupported plan format version " + std::to_string(doc.value("version", 0)));
    return doc;
}

} // namespace

PlanHeader read_plan_header(std::istream& is) {
    const auto doc = parse_doc(is);
    try {
        return {doc.at("version").get<int>(), doc.at("hash").get<std::string>(), config_from(doc.at("config"))};
    } catch (const json::exception& e) {
        throw ParseError(std::string("plan artifact: ") + e.what(), 0, 0);
    }
}

AmalgamatedPolicy load_plan(std::istream& is, std::shared_ptr<const ConflictProduct> product,
                            const std::string& expected_hash) {
    const auto doc = parse_doc(is);
    const auto& p = *product;
    const std::size_t n = p.num_states();
    AmalgamatedPolicy out;
    try {
        const auto hash = doc.at("hash").get<std::string>();
        if (hash != expected_hash)
            throw PlanMismatch("plan was built for inputs " + hash + ", current inputs hash to " + expected_hash);
        if (doc.at("states").get<std::size_t>() != n || doc.at("choices").get<std::size_t>() != p.num_choices())
            throw PlanMismatch("plan product size differs from the rebuilt product");
        out.config = config_from(doc.at("config"));
        out.stats = stats_from(doc.at("stats"));
        out.viol = sized<double>(doc, "viol", n);
        out.no_update = sized<char>(doc, "no_update", n);
        out.restriction = sized<std::vector<ChoiceId>>(doc, "restriction", n);
        out.follow_interior = sized<char>(doc, "follow_interior", n);

        const auto& a = doc.at("amec");
        for (const auto& c : a.at("components")) {
            EndComponent ec;
            ec.states = c.at("states").get<std::vector<StateId>>();
            ec.choices = c.at("choices").get<std::vector<std::vector<ChoiceId>>>();
            if (ec.choices.size() != ec.states.size()) throw PlanMismatch("malformed end component in plan");
            for (auto s : ec.states)
                if (s >= n) throw PlanMismatch("end component state out of range");
            out.amec.amecs.push_back(std::move(ec));
        }
        out.amec.amec_of = sized<std::int32_t>(a, "amec_of", n);
        out.amec.value = sized<double>(a, "value", n);
        out.amec.optimal = sized<std::vector<ChoiceId>>(a, "optimal", n);
        out.amec.sweeps = a.at("sweeps").get<std::size_t>();

        const auto& in = doc.at("interior");
        for (int m : sized<int>(in, "mode", n)) {
            if (m < 0 || m > 2) throw PlanMismatch("unknown interior mode in plan");
            out.interior.mode.push_back(static_cast<InteriorMode>(m));
        }
        out.interior.choices = sized<std::vector<ChoiceId>>(in, "choices", n);
        out.interior.best = sized<ChoiceId>(in, "best", n);
        out.interior.meta_components = in.at("meta_components").get<std::size_t>();
        out.interior.fallback_states = in.at("fallback_states").get<std::size_t>();
    } catch (const json::exception& e) {
        throw ParseError(std::string("plan artifact: ") + e.what(), 0, 0);
    }
    check_choices(out.restriction, p);
    check_choices(out.interior.choices, p);
    check_choices(out.amec.optimal, p);
    out.product = std::move(product);
    return out;
}

} // namespace normweaver
