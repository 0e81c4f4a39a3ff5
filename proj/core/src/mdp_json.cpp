#include "normweaver/error.hpp"
#include "normweaver/mdp.hpp"

#include <json.hpp>

#include <map>

namespace normweaver {

using nlohmann::json;

namespace {

std::uint32_t resolve(const json& ref, const std::map<std::string, std::uint32_t>& names, std::size_t count,
                      const char* what) {
    if (ref.is_number_unsigned() || ref.is_number_integer()) {
        const auto i = ref.get<long long>();
        if (i < 0 || static_cast<std::size_t>(i) >= count) throw ModelError(std::string(what) + " index out of range");
        return static_cast<std::uint32_t>(i);
    }
    if (ref.is_string()) {
        auto it = names.find(ref.get<std::string>());
        if (it == names.end()) throw ModelError(std::string("unknown ") + what + " '" + ref.get<std::string>() + "'");
        return it->second;
    }
    throw ModelError(std::string(what) + " reference must be a name or an index");
}

Valuation label_of(const json& atoms_list, const AtomTable& atoms) {
    Valuation v;
    for (const auto& a : atoms_list) {
        auto found = atoms.find(a.get<std::string>());
        if (!found) throw AtomMismatch("label uses undeclared atom '" + a.get<std::string>() + "'");
        v.insert(*found);
    }
    return v;
}

} // namespace

LabeledMdp mdp_from_json(const std::string& text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what(), 0, e.byte);
    }
    try {
        AtomTable atoms;
        for (const auto& a : doc.value("atoms", json::array())) atoms.intern(a.get<std::string>());
        MdpBuilder b(atoms);

        std::map<std::string, std::uint32_t> action_ids;
        for (const auto& a : doc.at("actions")) action_ids[a.get<std::string>()] = b.add_action(a.get<std::string>());

        const auto& states = doc.at("states");
        std::vector<std::string> names;
        if (states.is_number_unsigned()) {
            for (std::size_t i = 0; i < states.get<std::size_t>(); ++i) names.push_back("s" + std::to_string(i));
        } else {
            for (const auto& s : states) names.push_back(s.get<std::string>());
        }
        std::map<std::string, std::uint32_t> state_ids;
        for (std::uint32_t i = 0; i < names.size(); ++i) state_ids[names[i]] = i;

        const json labels = doc.value("labels", json::array());
        for (std::uint32_t i = 0; i < names.size(); ++i) {
            Valuation v;
            if (labels.is_array() && i < labels.size()) v = label_of(labels[i], b.atoms());
            if (labels.is_object() && labels.contains(names[i])) v = label_of(labels[names[i]], b.atoms());
            b.add_state(names[i], v);
        }
        if (labels.is_object())
            for (const auto& [k, _] : labels.items())
                if (!state_ids.count(k)) throw ModelError("label for unknown state '" + k + "'");

        b.set_initial(doc.contains("initial") ? resolve(doc["initial"], state_ids, names.size(), "state") : 0);

        for (const auto& t : doc.at("transitions")) {
            const auto from = resolve(t.at("from"), state_ids, names.size(), "state");
            const auto action = resolve(t.at("action"), action_ids, action_ids.size(), "action");
            const auto& to = t.at("to");
            b.declare_available(from, action);
            if (to.is_object()) {
                for (const auto& [k, p] : to.items())
                    b.add_transition(from, action, resolve(json(k), state_ids, names.size(), "state"), p.get<double>());
            } else {
                for (const auto& e : to)
                    b.add_transition(from, action, resolve(e.at(0), state_ids, names.size(), "state"), e.at(1).get<double>());
            }
        }
        return b.build();
    } catch (const json::exception& e) {
        throw ModelError(std::string("malformed MDP document: ") + e.what());
    }
}

std::string mdp_to_json(const LabeledMdp& m) {
    json doc;
    doc["atoms"] = m.atoms().names();
    doc["actions"] = m.action_names();
    json states = json::array();
    json labels = json::array();
    for (StateId s = 0; s < m.num_states(); ++s) {
        states.push_back(m.state_name(s));
        json l = json::array();
        for (std::size_t a = 0; a < m.atoms().size(); ++a)
            if (m.label(s).contains(a)) l.push_back(m.atoms().name(a));
        labels.push_back(std::move(l));
    }
    doc["states"] = std::move(states);
    doc["labels"] = std::move(labels);
    doc["initial"] = m.state_name(m.initial());
    json transitions = json::array();
    const auto& csr = m.csr();
    for (StateId s = 0; s < m.num_states(); ++s) {
        for (ChoiceId c = csr.first_choice(s); c < csr.end_choice(s); ++c) {
            json to = json::array();
            auto succ = csr.successors(c);
            auto probs = csr.probabilities(c);
            for (std::size_t i = 0; i < succ.size(); ++i) to.push_back(json::array({succ[i], probs[i]}));
            transitions.push_back({{"from", s}, {"action", m.choice_action(c)}, {"to", std::move(to)}});
        }
    }
    doc["transitions"] = std::move(transitions);
    return doc.dump(1);
}

} // namespace normweaver
