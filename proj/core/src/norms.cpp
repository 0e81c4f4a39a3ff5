#include "normweaver/crdra.hpp"
#include "normweaver/error.hpp"

#include <cctype>
#include <charconv>
#include <sstream>

namespace normweaver {

Dra compile_norm(const Norm& n) {
    try {
        return ltl_to_dra(to_nnf(n.formula));
    } catch (const UnsupportedFragment& e) {
        throw UnsupportedFragment(e.subformula(), "norm " + n.name + ": supply an automaton in HOA format instead");
    }
}

namespace {

std::string trim(std::string_view s) {
    std::size_t a = 0;
    std::size_t b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return std::string(s.substr(a, b - a));
}

std::vector<std::string> split_ws(const std::string& s) {
    std::istringstream is(s);
    std::vector<std::string> out;
    for (std::string w; is >> w;) out.push_back(w);
    return out;
}

} // namespace

NormFile parse_norm_file(std::string_view text, const Domain& defaults) {
    NormFile out;
    out.domain = defaults;
    struct Pending {
        std::string name;
        double weight;
        std::string formula;
        std::size_t line;
    };
    std::vector<Pending> pending;

    std::size_t line_no = 0;
    std::istringstream in{std::string(text)};
    for (std::string raw; std::getline(in, raw);) {
        ++line_no;
        auto line = trim(raw);
        if (line.empty() || line[0] == '#') continue;

        if (line.rfind("domain", 0) == 0 && line.size() > 6 && std::isspace(static_cast<unsigned char>(line[6]))) {
            auto eq = line.find('=');
            if (eq == std::string::npos) throw ParseError("domain declaration needs '='", line_no, 0);
            auto sort = trim(std::string_view(line).substr(6, eq - 6));
            if (!AtomTable::is_identifier(sort)) throw ParseError("invalid sort name '" + sort + "'", line_no, 0);
            std::vector<std::string> entities;
            std::istringstream list(line.substr(eq + 1));
            for (std::string e; std::getline(list, e, ',');) {
                e = trim(e);
                if (!AtomTable::is_identifier(e)) throw ParseError("invalid entity name '" + e + "'", line_no, 0);
                entities.push_back(e);
            }
            out.domain[sort] = std::move(entities);
            continue;
        }

        auto sep = line.find("::");
        if (sep == std::string::npos) throw ParseError("expected '<weight> :: <formula>'", line_no, 0);
        auto head = split_ws(line.substr(0, sep));
        if (head.empty() || head.size() > 2) throw ParseError("expected '[name] <weight>' before '::'", line_no, 0);
        const auto& wtext = head.back();
        double w = 0.0;
        auto [ptr, ec] = std::from_chars(wtext.data(), wtext.data() + wtext.size(), w);
        if (ec != std::errc() || ptr != wtext.data() + wtext.size())
            throw ParseError("invalid weight '" + wtext + "'", line_no, 0);
        if (!(w > 0.0)) throw ParseError("weight must be positive", line_no, 0);
        std::string name = head.size() == 2 ? head[0] : "N" + std::to_string(pending.size() + 1);
        pending.push_back({name, w, trim(std::string_view(line).substr(sep + 2)), line_no});
    }

    for (const auto& p : pending) {
        try {
            auto qf = parse_quantified(p.formula);
            out.norms.push_back({p.name, p.weight, ground(qf, out.domain)});
        } catch (const ParseError& e) {
            throw ParseError(std::string("norm ") + p.name + ": " + e.what(), p.line, 0);
        }
    }
    return out;
}

} // namespace normweaver
