#include "normweaver/automata.hpp"
#include "normweaver/error.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <memory>
#include <optional>
#include <sstream>

namespace normweaver {
namespace {

enum class T { End, Header, Ident, String, Int, Alias, LParen, RParen, LBracket, RBracket, LBrace, RBrace, Not, And, Or, Body, EndBody };

struct Tok {
    T kind;
    std::string text;
    std::size_t line;
};

std::vector<Tok> lex(std::string_view s) {
    std::vector<Tok> out;
    std::size_t i = 0;
    std::size_t line = 1;
    auto ident_char = [](char c) { return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '-'; };
    while (true) {
        while (i < s.size()) {
            if (s[i] == '\n') {
                ++line;
                ++i;
            } else if (std::isspace(static_cast<unsigned char>(s[i]))) {
                ++i;
            } else if (s.compare(i, 2, "/*") == 0) {
                auto end = s.find("*/", i + 2);
                if (end == std::string_view::npos) throw ParseError("unterminated comment", line, 0);
                line += static_cast<std::size_t>(std::count(s.begin() + i, s.begin() + end, '\n'));
                i = end + 2;
            } else {
                break;
            }
        }
        if (i >= s.size()) {
            out.push_back({T::End, "", line});
            return out;
        }
        const char c = s[i];
        if (s.compare(i, 8, "--BODY--") == 0) {
            out.push_back({T::Body, "--BODY--", line});
            i += 8;
        } else if (s.compare(i, 7, "--END--") == 0) {
            out.push_back({T::EndBody, "--END--", line});
            i += 7;
        } else if (c == '"') {
            std::string text;
            ++i;
            while (i < s.size() && s[i] != '"') {
                if (s[i] == '\\' && i + 1 < s.size()) ++i;
                if (s[i] == '\n') ++line;
                text += s[i++];
            }
            if (i >= s.size()) throw ParseError("unterminated string", line, 0);
            ++i;
            out.push_back({T::String, std::move(text), line});
        } else if (std::isdigit(static_cast<unsigned char>(c))) {
            std::size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            out.push_back({T::Int, std::string(s.substr(i, j - i)), line});
            i = j;
        } else if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
            std::size_t j = i;
            while (j < s.size() && ident_char(s[j])) ++j;
            std::string text(s.substr(i, j - i));
            if (j < s.size() && s[j] == ':') {
                out.push_back({T::Header, std::move(text), line});
                ++j;
            } else {
                out.push_back({T::Ident, std::move(text), line});
            }
            i = j;
        } else if (c == '@') {
            std::size_t j = i + 1;
            while (j < s.size() && ident_char(s[j])) ++j;
            out.push_back({T::Alias, std::string(s.substr(i, j - i)), line});
            i = j;
        } else {
            T kind;
            switch (c) {
            case '(': kind = T::LParen; break;
            case ')': kind = T::RParen; break;
            case '[': kind = T::LBracket; break;
            case ']': kind = T::RBracket; break;
            case '{': kind = T::LBrace; break;
            case '}': kind = T::RBrace; break;
            case '!': kind = T::Not; break;
            case '&': kind = T::And; break;
            case '|': kind = T::Or; break;
            default: throw ParseError(std::string("unexpected character '") + c + "'", line, 0);
            }
            out.push_back({kind, std::string(1, c), line});
            ++i;
        }
    }
}

// Label expression: evaluated against a letter over the AP list.
struct Label {
    enum Kind { True, False, Ap, Not, And, Or } kind;
    int ap = -1;
    std::shared_ptr<const Label> a = nullptr;
    std::shared_ptr<const Label> b = nullptr;

    bool eval(Letter l) const {
        switch (kind) {
        case True: return true;
        case False: return false;
        case Ap: return (l >> ap) & 1U;
        case Not: return !a->eval(l);
        case And: return a->eval(l) && b->eval(l);
        case Or: return a->eval(l) || b->eval(l);
        }
        return false;
    }
};
using LabelPtr = std::shared_ptr<const Label>;

// Acceptance condition as a tree over Fin/Inf atoms.
struct Acc {
    enum Kind { True, False, Fin, Inf, And, Or } kind;
    int set = -1;
    std::shared_ptr<const Acc> a = nullptr;
    std::shared_ptr<const Acc> b = nullptr;
};
using AccPtr = std::shared_ptr<const Acc>;

struct AccClause {
    std::vector<int> fin, inf;
};

std::vector<AccClause> acc_dnf(const AccPtr& acc) {
    switch (acc->kind) {
    case Acc::True: return {AccClause{}};
    case Acc::False: return {};
    case Acc::Fin: return {AccClause{{acc->set}, {}}};
    case Acc::Inf: return {AccClause{{}, {acc->set}}};
    case Acc::Or: {
        auto x = acc_dnf(acc->a);
        auto y = acc_dnf(acc->b);
        x.insert(x.end(), y.begin(), y.end());
        return x;
    }
    case Acc::And: {
        std::vector<AccClause> out;
        for (const auto& x : acc_dnf(acc->a))
            for (const auto& y : acc_dnf(acc->b)) {
                AccClause c = x;
                c.fin.insert(c.fin.end(), y.fin.begin(), y.fin.end());
                c.inf.insert(c.inf.end(), y.inf.begin(), y.inf.end());
                out.push_back(std::move(c));
            }
        return out;
    }
    }
    return {};
}

class HoaParser {
public:
    explicit HoaParser(std::vector<Tok> toks) : toks_(std::move(toks)) {}

    Dra parse() {
        header();
        body();
        return build();
    }

private:
    const Tok& peek() const { return toks_[k_]; }
    Tok take() { return toks_[k_++]; }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, peek().line, 0); }

    Tok expect(T kind, const char* what) {
        if (peek().kind != kind) fail(std::string("expected ") + what);
        return take();
    }

    long integer() {
        auto t = expect(T::Int, "integer");
        return std::stol(t.text);
    }

    void header() {
        if (peek().kind != T::Header || peek().text != "HOA") fail("document must start with 'HOA:'");
        take();
        auto version = expect(T::Ident, "format version");
        if (version.text != "v1") throw ParseError("unsupported format version '" + version.text + "'", version.line, 0);

        while (peek().kind == T::Header) {
            const auto h = take();
            if (h.text == "States") {
                num_states_ = integer();
            } else if (h.text == "Start") {
                if (start_) throw NonDeterministic("more than one initial state");
                start_ = integer();
                if (peek().kind == T::And) throw NonDeterministic("alternating initial condition");
            } else if (h.text == "AP") {
                const long n = integer();
                for (long i = 0; i < n; ++i) aps_.push_back(expect(T::String, "atomic proposition name").text);
            } else if (h.text == "Alias") {
                auto name = expect(T::Alias, "alias name").text;
                aliases_[name] = label_or();
            } else if (h.text == "Acceptance") {
                num_sets_ = integer();
                acceptance_ = acc_or();
            } else if (h.text == "acc-name") {
                auto name = expect(T::Ident, "acceptance name").text;
                static const std::vector<std::string> ok{"Rabin", "Buchi", "co-Buchi", "all", "none"};
                if (std::find(ok.begin(), ok.end(), name) == ok.end())
                    throw UnsupportedAcceptance("acceptance '" + name + "' is not deterministic Rabin");
                skip_header_values();
            } else {
                skip_header_values();
            }
        }
        expect(T::Body, "'--BODY--'");
        if (num_states_ < 0) throw ParseError("missing 'States:' header", peek().line, 0);
        if (!start_) throw ParseError("missing 'Start:' header", peek().line, 0);
        if (!acceptance_) throw ParseError("missing 'Acceptance:' header", peek().line, 0);
        if (*start_ >= num_states_) throw ParseError("initial state out of range", peek().line, 0);
        if (aps_.size() > Dra::kMaxPropositions) throw UnsupportedAcceptance("too many atomic propositions");
        delta_.assign(static_cast<std::size_t>(num_states_) << aps_.size(), kUnset);
        marks_.resize(static_cast<std::size_t>(num_states_));
        names_.resize(static_cast<std::size_t>(num_states_));
    }

    void skip_header_values() {
        while (peek().kind != T::Header && peek().kind != T::Body && peek().kind != T::End) take();
    }

    AccPtr acc_or() {
        auto lhs = acc_and();
        while (peek().kind == T::Or) {
            take();
            lhs = std::make_shared<Acc>(Acc{Acc::Or, -1, lhs, acc_and()});
        }
        return lhs;
    }

    AccPtr acc_and() {
        auto lhs = acc_atom();
        while (peek().kind == T::And) {
            take();
            lhs = std::make_shared<Acc>(Acc{Acc::And, -1, lhs, acc_atom()});
        }
        return lhs;
    }

    AccPtr acc_atom() {
        if (peek().kind == T::LParen) {
            take();
            auto inner = acc_or();
            expect(T::RParen, "')'");
            return inner;
        }
        auto t = expect(T::Ident, "acceptance condition");
        if (t.text == "t") return std::make_shared<Acc>(Acc{Acc::True});
        if (t.text == "f") return std::make_shared<Acc>(Acc{Acc::False});
        if (t.text != "Fin" && t.text != "Inf") throw ParseError("unexpected '" + t.text + "' in acceptance", t.line, 0);
        expect(T::LParen, "'('");
        if (peek().kind == T::Not) throw UnsupportedAcceptance("complemented acceptance sets");
        const int set = static_cast<int>(integer());
        if (set >= num_sets_) throw ParseError("acceptance set out of range", t.line, 0);
        expect(T::RParen, "')'");
        return std::make_shared<Acc>(Acc{t.text == "Fin" ? Acc::Fin : Acc::Inf, set});
    }

    LabelPtr label_or() {
        auto lhs = label_and();
        while (peek().kind == T::Or) {
            take();
            lhs = std::make_shared<Label>(Label{Label::Or, -1, lhs, label_and()});
        }
        return lhs;
    }

    LabelPtr label_and() {
        auto lhs = label_not();
        while (peek().kind == T::And) {
            take();
            lhs = std::make_shared<Label>(Label{Label::And, -1, lhs, label_not()});
        }
        return lhs;
    }

    LabelPtr label_not() {
        if (peek().kind == T::Not) {
            take();
            return std::make_shared<Label>(Label{Label::Not, -1, label_not()});
        }
        const auto t = peek();
        switch (t.kind) {
        case T::LParen: {
            take();
            auto inner = label_or();
            expect(T::RParen, "')'");
            return inner;
        }
        case T::Int: {
            const long ap = integer();
            if (ap < 0 || static_cast<std::size_t>(ap) >= aps_.size())
                throw ParseError("atomic proposition index out of range", t.line, 0);
            return std::make_shared<Label>(Label{Label::Ap, static_cast<int>(ap)});
        }
        case T::Alias: {
            take();
            auto it = aliases_.find(t.text);
            if (it == aliases_.end()) throw ParseError("unknown alias " + t.text, t.line, 0);
            return it->second;
        }
        case T::Ident:
            take();
            if (t.text == "t") return std::make_shared<Label>(Label{Label::True});
            if (t.text == "f") return std::make_shared<Label>(Label{Label::False});
            throw ParseError("unexpected '" + t.text + "' in label", t.line, 0);
        default: fail("expected label expression");
        }
    }

    std::vector<int> acc_sets() {
        std::vector<int> out;
        if (peek().kind != T::LBrace) return out;
        take();
        while (peek().kind == T::Int) {
            const auto line = peek().line;
            const long v = integer();
            if (v >= num_sets_) throw ParseError("acceptance set out of range", line, 0);
            out.push_back(static_cast<int>(v));
        }
        expect(T::RBrace, "'}'");
        return out;
    }

    void body() {
        while (peek().kind == T::Header && peek().text == "State") {
            const auto st = take();
            if (peek().kind == T::LBracket) throw ParseError("state labels are not supported", st.line, 0);
            const long q = integer();
            if (q < 0 || q >= num_states_) throw ParseError("state out of range", st.line, 0);
            if (peek().kind == T::String) names_[q] = take().text;
            marks_[q] = acc_sets();
            while (peek().kind == T::LBracket) {
                const auto line = take().line;
                auto label = label_or();
                expect(T::RBracket, "']'");
                const long target = integer();
                if (target < 0 || target >= num_states_) throw ParseError("edge target out of range", line, 0);
                if (peek().kind == T::And) throw NonDeterministic("alternating transition at line " + std::to_string(line));
                if (!acc_sets().empty()) throw UnsupportedAcceptance("transition-based acceptance marks");
                for (Letter l = 0; l < (Letter{1} << aps_.size()); ++l) {
                    if (!label->eval(l)) continue;
                    auto& slot = delta_[(static_cast<std::size_t>(q) << aps_.size()) | l];
                    if (slot != kUnset && slot != static_cast<AutomatonState>(target))
                        throw NonDeterministic("overlapping transitions from state " + std::to_string(q) + " at line " +
                                               std::to_string(line));
                    slot = static_cast<AutomatonState>(target);
                }
            }
            if (peek().kind == T::Int) throw ParseError("implicit edge labels are not supported", peek().line, 0);
        }
        expect(T::EndBody, "'--END--' or 'State:'");
    }

    Dra build() {
        auto n = static_cast<AutomatonState>(num_states_);
        const bool incomplete = std::find(delta_.begin(), delta_.end(), kUnset) != delta_.end();
        if (incomplete) {
            const AutomatonState sink = n++;
            delta_.resize(static_cast<std::size_t>(n) << aps_.size(), sink);
            for (auto& t : delta_)
                if (t == kUnset) t = sink;
            names_.push_back("sink");
            marks_.emplace_back();
        }

        std::vector<RabinPair> pairs;
        for (const auto& clause : acc_dnf(acceptance_)) {
            if (clause.fin.size() > 1 || clause.inf.size() > 1)
                throw UnsupportedAcceptance("acceptance is not a disjunction of Fin & Inf pairs");
            RabinPair p;
            for (AutomatonState q = 0; q < n; ++q) {
                const auto& m = marks_[q];
                auto has = [&](int set) { return std::find(m.begin(), m.end(), set) != m.end(); };
                // Runs that leave the declared edges are rejecting.
                const bool sink = incomplete && q + 1 == n;
                if (sink || (!clause.fin.empty() && has(clause.fin[0]))) p.fin.push_back(q);
                if (!sink && (clause.inf.empty() || has(clause.inf[0]))) p.inf.push_back(q);
            }
            pairs.push_back(std::move(p));
        }
        if (pairs.empty()) pairs.push_back(RabinPair{});

        for (AutomatonState q = 0; q < static_cast<AutomatonState>(num_states_); ++q)
            if (names_[q].empty()) names_[q] = "q" + std::to_string(q);
        for (const auto& ap : aps_)
            if (!AtomTable::is_identifier(ap)) throw InvalidArgument("atomic proposition '" + ap + "' is not an identifier");
        return Dra(aps_, n, static_cast<AutomatonState>(*start_), std::move(delta_), std::move(pairs), std::move(names_));
    }

    static constexpr AutomatonState kUnset = ~AutomatonState{0};

    std::vector<Tok> toks_;
    std::size_t k_ = 0;
    long num_states_ = -1;
    std::optional<long> start_;
    std::vector<std::string> aps_;
    std::map<std::string, LabelPtr> aliases_;
    long num_sets_ = 0;
    AccPtr acceptance_;
    std::vector<AutomatonState> delta_;
    std::vector<std::vector<int>> marks_;
    std::vector<std::string> names_;
};

std::string quote(const std::string& s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out += '\\';
        out += c;
    }
    return out + "\"";
}

std::string cube(Letter l, std::size_t k) {
    if (k == 0) return "t";
    std::string out;
    for (std::size_t i = 0; i < k; ++i) {
        if (i) out += "&";
        if (!((l >> i) & 1U)) out += "!";
        out += std::to_string(i);
    }
    return out;
}

} // namespace

Dra import_hoa(std::string_view text) { return HoaParser(lex(text)).parse(); }

std::string export_hoa(const Dra& d, const std::string& name) {
    std::ostringstream os;
    const auto& props = d.propositions();
    const std::size_t m = d.pairs().size();
    os << "HOA: v1\n";
    if (!name.empty()) os << "name: " << quote(name) << "\n";
    os << "States: " << d.num_states() << "\n";
    os << "Start: " << d.initial() << "\n";
    os << "AP: " << props.size();
    for (const auto& p : props) os << " " << quote(p);
    os << "\n";
    os << "acc-name: Rabin " << m << "\n";
    os << "Acceptance: " << 2 * m;
    for (std::size_t i = 0; i < m; ++i) {
        os << (i ? " | " : " ");
        os << "(Fin(" << 2 * i << ") & Inf(" << 2 * i + 1 << "))";
    }
    os << "\n";
    os << "properties: trans-labels explicit-labels state-acc deterministic complete\n";
    os << "--BODY--\n";
    for (AutomatonState q = 0; q < d.num_states(); ++q) {
        os << "State: " << q << " " << quote(d.state_name(q));
        std::vector<std::size_t> sets;
        for (std::size_t i = 0; i < m; ++i) {
            if (d.pairs()[i].in_fin(q)) sets.push_back(2 * i);
            if (d.pairs()[i].in_inf(q)) sets.push_back(2 * i + 1);
        }
        if (!sets.empty()) {
            os << " {";
            for (std::size_t j = 0; j < sets.size(); ++j) os << (j ? " " : "") << sets[j];
            os << "}";
        }
        os << "\n";
        for (Letter l = 0; l < d.num_letters(); ++l) os << "[" << cube(l, props.size()) << "] " << d.step(q, l) << "\n";
    }
    os << "--END--\n";
    return os.str();
}

} // namespace normweaver
