#include "normweaver/error.hpp"
#include "normweaver/ltl.hpp"

#include <cctype>

namespace normweaver {
namespace {

enum class Tok { End, Ident, LParen, RParen, Not, And, Or, Implies, Comma, Dot, Colon };

struct Token {
    Tok kind;
    std::string text;
    std::size_t pos; // 1-based byte offset
};

class Lexer {
public:
    explicit Lexer(std::string_view text) : text_(text) {}

    std::vector<Token> run() {
        std::vector<Token> out;
        while (true) {
            while (i_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[i_]))) ++i_;
            const std::size_t pos = i_ + 1;
            if (i_ >= text_.size()) {
                out.push_back({Tok::End, "", pos});
                return out;
            }
            const char c = text_[i_];
            if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
                std::size_t j = i_;
                while (j < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[j])) || text_[j] == '_')) ++j;
                out.push_back({Tok::Ident, std::string(text_.substr(i_, j - i_)), pos});
                i_ = j;
                continue;
            }
            switch (c) {
            case '(': out.push_back({Tok::LParen, "(", pos}); ++i_; continue;
            case ')': out.push_back({Tok::RParen, ")", pos}); ++i_; continue;
            case '!': out.push_back({Tok::Not, "!", pos}); ++i_; continue;
            case '&': out.push_back({Tok::And, "&", pos}); ++i_; continue;
            case '|': out.push_back({Tok::Or, "|", pos}); ++i_; continue;
            case ',': out.push_back({Tok::Comma, ",", pos}); ++i_; continue;
            case '.': out.push_back({Tok::Dot, ".", pos}); ++i_; continue;
            case ':': out.push_back({Tok::Colon, ":", pos}); ++i_; continue;
            case '-':
                if (i_ + 1 < text_.size() && text_[i_ + 1] == '>') {
                    out.push_back({Tok::Implies, "->", pos});
                    i_ += 2;
                    continue;
                }
                break;
            default: break;
            }
            throw UnknownCharacterError(std::string("unexpected character '") + c + "'", 0, pos);
        }
    }

private:
    std::string_view text_;
    std::size_t i_ = 0;
};

class Parser {
public:
    explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

    QuantifiedFormula quantified() {
        QuantifiedFormula qf;
        if (peek().kind == Tok::Ident && peek().text == "forall") {
            take();
            while (true) {
                auto var = expect(Tok::Ident, "variable name");
                expect(Tok::Colon, "':'");
                auto sort = expect(Tok::Ident, "sort name");
                qf.variables.push_back({var.text, sort.text});
                if (peek().kind == Tok::Comma) {
                    take();
                    continue;
                }
                expect(Tok::Dot, "'.' after quantifier prefix");
                break;
            }
        }
        qf.body = formula();
        finish();
        return qf;
    }

    LtlFormula formula() { return implication(); }

    void finish() {
        if (peek().kind != Tok::End) fail("unexpected '" + peek().text + "'");
    }

private:
    const Token& peek() const { return toks_[k_]; }
    Token take() { return toks_[k_++]; }

    [[noreturn]] void fail(const std::string& msg) const { throw ParseError(msg, 0, peek().pos); }

    Token expect(Tok kind, const std::string& what) {
        if (peek().kind != kind) fail("expected " + what);
        return take();
    }

    static bool keyword(const Token& t, const char* word) { return t.kind == Tok::Ident && t.text == word; }

    LtlFormula implication() {
        auto lhs = disjunction();
        if (peek().kind == Tok::Implies) {
            take();
            return LtlFormula::implication(lhs, implication());
        }
        return lhs;
    }

    LtlFormula disjunction() {
        auto lhs = conjunction();
        while (peek().kind == Tok::Or) {
            take();
            lhs = LtlFormula::disjunction(lhs, conjunction());
        }
        return lhs;
    }

    LtlFormula conjunction() {
        auto lhs = until();
        while (peek().kind == Tok::And) {
            take();
            lhs = LtlFormula::conjunction(lhs, until());
        }
        return lhs;
    }

    LtlFormula until() {
        auto lhs = unary();
        if (keyword(peek(), "U")) {
            take();
            return LtlFormula::until(lhs, until());
        }
        return lhs;
    }

    LtlFormula unary() {
        const auto& t = peek();
        if (t.kind == Tok::Not) {
            take();
            return LtlFormula::negation(unary());
        }
        if (keyword(t, "X")) {
            take();
            return LtlFormula::next(unary());
        }
        if (keyword(t, "F")) {
            take();
            return LtlFormula::finally(unary());
        }
        if (keyword(t, "G")) {
            take();
            return LtlFormula::globally(unary());
        }
        return primary();
    }

    LtlFormula primary() {
        const auto t = peek();
        if (t.kind == Tok::LParen) {
            take();
            auto inner = implication();
            expect(Tok::RParen, "')'");
            return inner;
        }
        if (t.kind != Tok::Ident) fail(t.kind == Tok::End ? "unexpected end of formula" : "unexpected '" + t.text + "'");
        if (t.text == "U" || t.text == "forall") fail("unexpected '" + t.text + "'");
        take();
        if (t.text == "true") return LtlFormula::truth();
        if (t.text == "false") return LtlFormula::falsity();
        std::vector<std::string> args;
        if (peek().kind == Tok::LParen) {
            take();
            while (true) {
                args.push_back(expect(Tok::Ident, "argument").text);
                if (peek().kind == Tok::Comma) {
                    take();
                    continue;
                }
                expect(Tok::RParen, "')'");
                break;
            }
        }
        return LtlFormula::atom(t.text, std::move(args));
    }

    std::vector<Token> toks_;
    std::size_t k_ = 0;
};

} // namespace

LtlFormula parse_ltl(std::string_view text, AtomTable& atoms) {
    Parser p(Lexer(text).run());
    auto f = flatten_atoms(p.formula());
    p.finish();
    for (const auto& name : f.propositions()) atoms.intern(name);
    return f;
}

QuantifiedFormula parse_quantified(std::string_view text) {
    Parser p(Lexer(text).run());
    return p.quantified();
}

} // namespace normweaver
