#pragma once

// Text syntax for polynomials and tensors, shared by the CLI and fixtures:
//   generators X1..Xn, '*' or juxtaposition for products, '+'/'-',
//   rational literals p/q, '1' for the unit, parentheses for grouping,
//   '(x)' between factors for tensor legs.

#include <cctype>
#include <stdexcept>
#include <string>
#include <vector>

#include "freeprob/ncpoly.hpp"
#include "freeprob/tensor.hpp"

namespace freeprob {

struct ParseError : std::runtime_error {
    size_t pos;
    ParseError(const std::string& msg, size_t p) : std::runtime_error(msg), pos(p) {}
};

// Two-line diagnostic with a caret under the offending position.
inline std::string caret_diagnostic(const std::string& text, const ParseError& e) {
    std::string out = std::string(e.what()) + "\n  " + text + "\n  ";
    for (size_t i = 0; i < e.pos && i < text.size() + 1; ++i) out += ' ';
    out += '^';
    return out;
}

namespace detail {

enum class Tok { Number, Gen, Plus, Minus, Star, LParen, RParen, Tensor, End };

struct Token {
    Tok kind;
    size_t pos;
    std::string text;  // number literal
    int index = 0;     // generator index
};

inline std::vector<Token> lex(const std::string& s) {
    std::vector<Token> out;
    size_t i = 0;
    while (i < s.size()) {
        char c = s[i];
        if (std::isspace(static_cast<unsigned char>(c))) { ++i; continue; }
        if (c == '+') { out.push_back({Tok::Plus, i, "", 0}); ++i; continue; }
        if (c == '-') { out.push_back({Tok::Minus, i, "", 0}); ++i; continue; }
        if (c == '*') { out.push_back({Tok::Star, i, "", 0}); ++i; continue; }
        if (c == '(') {
            if (i + 2 < s.size() && s[i + 1] == 'x' && s[i + 2] == ')') {
                out.push_back({Tok::Tensor, i, "", 0});
                i += 3;
            } else {
                out.push_back({Tok::LParen, i, "", 0});
                ++i;
            }
            continue;
        }
        if (c == ')') { out.push_back({Tok::RParen, i, "", 0}); ++i; continue; }
        if (c == 'X' || c == 'x') {
            size_t j = i + 1;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j == i + 1) throw ParseError("expected generator index after 'X'", i + 1);
            int idx = std::stoi(s.substr(i + 1, j - i - 1));
            if (idx < 1) throw ParseError("generator indices start at 1", i + 1);
            out.push_back({Tok::Gen, i, "", idx});
            i = j;
            continue;
        }
        if (std::isdigit(static_cast<unsigned char>(c))) {
            size_t j = i;
            while (j < s.size() && std::isdigit(static_cast<unsigned char>(s[j]))) ++j;
            if (j < s.size() && s[j] == '/') {
                size_t k = j + 1;
                while (k < s.size() && std::isdigit(static_cast<unsigned char>(s[k]))) ++k;
                if (k == j + 1) throw ParseError("expected denominator after '/'", j + 1);
                j = k;
            }
            out.push_back({Tok::Number, i, s.substr(i, j - i), 0});
            i = j;
            continue;
        }
        throw ParseError(std::string("unexpected character '") + c + "'", i);
    }
    out.push_back({Tok::End, s.size(), "", 0});
    return out;
}

// Parsed expressions are sums of tensor nodes; each node is a list of
// 1..3 polynomial legs. Rank homogeneity is enforced at the end.
struct TensNode {
    std::vector<NcPoly> legs;
};

class Parser {
  public:
    Parser(const std::string& text, int n) : text_(text), n_(n), toks_(lex(text)) {}

    std::vector<TensNode> parse_expr() {
        std::vector<TensNode> nodes;
        bool negate = false;
        if (peek().kind == Tok::Minus) { negate = true; next(); }
        else if (peek().kind == Tok::Plus) { next(); }
        nodes.push_back(apply_sign(parse_tens(), negate));
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            bool neg = next().kind == Tok::Minus;
            nodes.push_back(apply_sign(parse_tens(), neg));
        }
        expect(Tok::End, "unexpected trailing input");
        return nodes;
    }

    int gens() const { return n_; }

  private:
    static TensNode apply_sign(TensNode t, bool neg) {
        if (neg) t.legs[0] *= Rational(-1);
        return t;
    }

    TensNode parse_tens() {
        TensNode t;
        t.legs.push_back(parse_term());
        while (peek().kind == Tok::Tensor) {
            next();
            t.legs.push_back(parse_term());
            if (t.legs.size() > 3) throw ParseError("tensors of rank > 3 are not supported", peek().pos);
        }
        return t;
    }

    NcPoly parse_term() {
        NcPoly p = parse_factor();
        for (;;) {
            Tok k = peek().kind;
            if (k == Tok::Star) {
                next();
                p = p * parse_factor();
            } else if (k == Tok::Gen || k == Tok::Number || k == Tok::LParen) {
                p = p * parse_factor();  // juxtaposition
            } else {
                return p;
            }
        }
    }

    NcPoly parse_factor() {
        const Token& t = peek();
        switch (t.kind) {
            case Tok::Number: {
                next();
                return NcPoly::unit(n_) * parse_rational(t.text);
            }
            case Tok::Gen: {
                if (t.index > n_)
                    throw ParseError("generator X" + std::to_string(t.index) + " exceeds generator count n=" +
                                         std::to_string(n_),
                                     t.pos);
                next();
                return NcPoly::generator(t.index, n_);
            }
            case Tok::LParen: {
                next();
                NcPoly p = parse_paren_expr();
                expect(Tok::RParen, "expected ')'");
                return p;
            }
            default:
                throw ParseError("expected a factor (number, generator or '(')", t.pos);
        }
    }

    // Inside parentheses only polynomial expressions are allowed.
    NcPoly parse_paren_expr() {
        bool negate = false;
        if (peek().kind == Tok::Minus) { negate = true; next(); }
        else if (peek().kind == Tok::Plus) { next(); }
        NcPoly p = parse_term();
        if (negate) p *= Rational(-1);
        while (peek().kind == Tok::Plus || peek().kind == Tok::Minus) {
            bool neg = next().kind == Tok::Minus;
            NcPoly q = parse_term();
            if (neg) p -= q; else p += q;
        }
        return p;
    }

    const Token& peek() const { return toks_[at_]; }
    const Token& next() { return toks_[at_++]; }
    void expect(Tok k, const char* msg) {
        if (peek().kind != k) throw ParseError(msg, peek().pos);
        next();
    }

    std::string text_;
    int n_;
    std::vector<Token> toks_;
    size_t at_ = 0;
};

inline int infer_gens(const std::string& text) {
    int n = 1;
    for (const Token& t : lex(text))
        if (t.kind == Tok::Gen) n = std::max(n, t.index);
    return n;
}

}  // namespace detail

inline NcPoly parse_poly(const std::string& text, int n) {
    detail::Parser p(text, n);
    auto nodes = p.parse_expr();
    NcPoly out(n);
    for (auto& t : nodes) {
        if (t.legs.size() != 1) throw ParseError("tensor expression where a polynomial was expected", 0);
        out += t.legs[0];
    }
    return out;
}

inline NcPoly parse_poly(const std::string& text) { return parse_poly(text, detail::infer_gens(text)); }

inline TensorPoly2 parse_tensor2(const std::string& text, int n) {
    detail::Parser p(text, n);
    auto nodes = p.parse_expr();
    TensorPoly2 out(n);
    for (auto& t : nodes) {
        if (t.legs.size() != 2) throw ParseError("expected a rank-2 tensor expression", 0);
        out += tensor_of(t.legs[0], t.legs[1]);
    }
    return out;
}

inline TensorPoly3 parse_tensor3(const std::string& text, int n) {
    detail::Parser p(text, n);
    auto nodes = p.parse_expr();
    TensorPoly3 out(n);
    for (auto& t : nodes) {
        if (t.legs.size() != 3) throw ParseError("expected a rank-3 tensor expression", 0);
        for (auto& [wa, ca] : t.legs[0].terms())
            for (auto& [wb, cb] : t.legs[1].terms())
                for (auto& [wc, cc] : t.legs[2].terms())
                    out.add_term({wa, wb, wc}, ca * cb * cc);
    }
    return out;
}

}  // namespace freeprob
