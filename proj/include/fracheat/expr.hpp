#pragma once

// Small arithmetic expression parser used for user-supplied nonlinearities.
//
// Grammar (precedence low to high):
//   expr    := term (('+'|'-') term)*
//   term    := factor (('*'|'/') factor)*
//   factor  := '-' factor | primary ('^' factor)?   -- '^' right associative,
//                                                       '-' looser than '^'
//   primary := number | 'u' | ident '(' expr (',' expr)? ')' | '(' expr ')'
//
// Supported functions: exp(x), log(x), pow(x, y).  The only free variable is u.
// Expressions compile to a flat postfix program so evaluation allocates nothing.

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>
#include <vector>

#include "fracheat/errors.hpp"

namespace fracheat {

class Expression {
  public:
    /// Parses `text`; throws ConfigError (with a caret position) on bad syntax.
    static Expression parse(const std::string& text) {
        Parser parser{text, 0};
        Expression out;
        out.text_ = text;
        parser.expr(out.code_);
        parser.skip_ws();
        if (parser.pos != text.size())
            throw ConfigError("expression", "trailing input at position " +
                                                std::to_string(parser.pos) + " in '" + text + "'");
        if (out.code_.empty())
            throw ConfigError("expression", "empty expression");
        // The evaluator uses a fixed stack; bound the depth at parse time.
        int depth = 0, peak = 0;
        for (const Instr& ins : out.code_) {
            switch (ins.op) {
                case Op::Push:
                case Op::Var: ++depth; break;
                case Op::Add:
                case Op::Sub:
                case Op::Mul:
                case Op::Div:
                case Op::Pow: --depth; break;
                default: break;
            }
            peak = std::max(peak, depth);
        }
        if (peak > 63)
            throw ConfigError("expression", "expression nests deeper than 63 levels");
        return out;
    }

    /// Evaluates at u.  Overflow follows IEEE semantics (yields +/-inf, never traps).
    [[nodiscard]] double operator()(double u) const {
        double stack[64];
        int top = -1;
        for (const Instr& ins : code_) {
            switch (ins.op) {
                case Op::Push: stack[++top] = ins.value; break;
                case Op::Var: stack[++top] = u; break;
                case Op::Add: --top; stack[top] += stack[top + 1]; break;
                case Op::Sub: --top; stack[top] -= stack[top + 1]; break;
                case Op::Mul: --top; stack[top] *= stack[top + 1]; break;
                case Op::Div: --top; stack[top] /= stack[top + 1]; break;
                case Op::Pow: --top; stack[top] = std::pow(stack[top], stack[top + 1]); break;
                case Op::Neg: stack[top] = -stack[top]; break;
                case Op::Exp: stack[top] = std::exp(stack[top]); break;
                case Op::Log: stack[top] = std::log(stack[top]); break;
            }
        }
        return stack[0];
    }

    [[nodiscard]] const std::string& text() const { return text_; }
    [[nodiscard]] bool empty() const { return code_.empty(); }

    Expression() = default;

  private:
    enum class Op { Push, Var, Add, Sub, Mul, Div, Pow, Neg, Exp, Log };
    struct Instr {
        Op op;
        double value = 0.0;
    };

    struct Parser {
        const std::string& s;
        std::size_t pos;

        void skip_ws() {
            while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
        }

        bool accept(char c) {
            skip_ws();
            if (pos < s.size() && s[pos] == c) {
                ++pos;
                return true;
            }
            return false;
        }

        void expect(char c) {
            if (!accept(c))
                throw ConfigError("expression", std::string("expected '") + c + "' at position " +
                                                    std::to_string(pos) + " in '" + s + "'");
        }

        void expr(std::vector<Instr>& code) {
            term(code);
            for (;;) {
                if (accept('+')) {
                    term(code);
                    code.push_back({Op::Add});
                } else if (accept('-')) {
                    term(code);
                    code.push_back({Op::Sub});
                } else {
                    return;
                }
            }
        }

        void term(std::vector<Instr>& code) {
            factor(code);
            for (;;) {
                if (accept('*')) {
                    factor(code);
                    code.push_back({Op::Mul});
                } else if (accept('/')) {
                    factor(code);
                    code.push_back({Op::Div});
                } else {
                    return;
                }
            }
        }

        void factor(std::vector<Instr>& code) {
            // '-' binds looser than '^'  (so -u^2 means -(u^2), and 2^-3 parses)
            if (accept('-')) {
                factor(code);
                code.push_back({Op::Neg});
                return;
            }
            primary(code);
            if (accept('^')) {
                factor(code); // right associative
                code.push_back({Op::Pow});
            }
        }

        void primary(std::vector<Instr>& code) {
            skip_ws();
            if (pos >= s.size())
                throw ConfigError("expression", "unexpected end of input in '" + s + "'");
            char c = s[pos];
            if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
                number(code);
                return;
            }
            if (c == '(') {
                ++pos;
                expr(code);
                expect(')');
                return;
            }
            if (std::isalpha(static_cast<unsigned char>(c))) {
                std::size_t start = pos;
                while (pos < s.size() &&
                       std::isalnum(static_cast<unsigned char>(s[pos])))
                    ++pos;
                std::string name = s.substr(start, pos - start);
                if (name == "u") {
                    code.push_back({Op::Var});
                    return;
                }
                if (name == "exp" || name == "log") {
                    expect('(');
                    expr(code);
                    expect(')');
                    code.push_back({name == "exp" ? Op::Exp : Op::Log});
                    return;
                }
                if (name == "pow") {
                    expect('(');
                    expr(code);
                    expect(',');
                    expr(code);
                    expect(')');
                    code.push_back({Op::Pow});
                    return;
                }
                throw ConfigError("expression", "unknown identifier '" + name + "' in '" + s + "'");
            }
            throw ConfigError("expression", std::string("unexpected character '") + c +
                                                "' at position " + std::to_string(pos) + " in '" +
                                                s + "'");
        }

        void number(std::vector<Instr>& code) {
            std::size_t consumed = 0;
            double value = 0.0;
            try {
                value = std::stod(s.substr(pos), &consumed);
            } catch (const std::exception&) {
                throw ConfigError("expression",
                                  "bad numeric literal at position " + std::to_string(pos));
            }
            pos += consumed;
            code.push_back({Op::Push, value});
        }
    };

    std::vector<Instr> code_;
    std::string text_;
};

} // namespace fracheat
