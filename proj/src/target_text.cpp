#include "intweave/target.hpp"

#include <cctype>

namespace intweave::target {

namespace {

// expression printing; precedence: 0 add, 1 atom
void show_expr_rec(const ExprPtr& e, int prec, std::ostringstream& out) {
    std::visit(
        overload{
            [&](const EVar& x) { out << x.name; },
            [&](const EUnit&) { out << "<>"; },
            [&](const ENum& x) { out << x.n; },
            [&](const EAdd& x) {
                if (prec > 0) out << "(";
                show_expr_rec(x.l, 0, out);
                out << " + ";
                show_expr_rec(x.r, 1, out);
                if (prec > 0) out << ")";
            },
            [&](const EIsZero& x) {
                out << "iszero(";
                show_expr_rec(x.e, 0, out);
                out << ")";
            },
            [&](const EPair& x) {
                out << "<";
                show_expr_rec(x.l, 0, out);
                out << ", ";
                show_expr_rec(x.r, 0, out);
                out << ">";
            },
            [&](const ELetPair& x) {
                if (prec > 0) out << "(";
                out << "let ";
                show_expr_rec(x.scrut, 1, out);
                out << " be <" << x.x << ", " << x.y << "> in ";
                show_expr_rec(x.body, 0, out);
                if (prec > 0) out << ")";
            },
            [&](const EInl& x) {
                out << "inl(";
                show_expr_rec(x.e, 0, out);
                out << ")";
            },
            [&](const EInr& x) {
                out << "inr(";
                show_expr_rec(x.e, 0, out);
                out << ")";
            },
            [&](const ECase& x) {
                out << "case ";
                show_expr_rec(x.scrut, 0, out);
                out << " of inl " << x.x << " => ";
                show_expr_rec(x.l, 0, out);
                out << " | inr " << x.y << " => ";
                show_expr_rec(x.r, 0, out);
                out << " end";
            },
            [&](const EFold& x) {
                out << "fold[" << (x.at ? show_type(x.at) : std::string("_")) << "](";
                show_expr_rec(x.e, 0, out);
                out << ")";
            },
            [&](const EUnfold& x) {
                out << "unfold[" << (x.at ? show_type(x.at) : std::string("_")) << "](";
                show_expr_rec(x.e, 0, out);
                out << ")";
            },
        },
        *e);
}

struct ExprParser {
    const std::string& s;
    size_t i = 0;
    explicit ExprParser(const std::string& text) : s(text) {}

    void ws() { while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i; }
    bool peek(char c) {
        ws();
        return i < s.size() && s[i] == c;
    }
    bool eat(char c) {
        if (peek(c)) { ++i; return true; }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("expression syntax: expected '") + c + "' in: " + s);
    }
    bool peek_word(const std::string& w) {
        ws();
        if (s.compare(i, w.size(), w) != 0) return false;
        size_t end = i + w.size();
        return end >= s.size() ||
               !(std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_');
    }
    bool eat_word(const std::string& w) {
        if (!peek_word(w)) return false;
        i += w.size();
        return true;
    }
    void expect_word(const std::string& w) {
        if (!eat_word(w)) fail("expression syntax: expected '" + w + "' in: " + s);
    }
    std::string ident() {
        ws();
        size_t start = i;
        while (i < s.size() &&
               (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '$' ||
                s[i] == '~' || s[i] == '\''))
            ++i;
        if (start == i) fail("expression syntax: expected identifier in: " + s);
        return s.substr(start, i - start);
    }
    std::string bracketed_type() {
        expect('[');
        size_t start = i;
        int depth = 1;
        while (i < s.size() && depth > 0) {
            if (s[i] == '[') ++depth;
            if (s[i] == ']') --depth;
            ++i;
        }
        if (depth != 0) fail("expression syntax: unterminated '[' in: " + s);
        return s.substr(start, i - 1 - start);
    }

    ExprPtr expr() {
        ExprPtr e = atom();
        while (true) {
            ws();
            if (i < s.size() && s[i] == '+') { ++i; e = eadd(e, atom()); }
            else break;
        }
        return e;
    }

    ExprPtr atom() {
        ws();
        if (i >= s.size()) fail("expression syntax: unexpected end in: " + s);
        if (s[i] == '<') {
            ++i;
            ws();
            if (i < s.size() && s[i] == '>') { ++i; return eunit(); }
            ExprPtr l = expr();
            expect(',');
            ExprPtr r = expr();
            expect('>');
            return epair(l, r);
        }
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            uint64_t n = 0;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
                n = n * 10 + static_cast<uint64_t>(s[i++] - '0');
            return enum_(n);
        }
        if (eat('(')) {
            ExprPtr e = expr();
            expect(')');
            return e;
        }
        if (eat_word("iszero")) {
            expect('(');
            ExprPtr e = expr();
            expect(')');
            return eiszero(e);
        }
        if (eat_word("inl")) {
            expect('(');
            ExprPtr e = expr();
            expect(')');
            return einl(e);
        }
        if (eat_word("inr")) {
            expect('(');
            ExprPtr e = expr();
            expect(')');
            return einr(e);
        }
        if (eat_word("let")) {
            ExprPtr scrut = atom();
            expect_word("be");
            expect('<');
            std::string x = ident();
            expect(',');
            std::string y = ident();
            expect('>');
            expect_word("in");
            return eletpair(scrut, x, y, expr());
        }
        if (eat_word("case")) {
            ExprPtr scrut = expr();
            expect_word("of");
            expect_word("inl");
            std::string x = ident();
            expect_word("=>");
            ExprPtr l = expr();
            expect('|');
            expect_word("inr");
            std::string y = ident();
            expect_word("=>");
            ExprPtr r = expr();
            expect_word("end");
            return ecase(scrut, x, l, y, r);
        }
        if (eat_word("fold")) {
            TypePtr at = parse_type(bracketed_type());
            expect('(');
            ExprPtr e = expr();
            expect(')');
            return efold(at, e);
        }
        if (eat_word("unfold")) {
            TypePtr at = parse_type(bracketed_type());
            expect('(');
            ExprPtr e = expr();
            expect(')');
            return eunfold(at, e);
        }
        return evar(ident());
    }
};

void expect_word_at(ExprParser& p, const std::string& w) { p.expect_word(w); }

} // namespace

std::string show_expr(const ExprPtr& e) {
    std::ostringstream out;
    show_expr_rec(e, 0, out);
    return out.str();
}

ExprPtr parse_expr(const std::string& text) {
    ExprParser p(text);
    ExprPtr e = p.expr();
    p.ws();
    if (p.i != text.size()) fail("expression syntax: trailing input in: " + text);
    return e;
}

std::string show_program(const TargetProgram& p) {
    std::ostringstream out;
    out << "entries: " << join(p.entries, " ") << "\n";
    out << "exits: " << join(p.exits, " ") << "\n";
    for (const auto& [name, t] : p.dataEnv.payload)
        out << "data " << name << " = " << show_type(t) << "\n";
    for (const auto& [l, t] : p.argTypes)
        out << "type " << l << " : " << show_type(t) << "\n";
    for (const auto& [l, def] : p.defs) {
        out << l << "(" << def.param << ") = ";
        std::visit(overload{
                       [&](const DirectBody& b) {
                           out << b.callee << "(" << show_expr(b.arg) << ")";
                       },
                       [&](const BranchBody& b) {
                           out << "case " << show_expr(b.scrut) << " of inl " << b.lvar << " => "
                               << b.lcallee << "(" << show_expr(b.larg) << ") | inr " << b.rvar
                               << " => " << b.rcallee << "(" << show_expr(b.rarg) << ")";
                       },
                   },
                   def.body);
        out << "\n";
    }
    return out.str();
}

TargetProgram parse_program(const std::string& text) {
    TargetProgram p;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        size_t start = line.find_first_not_of(" \t\r");
        if (start == std::string::npos) continue;
        line = line.substr(start);

        auto words = [&](const std::string& rest) {
            std::vector<Label> out;
            std::istringstream ws(rest);
            std::string w;
            while (ws >> w) out.push_back(w);
            return out;
        };

        try {
            if (line.rfind("entries:", 0) == 0) {
                p.entries = words(line.substr(8));
                continue;
            }
            if (line.rfind("exits:", 0) == 0) {
                p.exits = words(line.substr(6));
                continue;
            }
            if (line.rfind("data ", 0) == 0) {
                size_t eq = line.find('=');
                if (eq == std::string::npos) fail("data line without '='");
                std::string name = line.substr(5, eq - 5);
                name.erase(name.find_last_not_of(" \t") + 1);
                p.dataEnv.declare(name, parse_type(line.substr(eq + 1)));
                continue;
            }
            if (line.rfind("type ", 0) == 0) {
                size_t colon = line.find(':');
                if (colon == std::string::npos) fail("type line without ':'");
                std::string name = line.substr(5, colon - 5);
                name.erase(name.find_last_not_of(" \t") + 1);
                p.argTypes[name] = parse_type(line.substr(colon + 1));
                continue;
            }

            // definition: f(x) = body
            ExprParser ep(line);
            std::string name = ep.ident();
            ep.expect('(');
            std::string param = ep.ident();
            ep.expect(')');
            ep.expect('=');
            FunctionDefinition def;
            def.name = name;
            def.param = param;
            if (ep.eat_word("case")) {
                ExprPtr scrut = ep.expr();
                expect_word_at(ep, "of");
                expect_word_at(ep, "inl");
                std::string lv = ep.ident();
                expect_word_at(ep, "=>");
                std::string lc = ep.ident();
                ep.expect('(');
                ExprPtr la = ep.peek(')') ? eunit() : ep.expr();
                ep.expect(')');
                ep.expect('|');
                expect_word_at(ep, "inr");
                std::string rv = ep.ident();
                expect_word_at(ep, "=>");
                std::string rc = ep.ident();
                ep.expect('(');
                ExprPtr ra = ep.peek(')') ? eunit() : ep.expr();
                ep.expect(')');
                def.body = BranchBody{scrut, lv, lc, la, rv, rc, ra};
            } else {
                std::string callee = ep.ident();
                ep.expect('(');
                ExprPtr arg = ep.peek(')') ? eunit() : ep.expr();
                ep.expect(')');
                def.body = DirectBody{callee, arg};
            }
            ep.ws();
            if (ep.i != line.size()) fail("trailing input after definition");
            p.add_def(std::move(def));
        } catch (const Error& e) {
            fail("program line " + std::to_string(lineno) + ": " + e.what());
        }
    }
    p.validate();
    return p;
}

std::string show_dot(const TargetProgram& p) {
    std::ostringstream out;
    out << "digraph program {\n  rankdir=LR;\n";
    for (const auto& l : p.entries) out << "  \"" << l << "\" [shape=diamond];\n";
    for (const auto& l : p.exits) out << "  \"" << l << "\" [shape=doublecircle];\n";
    for (const auto& [l, def] : p.defs) {
        std::visit(overload{
                       [&](const DirectBody& b) {
                           out << "  \"" << l << "\" -> \"" << b.callee << "\";\n";
                       },
                       [&](const BranchBody& b) {
                           out << "  \"" << l << "\" -> \"" << b.lcallee << "\" [label=\"inl\"];\n";
                           out << "  \"" << l << "\" -> \"" << b.rcallee << "\" [label=\"inr\"];\n";
                       },
                   },
                   def.body);
    }
    out << "}\n";
    return out.str();
}

} // namespace intweave::target
