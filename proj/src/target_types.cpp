#include "intweave/target.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace intweave::target {

TypePtr tvar(const std::string& name) { return std::make_shared<Type>(TVar{name}); }
TypePtr tunit() {
    static TypePtr t = std::make_shared<Type>(TUnit{});
    return t;
}
TypePtr tnat() {
    static TypePtr t = std::make_shared<Type>(TNat{});
    return t;
}
TypePtr tprod(TypePtr l, TypePtr r) { return std::make_shared<Type>(TProd{std::move(l), std::move(r)}); }
TypePtr tsum(TypePtr l, TypePtr r) { return std::make_shared<Type>(TSum{std::move(l), std::move(r)}); }
TypePtr tmu(const std::string& var, TypePtr body) { return std::make_shared<Type>(TMu{var, std::move(body)}); }
TypePtr tlist(TypePtr elem) {
    return tmu("a", tsum(tunit(), tprod(std::move(elem), tvar("a"))));
}

namespace {

bool type_equal_rec(const TypePtr& a, const TypePtr& b,
                    std::vector<std::pair<std::string, std::string>>& binders) {
    return std::visit(
        overload{
            [&](const TVar& x) {
                const auto* y = std::get_if<TVar>(b.get());
                if (!y) return false;
                for (auto it = binders.rbegin(); it != binders.rend(); ++it) {
                    if (it->first == x.name || it->second == y->name)
                        return it->first == x.name && it->second == y->name;
                }
                return x.name == y->name;
            },
            [&](const TUnit&) { return std::holds_alternative<TUnit>(*b); },
            [&](const TNat&) { return std::holds_alternative<TNat>(*b); },
            [&](const TProd& x) {
                const auto* y = std::get_if<TProd>(b.get());
                return y && type_equal_rec(x.l, y->l, binders) && type_equal_rec(x.r, y->r, binders);
            },
            [&](const TSum& x) {
                const auto* y = std::get_if<TSum>(b.get());
                return y && type_equal_rec(x.l, y->l, binders) && type_equal_rec(x.r, y->r, binders);
            },
            [&](const TMu& x) {
                const auto* y = std::get_if<TMu>(b.get());
                if (!y) return false;
                binders.emplace_back(x.var, y->var);
                bool ok = type_equal_rec(x.body, y->body, binders);
                binders.pop_back();
                return ok;
            },
        },
        *a);
}

} // namespace

bool type_equal(const TypePtr& a, const TypePtr& b) {
    if (a.get() == b.get()) return true;
    std::vector<std::pair<std::string, std::string>> binders;
    return type_equal_rec(a, b, binders);
}

TypePtr subst_type(const TypePtr& t, const std::string& var, const TypePtr& with) {
    return std::visit(
        overload{
            [&](const TVar& x) { return x.name == var ? with : t; },
            [&](const TUnit&) { return t; },
            [&](const TNat&) { return t; },
            [&](const TProd& x) { return tprod(subst_type(x.l, var, with), subst_type(x.r, var, with)); },
            [&](const TSum& x) { return tsum(subst_type(x.l, var, with), subst_type(x.r, var, with)); },
            [&](const TMu& x) {
                if (x.var == var) return t;
                // capture: with is closed in all our uses, so no renaming needed
                return tmu(x.var, subst_type(x.body, var, with));
            },
        },
        *t);
}

TypePtr unroll_mu(const TypePtr& mu) {
    const auto* m = std::get_if<TMu>(mu.get());
    if (!m) fail("unroll_mu: not a mu type: " + show_type(mu));
    return subst_type(m->body, m->var, mu);
}

void free_type_vars(const TypePtr& t, std::set<std::string>& out) {
    std::function<void(const TypePtr&, std::vector<std::string>&)> go =
        [&](const TypePtr& u, std::vector<std::string>& bound) {
            std::visit(overload{
                           [&](const TVar& x) {
                               if (std::find(bound.begin(), bound.end(), x.name) == bound.end())
                                   out.insert(x.name);
                           },
                           [&](const TUnit&) {},
                           [&](const TNat&) {},
                           [&](const TProd& x) { go(x.l, bound); go(x.r, bound); },
                           [&](const TSum& x) { go(x.l, bound); go(x.r, bound); },
                           [&](const TMu& x) {
                               bound.push_back(x.var);
                               go(x.body, bound);
                               bound.pop_back();
                           },
                       },
                       *u);
        };
    std::vector<std::string> bound;
    go(t, bound);
}

bool type_closed(const TypePtr& t) {
    std::set<std::string> fv;
    free_type_vars(t, fv);
    return fv.empty();
}

namespace {

// precedence: 0 sum, 1 prod, 2 atom
void show_type_rec(const TypePtr& t, int prec, std::ostringstream& out) {
    std::visit(overload{
                   [&](const TVar& x) { out << x.name; },
                   [&](const TUnit&) { out << "unit"; },
                   [&](const TNat&) { out << "nat"; },
                   [&](const TProd& x) {
                       if (prec > 1) out << "(";
                       show_type_rec(x.l, 2, out);
                       out << " * ";
                       show_type_rec(x.r, 2, out);
                       if (prec > 1) out << ")";
                   },
                   [&](const TSum& x) {
                       if (prec > 0) out << "(";
                       show_type_rec(x.l, 1, out);
                       out << " + ";
                       show_type_rec(x.r, 1, out);
                       if (prec > 0) out << ")";
                   },
                   [&](const TMu& x) {
                       if (prec > 0) out << "(";
                       out << "mu " << x.var << ". ";
                       show_type_rec(x.body, 0, out);
                       if (prec > 0) out << ")";
                   },
               },
               *t);
}

struct TypeParser {
    const std::string& s;
    size_t i = 0;

    explicit TypeParser(const std::string& text) : s(text) {}

    void ws() { while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i; }
    bool eat(char c) {
        ws();
        if (i < s.size() && s[i] == c) { ++i; return true; }
        return false;
    }
    void expect(char c) {
        if (!eat(c)) fail(std::string("type syntax: expected '") + c + "' in: " + s);
    }
    std::string ident() {
        ws();
        size_t start = i;
        while (i < s.size() && (std::isalnum(static_cast<unsigned char>(s[i])) || s[i] == '_' || s[i] == '\''))
            ++i;
        if (start == i) fail("type syntax: expected identifier in: " + s);
        return s.substr(start, i - start);
    }
    bool peek_word(const std::string& w) {
        ws();
        if (s.compare(i, w.size(), w) != 0) return false;
        size_t end = i + w.size();
        return end >= s.size() || !(std::isalnum(static_cast<unsigned char>(s[end])) || s[end] == '_');
    }
    bool eat_word(const std::string& w) {
        if (!peek_word(w)) return false;
        i += w.size();
        return true;
    }

    TypePtr atom() {
        ws();
        if (eat_word("unit")) return tunit();
        if (eat_word("nat")) return tnat();
        if (eat_word("mu")) {
            std::string v = ident();
            expect('.');
            return tmu(v, sum());
        }
        if (eat('(')) {
            TypePtr t = sum();
            expect(')');
            return t;
        }
        return tvar(ident());
    }
    TypePtr prod() {
        TypePtr t = atom();
        while (true) {
            ws();
            if (i < s.size() && s[i] == '*') { ++i; t = tprod(t, atom()); }
            else break;
        }
        return t;
    }
    TypePtr sum() {
        TypePtr t = prod();
        while (true) {
            ws();
            if (i < s.size() && s[i] == '+') { ++i; t = tsum(t, prod()); }
            else break;
        }
        return t;
    }
};

} // namespace

std::string show_type(const TypePtr& t) {
    std::ostringstream out;
    show_type_rec(t, 0, out);
    return out.str();
}

TypePtr parse_type(const std::string& text) {
    TypeParser p(text);
    TypePtr t = p.sum();
    p.ws();
    if (p.i != text.size()) fail("type syntax: trailing input in: " + text);
    return t;
}

// ------------------------------
// data environment
// ------------------------------

void DataEnv::declare(const std::string& name, TypePtr t) {
    auto it = payload.find(name);
    if (it != payload.end()) {
        if (!type_equal(it->second, t))
            fail("datatype " + name + " redeclared with different payload");
        return;
    }
    payload.emplace(name, std::move(t));
}

namespace {

void direct_refs(const TypePtr& t, const DataEnv& env, std::set<std::string>& out) {
    std::set<std::string> fv;
    free_type_vars(t, fv);
    for (const auto& n : fv)
        if (env.has(n)) out.insert(n);
}

} // namespace

std::set<std::string> DataEnv::recursive_names() const {
    std::set<std::string> result;
    for (const auto& group : recursive_groups())
        result.insert(group.begin(), group.end());
    return result;
}

std::vector<std::set<std::string>> DataEnv::recursive_groups() const {
    // Tarjan over the name-reference graph.
    std::map<std::string, std::set<std::string>> adj;
    for (const auto& [name, t] : payload) direct_refs(t, *this, adj[name]);

    std::vector<std::set<std::string>> groups;
    std::map<std::string, int> index, low;
    std::vector<std::string> stack;
    std::set<std::string> onstack;
    int counter = 0;

    std::function<void(const std::string&)> strongconnect = [&](const std::string& v) {
        index[v] = low[v] = counter++;
        stack.push_back(v);
        onstack.insert(v);
        for (const auto& w : adj[v]) {
            if (!index.count(w)) {
                strongconnect(w);
                low[v] = std::min(low[v], low[w]);
            } else if (onstack.count(w)) {
                low[v] = std::min(low[v], index[w]);
            }
        }
        if (low[v] == index[v]) {
            std::set<std::string> comp;
            while (true) {
                std::string w = stack.back();
                stack.pop_back();
                onstack.erase(w);
                comp.insert(w);
                if (w == v) break;
            }
            bool selfloop = comp.size() == 1 && adj[v].count(v);
            if (comp.size() >= 2 || selfloop) groups.push_back(std::move(comp));
        }
    };
    for (const auto& [name, t] : payload)
        if (!index.count(name)) strongconnect(name);
    return groups;
}

TypePtr DataEnv::resolve(const std::string& name, bool flatten) const {
    if (!has(name)) fail("unknown datatype " + name);
    std::set<std::string> rec = recursive_names();

    std::map<std::string, TypePtr> cache;
    std::set<std::string> inProgress;
    std::set<std::string> usedMu;

    auto muvar = [](const std::string& n) { return "$" + n; };

    std::function<TypePtr(const TypePtr&)> resolveType;
    std::function<TypePtr(const std::string&)> resolveName = [&](const std::string& n) -> TypePtr {
        auto it = cache.find(n);
        if (it != cache.end()) return it->second;
        if (inProgress.count(n)) {
            usedMu.insert(n);
            return tvar(muvar(n));
        }
        inProgress.insert(n);
        TypePtr body = resolveType(payload.at(n));
        inProgress.erase(n);
        bool needsMu = usedMu.count(n) != 0;
        TypePtr result;
        if (needsMu) {
            result = tmu(muvar(n), body);
        } else if (flatten && !rec.count(n)) {
            result = body;
        } else {
            // Single-constructor datatype: vacuous mu keeps the fold-wrapped
            // value representation uniform.
            result = tmu(muvar(n), body);
        }
        cache[n] = result;
        return result;
    };
    resolveType = [&](const TypePtr& t) -> TypePtr {
        return std::visit(
            overload{
                [&](const TVar& x) -> TypePtr { return has(x.name) ? resolveName(x.name) : t; },
                [&](const TUnit&) -> TypePtr { return t; },
                [&](const TNat&) -> TypePtr { return t; },
                [&](const TProd& x) -> TypePtr { return tprod(resolveType(x.l), resolveType(x.r)); },
                [&](const TSum& x) -> TypePtr { return tsum(resolveType(x.l), resolveType(x.r)); },
                [&](const TMu& x) -> TypePtr { return tmu(x.var, resolveType(x.body)); },
            },
            *t);
    };
    return resolveName(name);
}

TypePtr DataEnv::resolve_type(const TypePtr& t, bool flatten) const {
    return std::visit(
        overload{
            [&](const TVar& x) -> TypePtr { return has(x.name) ? resolve(x.name, flatten) : t; },
            [&](const TUnit&) -> TypePtr { return t; },
            [&](const TNat&) -> TypePtr { return t; },
            [&](const TProd& x) -> TypePtr {
                return tprod(resolve_type(x.l, flatten), resolve_type(x.r, flatten));
            },
            [&](const TSum& x) -> TypePtr {
                return tsum(resolve_type(x.l, flatten), resolve_type(x.r, flatten));
            },
            [&](const TMu& x) -> TypePtr { return tmu(x.var, resolve_type(x.body, flatten)); },
        },
        *t);
}

} // namespace intweave::target
