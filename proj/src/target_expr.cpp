#include "intweave/target.hpp"

#include <cctype>
#include <functional>

namespace intweave::target {

ExprPtr evar(const std::string& name) { return std::make_shared<Expr>(EVar{name}); }
ExprPtr eunit() {
    static ExprPtr e = std::make_shared<Expr>(EUnit{});
    return e;
}
ExprPtr enum_(uint64_t n) { return std::make_shared<Expr>(ENum{n}); }
ExprPtr eadd(ExprPtr l, ExprPtr r) { return std::make_shared<Expr>(EAdd{std::move(l), std::move(r)}); }
ExprPtr eiszero(ExprPtr e) { return std::make_shared<Expr>(EIsZero{std::move(e)}); }
ExprPtr epair(ExprPtr l, ExprPtr r) { return std::make_shared<Expr>(EPair{std::move(l), std::move(r)}); }
ExprPtr eletpair(ExprPtr scrut, const std::string& x, const std::string& y, ExprPtr body) {
    return std::make_shared<Expr>(ELetPair{std::move(scrut), x, y, std::move(body)});
}
ExprPtr einl(ExprPtr e) { return std::make_shared<Expr>(EInl{std::move(e)}); }
ExprPtr einr(ExprPtr e) { return std::make_shared<Expr>(EInr{std::move(e)}); }
ExprPtr ecase(ExprPtr scrut, const std::string& x, ExprPtr l, const std::string& y, ExprPtr r) {
    return std::make_shared<Expr>(ECase{std::move(scrut), x, std::move(l), y, std::move(r)});
}
ExprPtr efold(TypePtr at, ExprPtr e) { return std::make_shared<Expr>(EFold{std::move(at), std::move(e)}); }
ExprPtr eunfold(TypePtr at, ExprPtr e) { return std::make_shared<Expr>(EUnfold{std::move(at), std::move(e)}); }

ExprPtr subst_expr(const ExprPtr& e, const std::string& var, const ExprPtr& with) {
    return std::visit(
        overload{
            [&](const EVar& x) { return x.name == var ? with : e; },
            [&](const EUnit&) { return e; },
            [&](const ENum&) { return e; },
            [&](const EAdd& x) { return eadd(subst_expr(x.l, var, with), subst_expr(x.r, var, with)); },
            [&](const EIsZero& x) { return eiszero(subst_expr(x.e, var, with)); },
            [&](const EPair& x) { return epair(subst_expr(x.l, var, with), subst_expr(x.r, var, with)); },
            [&](const ELetPair& x) {
                ExprPtr scrut = subst_expr(x.scrut, var, with);
                if (x.x == var || x.y == var) return eletpair(scrut, x.x, x.y, x.body);
                return eletpair(scrut, x.x, x.y, subst_expr(x.body, var, with));
            },
            [&](const EInl& x) { return einl(subst_expr(x.e, var, with)); },
            [&](const EInr& x) { return einr(subst_expr(x.e, var, with)); },
            [&](const ECase& x) {
                ExprPtr scrut = subst_expr(x.scrut, var, with);
                ExprPtr l = x.x == var ? x.l : subst_expr(x.l, var, with);
                ExprPtr r = x.y == var ? x.r : subst_expr(x.r, var, with);
                return ecase(scrut, x.x, l, x.y, r);
            },
            [&](const EFold& x) { return efold(x.at, subst_expr(x.e, var, with)); },
            [&](const EUnfold& x) { return eunfold(x.at, subst_expr(x.e, var, with)); },
        },
        *e);
}

ValuePtr vunit() {
    static ValuePtr v = std::make_shared<Value>(VUnit{});
    return v;
}
ValuePtr vnum(uint64_t n) { return std::make_shared<Value>(VNum{n}); }
ValuePtr vpair(ValuePtr l, ValuePtr r) { return std::make_shared<Value>(VPair{std::move(l), std::move(r)}); }
ValuePtr vinl(ValuePtr v) { return std::make_shared<Value>(VInl{std::move(v)}); }
ValuePtr vinr(ValuePtr v) { return std::make_shared<Value>(VInr{std::move(v)}); }
ValuePtr vfold(ValuePtr v) { return std::make_shared<Value>(VFold{std::move(v)}); }

bool value_equal(const ValuePtr& a, const ValuePtr& b) {
    if (a.get() == b.get()) return true;
    return std::visit(overload{
                          [&](const VUnit&) { return std::holds_alternative<VUnit>(*b); },
                          [&](const VNum& x) {
                              const auto* y = std::get_if<VNum>(b.get());
                              return y && x.n == y->n;
                          },
                          [&](const VPair& x) {
                              const auto* y = std::get_if<VPair>(b.get());
                              return y && value_equal(x.l, y->l) && value_equal(x.r, y->r);
                          },
                          [&](const VInl& x) {
                              const auto* y = std::get_if<VInl>(b.get());
                              return y && value_equal(x.v, y->v);
                          },
                          [&](const VInr& x) {
                              const auto* y = std::get_if<VInr>(b.get());
                              return y && value_equal(x.v, y->v);
                          },
                          [&](const VFold& x) {
                              const auto* y = std::get_if<VFold>(b.get());
                              return y && value_equal(x.v, y->v);
                          },
                      },
                      *a);
}

std::string show_value(const ValuePtr& v) {
    return std::visit(overload{
                          [&](const VUnit&) -> std::string { return "<>"; },
                          [&](const VNum& x) { return std::to_string(x.n); },
                          [&](const VPair& x) { return "<" + show_value(x.l) + ", " + show_value(x.r) + ">"; },
                          [&](const VInl& x) { return "inl " + show_value(x.v); },
                          [&](const VInr& x) { return "inr " + show_value(x.v); },
                          [&](const VFold& x) { return "fold " + show_value(x.v); },
                      },
                      *v);
}

namespace {

struct ValueParser {
    const std::string& s;
    size_t i = 0;
    explicit ValueParser(const std::string& text) : s(text) {}
    void ws() { while (i < s.size() && std::isspace(static_cast<unsigned char>(s[i]))) ++i; }
    bool eat_word(const std::string& w) {
        ws();
        if (s.compare(i, w.size(), w) != 0) return false;
        size_t end = i + w.size();
        if (end < s.size() && std::isalnum(static_cast<unsigned char>(s[end]))) return false;
        i = end;
        return true;
    }
    ValuePtr value() {
        ws();
        if (i >= s.size()) fail("value syntax: unexpected end in: " + s);
        if (s[i] == '<') {
            ++i;
            ws();
            if (i < s.size() && s[i] == '>') { ++i; return vunit(); }
            ValuePtr l = value();
            ws();
            if (i >= s.size() || s[i] != ',') fail("value syntax: expected ',' in: " + s);
            ++i;
            ValuePtr r = value();
            ws();
            if (i >= s.size() || s[i] != '>') fail("value syntax: expected '>' in: " + s);
            ++i;
            return vpair(l, r);
        }
        if (std::isdigit(static_cast<unsigned char>(s[i]))) {
            uint64_t n = 0;
            while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i])))
                n = n * 10 + static_cast<uint64_t>(s[i++] - '0');
            return vnum(n);
        }
        if (eat_word("inl")) return vinl(value());
        if (eat_word("inr")) return vinr(value());
        if (eat_word("fold")) return vfold(value());
        fail("value syntax: unexpected character '" + std::string(1, s[i]) + "' in: " + s);
    }
};

} // namespace

ValuePtr parse_value(const std::string& text) {
    ValueParser p(text);
    ValuePtr v = p.value();
    p.ws();
    if (p.i != text.size()) fail("value syntax: trailing input in: " + text);
    return v;
}

ExprPtr value_to_expr(const ValuePtr& v) {
    return std::visit(overload{
                          [&](const VUnit&) { return eunit(); },
                          [&](const VNum& x) { return enum_(x.n); },
                          [&](const VPair& x) { return epair(value_to_expr(x.l), value_to_expr(x.r)); },
                          [&](const VInl& x) { return einl(value_to_expr(x.v)); },
                          [&](const VInr& x) { return einr(value_to_expr(x.v)); },
                          // the annotation is lost on values; reconstructed only where a type is known
                          [&](const VFold& x) { return efold(nullptr, value_to_expr(x.v)); },
                      },
                      *v);
}

bool value_has_type(const ValuePtr& v, const TypePtr& t) {
    return std::visit(overload{
                          [&](const VUnit&) { return std::holds_alternative<TUnit>(*t); },
                          [&](const VNum&) { return std::holds_alternative<TNat>(*t); },
                          [&](const VPair& x) {
                              const auto* p = std::get_if<TProd>(t.get());
                              return p && value_has_type(x.l, p->l) && value_has_type(x.r, p->r);
                          },
                          [&](const VInl& x) {
                              const auto* s = std::get_if<TSum>(t.get());
                              return s && value_has_type(x.v, s->l);
                          },
                          [&](const VInr& x) {
                              const auto* s = std::get_if<TSum>(t.get());
                              return s && value_has_type(x.v, s->r);
                          },
                          [&](const VFold& x) {
                              return std::holds_alternative<TMu>(*t) && value_has_type(x.v, unroll_mu(t));
                          },
                      },
                      *v);
}

std::multiset<uint64_t> value_multiset(const ValuePtr& v) {
    std::multiset<uint64_t> out;
    std::function<void(const ValuePtr&)> go = [&](const ValuePtr& u) {
        std::visit(overload{
                       [&](const VNum& x) { out.insert(x.n); },
                       [&](const VPair& x) { go(x.l); go(x.r); },
                       [&](const auto&) {},
                   },
                   *u);
    };
    go(v);
    return out;
}

// ------------------------------
// typing
// ------------------------------

namespace {

// Injections synthesize a sum with a hole ("?" variable) for the missing
// side; holes match anything when compared.
bool is_hole(const TypePtr& t) {
    const auto* v = std::get_if<TVar>(t.get());
    return v && !v->name.empty() && v->name[0] == '?';
}

bool check_compat(const TypePtr& a, const TypePtr& b) {
    if (is_hole(a) || is_hole(b)) return true;
    return std::visit(overload{
                          [&](const TVar& x) {
                              const auto* y = std::get_if<TVar>(b.get());
                              return y && x.name == y->name;
                          },
                          [&](const TUnit&) { return std::holds_alternative<TUnit>(*b); },
                          [&](const TNat&) { return std::holds_alternative<TNat>(*b); },
                          [&](const TProd& x) {
                              const auto* y = std::get_if<TProd>(b.get());
                              return y && check_compat(x.l, y->l) && check_compat(x.r, y->r);
                          },
                          [&](const TSum& x) {
                              const auto* y = std::get_if<TSum>(b.get());
                              return y && check_compat(x.l, y->l) && check_compat(x.r, y->r);
                          },
                          [&](const TMu&) { return type_equal(a, b); },
                      },
                      *a);
}

TypePtr merge_compat(const TypePtr& a, const TypePtr& b) {
    if (is_hole(a)) return b;
    if (is_hole(b)) return a;
    if (const auto* x = std::get_if<TProd>(a.get())) {
        const auto* y = std::get_if<TProd>(b.get());
        if (y) return tprod(merge_compat(x->l, y->l), merge_compat(x->r, y->r));
    }
    if (const auto* x = std::get_if<TSum>(a.get())) {
        const auto* y = std::get_if<TSum>(b.get());
        if (y) return tsum(merge_compat(x->l, y->l), merge_compat(x->r, y->r));
    }
    return a;
}

} // namespace

TypePtr typecheck_expr(const TypeCtx& ctx, const ExprPtr& e) {
    return std::visit(
        overload{
            [&](const EVar& x) -> TypePtr {
                auto it = ctx.find(x.name);
                if (it == ctx.end()) throw TypeError("unbound variable " + x.name);
                return it->second;
            },
            [&](const EUnit&) -> TypePtr { return tunit(); },
            [&](const ENum&) -> TypePtr { return tnat(); },
            [&](const EAdd& x) -> TypePtr {
                if (!std::holds_alternative<TNat>(*typecheck_expr(ctx, x.l)) ||
                    !std::holds_alternative<TNat>(*typecheck_expr(ctx, x.r)))
                    throw TypeError("addition of non-nat");
                return tnat();
            },
            [&](const EIsZero& x) -> TypePtr {
                if (!std::holds_alternative<TNat>(*typecheck_expr(ctx, x.e)))
                    throw TypeError("iszero of non-nat");
                return tsum(tunit(), tunit());
            },
            [&](const EPair& x) -> TypePtr {
                return tprod(typecheck_expr(ctx, x.l), typecheck_expr(ctx, x.r));
            },
            [&](const ELetPair& x) -> TypePtr {
                TypePtr st = typecheck_expr(ctx, x.scrut);
                const auto* p = std::get_if<TProd>(st.get());
                if (!p) throw TypeError("let-pair scrutinee is not a product: " + show_type(st));
                TypeCtx inner = ctx;
                inner[x.x] = p->l;
                inner[x.y] = p->r;
                return typecheck_expr(inner, x.body);
            },
            [&](const EInl& x) -> TypePtr {
                // injections only typecheck where the expected type is known;
                // standalone inference gives a one-sided sum with a variable
                return tsum(typecheck_expr(ctx, x.e), tvar("?r"));
            },
            [&](const EInr& x) -> TypePtr {
                return tsum(tvar("?l"), typecheck_expr(ctx, x.e));
            },
            [&](const ECase& x) -> TypePtr {
                TypePtr st = typecheck_expr(ctx, x.scrut);
                const auto* s = std::get_if<TSum>(st.get());
                if (!s) throw TypeError("case scrutinee is not a sum: " + show_type(st));
                TypeCtx lctx = ctx;
                lctx[x.x] = s->l;
                TypeCtx rctx = ctx;
                rctx[x.y] = s->r;
                TypePtr lt = typecheck_expr(lctx, x.l);
                TypePtr rt = typecheck_expr(rctx, x.r);
                if (!check_compat(lt, rt))
                    throw TypeError("case branches disagree: " + show_type(lt) + " vs " + show_type(rt));
                return merge_compat(lt, rt);
            },
            [&](const EFold& x) -> TypePtr {
                if (!x.at || !std::holds_alternative<TMu>(*x.at))
                    throw TypeError("fold annotation is not a mu type");
                TypePtr inner = typecheck_expr(ctx, x.e);
                if (!check_compat(inner, unroll_mu(x.at)))
                    throw TypeError("fold payload mismatch: " + show_type(inner) + " vs " +
                                    show_type(unroll_mu(x.at)));
                return x.at;
            },
            [&](const EUnfold& x) -> TypePtr {
                if (!x.at || !std::holds_alternative<TMu>(*x.at))
                    throw TypeError("unfold annotation is not a mu type");
                TypePtr inner = typecheck_expr(ctx, x.e);
                if (!check_compat(inner, x.at))
                    throw TypeError("unfold subject mismatch: " + show_type(inner) + " vs " +
                                    show_type(x.at));
                return unroll_mu(x.at);
            },
        },
        *e);
}

// ------------------------------
// evaluation (big-step; the small-step relation is deterministic, so the
// unique normal form is computed directly)
// ------------------------------

namespace {

using Env = std::map<std::string, ValuePtr>;

ValuePtr eval_rec(const ExprPtr& e, const Env& env, Fuel& fuel) {
    fuel.spend("eval_expr");
    return std::visit(
        overload{
            [&](const EVar& x) -> ValuePtr {
                auto it = env.find(x.name);
                if (it == env.end()) fail("eval: unbound variable " + x.name);
                return it->second;
            },
            [&](const EUnit&) -> ValuePtr { return vunit(); },
            [&](const ENum& x) -> ValuePtr { return vnum(x.n); },
            [&](const EAdd& x) -> ValuePtr {
                const auto* l = std::get_if<VNum>(eval_rec(x.l, env, fuel).get());
                const auto* r = std::get_if<VNum>(eval_rec(x.r, env, fuel).get());
                if (!l || !r) fail("eval: addition of non-numbers");
                return vnum(l->n + r->n);
            },
            [&](const EIsZero& x) -> ValuePtr {
                const auto* n = std::get_if<VNum>(eval_rec(x.e, env, fuel).get());
                if (!n) fail("eval: iszero of non-number");
                return n->n == 0 ? vinl(vunit()) : vinr(vunit());
            },
            [&](const EPair& x) -> ValuePtr {
                ValuePtr l = eval_rec(x.l, env, fuel);
                return vpair(l, eval_rec(x.r, env, fuel));
            },
            [&](const ELetPair& x) -> ValuePtr {
                const auto* p = std::get_if<VPair>(eval_rec(x.scrut, env, fuel).get());
                if (!p) fail("eval: let-pair of non-pair");
                Env inner = env;
                inner[x.x] = p->l;
                inner[x.y] = p->r;
                return eval_rec(x.body, inner, fuel);
            },
            [&](const EInl& x) -> ValuePtr { return vinl(eval_rec(x.e, env, fuel)); },
            [&](const EInr& x) -> ValuePtr { return vinr(eval_rec(x.e, env, fuel)); },
            [&](const ECase& x) -> ValuePtr {
                ValuePtr s = eval_rec(x.scrut, env, fuel);
                if (const auto* l = std::get_if<VInl>(s.get())) {
                    Env inner = env;
                    inner[x.x] = l->v;
                    return eval_rec(x.l, inner, fuel);
                }
                if (const auto* r = std::get_if<VInr>(s.get())) {
                    Env inner = env;
                    inner[x.y] = r->v;
                    return eval_rec(x.r, inner, fuel);
                }
                fail("eval: case scrutinee is neither inl nor inr");
            },
            [&](const EFold& x) -> ValuePtr { return vfold(eval_rec(x.e, env, fuel)); },
            [&](const EUnfold& x) -> ValuePtr {
                const auto* f = std::get_if<VFold>(eval_rec(x.e, env, fuel).get());
                if (!f) fail("eval: unfold of non-fold");
                return f->v;
            },
        },
        *e);
}

} // namespace

ValuePtr eval_expr(const ExprPtr& e, Fuel& fuel) {
    Env env;
    return eval_rec(e, env, fuel);
}

} // namespace intweave::target
