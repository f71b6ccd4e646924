#include "intweave/target.hpp"

#include <algorithm>
#include <cctype>
#include <functional>

namespace intweave::target {

void TargetProgram::add_def(FunctionDefinition def) {
    auto [it, fresh] = defs.emplace(def.name, std::move(def));
    if (!fresh) fail("duplicate definition for label " + it->first);
}

void TargetProgram::validate() const {
    auto distinct = [](const std::vector<Label>& xs, const char* what) {
        std::set<Label> seen;
        for (const auto& l : xs)
            if (!seen.insert(l).second) fail(std::string("duplicate ") + what + " label " + l);
    };
    distinct(entries, "entry");
    distinct(exits, "exit");
    for (const auto& l : exits)
        if (defs.count(l)) fail("exit label " + l + " has a definition");
    for (const auto& [name, def] : defs)
        if (name != def.name) fail("definition map key mismatch for " + name);
}

namespace {

TypePtr arg_type_of(const TargetProgram& p, const Label& l) {
    auto it = p.argTypes.find(l);
    if (it == p.argTypes.end()) throw TypeError("no argument type for label " + l);
    return p.dataEnv.resolve_type(it->second);
}

ExprPtr resolve_expr_types(const ExprPtr& e, const DataEnv& env) {
    return std::visit(
        overload{
            [&](const EAdd& x) { return eadd(resolve_expr_types(x.l, env), resolve_expr_types(x.r, env)); },
            [&](const EIsZero& x) { return eiszero(resolve_expr_types(x.e, env)); },
            [&](const EPair& x) { return epair(resolve_expr_types(x.l, env), resolve_expr_types(x.r, env)); },
            [&](const ELetPair& x) {
                return eletpair(resolve_expr_types(x.scrut, env), x.x, x.y, resolve_expr_types(x.body, env));
            },
            [&](const EInl& x) { return einl(resolve_expr_types(x.e, env)); },
            [&](const EInr& x) { return einr(resolve_expr_types(x.e, env)); },
            [&](const ECase& x) {
                return ecase(resolve_expr_types(x.scrut, env), x.x, resolve_expr_types(x.l, env), x.y,
                             resolve_expr_types(x.r, env));
            },
            [&](const EFold& x) { return efold(env.resolve_type(x.at), resolve_expr_types(x.e, env)); },
            [&](const EUnfold& x) { return eunfold(env.resolve_type(x.at), resolve_expr_types(x.e, env)); },
            [&](const auto&) { return e; },
        },
        *e);
}

// fill the holes left by inl/inr against the expected type and check
void check_against(const TypeCtx& ctx, const ExprPtr& e, const TypePtr& expected,
                   const std::string& where) {
    TypePtr got = typecheck_expr(ctx, e);
    // hole-tolerant comparison
    std::function<bool(const TypePtr&, const TypePtr&)> ok = [&](const TypePtr& a, const TypePtr& b) {
        const auto* v = std::get_if<TVar>(a.get());
        if (v && !v->name.empty() && v->name[0] == '?') return true;
        if (std::holds_alternative<TUnit>(*a)) return std::holds_alternative<TUnit>(*b);
        if (std::holds_alternative<TNat>(*a)) return std::holds_alternative<TNat>(*b);
        if (const auto* x = std::get_if<TProd>(a.get())) {
            const auto* y = std::get_if<TProd>(b.get());
            return y && ok(x->l, y->l) && ok(x->r, y->r);
        }
        if (const auto* x = std::get_if<TSum>(a.get())) {
            const auto* y = std::get_if<TSum>(b.get());
            return y && ok(x->l, y->l) && ok(x->r, y->r);
        }
        return type_equal(a, b);
    };
    if (!ok(got, expected))
        throw TypeError(where + ": has type " + show_type(got) + ", expected " + show_type(expected));
}

} // namespace

void typecheck_program(const TargetProgram& p) {
    p.validate();
    for (const auto& [name, def] : p.defs) {
        TypePtr paramT = arg_type_of(p, name);
        TypeCtx ctx{{def.param, paramT}};
        std::visit(overload{
                       [&](const DirectBody& b) {
                           check_against(ctx, resolve_expr_types(b.arg, p.dataEnv),
                                         arg_type_of(p, b.callee), "definition of " + name);
                       },
                       [&](const BranchBody& b) {
                           TypePtr st = typecheck_expr(ctx, resolve_expr_types(b.scrut, p.dataEnv));
                           const auto* s = std::get_if<TSum>(st.get());
                           if (!s)
                               throw TypeError("definition of " + name +
                                               ": case scrutinee is not a sum: " + show_type(st));
                           TypeCtx lctx = ctx;
                           lctx[b.lvar] = s->l;
                           check_against(lctx, resolve_expr_types(b.larg, p.dataEnv),
                                         arg_type_of(p, b.lcallee), "definition of " + name + " (inl)");
                           TypeCtx rctx = ctx;
                           rctx[b.rvar] = s->r;
                           check_against(rctx, resolve_expr_types(b.rarg, p.dataEnv),
                                         arg_type_of(p, b.rcallee), "definition of " + name + " (inr)");
                       },
                   },
                   def.body);
    }
}

std::optional<Call> step_call(const TargetProgram& p, const Call& call, Fuel& fuel) {
    auto it = p.defs.find(call.label);
    if (it == p.defs.end()) return std::nullopt;
    const FunctionDefinition& def = it->second;
    auto evalWith = [&](const ExprPtr& e, const std::string& var, const ValuePtr& v,
                        const std::string& var2, const ValuePtr& v2) {
        // branch variable first so it shadows the parameter on a name clash
        ExprPtr body = var2.empty() ? e : subst_expr(e, var2, value_to_expr(v2));
        body = subst_expr(body, var, value_to_expr(v));
        return eval_expr(body, fuel);
    };
    return std::visit(
        overload{
            [&](const DirectBody& b) -> std::optional<Call> {
                return Call{b.callee, evalWith(b.arg, def.param, call.value, "", nullptr)};
            },
            [&](const BranchBody& b) -> std::optional<Call> {
                ValuePtr s = evalWith(b.scrut, def.param, call.value, "", nullptr);
                if (const auto* l = std::get_if<VInl>(s.get()))
                    return Call{b.lcallee, evalWith(b.larg, def.param, call.value, b.lvar, l->v)};
                if (const auto* r = std::get_if<VInr>(s.get()))
                    return Call{b.rcallee, evalWith(b.rarg, def.param, call.value, b.rvar, r->v)};
                fail("step_call: case scrutinee is neither inl nor inr at " + call.label);
            },
        },
        def.body);
}

std::string CallTrace::dump() const {
    std::ostringstream out;
    for (const auto& c : calls) out << c.label << "(" << show_value(c.value) << ")\n";
    if (truncated) out << "... (truncated)\n";
    return out.str();
}

CallTrace run_trace(const TargetProgram& p, const Label& entry, const ValuePtr& input,
                    uint64_t maxSteps, uint64_t exprFuel) {
    if (std::find(p.entries.begin(), p.entries.end(), entry) == p.entries.end())
        fail("run_trace: " + entry + " is not an entry label");
    CallTrace trace;
    Call current{entry, input};
    trace.calls.push_back(current);
    for (uint64_t step = 0; step < maxSteps; ++step) {
        Fuel fuel{exprFuel};
        auto next = step_call(p, current, fuel);
        if (!next) return trace;
        current = *next;
        trace.calls.push_back(current);
    }
    trace.truncated = true;
    return trace;
}

// ------------------------------
// combinators
// ------------------------------

TargetProgram identity(const std::vector<TypePtr>& types) {
    TargetProgram p;
    for (size_t i = 0; i < types.size(); ++i) {
        Label l = "id" + std::to_string(i);
        p.entries.push_back(l);
        p.exits.push_back(l);
        p.argTypes[l] = types[i];
    }
    return p;
}

namespace {

FunctionDefinition rename_def(const FunctionDefinition& def,
                              const std::map<Label, Label>& ren) {
    auto rn = [&](const Label& l) {
        auto it = ren.find(l);
        return it == ren.end() ? l : it->second;
    };
    FunctionDefinition out = def;
    out.name = rn(def.name);
    std::visit(overload{
                   [&](DirectBody& b) { b.callee = rn(b.callee); },
                   [&](BranchBody& b) {
                       b.lcallee = rn(b.lcallee);
                       b.rcallee = rn(b.rcallee);
                   },
               },
               out.body);
    return out;
}

void merge_data_env(DataEnv& into, const DataEnv& from) {
    for (const auto& [name, t] : from.payload) into.declare(name, t);
}

} // namespace

TargetProgram compose(const TargetProgram& p, const TargetProgram& q) {
    if (p.exits.size() != q.entries.size())
        fail("compose: arity mismatch (" + std::to_string(p.exits.size()) + " exits vs " +
             std::to_string(q.entries.size()) + " entries)");
    for (size_t i = 0; i < p.exits.size(); ++i) {
        auto pt = p.argTypes.find(p.exits[i]);
        auto qt = q.argTypes.find(q.entries[i]);
        if (pt != p.argTypes.end() && qt != q.argTypes.end() &&
            !type_equal(p.dataEnv.resolve_type(pt->second), q.dataEnv.resolve_type(qt->second)))
            fail("compose: port " + std::to_string(i) + " type mismatch");
    }

    // rename Q so that its entries coincide with P's exits and nothing else clashes
    std::set<Label> taken;
    for (const auto& l : p.entries) taken.insert(l);
    for (const auto& l : p.exits) taken.insert(l);
    for (const auto& [l, d] : p.defs) taken.insert(l);
    for (const auto& [l, t] : p.argTypes) taken.insert(l);

    std::map<Label, Label> ren;
    for (size_t i = 0; i < q.entries.size(); ++i) ren[q.entries[i]] = p.exits[i];

    std::set<Label> qLabels;
    for (const auto& l : q.exits) qLabels.insert(l);
    for (const auto& [l, d] : q.defs) qLabels.insert(l);
    for (const auto& [l, t] : q.argTypes) qLabels.insert(l);
    int counter = 0;
    for (const auto& l : qLabels) {
        if (ren.count(l)) continue;
        Label candidate = l;
        while (taken.count(candidate)) candidate = l + "~" + std::to_string(counter++);
        ren[l] = candidate;
        taken.insert(candidate);
    }

    TargetProgram out;
    out.entries = p.entries;
    for (const auto& l : q.exits) out.exits.push_back(ren.at(l));
    out.defs = p.defs;
    for (const auto& [l, d] : q.defs) out.add_def(rename_def(d, ren));
    out.argTypes = p.argTypes;
    for (const auto& [l, t] : q.argTypes) {
        auto renamed = ren.at(l);
        auto it = out.argTypes.find(renamed);
        if (it == out.argTypes.end()) out.argTypes[renamed] = t;
    }
    out.dataEnv = p.dataEnv;
    merge_data_env(out.dataEnv, q.dataEnv);
    out.validate();
    return out;
}

TargetProgram tensor_exp(const TypePtr& a, const TargetProgram& p) {
    TargetProgram out;
    out.entries = p.entries;
    out.exits = p.exits;
    out.dataEnv = p.dataEnv;
    for (const auto& [l, t] : p.argTypes) out.argTypes[l] = tprod(a, t);
    for (const auto& [l, def] : p.defs) {
        FunctionDefinition nd;
        nd.name = def.name;
        std::string u = "$u";
        std::string x = def.param;
        std::string fresh = "$p";
        std::visit(
            overload{
                [&](const DirectBody& b) {
                    // f(u,x) = g(u, e)
                    nd.param = fresh;
                    nd.body = DirectBody{
                        b.callee, eletpair(evar(fresh), u, x, epair(evar(u), b.arg))};
                },
                [&](const BranchBody& b) {
                    // carry u through the scrutinee so both branches see it
                    nd.param = fresh;
                    ExprPtr scrut = eletpair(
                        evar(fresh), u, x,
                        ecase(b.scrut, "$l", einl(epair(evar(u), evar("$l"))), "$r",
                              einr(epair(evar(u), evar("$r")))));
                    // rebind the original parameter, then the branch variable
                    // (shadowing the parameter on a clash, as in step_call)
                    ExprPtr larg = eletpair(
                        evar(fresh), "$w", x,
                        eletpair(evar("$lp"), u, b.lvar, epair(evar(u), b.larg)));
                    ExprPtr rarg = eletpair(
                        evar(fresh), "$w", x,
                        eletpair(evar("$rp"), u, b.rvar, epair(evar(u), b.rarg)));
                    nd.body = BranchBody{scrut, "$lp", b.lcallee, larg, "$rp", b.rcallee, rarg};
                },
            },
            def.body);
        out.add_def(std::move(nd));
    }
    return out;
}

TargetProgram union_programs(const TargetProgram& p, const TargetProgram& q,
                             std::vector<Label> entries, std::vector<Label> exits) {
    TargetProgram out;
    out.entries = std::move(entries);
    out.exits = std::move(exits);
    out.defs = p.defs;
    for (const auto& [l, d] : q.defs) out.add_def(d);
    out.argTypes = p.argTypes;
    for (const auto& [l, t] : q.argTypes)
        if (!out.argTypes.count(l)) out.argTypes[l] = t;
    out.dataEnv = p.dataEnv;
    merge_data_env(out.dataEnv, q.dataEnv);
    out.validate();
    return out;
}

namespace {

std::optional<std::pair<size_t, ValuePtr>> run_to_exit(const TargetProgram& p, size_t port,
                                                       const ValuePtr& input, uint64_t maxSteps) {
    CallTrace t = run_trace(p, p.entries.at(port), input, maxSteps);
    if (t.truncated || t.calls.empty()) return std::nullopt;
    const Call& last = t.calls.back();
    auto it = std::find(p.exits.begin(), p.exits.end(), last.label);
    if (it == p.exits.end()) return std::nullopt; // halted on a dead label
    return std::make_pair(static_cast<size_t>(it - p.exits.begin()), last.value);
}

} // namespace

bool program_equal_bounded(const TargetProgram& p, const TargetProgram& q,
                           const std::vector<PortInput>& inputs, uint64_t maxSteps) {
    if (p.entries.size() != q.entries.size() || p.exits.size() != q.exits.size()) return false;
    for (const auto& in : inputs) {
        auto rp = run_to_exit(p, in.port, in.value, maxSteps);
        auto rq = run_to_exit(q, in.port, in.value, maxSteps);
        if (rp.has_value() != rq.has_value()) return false;
        if (rp && (rp->first != rq->first || !value_equal(rp->second, rq->second))) return false;
    }
    return true;
}

std::vector<ValuePtr> enumerate_values(const TypePtr& t, uint64_t natBound, int muDepth) {
    return std::visit(
        overload{
            [&](const TUnit&) { return std::vector<ValuePtr>{vunit()}; },
            [&](const TNat&) {
                std::vector<ValuePtr> out;
                for (uint64_t n = 0; n <= natBound; ++n) out.push_back(vnum(n));
                return out;
            },
            [&](const TProd& x) {
                std::vector<ValuePtr> out;
                for (const auto& l : enumerate_values(x.l, natBound, muDepth))
                    for (const auto& r : enumerate_values(x.r, natBound, muDepth))
                        out.push_back(vpair(l, r));
                return out;
            },
            [&](const TSum& x) {
                std::vector<ValuePtr> out;
                for (const auto& l : enumerate_values(x.l, natBound, muDepth)) out.push_back(vinl(l));
                for (const auto& r : enumerate_values(x.r, natBound, muDepth)) out.push_back(vinr(r));
                return out;
            },
            [&](const TMu&) {
                std::vector<ValuePtr> out;
                if (muDepth <= 0) return out;
                for (const auto& v : enumerate_values(unroll_mu(t), natBound, muDepth - 1))
                    out.push_back(vfold(v));
                return out;
            },
            [&](const TVar& x) -> std::vector<ValuePtr> { fail("enumerate_values: open type " + x.name); },
        },
        *t);
}

std::optional<ValuePtr> default_value(const TypePtr& t) {
    // least-fixpoint inhabitation: mu unrolls at most a few times before
    // either producing a witness or cycling through uninhabited bodies
    std::function<std::optional<ValuePtr>(const TypePtr&, int)> go =
        [&](const TypePtr& u, int depth) -> std::optional<ValuePtr> {
        if (depth > 32) return std::nullopt;
        return std::visit(
            overload{
                [&](const TUnit&) -> std::optional<ValuePtr> { return vunit(); },
                [&](const TNat&) -> std::optional<ValuePtr> { return vnum(0); },
                [&](const TProd& x) -> std::optional<ValuePtr> {
                    auto l = go(x.l, depth + 1);
                    if (!l) return std::nullopt;
                    auto r = go(x.r, depth + 1);
                    if (!r) return std::nullopt;
                    return vpair(*l, *r);
                },
                [&](const TSum& x) -> std::optional<ValuePtr> {
                    if (auto l = go(x.l, depth + 1)) return vinl(*l);
                    if (auto r = go(x.r, depth + 1)) return vinr(*r);
                    return std::nullopt;
                },
                [&](const TMu&) -> std::optional<ValuePtr> {
                    if (auto v = go(unroll_mu(u), depth + 1)) return vfold(*v);
                    return std::nullopt;
                },
                [&](const TVar&) -> std::optional<ValuePtr> { return std::nullopt; },
            },
            *u);
    };
    return go(t, 0);
}

} // namespace intweave::target
