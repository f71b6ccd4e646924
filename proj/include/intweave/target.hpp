#pragma once

// First-order target language: types with mu, expressions, call-by-value
// evaluation, tail-call function definitions, programs with entry/exit
// interfaces, call traces and the program combinators.

#include "intweave/common.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <variant>

namespace intweave::target {

// ------------------------------
// types
// ------------------------------

struct Type;
using TypePtr = std::shared_ptr<const Type>;

struct TVar { std::string name; };
struct TUnit {};
struct TNat {};
struct TProd { TypePtr l, r; };
struct TSum { TypePtr l, r; };
struct TMu { std::string var; TypePtr body; };

struct Type : std::variant<TVar, TUnit, TNat, TProd, TSum, TMu> {
    using variant::variant;
};

TypePtr tvar(const std::string& name);
TypePtr tunit();
TypePtr tnat();
TypePtr tprod(TypePtr l, TypePtr r);
TypePtr tsum(TypePtr l, TypePtr r);
TypePtr tmu(const std::string& var, TypePtr body);
TypePtr tlist(TypePtr elem); // mu a. unit + elem * a

// Structural equality up to renaming of mu binders.
bool type_equal(const TypePtr& a, const TypePtr& b);
TypePtr subst_type(const TypePtr& t, const std::string& var, const TypePtr& with);
TypePtr unroll_mu(const TypePtr& mu); // body[mu/var]
bool type_closed(const TypePtr& t);
void free_type_vars(const TypePtr& t, std::set<std::string>& out);

std::string show_type(const TypePtr& t);
TypePtr parse_type(const std::string& text);

// ------------------------------
// expressions and values
// ------------------------------

struct Expr;
using ExprPtr = std::shared_ptr<const Expr>;

struct EVar { std::string name; };
struct EUnit {};
struct ENum { uint64_t n; };
struct EAdd { ExprPtr l, r; };
struct EIsZero { ExprPtr e; };
struct EPair { ExprPtr l, r; };
struct ELetPair { ExprPtr scrut; std::string x, y; ExprPtr body; };
struct EInl { ExprPtr e; };
struct EInr { ExprPtr e; };
struct ECase { ExprPtr scrut; std::string x; ExprPtr l; std::string y; ExprPtr r; };
struct EFold { TypePtr at; ExprPtr e; };
struct EUnfold { TypePtr at; ExprPtr e; };

struct Expr : std::variant<EVar, EUnit, ENum, EAdd, EIsZero, EPair, ELetPair,
                           EInl, EInr, ECase, EFold, EUnfold> {
    using variant::variant;
};

ExprPtr evar(const std::string& name);
ExprPtr eunit();
ExprPtr enum_(uint64_t n);
ExprPtr eadd(ExprPtr l, ExprPtr r);
ExprPtr eiszero(ExprPtr e);
ExprPtr epair(ExprPtr l, ExprPtr r);
ExprPtr eletpair(ExprPtr scrut, const std::string& x, const std::string& y, ExprPtr body);
ExprPtr einl(ExprPtr e);
ExprPtr einr(ExprPtr e);
ExprPtr ecase(ExprPtr scrut, const std::string& x, ExprPtr l, const std::string& y, ExprPtr r);
ExprPtr efold(TypePtr at, ExprPtr e);
ExprPtr eunfold(TypePtr at, ExprPtr e);
ExprPtr subst_expr(const ExprPtr& e, const std::string& var, const ExprPtr& with);

std::string show_expr(const ExprPtr& e);
ExprPtr parse_expr(const std::string& text);

struct Value;
using ValuePtr = std::shared_ptr<const Value>;

struct VUnit {};
struct VNum { uint64_t n; };
struct VPair { ValuePtr l, r; };
struct VInl { ValuePtr v; };
struct VInr { ValuePtr v; };
struct VFold { ValuePtr v; };

struct Value : std::variant<VUnit, VNum, VPair, VInl, VInr, VFold> {
    using variant::variant;
};

ValuePtr vunit();
ValuePtr vnum(uint64_t n);
ValuePtr vpair(ValuePtr l, ValuePtr r);
ValuePtr vinl(ValuePtr v);
ValuePtr vinr(ValuePtr v);
ValuePtr vfold(ValuePtr v);

bool value_equal(const ValuePtr& a, const ValuePtr& b);
std::string show_value(const ValuePtr& v);
ValuePtr parse_value(const std::string& text);
ExprPtr value_to_expr(const ValuePtr& v);
bool value_has_type(const ValuePtr& v, const TypePtr& t);

// V(v): the multiset of numbers inside a value. Numbers collect, pairs
// union, everything else is empty.
std::multiset<uint64_t> value_multiset(const ValuePtr& v);

// ------------------------------
// expression typing and evaluation
// ------------------------------

using TypeCtx = std::map<std::string, TypePtr>;

TypePtr typecheck_expr(const TypeCtx& ctx, const ExprPtr& e);

struct Fuel {
    uint64_t left;
    void spend(const char* what) {
        if (left == 0) fail(std::string("fuel exhausted in ") + what);
        --left;
    }
};

ValuePtr eval_expr(const ExprPtr& e, Fuel& fuel);

// ------------------------------
// programs
// ------------------------------

using Label = std::string;

struct DirectBody { Label callee; ExprPtr arg; };
struct BranchBody {
    ExprPtr scrut;
    std::string lvar; Label lcallee; ExprPtr larg;
    std::string rvar; Label rcallee; ExprPtr rarg;
};

struct FunctionDefinition {
    Label name;
    std::string param;
    std::variant<DirectBody, BranchBody> body;
};

// Named single-constructor datatypes (the tau_l environment). Payload types
// may refer to other names through TVar; resolution closes recursive groups
// with mu.
struct DataEnv {
    std::map<std::string, TypePtr> payload;

    bool has(const std::string& name) const { return payload.count(name) != 0; }
    void declare(const std::string& name, TypePtr t);
    // Closed target type for a name; recursive groups are mu-bound at the
    // point of re-entry. With flatten=true, names outside any recursive
    // group resolve to their bare payload (no vacuous mu).
    TypePtr resolve(const std::string& name, bool flatten = false) const;
    // Replace every TVar naming a datatype inside t.
    TypePtr resolve_type(const TypePtr& t, bool flatten = false) const;
    // Names that are part of a recursive group (self- or mutually recursive).
    std::set<std::string> recursive_names() const;
    // Strongly connected components of size >= 2, or size 1 with a self-loop.
    std::vector<std::set<std::string>> recursive_groups() const;
};

struct TargetProgram {
    std::vector<Label> entries;
    std::vector<Label> exits;
    std::map<Label, FunctionDefinition> defs;
    std::map<Label, TypePtr> argTypes;
    DataEnv dataEnv;

    void add_def(FunctionDefinition def);
    void validate() const; // interface invariants (distinctness, exits undefined)
};

// Every definition typechecks against the (resolved) argTypes.
void typecheck_program(const TargetProgram& p);

struct Call {
    Label label;
    ValuePtr value;
};

// One ->_P step; nullopt when the label has no definition (exit or dead
// entry).
std::optional<Call> step_call(const TargetProgram& p, const Call& call, Fuel& fuel);

struct CallTrace {
    std::vector<Call> calls;
    bool truncated = false;

    std::string dump() const; // one label(value) per line
};

CallTrace run_trace(const TargetProgram& p, const Label& entry, const ValuePtr& input,
                    uint64_t maxSteps, uint64_t exprFuel = 1000000);

// ------------------------------
// combinators
// ------------------------------

TargetProgram identity(const std::vector<TypePtr>& types);
TargetProgram compose(const TargetProgram& p, const TargetProgram& q);
TargetProgram tensor_exp(const TypePtr& a, const TargetProgram& p);

// Union of definitions with interface chosen explicitly; used for the
// close-the-loop environment composition where exits of one part are defined
// by the other.
TargetProgram union_programs(const TargetProgram& p, const TargetProgram& q,
                             std::vector<Label> entries, std::vector<Label> exits);

struct PortInput {
    size_t port;
    ValuePtr value;
};

bool program_equal_bounded(const TargetProgram& p, const TargetProgram& q,
                           const std::vector<PortInput>& inputs, uint64_t maxSteps);

// All values of a closed type, nat restricted to 0..natBound and mu-types
// unrolled to muDepth.
std::vector<ValuePtr> enumerate_values(const TypePtr& t, uint64_t natBound = 9,
                                       int muDepth = 3);

std::optional<ValuePtr> default_value(const TypePtr& t); // nullopt if uninhabited

// ------------------------------
// retraction A <| B
// ------------------------------

struct Retraction {
    ExprPtr s; // x:A |- s : B
    ExprPtr r; // y:B |- r : A
};

std::optional<Retraction> retraction(const TypePtr& a, const TypePtr& b, int depth = 24);
bool retraction_check(const TypePtr& a, const Retraction& w, uint64_t natBound = 4,
                      int muDepth = 2);

// ------------------------------
// textual program format
// ------------------------------

std::string show_program(const TargetProgram& p);
TargetProgram parse_program(const std::string& text);
std::string show_dot(const TargetProgram& p);

} // namespace intweave::target
