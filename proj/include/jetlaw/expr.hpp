#pragma once

#include "jetlaw/multiindex.hpp"
#include "jetlaw/rational.hpp"

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>
#include <vector>

namespace jetlaw {

using KernelId = std::uint32_t;
struct RatFun;
class Context;

struct SymbolicError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct DomainError : SymbolicError {
    using SymbolicError::SymbolicError;
};
struct MissingAssignment : SymbolicError {
    using SymbolicError::SymbolicError;
};

enum class Verdict { ProvedZero, ProbablyZero, ProvedNonzero, Unknown };
const char* verdict_name(Verdict v);
/// Weakest of two verdicts, for aggregating several sub-checks.
Verdict verdict_combine(Verdict a, Verdict b);

struct ProbeOptions {
    std::uint64_t seed = 0;
    int points = 16;
    double tolerance = 1e-9;
    int resample_limit = 12;
};

/// Analytic stand-in for an opaque function during numeric evaluation:
/// value and derivatives of every order at a point.
using OpaqueInstance = std::function<double(int deriv_order, double x)>;

struct Assignment {
    std::map<KernelId, double> atom_values;
    std::map<VarId, OpaqueInstance> opaque_instances;
};

/// Immutable symbolic expression; construction canonicalizes eagerly, so two
/// Exprs compare equal iff their canonical forms coincide.
class Expr {
public:
    Expr(); // zero
    Expr(long n);
    Expr(const Rational& r);

    static Expr from_kernel(KernelId k);

    bool is_zero() const;
    bool is_one() const;
    bool is_rational() const;        // no kernels at all
    Rational rational_value() const; // pre: is_rational()

    friend Expr operator+(const Expr&, const Expr&);
    friend Expr operator-(const Expr&, const Expr&);
    friend Expr operator*(const Expr&, const Expr&);
    friend Expr operator/(const Expr&, const Expr&);
    Expr operator-() const;
    Expr& operator+=(const Expr& o);
    Expr& operator-=(const Expr& o);
    Expr& operator*=(const Expr& o);

    Expr pow(long e) const;
    Expr pow(const Rational& e) const; // rational exponents via root kernels

    bool operator==(const Expr& o) const;
    bool operator!=(const Expr& o) const { return !(*this == o); }

    std::string str() const;

    /// Formal partial derivative with respect to a primitive atom, with the
    /// chain rule through compound kernels (exp, roots, opaque applications).
    Expr partial(KernelId atom) const;
    /// Total derivative along independent variable xi.
    Expr total_derivative(VarId xi) const;
    Expr total_derivative(const MultiIndex& J) const;

    Expr substitute(const std::map<KernelId, Expr>& bindings) const;

    /// Kernels appearing at polynomial level (not descending into args).
    void collect_kernels(std::set<KernelId>& out) const;
    /// Primitive atoms, descending into compound-kernel arguments.
    void collect_atoms(std::set<KernelId>& out) const;
    bool depends_on(KernelId atom) const;

    double eval(const Assignment& a) const;
    /// Value plus a magnitude estimate (sum of |term| values) for relative
    /// zero-testing.
    std::pair<double, double> eval_with_scale(const Assignment& a) const;

    const RatFun& rep() const { return *rep_; }
    static Expr from_rep(RatFun rf);

private:
    std::shared_ptr<const RatFun> rep_;
};

Expr exp(const Expr& e);
Expr ln(const Expr& e);
Expr sin(const Expr& e);
Expr cos(const Expr& e);
Expr tan(const Expr& e);
Expr atan(const Expr& e);
Expr sqrt(const Expr& e);

struct IsZeroResult {
    Verdict verdict = Verdict::Unknown;
    std::string witness; // probe detail for reports
};
IsZeroResult is_zero(const Expr& e, const ProbeOptions& opts = {});

// ---------------------------------------------------------------------------
// Kernels (the atoms of the polynomial layer)
// ---------------------------------------------------------------------------

enum class KernelKind : std::uint8_t {
    Indep,   // independent variable x^i
    Jet,     // u^alpha_J
    FnDeriv, // derivative atom of a declared function symbol g(args)
    Const,   // named constant
    Prim,    // exp/ln/sin/cos/tan/atan applied to an Expr
    Root,    // radicand^(1/q), radicand a polynomial Expr
    Opaque,  // unary opaque function applied to an Expr, with primes
    Scale,   // internal homotopy parameter
    ACoord,  // internal characteristic-form coordinate D_K A_mu
};

enum class PrimFn : std::uint8_t { Exp, Ln, Sin, Cos, Tan, Atan };

struct KernelData {
    KernelKind kind;
    VarId sym = kNoVar;    // Indep/Jet/FnDeriv/Const/Opaque symbol
    MultiIndex idx;        // Jet: over indep ids; FnDeriv: over arg positions; ACoord: K
    PrimFn prim = PrimFn::Exp;
    std::shared_ptr<const Expr> arg; // Prim/Root/Opaque argument
    std::uint32_t primes = 0;        // Opaque
    std::uint32_t rootq = 1;         // Root
    std::uint32_t acoord_eq = 0;     // ACoord: equation index
    std::uint64_t acoord_tag = 0;    // ACoord: owning-system token
    std::string key;                 // canonical identity / ordering string
};

const KernelData& kernel(KernelId id);
/// Total order on kernels used for monomial layout and printing.
bool kernel_order_less(KernelId a, KernelId b);

// ---------------------------------------------------------------------------
// Declarations
// ---------------------------------------------------------------------------

enum class SymKind : std::uint8_t { Independent, Dependent, FnSymbol, OpaqueFn, ConstSym };

struct SymbolData {
    SymKind kind;
    std::string name;
    std::uint32_t ctx_id = 0;
    std::vector<VarId> args;                    // FnSymbol argument variables
    std::optional<Expr> opaque_rule;            // derivative of an opaque fn, in terms of `@`
    std::map<std::size_t, Expr> fn_arg_rules;   // FnSymbol: arg position -> derivative expr
};

const SymbolData& symbol(VarId id);

/// A declaration scope: independent/dependent variables, function symbols,
/// constants. Expressions built through different contexts never collide even
/// when names repeat.
class Context {
public:
    Context();
    Context(const Context&) = delete;
    Context& operator=(const Context&) = delete;

    VarId declare_independent(const std::string& name);
    VarId declare_dependent(const std::string& name);
    VarId declare_function(const std::string& name, const std::vector<VarId>& args);
    VarId declare_opaque(const std::string& name);
    VarId declare_constant(const std::string& name);

    void set_opaque_rule(VarId fn, const Expr& rule_in_placeholder);
    void set_function_rule(VarId fn, VarId arg_var, const Expr& rule);

    const std::vector<VarId>& independents() const { return indep_; }
    const std::vector<VarId>& dependents() const { return dep_; }
    const std::vector<VarId>& functions() const { return fns_; }
    const std::vector<VarId>& constants() const { return consts_; }

    VarId find(const std::string& name) const; // kNoVar if absent
    VarId placeholder() const { return placeholder_; }
    std::uint32_t id() const { return ctx_id_; }

    // Atom / application constructors.
    Expr indep(VarId v) const;
    Expr jet(VarId dep, const MultiIndex& J) const;
    Expr fn_deriv(VarId fn, const MultiIndex& counts) const;
    Expr constant(VarId c) const;
    Expr opaque_app(VarId fn, const Expr& arg, std::uint32_t primes = 0) const;
    Expr placeholder_expr() const;

    KernelId indep_kernel(VarId v) const;
    KernelId jet_kernel(VarId dep, const MultiIndex& J) const;
    KernelId fn_deriv_kernel(VarId fn, const MultiIndex& counts) const;
    KernelId const_kernel(VarId c) const;

    /// Dense view of a jet multi-index in this context's declaration order.
    std::vector<std::uint32_t> dense(const MultiIndex& J) const;
    MultiIndex from_dense(const std::vector<std::uint32_t>& e) const;

private:
    std::uint32_t ctx_id_;
    std::vector<VarId> indep_, dep_, fns_, consts_;
    std::map<std::string, VarId> by_name_;
    VarId placeholder_;
    VarId check_new(const std::string& name);
};

/// Internal homotopy parameter; a single process-wide kernel.
KernelId scale_kernel();
KernelId acoord_kernel(std::uint64_t tag, std::uint32_t eq, const MultiIndex& K);

/// D_i applied to a single primitive atom (the "bump" of the atom), e.g.
/// D_i u_J = u_{J+e_i}; D_i g = sum over matching argument slots.
Expr atom_total_derivative(KernelId atom, VarId xi);

std::string kernel_str(KernelId id);

} // namespace jetlaw
