#pragma once

#include "jetlaw/variational.hpp"

namespace jetlaw {

struct ShapeMismatch : SymbolicError {
    using SymbolicError::SymbolicError;
};
struct UnsupportedConstraintShape : SymbolicError {
    using SymbolicError::SymbolicError;
};

/// A (scalar-valued) conservation law: flux tuple when available, otherwise
/// just the divergence expression (flux reconstruction can fail while every
/// check on the scalar remains exact).
struct ConservationLaw {
    const Context* ctx = nullptr;
    std::optional<FluxVector> fluxes;
    std::optional<Expr> scalar;

    static ConservationLaw from_fluxes(FluxVector f);
    static ConservationLaw from_scalar(const Context& ctx, const Expr& div);

    Expr div() const;
    ConservationLaw operator-(const ConservationLaw& o) const;
};

struct Multiplier {
    std::vector<Expr> components; // one per system equation
};

/// Linear differential constraints  D^l_r g^r = 0  (rows l, function columns r).
struct ConstraintRow {
    std::string name;
    std::vector<std::pair<VarId, LinDiffOp>> entries;
};

struct ConstraintSet {
    std::vector<ConstraintRow> rows;

    bool empty() const { return rows.empty(); }
    bool touches(VarId fn) const;
    std::vector<VarId> functions() const;
    /// The constraints as an orthonomic system over the function symbols.
    PdeSystem to_system(const Context& ctx, const Ranking& ranking) const;
};

struct LambdaSolution {
    std::vector<Expr> components; // one per constraint row
};

// ---------------------------------------------------------------------------

struct ClawReport {
    Verdict verdict = Verdict::Unknown;
    std::vector<std::string> notes;
};

/// restricted_is_zero(Div F) under the system together with the constraint
/// system on arbitrary-function symbols.
ClawReport verify_cl(const PdeSystem& sys, const ConservationLaw& cl,
                     const ConstraintSet& cs = {}, const ProbeOptions& opts = {});

struct CharFormResult {
    Multiplier q;
    bool written_basis = true; // false: components refer to the monic A's
    std::vector<std::string> warnings;
};

/// Rewrite Div F in (x, parametric, [A]) coordinates and integrate by parts:
/// Q^mu = sum_J (-D)_J f^{mu,J}. Exact: the identity
/// Div F = Q.A + Div(P) is verified canonically.
CharFormResult characteristic_form(const PdeSystem& sys, const ConservationLaw& cl,
                                   const ConstraintSet& cs = {});

/// Q.A is a divergence; Euler variables are the dependent variables plus the
/// free (unconstrained, all-variable) function symbols appearing in Q.
ClawReport verify_multiplier(const PdeSystem& sys, const Multiplier& q,
                             const ConstraintSet& cs = {}, const ProbeOptions& opts = {});

struct TrivialityReport {
    bool trivial = false;
    Verdict certainty = Verdict::Unknown;
    std::vector<std::string> notes;
};

TrivialityReport is_trivial(const PdeSystem& sys, const ConservationLaw& cl,
                            const ConstraintSet& cs = {}, const ProbeOptions& opts = {});

TrivialityReport equivalent(const PdeSystem& sys, const ConservationLaw& a, const ConservationLaw& b,
                            const ConstraintSet& cs = {}, const ProbeOptions& opts = {});

/// Multiplier determining equations: E_alpha(Q.A) split by monomials in the
/// parametric derivatives that the unknown coefficient functions do not
/// depend on. Solving them is out of scope.
std::vector<Expr> determining_equations(const PdeSystem& sys, const Multiplier& ansatz,
                                        const std::vector<VarId>& unknowns);

/// Substitutes candidate expressions (in the unknowns' argument variables)
/// for the unknown functions of an ansatz or its determining equations.
Expr substitute_unknown(const Expr& e, VarId unknown, const Expr& solution);

/// Theorem-1 identity: for every column r,
///   E_{g^r}(C) + sum_l (D^l_r)^† lambda_l = 0   identically in (x,[u]);
/// free columns need E_{g^r}(C) = 0.
ClawReport bridge_verify(const PdeSystem& sys, const ConservationLaw& cl, const ConstraintSet& cs,
                         const LambdaSolution& lambda, const ProbeOptions& opts = {});

/// Solve the Theorem-1 identity for lambda when every constraint entry is a
/// single first-order term a(x) D_i; verified by bridge_verify.
LambdaSolution solve_lambda(const PdeSystem& sys, const ConservationLaw& cl, const ConstraintSet& cs);

/// C_lambda = lambda_l D^l_r g^r - g^r (D^l_r)^† lambda_l, with fluxes built
/// in closed form by integration by parts.
ConservationLaw construct_c_lambda(const Context& ctx, const ConstraintSet& cs,
                                   const LambdaSolution& lambda);

/// sum_mu ops^mu(A_mu as written) + extra == 0 identically.
ClawReport verify_syzygy(const PdeSystem& sys, const std::vector<LinDiffOp>& ops, const Expr& extra,
                         const ProbeOptions& opts = {});

struct FirstIntegral {
    Expr lambda;
    VarId direction;
    Verdict reduced; // restricted D_i lambda
};

/// Corollary-2 shape: a single nonzero flux component g*lambda with g not
/// depending on that direction; lambda is then a first integral.
FirstIntegral first_integral(const PdeSystem& sys, const ConservationLaw& cl,
                             const ConstraintSet& cs = {}, const ProbeOptions& opts = {});

} // namespace jetlaw
