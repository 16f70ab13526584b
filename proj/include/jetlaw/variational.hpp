#pragma once

#include "jetlaw/linop.hpp"
#include "jetlaw/system.hpp"

namespace jetlaw {

struct HomotopySingular : SymbolicError {
    using SymbolicError::SymbolicError;
};
struct ReconstructionFailed : SymbolicError {
    using SymbolicError::SymbolicError;
};
struct NotExactDerivative : SymbolicError {
    using SymbolicError::SymbolicError;
};

/// Flux tuple (F^1,...,F^N), one component per independent variable of the
/// context, in declaration order.
struct FluxVector {
    const Context* ctx = nullptr;
    std::vector<Expr> components;

    explicit FluxVector(const Context& c) : ctx(&c), components(c.independents().size()) {}
    Expr& operator[](VarId v);
    const Expr& at(VarId v) const;
    Expr divergence() const;
    FluxVector operator-(const FluxVector& o) const;
};

/// Euler operator E_v with respect to a dependent variable or a declared
/// function symbol of independent variables.
Expr euler(const Expr& e, VarId family);

/// A function is a divergence iff every listed Euler operator annihilates it.
IsZeroResult is_divergence(const Expr& e, const std::vector<VarId>& families,
                           const ProbeOptions& opts = {});

/// (D_J a) * W = Div(P) + a * (-D)_J W; accumulates P into `out` and returns
/// the residual's W-side factor (-D)_J W.
Expr pair_div(const Expr& a, const MultiIndex& J, const Expr& W, FluxVector& out);

struct HomotopyOptions {
    std::vector<VarId> directions;       // empty: all independents
    std::optional<Rational> basepoint;   // affine-shift basepoint; default scale to 0
    bool verify = true;                  // exact Div-roundtrip postcheck
};

/// Scale-homotopy flux reconstruction restricted to a subset of directions:
/// returns F with sum_{i in S} D_i F^i = e. Requires e to be an S-divergence
/// (Euler-annihilated in the S-jet structure); the result is post-verified.
FluxVector homotopy_fluxes(const Context& ctx, const Expr& e, const HomotopyOptions& opts = {});

/// Inverse of a single total derivative: returns lambda with D_i lambda = e.
Expr invert_total_derivative(const Context& ctx, const Expr& e, VarId direction,
                             const std::optional<Rational>& basepoint = {});

} // namespace jetlaw
