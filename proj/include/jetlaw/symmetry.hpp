#pragma once

#include "jetlaw/claws.hpp"

namespace jetlaw {

/// Characteristic of a generalized symmetry: one component per dependent
/// variable, in context declaration order.
struct Characteristic {
    std::vector<Expr> components;
};

/// Prolonged action X(e) = sum D_J(Q^alpha) * de/du^alpha_J.
Expr apply_prolonged(const Context& ctx, const Characteristic& q, const Expr& e);

/// Linearized symmetry condition X(A_mu)|_0 = 0 for every mu.
ClawReport check_symmetry(const PdeSystem& sys, const Characteristic& q,
                          const ProbeOptions& opts = {});

/// Q^alpha = eta^alpha - xi^i u^alpha_i.
Characteristic characteristic_from_point(const Context& ctx, const std::vector<Expr>& xi,
                                         const std::vector<Expr>& eta);

/// [Q1,Q2]^alpha = X1(Q2^alpha) - X2(Q1^alpha).
Characteristic bracket(const Context& ctx, const Characteristic& q1, const Characteristic& q2);

/// X(L) is a divergence.
ClawReport check_variational(const Context& ctx, const Expr& L, const Characteristic& q,
                             const ProbeOptions& opts = {});

struct NoetherReport {
    Verdict variational = Verdict::Unknown; // X(L) divergence?
    Verdict multiplier = Verdict::Unknown;  // Q . E(L) divergence?
    bool agree = false;
};

/// Noether 1 as a cross-check of two independent code paths: the variational
/// test and the multiplier test against the Euler-Lagrange expressions.
NoetherReport check_noether1(const Context& ctx, const Expr& L, const Characteristic& q,
                             const ProbeOptions& opts = {});

} // namespace jetlaw
