#pragma once

// Internal interning helpers shared between kernel.cpp, poly.cpp and expr.cpp.

#include "jetlaw/expr.hpp"

namespace jetlaw::detail {

KernelId intern_kernel(KernelData&& kd);
KernelId intern_prim(PrimFn fn, const Expr& arg);
KernelId intern_root(const Expr& radicand, std::uint32_t q); // radicand: polynomial Expr
KernelId intern_opaque(VarId fn, const Expr& arg, std::uint32_t primes);

KernelId make_indep_kernel(VarId v);
KernelId make_jet_kernel(VarId dep, const MultiIndex& J);
KernelId make_fn_deriv_kernel(VarId fn, const MultiIndex& counts);
KernelId make_const_kernel(VarId c);

/// Function-symbol derivative atom with declared per-argument rules applied.
Expr fn_deriv_expr(VarId fn, const MultiIndex& counts);
/// Opaque application with the declared derivative rule expanded for primes > 0.
Expr opaque_app_expr(VarId fn, const Expr& arg, std::uint32_t primes);
/// p-th derivative function of an opaque symbol, evaluated at `arg`.
Expr opaque_derivative(VarId fn, const Expr& arg, std::uint32_t primes_now);

/// The `@` atom of a derivative-rule expression.
KernelId rule_placeholder_kernel(const Expr& rule);

SymbolData& symbol_mutable(VarId id);
VarId intern_symbol(SymbolData&& sd);

const char* prim_name(PrimFn f);

} // namespace jetlaw::detail
