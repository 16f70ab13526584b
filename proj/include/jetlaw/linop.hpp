#pragma once

#include "jetlaw/expr.hpp"

namespace jetlaw {

/// Linear total-differential operator  sum_K a_K(x,[u]) D_K.
struct LinDiffOp {
    std::vector<std::pair<Expr, MultiIndex>> terms;

    static LinDiffOp zero() { return {}; }
    static LinDiffOp single(const Expr& coeff, const MultiIndex& K) {
        LinDiffOp op;
        if (!coeff.is_zero()) op.terms.emplace_back(coeff, K);
        return op;
    }

    bool is_zero() const { return terms.empty(); }

    Expr apply(const Expr& e) const;

    /// Formal adjoint: (a D_K)^† = (-D)_K ∘ a, expanded by the Leibniz rule
    /// back into sum_L b_L D_L form.
    LinDiffOp adjoint() const;

    LinDiffOp operator+(const LinDiffOp& o) const;
    LinDiffOp scaled(const Expr& c) const;
    /// Merge equal multi-indices, drop zero coefficients; canonical term order.
    void normalize();

    bool operator==(const LinDiffOp& o) const;
    std::string str(const Context& ctx) const;
};

/// Multi-index binomial coefficient prod_i C(K_i, L_i); pre: L <= K.
Rational multi_binomial(const MultiIndex& K, const MultiIndex& L);
/// All L with 0 <= L <= K (componentwise).
std::vector<MultiIndex> sub_multi_indices(const MultiIndex& K);

} // namespace jetlaw
