#include "jetlaw/variational.hpp"

#include "jetlaw/poly.hpp"

#include <algorithm>

namespace jetlaw {

Expr& FluxVector::operator[](VarId v) {
    const auto& ind = ctx->independents();
    for (std::size_t i = 0; i < ind.size(); ++i)
        if (ind[i] == v) return components[i];
    throw SymbolicError("flux component for undeclared independent variable");
}

const Expr& FluxVector::at(VarId v) const { return const_cast<FluxVector*>(this)->operator[](v); }

Expr FluxVector::divergence() const {
    Expr d;
    const auto& ind = ctx->independents();
    for (std::size_t i = 0; i < ind.size(); ++i) d += components[i].total_derivative(ind[i]);
    return d;
}

FluxVector FluxVector::operator-(const FluxVector& o) const {
    FluxVector r(*ctx);
    for (std::size_t i = 0; i < components.size(); ++i) r.components[i] = components[i] - o.components[i];
    return r;
}

// ---------------------------------------------------------------------------

Expr euler(const Expr& e, VarId family) {
    std::set<KernelId> atoms;
    e.collect_atoms(atoms);
    Expr res;
    for (KernelId a : atoms) {
        auto dv = derived_of_kernel(a);
        if (!dv || dv->family != family) continue;
        Expr pd = e.partial(a);
        if (pd.is_zero()) continue;
        Expr term = pd.total_derivative(dv->J);
        if (dv->J.order() % 2) term = -term;
        res += term;
    }
    return res;
}

IsZeroResult is_divergence(const Expr& e, const std::vector<VarId>& families, const ProbeOptions& opts) {
    IsZeroResult acc{Verdict::ProvedZero, ""};
    for (VarId f : families) {
        IsZeroResult r = is_zero(euler(e, f), opts);
        acc.verdict = verdict_combine(acc.verdict, r.verdict);
        if (r.verdict != Verdict::ProvedZero)
            acc.witness += symbol(f).name + ": " + r.witness + "; ";
        if (acc.verdict == Verdict::ProvedNonzero) break;
    }
    return acc;
}

// ---------------------------------------------------------------------------

Expr pair_div(const Expr& a, const MultiIndex& J, const Expr& W, FluxVector& out) {
    if (J.empty()) return W;
    VarId i = J.entries().front().first;
    MultiIndex rest = J.minus(MultiIndex::unit(i));
    out[i] += a.total_derivative(rest) * W;
    return pair_div(a, rest, -W.total_derivative(i), out);
}

namespace {

struct FieldInfo {
    KernelId base;
    MultiIndex Js; // S-part of the derivative index
};

std::optional<FieldInfo> decompose_field(KernelId atom, const std::vector<VarId>& S) {
    auto dv = derived_of_kernel(atom);
    if (!dv) return std::nullopt;
    MultiIndex Js = dv->J.restrict_to(S);
    DerivedVar base{dv->family, dv->J.without(S)};
    return FieldInfo{kernel_of_derived(base), Js};
}

bool is_derived_atom(KernelId atom) { return derived_of_kernel(atom).has_value(); }

/// tau-scaled image of an expression: derived atoms a with nonzero S-part map
/// to tau*a; S-parametric atoms map to b0 + tau*(a - b0).
Expr scale_image(const Expr& e, const std::vector<VarId>& S, const Expr& b0, const Expr& tau) {
    std::set<KernelId> atoms;
    e.collect_atoms(atoms);
    std::map<KernelId, Expr> sub;
    for (KernelId a : atoms) {
        auto dv = derived_of_kernel(a);
        if (!dv) continue;
        Expr ae = Expr::from_kernel(a);
        if (dv->J.restrict_to(S).order() > 0)
            sub.emplace(a, tau * ae);
        else
            sub.emplace(a, b0 + tau * (ae - b0));
    }
    return e.substitute(sub);
}

/// integral over tau in (0,1] of an expression polynomial in the scale kernel.
Expr tau_integrate(const Expr& e) {
    KernelId tk = scale_kernel();
    const RatFun& rf = e.rep();
    if (rf.den.degree_of(tk) > 0)
        throw HomotopySingular("homotopy integrand is not polynomial in the scale parameter");
    std::set<KernelId> ks;
    e.collect_kernels(ks);
    for (KernelId k : ks) {
        const auto& kd = kernel(k);
        if (kd.kind == KernelKind::Prim || kd.kind == KernelKind::Root || kd.kind == KernelKind::Opaque) {
            if (kd.arg->depends_on(tk))
                throw HomotopySingular("homotopy integrand has transcendental scale dependence");
        }
    }
    Poly out;
    for (auto& [m, c] : rf.num.terms) {
        std::uint32_t d = m.degree_of(tk);
        Monomial m2;
        for (auto& [id, ee] : m.factors)
            if (id != tk) m2.factors.emplace_back(id, ee);
        poly_add_term(out, m2, c / Rational(d + 1));
    }
    RatFun res{out, rf.den};
    res.normalize();
    return Expr::from_rep(std::move(res));
}

/// Quadrature of a jet-free remainder in the direction `i0` (polynomial in
/// the explicit independent variable only).
Expr remainder_quadrature(const Context& ctx, const Expr& r, VarId i0) {
    KernelId xk = ctx.indep_kernel(i0);
    const RatFun& rf = r.rep();
    if (rf.den.degree_of(xk) > 0)
        throw HomotopySingular("basepoint remainder is not polynomial in " + symbol(i0).name);
    std::set<KernelId> ks;
    r.collect_kernels(ks);
    for (KernelId k : ks) {
        const auto& kd = kernel(k);
        if ((kd.kind == KernelKind::Prim || kd.kind == KernelKind::Root || kd.kind == KernelKind::Opaque) &&
            kd.arg->depends_on(xk))
            throw HomotopySingular("basepoint remainder has transcendental dependence on " + symbol(i0).name);
        if (kd.kind == KernelKind::Jet || kd.kind == KernelKind::FnDeriv)
            throw HomotopySingular("basepoint remainder still contains jet variables");
    }
    Poly out;
    for (auto& [m, c] : rf.num.terms) {
        std::uint32_t d = m.degree_of(xk);
        Monomial m2;
        bool placed = false;
        std::vector<std::pair<KernelId, std::uint32_t>> f;
        for (auto& [id, ee] : m.factors) {
            if (id == xk)
                f.emplace_back(id, ee + 1);
            else
                f.emplace_back(id, ee);
        }
        if (m.degree_of(xk) == 0) f.emplace_back(xk, 1);
        (void)placed;
        std::sort(f.begin(), f.end(), [](auto& x, auto& y) { return kernel_order_less(x.first, y.first); });
        m2.factors = f;
        poly_add_term(out, m2, c / Rational(d + 1));
    }
    RatFun res{out, rf.den};
    res.normalize();
    return Expr::from_rep(std::move(res));
}

} // namespace

FluxVector homotopy_fluxes(const Context& ctx, const Expr& e, const HomotopyOptions& opts) {
    std::vector<VarId> S = opts.directions.empty() ? ctx.independents() : opts.directions;
    Expr b0 = opts.basepoint ? Expr(*opts.basepoint) : Expr();
    Expr tau = Expr::from_kernel(scale_kernel());

    std::set<KernelId> atoms;
    e.collect_atoms(atoms);
    for (KernelId a : atoms) {
        const auto& kd = kernel(a);
        if (kd.kind == KernelKind::FnDeriv && !is_derived_atom(a))
            throw HomotopySingular("function of dependent variables blocks the scale homotopy: " +
                                   kernel_str(a));
        if (kd.kind == KernelKind::Scale)
            throw SymbolicError("expression already contains the scale parameter");
    }

    FluxVector P(ctx);

    // Pairing terms (D_J delta)*W, with W evaluated on the scaled fields; the
    // residuals sum to sum_b delta_b * E_b(e) scaled, which vanishes for an
    // S-divergence, so only the flux sides accumulate.
    for (KernelId a : atoms) {
        auto fi = decompose_field(a, S);
        if (!fi || fi->Js.order() == 0) continue;
        Expr W = e.partial(a);
        if (W.is_zero()) continue;
        Expr Ws = scale_image(W, S, b0, tau);
        Expr delta = Expr::from_kernel(fi->base) - b0;
        pair_div(delta, fi->Js, Ws, P);
    }

    FluxVector F(ctx);
    for (std::size_t i = 0; i < F.components.size(); ++i) {
        if (P.components[i].is_zero()) continue;
        F.components[i] = tau_integrate(P.components[i]);
    }

    // What is left over is the basepoint value e([b0]), a function of x
    // alone; it is absorbed by quadrature in the first direction.
    Expr div = F.divergence();
    Expr defect = e - div;
    if (!defect.is_zero()) {
        Expr nf = defect;
        // Whatever is left must be jet-free (a function of x alone).
        std::set<KernelId> datoms;
        nf.collect_atoms(datoms);
        bool jetfree = true;
        for (KernelId a : datoms)
            if (is_derived_atom(a)) jetfree = false;
        if (!jetfree)
            throw ReconstructionFailed("homotopy reconstruction defect is not a pure function of x: " +
                                       nf.str());
        F[S.front()] += remainder_quadrature(ctx, nf, S.front());
    }

    if (opts.verify) {
        Expr check = F.divergence() - e;
        if (!check.is_zero())
            throw ReconstructionFailed("homotopy roundtrip failed: Div F - e = " + check.str());
    }
    return F;
}

Expr invert_total_derivative(const Context& ctx, const Expr& e, VarId direction,
                             const std::optional<Rational>& basepoint) {
    HomotopyOptions opts;
    opts.directions = {direction};
    opts.basepoint = basepoint;
    opts.verify = false;
    FluxVector F = [&] {
        try {
            return homotopy_fluxes(ctx, e, opts);
        } catch (const HomotopySingular&) {
            throw;
        } catch (const ReconstructionFailed& ex) {
            throw NotExactDerivative(ex.what());
        }
    }();
    Expr lambda = F.at(direction);
    Expr check = lambda.total_derivative(direction) - e;
    if (!check.is_zero())
        throw NotExactDerivative("expression is not an exact D_" + symbol(direction).name +
                                 " derivative; defect: " + check.str());
    return lambda;
}

} // namespace jetlaw
