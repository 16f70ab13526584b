#include "jetlaw/symmetry.hpp"

namespace jetlaw {

Expr apply_prolonged(const Context& ctx, const Characteristic& q, const Expr& e) {
    const auto& deps = ctx.dependents();
    if (q.components.size() != deps.size())
        throw ShapeMismatch("characteristic must have one component per dependent variable");
    std::set<KernelId> atoms;
    e.collect_atoms(atoms);
    Expr res;
    for (KernelId a : atoms) {
        auto dv = derived_of_kernel(a);
        if (!dv) continue;
        for (std::size_t al = 0; al < deps.size(); ++al) {
            if (dv->family != deps[al]) continue;
            Expr pd = e.partial(a);
            if (pd.is_zero()) break;
            res += q.components[al].total_derivative(dv->J) * pd;
            break;
        }
    }
    return res;
}

ClawReport check_symmetry(const PdeSystem& sys, const Characteristic& q, const ProbeOptions& opts) {
    ClawReport rep;
    rep.verdict = Verdict::ProvedZero;
    for (std::size_t mu = 0; mu < sys.equations().size(); ++mu) {
        Expr xa = apply_prolonged(sys.ctx(), q, sys.a_written(mu));
        auto r = sys.restricted_is_zero(xa, opts);
        rep.verdict = verdict_combine(rep.verdict, r.verdict);
        if (r.verdict != Verdict::ProvedZero)
            rep.notes.push_back("X(" + sys.equations()[mu].name + "): " + verdict_name(r.verdict));
        if (rep.verdict == Verdict::ProvedNonzero) break;
    }
    return rep;
}

Characteristic characteristic_from_point(const Context& ctx, const std::vector<Expr>& xi,
                                         const std::vector<Expr>& eta) {
    const auto& ind = ctx.independents();
    const auto& deps = ctx.dependents();
    if (xi.size() != ind.size() || eta.size() != deps.size())
        throw ShapeMismatch("characteristic_from_point: xi/eta arity mismatch");
    Characteristic q;
    for (std::size_t al = 0; al < deps.size(); ++al) {
        Expr c = eta[al];
        for (std::size_t i = 0; i < ind.size(); ++i)
            c -= xi[i] * ctx.jet(deps[al], MultiIndex::unit(ind[i]));
        q.components.push_back(c);
    }
    return q;
}

Characteristic bracket(const Context& ctx, const Characteristic& q1, const Characteristic& q2) {
    Characteristic out;
    for (std::size_t al = 0; al < ctx.dependents().size(); ++al)
        out.components.push_back(apply_prolonged(ctx, q1, q2.components[al]) -
                                 apply_prolonged(ctx, q2, q1.components[al]));
    return out;
}

ClawReport check_variational(const Context& ctx, const Expr& L, const Characteristic& q,
                             const ProbeOptions& opts) {
    ClawReport rep;
    Expr xl = apply_prolonged(ctx, q, L);
    auto r = is_divergence(xl, ctx.dependents(), opts);
    rep.verdict = r.verdict;
    if (!r.witness.empty()) rep.notes.push_back(r.witness);
    return rep;
}

NoetherReport check_noether1(const Context& ctx, const Expr& L, const Characteristic& q,
                             const ProbeOptions& opts) {
    NoetherReport rep;
    rep.variational = check_variational(ctx, L, q, opts).verdict;
    // Multiplier route: Q . E(L) must be a divergence.
    Expr qa;
    const auto& deps = ctx.dependents();
    for (std::size_t al = 0; al < deps.size(); ++al) qa += q.components[al] * euler(L, deps[al]);
    rep.multiplier = is_divergence(qa, deps, opts).verdict;
    auto truthy = [](Verdict v) { return v == Verdict::ProvedZero || v == Verdict::ProbablyZero; };
    rep.agree = truthy(rep.variational) == truthy(rep.multiplier);
    return rep;
}

} // namespace jetlaw
