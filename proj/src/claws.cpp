#include "jetlaw/claws.hpp"

#include "jetlaw/detail/intern.hpp"
#include "jetlaw/poly.hpp"

#include <algorithm>
#include <sstream>

namespace jetlaw {

// ---------------------------------------------------------------------------
// ConservationLaw / ConstraintSet
// ---------------------------------------------------------------------------

ConservationLaw ConservationLaw::from_fluxes(FluxVector f) {
    ConservationLaw cl;
    cl.ctx = f.ctx;
    cl.fluxes = std::move(f);
    return cl;
}

ConservationLaw ConservationLaw::from_scalar(const Context& ctx, const Expr& div) {
    ConservationLaw cl;
    cl.ctx = &ctx;
    cl.scalar = div;
    return cl;
}

Expr ConservationLaw::div() const {
    if (fluxes) return fluxes->divergence();
    if (scalar) return *scalar;
    return Expr();
}

ConservationLaw ConservationLaw::operator-(const ConservationLaw& o) const {
    if (fluxes && o.fluxes) return from_fluxes(*fluxes - *o.fluxes);
    return from_scalar(*ctx, div() - o.div());
}

bool ConstraintSet::touches(VarId fn) const {
    for (auto& row : rows)
        for (auto& [r, op] : row.entries)
            if (r == fn && !op.is_zero()) return true;
    return false;
}

std::vector<VarId> ConstraintSet::functions() const {
    std::vector<VarId> out;
    for (auto& row : rows)
        for (auto& [r, op] : row.entries)
            if (std::find(out.begin(), out.end(), r) == out.end()) out.push_back(r);
    return out;
}

PdeSystem ConstraintSet::to_system(const Context& ctx, const Ranking& ranking) const {
    PdeSystem sys(ctx, ranking);
    for (auto& row : rows) {
        Expr e;
        for (auto& [r, op] : row.entries) e += op.apply(detail::fn_deriv_expr(r, MultiIndex{}));
        if (e.is_zero()) continue; // row already satisfied by the declared arguments
        // solve for the highest-ranked function derivative present
        std::set<KernelId> atoms;
        e.collect_atoms(atoms);
        bool found = false;
        DerivedVar best;
        for (KernelId a : atoms) {
            auto dv = derived_of_kernel(a);
            if (!dv || symbol(dv->family).kind != SymKind::FnSymbol) continue;
            if (!found || ranking.less(best, *dv)) {
                best = *dv;
                found = true;
            }
        }
        if (!found) throw UnsupportedConstraintShape("constraint row " + row.name + " has no leading term");
        sys.add_written(e, best, row.name.empty() ? "constraint" : row.name);
    }
    sys.finalize();
    return sys;
}

// ---------------------------------------------------------------------------
// Helpers
// ---------------------------------------------------------------------------

namespace {

Expr fn_atom(VarId fn) { return detail::fn_deriv_expr(fn, MultiIndex{}); }

/// Families of declared function symbols occurring in e.
std::vector<VarId> fn_families(const Expr& e) {
    std::set<KernelId> atoms;
    e.collect_atoms(atoms);
    std::vector<VarId> out;
    for (KernelId a : atoms) {
        const auto& kd = kernel(a);
        if (kd.kind != KernelKind::FnDeriv) continue;
        if (std::find(out.begin(), out.end(), kd.sym) == out.end()) out.push_back(kd.sym);
    }
    return out;
}

bool fn_is_free(const Context& ctx, VarId fn, const ConstraintSet& cs) {
    if (cs.touches(fn)) return false;
    const auto& sd = symbol(fn);
    // free means: arbitrary function of all independent variables
    if (sd.args.size() != ctx.independents().size()) return false;
    for (VarId a : sd.args)
        if (symbol(a).kind != SymKind::Independent) return false;
    return true;
}

Expr reduce_by_constraints(const PdeSystem& sys, const ConstraintSet& cs, const Expr& e) {
    if (cs.empty()) return e;
    PdeSystem g = cs.to_system(sys.ctx(), sys.ranking());
    return g.normal_form(e);
}

} // namespace

// ---------------------------------------------------------------------------
// verify_cl
// ---------------------------------------------------------------------------

ClawReport verify_cl(const PdeSystem& sys, const ConservationLaw& cl, const ConstraintSet& cs,
                     const ProbeOptions& opts) {
    ClawReport rep;
    Expr c = reduce_by_constraints(sys, cs, cl.div());
    auto r = sys.restricted_is_zero(c, opts);
    rep.verdict = r.verdict;
    if (!r.witness.empty()) rep.notes.push_back(r.witness);
    return rep;
}

// ---------------------------------------------------------------------------
// characteristic form
// ---------------------------------------------------------------------------

namespace {

/// Solve M^T q_w = q_m over the expression field by Gaussian elimination.
bool solve_mix_transpose(const std::vector<std::vector<Expr>>& M, const std::vector<Expr>& qm,
                         std::vector<Expr>& qw) {
    std::size_t n = qm.size();
    // build A = M^T augmented with qm
    std::vector<std::vector<Expr>> A(n, std::vector<Expr>(n + 1));
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) A[i][j] = M[j][i];
        A[i][n] = qm[i];
    }
    std::vector<std::size_t> where(n, SIZE_MAX);
    std::size_t row = 0;
    for (std::size_t col = 0; col < n && row < n; ++col) {
        std::size_t piv = SIZE_MAX;
        for (std::size_t r = row; r < n; ++r)
            if (!A[r][col].is_zero()) {
                piv = r;
                break;
            }
        if (piv == SIZE_MAX) continue;
        std::swap(A[piv], A[row]);
        Expr d = A[row][col];
        for (std::size_t c = col; c <= n; ++c) A[row][c] = A[row][c] / d;
        for (std::size_t r = 0; r < n; ++r) {
            if (r == row || A[r][col].is_zero()) continue;
            Expr f = A[r][col];
            for (std::size_t c = col; c <= n; ++c) A[r][c] = A[r][c] - f * A[row][c];
        }
        where[col] = row;
        ++row;
    }
    qw.assign(n, Expr());
    for (std::size_t col = 0; col < n; ++col) {
        if (where[col] == SIZE_MAX) {
            // column never needed (no equation mentions it); q component 0
            continue;
        }
        qw[col] = A[where[col]][n];
    }
    // consistency: all remaining rows must be 0 = 0
    for (std::size_t r = row; r < n; ++r)
        if (!A[r][n].is_zero()) return false;
    return true;
}

} // namespace

CharFormResult characteristic_form(const PdeSystem& sys, const ConservationLaw& cl,
                                   const ConstraintSet& cs) {
    CharFormResult out;
    if (!sys.syzygies().empty())
        out.warnings.push_back(
            "SyzygyRedundancy: declared syzygies make the [A]-representation non-unique");

    Expr c = reduce_by_constraints(sys, cs, cl.div());

    // Rewrite in (x, parametric, [A]) coordinates: substitute, highest rank
    // first, u_{lead+K} -> $A_{mu,K} + D_K omega_mu.
    std::map<std::pair<std::size_t, MultiIndex>, Expr> omega_cache;
    auto omega_deriv = [&](std::size_t mu, const MultiIndex& K) {
        Expr base = sys.equations()[mu].omega;
        MultiIndex built;
        for (auto& [v, n] : K.entries()) {
            for (std::uint32_t i = 0; i < n; ++i) {
                built = built.bumped(v);
                auto it = omega_cache.find({mu, built});
                if (it != omega_cache.end()) {
                    base = it->second;
                } else {
                    base = base.total_derivative(v);
                    omega_cache.emplace(std::make_pair(mu, built), base);
                }
            }
        }
        return base;
    };

    Expr cur = c;
    for (int guard = 0;; ++guard) {
        if (guard > 20000) throw InvalidSystem("characteristic form rewrite did not terminate");
        std::set<KernelId> atoms;
        cur.collect_atoms(atoms);
        bool found = false;
        DerivedVar best;
        KernelId bestk = 0;
        PdeSystem::Principality bestp{Classification::Parametric, 0, {}};
        for (KernelId a : atoms) {
            auto dv = derived_of_kernel(a);
            if (!dv) continue;
            auto p = sys.classify(*dv);
            if (p.cls != Classification::Principal) continue;
            if (!found || sys.ranking().less(best, *dv)) {
                found = true;
                best = *dv;
                bestk = a;
                bestp = p;
            }
        }
        if (!found) break;
        Expr rep = Expr::from_kernel(acoord_kernel(sys.tag(), static_cast<std::uint32_t>(bestp.eq), bestp.K)) +
                   omega_deriv(bestp.eq, bestp.K);
        cur = cur.substitute({{bestk, rep}});
    }

    // Split off the [A] -> 0 part, which must vanish identically.
    std::set<KernelId> ks;
    cur.collect_kernels(ks);
    std::map<KernelId, Expr> tozero;
    std::vector<KernelId> acoords;
    for (KernelId k : ks) {
        if (kernel(k).kind == KernelKind::ACoord && kernel(k).acoord_tag == sys.tag()) {
            tozero.emplace(k, Expr());
            acoords.push_back(k);
        }
    }
    Expr c0 = cur.substitute(tozero);
    if (!c0.is_zero())
        out.warnings.push_back("characteristic form: part vanishing on solutions is nonzero: " + c0.str());
    Expr rest = cur - c0;

    // f^{mu,J} extraction: peel one $A factor per monomial.
    const RatFun& rf = rest.rep();
    for (KernelId k : acoords)
        if (rf.den.degree_of(k) > 0)
            throw SymbolicError("characteristic form: denominator depends on [A] coordinates");

    std::map<std::pair<std::size_t, MultiIndex>, Expr> fcoef;
    Expr den = Expr::from_rep(RatFun{rf.den, Poly::constant(Rational(1))});
    for (auto& [m, coef] : rf.num.terms) {
        KernelId apick = 0;
        bool has = false;
        for (auto& [id, e] : m.factors) {
            if (kernel(id).kind == KernelKind::ACoord && kernel(id).acoord_tag == sys.tag()) {
                if (!has || kernel_order_less(apick, id)) apick = id;
                has = true;
            }
        }
        if (!has) continue; // numerically zero piece already split off
        Poly mono;
        Monomial peeled;
        for (auto& [id, e] : m.factors) {
            std::uint32_t ee = (id == apick) ? e - 1 : e;
            if (ee) peeled.factors.emplace_back(id, ee);
        }
        Poly pm;
        pm.terms.emplace(peeled, coef);
        Expr fterm = Expr::from_rep(RatFun{pm, Poly::constant(Rational(1))}) / den;
        auto key = std::make_pair(static_cast<std::size_t>(kernel(apick).acoord_eq), kernel(apick).idx);
        auto it = fcoef.find(key);
        if (it == fcoef.end())
            fcoef.emplace(key, fterm);
        else
            it->second += fterm;
        (void)mono;
    }

    // Back-substitute the [A] coordinates and integrate by parts.
    std::map<KernelId, Expr> aback;
    for (KernelId k : acoords) {
        const auto& kd = kernel(k);
        aback.emplace(k, sys.a_monic(kd.acoord_eq).total_derivative(kd.idx));
    }
    std::vector<Expr> qm(sys.equations().size(), Expr());
    Expr residual_check = c;
    FluxVector P(sys.ctx());
    for (auto& [key, f] : fcoef) {
        Expr fb = f.substitute(aback);
        Expr term = fb.total_derivative(key.second);
        if (key.second.order() % 2) term = -term;
        qm[key.first] += term;
        // exactness bookkeeping: f * D_K A  =  Div P + (-D)_K(f) * A
        pair_div(sys.a_monic(key.first), key.second, fb, P);
        residual_check -= fb * sys.a_monic(key.first).total_derivative(key.second);
    }
    if (!residual_check.is_zero() && c0.is_zero())
        out.warnings.push_back("characteristic form: exact [A]-representation residual: " +
                               residual_check.str());

    if (sys.mix_zero_order()) {
        std::vector<Expr> qw;
        if (solve_mix_transpose(sys.mix(), qm, qw)) {
            out.q.components = std::move(qw);
            out.written_basis = true;
            return out;
        }
    }
    out.q.components = std::move(qm);
    out.written_basis = false;
    out.warnings.push_back("multiplier reported against the monic (inter-reduced) equations");
    return out;
}

// ---------------------------------------------------------------------------
// verify_multiplier
// ---------------------------------------------------------------------------

ClawReport verify_multiplier(const PdeSystem& sys, const Multiplier& q, const ConstraintSet& cs,
                             const ProbeOptions& opts) {
    ClawReport rep;
    if (q.components.size() != sys.equations().size())
        throw ShapeMismatch("multiplier has " + std::to_string(q.components.size()) + " components, system has " +
                            std::to_string(sys.equations().size()));
    Expr qa;
    for (std::size_t mu = 0; mu < q.components.size(); ++mu)
        qa += q.components[mu] * sys.a_written(mu);
    qa = reduce_by_constraints(sys, cs, qa);
    std::vector<VarId> eulers = sys.ctx().dependents();
    for (VarId fn : fn_families(qa))
        if (fn_is_free(sys.ctx(), fn, cs)) eulers.push_back(fn);
    // Divergence-on-the-constraint-submanifold test: the Euler expressions
    // are reduced by the constraint system before zero-testing (the
    // restricted total derivatives are nf o D on reduced g-linear input).
    rep.verdict = Verdict::ProvedZero;
    for (VarId v : eulers) {
        Expr e = reduce_by_constraints(sys, cs, euler(qa, v));
        auto r = is_zero(e, opts);
        rep.verdict = verdict_combine(rep.verdict, r.verdict);
        if (r.verdict != Verdict::ProvedZero)
            rep.notes.push_back("E_" + symbol(v).name + ": " + verdict_name(r.verdict) + " " + r.witness);
        if (rep.verdict == Verdict::ProvedNonzero) break;
    }
    return rep;
}

// ---------------------------------------------------------------------------
// triviality / equivalence
// ---------------------------------------------------------------------------

TrivialityReport is_trivial(const PdeSystem& sys, const ConservationLaw& cl, const ConstraintSet& cs,
                            const ProbeOptions& opts) {
    TrivialityReport rep;
    CharFormResult cf = characteristic_form(sys, cl, cs);
    rep.notes = cf.warnings;

    PdeSystem combined = cs.empty() ? sys : sys.combined_with(cs.to_system(sys.ctx(), sys.ranking()));

    Verdict all = Verdict::ProvedZero;
    std::vector<Expr> q0(cf.q.components.size());
    for (std::size_t i = 0; i < cf.q.components.size(); ++i) {
        q0[i] = combined.normal_form(cf.q.components[i]);
        all = verdict_combine(all, is_zero(q0[i], opts).verdict);
    }
    if (all == Verdict::ProvedZero || all == Verdict::ProbablyZero) {
        rep.trivial = true;
        rep.certainty = all;
        return rep;
    }

    // Mod declared syzygies: try to realize Q|_0 = (S^mu)^† h for a single h.
    for (auto& syz : sys.syzygies()) {
        std::size_t mu0 = SIZE_MAX;
        for (std::size_t mu = 0; mu < syz.ops.size(); ++mu) {
            if (syz.ops[mu].is_zero()) continue;
            if (syz.ops[mu].terms.size() == 1 && syz.ops[mu].terms[0].second.order() == 1 &&
                syz.ops[mu].terms[0].first.is_rational() && !q0[mu].is_zero()) {
                mu0 = mu;
                break;
            }
        }
        if (mu0 == SIZE_MAX) continue;
        // (c D_i)^† h = -c D_i h = q0  =>  h = invert(-q0/c, i)
        Rational cconst = syz.ops[mu0].terms[0].first.rational_value();
        VarId dir = syz.ops[mu0].terms[0].second.entries().front().first;
        Expr target = -q0[mu0] / Expr(cconst);
        Expr h;
        try {
            h = invert_total_derivative(sys.ctx(), target, dir);
        } catch (const SymbolicError&) {
            continue;
        }
        Verdict ok = Verdict::ProvedZero;
        for (std::size_t mu = 0; mu < q0.size(); ++mu) {
            Expr shifted = syz.ops[mu].adjoint().apply(h);
            Expr diff = combined.normal_form(q0[mu] - shifted);
            ok = verdict_combine(ok, is_zero(diff, opts).verdict);
        }
        if (ok == Verdict::ProvedZero || ok == Verdict::ProbablyZero) {
            rep.trivial = true;
            rep.certainty = ok;
            rep.notes.push_back("trivial modulo the declared syzygy " + syz.name);
            return rep;
        }
    }

    rep.trivial = false;
    rep.certainty = all;
    if (!sys.syzygies().empty())
        rep.notes.push_back("SyzygyRedundancy: nontrivial verdict in redundant [A]-coordinates");
    return rep;
}

TrivialityReport equivalent(const PdeSystem& sys, const ConservationLaw& a, const ConservationLaw& b,
                            const ConstraintSet& cs, const ProbeOptions& opts) {
    return is_trivial(sys, a - b, cs, opts);
}

// ---------------------------------------------------------------------------
// determining equations
// ---------------------------------------------------------------------------

std::vector<Expr> determining_equations(const PdeSystem& sys, const Multiplier& ansatz,
                                        const std::vector<VarId>& unknowns) {
    Expr qa;
    for (std::size_t mu = 0; mu < ansatz.components.size(); ++mu)
        qa += ansatz.components[mu] * sys.a_written(mu);

    // argument variables of the unknown coefficient functions
    std::set<VarId> arg_vars;
    for (VarId f : unknowns)
        for (VarId a : symbol(f).args) arg_vars.insert(a);

    std::vector<Expr> eqs;
    for (VarId dep : sys.ctx().dependents()) {
        Expr e = sys.normal_form(euler(qa, dep));
        if (e.is_zero()) continue;
        // split over monomials in derived atoms the unknowns cannot depend on
        std::set<KernelId> atoms;
        e.collect_atoms(atoms);
        std::vector<KernelId> split_vars;
        for (KernelId a : atoms) {
            auto dv = derived_of_kernel(a);
            if (!dv) continue;
            if (std::find(unknowns.begin(), unknowns.end(), dv->family) != unknowns.end()) continue;
            if (dv->J.empty() && arg_vars.count(dv->family)) continue; // e.g. u in q(x,t,u)
            split_vars.push_back(a);
        }
        const RatFun& rf = e.rep();
        bool den_ok = true;
        for (KernelId v : split_vars)
            if (rf.den.degree_of(v) > 0) den_ok = false;
        if (!den_ok) {
            eqs.push_back(e);
            continue;
        }
        std::map<Monomial, Poly, MonoLess> buckets;
        for (auto& [m, c] : rf.num.terms) {
            Monomial keym, restm;
            for (auto& [id, ee] : m.factors) {
                if (std::find(split_vars.begin(), split_vars.end(), id) != split_vars.end())
                    keym.factors.emplace_back(id, ee);
                else
                    restm.factors.emplace_back(id, ee);
            }
            poly_add_term(buckets[keym], restm, c);
        }
        Expr den = Expr::from_rep(RatFun{rf.den, Poly::constant(Rational(1))});
        for (auto& [keym, p] : buckets) {
            Expr eq = Expr::from_rep(RatFun{p, Poly::constant(Rational(1))}) / den;
            if (!eq.is_zero()) eqs.push_back(eq);
        }
    }
    return eqs;
}

Expr substitute_unknown(const Expr& e, VarId unknown, const Expr& solution) {
    const auto& sd = symbol(unknown);
    std::set<KernelId> atoms;
    e.collect_atoms(atoms);
    std::map<KernelId, Expr> sub;
    for (KernelId a : atoms) {
        const auto& kd = kernel(a);
        if (kd.kind != KernelKind::FnDeriv || kd.sym != unknown) continue;
        Expr val = solution;
        for (auto& [pos, n] : kd.idx.entries()) {
            VarId av = sd.args.at(pos);
            KernelId avk = symbol(av).kind == SymKind::Independent
                               ? detail::make_indep_kernel(av)
                               : detail::make_jet_kernel(av, MultiIndex{});
            for (std::uint32_t i = 0; i < n; ++i) val = val.partial(avk);
        }
        sub.emplace(a, val);
    }
    return e.substitute(sub);
}

// ---------------------------------------------------------------------------
// bridge: Theorem-1 machinery
// ---------------------------------------------------------------------------

namespace {

/// The Theorem-1 identity differentiates the characteristic form: a literal
/// divergence is annihilated by every E_{g^r}, so flux-form input is first
/// converted to Q.A.
Expr bridge_scalar(const PdeSystem& sys, const ConservationLaw& cl, const ConstraintSet& cs) {
    if (!cl.fluxes) return cl.div();
    CharFormResult cf = characteristic_form(sys, cl, cs);
    Expr c;
    for (std::size_t mu = 0; mu < cf.q.components.size(); ++mu) {
        Expr a = cf.written_basis ? sys.a_written(mu) : sys.a_monic(mu);
        c += cf.q.components[mu] * a;
    }
    return c;
}

} // namespace

ClawReport bridge_verify(const PdeSystem& sys, const ConservationLaw& cl, const ConstraintSet& cs,
                         const LambdaSolution& lambda, const ProbeOptions& opts) {
    ClawReport rep;
    rep.verdict = Verdict::ProvedZero;
    Expr c = bridge_scalar(sys, cl, cs);
    if (lambda.components.size() != cs.rows.size())
        throw ShapeMismatch("lambda has " + std::to_string(lambda.components.size()) + " components, " +
                            std::to_string(cs.rows.size()) + " constraint rows");

    std::vector<VarId> columns = cs.functions();
    for (VarId fn : fn_families(c))
        if (std::find(columns.begin(), columns.end(), fn) == columns.end()) columns.push_back(fn);

    for (VarId r : columns) {
        Expr t = euler(c, r);
        bool constrained = cs.touches(r);
        if (constrained) {
            for (std::size_t l = 0; l < cs.rows.size(); ++l) {
                for (auto& [fr, op] : cs.rows[l].entries) {
                    if (fr != r || op.is_zero()) continue;
                    t += op.adjoint().apply(lambda.components[l]);
                }
            }
        }
        auto v = is_zero(t, opts);
        rep.verdict = verdict_combine(rep.verdict, v.verdict);
        std::string nm = symbol(r).name;
        if (v.verdict != Verdict::ProvedZero)
            rep.notes.push_back((constrained ? "column " : "free column ") + nm + ": " +
                                verdict_name(v.verdict) + " (" + v.witness + ")");
    }
    return rep;
}

LambdaSolution solve_lambda(const PdeSystem& sys, const ConservationLaw& cl, const ConstraintSet& cs) {
    LambdaSolution lam;
    lam.components.assign(cs.rows.size(), Expr());
    std::vector<bool> solved(cs.rows.size(), false);
    Expr c = bridge_scalar(sys, cl, cs);

    auto row_entry = [&](std::size_t l, VarId r) -> const LinDiffOp* {
        for (auto& [fr, op] : cs.rows[l].entries)
            if (fr == r && !op.is_zero()) return &op;
        return nullptr;
    };

    for (VarId r : cs.functions()) {
        std::vector<std::size_t> touching;
        for (std::size_t l = 0; l < cs.rows.size(); ++l)
            if (row_entry(l, r)) touching.push_back(l);
        if (touching.empty()) continue;
        bool all_solved = true;
        for (auto l : touching) all_solved = all_solved && solved[l];
        if (all_solved) continue;

        Expr e = euler(c, r);
        std::vector<VarId> dirs;
        std::vector<std::size_t> unsolved;
        for (auto l : touching) {
            const LinDiffOp* op = row_entry(l, r);
            if (op->terms.size() != 1 || op->terms[0].second.order() != 1)
                throw UnsupportedConstraintShape(
                    "solve_lambda supports single first-order constraint entries only (row " +
                    cs.rows[l].name + ")");
            VarId dir = op->terms[0].second.entries().front().first;
            const Expr& a = op->terms[0].first;
            if (solved[l]) {
                // (a D_i)^† lam = -D_i(a lam): move the known part across
                e -= (a * lam.components[l]).total_derivative(dir);
                continue;
            }
            if (std::find(dirs.begin(), dirs.end(), dir) != dirs.end())
                throw UnsupportedConstraintShape("two unsolved constraint rows share direction D_" +
                                                 symbol(dir).name);
            dirs.push_back(dir);
            unsolved.push_back(l);
        }
        if (unsolved.empty()) continue;

        HomotopyOptions h;
        h.directions = dirs;
        FluxVector F = homotopy_fluxes(sys.ctx(), e, h);
        for (std::size_t k = 0; k < unsolved.size(); ++k) {
            std::size_t l = unsolved[k];
            const LinDiffOp* op = row_entry(l, r);
            lam.components[l] = F.at(dirs[k]) / op->terms[0].first;
            solved[l] = true;
        }
    }
    return lam;
}

ConservationLaw construct_c_lambda(const Context& ctx, const ConstraintSet& cs,
                                   const LambdaSolution& lambda) {
    FluxVector F(ctx);
    for (std::size_t l = 0; l < cs.rows.size(); ++l) {
        for (auto& [r, op] : cs.rows[l].entries) {
            Expr g = fn_atom(r);
            for (auto& [a, K] : op.terms) {
                // lambda a D_K g - g (-D)_K(a lambda) = Div(pair)
                pair_div(g, K, a * lambda.components[l], F);
            }
        }
    }
    return ConservationLaw::from_fluxes(std::move(F));
}

ClawReport verify_syzygy(const PdeSystem& sys, const std::vector<LinDiffOp>& ops, const Expr& extra,
                         const ProbeOptions& opts) {
    ClawReport rep;
    Expr e = extra;
    for (std::size_t mu = 0; mu < ops.size() && mu < sys.equations().size(); ++mu)
        e += ops[mu].apply(sys.a_written(mu));
    auto r = is_zero(e, opts);
    rep.verdict = r.verdict;
    if (r.verdict != Verdict::ProvedZero) rep.notes.push_back(r.witness);
    return rep;
}

FirstIntegral first_integral(const PdeSystem& sys, const ConservationLaw& cl, const ConstraintSet& cs,
                             const ProbeOptions& opts) {
    if (!cl.fluxes) throw ShapeMismatch("first_integral needs explicit fluxes");
    const auto& ind = sys.ctx().independents();
    VarId dir = kNoVar;
    for (std::size_t i = 0; i < ind.size(); ++i) {
        if (cl.fluxes->components[i].is_zero()) continue;
        if (dir != kNoVar) throw ShapeMismatch("more than one nonzero flux component");
        dir = ind[i];
    }
    if (dir == kNoVar) throw ShapeMismatch("zero conservation law");
    Expr f = cl.fluxes->at(dir);

    // locate the arbitrary-function factor g
    std::vector<VarId> fams = fn_families(f);
    VarId g = kNoVar;
    for (VarId r : fams) {
        const auto& sd = symbol(r);
        bool dep_on_dir = false;
        for (VarId a : sd.args)
            if (a == dir) dep_on_dir = true;
        if (!dep_on_dir || [&] {
                // or an explicit constraint row D_dir g = 0
                for (auto& row : cs.rows)
                    for (auto& [fr, op] : row.entries)
                        if (fr == r && op.terms.size() == 1 && op.terms[0].second == MultiIndex::unit(dir))
                            return true;
                return false;
            }()) {
            g = r;
            break;
        }
    }
    if (g == kNoVar) throw ShapeMismatch("flux has no admissible arbitrary-function factor");

    Expr lambda = f / fn_atom(g);
    std::set<KernelId> atoms;
    lambda.collect_atoms(atoms);
    for (KernelId a : atoms)
        if (kernel(a).kind == KernelKind::FnDeriv && kernel(a).sym == g)
            throw ShapeMismatch("flux is not of the g*lambda shape");

    FirstIntegral out{lambda, dir, Verdict::Unknown};
    out.reduced = sys.restricted_is_zero(lambda.total_derivative(dir), opts).verdict;
    return out;
}

} // namespace jetlaw
