#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include "jetlaw/expr.hpp"
#include "jetlaw/poly.hpp"
#include "jetlaw/system.hpp"

#include <cmath>

using namespace jetlaw;

namespace {

struct Ws {
    Context ctx;
    VarId x, t, u, v;
    Ws() {
        x = ctx.declare_independent("x");
        t = ctx.declare_independent("t");
        u = ctx.declare_dependent("u");
        v = ctx.declare_dependent("v");
    }
    Expr jet(VarId d, std::initializer_list<std::pair<VarId, std::uint32_t>> idx) {
        return ctx.jet(d, MultiIndex::from_pairs(idx));
    }
    Expr U() { return ctx.jet(u, {}); }
    Expr Ux() { return jet(u, {{x, 1}}); }
    Expr Ut() { return jet(u, {{t, 1}}); }
    Expr Uxx() { return jet(u, {{x, 2}}); }
    Expr Uxt() { return jet(u, {{x, 1}, {t, 1}}); }
    Expr V() { return ctx.jet(v, {}); }
    Expr Vx() { return jet(v, {{x, 1}}); }
};

// Deterministic pseudo-random expression over low-order jets of u, v.
Expr random_expr(Ws& w, std::uint64_t& state, int size) {
    auto next = [&]() {
        state = state * 6364136223846793005ULL + 1442695040888963407ULL;
        return state >> 33;
    };
    std::vector<Expr> atoms = {w.U(), w.Ux(), w.Ut(), w.Uxx(), w.V(), w.Vx(),
                               w.ctx.indep(w.x), w.ctx.indep(w.t)};
    Expr e(static_cast<long>(next() % 5));
    for (int i = 0; i < size; ++i) {
        Expr a = atoms[next() % atoms.size()];
        switch (next() % 4) {
            case 0: e += a; break;
            case 1: e = e * a; break;
            case 2: e -= Expr(static_cast<long>(1 + next() % 3)) * a; break;
            case 3: e += a.pow(static_cast<long>(1 + next() % 2)); break;
        }
    }
    return e;
}

} // namespace

TEST_CASE("canonicalization basics") {
    Ws w;
    CHECK((w.Ux() + w.Ux() - Expr(2) * w.Ux()).is_zero());
    Expr a = exp(Expr(2) * w.U() - w.V());
    Expr b = exp(w.V() - Expr(2) * w.U());
    CHECK((a * b).is_one());
    Expr s = w.Ux().pow(2) + w.V().pow(2);
    CHECK((s / s).is_one());
    // canonical forms are idempotent by construction: e - e == 0 always
    std::uint64_t st = 42;
    for (int i = 0; i < 40; ++i) {
        Expr e = random_expr(w, st, 6);
        CHECK((e - e).is_zero());
    }
}

TEST_CASE("rational powers and roots") {
    Ws w;
    CHECK(Expr(4).pow(Rational(1, 2)) == Expr(2));
    Expr s = sqrt(w.Ux().pow(2) + w.V().pow(2));
    CHECK(s * s == w.Ux().pow(2) + w.V().pow(2));
    // sqrt of a monomial square factor extracts
    CHECK(sqrt(Expr(4) * w.U().pow(2) * w.V()) == Expr(2) * w.U() * sqrt(w.V()));
    // rationalized radicand: sqrt(a/b^2) = sqrt(a)/b
    Expr r = (w.V() / w.Ux().pow(2)).pow(Rational(1, 2));
    CHECK(r == sqrt(w.V()) / w.Ux());
    // denominator rationalization makes 1/sqrt exact-comparable
    Expr inv = Expr(1) / s;
    CHECK((inv - s / (w.Ux().pow(2) + w.V().pow(2))).is_zero());
}

TEST_CASE("odd/even argument normalization") {
    Ws w;
    CHECK(atan(-w.Ux()) == -atan(w.Ux()));
    CHECK(cos(-w.Ux()) == cos(w.Ux()));
    CHECK(sin(-w.Ux()) == -sin(w.Ux()));
}

TEST_CASE("partial derivatives") {
    Ws w;
    CHECK(w.Ux().partial(w.ctx.jet_kernel(w.u, MultiIndex::from_pairs({{w.x, 1}}))) == Expr(1));
    Expr e = w.Ux() * w.Ut();
    CHECK(e.partial(w.ctx.jet_kernel(w.u, MultiIndex::from_pairs({{w.x, 1}}))) == w.Ut());
    Expr g = exp(Expr(2) * w.U() - w.V());
    CHECK(g.partial(w.ctx.jet_kernel(w.u, MultiIndex{})) == Expr(2) * g);
}

TEST_CASE("total derivatives") {
    Ws w;
    CHECK(w.U().total_derivative(w.x) == w.Ux());
    Expr g = exp(Expr(2) * w.U() - w.V());
    Expr dt = g.total_derivative(w.t);
    Expr expect = (Expr(2) * w.Ut() - w.ctx.jet(w.v, MultiIndex::unit(w.t))) * g;
    CHECK((dt - expect).is_zero());
    // multi-index composition & the trivial case
    CHECK(w.U().total_derivative(MultiIndex{}) == w.U());
    CHECK(w.U().total_derivative(MultiIndex::from_pairs({{w.x, 2}})) == w.Uxx());
    // Leibniz on a product via repeated singles
    Expr p = w.U() * w.V();
    Expr dxt = p.total_derivative(MultiIndex::from_pairs({{w.x, 1}, {w.t, 1}}));
    Expr expect2 = w.Uxt() * w.V() + w.Ux() * w.V().total_derivative(w.t) +
                   w.Ut() * w.Vx() + w.U() * w.V().total_derivative(MultiIndex::from_pairs({{w.x, 1}, {w.t, 1}}));
    CHECK((dxt - expect2).is_zero());
}

TEST_CASE("commutation and Leibniz properties") {
    Ws w;
    std::uint64_t st = 7;
    for (int i = 0; i < 50; ++i) {
        Expr e = random_expr(w, st, 5);
        Expr c = e.total_derivative(w.x).total_derivative(w.t) -
                 e.total_derivative(w.t).total_derivative(w.x);
        CHECK(c.is_zero());
    }
    for (int i = 0; i < 30; ++i) {
        Expr e = random_expr(w, st, 4), f = random_expr(w, st, 4);
        Expr r = (e * f).total_derivative(w.x) - e.total_derivative(w.x) * f -
                 e * f.total_derivative(w.x);
        CHECK(r.is_zero());
    }
}

TEST_CASE("opaque functions") {
    Ws w;
    VarId psi = w.ctx.declare_opaque("Psi");
    Expr p = w.ctx.opaque_app(psi, w.Ux());
    KernelId uxk = w.ctx.jet_kernel(w.u, MultiIndex::unit(w.x));
    Expr d = p.partial(uxk);
    CHECK(d == w.ctx.opaque_app(psi, w.Ux(), 1));
    // primes accumulate
    CHECK(d.partial(uxk) == w.ctx.opaque_app(psi, w.Ux(), 2));
    // numeric check against finite differences with an instantiated Psi
    Assignment a;
    a.atom_values[uxk] = 0.7;
    a.opaque_instances[psi] = [](int k, double s) {
        switch (k) {
            case 0: return std::sin(s) + s * s;
            case 1: return std::cos(s) + 2 * s;
            case 2: return -std::sin(s) + 2;
            default: return 0.0;
        }
    };
    double lhs = d.eval(a);
    double h = 1e-6;
    Assignment ap = a, am = a;
    ap.atom_values[uxk] = 0.7 + h;
    am.atom_values[uxk] = 0.7 - h;
    double fd = (p.eval(ap) - p.eval(am)) / (2 * h);
    CHECK(std::fabs(lhs - fd) < 1e-6 * std::max(1.0, std::fabs(lhs)));
}

TEST_CASE("opaque derivative rule") {
    Context ctx;
    VarId x = ctx.declare_independent("x");
    (void)x;
    VarId u = ctx.declare_dependent("u");
    VarId mu = ctx.declare_constant("mu");
    VarId psi = ctx.declare_opaque("Psi");
    VarId phi = ctx.declare_opaque("Phi");
    Expr at = ctx.placeholder_expr();
    ctx.set_opaque_rule(phi, exp(ctx.constant(mu) * ctx.opaque_app(psi, at)) / ctx.constant(mu));
    Expr uu = ctx.jet(u, MultiIndex{});
    Expr dphi = ctx.opaque_app(phi, uu, 1);
    Expr expect = exp(ctx.constant(mu) * ctx.opaque_app(psi, uu)) / ctx.constant(mu);
    CHECK((dphi - expect).is_zero());
    // the rule is applied uniformly by total derivatives
    Expr dx = ctx.opaque_app(phi, uu).total_derivative(x);
    Expr ux = ctx.jet(u, MultiIndex::unit(x));
    CHECK((dx - expect * ux).is_zero());
}

TEST_CASE("function symbols of independent variables") {
    Context ctx;
    VarId x = ctx.declare_independent("x");
    VarId t = ctx.declare_independent("t");
    VarId g = ctx.declare_function("g", {t});
    Expr ge = ctx.fn_deriv(g, MultiIndex{});
    CHECK(ge.total_derivative(x).is_zero());
    Expr gt = ge.total_derivative(t);
    CHECK(gt == ctx.fn_deriv(g, MultiIndex::unit(0)));
    // declared directional rule: D_t Phi = kappa
    VarId kappa = ctx.declare_function("kappa", {t});
    VarId phi = ctx.declare_function("Phi", {t});
    ctx.set_function_rule(phi, t, ctx.fn_deriv(kappa, MultiIndex{}));
    Expr dphi = ctx.fn_deriv(phi, MultiIndex{}).total_derivative(t);
    CHECK(dphi == ctx.fn_deriv(kappa, MultiIndex{}));
    Expr ddphi = ctx.fn_deriv(phi, MultiIndex{}).total_derivative(t).total_derivative(t);
    CHECK(ddphi == ctx.fn_deriv(kappa, MultiIndex::unit(0)));
}

TEST_CASE("functions of a dependent variable") {
    Ws w;
    VarId g = w.ctx.declare_function("g", {w.u});
    Expr ge = w.ctx.fn_deriv(g, MultiIndex{});
    Expr dx = ge.total_derivative(w.x);
    CHECK(dx == w.ctx.fn_deriv(g, MultiIndex::unit(0)) * w.Ux());
}

TEST_CASE("substitution") {
    Ws w;
    KernelId uxk = w.ctx.jet_kernel(w.u, MultiIndex::unit(w.x));
    Expr e = w.Ux().pow(2);
    Expr r = e.substitute({{uxk, Expr(1) / w.V()}});
    CHECK(r == Expr(1) / w.V().pow(2));
    // substitution reaches inside kernel arguments
    Expr f = exp(w.Ux());
    CHECK(f.substitute({{uxk, w.Ut()}}) == exp(w.Ut()));
    CHECK(e.substitute({}) == e);
}

TEST_CASE("numeric evaluation") {
    Ws w;
    KernelId uxk = w.ctx.jet_kernel(w.u, MultiIndex::unit(w.x));
    KernelId uyk = w.ctx.jet_kernel(w.v, MultiIndex{});
    Assignment a;
    a.atom_values[uxk] = 3.0;
    CHECK(w.Ux().pow(2).eval(a) == doctest::Approx(9.0));
    Expr at = atan(w.V() / w.Ux());
    a.atom_values[uxk] = 1.0;
    a.atom_values[uyk] = 1.0;
    CHECK(at.eval(a) == doctest::Approx(std::atan(1.0)));
    // eval agrees for e and its expanded forms on random expressions
    std::uint64_t st = 11;
    for (int i = 0; i < 100; ++i) {
        Expr e = random_expr(w, st, 5);
        Expr f = e * Expr(3) / Expr(3) + (e - e);
        std::set<KernelId> atoms;
        e.collect_atoms(atoms);
        Assignment asg;
        double val = 0.3;
        for (KernelId k : atoms) {
            asg.atom_values[k] = val;
            val += 0.17;
        }
        CHECK(std::fabs(e.eval(asg) - f.eval(asg)) < 1e-9 * std::max(1.0, std::fabs(e.eval(asg))));
    }
}

TEST_CASE("is_zero verdicts") {
    Ws w;
    CHECK(is_zero(w.Ux() - w.Ux()).verdict == Verdict::ProvedZero);
    CHECK(is_zero(w.Ux() * w.Ut() - w.Ut() * w.Ux() + Expr(1)).verdict == Verdict::ProvedNonzero);
    Expr pyth = sin(w.U()).pow(2) + cos(w.U()).pow(2) - Expr(1);
    auto r = is_zero(pyth);
    CHECK(r.verdict == Verdict::ProbablyZero);
    CHECK(is_zero(w.Ux() - w.Ut()).verdict == Verdict::ProvedNonzero);
}

TEST_CASE("printing round-trips through canonical forms") {
    Ws w;
    Expr e = Expr(2) * w.Ux() * w.Uxt() + w.U().pow(3) / Expr(2);
    CHECK(e.str() == e.str());
    CHECK(!e.str().empty());
}
