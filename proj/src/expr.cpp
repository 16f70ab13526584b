#include "jetlaw/expr.hpp"

#include "jetlaw/detail/intern.hpp"
#include "jetlaw/poly.hpp"

#include <cmath>

namespace jetlaw {

const char* verdict_name(Verdict v) {
    switch (v) {
        case Verdict::ProvedZero: return "proved-zero";
        case Verdict::ProbablyZero: return "probably-zero";
        case Verdict::ProvedNonzero: return "proved-nonzero";
        case Verdict::Unknown: return "unknown";
    }
    return "?";
}

Verdict verdict_combine(Verdict a, Verdict b) {
    if (a == Verdict::ProvedNonzero || b == Verdict::ProvedNonzero) return Verdict::ProvedNonzero;
    if (a == Verdict::Unknown || b == Verdict::Unknown) return Verdict::Unknown;
    if (a == Verdict::ProbablyZero || b == Verdict::ProbablyZero) return Verdict::ProbablyZero;
    return Verdict::ProvedZero;
}

// ---------------------------------------------------------------------------
// Construction
// ---------------------------------------------------------------------------

namespace {
std::shared_ptr<const RatFun> share(RatFun rf) { return std::make_shared<const RatFun>(std::move(rf)); }
} // namespace

Expr::Expr() : rep_(share(RatFun::zero())) {}
Expr::Expr(long n) : rep_(share(RatFun::constant(Rational(n)))) {}
Expr::Expr(const Rational& r) : rep_(share(RatFun::constant(r))) {}

Expr Expr::from_kernel(KernelId k) {
    RatFun rf = RatFun::variable(k);
    rf.normalize();
    return from_rep(std::move(rf));
}

Expr Expr::from_rep(RatFun rf) {
    Expr e;
    e.rep_ = share(std::move(rf));
    return e;
}

bool Expr::is_zero() const { return rep_->is_zero(); }

bool Expr::is_one() const {
    return rep_->den.is_constant() && rep_->num.is_constant() && !rep_->num.is_zero() &&
           rep_->num.constant_value() / rep_->den.constant_value() == 1;
}

bool Expr::is_rational() const { return rep_->num.is_constant() && rep_->den.is_constant(); }

Rational Expr::rational_value() const {
    if (!is_rational()) throw SymbolicError("rational_value of non-constant expression");
    if (rep_->num.is_zero()) return Rational(0);
    return rep_->num.constant_value() / rep_->den.constant_value();
}

Expr operator+(const Expr& a, const Expr& b) { return Expr::from_rep(rf_add(a.rep(), b.rep())); }
Expr operator-(const Expr& a, const Expr& b) { return Expr::from_rep(rf_sub(a.rep(), b.rep())); }
Expr operator*(const Expr& a, const Expr& b) {
    if (a.is_zero() || b.is_zero()) return Expr();
    return Expr::from_rep(rf_mul(a.rep(), b.rep()));
}
Expr operator/(const Expr& a, const Expr& b) { return Expr::from_rep(rf_div(a.rep(), b.rep())); }
Expr Expr::operator-() const { return Expr::from_rep(rf_neg(rep())); }
Expr& Expr::operator+=(const Expr& o) { return *this = *this + o; }
Expr& Expr::operator-=(const Expr& o) { return *this = *this - o; }
Expr& Expr::operator*=(const Expr& o) { return *this = *this * o; }

Expr Expr::pow(long e) const {
    if (e == 0) return Expr(1L);
    return Expr::from_rep(rf_pow(rep(), e));
}

bool Expr::operator==(const Expr& o) const {
    if (rep_ == o.rep_) return true;
    return *rep_ == *o.rep_;
}

std::string Expr::str() const { return ratfun_str(*rep_); }

// ---------------------------------------------------------------------------
// Functions
// ---------------------------------------------------------------------------

namespace {

/// Canonical sign of an expression: sign of the leading numerator coefficient.
bool leading_negative(const Expr& e) {
    if (e.is_zero()) return false;
    return e.rep().num.leading().second < 0;
}

bool exact_root(const Integer& n, std::uint32_t q, Integer& out) {
    if (n < 0) return false;
    if (n == 0 || n == 1) {
        out = n;
        return true;
    }
    Integer lo = 1, hi = n;
    while (lo < hi) {
        Integer mid = (lo + hi + 1) / 2;
        Integer p = 1;
        bool over = false;
        for (std::uint32_t i = 0; i < q; ++i) {
            p *= mid;
            if (p > n) {
                over = true;
                break;
            }
        }
        if (over)
            hi = mid - 1;
        else
            lo = mid;
    }
    Integer p = 1;
    for (std::uint32_t i = 0; i < q; ++i) p *= lo;
    if (p == n) {
        out = lo;
        return true;
    }
    return false;
}

/// radicand^(1/q) for a polynomial radicand; extracts rational and monomial
/// square factors when q == 2 (a principal-branch convention).
Expr make_root(Expr radicand, std::uint32_t q) {
    if (radicand.is_zero()) return Expr();
    if (radicand.is_rational()) {
        Rational v = radicand.rational_value();
        if (v < 0) {
            if (q % 2 == 1) return -make_root(Expr(-v), q);
            throw DomainError("even root of negative constant");
        }
        Integer rn, rd;
        if (exact_root(rat_num(v), q, rn) && exact_root(rat_den(v), q, rd))
            return Expr(Rational(rn, rd));
        if (q == 2) {
            Integer sn = square_part(rat_num(v)), sd = square_part(rat_den(v));
            if (sn != 1 || sd != 1) {
                Rational outside(sn, sd);
                Rational inside = v / (outside * outside);
                return Expr(outside) * make_root(Expr(inside), 2);
            }
        }
        return Expr::from_kernel(detail::intern_root(radicand, q));
    }

    // Rationalize the radicand: (P/Q)^(1/q) = (P*Q^(q-1))^(1/q)/Q.
    const RatFun& rf = radicand.rep();
    if (!rf.den.is_constant()) {
        Expr den = Expr::from_rep(RatFun{rf.den, Poly::constant(Rational(1))});
        Expr pol = Expr::from_rep(RatFun{rf.num * rf.den.pow(q - 1), Poly::constant(Rational(1))});
        return make_root(pol, q) / den;
    }

    Expr outside(1L);
    if (q == 2) {
        // Monomial square factors common to all terms.
        Poly p = rf.num.mul_rat(Rational(1) / rf.den.constant_value());
        Monomial common = p.terms.begin()->first;
        for (auto& [m, c] : p.terms) {
            std::vector<std::pair<KernelId, std::uint32_t>> f;
            for (auto& [id, e] : common.factors) {
                std::uint32_t o = m.degree_of(id);
                if (o && e) f.emplace_back(id, std::min(e, o));
            }
            common.factors = f;
        }
        Poly sq;
        std::vector<std::pair<KernelId, std::uint32_t>> halves;
        for (auto& [id, e] : common.factors)
            if (e >= 2) halves.emplace_back(id, e / 2);
        if (!halves.empty()) {
            Expr half(1L);
            for (auto& [id, h] : halves) half = half * Expr::from_kernel(id).pow(h);
            Expr inner = radicand / (half * half);
            return half * make_root(inner, 2);
        }
        // Rational content square part.
        Integer gn = 0, gd = 1;
        for (auto& [m, c] : p.terms) {
            gn = boost::multiprecision::gcd(gn, rat_num(c) < 0 ? Integer(-rat_num(c)) : rat_num(c));
            gd = boost::multiprecision::lcm(gd, rat_den(c));
        }
        if (gn != 0) {
            Rational content(gn, gd);
            Integer sn = square_part(rat_num(content)), sd = square_part(rat_den(content));
            if (sn != 1 || sd != 1) {
                Rational half(sn, sd);
                Expr inner = radicand / Expr(half * half);
                return Expr(half) * make_root(inner, 2);
            }
        }
    }
    return outside * Expr::from_kernel(detail::intern_root(radicand, q));
}

} // namespace

Expr Expr::pow(const Rational& e) const {
    Integer n = rat_num(e), d = rat_den(e);
    if (d == 1) return pow(static_cast<long>(n));
    if (d > 16) throw SymbolicError("rational exponent with denominator > 16");
    std::uint32_t q = static_cast<std::uint32_t>(d);
    // e = whole + p/q with 0 <= p < q
    Integer whole = n / d;
    Integer p = n - whole * d;
    if (p < 0) {
        p += d;
        whole -= 1;
    }
    Expr root = make_root(*this, q);
    Expr r = root.pow(static_cast<long>(p));
    if (whole != 0) r = r * this->pow(static_cast<long>(whole));
    return r;
}

Expr exp(const Expr& e) {
    if (e.is_zero()) return Expr(1L);
    return Expr::from_kernel(detail::intern_prim(PrimFn::Exp, e));
}

Expr ln(const Expr& e) {
    if (e.is_one()) return Expr();
    if (e.is_zero()) throw DomainError("ln(0)");
    return Expr::from_kernel(detail::intern_prim(PrimFn::Ln, e));
}

Expr sin(const Expr& e) {
    if (e.is_zero()) return Expr();
    if (leading_negative(e)) return -sin(-e);
    return Expr::from_kernel(detail::intern_prim(PrimFn::Sin, e));
}

Expr cos(const Expr& e) {
    if (e.is_zero()) return Expr(1L);
    if (leading_negative(e)) return cos(-e);
    return Expr::from_kernel(detail::intern_prim(PrimFn::Cos, e));
}

Expr tan(const Expr& e) {
    if (e.is_zero()) return Expr();
    if (leading_negative(e)) return -tan(-e);
    return Expr::from_kernel(detail::intern_prim(PrimFn::Tan, e));
}

Expr atan(const Expr& e) {
    if (e.is_zero()) return Expr();
    if (leading_negative(e)) return -atan(-e);
    return Expr::from_kernel(detail::intern_prim(PrimFn::Atan, e));
}

Expr sqrt(const Expr& e) { return e.pow(Rational(1, 2)); }

// ---------------------------------------------------------------------------
// Declared-function applications
// ---------------------------------------------------------------------------

namespace detail {

KernelId rule_placeholder_kernel(const Expr& rule) {
    std::set<KernelId> atoms;
    rule.collect_atoms(atoms);
    for (KernelId k : atoms) {
        const auto& kd = kernel(k);
        if (kd.kind == KernelKind::Const && symbol(kd.sym).name == "@") return k;
    }
    throw SymbolicError("opaque derivative rule has no '@' placeholder");
}
namespace {
KernelId rule_placeholder(const Expr& rule) { return rule_placeholder_kernel(rule); }
} // namespace

Expr opaque_derivative(VarId fn, const Expr& arg, std::uint32_t primes_now) {
    const auto& sd = symbol(fn);
    if (sd.opaque_rule) {
        // f' is given by a rule; the (primes_now+1)-th derivative is the rule
        // differentiated primes_now times in its argument, then evaluated.
        Expr g = *sd.opaque_rule;
        KernelId ph = rule_placeholder(g);
        for (std::uint32_t i = 0; i < primes_now; ++i) g = g.partial(ph);
        std::map<KernelId, Expr> sub{{ph, arg}};
        return g.substitute(sub);
    }
    return Expr::from_kernel(intern_opaque(fn, arg, primes_now + 1));
}

Expr opaque_app_expr(VarId fn, const Expr& arg, std::uint32_t primes) {
    const auto& sd = symbol(fn);
    if (sd.kind != SymKind::OpaqueFn) throw SymbolicError("not an opaque function: " + sd.name);
    if (primes > 0 && sd.opaque_rule) return opaque_derivative(fn, arg, primes - 1);
    return Expr::from_kernel(intern_opaque(fn, arg, primes));
}

Expr fn_deriv_expr(VarId fn, const MultiIndex& counts) {
    const auto& sd = symbol(fn);
    for (auto& [pos, rule] : sd.fn_arg_rules) {
        if (counts.get(static_cast<VarId>(pos)) == 0) continue;
        if (counts.order() == 1) return rule;
        MultiIndex sub = counts.minus(MultiIndex::unit(static_cast<VarId>(pos)));
        Expr below = fn_deriv_expr(fn, sub);
        VarId argvar = sd.args.at(pos);
        if (symbol(argvar).kind == SymKind::Independent) return below.total_derivative(argvar);
        return below.partial(make_jet_kernel(argvar, MultiIndex{}));
    }
    return Expr::from_kernel(make_fn_deriv_kernel(fn, counts));
}

} // namespace detail

Expr Context::fn_deriv(VarId fn, const MultiIndex& counts) const { return detail::fn_deriv_expr(fn, counts); }
Expr Context::opaque_app(VarId fn, const Expr& arg, std::uint32_t primes) const {
    return detail::opaque_app_expr(fn, arg, primes);
}

// ---------------------------------------------------------------------------
// Differentiation
// ---------------------------------------------------------------------------

namespace {

/// d(kernel)/d(atom) including the chain rule through compound kernels.
Expr kernel_partial(KernelId k, KernelId atom) {
    if (k == atom) return Expr(1L);
    const auto& kd = kernel(k);
    switch (kd.kind) {
        case KernelKind::Indep:
        case KernelKind::Jet:
        case KernelKind::FnDeriv:
        case KernelKind::Const:
        case KernelKind::Scale:
        case KernelKind::ACoord:
            return Expr();
        case KernelKind::Prim: {
            Expr darg = kd.arg->partial(atom);
            if (darg.is_zero()) return Expr();
            switch (kd.prim) {
                case PrimFn::Exp: return Expr::from_kernel(k) * darg;
                case PrimFn::Ln: return darg / (*kd.arg);
                case PrimFn::Sin: return cos(*kd.arg) * darg;
                case PrimFn::Cos: return -sin(*kd.arg) * darg;
                case PrimFn::Tan: return (Expr(1L) + Expr::from_kernel(k).pow(2L)) * darg;
                case PrimFn::Atan: return darg / (Expr(1L) + kd.arg->pow(2L));
            }
            return Expr();
        }
        case KernelKind::Root: {
            Expr darg = kd.arg->partial(atom);
            if (darg.is_zero()) return Expr();
            // d r = (1/q) r^(1-q) d(base) = (1/q) r d(base)/base
            return Expr(Rational(1, kd.rootq)) * Expr::from_kernel(k) * darg / (*kd.arg);
        }
        case KernelKind::Opaque: {
            Expr darg = kd.arg->partial(atom);
            if (darg.is_zero()) return Expr();
            return detail::opaque_derivative(kd.sym, *kd.arg, kd.primes) * darg;
        }
    }
    return Expr();
}

} // namespace

Expr Expr::partial(KernelId atom) const {
    std::set<KernelId> ks;
    collect_kernels(ks);
    Expr res;
    const RatFun& rf = rep();
    for (KernelId k : ks) {
        Expr dk = kernel_partial(k, atom);
        if (dk.is_zero()) continue;
        // d(P/Q)/dk = (P'Q - PQ')/Q^2 with formal polynomial derivatives.
        Poly pn = rf.num.formal_derivative(k);
        Poly pd = rf.den.formal_derivative(k);
        RatFun formal{pn * rf.den - rf.num * pd, rf.den * rf.den};
        formal.normalize();
        res += Expr::from_rep(std::move(formal)) * dk;
    }
    return res;
}

Expr atom_total_derivative(KernelId atom, VarId xi) {
    const auto& kd = kernel(atom);
    switch (kd.kind) {
        case KernelKind::Indep:
            return kd.sym == xi ? Expr(1L) : Expr();
        case KernelKind::Jet:
            return Expr::from_kernel(detail::make_jet_kernel(kd.sym, kd.idx.bumped(xi)));
        case KernelKind::FnDeriv: {
            const auto& sd = symbol(kd.sym);
            Expr res;
            for (std::size_t p = 0; p < sd.args.size(); ++p) {
                VarId av = sd.args[p];
                const auto& asd = symbol(av);
                if (asd.kind == SymKind::Independent) {
                    if (av == xi)
                        res += detail::fn_deriv_expr(kd.sym, kd.idx.bumped(static_cast<VarId>(p)));
                } else {
                    res += detail::fn_deriv_expr(kd.sym, kd.idx.bumped(static_cast<VarId>(p))) *
                           Expr::from_kernel(detail::make_jet_kernel(av, MultiIndex::unit(xi)));
                }
            }
            return res;
        }
        case KernelKind::Const:
        case KernelKind::Scale:
            return Expr();
        case KernelKind::ACoord:
            return Expr::from_kernel(acoord_kernel(kd.acoord_tag, kd.acoord_eq, kd.idx.bumped(xi)));
        default:
            throw SymbolicError("atom_total_derivative on compound kernel");
    }
}

Expr Expr::total_derivative(VarId xi) const {
    std::set<KernelId> atoms;
    collect_atoms(atoms);
    Expr res;
    for (KernelId a : atoms) {
        Expr bump = atom_total_derivative(a, xi);
        if (bump.is_zero()) continue;
        Expr pd = partial(a);
        if (pd.is_zero()) continue;
        res += pd * bump;
    }
    return res;
}

Expr Expr::total_derivative(const MultiIndex& J) const {
    Expr e = *this;
    for (auto& [v, n] : J.entries())
        for (std::uint32_t i = 0; i < n; ++i) e = e.total_derivative(v);
    return e;
}

// ---------------------------------------------------------------------------
// Substitution and atom collection
// ---------------------------------------------------------------------------

void Expr::collect_kernels(std::set<KernelId>& out) const {
    rep().num.collect_kernels(out);
    rep().den.collect_kernels(out);
}

void Expr::collect_atoms(std::set<KernelId>& out) const {
    std::set<KernelId> ks;
    collect_kernels(ks);
    for (KernelId k : ks) {
        const auto& kd = kernel(k);
        switch (kd.kind) {
            case KernelKind::Prim:
            case KernelKind::Root:
            case KernelKind::Opaque:
                kd.arg->collect_atoms(out);
                break;
            default:
                out.insert(k);
        }
    }
}

bool Expr::depends_on(KernelId atom) const {
    std::set<KernelId> atoms;
    collect_atoms(atoms);
    return atoms.count(atom) > 0;
}

Expr Expr::substitute(const std::map<KernelId, Expr>& bindings) const {
    if (bindings.empty()) return *this;
    std::set<KernelId> ks;
    collect_kernels(ks);
    std::map<KernelId, Expr> repl;
    for (KernelId k : ks) {
        auto it = bindings.find(k);
        if (it != bindings.end()) {
            repl.emplace(k, it->second);
            continue;
        }
        const auto& kd = kernel(k);
        if (kd.kind == KernelKind::Prim || kd.kind == KernelKind::Root || kd.kind == KernelKind::Opaque) {
            Expr na = kd.arg->substitute(bindings);
            if (na == *kd.arg) continue;
            switch (kd.kind) {
                case KernelKind::Prim:
                    switch (kd.prim) {
                        case PrimFn::Exp: repl.emplace(k, jetlaw::exp(na)); break;
                        case PrimFn::Ln: repl.emplace(k, jetlaw::ln(na)); break;
                        case PrimFn::Sin: repl.emplace(k, jetlaw::sin(na)); break;
                        case PrimFn::Cos: repl.emplace(k, jetlaw::cos(na)); break;
                        case PrimFn::Tan: repl.emplace(k, jetlaw::tan(na)); break;
                        case PrimFn::Atan: repl.emplace(k, jetlaw::atan(na)); break;
                    }
                    break;
                case KernelKind::Root:
                    repl.emplace(k, na.pow(Rational(1, kd.rootq)));
                    break;
                case KernelKind::Opaque:
                    repl.emplace(k, detail::opaque_app_expr(kd.sym, na, kd.primes));
                    break;
                default:
                    break;
            }
        }
    }
    if (repl.empty()) return *this;

    auto rebuild = [&](const Poly& p) {
        Expr acc;
        for (auto& [m, c] : p.terms) {
            Expr term{c};
            for (auto& [id, e] : m.factors) {
                auto it = repl.find(id);
                Expr base = it != repl.end() ? it->second : Expr::from_kernel(id);
                term = term * base.pow(static_cast<long>(e));
            }
            acc += term;
        }
        return acc;
    };
    Expr num = rebuild(rep().num);
    Expr den = rebuild(rep().den);
    return num / den;
}

// ---------------------------------------------------------------------------
// Numeric evaluation
// ---------------------------------------------------------------------------

namespace {

double eval_kernel(KernelId k, const Assignment& a);

double eval_poly(const Poly& p, const Assignment& a, double* scale) {
    double sum = 0, mag = 0;
    for (auto& [m, c] : p.terms) {
        double t = static_cast<double>(c);
        for (auto& [id, e] : m.factors) t *= std::pow(eval_kernel(id, a), static_cast<double>(e));
        if (!std::isfinite(t)) throw DomainError("non-finite value in evaluation");
        sum += t;
        mag += std::fabs(t);
    }
    if (scale) *scale = mag;
    return sum;
}

double eval_kernel(KernelId k, const Assignment& a) {
    auto it = a.atom_values.find(k);
    if (it != a.atom_values.end()) return it->second;
    const auto& kd = kernel(k);
    switch (kd.kind) {
        case KernelKind::Prim: {
            double v = kd.arg->eval(a);
            switch (kd.prim) {
                case PrimFn::Exp: return std::exp(v);
                case PrimFn::Ln:
                    if (v <= 1e-12) throw DomainError("ln of non-positive value");
                    return std::log(v);
                case PrimFn::Sin: return std::sin(v);
                case PrimFn::Cos: return std::cos(v);
                case PrimFn::Tan: return std::tan(v);
                case PrimFn::Atan: return std::atan(v);
            }
            throw DomainError("bad prim");
        }
        case KernelKind::Root: {
            double v = kd.arg->eval(a);
            if (kd.rootq % 2 == 0 && v < 0) throw DomainError("even root of negative value");
            double r = v < 0 ? -std::pow(-v, 1.0 / kd.rootq) : std::pow(v, 1.0 / kd.rootq);
            return r;
        }
        case KernelKind::Opaque: {
            auto fit = a.opaque_instances.find(kd.sym);
            if (fit == a.opaque_instances.end())
                throw MissingAssignment("no instance for opaque function " + symbol(kd.sym).name);
            double v = kd.arg->eval(a);
            return fit->second(static_cast<int>(kd.primes), v);
        }
        default:
            throw MissingAssignment("no value for atom " + kernel_str(k));
    }
}

} // namespace

double Expr::eval(const Assignment& a) const {
    double dn = eval_poly(rep().den, a, nullptr);
    if (std::fabs(dn) < 1e-300) throw DomainError("denominator vanished in evaluation");
    return eval_poly(rep().num, a, nullptr) / dn;
}

std::pair<double, double> Expr::eval_with_scale(const Assignment& a) const {
    double ns = 0, ds = 0;
    double dn = eval_poly(rep().den, a, &ds);
    if (std::fabs(dn) < 1e-12 * std::max(1.0, ds)) throw DomainError("denominator nearly vanished");
    double nv = eval_poly(rep().num, a, &ns);
    double value = nv / dn;
    double scale = ns / std::fabs(dn);
    return {value, scale};
}

} // namespace jetlaw
