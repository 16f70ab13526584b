#include "jetlaw/poly.hpp"

#include "jetlaw/detail/intern.hpp"

#include <algorithm>
#include <sstream>

namespace jetlaw {

// ---------------------------------------------------------------------------
// Monomial
// ---------------------------------------------------------------------------

std::uint32_t Monomial::degree_of(KernelId k) const {
    for (auto& [id, e] : factors)
        if (id == k) return e;
    return 0;
}

bool Monomial::divides(const Monomial& m) const {
    for (auto& [id, e] : factors)
        if (m.degree_of(id) < e) return false;
    return true;
}

bool MonoLess::operator()(const Monomial& a, const Monomial& b) const {
    // Lexicographic over the global kernel order: walk both factor lists in
    // kernel order; higher exponent on the earlier kernel wins.
    std::size_t i = 0, j = 0;
    while (i < a.factors.size() && j < b.factors.size()) {
        KernelId ka = a.factors[i].first, kb = b.factors[j].first;
        if (ka == kb) {
            if (a.factors[i].second != b.factors[j].second)
                return a.factors[i].second < b.factors[j].second;
            ++i;
            ++j;
        } else if (kernel_order_less(ka, kb)) {
            return false; // a has the earlier kernel with positive exponent -> a is larger
        } else {
            return true;
        }
    }
    if (i < a.factors.size()) return false;
    if (j < b.factors.size()) return true;
    return false;
}

namespace {

Monomial sorted_monomial(std::vector<std::pair<KernelId, std::uint32_t>> f) {
    std::sort(f.begin(), f.end(), [](auto& x, auto& y) { return kernel_order_less(x.first, y.first); });
    Monomial m;
    for (auto& [id, e] : f) {
        if (e == 0) continue;
        if (!m.factors.empty() && m.factors.back().first == id)
            m.factors.back().second += e;
        else
            m.factors.emplace_back(id, e);
    }
    return m;
}

Monomial mono_div(const Monomial& a, const Monomial& b) {
    std::vector<std::pair<KernelId, std::uint32_t>> f;
    for (auto& [id, e] : a.factors) {
        std::uint32_t d = e - b.degree_of(id);
        if (d) f.emplace_back(id, d);
    }
    return sorted_monomial(std::move(f));
}

Monomial mono_raw_mul(const Monomial& a, const Monomial& b) {
    auto f = a.factors;
    for (auto& p : b.factors) f.push_back(p);
    return sorted_monomial(std::move(f));
}

/// true if the monomial needs canonical-form rewriting (exp combination or
/// root power reduction).
bool mono_needs_rewrite(const Monomial& m) {
    int exps = 0;
    for (auto& [id, e] : m.factors) {
        const auto& kd = kernel(id);
        if (kd.kind == KernelKind::Prim && kd.prim == PrimFn::Exp) {
            exps++;
            if (e > 1 || exps > 1) return true;
        } else if (kd.kind == KernelKind::Root && e >= kd.rootq) {
            return true;
        }
    }
    return false;
}

} // namespace

// Rewrites one monomial into canonical form. Root-power reduction multiplies
// in the radicand polynomial, so the result is a full Poly.
static Poly mono_normalize(const Monomial& m, const Rational& coef) {
    if (coef == 0) return Poly::zero();
    if (!mono_needs_rewrite(m)) {
        Poly p;
        p.terms.emplace(m, coef);
        return p;
    }
    std::vector<std::pair<KernelId, std::uint32_t>> plain;
    Expr exp_arg(0L);
    bool has_exp = false;
    Poly extra = Poly::constant(Rational(1));
    for (auto& [id, e] : m.factors) {
        const auto& kd = kernel(id);
        if (kd.kind == KernelKind::Prim && kd.prim == PrimFn::Exp) {
            has_exp = true;
            exp_arg = exp_arg + Expr(static_cast<long>(e)) * (*kd.arg);
        } else if (kd.kind == KernelKind::Root && e >= kd.rootq) {
            std::uint32_t whole = e / kd.rootq, rem = e % kd.rootq;
            const RatFun& rad = kd.arg->rep();
            if (!rad.den.is_constant())
                throw SymbolicError("root kernel with non-polynomial radicand");
            Poly radp = rad.num.mul_rat(Rational(1) / rad.den.constant_value());
            extra = extra * radp.pow(whole);
            if (rem) plain.emplace_back(id, rem);
        } else {
            plain.emplace_back(id, e);
        }
    }
    if (has_exp && !exp_arg.is_zero()) {
        const RatFun& ar = exp_arg.rep();
        (void)ar;
        plain.emplace_back(detail::intern_prim(PrimFn::Exp, exp_arg), 1);
    }
    Poly base;
    base.terms.emplace(sorted_monomial(std::move(plain)), coef);
    return base * extra;
}

Poly mono_mul(const Monomial& a, const Rational& ca, const Monomial& b, const Rational& cb) {
    return mono_normalize(mono_raw_mul(a, b), ca * cb);
}

// ---------------------------------------------------------------------------
// Poly
// ---------------------------------------------------------------------------

void poly_add_term(Poly& p, const Monomial& m, const Rational& c) {
    if (c == 0) return;
    auto it = p.terms.find(m);
    if (it == p.terms.end()) {
        p.terms.emplace(m, c);
    } else {
        it->second += c;
        if (it->second == 0) p.terms.erase(it);
    }
}

Poly Poly::constant(const Rational& c) {
    Poly p;
    if (c != 0) p.terms.emplace(Monomial{}, c);
    return p;
}

Poly Poly::variable(KernelId k) {
    Monomial m;
    m.factors.emplace_back(k, 1);
    return mono_normalize(m, Rational(1));
}

bool Poly::is_constant() const {
    if (terms.empty()) return true;
    return terms.size() == 1 && terms.begin()->first.factors.empty();
}

Rational Poly::constant_value() const {
    if (terms.empty()) return Rational(0);
    if (!is_constant()) throw SymbolicError("Poly::constant_value on non-constant");
    return terms.begin()->second;
}

Poly Poly::operator+(const Poly& o) const {
    Poly r = *this;
    for (auto& [m, c] : o.terms) poly_add_term(r, m, c);
    return r;
}

Poly Poly::operator-() const {
    Poly r;
    for (auto& [m, c] : terms) r.terms.emplace(m, -c);
    return r;
}

Poly Poly::operator-(const Poly& o) const { return *this + (-o); }

Poly Poly::mul_rat(const Rational& c) const {
    if (c == 0) return {};
    Poly r;
    for (auto& [m, k] : terms) r.terms.emplace(m, k * c);
    return r;
}

Poly Poly::operator*(const Poly& o) const {
    Poly r;
    for (auto& [m1, c1] : terms) {
        for (auto& [m2, c2] : o.terms) {
            Monomial raw = mono_raw_mul(m1, m2);
            if (!mono_needs_rewrite(raw)) {
                poly_add_term(r, raw, c1 * c2);
            } else {
                Poly part = mono_normalize(raw, c1 * c2);
                for (auto& [m, c] : part.terms) poly_add_term(r, m, c);
            }
        }
    }
    return r;
}

Poly Poly::pow(std::uint32_t e) const {
    Poly acc = Poly::constant(Rational(1));
    Poly base = *this;
    while (e) {
        if (e & 1) acc = acc * base;
        if (e >>= 1) base = base * base;
    }
    return acc;
}

Poly Poly::formal_derivative(KernelId k) const {
    Poly r;
    for (auto& [m, c] : terms) {
        std::uint32_t e = m.degree_of(k);
        if (!e) continue;
        std::vector<std::pair<KernelId, std::uint32_t>> f;
        for (auto& [id, ee] : m.factors) {
            if (id == k) {
                if (ee > 1) f.emplace_back(id, ee - 1);
            } else {
                f.emplace_back(id, ee);
            }
        }
        poly_add_term(r, sorted_monomial(std::move(f)), c * Rational(e));
    }
    return r;
}

std::uint32_t Poly::degree_of(KernelId k) const {
    std::uint32_t d = 0;
    for (auto& [m, c] : terms) d = std::max(d, m.degree_of(k));
    return d;
}

void Poly::collect_kernels(std::set<KernelId>& out) const {
    for (auto& [m, c] : terms)
        for (auto& [id, e] : m.factors) out.insert(id);
}

const std::pair<const Monomial, Rational>& Poly::leading() const {
    if (terms.empty()) throw SymbolicError("leading term of zero polynomial");
    return *terms.rbegin();
}

// ---------------------------------------------------------------------------
// Division and gcd
// ---------------------------------------------------------------------------

bool poly_divide_exact(const Poly& num, const Poly& den, Poly& quot) {
    if (den.is_zero()) return false;
    quot = Poly::zero();
    if (num.is_zero()) return true;
    if (den.is_constant()) {
        quot = num.mul_rat(Rational(1) / den.constant_value());
        return true;
    }
    Poly rem = num;
    const auto& dlead = den.leading();
    int guard = 0;
    while (!rem.is_zero()) {
        if (++guard > 100000) return false;
        const auto& rlead = rem.leading();
        if (!dlead.first.divides(rlead.first)) return false;
        Monomial q = mono_div(rlead.first, dlead.first);
        Rational qc = rlead.second / dlead.second;
        if (mono_needs_rewrite(mono_raw_mul(q, dlead.first))) return false; // rewrite would break the ladder
        Poly qp;
        qp.terms.emplace(q, qc);
        poly_add_term(quot, q, qc);
        rem = rem - qp * den;
    }
    return true;
}

namespace {

bool has_special_kernels(const Poly& p) {
    for (auto& [m, c] : p.terms)
        for (auto& [id, e] : m.factors) {
            auto k = kernel(id).kind;
            if (k == KernelKind::Root || (k == KernelKind::Prim && kernel(id).prim == PrimFn::Exp))
                return true;
        }
    return false;
}

Monomial mono_content(const Poly& p) {
    Monomial m = p.terms.begin()->first;
    for (auto& [mm, c] : p.terms) {
        std::vector<std::pair<KernelId, std::uint32_t>> f;
        for (auto& [id, e] : m.factors) {
            std::uint32_t o = mm.degree_of(id);
            if (o && e) f.emplace_back(id, std::min(e, o));
        }
        m = sorted_monomial(std::move(f));
        if (m.factors.empty()) break;
    }
    return m;
}

/// Coefficients of p viewed as univariate in v (dense, low to high).
std::vector<Poly> coeffs_in(const Poly& p, KernelId v) {
    std::vector<Poly> out(p.degree_of(v) + 1);
    for (auto& [m, c] : p.terms) {
        std::uint32_t d = m.degree_of(v);
        std::vector<std::pair<KernelId, std::uint32_t>> f;
        for (auto& [id, e] : m.factors)
            if (id != v) f.emplace_back(id, e);
        poly_add_term(out[d], sorted_monomial(std::move(f)), c);
    }
    return out;
}

Poly from_coeffs(const std::vector<Poly>& cs, KernelId v) {
    Poly r;
    for (std::size_t d = 0; d < cs.size(); ++d) {
        Poly vp = Poly::variable(v).pow(static_cast<std::uint32_t>(d));
        r = r + cs[d] * vp;
    }
    return r;
}

Poly gcd_rec(const Poly& a, const Poly& b, int depth);

Poly content_in(const Poly& p, KernelId v, int depth) {
    auto cs = coeffs_in(p, v);
    Poly g;
    for (auto& c : cs) {
        if (c.is_zero()) continue;
        g = g.is_zero() ? c : gcd_rec(g, c, depth + 1);
        if (g.is_constant()) return Poly::constant(Rational(1));
    }
    return g.is_zero() ? Poly::constant(Rational(1)) : g;
}

/// Pseudo-remainder of a by b in variable v (deg_a >= deg_b > 0 assumed).
Poly prem(Poly a, const Poly& b, KernelId v) {
    auto bc = coeffs_in(b, v);
    std::uint32_t db = static_cast<std::uint32_t>(bc.size() - 1);
    const Poly& lb = bc.back();
    int guard = 0;
    while (true) {
        std::uint32_t da = a.degree_of(v);
        if (a.is_zero() || da < db) return a;
        if (++guard > 4000) throw SymbolicError("prem: guard exceeded");
        auto ac = coeffs_in(a, v);
        const Poly& la = ac.back();
        // a := lb * a - la * v^(da-db) * b
        Poly shift = Poly::variable(v).pow(da - db);
        a = lb * a - la * shift * b;
    }
}

Poly gcd_rec(const Poly& a, const Poly& b, int depth) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    if (a.is_constant() || b.is_constant()) return Poly::constant(Rational(1));
    if (depth > 24) return Poly::constant(Rational(1));

    std::set<KernelId> ka, kb;
    a.collect_kernels(ka);
    b.collect_kernels(kb);
    std::vector<KernelId> shared;
    for (KernelId k : ka)
        if (kb.count(k)) shared.push_back(k);

    if (shared.empty()) return Poly::constant(Rational(1));

    // Choose the shared variable with the smallest max degree.
    KernelId v = shared.front();
    std::uint32_t best = 0xffffffffu;
    for (KernelId k : shared) {
        std::uint32_t d = std::max(a.degree_of(k), b.degree_of(k));
        if (d < best) {
            best = d;
            v = k;
        }
    }

    Poly ca = content_in(a, v, depth), cb = content_in(b, v, depth);
    Poly ppa, ppb;
    if (!poly_divide_exact(a, ca, ppa)) return Poly::constant(Rational(1));
    if (!poly_divide_exact(b, cb, ppb)) return Poly::constant(Rational(1));
    Poly cg = gcd_rec(ca, cb, depth + 1);

    // Primitive PRS.
    Poly f = ppa, g = ppb;
    if (f.degree_of(v) < g.degree_of(v)) std::swap(f, g);
    int guard = 0;
    while (true) {
        if (++guard > 200) return cg; // give up on the non-content part
        Poly r = prem(f, g, v);
        if (r.is_zero()) break;
        Poly cr = content_in(r, v, depth);
        Poly ppr;
        if (!poly_divide_exact(r, cr, ppr)) return cg;
        f = g;
        g = ppr;
        if (g.degree_of(v) == 0) return cg;
    }
    Poly cgp = content_in(g, v, depth);
    Poly gp;
    if (!poly_divide_exact(g, cgp, gp)) return cg;
    return cg * gp;
}

} // namespace

Poly poly_gcd(const Poly& a, const Poly& b) {
    if (a.is_zero()) return b;
    if (b.is_zero()) return a;
    Monomial mc_a = mono_content(a), mc_b = mono_content(b);
    std::vector<std::pair<KernelId, std::uint32_t>> shared;
    for (auto& [id, e] : mc_a.factors) {
        std::uint32_t o = mc_b.degree_of(id);
        if (o) shared.emplace_back(id, std::min(e, o));
    }
    Monomial mc;
    mc.factors = shared;
    Poly mcp;
    mcp.terms.emplace(mc, Rational(1));

    Poly a1, b1;
    if (!poly_divide_exact(a, mcp, a1)) a1 = a;
    if (!poly_divide_exact(b, mcp, b1)) b1 = b;

    Poly g = Poly::constant(Rational(1));
    if (!(a1.is_constant() || b1.is_constant())) {
        if (has_special_kernels(a1) || has_special_kernels(b1)) {
            // Quotient-ring relations may break PRS; try it, verify by division.
            try {
                Poly cand = gcd_rec(a1, b1, 0);
                Poly q;
                if (!cand.is_constant() && poly_divide_exact(a1, cand, q) && poly_divide_exact(b1, cand, q))
                    g = cand;
            } catch (const SymbolicError&) {
            }
        } else {
            g = gcd_rec(a1, b1, 0);
            Poly q;
            if (!g.is_constant() && (!poly_divide_exact(a1, g, q) || !poly_divide_exact(b1, g, q)))
                g = Poly::constant(Rational(1));
        }
    }
    return mcp * g;
}

// ---------------------------------------------------------------------------
// RatFun
// ---------------------------------------------------------------------------

RatFun RatFun::zero() { return {Poly::zero(), Poly::constant(Rational(1))}; }
RatFun RatFun::constant(const Rational& c) { return {Poly::constant(c), Poly::constant(Rational(1))}; }
RatFun RatFun::variable(KernelId k) { return {Poly::variable(k), Poly::constant(Rational(1))}; }

namespace {

/// Conjugate-rationalize sqrt kernels out of the denominator, and clear a
/// single-monomial exp factor.
void clean_denominator(Poly& num, Poly& den) {
    for (int pass = 0; pass < 8; ++pass) {
        KernelId root = 0;
        bool found = false;
        std::set<KernelId> ks;
        den.collect_kernels(ks);
        for (KernelId k : ks) {
            if (kernel(k).kind == KernelKind::Root && kernel(k).rootq == 2) {
                root = k;
                found = true;
                break;
            }
        }
        if (!found) break;
        // den = A + B*r with r-degree <= 1 after canonical monomial form.
        Poly conj;
        for (auto& [m, c] : den.terms) {
            if (m.degree_of(root) % 2 == 1)
                poly_add_term(conj, m, -c);
            else
                poly_add_term(conj, m, c);
        }
        num = num * conj;
        den = den * conj;
    }
    if (den.terms.size() == 1) {
        auto& [m, c] = *den.terms.begin();
        for (auto& [id, e] : m.factors) {
            const auto& kd = kernel(id);
            if (kd.kind == KernelKind::Prim && kd.prim == PrimFn::Exp) {
                // multiply both by exp(-arg)
                Expr inv = Expr::from_kernel(detail::intern_prim(
                    PrimFn::Exp, Expr(0L) - *kd.arg));
                const Poly invp = inv.rep().num;
                num = num * invp;
                den = den * invp;
                break;
            }
        }
    }
}

} // namespace

void RatFun::normalize() {
    if (den.is_zero()) throw SymbolicError("division by zero expression");
    if (num.is_zero()) {
        den = Poly::constant(Rational(1));
        return;
    }
    clean_denominator(num, den);
    if (!den.is_constant()) {
        Poly g = poly_gcd(num, den);
        if (!g.is_constant() || g.constant_value() != 1) {
            Poly qn, qd;
            if (poly_divide_exact(num, g, qn) && poly_divide_exact(den, g, qd)) {
                num = qn;
                den = qd;
            }
        }
    }
    // Make the denominator's leading coefficient 1.
    Rational lc = den.is_zero() ? Rational(1) : den.leading().second;
    if (lc != 1) {
        num = num.mul_rat(Rational(1) / lc);
        den = den.mul_rat(Rational(1) / lc);
    }
}

RatFun rf_add(const RatFun& a, const RatFun& b) {
    RatFun r;
    if (a.den == b.den) {
        r.num = a.num + b.num;
        r.den = a.den;
    } else {
        r.num = a.num * b.den + b.num * a.den;
        r.den = a.den * b.den;
    }
    r.normalize();
    return r;
}

RatFun rf_neg(const RatFun& a) { return {-a.num, a.den}; }

RatFun rf_sub(const RatFun& a, const RatFun& b) { return rf_add(a, rf_neg(b)); }

RatFun rf_mul(const RatFun& a, const RatFun& b) {
    RatFun r{a.num * b.num, a.den * b.den};
    r.normalize();
    return r;
}

RatFun rf_div(const RatFun& a, const RatFun& b) {
    if (b.num.is_zero()) throw SymbolicError("division by zero expression");
    RatFun r{a.num * b.den, a.den * b.num};
    r.normalize();
    return r;
}

RatFun rf_pow(const RatFun& a, long e) {
    if (e == 0) return RatFun::constant(Rational(1));
    bool neg = e < 0;
    std::uint32_t n = static_cast<std::uint32_t>(neg ? -e : e);
    if (neg && a.num.is_zero()) throw SymbolicError("0 to negative power");
    RatFun r{a.num.pow(n), a.den.pow(n)};
    if (neg) std::swap(r.num, r.den);
    r.normalize();
    return r;
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

namespace {

std::string mono_str(const Monomial& m, const Rational& c, bool lead) {
    std::ostringstream os;
    Rational ac = c < 0 ? Rational(-c) : c;
    if (c < 0)
        os << (lead ? "-" : " - ");
    else if (!lead)
        os << " + ";
    bool printed = false;
    if (ac != 1 || m.factors.empty()) {
        os << rat_str(ac);
        printed = true;
    }
    for (auto& [id, e] : m.factors) {
        if (printed) os << "*";
        os << kernel_str(id);
        if (e > 1) os << "^" << e;
        printed = true;
    }
    return os.str();
}

} // namespace

std::string poly_str(const Poly& p) {
    if (p.is_zero()) return "0";
    std::ostringstream os;
    bool lead = true;
    for (auto it = p.terms.rbegin(); it != p.terms.rend(); ++it) {
        os << mono_str(it->first, it->second, lead);
        lead = false;
    }
    return os.str();
}

std::string poly_key(const Poly& p) {
    std::ostringstream os;
    for (auto it = p.terms.rbegin(); it != p.terms.rend(); ++it) {
        os << rat_str(it->second) << "{";
        for (auto& [id, e] : it->first.factors) os << "<" << kernel(id).key << ">^" << e;
        os << "}";
    }
    return os.str();
}

std::string ratfun_key(const RatFun& r) { return poly_key(r.num) + "|" + poly_key(r.den); }

std::string ratfun_str(const RatFun& r) {
    if (r.den.is_constant() && r.den.constant_value() == 1) return poly_str(r.num);
    std::string n = poly_str(r.num);
    std::string d = poly_str(r.den);
    bool npar = r.num.terms.size() > 1;
    bool dpar = r.den.terms.size() > 1 || (r.den.terms.size() == 1 && (r.den.terms.begin()->first.factors.size() > 1 || r.den.terms.begin()->second != 1));
    std::string out = npar ? "(" + n + ")" : n;
    out += "/";
    out += dpar ? "(" + d + ")" : d;
    return out;
}

} // namespace jetlaw
