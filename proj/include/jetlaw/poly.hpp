#pragma once

#include "jetlaw/expr.hpp"

#include <map>

namespace jetlaw {

/// Monomial over kernel ids, sorted by kernel order, exponents > 0.
/// Canonical-form invariants maintained by poly arithmetic:
///   - at most one Exp kernel per monomial, exponent 1 (exp-group combination),
///   - root-kernel exponents stay below their q (r^q rewrites to the radicand).
struct Monomial {
    std::vector<std::pair<KernelId, std::uint32_t>> factors;

    bool operator==(const Monomial& o) const { return factors == o.factors; }
    std::uint32_t degree_of(KernelId k) const;
    bool divides(const Monomial& m) const; // componentwise <=
};

/// Lexicographic term order over the global kernel order.
struct MonoLess {
    bool operator()(const Monomial& a, const Monomial& b) const;
};

struct Poly {
    std::map<Monomial, Rational, MonoLess> terms;

    static Poly zero() { return {}; }
    static Poly constant(const Rational& c);
    static Poly variable(KernelId k);

    bool is_zero() const { return terms.empty(); }
    bool is_constant() const;
    Rational constant_value() const;

    Poly operator+(const Poly& o) const;
    Poly operator-(const Poly& o) const;
    Poly operator*(const Poly& o) const;
    Poly operator-() const;
    Poly mul_rat(const Rational& c) const;
    Poly pow(std::uint32_t e) const;

    /// Formal derivative with respect to one kernel (no chain rule).
    Poly formal_derivative(KernelId k) const;

    std::uint32_t degree_of(KernelId k) const;
    void collect_kernels(std::set<KernelId>& out) const;

    bool operator==(const Poly& o) const { return terms == o.terms; }

    const std::pair<const Monomial, Rational>& leading() const; // pre: !is_zero
};

void poly_add_term(Poly& p, const Monomial& m, const Rational& c);

/// Product of two monomials with canonical-form rewrites; may fan out into a
/// polynomial when a root-kernel power reduces.
Poly mono_mul(const Monomial& a, const Rational& ca, const Monomial& b, const Rational& cb);

/// gcd with verified exact division (falls back to monomial content when the
/// PRS candidate fails to divide, which can happen in the presence of
/// root/exp kernel relations).
Poly poly_gcd(const Poly& a, const Poly& b);
/// Exact division; returns false if not exact.
bool poly_divide_exact(const Poly& num, const Poly& den, Poly& quot);

std::string poly_str(const Poly& p);
/// Unambiguous serialization over kernel identity keys (used for interning).
std::string poly_key(const Poly& p);

// ---------------------------------------------------------------------------

/// Canonical fraction of polynomials. Invariants after normalize():
///   - den != 0, gcd-reduced, leading coefficient of den is 1,
///   - den carries no sqrt kernels (conjugate-rationalized) and no pure
///     exp-kernel monomial factor.
struct RatFun {
    Poly num;
    Poly den; // never zero; 1 for polynomials

    static RatFun zero();
    static RatFun constant(const Rational& c);
    static RatFun variable(KernelId k);

    void normalize();

    bool is_zero() const { return num.is_zero(); }
    bool operator==(const RatFun& o) const { return num == o.num && den == o.den; }
};

RatFun rf_add(const RatFun& a, const RatFun& b);
RatFun rf_sub(const RatFun& a, const RatFun& b);
RatFun rf_mul(const RatFun& a, const RatFun& b);
RatFun rf_div(const RatFun& a, const RatFun& b);
RatFun rf_neg(const RatFun& a);
RatFun rf_pow(const RatFun& a, long e);

std::string ratfun_str(const RatFun& r);
std::string ratfun_key(const RatFun& r);

} // namespace jetlaw
