#include "jetlaw/rational.hpp"

#include <boost/multiprecision/integer.hpp>
#include <stdexcept>

namespace jetlaw {

Rational rat_pow(const Rational& r, long e) {
    if (e == 0) return Rational(1);
    if (r == 0 && e < 0) throw std::domain_error("rat_pow: 0 to negative power");
    Rational base = e < 0 ? Rational(1) / r : r;
    unsigned long n = e < 0 ? static_cast<unsigned long>(-e) : static_cast<unsigned long>(e);
    Rational acc(1);
    while (n) {
        if (n & 1) acc *= base;
        base *= base;
        n >>= 1;
    }
    return acc;
}

Integer square_part(const Integer& n) {
    if (n <= 0) return 1;
    Integer root = boost::multiprecision::sqrt(n);
    if (root * root == n) return root;
    Integer s = 1, m = n;
    for (Integer p = 2; p * p * p * p <= m && p < 1000; ++p) {
        while (m % (p * p) == 0) {
            m /= p * p;
            s *= p;
        }
    }
    return s;
}

std::string rat_str(const Rational& r) {
    if (rat_den(r) == 1) return rat_num(r).str();
    return rat_num(r).str() + "/" + rat_den(r).str();
}

} // namespace jetlaw
