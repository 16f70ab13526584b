#include "jetlaw/detail/intern.hpp"
#include "jetlaw/expr.hpp"
#include "jetlaw/poly.hpp"

#include <cmath>
#include <sstream>

namespace jetlaw {

namespace {

// splitmix64: deterministic across platforms, unlike the std distributions.
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ULL) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    /// Uniform over [-2,-0.1] u [0.1,2]: avoids the singular neighbourhoods.
    double sample() {
        double v = 0.1 + 1.9 * unit();
        return (next() & 1) ? v : -v;
    }
};

void collect_opaque_syms(const Expr& e, std::set<VarId>& out) {
    std::set<KernelId> ks;
    e.collect_kernels(ks);
    for (KernelId k : ks) {
        const auto& kd = kernel(k);
        if (kd.kind == KernelKind::Opaque) {
            out.insert(kd.sym);
            collect_opaque_syms(*kd.arg, out);
        } else if (kd.kind == KernelKind::Prim || kd.kind == KernelKind::Root) {
            collect_opaque_syms(*kd.arg, out);
        }
    }
}

double simpson(const std::function<double(double)>& f, double a, double b, int depth, double fa,
               double fm, double fb) {
    double m = 0.5 * (a + b);
    double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    double flm = f(lm), frm = f(rm);
    double whole = (b - a) / 6.0 * (fa + 4 * fm + fb);
    double left = (m - a) / 6.0 * (fa + 4 * flm + fm);
    double right = (b - m) / 6.0 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::fabs(left + right - whole) < 1e-12) return left + right;
    return simpson(f, a, m, depth - 1, fa, flm, fm) + simpson(f, m, b, depth - 1, fm, frm, fb);
}

double integrate(const std::function<double(double)>& f, double a, double b) {
    if (a == b) return 0.0;
    double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson(f, a, b, 18, fa, fm, fb);
}

struct InstanceBuilder : std::enable_shared_from_this<InstanceBuilder> {
    std::shared_ptr<Assignment> assignment = std::make_shared<Assignment>();
    // Derivative expressions of opaque rules, cached per (fn, order).
    std::map<std::pair<VarId, int>, Expr> rule_derivs;

    Expr rule_deriv(VarId fn, int order) {
        auto key = std::make_pair(fn, order);
        auto it = rule_derivs.find(key);
        if (it != rule_derivs.end()) return it->second;
        const auto& sd = symbol(fn);
        Expr g = *sd.opaque_rule;
        KernelId ph = detail::rule_placeholder_kernel(g);
        for (int i = 0; i < order; ++i) g = g.partial(ph);
        rule_derivs.emplace(key, g);
        return g;
    }

    double eval_rule(VarId fn, int order, double x) {
        Expr g = rule_deriv(fn, order);
        KernelId ph = detail::rule_placeholder_kernel(*symbol(fn).opaque_rule);
        Assignment a = *assignment;
        a.atom_values[ph] = x;
        return g.eval(a);
    }

    void build(const std::set<VarId>& fns, Rng& rng) {
        auto self = shared_from_this();
        for (VarId fn : fns) {
            const auto& sd = symbol(fn);
            if (sd.opaque_rule) {
                double c0 = rng.sample();
                assignment->opaque_instances[fn] = [self, fn, c0](int k, double x) -> double {
                    if (k == 0)
                        return c0 + integrate([&](double t) { return self->eval_rule(fn, 0, t); }, 0.0, x);
                    return self->eval_rule(fn, k - 1, x);
                };
            } else {
                double c0 = rng.sample(), c1 = rng.sample(), c2 = 0.5 * rng.sample(),
                       c3 = 0.5 * rng.sample(), c4 = rng.unit() * 3.0;
                assignment->opaque_instances[fn] = [c0, c1, c2, c3, c4](int k, double x) -> double {
                    double poly = 0;
                    if (k == 0)
                        poly = c0 + c1 * x + 0.5 * c2 * x * x;
                    else if (k == 1)
                        poly = c1 + c2 * x;
                    else if (k == 2)
                        poly = c2;
                    return poly + c3 * std::sin(x + c4 + k * 1.5707963267948966);
                };
            }
        }
    }
};

} // namespace

IsZeroResult is_zero(const Expr& e, const ProbeOptions& opts) {
    if (e.is_zero()) return {Verdict::ProvedZero, "canonical zero"};

    std::set<KernelId> atoms;
    e.collect_atoms(atoms);
    std::set<VarId> opaques;
    collect_opaque_syms(e, opaques);

    Rng rng(opts.seed * 0x9e3779b9u + 1);
    int successes = 0;
    for (int p = 0; p < opts.points; ++p) {
        for (int attempt = 0; attempt < opts.resample_limit; ++attempt) {
            auto builder = std::make_shared<InstanceBuilder>();
            for (KernelId a : atoms) builder->assignment->atom_values[a] = rng.sample();
            Rng frng(rng.next());
            builder->build(opaques, frng);
            try {
                auto [v, scale] = e.eval_with_scale(*builder->assignment);
                double thresh = opts.tolerance * std::max(1.0, scale);
                if (std::fabs(v) > thresh) {
                    // Confirm on a jittered copy of the same point.
                    Assignment jit = *builder->assignment;
                    for (auto& [k, val] : jit.atom_values) val *= 1.0 + 1e-7;
                    try {
                        auto [v2, scale2] = e.eval_with_scale(jit);
                        if (std::fabs(v2) > 0.25 * opts.tolerance * std::max(1.0, scale2)) {
                            std::ostringstream os;
                            os << "probe " << p << ": |value| " << std::fabs(v) << " exceeds tol*scale "
                               << thresh;
                            return {Verdict::ProvedNonzero, os.str()};
                        }
                    } catch (const SymbolicError&) {
                    }
                    // Confirmation failed; treat the point as inconclusive.
                    continue;
                }
                ++successes;
                break;
            } catch (const DomainError&) {
                continue;
            } catch (const MissingAssignment&) {
                return {Verdict::Unknown, "expression contains unevaluable atoms"};
            }
        }
    }
    if (successes == 0) return {Verdict::Unknown, "all probe points hit domain failures"};
    std::ostringstream os;
    os << successes << "/" << opts.points << " probes vanished within tolerance " << opts.tolerance;
    return {Verdict::ProbablyZero, os.str()};
}

} // namespace jetlaw
