#include "jetlaw/system.hpp"

#include "jetlaw/detail/intern.hpp"

#include <atomic>
#include <sstream>

namespace jetlaw {

// ---------------------------------------------------------------------------
// LinDiffOp
// ---------------------------------------------------------------------------

Expr LinDiffOp::apply(const Expr& e) const {
    Expr r;
    for (auto& [a, K] : terms) r += a * e.total_derivative(K);
    return r;
}

Rational multi_binomial(const MultiIndex& K, const MultiIndex& L) {
    Rational r(1);
    for (auto& [v, k] : K.entries()) {
        std::uint32_t l = L.get(v);
        // C(k, l)
        Rational c(1);
        for (std::uint32_t i = 0; i < l; ++i) c = c * Rational(k - i) / Rational(i + 1);
        r *= c;
    }
    return r;
}

std::vector<MultiIndex> sub_multi_indices(const MultiIndex& K) {
    std::vector<MultiIndex> out{MultiIndex{}};
    for (auto& [v, k] : K.entries()) {
        std::vector<MultiIndex> next;
        for (auto& base : out)
            for (std::uint32_t i = 0; i <= k; ++i) next.push_back(i ? base.bumped(v, i) : base);
        out = std::move(next);
    }
    return out;
}

LinDiffOp LinDiffOp::adjoint() const {
    LinDiffOp r;
    for (auto& [a, K] : terms) {
        Rational sign = (K.order() % 2) ? Rational(-1) : Rational(1);
        for (auto& L : sub_multi_indices(K)) {
            Expr coeff = Expr(sign * multi_binomial(K, L)) * a.total_derivative(L);
            if (!coeff.is_zero()) r.terms.emplace_back(coeff, K.minus(L));
        }
    }
    r.normalize();
    return r;
}

LinDiffOp LinDiffOp::operator+(const LinDiffOp& o) const {
    LinDiffOp r = *this;
    for (auto& t : o.terms) r.terms.push_back(t);
    r.normalize();
    return r;
}

LinDiffOp LinDiffOp::scaled(const Expr& c) const {
    LinDiffOp r;
    for (auto& [a, K] : terms) {
        Expr ac = a * c;
        if (!ac.is_zero()) r.terms.emplace_back(ac, K);
    }
    return r;
}

void LinDiffOp::normalize() {
    std::map<MultiIndex, Expr> byK;
    for (auto& [a, K] : terms) {
        auto it = byK.find(K);
        if (it == byK.end())
            byK.emplace(K, a);
        else
            it->second += a;
    }
    terms.clear();
    for (auto& [K, a] : byK)
        if (!a.is_zero()) terms.emplace_back(a, K);
}

bool LinDiffOp::operator==(const LinDiffOp& o) const {
    LinDiffOp a = *this, b = o;
    a.normalize();
    b.normalize();
    if (a.terms.size() != b.terms.size()) return false;
    for (std::size_t i = 0; i < a.terms.size(); ++i) {
        if (!(a.terms[i].second == b.terms[i].second)) return false;
        if (!(a.terms[i].first == b.terms[i].first)) return false;
    }
    return true;
}

std::string LinDiffOp::str(const Context& ctx) const {
    if (terms.empty()) return "0";
    std::ostringstream os;
    bool first = true;
    for (auto& [a, K] : terms) {
        if (!first) os << " + ";
        first = false;
        os << "(" << a.str() << ")";
        if (!K.empty()) {
            os << "*D_";
            for (auto& [v, n] : K.entries())
                for (std::uint32_t i = 0; i < n; ++i) os << symbol(v).name;
        }
    }
    return os.str();
}

// ---------------------------------------------------------------------------
// DerivedVar <-> kernels
// ---------------------------------------------------------------------------

std::optional<DerivedVar> derived_of_kernel(KernelId k) {
    const auto& kd = kernel(k);
    if (kd.kind == KernelKind::Jet) return DerivedVar{kd.sym, kd.idx};
    if (kd.kind == KernelKind::FnDeriv) {
        const auto& sd = symbol(kd.sym);
        std::vector<std::pair<VarId, std::uint32_t>> pairs;
        for (auto& [pos, n] : kd.idx.entries()) {
            VarId av = sd.args.at(pos);
            if (symbol(av).kind != SymKind::Independent) return std::nullopt;
            pairs.emplace_back(av, n);
        }
        // Verify every argument is independent (dep-arg functions are opaque to systems).
        for (VarId av : sd.args)
            if (symbol(av).kind != SymKind::Independent) return std::nullopt;
        return DerivedVar{kd.sym, MultiIndex::from_pairs(std::move(pairs))};
    }
    return std::nullopt;
}

KernelId kernel_of_derived(const DerivedVar& v) {
    const auto& sd = symbol(v.family);
    if (sd.kind == SymKind::Dependent) return detail::make_jet_kernel(v.family, v.J);
    if (sd.kind == SymKind::FnSymbol) {
        std::vector<std::pair<VarId, std::uint32_t>> pairs;
        for (auto& [var, n] : v.J.entries()) {
            bool found = false;
            for (std::size_t p = 0; p < sd.args.size(); ++p)
                if (sd.args[p] == var) {
                    pairs.emplace_back(static_cast<VarId>(p), n);
                    found = true;
                    break;
                }
            if (!found) throw SymbolicError("derivative of " + sd.name + " in a non-argument direction");
        }
        return detail::make_fn_deriv_kernel(v.family, MultiIndex::from_pairs(std::move(pairs)));
    }
    throw SymbolicError("kernel_of_derived: bad family");
}

Expr expr_of_derived(const DerivedVar& v) { return Expr::from_kernel(kernel_of_derived(v)); }

// ---------------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------------

Ranking Ranking::grlex(const Context& ctx) {
    Ranking r;
    r.indep_order = ctx.independents();
    r.family_order = ctx.dependents();
    for (VarId f : ctx.functions())
        if (symbol(f).kind == SymKind::FnSymbol) r.family_order.push_back(f);
    return r;
}

Ranking Ranking::elimination(const Context& ctx, const std::vector<VarId>& elim_vars) {
    Ranking r = grlex(ctx);
    r.strategy = Strategy::Elim;
    r.elim = elim_vars;
    return r;
}

int Ranking::compare(const DerivedVar& a, const DerivedVar& b) const {
    if (strategy == Strategy::Custom && custom) return custom(a, b);
    if (strategy == Strategy::Elim) {
        std::uint32_t ca = 0, cb = 0;
        for (VarId v : elim) {
            ca += a.J.get(v);
            cb += b.J.get(v);
        }
        if (ca != cb) return ca < cb ? -1 : 1;
    }
    std::uint32_t oa = a.J.order(), ob = b.J.order();
    if (oa != ob) return oa < ob ? -1 : 1;
    if (a.family != b.family) {
        auto pos = [&](VarId f) {
            for (std::size_t i = 0; i < family_order.size(); ++i)
                if (family_order[i] == f) return static_cast<long>(i);
            return static_cast<long>(family_order.size()); // undeclared families rank highest
        };
        long pa = pos(a.family), pb = pos(b.family);
        if (pa != pb) return pa < pb ? -1 : 1;
        return a.family < b.family ? -1 : 1;
    }
    // graded reverse lexicographic tie-break
    for (auto it = indep_order.rbegin(); it != indep_order.rend(); ++it) {
        std::uint32_t da = a.J.get(*it), db = b.J.get(*it);
        if (da != db) return da < db ? 1 : -1;
    }
    return 0;
}

// ---------------------------------------------------------------------------
// PdeSystem
// ---------------------------------------------------------------------------

namespace {
std::atomic<std::uint64_t> next_system_tag{1};
}

PdeSystem::PdeSystem(const Context& ctx, Ranking ranking)
    : ctx_(&ctx), ranking_(std::move(ranking)), tag_(next_system_tag.fetch_add(1)) {}

void PdeSystem::add_equation(const DerivedVar& lead, const Expr& rhs, const std::string& name) {
    Equation eq;
    eq.name = name.empty() ? "A" + std::to_string(eqs_.size() + 1) : name;
    eq.lead = lead;
    eq.written = expr_of_derived(lead) - rhs;
    eq.omega = rhs;
    eqs_.push_back(std::move(eq));
}

void PdeSystem::add_written(const Expr& written, const DerivedVar& lead, const std::string& name) {
    Equation eq;
    eq.name = name.empty() ? "A" + std::to_string(eqs_.size() + 1) : name;
    eq.lead = lead;
    eq.written = written;
    KernelId lk = kernel_of_derived(lead);
    Expr c = written.partial(lk);
    if (c.is_zero()) throw InvalidSystem(eq.name + ": equation does not contain its leading derivative");
    if (c.depends_on(lk)) throw InvalidSystem(eq.name + ": equation is nonlinear in its leading derivative");
    eq.omega = expr_of_derived(lead) - written / c;
    eqs_.push_back(std::move(eq));
}

Expr PdeSystem::a_monic(std::size_t mu) const {
    return expr_of_derived(eqs_.at(mu).lead) - eqs_.at(mu).omega;
}

PdeSystem::Principality PdeSystem::classify(const DerivedVar& v) const {
    for (std::size_t mu = 0; mu < eqs_.size(); ++mu) {
        const auto& lead = eqs_[mu].lead;
        if (lead.family == v.family && v.J.contains(lead.J))
            return {Classification::Principal, mu, v.J.minus(lead.J)};
    }
    return {Classification::Parametric, 0, {}};
}

void PdeSystem::finalize() {
    if (finalized_) return;
    finalized_ = true;

    // Inter-reduce the right-hand sides: no omega may mention a principal
    // derivative once the set of leads is fixed.
    for (int pass = 0; pass < 64; ++pass) {
        bool changed = false;
        for (auto& eq : eqs_) {
            std::set<KernelId> atoms;
            eq.omega.collect_atoms(atoms);
            // pick the highest-ranked principal atom, excluding this lead itself
            bool found = false;
            DerivedVar best;
            KernelId bestk = 0;
            Principality bestp{Classification::Parametric, 0, {}};
            for (KernelId a : atoms) {
                auto dv = derived_of_kernel(a);
                if (!dv) continue;
                auto p = classify(*dv);
                if (p.cls != Classification::Principal) continue;
                if (*dv == eq.lead) continue; // self-reference: validation reports it
                if (!found || ranking_.less(best, *dv)) {
                    found = true;
                    best = *dv;
                    bestk = a;
                    bestp = p;
                }
            }
            if (!found) continue;
            Expr rep = eqs_[bestp.eq].omega.total_derivative(bestp.K);
            eq.omega = eq.omega.substitute({{bestk, rep}});
            changed = true;
        }
        if (!changed) break;
        if (pass == 63) throw InvalidSystem("inter-reduction did not terminate");
    }

    // Mixing matrix: written_mu = sum_nu mix(mu,nu) * (lead_nu - omega_nu).
    std::size_t m = eqs_.size();
    mix_.assign(m, std::vector<Expr>(m, Expr()));
    mix_zero_order_ = true;
    for (std::size_t mu = 0; mu < m && mix_zero_order_; ++mu) {
        Expr residual = eqs_[mu].written;
        for (std::size_t nu = 0; nu < m; ++nu) {
            KernelId lk = kernel_of_derived(eqs_[nu].lead);
            Expr c = eqs_[mu].written.partial(lk);
            mix_[mu][nu] = c;
            if (!c.is_zero()) residual -= c * a_monic(nu);
        }
        if (!residual.is_zero()) mix_zero_order_ = false;
    }
}

ValidationReport PdeSystem::validate() const {
    ValidationReport rep;
    auto fail = [&](const std::string& s) {
        rep.ok = false;
        rep.problems.push_back(s);
    };
    for (std::size_t mu = 0; mu < eqs_.size(); ++mu) {
        const auto& eq = eqs_[mu];
        std::set<KernelId> atoms;
        eq.omega.collect_atoms(atoms);
        for (KernelId a : atoms) {
            auto dv = derived_of_kernel(a);
            if (!dv) continue;
            // condition 1: the lead out-ranks everything in its rhs
            if (ranking_.compare(*dv, eq.lead) >= 0)
                fail("condition 1: " + eq.name + " right-hand side contains " + kernel_str(a) +
                     " which does not rank below the leading derivative");
            // condition 3: no principal derivative in any rhs
            auto p = classify(*dv);
            if (p.cls == Classification::Principal)
                fail("condition 3: " + eq.name + " right-hand side contains principal derivative " +
                     kernel_str(a));
        }
        for (std::size_t nu = 0; nu < eqs_.size(); ++nu) {
            if (nu == mu) continue;
            const auto& ln = eqs_[nu].lead;
            const auto& lm = eq.lead;
            if (ln.family == lm.family && ln.J.contains(lm.J))
                fail("condition 2: leading derivative of " + eqs_[nu].name + " is a derivative of that of " +
                     eq.name);
        }
    }
    return rep;
}

Expr PdeSystem::normal_form(const Expr& e) const {
    std::map<std::pair<std::size_t, MultiIndex>, Expr> cache;
    auto omega_deriv = [&](std::size_t mu, const MultiIndex& K) -> Expr {
        auto key = std::make_pair(mu, K);
        auto it = cache.find(key);
        if (it != cache.end()) return it->second;
        // build up from a cached prefix
        Expr base = eqs_[mu].omega;
        MultiIndex built;
        MultiIndex rest = K;
        // find the longest cached prefix by greedy single steps
        for (auto& [v, n] : K.entries()) {
            for (std::uint32_t i = 0; i < n; ++i) {
                MultiIndex nxt = built.bumped(v);
                auto cit = cache.find(std::make_pair(mu, nxt));
                if (cit != cache.end()) {
                    built = nxt;
                    base = cit->second;
                } else {
                    base = base.total_derivative(v);
                    built = nxt;
                    cache.emplace(std::make_pair(mu, built), base);
                }
            }
        }
        return base;
    };

    Expr cur = e;
    for (int step = 0; step < 20000; ++step) {
        std::set<KernelId> atoms;
        cur.collect_atoms(atoms);
        bool found = false;
        DerivedVar best;
        KernelId bestk = 0;
        Principality bestp{Classification::Parametric, 0, {}};
        for (KernelId a : atoms) {
            auto dv = derived_of_kernel(a);
            if (!dv) continue;
            auto p = classify(*dv);
            if (p.cls != Classification::Principal) continue;
            if (!found || ranking_.less(best, *dv)) {
                found = true;
                best = *dv;
                bestk = a;
                bestp = p;
            }
        }
        if (!found) return cur;
        Expr rep = omega_deriv(bestp.eq, bestp.K);
        // Orthonomic substitutions strictly lower the highest principal rank;
        // anything else would climb forever.
        std::set<KernelId> ratoms;
        rep.collect_atoms(ratoms);
        for (KernelId a : ratoms) {
            auto dv = derived_of_kernel(a);
            if (dv && !ranking_.less(*dv, best))
                throw InvalidSystem("normal_form: substituting " + kernel_str(bestk) +
                                    " does not lower the rank (offending atom " + kernel_str(a) +
                                    "); the system is not orthonomic under this ranking");
        }
        cur = cur.substitute({{bestk, rep}});
    }
    throw InvalidSystem("normal_form did not terminate (is the system orthonomic?)");
}

IsZeroResult PdeSystem::restricted_is_zero(const Expr& e, const ProbeOptions& opts) const {
    return is_zero(normal_form(e), opts);
}

PdeSystem PdeSystem::combined_with(const PdeSystem& other) const {
    PdeSystem r(*ctx_, ranking_);
    for (auto& eq : eqs_) r.add_equation(eq.lead, eq.omega, eq.name);
    for (auto& eq : other.eqs_) r.add_equation(eq.lead, eq.omega, "c_" + eq.name);
    for (auto& s : syzygies_) r.syzygies_.push_back(s);
    r.finalize();
    return r;
}

} // namespace jetlaw
