#include "jetlaw/detail/intern.hpp"
#include "jetlaw/expr.hpp"
#include "jetlaw/poly.hpp"

#include <atomic>
#include <deque>
#include <mutex>
#include <sstream>
#include <unordered_map>

namespace jetlaw {

namespace {

// Process-wide registries. Entries are immutable after interning (except for
// declaration rules, which are set once before use); a deque keeps references
// stable across growth.
struct Registry {
    std::mutex mtx;
    std::deque<SymbolData> symbols;
    std::deque<KernelData> kernels;
    std::unordered_map<std::string, KernelId> kernel_by_key;
    std::atomic<std::uint32_t> next_ctx{1};
    std::atomic<std::uint64_t> next_tag{1};
};

Registry& reg() {
    static Registry* r = new Registry(); // leaked intentionally: lives for the process
    return *r;
}

std::string idx_key(const MultiIndex& j) {
    std::ostringstream os;
    for (auto& [k, v] : j.entries()) os << k << "." << v << ",";
    return os.str();
}

} // namespace

namespace detail {

const char* prim_name(PrimFn f) {
    switch (f) {
        case PrimFn::Exp: return "exp";
        case PrimFn::Ln: return "ln";
        case PrimFn::Sin: return "sin";
        case PrimFn::Cos: return "cos";
        case PrimFn::Tan: return "tan";
        case PrimFn::Atan: return "atan";
    }
    return "?";
}

VarId intern_symbol(SymbolData&& sd) {
    auto& r = reg();
    std::lock_guard<std::mutex> lock(r.mtx);
    r.symbols.push_back(std::move(sd));
    return static_cast<VarId>(r.symbols.size() - 1);
}

SymbolData& symbol_mutable(VarId id) { return reg().symbols.at(id); }

KernelId intern_kernel(KernelData&& kd) {
    auto& r = reg();
    std::lock_guard<std::mutex> lock(r.mtx);
    auto it = r.kernel_by_key.find(kd.key);
    if (it != r.kernel_by_key.end()) return it->second;
    r.kernels.push_back(std::move(kd));
    KernelId id = static_cast<KernelId>(r.kernels.size() - 1);
    r.kernel_by_key.emplace(r.kernels.back().key, id);
    return id;
}

KernelId intern_prim(PrimFn fn, const Expr& arg) {
    KernelData kd;
    kd.kind = KernelKind::Prim;
    kd.prim = fn;
    kd.arg = std::make_shared<const Expr>(arg);
    kd.key = std::string("p:") + prim_name(fn) + ":" + ratfun_key(arg.rep());
    return intern_kernel(std::move(kd));
}

KernelId intern_root(const Expr& radicand, std::uint32_t q) {
    KernelData kd;
    kd.kind = KernelKind::Root;
    kd.rootq = q;
    kd.arg = std::make_shared<const Expr>(radicand);
    kd.key = "r:" + std::to_string(q) + ":" + ratfun_key(radicand.rep());
    return intern_kernel(std::move(kd));
}

KernelId intern_opaque(VarId fn, const Expr& arg, std::uint32_t primes) {
    KernelData kd;
    kd.kind = KernelKind::Opaque;
    kd.sym = fn;
    kd.primes = primes;
    kd.arg = std::make_shared<const Expr>(arg);
    kd.key = "o:" + std::to_string(fn) + ":" + std::to_string(primes) + ":" + ratfun_key(arg.rep());
    return intern_kernel(std::move(kd));
}

} // namespace detail

const SymbolData& symbol(VarId id) { return reg().symbols.at(id); }
const KernelData& kernel(KernelId id) { return reg().kernels.at(id); }

bool kernel_order_less(KernelId a, KernelId b) {
    if (a == b) return false;
    return kernel(a).key < kernel(b).key;
}

KernelId scale_kernel() {
    KernelData kd;
    kd.kind = KernelKind::Scale;
    kd.key = "s";
    return detail::intern_kernel(std::move(kd));
}

KernelId acoord_kernel(std::uint64_t tag, std::uint32_t eq, const MultiIndex& K) {
    KernelData kd;
    kd.kind = KernelKind::ACoord;
    kd.acoord_tag = tag;
    kd.acoord_eq = eq;
    kd.idx = K;
    kd.key = "a:" + std::to_string(tag) + ":" + std::to_string(eq) + ":" + idx_key(K);
    return detail::intern_kernel(std::move(kd));
}

// ---------------------------------------------------------------------------
// Context
// ---------------------------------------------------------------------------

Context::Context() {
    ctx_id_ = reg().next_ctx.fetch_add(1);
    SymbolData sd;
    sd.kind = SymKind::ConstSym;
    sd.name = "@";
    sd.ctx_id = ctx_id_;
    placeholder_ = detail::intern_symbol(std::move(sd));
}

VarId Context::check_new(const std::string& name) {
    if (name.empty()) throw SymbolicError("empty symbol name");
    if (by_name_.count(name)) throw SymbolicError("symbol redeclared: " + name);
    return kNoVar;
}

VarId Context::declare_independent(const std::string& name) {
    check_new(name);
    SymbolData sd{SymKind::Independent, name, ctx_id_, {}, {}, {}};
    VarId id = detail::intern_symbol(std::move(sd));
    indep_.push_back(id);
    by_name_[name] = id;
    return id;
}

VarId Context::declare_dependent(const std::string& name) {
    check_new(name);
    SymbolData sd{SymKind::Dependent, name, ctx_id_, {}, {}, {}};
    VarId id = detail::intern_symbol(std::move(sd));
    dep_.push_back(id);
    by_name_[name] = id;
    return id;
}

VarId Context::declare_function(const std::string& name, const std::vector<VarId>& args) {
    check_new(name);
    for (VarId a : args) {
        auto k = symbol(a).kind;
        if (k != SymKind::Independent && k != SymKind::Dependent)
            throw SymbolicError("function argument must be a declared variable: " + name);
    }
    SymbolData sd{SymKind::FnSymbol, name, ctx_id_, args, {}, {}};
    VarId id = detail::intern_symbol(std::move(sd));
    fns_.push_back(id);
    by_name_[name] = id;
    return id;
}

VarId Context::declare_opaque(const std::string& name) {
    check_new(name);
    SymbolData sd{SymKind::OpaqueFn, name, ctx_id_, {}, {}, {}};
    VarId id = detail::intern_symbol(std::move(sd));
    fns_.push_back(id);
    by_name_[name] = id;
    return id;
}

VarId Context::declare_constant(const std::string& name) {
    check_new(name);
    SymbolData sd{SymKind::ConstSym, name, ctx_id_, {}, {}, {}};
    VarId id = detail::intern_symbol(std::move(sd));
    consts_.push_back(id);
    by_name_[name] = id;
    return id;
}

void Context::set_opaque_rule(VarId fn, const Expr& rule) {
    if (symbol(fn).kind != SymKind::OpaqueFn) throw SymbolicError("set_opaque_rule: not an opaque function");
    detail::symbol_mutable(fn).opaque_rule = rule;
}

void Context::set_function_rule(VarId fn, VarId arg_var, const Expr& rule) {
    const auto& sd = symbol(fn);
    if (sd.kind != SymKind::FnSymbol) throw SymbolicError("set_function_rule: not a function symbol");
    for (std::size_t i = 0; i < sd.args.size(); ++i) {
        if (sd.args[i] == arg_var) {
            detail::symbol_mutable(fn).fn_arg_rules.emplace(i, rule);
            return;
        }
    }
    throw SymbolicError("set_function_rule: variable is not an argument of " + sd.name);
}

VarId Context::find(const std::string& name) const {
    auto it = by_name_.find(name);
    return it == by_name_.end() ? kNoVar : it->second;
}

namespace detail {

KernelId make_indep_kernel(VarId v) {
    KernelData kd;
    kd.kind = KernelKind::Indep;
    kd.sym = v;
    kd.key = "x:" + std::to_string(v);
    return intern_kernel(std::move(kd));
}

KernelId make_jet_kernel(VarId dep, const MultiIndex& J) {
    KernelData kd;
    kd.kind = KernelKind::Jet;
    kd.sym = dep;
    kd.idx = J;
    kd.key = "j:" + std::to_string(dep) + ":" + idx_key(J);
    return intern_kernel(std::move(kd));
}

KernelId make_const_kernel(VarId c) {
    KernelData kd;
    kd.kind = KernelKind::Const;
    kd.sym = c;
    kd.key = "c:" + std::to_string(c);
    return intern_kernel(std::move(kd));
}

KernelId make_fn_deriv_kernel(VarId fn, const MultiIndex& counts) {
    KernelData kd;
    kd.kind = KernelKind::FnDeriv;
    kd.sym = fn;
    kd.idx = counts;
    kd.key = "f:" + std::to_string(fn) + ":" + idx_key(counts);
    return intern_kernel(std::move(kd));
}

} // namespace detail

KernelId Context::indep_kernel(VarId v) const { return detail::make_indep_kernel(v); }
KernelId Context::jet_kernel(VarId dep, const MultiIndex& J) const { return detail::make_jet_kernel(dep, J); }
KernelId Context::const_kernel(VarId c) const { return detail::make_const_kernel(c); }
KernelId Context::fn_deriv_kernel(VarId fn, const MultiIndex& counts) const { return detail::make_fn_deriv_kernel(fn, counts); }

Expr Context::indep(VarId v) const { return Expr::from_kernel(indep_kernel(v)); }
Expr Context::constant(VarId c) const { return Expr::from_kernel(const_kernel(c)); }
Expr Context::placeholder_expr() const { return Expr::from_kernel(const_kernel(placeholder_)); }

Expr Context::jet(VarId dep, const MultiIndex& J) const {
    if (symbol(dep).kind != SymKind::Dependent) throw SymbolicError("jet: not a dependent variable");
    return Expr::from_kernel(jet_kernel(dep, J));
}

std::vector<std::uint32_t> Context::dense(const MultiIndex& J) const {
    std::vector<std::uint32_t> out(indep_.size(), 0);
    for (std::size_t i = 0; i < indep_.size(); ++i) out[i] = J.get(indep_[i]);
    return out;
}

MultiIndex Context::from_dense(const std::vector<std::uint32_t>& e) const {
    std::vector<std::pair<VarId, std::uint32_t>> pairs;
    for (std::size_t i = 0; i < e.size() && i < indep_.size(); ++i)
        if (e[i]) pairs.emplace_back(indep_[i], e[i]);
    return MultiIndex::from_pairs(std::move(pairs));
}

// ---------------------------------------------------------------------------
// Printing
// ---------------------------------------------------------------------------

std::string kernel_str(KernelId id) {
    const KernelData& kd = kernel(id);
    switch (kd.kind) {
        case KernelKind::Indep:
        case KernelKind::Const:
            return symbol(kd.sym).name;
        case KernelKind::Jet: {
            std::string s = symbol(kd.sym).name;
            if (kd.idx.empty()) return s;
            s += "_";
            for (auto& [v, n] : kd.idx.entries())
                for (std::uint32_t i = 0; i < n; ++i) s += symbol(v).name;
            return s;
        }
        case KernelKind::FnDeriv: {
            const auto& sd = symbol(kd.sym);
            std::string s = sd.name;
            if (kd.idx.empty()) return s;
            s += "_";
            for (auto& [pos, n] : kd.idx.entries())
                for (std::uint32_t i = 0; i < n; ++i) s += symbol(sd.args.at(pos)).name;
            return s;
        }
        case KernelKind::Prim:
            return std::string(detail::prim_name(kd.prim)) + "(" + kd.arg->str() + ")";
        case KernelKind::Root:
            if (kd.rootq == 2) return "sqrt(" + kd.arg->str() + ")";
            return "(" + kd.arg->str() + ")^(1/" + std::to_string(kd.rootq) + ")";
        case KernelKind::Opaque: {
            std::string s = symbol(kd.sym).name;
            for (std::uint32_t i = 0; i < kd.primes; ++i) s += "'";
            return s + "(" + kd.arg->str() + ")";
        }
        case KernelKind::Scale:
            return "$tau";
        case KernelKind::ACoord: {
            std::string s = "$A" + std::to_string(kd.acoord_eq + 1);
            if (!kd.idx.empty()) {
                s += "_";
                for (auto& [v, n] : kd.idx.entries())
                    for (std::uint32_t i = 0; i < n; ++i) s += symbol(v).name;
            }
            return s;
        }
    }
    return "?";
}

} // namespace jetlaw
