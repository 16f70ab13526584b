#pragma once

#include "jetlaw/expr.hpp"
#include "jetlaw/linop.hpp"

#include <optional>

namespace jetlaw {

/// A derivative coordinate: u^alpha_J, or a derivative atom of a declared
/// function symbol whose arguments are all independent variables.
struct DerivedVar {
    VarId family = kNoVar; // dependent variable or function symbol
    MultiIndex J;           // over independent-variable ids

    bool operator==(const DerivedVar& o) const { return family == o.family && J == o.J; }
};

/// Kernel -> DerivedVar when the kernel is a jet variable or an
/// all-independent-argument function derivative.
std::optional<DerivedVar> derived_of_kernel(KernelId k);
KernelId kernel_of_derived(const DerivedVar& v);
Expr expr_of_derived(const DerivedVar& v);

// ---------------------------------------------------------------------------

struct Ranking {
    enum class Strategy { GrLex, Elim, Custom };
    Strategy strategy = Strategy::GrLex;
    std::vector<VarId> indep_order;  // position 0 first; revlex walks from the back
    std::vector<VarId> family_order; // later entries rank higher
    std::vector<VarId> elim;         // Elim: derivative counts in these compared first
    std::function<int(const DerivedVar&, const DerivedVar&)> custom;

    static Ranking grlex(const Context& ctx);
    static Ranking elimination(const Context& ctx, const std::vector<VarId>& elim_vars);

    int compare(const DerivedVar& a, const DerivedVar& b) const; // -1/0/+1
    bool less(const DerivedVar& a, const DerivedVar& b) const { return compare(a, b) < 0; }
};

// ---------------------------------------------------------------------------

struct Equation {
    std::string name;
    Expr written; // A_mu as declared
    DerivedVar lead;
    Expr omega; // monic, inter-reduced rhs: A_monic = lead - omega
};

struct SyzygyDecl {
    std::string name;
    std::vector<LinDiffOp> ops; // one per equation
    Expr extra;                 // remaining (e.g. quadratic-in-A) part
};

struct ValidationReport {
    bool ok = true;
    std::vector<std::string> problems;
};

enum class Classification { Principal, Parametric };

struct InvalidSystem : SymbolicError {
    using SymbolicError::SymbolicError;
};

class PdeSystem {
public:
    PdeSystem(const Context& ctx, Ranking ranking);

    /// `lead = rhs` declaration; A := lead - rhs.
    void add_equation(const DerivedVar& lead, const Expr& rhs, const std::string& name = "");
    /// As-written declaration A(x,[u]) with the variable to solve for.
    void add_written(const Expr& written, const DerivedVar& lead, const std::string& name = "");
    void add_syzygy(SyzygyDecl s) { syzygies_.push_back(std::move(s)); }

    /// Solve written forms, inter-reduce the right-hand sides, compute the
    /// written/monic mixing matrix. Must be called once after declarations.
    void finalize();

    ValidationReport validate() const;

    const Context& ctx() const { return *ctx_; }
    const Ranking& ranking() const { return ranking_; }
    const std::vector<Equation>& equations() const { return eqs_; }
    const std::vector<SyzygyDecl>& syzygies() const { return syzygies_; }
    std::uint64_t tag() const { return tag_; }

    Expr a_written(std::size_t mu) const { return eqs_.at(mu).written; }
    Expr a_monic(std::size_t mu) const;

    /// written_mu = sum_nu mix(mu,nu) * monic_nu, when representable with
    /// plain expression coefficients.
    bool mix_zero_order() const { return mix_zero_order_; }
    const std::vector<std::vector<Expr>>& mix() const { return mix_; }

    struct Principality {
        Classification cls;
        std::size_t eq = 0; // when principal
        MultiIndex K;
    };
    Principality classify(const DerivedVar& v) const;

    Expr normal_form(const Expr& e) const;
    IsZeroResult restricted_is_zero(const Expr& e, const ProbeOptions& opts = {}) const;

    /// This system plus the equations of `other` (e.g. a constraint system on
    /// arbitrary-function symbols).
    PdeSystem combined_with(const PdeSystem& other) const;

private:
    const Context* ctx_;
    Ranking ranking_;
    std::vector<Equation> eqs_;
    std::vector<SyzygyDecl> syzygies_;
    std::vector<std::vector<Expr>> mix_;
    bool mix_zero_order_ = true;
    bool finalized_ = false;
    std::uint64_t tag_;

    friend class CharFormWorker;
};

} // namespace jetlaw
