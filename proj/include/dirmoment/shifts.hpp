#pragma once

#include <cstdint>
#include <initializer_list>
#include <vector>

#include "dirmoment/arith.hpp"

namespace dirmoment {

// Finite multiset of complex shifts, kept in canonical (re, im) lexicographic order.
class ShiftSet {
public:
    ShiftSet() = default;
    ShiftSet(std::initializer_list<cplx> xs);
    // User-facing constructor: rejects |shift| > 1.
    explicit ShiftSet(std::vector<cplx> xs);

    // Translates and other derived sets are not bounded by 1 (e.g. A_s with s on a contour).
    static ShiftSet unchecked(std::vector<cplx> xs);

    const std::vector<cplx>& values() const { return v_; }
    std::size_t size() const { return v_.size(); }
    bool empty() const { return v_.empty(); }
    auto begin() const { return v_.begin(); }
    auto end() const { return v_.end(); }

    ShiftSet shifted(cplx s) const;
    ShiftSet negated() const;
    ShiftSet united(const ShiftSet& o) const;
    ShiftSet minus(const ShiftSet& o) const;  // multiplicities floored at zero
    ShiftSet with(cplx x) const { return united(unchecked({x})); }
    ShiftSet without(cplx x) const { return minus(unchecked({x})); }
    std::size_t count(cplx x) const;
    bool has_repeats() const;

    bool operator==(const ShiftSet& o) const { return v_ == o.v_; }

private:
    void canonicalize();
    std::vector<cplx> v_;
};

ShiftSet shift_set(const ShiftSet& E, cplx s);

// tau_E(m) = sum over m1...mr = m of prod mi^{-xi_i}.
cplx tau(const ShiftSet& E, std::int64_t m);

// tau_E(p^a); a = -1 gives 0 by convention.
cplx tau_pp(const ShiftSet& E, std::int64_t p, int a);

// tau_E(p^a) for a = 0..M: coefficients of prod (1 - p^{-xi} x)^{-1}.
std::vector<cplx> tau_pp_series(const ShiftSet& E, double p, int M);

// Coefficient of x^a in prod_F (1 - p^{-rho} x) * prod_E (1 - p^{-xi} x)^{-1}.
cplx ratio_coeff(const ShiftSet& E, const ShiftSet& F, std::int64_t p, int a);
std::vector<cplx> ratio_coeff_series(const ShiftSet& E, const ShiftSet& F, double p, int M);

// Dense table of tau_E(m) for 1 <= m <= limit (index 0 unused, stored as 0).
class TauTable {
public:
    TauTable(const ShiftSet& E, std::int64_t limit);
    cplx operator[](std::int64_t m) const { return t_[m]; }
    std::int64_t limit() const { return static_cast<std::int64_t>(t_.size()) - 1; }
    // Negative-control hook for the identity runner: perturbs one entry.
    void corrupt(std::int64_t m, cplx delta) { t_[m] += delta; }

private:
    std::vector<cplx> t_;
};

}  // namespace dirmoment
