#include "dirmoment/shifts.hpp"

#include <algorithm>
#include <cmath>

#include "dirmoment/errors.hpp"

namespace dirmoment {

namespace {
bool lex_less(cplx a, cplx b) {
    return a.real() < b.real() || (a.real() == b.real() && a.imag() < b.imag());
}
}  // namespace

ShiftSet::ShiftSet(std::initializer_list<cplx> xs) : ShiftSet(std::vector<cplx>(xs)) {}

ShiftSet::ShiftSet(std::vector<cplx> xs) : v_(std::move(xs)) {
    for (cplx x : v_) {
        if (!std::isfinite(x.real()) || !std::isfinite(x.imag()))
            throw DomainError("ShiftSet: non-finite shift");
        if (std::abs(x) > 1.0) throw DomainError("ShiftSet: |shift| > 1");
    }
    canonicalize();
}

ShiftSet ShiftSet::unchecked(std::vector<cplx> xs) {
    ShiftSet s;
    s.v_ = std::move(xs);
    s.canonicalize();
    return s;
}

void ShiftSet::canonicalize() { std::sort(v_.begin(), v_.end(), lex_less); }

ShiftSet ShiftSet::shifted(cplx s) const {
    std::vector<cplx> out(v_);
    for (cplx& x : out) x += s;
    return unchecked(std::move(out));
}

ShiftSet ShiftSet::negated() const {
    std::vector<cplx> out(v_);
    for (cplx& x : out) x = -x;
    return unchecked(std::move(out));
}

ShiftSet ShiftSet::united(const ShiftSet& o) const {
    std::vector<cplx> out(v_);
    out.insert(out.end(), o.v_.begin(), o.v_.end());
    return unchecked(std::move(out));
}

ShiftSet ShiftSet::minus(const ShiftSet& o) const {
    std::vector<cplx> out(v_);
    for (cplx x : o.v_) {
        auto it = std::find(out.begin(), out.end(), x);
        if (it != out.end()) out.erase(it);
    }
    return unchecked(std::move(out));
}

std::size_t ShiftSet::count(cplx x) const {
    return static_cast<std::size_t>(std::count(v_.begin(), v_.end(), x));
}

bool ShiftSet::has_repeats() const {
    for (std::size_t i = 1; i < v_.size(); ++i)
        if (v_[i] == v_[i - 1]) return true;
    return false;
}

ShiftSet shift_set(const ShiftSet& E, cplx s) { return E.shifted(s); }

std::vector<cplx> tau_pp_series(const ShiftSet& E, double p, int M) {
    std::vector<cplx> c(M + 1, 0.0);
    c[0] = 1.0;
    for (cplx xi : E) {
        cplx r = ppow(p, xi);
        for (int j = 1; j <= M; ++j) c[j] += r * c[j - 1];
    }
    return c;
}

std::vector<cplx> ratio_coeff_series(const ShiftSet& E, const ShiftSet& F, double p, int M) {
    std::vector<cplx> c = tau_pp_series(E, p, M);
    for (cplx rho : F) {
        cplx r = ppow(p, rho);
        for (int j = M; j >= 1; --j) c[j] -= r * c[j - 1];
    }
    return c;
}

cplx tau_pp(const ShiftSet& E, std::int64_t p, int a) {
    if (a < -1) throw DomainError("tau_pp: exponent below -1");
    if (a == -1) return 0.0;
    if (!is_prime(p)) throw DomainError("tau_pp: p is not prime");
    return tau_pp_series(E, static_cast<double>(p), a)[a];
}

cplx ratio_coeff(const ShiftSet& E, const ShiftSet& F, std::int64_t p, int a) {
    if (a < 0) throw DomainError("ratio_coeff: negative exponent");
    if (!is_prime(p)) throw DomainError("ratio_coeff: p is not prime");
    return ratio_coeff_series(E, F, static_cast<double>(p), a)[a];
}

cplx tau(const ShiftSet& E, std::int64_t m) {
    if (m < 1) throw DomainError("tau: m must be positive");
    cplx out = 1.0;
    for (auto [p, e] : factorize(m)) out *= tau_pp_series(E, static_cast<double>(p), e)[e];
    return out;
}

TauTable::TauTable(const ShiftSet& E, std::int64_t limit) : t_(std::max<std::int64_t>(limit, 0) + 1, 0.0) {
    if (limit < 1) return;
    t_[1] = 1.0;
    SpfSieve sieve(limit);
    // prime-power values first, then fill by m = p^e * r with p the smallest prime factor.
    std::vector<std::vector<cplx>> pp(limit + 1);
    for (std::int64_t p : primes_up_to(limit)) {
        int emax = 0;
        for (std::int64_t x = p; x <= limit; x *= p) {
            ++emax;
            if (x > limit / p) break;
        }
        pp[p] = tau_pp_series(E, static_cast<double>(p), emax);
    }
    for (std::int64_t m = 2; m <= limit; ++m) {
        std::int64_t p = sieve.spf(m), r = m;
        int e = 0;
        while (r % p == 0) {
            r /= p;
            ++e;
        }
        t_[m] = t_[r] * pp[p][e];
    }
}

}  // namespace dirmoment
