#include <doctest.h>

#include <cmath>
#include <functional>
#include <numeric>
#include <random>

#include "dirmoment/errors.hpp"
#include "dirmoment/shifts.hpp"

using namespace dirmoment;

namespace {

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

// Sum over ordered factorizations m = m1 ... mr of prod mi^{-xi_i}, by direct recursion over divisors.
cplx tau_brute(const std::vector<cplx>& xs, std::int64_t m, std::size_t i = 0) {
    if (i == xs.size()) return m == 1 ? 1.0 : 0.0;
    cplx s = 0;
    for (std::int64_t d = 1; d <= m; ++d)
        if (m % d == 0) s += std::pow(static_cast<double>(d), -xs[i]) * tau_brute(xs, m / d, i + 1);
    return s;
}

// Power series coefficients by explicit polynomial products, truncated at degree a.
cplx ratio_brute(const std::vector<cplx>& E, const std::vector<cplx>& F, double p, int a) {
    std::vector<cplx> c(a + 1, 0.0);
    c[0] = 1;
    for (cplx rho : F) {
        std::vector<cplx> n(a + 1, 0.0);
        for (int j = 0; j <= a; ++j) {
            n[j] += c[j];
            if (j + 1 <= a) n[j + 1] -= std::pow(p, -rho) * c[j];
        }
        c = n;
    }
    for (cplx xi : E) {
        std::vector<cplx> n(a + 1, 0.0);
        for (int j = 0; j <= a; ++j)
            for (int b = 0; j + b <= a; ++b) n[j + b] += c[j] * std::pow(p, -xi * static_cast<double>(b));
        c = n;
    }
    return c[a];
}

}  // namespace

TEST_CASE("shift_set translates every element and keeps multiplicities") {
    cplx a(0.1, 0.2), s(0.3, -0.1);
    ShiftSet one{a};
    CHECK(shift_set(one, s) == ShiftSet::unchecked({a + s}));
    CHECK(shift_set(ShiftSet{}, s).empty());
    ShiftSet two{a, a};
    ShiftSet t = shift_set(two, s);
    CHECK(t.size() == 2);
    CHECK(t.count(a + s) == 2);
}

TEST_CASE("multiset union and floored difference") {
    ShiftSet A{0.1, 0.1, 0.2}, B{0.1, 0.3};
    ShiftSet U = A.united(B);
    CHECK(U.size() == 5);
    CHECK(U.count(0.1) == 3);
    ShiftSet D = A.minus(B);
    CHECK(D == ShiftSet{0.1, 0.2});
    CHECK(ShiftSet{0.1}.minus(ShiftSet{0.1, 0.1}).empty());
    CHECK(A.has_repeats());
    CHECK_FALSE(B.has_repeats());
    // Equality ignores insertion order.
    CHECK(ShiftSet{cplx(0.2, 0.1), cplx(-0.1, 0.0)} == ShiftSet{cplx(-0.1, 0.0), cplx(0.2, 0.1)});
}

TEST_CASE("ShiftSet construction rejects shifts outside the unit disk") {
    CHECK_THROWS_AS(ShiftSet(std::vector<cplx>{cplx(1.5, 0)}), DomainError);
    CHECK_THROWS_AS(ShiftSet(std::vector<cplx>{cplx(NAN, 0)}), DomainError);
    CHECK_NOTHROW(ShiftSet::unchecked({cplx(3, 0)}));
}

TEST_CASE("tau examples") {
    CHECK(close(tau(ShiftSet{0.0, 0.0}, 12), 6.0, 1e-13));
    CHECK(close(tau(ShiftSet{}, 1), 1.0, 0));
    CHECK(close(tau(ShiftSet{}, 7), 0.0, 0));
    cplx al(0.13, -0.07);
    CHECK(close(tau(ShiftSet{al}, 8), std::pow(8.0, -al), 1e-14));
    cplx s(0.21, 0.4);
    CHECK(close(tau(shift_set(ShiftSet{al}, s), 8), std::pow(8.0, -s) * tau(ShiftSet{al}, 8), 1e-14));
    CHECK_THROWS_AS(tau(ShiftSet{0.0}, 0), DomainError);
    CHECK_THROWS_AS(tau(ShiftSet{0.0}, -3), DomainError);
}

TEST_CASE("tau agrees with direct enumeration of ordered factorizations") {
    std::mt19937_64 g(7);
    std::uniform_real_distribution<double> u(-0.3, 0.3);
    for (int r = 0; r <= 3; ++r) {
        std::vector<cplx> xs;
        for (int i = 0; i < r; ++i) xs.emplace_back(u(g), u(g));
        ShiftSet E = ShiftSet::unchecked(xs);
        for (std::int64_t m = 1; m <= 72; ++m) CHECK(close(tau(E, m), tau_brute(xs, m), 1e-11));
    }
}

TEST_CASE("tau_pp examples and conventions") {
    for (std::int64_t p : {2, 3, 7})
        for (int a = 0; a <= 6; ++a) CHECK(close(tau_pp(ShiftSet{0.0, 0.0}, p, a), a + 1.0, 1e-12));
    CHECK(close(tau_pp(ShiftSet{0.2, cplx(0, 1)}, 11, 0), 1.0, 0));
    cplx al(0.1, 0.3), be(-0.2, 0.05);
    CHECK(close(tau_pp(ShiftSet{al, be}, 5, 1), std::pow(5.0, -al) + std::pow(5.0, -be), 1e-14));
    CHECK(tau_pp(ShiftSet{al}, 5, -1) == cplx(0));
    CHECK_THROWS_AS(tau_pp(ShiftSet{al}, 5, -2), DomainError);
    CHECK_THROWS_AS(tau_pp(ShiftSet{al}, 6, 1), DomainError);
}

TEST_CASE("TauTable matches tau") {
    ShiftSet E{cplx(0.1, 0.2), cplx(-0.15, 0.0), cplx(0.05, -0.3)};
    TauTable t(E, 500);
    CHECK(t.limit() == 500);
    for (std::int64_t m = 1; m <= 500; ++m) CHECK(close(t[m], tau(E, m), 1e-12));
}

TEST_CASE("ratio_coeff examples") {
    for (int a = 0; a <= 5; ++a) CHECK(close(ratio_coeff(ShiftSet{0.0}, ShiftSet{0.0}, 3, a), a == 0 ? 1.0 : 0.0, 1e-14));
    CHECK(close(ratio_coeff(ShiftSet{}, ShiftSet{0.0}, 5, 1), -1.0, 1e-15));
    // (A + {-beta}) / {alpha} with alpha in A reduces to tau of A - {alpha} + {-beta}.
    cplx al(0.1, 0.05), be(-0.07, 0.2);
    ShiftSet A{al, cplx(0.2, -0.1), cplx(-0.15, 0.0)};
    for (std::int64_t p : {2, 5, 13})
        for (int a = 0; a <= 6; ++a)
            CHECK(close(ratio_coeff(A.with(-be), ShiftSet{al}, p, a), tau_pp(A.without(al).with(-be), p, a), 1e-12));
}

TEST_CASE("ratio_coeff agrees with explicit polynomial expansion") {
    std::vector<cplx> E{cplx(0.1, 0.2), cplx(-0.2, 0.1), cplx(0.05, 0.0)}, F{cplx(0.3, -0.1), cplx(0.0, 0.4)};
    auto series = ratio_coeff_series(ShiftSet::unchecked(E), ShiftSet::unchecked(F), 7.0, 8);
    for (int a = 0; a <= 8; ++a) {
        cplx ref = ratio_brute(E, F, 7.0, a);
        CHECK(close(ratio_coeff(ShiftSet::unchecked(E), ShiftSet::unchecked(F), 7, a), ref, 1e-12));
        CHECK(close(series[a], ref, 1e-12));
    }
    // With F empty the coefficients are tau.
    for (int a = 0; a <= 6; ++a)
        CHECK(close(ratio_coeff(ShiftSet::unchecked(E), ShiftSet{}, 3, a), tau_pp(ShiftSet::unchecked(E), 3, a), 1e-13));
}

TEST_CASE("tau is multiplicative on coprime arguments") {
    std::mt19937_64 g(11);
    std::uniform_real_distribution<double> u(-0.25, 0.25);
    std::uniform_int_distribution<std::int64_t> mi(1, 80);
    for (int i = 0; i < 300; ++i) {
        ShiftSet E = ShiftSet::unchecked({cplx(u(g), u(g)), cplx(u(g), u(g))});
        std::int64_t m = mi(g), n = mi(g);
        if (std::gcd(m, n) != 1) continue;
        CHECK(close(tau(E, m * n), tau(E, m) * tau(E, n), 1e-11));
    }
}

TEST_CASE("remove-element recursion") {
    ShiftSet E{cplx(0.1, 0.2), cplx(-0.15, 0.0), cplx(0.05, -0.3)};
    for (cplx gma : E)
        for (std::int64_t p : {2, 3, 17})
            for (int m = 0; m <= 6; ++m)
                CHECK(close(tau_pp(E, p, m),
                            tau_pp(E.without(gma), p, m) + std::pow(static_cast<double>(p), -gma) * tau_pp(E, p, m - 1),
                            1e-11));
}
