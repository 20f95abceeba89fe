#include <doctest.h>

#include <cmath>
#include <random>

#include "dirmoment/config.hpp"
#include "dirmoment/errors.hpp"
#include "dirmoment/identities.hpp"
#include "dirmoment/moment.hpp"
#include "dirmoment/recipe.hpp"

using namespace dirmoment;

namespace {

double rel(cplx a, cplx b) { return std::abs(a - b) / std::abs(b); }

// Direct prime-power double sum for the local factor: pairs p^i h = p^j k at p, 200 terms per side.
cplx local_factor_direct(std::int64_t p, const ShiftSet& E1, const ShiftSet& E2, int a, int b) {
    double pd = static_cast<double>(p);
    cplx pref = 1;
    for (cplx g : E1)
        for (cplx d : E2) pref *= 1.0 - std::pow(pd, -1.0 - g - d);
    auto t1 = tau_pp_series(E1, pd, 260), t2 = tau_pp_series(E2, pd, 260);
    cplx s = 0;
    for (int i = 0; i <= 200; ++i) {
        int j = i + a - b;
        if (j < 0 || j > 200) continue;
        s += t1[i] * t2[j] * std::pow(pd, -0.5 * (i + j));
    }
    return pref * s;
}

MomentConfig small_config(double Q, ShiftSet A, ShiftSet B, std::int64_t h = 1, std::int64_t k = 1) {
    MomentConfig cfg = default_config(Q);
    cfg.A = std::move(A);
    cfg.B = std::move(B);
    cfg.h = h;
    cfg.k = k;
    return cfg;
}

// Cheaper settings for the circle-contour tests; the certificates widen accordingly.
MomentConfig contour_config(double Q, ShiftSet A, ShiftSet B, std::int64_t h = 1, std::int64_t k = 1) {
    MomentConfig cfg = small_config(Q, std::move(A), std::move(B), h, k);
    cfg.trunc.P = 1000;
    cfg.grid.T_s = 300;
    cfg.grid.T_u = 150;
    cfg.grid.circle_points = 8;
    return cfg;
}

IdentityOptions small_suite() {
    IdentityOptions o;
    o.kfun_cases = 6;
    o.product_cases = 3;
    o.P = 1000;
    o.P_check = 10000;
    return o;
}

}  // namespace

TEST_CASE("local factor examples") {
    EulerTruncation tr;
    double sigma = 0.05;
    SwapTermSpec zero{ShiftSet{0.0}, ShiftSet{0.0}, {}, {}};
    // (1 - p^{-1-2 sigma}) sum_m p^{-m(1 + 2 sigma)} sums to 1.
    for (std::int64_t p : {2, 3, 101}) {
        LocalFactor f = local_factor_I(p, zero, sigma, sigma, 1, 1, tr);
        cplx direct = 0;
        double x = std::pow(static_cast<double>(p), -1 - 2 * sigma);
        for (int m = 199; m >= 0; --m) direct += std::pow(x, m);
        direct *= 1.0 - x;
        CHECK(std::abs(f.value - direct) < 1e-14);
        CHECK(std::abs(f.value - 1.0) < 1e-14);
    }
}

TEST_CASE("local factors against direct prime-power sums") {
    EulerTruncation tr;
    ShiftSet A{cplx(0.03, 0), cplx(-0.02, 0.01)}, B{cplx(0.01, 0), cplx(-0.04, 0)};
    cplx s1(0.05, 3.2), s2(0.05, -1.7);
    for (std::int64_t h : {1, 2, 12})
        for (std::int64_t k : {1, 3, 4})
            for (std::int64_t p : {2, 3, 5, 7}) {
                int a = ord_p(h, p), b = ord_p(k, p);
                if (std::gcd(h, k) != 1) continue;
                SwapTermSpec z{A, B, {}, {}};
                CHECK(rel(local_factor_I(p, z, s1, s2, h, k, tr).value,
                          local_factor_direct(p, A.shifted(s1), B.shifted(s2), a, b)) < 1e-12);
                for (cplx al : A)
                    for (cplx be : B) {
                        SwapTermSpec one{A, B, {al}, {be}};
                        ShiftSet E1 = A.without(al).shifted(s1).with(-be - s2);
                        ShiftSet E2 = B.without(be).shifted(s2).with(-al - s1);
                        CHECK(rel(local_factor_I(p, one, s1, s2, h, k, tr).value, local_factor_direct(p, E1, E2, a, b)) <
                              1e-12);
                    }
            }
}

TEST_CASE("local factor symmetry, cutoff stability and the p | q branch") {
    EulerTruncation tr;
    ShiftSet A{cplx(0.03, 0), cplx(-0.02, 0.01)}, B{cplx(0.01, 0)};
    cplx s1(0.05, 2.0), s2(0.07, -5.0);
    for (std::int64_t p : {2, 3}) {
        LocalFactor f = local_factor_I(p, {A, B, {}, {}}, s1, s2, 6, 6, tr);
        LocalFactor g = local_factor_I(p, {B, A, {}, {}}, s2, s1, 6, 6, tr);
        CHECK(std::abs(f.value - g.value) < 1e-13);
        EulerTruncation longer = tr;
        longer.M = tr.M + 10;
        LocalFactor f2 = local_factor_I(p, {A, B, {}, {}}, s1, s2, 2, 3, tr);
        LocalFactor f3 = local_factor_I(p, {A, B, {}, {}}, s1, s2, 2, 3, longer);
        CHECK(std::abs(f2.value - f3.value) <= f2.tail + 1e-16);
    }
    SwapTermSpec z{A, B, {}, {}};
    LocalFactor q = local_factor_I(5, z, s1, s2, 1, 1, tr, true);
    cplx pref = 1;
    for (cplx g : A)
        for (cplx d : B) pref *= 1.0 - std::pow(5.0, -1.0 - g - d - s1 - s2);
    CHECK(std::abs(q.value - pref) < 1e-14);
    CHECK_THROWS_AS(local_factor_I(5, z, s1, s2, 5, 1, tr, true), PreconditionError);
    CHECK_THROWS_AS(local_factor_I(4, z, s1, s2, 1, 1, tr), DomainError);
}

TEST_CASE("swap term validation") {
    ShiftSet A{0.01, 0.02}, B{-0.01};
    SwapTermSpec ok{A, B, {0.01}, {-0.01}}, not_in_A{A, B, {0.03}, {-0.01}}, unequal{A, B, {0.01}, {}},
        two{A, B, {0.01, 0.02}, {-0.01, -0.01}};
    CHECK_NOTHROW(ok.validate());
    CHECK_THROWS_AS(not_in_A.validate(), PreconditionError);
    CHECK_THROWS_AS(unequal.validate(), PreconditionError);
    CHECK_THROWS_AS(two.validate(), PreconditionError);
}

TEST_CASE("sums over smooth numbers factor into Euler products") {
    // Sum over m with prime factors <= 13 and exponents <= 4 of tau_A(m) tau_B(m) m^{-s} against the product of
    // local sums; both sides are finite.
    ShiftSet A{cplx(0.1, 0.2), cplx(-0.05, 0)}, B{cplx(0.02, -0.1)};
    cplx s(0.7, 2.5);
    const std::vector<std::int64_t> ps{2, 3, 5, 7, 11, 13};
    cplx prod = 1;
    for (std::int64_t p : ps) {
        cplx loc = 0;
        for (int e = 0; e <= 4; ++e)
            loc += tau_pp(A, p, e) * tau_pp(B, p, e) * std::pow(static_cast<double>(p), -s * static_cast<double>(e));
        prod *= loc;
    }
    cplx direct = 0;
    std::vector<int> e(ps.size(), 0);
    while (true) {
        std::int64_t m = 1;
        for (std::size_t i = 0; i < ps.size(); ++i)
            for (int j = 0; j < e[i]; ++j) m *= ps[i];
        direct += tau(A, m) * tau(B, m) * std::pow(static_cast<double>(m), -s);
        std::size_t i = 0;
        while (i < ps.size() && ++e[i] > 4) e[i++] = 0;
        if (i == ps.size()) break;
    }
    CHECK(rel(direct, prod) < 1e-12);
}

TEST_CASE("prime tail bound dominates direct partial sums") {
    for (double delta : {0.1, 0.4}) {
        std::int64_t P = 1000;
        auto ps = primes_up_to(2000000);
        double direct = 0;
        for (std::int64_t p : ps)
            if (p > P) direct += std::pow(static_cast<double>(p), -1 - delta);
        CHECK(direct < prime_tail_sum(P, delta));
        CHECK(prime_tail_sum(10 * P, delta) < prime_tail_sum(P, delta));
    }
}

TEST_CASE("effective sigma") {
    MomentConfig cfg = small_config(100, ShiftSet{0.01}, ShiftSet{0.02});
    CHECK(effective_sigma(cfg) == doctest::Approx(0.05));
    cfg.A = ShiftSet{-0.2};
    cfg.B = ShiftSet{0.0};
    CHECK(effective_sigma(cfg) == doctest::Approx(0.15));
}

TEST_CASE("K and G products: identities and tail certificates") {
    IdentityOptions o = small_suite();
    for (const SuiteResult& r : {suite_kfunctional(o), suite_g_from_k(o), suite_g_shift(o), suite_euler_tails(o)}) {
        INFO(r.name << " worst " << r.worst);
        CHECK(r.cases > 0);
        CHECK(r.pass());
    }
}

TEST_CASE("K and G products reject inputs outside their convergence regimes") {
    EulerTruncation tr;
    ShiftSet A{0.01}, B{-0.02};
    CHECK_THROWS_AS(g_product(3.0, 0.01, -0.02, A, B, 1, 1, tr), PreconditionError);
    CHECK_THROWS_AS(g_product(1.0, 0.01, -0.02, A, B, 1, 1, tr), PreconditionError);
    CHECK_THROWS_AS(g_product(2.0, 0.5, -0.02, A, B, 1, 1, tr), PreconditionError);
    CHECK_THROWS_AS(k_product(0.0, 0.0, 1.0, A, B, 0.01, -0.02, 1, 1, tr), PreconditionError);
    CHECK_THROWS_AS(k_product(0.2, 0.2, 2.0, A, B, 0.01, -0.02, 1, 1, tr), PreconditionError);
    CHECK_THROWS_AS(k_product(-0.15, -0.08, 2.5, A, B, 0.01, -0.02, 1, 1, tr), PreconditionError);
}

TEST_CASE("zero-swap term equals the full diagonal sum") {
    // With every modulus kept (C >= 2Q) the diagonal D is exactly the zero-swap term.
    for (auto [h, k] : {std::pair<std::int64_t, std::int64_t>{1, 1}, {2, 1}}) {
        MomentConfig cfg = small_config(60, ShiftSet{0.01}, ShiftSet{-0.015}, h, k);
        cfg.C = 1e6;
        Certified I0 = compute_I(0, h, k, cfg);
        cplx D = split_LDU(cfg).D;
        INFO("h=" << h << " I0=" << I0.value << " D=" << D);
        CHECK(std::abs(I0.value - D) <= I0.error() + 1e-10 * std::abs(D));
    }
    // Reference configuration Q = 100, A = B = {0.01}.
    MomentConfig ref = small_config(100, ShiftSet{0.01}, ShiftSet{0.01});
    ref.C = 1e6;
    Certified I0 = compute_I(0, 1, 1, ref);
    CHECK(std::abs(I0.value - split_LDU(ref).D) <= I0.error() + 1e-10 * std::abs(I0.value));
}

TEST_CASE("zero-swap relabeling symmetry and conjugation symmetry") {
    MomentConfig a = small_config(50, ShiftSet{0.012, -0.03}, ShiftSet{0.02}, 3, 2);
    MomentConfig b = small_config(50, ShiftSet{0.02}, ShiftSet{0.012, -0.03}, 2, 3);
    Certified Ia = compute_I(0, 3, 2, a), Ib = compute_I(0, 2, 3, b);
    CHECK(std::abs(Ia.value - Ib.value) <= Ia.error() + Ib.error());
    CHECK(std::abs(Ia.value.imag()) <= Ia.error() + 1e-12 * std::abs(Ia.value));
    Certified I1 = compute_I(1, 3, 2, a);
    CHECK(std::abs(I1.value.imag()) <= I1.error() + 1e-12 * std::abs(I1.value));
}

TEST_CASE("one-swap term: confluent contour form agrees with the distinct-shift form") {
    MomentConfig cfg = contour_config(50, ShiftSet{0.002}, ShiftSet{-0.003});
    Certified direct = compute_I(1, 1, 1, cfg);
    Certified conf = i1_confluent(1, 1, cfg);
    INFO("direct " << direct.value << " confluent " << conf.value);
    CHECK(std::abs(direct.value - conf.value) <= direct.error() + conf.error());

    MomentConfig two = contour_config(50, ShiftSet{0.002, -0.004}, ShiftSet{0.001, -0.003}, 2, 1);
    Certified d2 = compute_I(1, 2, 1, two), c2 = i1_confluent(2, 1, two);
    CHECK(std::abs(d2.value - c2.value) <= d2.error() + c2.error());
}

TEST_CASE("one-swap term with repeated and all-zero shifts") {
    MomentConfig zero = contour_config(50, ShiftSet{0.0}, ShiftSet{0.0});
    Certified z = i1_confluent(1, 1, zero);
    CHECK(std::isfinite(z.value.real()));
    CHECK(std::isfinite(z.value.imag()));
    MomentConfig half = zero;
    half.grid.circle_radius = effective_sigma(zero) / 8;
    Certified zh = i1_confluent(1, 1, half);
    CHECK(std::abs(z.value - zh.value) <= z.error() + zh.error());

    MomentConfig rep = contour_config(50, ShiftSet{0.001, 0.001}, ShiftSet{-0.002});
    CHECK_THROWS_AS(compute_I(1, 1, 1, rep), PreconditionError);
    CHECK_NOTHROW(i1_confluent(1, 1, rep));
    MomentConfig wide = contour_config(50, ShiftSet{0.05}, ShiftSet{-0.002});
    CHECK_THROWS_AS(i1_confluent(1, 1, wide), PreconditionError);
}

TEST_CASE("one-swap term grows like Q^2") {
    MomentConfig a = default_config(50), b = default_config(100);
    double r = std::log(std::abs(compute_I(1, 1, 1, b).value) / std::abs(compute_I(1, 1, 1, a).value)) / std::log(2.0);
    INFO("fitted exponent " << r);
    CHECK(r > 1.5);
    CHECK(r < 2.5);
}
