#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <unordered_map>

#include "dirmoment/errors.hpp"
#include "dirmoment/kernels.hpp"
#include "dirmoment/quadrature.hpp"

using namespace dirmoment;

namespace {

constexpr double kPi = std::numbers::pi;

LinePlan plan(double sigma, double T, double tol) {
    LinePlan p;
    p.sigma = sigma;
    p.T = T;
    p.tol = tol;
    return p;
}

// Certificate for Vtilde(s) x^{-s} on Re s = sigma, from the window's sampled decay constant.
DecayCertificate v_decay(double sigma, double x) {
    return {decay_constant(window_V(), sigma, 4) * std::pow(x, -sigma), 4};
}

}  // namespace

TEST_CASE("integrate_interval on closed forms") {
    auto r = integrate_interval([](double x) { return cplx(std::sin(x), 0); }, 0, kPi, 1e-13);
    CHECK(std::abs(r.value - 2.0) < 1e-13);
    r = integrate_interval([](double x) { return std::exp(cplx(0, 3 * x)); }, 0, 2, 1e-13);
    CHECK(std::abs(r.value - (std::exp(cplx(0, 6)) - 1.0) / cplx(0, 3)) < 1e-13);
    r = integrate_interval([](double x) { return cplx(std::pow(x, 7) - 2 * x, 0); }, -1, 3, 1e-12);
    CHECK(std::abs(r.value - (std::pow(3.0, 8) / 8 - 1.0 / 8 - 8.0)) < 1e-9);
    CHECK(r.error >= 0);
    CHECK_THROWS_AS(integrate_interval([](double x) { return cplx(std::sin(5000 * x), 0); }, 0, 10, 1e-15, 2),
                    AccuracyError);
    CHECK_THROWS_AS(integrate_interval([](double) { return cplx(1); }, 0, 1, 0), PreconditionError);
}

TEST_CASE("Cahen-Mellin integral") {
    double x = 1.5;
    auto f = [&](cplx s) { return gamma_c(s) * std::pow(x, -s); };
    // |Gamma(2 + it)| < 1e-30 once |t| >= 60, so C = 1e-20 bounds |f| |s|^2 there.
    QuadResult r = line_integral(f, plan(2, 60, 1e-12), {1e-20, 2});
    CHECK(std::abs(r.value - std::exp(-x)) < 1e-8);
    CHECK(std::abs(r.value - 0.2231301601484298) < 1e-10);
}

TEST_CASE("zero integrand") {
    QuadResult r = line_integral([](cplx) { return cplx(0); }, plan(0.5, 10, 1e-10), {0, 2});
    CHECK(r.value == cplx(0));
    CHECK(r.error == 0);
}

TEST_CASE("Mellin inversion recovers the window") {
    for (double x : {0.25, 0.5, 0.75}) {
        auto f = [&](cplx s) { return mellin_transform(window_V(), s) * std::pow(x, -s); };
        QuadResult r = line_integral(f, plan(0.05, 300, 1e-9), v_decay(0.05, x));
        double err = std::abs(r.value - window_eval(window_V(), x));
        CHECK(err < 1e-6);
        CHECK(err <= r.error);
    }
}

TEST_CASE("contour shift between pole-free lines") {
    double x = 0.4;
    MellinEvaluator ev(window_V());
    auto f = [&](cplx s) { return ev(s) * std::pow(x, -s); };
    QuadResult a = line_integral(f, plan(0.05, 200, 1e-10), v_decay(0.05, x));
    QuadResult b = line_integral(f, plan(0.2, 200, 1e-10), v_decay(0.2, x));
    CHECK(std::abs(a.value - b.value) <= a.error + b.error + 1e-12);
}

TEST_CASE("halving the tolerance does not increase the error estimate") {
    double x = 0.6;
    MellinEvaluator ev(window_V());
    auto f = [&](cplx s) { return ev(s) * std::pow(x, -s); };
    double prev = 1e300;
    for (double tol : {1e-4, 5e-5, 2.5e-5, 1.25e-5, 6.25e-6}) {
        QuadResult r = line_integral(f, plan(0.05, 100, tol), v_decay(0.05, x));
        CHECK(r.error <= prev);
        prev = r.error;
    }
}

TEST_CASE("nested line integrals") {
    // Inner panels revisit the same abscissae for every outer point, so transform values are cached.
    MellinEvaluator mv(window_V());
    std::unordered_map<double, cplx> cache;
    auto ev = [&](cplx s) {
        auto it = cache.find(s.imag());
        if (it != cache.end()) return it->second;
        return cache[s.imag()] = mv(s);
    };
    double x = 0.3, y = 0.6;
    std::vector<LinePlan> plans{plan(0.05, 200, 1e-8), plan(0.05, 200, 1e-8)};
    std::vector<DecayCertificate> decays{v_decay(0.05, x), v_decay(0.05, y)};
    // The outer certificate must cover the inner integral, which is bounded by V(y) <= 1 times |Vtilde(s1)| x^{-s1}.
    auto f2 = [&](const std::vector<cplx>& s) { return ev(s[0]) * ev(s[1]) * std::pow(x, -s[0]) * std::pow(y, -s[1]); };
    QuadResult r2 = nested_line_integral(f2, plans, decays);
    double Vx = window_eval(window_V(), x), Vy = window_eval(window_V(), y);
    CHECK(std::abs(r2.value - Vx * Vy) < 1e-5);

    // Separable integrand: product of the 1-D integrals.
    auto g1 = [&](cplx s) { return ev(s) * std::pow(x, -s); };
    auto g2 = [&](cplx s) { return ev(s) * std::pow(y, -s); };
    QuadResult a = line_integral(g1, plans[0], decays[0]);
    QuadResult b = line_integral(g2, plans[1], decays[1]);
    CHECK(std::abs(r2.value - a.value * b.value) <= r2.error + a.error * std::abs(b.value) + b.error * std::abs(a.value));

    // d = 1 is line_integral itself.
    QuadResult r1 = nested_line_integral([&](const std::vector<cplx>& s) { return g1(s[0]); }, {plans[0]}, {decays[0]});
    CHECK(r1.value == a.value);
    CHECK(r1.error == a.error);

    CHECK_THROWS_AS(nested_line_integral(f2, {}, {}), PreconditionError);
    CHECK_THROWS_AS(nested_line_integral(f2, plans, {decays[0]}), PreconditionError);
}

TEST_CASE("plan and certificate validation") {
    CHECK_THROWS_AS(line_integral([](cplx) { return cplx(0); }, plan(0.05, 0, 1e-8), {0, 2}), PreconditionError);
    CHECK_THROWS_AS(line_integral([](cplx) { return cplx(0); }, plan(0.05, 10, 0), {0, 2}), PreconditionError);
    CHECK_THROWS_AS(line_integral([](cplx) { return cplx(0); }, plan(0.05, 10, 1e-8), {1, 1}), PreconditionError);
    DecayCertificate d{3.0, 3};
    CHECK(d.tail(10) == doctest::Approx(2 * 3.0 / (2 * 100 * 2 * kPi)));
}

TEST_CASE("FFT convolution and DFT against direct sums") {
    std::mt19937_64 g(17);
    std::normal_distribution<double> n;
    std::vector<cplx> a(37), b(91);
    for (auto& v : a) v = {n(g), n(g)};
    for (auto& v : b) v = {n(g), n(g)};
    auto c = convolve(a, b);
    REQUIRE(c.size() == a.size() + b.size() - 1);
    for (std::size_t m = 0; m < c.size(); ++m) {
        cplx s = 0;
        for (std::size_t j = 0; j < a.size(); ++j)
            if (m >= j && m - j < b.size()) s += a[j] * b[m - j];
        CHECK(std::abs(c[m] - s) < 1e-12);
    }
    CHECK(convolve({}, b).empty());
    auto X = dft(a);
    for (std::size_t k = 0; k < a.size(); ++k) {
        cplx s = 0;
        for (std::size_t j = 0; j < a.size(); ++j) s += a[j] * std::exp(cplx(0, -2 * kPi * double(j * k) / a.size()));
        CHECK(std::abs(X[k] - s) < 1e-12);
    }
}
