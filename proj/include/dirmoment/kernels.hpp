#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "dirmoment/arith.hpp"

namespace dirmoment {

// Distance below which an argument counts as sitting on a pole.
inline constexpr double kPoleGuard = 1e-6;

// log Gamma(s), continuous in s off the negative real axis; PoleError at s = 0, -1, -2, ... (index = -s).
cplx lgamma_c(cplx s);
cplx gamma_c(cplx s);
// 1/Gamma(s), entire.
cplx rgamma_c(cplx s);
// log sin(pi s), computed without overflow for large |Im s|.
cplx log_sin_pi(cplx s);

// Riemann zeta by Euler-Maclaurin; PoleError at s = 1.
cplx zeta_c(cplx s);

// pi^{s-1/2} Gamma((1-s)/2) / Gamma(s/2), the factor in zeta(s) = X(s) zeta(1-s).
// PoleError at s = 1, 3, 5, ... (index = (s-1)/2).
cplx chi_factor(cplx s);

// sqrt(pi) Gamma((1-w)/2) Gamma(z/2) Gamma((w-z)/2) / [Gamma(w/2) Gamma((1-z)/2) Gamma((1-w+z)/2)].
// PoleError index names the numerator factor (1, 2 or 3).
cplx h_kernel(cplx z, cplx w);

// Smooth compactly supported weight with Mellin-transform access.
struct Window {
    std::string name;
    double lo = 0, hi = 1;            // support
    double (*fn)(double) = nullptr;   // evaluator on the support interior
    bool flat_endpoints = true;       // all derivatives vanish at lo and hi
    double at_zero = 0;               // value at 0 (nonzero only for V-type windows)
    int sub_order = 0;                // f(x) - f(0) exp(-x^2) = O(x^sub_order) at 0
    double decay_sigma = 0;           // line on which the decay constants hold
    std::array<double, 5> decay{};    // |mellin(s)| <= decay[n] / |s|^n on Re s = decay_sigma, |Im s| >= 1
};

// V(x) = exp(1 - 1/(1 - x^2)) on [0, 1).
const Window& window_V();
// W(x) = exp(4 - 1/((x - 1)(2 - x))) on (1, 2).
const Window& window_W();

double window_eval(const Window& w, double x);

// int_0^inf w(x) x^{s-1} dx by adaptive Gauss-Legendre in x = e^{-v}. For windows with w(0) != 0 the
// transform is continued to Re s > -sub_order via w(0) Gamma(s/2)/2 + int (w(x) - w(0) e^{-x^2}) x^{s-1} dx.
cplx mellin_transform(const Window& w, cplx s);

// Trapezoid-in-log-variable evaluator of the same transform; spectrally accurate for |Im s| <= 1500.
class MellinEvaluator {
public:
    explicit MellinEvaluator(const Window& w);
    cplx operator()(cplx s) const;

private:
    const Window* w_;
    double v0_, dv_;
    std::vector<double> r_;  // remainder samples at v0 + j dv
};

// Mellin transform at s_j = sigma + i j h for j = -N..N (entry j + N), by one FFT.
std::vector<cplx> mellin_line_grid(const Window& w, double sigma, double h, std::int64_t N);

// sup over sampled t in [1, 1500] of |mellin(sigma + it)| |sigma + it|^n, doubled for safety.
double decay_constant(const Window& w, double sigma, int n);

}  // namespace dirmoment
