#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "dirmoment/arith.hpp"

namespace dirmoment {

using Integrand = std::function<cplx(cplx)>;

struct QuadResult {
    cplx value;
    double error = 0;  // estimated absolute error (panels + tail)
    std::int64_t evaluations = 0;
};

// Adaptive Gauss-Legendre on a real interval [a, b] for complex-valued f.
QuadResult integrate_interval(const std::function<cplx(double)>& f, double a, double b, double tol,
                              int max_depth = 40, int initial_panels = 1);

struct LinePlan {
    double sigma = 0.05;
    double T = 100;
    double tol = 1e-10;  // absolute, for the whole truncated segment
    int max_depth = 30;
    int initial_panels = 16;
    void validate() const;
};

// |f(s)| <= C / |s|^n for |Im s| >= T on the line.
struct DecayCertificate {
    double C = 0;
    int n = 2;
    double tail(double T) const;  // 2C / ((n-1) T^{n-1} 2 pi)
};

// (1/2 pi i) int_{sigma - iT}^{sigma + iT} f(s) ds, with the decay tail added to the error.
QuadResult line_integral(const Integrand& f, const LinePlan& plan, const DecayCertificate& decay);

// Iterated line integral in d = 1..3 variables; f receives (s_1, ..., s_d).
using MultiIntegrand = std::function<cplx(const std::vector<cplx>&)>;
QuadResult nested_line_integral(const MultiIntegrand& f, const std::vector<LinePlan>& plans,
                                const std::vector<DecayCertificate>& decays);

// Linear convolution c[m] = sum_j a[j] b[m - j], length |a| + |b| - 1, via FFT.
std::vector<cplx> convolve(const std::vector<cplx>& a, const std::vector<cplx>& b);

// Forward DFT X[k] = sum_j x[j] e^{-2 pi i jk/L} for L = x.size().
std::vector<cplx> dft(const std::vector<cplx>& x);

}  // namespace dirmoment
