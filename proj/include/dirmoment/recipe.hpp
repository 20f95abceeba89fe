#pragma once

#include <cstdint>
#include <vector>

#include "dirmoment/config.hpp"

namespace dirmoment {

// One swap term: U subset of A, V subset of B with |U| = |V| = ell.
struct SwapTermSpec {
    ShiftSet A, B;
    std::vector<cplx> U, V;
    int ell() const { return static_cast<int>(U.size()); }
    void validate() const;
};

struct LocalFactor {
    cplx value;
    double tail = 0;  // certified bound on the dropped series terms
};

// Local factor at p of the analytic-continuation Euler product (p | q, p | hk, or generic).
LocalFactor local_factor_I(std::int64_t p, const SwapTermSpec& spec, cplx s1, cplx s2, std::int64_t h,
                           std::int64_t k, const EulerTruncation& trunc, bool divides_q = false);

struct Certified {
    cplx value;
    double quad_err = 0;   // discretization + contour truncation
    double trunc_err = 0;  // Euler tail + local-series tails
    double seconds = 0;
    double sigma = 0;      // line actually used
    double error() const { return quad_err + trunc_err; }
};

// ell-swap recipe term I_ell(h, k), ell in {0, 1}. Requires distinct shifts within A and within B for ell = 1.
Certified compute_I(int ell, std::int64_t h, std::int64_t k, const MomentConfig& cfg);

// I_1(h, k) through the circle-contour form with ratio coefficients; valid for repeated shifts.
Certified i1_confluent(std::int64_t h, std::int64_t k, const MomentConfig& cfg);

// Truncated Euler product K(s1, s2, w; A, B, alpha, beta, h, k).
Certified k_product(cplx s1, cplx s2, cplx w, const ShiftSet& A, const ShiftSet& B, cplx alpha, cplx beta,
                    std::int64_t h, std::int64_t k, const EulerTruncation& trunc);

// Truncated Euler product G(w, alpha, beta; A, B, h, k).
Certified g_product(cplx w, cplx alpha, cplx beta, const ShiftSet& A, const ShiftSet& B, std::int64_t h,
                    std::int64_t k, const EulerTruncation& trunc);

// Line Re s1 = Re s2 used by compute_I: sigma raised so that Re u = 2 sigma clears every
// pole u = -alpha - beta by at least 0.1.
double effective_sigma(const MomentConfig& cfg);

// Sum over primes p > P of p^{-1-delta}, bounded above.
double prime_tail_sum(std::int64_t P, double delta);

}  // namespace dirmoment
