#pragma once

#include <cstdint>

#include "dirmoment/config.hpp"
#include "dirmoment/recipe.hpp"

namespace dirmoment {

struct LDU {
    cplx L, D, U;
    cplx total() const { return L + D + U; }
};

// Brute-force oracle: sum over even primitive characters. Throws ScaleError when the
// character enumeration sum_{q <= 2Q} phi(q) exceeds 1e7.
cplx compute_S_characters(const MomentConfig& cfg);

// Divisor form of the character sum, with residue-class buckets per (q, d).
cplx compute_S_divisor(const MomentConfig& cfg);

// One traversal, classified by c > C / (c <= C, mh = nk) / (c <= C, mh != nk).
LDU split_LDU(const MomentConfig& cfg);

struct ComplementaryReport {
    cplx U_switched;  // e, a, ell, psi form
    cplx U_direct;    // split_LDU value
    double rel_diff = 0;
    bool partial = false;  // budget exhausted before the enumeration finished
    std::int64_t evaluations = 0;
};

// Re-derives U with the complementary modulus ell = |mh +- nk| / (g d), detecting divisibility by
// character sums mod e a ell. Intended for Q <= 20; sample_budget caps character evaluations.
ComplementaryReport complementary_modulus_check(const MomentConfig& cfg, std::int64_t sample_budget);

struct MomentReport {
    double Q = 0;
    cplx S, I0, I1;
    LDU parts;
    double residual = 0;      // |S - I0 - I1|
    double rel_residual = 0;  // residual / |I0 + I1|
    Certified cert_I0, cert_I1;
    double seconds_S = 0, seconds_I0 = 0, seconds_I1 = 0;
};

// S by the divisor path with its split, and I0, I1 by the recipe (confluent form when shifts repeat).
MomentReport run_moment(const MomentConfig& cfg);

}  // namespace dirmoment
