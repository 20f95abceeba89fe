#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace dirmoment {

struct SuiteResult {
    std::string name;
    std::int64_t cases = 0;
    std::int64_t failures = 0;
    double worst = 0;      // worst error seen (absolute or relative, per suite)
    double tolerance = 0;
    double seconds = 0;
    bool pass() const { return failures == 0; }
};

struct IdentityOptions {
    std::uint64_t seed = 20240611;
    std::int64_t tau_cases = 10000;  // per tau suite
    std::int64_t pair_qmax = 300;
    std::int64_t pair_count = 50;  // per modulus
    std::int64_t kfun_cases = 50;
    std::int64_t product_cases = 20;
    std::int64_t P = 10000;
    std::int64_t P_check = 30000;  // cutoff for the tail-stability check
    bool corrupt_tau = false;      // negative control: perturbs one tau entry in the swap-exchange suite
};

SuiteResult suite_pair_sums(const IdentityOptions& o);  // even and odd variants
SuiteResult suite_multiplicativity(const IdentityOptions& o);
SuiteResult suite_factoring(const IdentityOptions& o);
SuiteResult suite_remove_element(const IdentityOptions& o);
SuiteResult suite_swap_exchange(const IdentityOptions& o);
SuiteResult suite_swap_expansion(const IdentityOptions& o);
SuiteResult suite_tauseries(const IdentityOptions& o);
SuiteResult suite_kfunctional(const IdentityOptions& o);
// G as K at s1 = 0, at w = 2 - alpha - beta and at w = 2.
SuiteResult suite_g_from_k(const IdentityOptions& o);
// Shifting B and beta together leaves G unchanged.
SuiteResult suite_g_shift(const IdentityOptions& o);
// P -> P_check moves values less than the P certificate.
SuiteResult suite_euler_tails(const IdentityOptions& o);

std::vector<SuiteResult> run_identity_suites(const IdentityOptions& o);

}  // namespace dirmoment
