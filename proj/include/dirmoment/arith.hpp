#pragma once

#include <complex>
#include <cstdint>
#include <vector>

namespace dirmoment {

using cplx = std::complex<double>;

struct PrimePower {
    std::int64_t p;
    int e;
};

std::vector<std::int64_t> primes_up_to(std::int64_t n);

// Trial division; fine for the integer sizes used here (q, m, n < 10^7).
std::vector<PrimePower> factorize(std::int64_t n);

std::vector<std::int64_t> divisors(std::int64_t n);

int mobius(std::int64_t n);
std::int64_t euler_phi(std::int64_t n);
bool is_prime(std::int64_t n);
int ord_p(std::int64_t n, std::int64_t p);

// Inverse of a mod m, requires gcd(a, m) = 1 and m >= 1.
std::int64_t mod_inverse(std::int64_t a, std::int64_t m);
std::int64_t mod_pow(std::int64_t b, std::int64_t e, std::int64_t m);

// Smallest-prime-factor sieve for multiplicative tables.
class SpfSieve {
public:
    explicit SpfSieve(std::int64_t n);
    std::int64_t limit() const { return static_cast<std::int64_t>(spf_.size()) - 1; }
    std::int64_t spf(std::int64_t m) const { return spf_[m]; }
    std::vector<PrimePower> factorize(std::int64_t m) const;

private:
    std::vector<std::int64_t> spf_;
};

// p^{-s} for real p > 0.
inline cplx ppow(double p, cplx s) { return std::exp(-s * std::log(p)); }

// Neumaier-compensated complex accumulator.
class KahanSum {
public:
    void add(cplx x) {
        add1(re_, cre_, x.real());
        add1(im_, cim_, x.imag());
    }
    cplx value() const { return {re_ + cre_, im_ + cim_}; }

private:
    static void add1(double& s, double& c, double x) {
        double t = s + x;
        if (std::abs(s) >= std::abs(x))
            c += (s - t) + x;
        else
            c += (x - t) + s;
        s = t;
    }
    double re_ = 0, im_ = 0, cre_ = 0, cim_ = 0;
};

}  // namespace dirmoment
