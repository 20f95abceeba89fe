#include "dirmoment/arith.hpp"

#include <algorithm>

#include "dirmoment/errors.hpp"

namespace dirmoment {

std::vector<std::int64_t> primes_up_to(std::int64_t n) {
    std::vector<std::int64_t> out;
    if (n < 2) return out;
    std::vector<bool> comp(n + 1, false);
    for (std::int64_t i = 2; i <= n; ++i) {
        if (comp[i]) continue;
        out.push_back(i);
        for (std::int64_t j = i * i; j <= n; j += i) comp[j] = true;
    }
    return out;
}

std::vector<PrimePower> factorize(std::int64_t n) {
    if (n < 1) throw DomainError("factorize: n must be positive");
    std::vector<PrimePower> out;
    for (std::int64_t p = 2; p * p <= n; ++p) {
        if (n % p) continue;
        int e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.push_back({p, e});
    }
    if (n > 1) out.push_back({n, 1});
    return out;
}

std::vector<std::int64_t> divisors(std::int64_t n) {
    std::vector<std::int64_t> out{1};
    for (auto [p, e] : factorize(n)) {
        std::size_t cur = out.size();
        std::int64_t pk = 1;
        for (int j = 1; j <= e; ++j) {
            pk *= p;
            for (std::size_t i = 0; i < cur; ++i) out.push_back(out[i] * pk);
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

int mobius(std::int64_t n) {
    int mu = 1;
    for (auto [p, e] : factorize(n)) {
        if (e > 1) return 0;
        mu = -mu;
    }
    return mu;
}

std::int64_t euler_phi(std::int64_t n) {
    std::int64_t phi = n;
    for (auto [p, e] : factorize(n)) phi = phi / p * (p - 1);
    return phi;
}

bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t d = 2; d * d <= n; ++d)
        if (n % d == 0) return false;
    return true;
}

int ord_p(std::int64_t n, std::int64_t p) {
    int e = 0;
    while (n != 0 && n % p == 0) {
        n /= p;
        ++e;
    }
    return e;
}

std::int64_t mod_pow(std::int64_t b, std::int64_t e, std::int64_t m) {
    __int128 r = 1 % m, x = ((b % m) + m) % m;
    while (e > 0) {
        if (e & 1) r = r * x % m;
        x = x * x % m;
        e >>= 1;
    }
    return static_cast<std::int64_t>(r);
}

std::int64_t mod_inverse(std::int64_t a, std::int64_t m) {
    if (m == 1) return 0;
    std::int64_t r0 = ((a % m) + m) % m, r1 = m, s0 = 1, s1 = 0;
    while (r1) {
        std::int64_t t = r0 / r1;
        r0 -= t * r1;
        std::swap(r0, r1);
        s0 -= t * s1;
        std::swap(s0, s1);
    }
    if (r0 != 1) throw PreconditionError("mod_inverse: gcd(a, m) != 1");
    return ((s0 % m) + m) % m;
}

SpfSieve::SpfSieve(std::int64_t n) : spf_(std::max<std::int64_t>(n, 1) + 1, 0) {
    for (std::int64_t i = 2; i <= limit(); ++i) {
        if (spf_[i]) continue;
        for (std::int64_t j = i; j <= limit(); j += i)
            if (!spf_[j]) spf_[j] = i;
    }
}

std::vector<PrimePower> SpfSieve::factorize(std::int64_t m) const {
    std::vector<PrimePower> out;
    while (m > 1) {
        std::int64_t p = spf_[m];
        int e = 0;
        while (m % p == 0) {
            m /= p;
            ++e;
        }
        out.push_back({p, e});
    }
    return out;
}

}  // namespace dirmoment
