#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "dirmoment/arith.hpp"

namespace dirmoment {

struct Generator {
    std::int64_t residue;  // mod q
    std::int64_t order;
};

// (Z/qZ)* as a product of cyclic groups, one or two per prime-power factor of q.
class UnitGroupStructure {
public:
    explicit UnitGroupStructure(std::int64_t q);

    std::int64_t modulus() const { return q_; }
    const std::vector<Generator>& generators() const { return gens_; }
    std::int64_t order() const { return order_; }
    std::int64_t exponent() const { return exponent_; }  // lcm of generator orders

    // Exponent vector of n (gcd(n, q) = 1) over the generators; empty optional-like flag via bool.
    bool index_of(std::int64_t n, std::vector<std::int64_t>& out) const;
    std::int64_t pow_of(const std::vector<std::int64_t>& k) const;  // residue prod g_i^{k_i}

    struct Component {
        std::int64_t p;
        int e;
        std::int64_t pe;
        std::size_t first_gen;
        std::size_t ngen;
        std::vector<std::int64_t> local_gen;          // generators mod p^e
        std::vector<std::vector<std::int32_t>> dlog;  // dlog[g][x mod p^e], -1 off units
    };
    const std::vector<Component>& components() const { return comps_; }

private:
    std::int64_t q_;
    std::vector<Generator> gens_;
    std::vector<Component> comps_;
    std::int64_t order_ = 1;
    std::int64_t exponent_ = 1;
};

UnitGroupStructure unit_group(std::int64_t q);

// Exact value of a character: zero, or exp(2 pi i num / den).
struct CharValue {
    bool zero = true;
    std::int64_t num = 0;
    std::int64_t den = 1;
    cplx to_complex() const;
};

class Character {
public:
    Character(std::shared_ptr<const UnitGroupStructure> g, std::vector<std::int64_t> exps);

    std::int64_t modulus() const { return g_->modulus(); }
    const std::vector<std::int64_t>& exponents() const { return exps_; }
    bool even() const { return even_; }
    std::int64_t conductor() const { return conductor_; }
    bool primitive() const { return conductor_ == g_->modulus(); }
    CharValue value(std::int64_t n) const;
    Character conj() const;

private:
    std::int64_t local_conductor(const UnitGroupStructure::Component& c) const;
    std::shared_ptr<const UnitGroupStructure> g_;
    std::vector<std::int64_t> exps_;
    bool even_ = true;
    std::int64_t conductor_ = 1;
};

// All phi(q) characters, exponent vectors in mixed-radix order.
std::vector<Character> characters(std::int64_t q);

CharValue char_value_exact(const Character& chi, std::int64_t n);
cplx char_value(const Character& chi, std::int64_t n);

// Sum of chi(m) conj(chi(n)) over even (resp. odd) primitive characters mod q.
cplx even_primitive_pair_sum(std::int64_t q, std::int64_t m, std::int64_t n);
cplx odd_primitive_pair_sum(std::int64_t q, std::int64_t m, std::int64_t n);

// 1/2 [sum_{d|q, d|m-n} phi(d) mu(q/d) + sum_{d|q, d|m+n} phi(d) mu(q/d)].
double lemma2_rhs(std::int64_t q, std::int64_t m, std::int64_t n);
// Odd-character version: the (m+n) copy enters with a minus sign.
double lemma2_rhs_odd(std::int64_t q, std::int64_t m, std::int64_t n);

// Number of even primitive characters mod q (lemma2_rhs with m = n = 1).
double even_primitive_count(std::int64_t q);

cplx gauss_sum(const Character& chi);

}  // namespace dirmoment

namespace dirmoment {

// Same sums over a prebuilt table (avoids rebuilding characters(q) per pair).
// parity: +1 even, -1 odd.
cplx primitive_pair_sum(const std::vector<Character>& table, int parity, std::int64_t m, std::int64_t n);

}  // namespace dirmoment
