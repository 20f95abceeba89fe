#include "dirmoment/characters.hpp"

#include <cmath>
#include <numeric>

#include "dirmoment/errors.hpp"

namespace dirmoment {

namespace {

std::int64_t primitive_root(std::int64_t p) {
    if (p == 2) return 1;
    std::vector<std::int64_t> rs;
    for (auto [r, e] : factorize(p - 1)) rs.push_back(r);
    for (std::int64_t g = 2;; ++g) {
        bool ok = true;
        for (std::int64_t r : rs)
            if (mod_pow(g, (p - 1) / r, p) == 1) {
                ok = false;
                break;
            }
        if (ok) return g;
    }
}

}  // namespace

UnitGroupStructure::UnitGroupStructure(std::int64_t q) : q_(q) {
    if (q < 1) throw DomainError("unit_group: q must be positive");
    for (auto [p, e] : factorize(q)) {
        Component c;
        c.p = p;
        c.e = e;
        c.pe = 1;
        for (int i = 0; i < e; ++i) c.pe *= p;
        std::vector<std::int64_t> orders;
        if (p == 2) {
            if (e == 2) {
                c.local_gen = {3};
                orders = {2};
            } else if (e >= 3) {
                c.local_gen = {c.pe - 1, 5};
                orders = {2, c.pe / 4};
            }
        } else {
            std::int64_t g = primitive_root(p);
            if (e >= 2 && mod_pow(g, p - 1, p * p) == 1) g += p;
            c.local_gen = {g};
            orders = {c.pe / p * (p - 1)};
        }
        c.first_gen = gens_.size();
        c.ngen = c.local_gen.size();
        std::int64_t M = q / c.pe;
        for (std::size_t i = 0; i < c.ngen; ++i) {
            std::int64_t g = c.local_gen[i];
            std::int64_t R = g % c.pe;
            if (M > 1) {
                std::int64_t t = ((g - 1) % c.pe + c.pe) % c.pe * mod_inverse(M % c.pe, c.pe) % c.pe;
                R = 1 + M * t;
            }
            gens_.push_back({R % q, orders[i]});
            order_ *= orders[i];
            exponent_ = std::lcm(exponent_, orders[i]);
        }
        c.dlog.assign(c.ngen, std::vector<std::int32_t>(c.pe, -1));
        if (c.ngen == 1) {
            std::int64_t x = 1;
            for (std::int64_t k = 0; k < orders[0]; ++k) {
                c.dlog[0][x] = static_cast<std::int32_t>(k);
                x = x * c.local_gen[0] % c.pe;
            }
        } else if (c.ngen == 2) {
            std::int64_t x1 = 1;
            for (std::int64_t k1 = 0; k1 < orders[0]; ++k1) {
                std::int64_t x = x1;
                for (std::int64_t k2 = 0; k2 < orders[1]; ++k2) {
                    c.dlog[0][x] = static_cast<std::int32_t>(k1);
                    c.dlog[1][x] = static_cast<std::int32_t>(k2);
                    x = x * c.local_gen[1] % c.pe;
                }
                x1 = x1 * c.local_gen[0] % c.pe;
            }
        }
        comps_.push_back(std::move(c));
    }
}

bool UnitGroupStructure::index_of(std::int64_t n, std::vector<std::int64_t>& out) const {
    out.assign(gens_.size(), 0);
    if (std::gcd(n, q_) != 1) return false;
    for (const auto& c : comps_) {
        std::int64_t x = ((n % c.pe) + c.pe) % c.pe;
        if (c.p == 2 && c.ngen == 0) continue;
        for (std::size_t i = 0; i < c.ngen; ++i) {
            std::int32_t k = c.dlog[i][x];
            if (k < 0) return false;
            out[c.first_gen + i] = k;
        }
    }
    return true;
}

std::int64_t UnitGroupStructure::pow_of(const std::vector<std::int64_t>& k) const {
    std::int64_t r = 1 % q_;
    for (std::size_t i = 0; i < gens_.size(); ++i)
        r = static_cast<std::int64_t>(static_cast<__int128>(r) * mod_pow(gens_[i].residue, k[i], q_) % q_);
    return r;
}

UnitGroupStructure unit_group(std::int64_t q) { return UnitGroupStructure(q); }

cplx CharValue::to_complex() const {
    if (zero) return 0.0;
    if (num == 0) return 1.0;
    double t = 2.0 * M_PI * static_cast<double>(num) / static_cast<double>(den);
    return {std::cos(t), std::sin(t)};
}

Character::Character(std::shared_ptr<const UnitGroupStructure> g, std::vector<std::int64_t> exps)
    : g_(std::move(g)), exps_(std::move(exps)) {
    if (exps_.size() != g_->generators().size()) throw PreconditionError("Character: exponent vector size");
    std::int64_t q = g_->modulus();
    even_ = q <= 2 ? true : value(q - 1).num == 0;
    conductor_ = 1;
    for (const auto& c : g_->components()) conductor_ *= local_conductor(c);
}

CharValue Character::value(std::int64_t n) const {
    CharValue v;
    std::vector<std::int64_t> k;
    if (!g_->index_of(n, k)) return v;
    std::int64_t L = g_->exponent();
    __int128 num = 0;
    const auto& gens = g_->generators();
    for (std::size_t i = 0; i < gens.size(); ++i) num += static_cast<__int128>(exps_[i]) * k[i] * (L / gens[i].order);
    v.zero = false;
    v.num = static_cast<std::int64_t>(num % L);
    v.den = L;
    return v;
}

std::int64_t Character::local_conductor(const UnitGroupStructure::Component& c) const {
    std::int64_t L = g_->exponent();
    const auto& gens = g_->generators();
    auto trivial_at = [&](std::int64_t x) {
        __int128 num = 0;
        for (std::size_t i = 0; i < c.ngen; ++i) {
            std::size_t gi = c.first_gen + i;
            num += static_cast<__int128>(exps_[gi]) * c.dlog[i][x] * (L / gens[gi].order);
        }
        return num % L == 0;
    };
    std::int64_t f = 1;
    for (int j = 0; j <= c.e; ++j) {
        bool ok = true;
        for (std::int64_t x = 1; x < c.pe && ok; x += f) {
            if (x % c.p == 0) continue;
            if (c.ngen > 0 && !trivial_at(x)) ok = false;
        }
        if (ok) return f;
        f *= c.p;
    }
    return c.pe;
}

Character Character::conj() const {
    std::vector<std::int64_t> e(exps_);
    const auto& gens = g_->generators();
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = (gens[i].order - e[i]) % gens[i].order;
    return Character(g_, std::move(e));
}

std::vector<Character> characters(std::int64_t q) {
    auto g = std::make_shared<const UnitGroupStructure>(q);
    const auto& gens = g->generators();
    std::vector<Character> out;
    out.reserve(g->order());
    std::vector<std::int64_t> e(gens.size(), 0);
    while (true) {
        out.emplace_back(g, e);
        std::size_t i = gens.size();
        while (i > 0) {
            --i;
            if (++e[i] < gens[i].order) break;
            e[i] = 0;
            if (i == 0) return out;
        }
        if (gens.empty()) return out;
    }
}

CharValue char_value_exact(const Character& chi, std::int64_t n) { return chi.value(n); }
cplx char_value(const Character& chi, std::int64_t n) { return chi.value(n).to_complex(); }

cplx primitive_pair_sum(const std::vector<Character>& table, int parity, std::int64_t m, std::int64_t n) {
    if (table.empty()) return 0.0;
    std::int64_t q = table.front().modulus();
    if (std::gcd(m, q) != 1 || std::gcd(n, q) != 1)
        throw PreconditionError("pair sum: gcd(mn, q) must be 1");
    KahanSum s;
    for (const auto& chi : table) {
        if (!chi.primitive() || chi.even() != (parity > 0)) continue;
        CharValue a = chi.value(m), b = chi.value(n);
        CharValue v{false, ((a.num - b.num) % a.den + a.den) % a.den, a.den};
        s.add(v.to_complex());
    }
    return s.value();
}

cplx even_primitive_pair_sum(std::int64_t q, std::int64_t m, std::int64_t n) {
    return primitive_pair_sum(characters(q), +1, m, n);
}

cplx odd_primitive_pair_sum(std::int64_t q, std::int64_t m, std::int64_t n) {
    return primitive_pair_sum(characters(q), -1, m, n);
}

namespace {
double half_divisor_sum(std::int64_t q, std::int64_t diff) {
    std::int64_t s = 0;
    for (std::int64_t d : divisors(q))
        if (diff % d == 0) s += euler_phi(d) * mobius(q / d);
    return static_cast<double>(s);
}
void check_coprime(std::int64_t q, std::int64_t m, std::int64_t n) {
    if (q < 1 || m < 1 || n < 1) throw DomainError("lemma2_rhs: arguments must be positive");
    if (std::gcd(m, q) != 1 || std::gcd(n, q) != 1) throw PreconditionError("lemma2_rhs: gcd(mn, q) must be 1");
}
}  // namespace

double lemma2_rhs(std::int64_t q, std::int64_t m, std::int64_t n) {
    check_coprime(q, m, n);
    return 0.5 * (half_divisor_sum(q, m - n) + half_divisor_sum(q, m + n));
}

double lemma2_rhs_odd(std::int64_t q, std::int64_t m, std::int64_t n) {
    check_coprime(q, m, n);
    return 0.5 * (half_divisor_sum(q, m - n) - half_divisor_sum(q, m + n));
}

double even_primitive_count(std::int64_t q) { return lemma2_rhs(q, 1, 1); }

cplx gauss_sum(const Character& chi) {
    std::int64_t q = chi.modulus();
    KahanSum s;
    for (std::int64_t a = 1; a <= q; ++a) {
        CharValue v = chi.value(a);
        if (v.zero) continue;
        double t = 2.0 * M_PI * (static_cast<double>(v.num) / v.den + static_cast<double>(a) / q);
        s.add({std::cos(t), std::sin(t)});
    }
    return s.value();
}

}  // namespace dirmoment
