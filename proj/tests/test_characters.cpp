#include <doctest.h>

#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "dirmoment/characters.hpp"
#include "dirmoment/errors.hpp"

using namespace dirmoment;

namespace {

bool close(cplx a, cplx b, double tol) { return std::abs(a - b) <= tol; }

// Smallest f | q with chi(n) = 1 for every unit n = 1 mod f.
std::int64_t conductor_brute(const Character& chi) {
    std::int64_t q = chi.modulus();
    for (std::int64_t f : divisors(q)) {
        bool trivial = true;
        for (std::int64_t n = 1; n <= q && trivial; n += f)
            if (std::gcd(n, q) == 1 && std::abs(char_value(chi, n) - 1.0) > 1e-9) trivial = false;
        if (trivial) return f;
    }
    return q;
}

std::int64_t mult_order(std::int64_t g, std::int64_t q) {
    std::int64_t x = g % q, o = 1;
    while (x != 1 % q) {
        x = x * g % q;
        ++o;
    }
    return o;
}

}  // namespace

TEST_CASE("unit_group examples") {
    auto g5 = unit_group(5);
    REQUIRE(g5.generators().size() == 1);
    CHECK(g5.generators()[0].order == 4);
    std::set<std::int64_t> seen;
    std::int64_t x = 1;
    for (int i = 0; i < 4; ++i) {
        seen.insert(x);
        x = x * g5.generators()[0].residue % 5;
    }
    CHECK(seen.size() == 4);

    auto g8 = unit_group(8);
    REQUIRE(g8.generators().size() == 2);
    CHECK(g8.generators()[0].order == 2);
    CHECK(g8.generators()[1].order == 2);

    auto g1 = unit_group(1);
    CHECK(g1.generators().empty());
    CHECK(g1.order() == 1);
    CHECK_THROWS_AS(unit_group(0), DomainError);
}

TEST_CASE("unit group structure: orders multiply to phi and exponent vectors are unique") {
    for (std::int64_t q = 1; q <= 200; ++q) {
        auto G = unit_group(q);
        std::int64_t prod = 1;
        for (const auto& gen : G.generators()) {
            prod *= gen.order;
            CHECK(mult_order(gen.residue, q) == (q == 1 ? 1 : gen.order));
        }
        CHECK(prod == euler_phi(q));
        std::set<std::vector<std::int64_t>> vecs;
        for (std::int64_t n = 1; n <= q; ++n) {
            if (std::gcd(n, q) != 1) continue;
            std::vector<std::int64_t> e;
            REQUIRE(G.index_of(n, e));
            CHECK(G.pow_of(e) == n % q);
            vecs.insert(e);
        }
        CHECK(static_cast<std::int64_t>(vecs.size()) == euler_phi(q));
    }
}

TEST_CASE("characters: counts, parity and conductor") {
    for (std::int64_t q = 1; q <= 120; ++q) {
        auto cs = characters(q);
        CHECK(static_cast<std::int64_t>(cs.size()) == euler_phi(q));
        for (const auto& chi : cs) {
            CHECK(close(char_value(chi, 1), 1.0, 1e-14));
            if (q > 2) CHECK(chi.even() == close(char_value(chi, q - 1), 1.0, 1e-12));
            CHECK(q % chi.conductor() == 0);
            CHECK(chi.conductor() == conductor_brute(chi));
        }
    }
    auto count_even_primitive = [](std::int64_t q) {
        int c = 0;
        for (const auto& chi : characters(q)) c += chi.even() && chi.primitive();
        return c;
    };
    CHECK(characters(8).size() == 4);
    CHECK(count_even_primitive(8) == 1);
    CHECK(characters(5).size() == 4);
    CHECK(count_even_primitive(5) == 1);
    REQUIRE(characters(1).size() == 1);
    CHECK(characters(1)[0].even());
    CHECK(characters(1)[0].primitive());
}

TEST_CASE("character values are multiplicative roots of unity") {
    for (std::int64_t q : {7, 12, 15, 16, 45, 60}) {
        for (const auto& chi : characters(q)) {
            for (std::int64_t m = 1; m <= q; ++m)
                for (std::int64_t n = 1; n <= q; ++n) {
                    cplx a = char_value(chi, m), b = char_value(chi, n), ab = char_value(chi, m * n);
                    CHECK(close(ab, a * b, 1e-12));
                }
            for (std::int64_t n = -q; n <= 2 * q; ++n) {
                double r = std::abs(char_value(chi, n));
                CHECK((std::gcd(n, q) == 1 ? std::abs(r - 1) < 1e-14 : r == 0));
                CHECK(close(char_value(chi.conj(), n), std::conj(char_value(chi, n)), 1e-14));
            }
        }
    }
}

TEST_CASE("char_value examples") {
    auto c6 = characters(6);
    for (const auto& chi : c6)
        if (chi.conductor() == 1) CHECK(char_value(chi, 3) == cplx(0));
    for (std::int64_t q : {3, 10, 77})
        for (const auto& chi : characters(q)) CHECK(close(char_value(chi, 1), 1.0, 0));
    for (const auto& chi : characters(5))
        if (chi.even() && chi.primitive()) CHECK(close(char_value(chi, 2), -1.0, 1e-14));
}

TEST_CASE("primitive characters restrict consistently from their conductor") {
    // chi mod q with conductor f agrees with some primitive character mod f on units mod q.
    for (std::int64_t q : {12, 20, 36, 45}) {
        for (const auto& chi : characters(q)) {
            std::int64_t f = chi.conductor();
            bool found = false;
            for (const auto& psi : characters(f)) {
                if (!psi.primitive()) continue;
                bool same = true;
                for (std::int64_t n = 1; n <= q && same; ++n)
                    if (std::gcd(n, q) == 1 && !close(char_value(psi, n), char_value(chi, n), 1e-12)) same = false;
                found = found || same;
            }
            CHECK(found);
        }
    }
}

TEST_CASE("pair sum and divisor form examples") {
    CHECK(close(even_primitive_pair_sum(5, 1, 1), 1.0, 1e-14));
    CHECK(close(even_primitive_pair_sum(5, 2, 1), -1.0, 1e-14));
    CHECK(close(even_primitive_pair_sum(1, 1, 1), 1.0, 1e-14));
    CHECK(lemma2_rhs(1, 1, 1) == doctest::Approx(1.0));
    CHECK(lemma2_rhs(5, 2, 1) == doctest::Approx(-1.0));
    CHECK(lemma2_rhs(8, 1, 1) == doctest::Approx(1.0));
    CHECK_THROWS_AS(even_primitive_pair_sum(6, 2, 1), PreconditionError);
    CHECK_THROWS_AS(lemma2_rhs(6, 3, 1), PreconditionError);
}

TEST_CASE("even and odd pair sums equal their divisor forms") {
    for (std::int64_t q = 1; q <= 80; ++q)
        for (std::int64_t m = 1; m <= q + 3; ++m)
            for (std::int64_t n = 1; n <= 12; ++n) {
                if (std::gcd(m * n, q) != 1) continue;
                CHECK(close(even_primitive_pair_sum(q, m, n), lemma2_rhs(q, m, n), 1e-10));
                CHECK(close(odd_primitive_pair_sum(q, m, n), lemma2_rhs_odd(q, m, n), 1e-10));
            }
}

TEST_CASE("even primitive count matches enumeration") {
    for (std::int64_t q = 1; q <= 150; ++q) {
        int c = 0;
        for (const auto& chi : characters(q)) c += chi.even() && chi.primitive();
        CHECK(even_primitive_count(q) == doctest::Approx(c));
    }
}

TEST_CASE("Gauss sums of primitive characters have modulus sqrt(q)") {
    for (std::int64_t q = 1; q <= 100; ++q)
        for (const auto& chi : characters(q))
            if (chi.primitive()) CHECK(std::abs(gauss_sum(chi)) == doctest::Approx(std::sqrt(static_cast<double>(q))).epsilon(1e-10));
}

TEST_CASE("exact character values are fractions of a full turn") {
    for (const auto& chi : characters(63))
        for (std::int64_t n = 1; n <= 63; ++n) {
            CharValue v = char_value_exact(chi, n);
            if (v.zero) continue;
            CHECK(v.den >= 1);
            CHECK(v.num >= 0);
            CHECK(v.num < v.den);
            CHECK(close(v.to_complex(), char_value(chi, n), 1e-14));
        }
}
