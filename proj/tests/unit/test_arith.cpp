#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "qtorsion/arith.hpp"
#include "qtorsion/errors.hpp"

using namespace qtorsion;
using arith::Discriminant;
using arith::SignFilter;

namespace {

u128 product(const arith::Factorization& f) {
    u128 n = 1;
    for (const auto& pp : f)
        for (unsigned e = 0; e < pp.exponent; ++e) n *= pp.prime;
    return n;
}

std::vector<std::int64_t> values(const std::vector<Discriminant>& ds) {
    std::vector<std::int64_t> v;
    for (const auto& d : ds) v.push_back(d.value());
    return v;
}

} // namespace

TEST_CASE("factorize small cases") {
    CHECK(arith::factorize(1).empty());
    const arith::Factorization sixty{{2, 2}, {3, 1}, {5, 1}};
    CHECK(arith::factorize(60) == sixty);
    const u128 p = 1000000007;
    const arith::Factorization prime{{p, 1}};
    CHECK(arith::factorize(p) == prime);
}

TEST_CASE("factorize range") {
    CHECK_THROWS_AS(arith::factorize(0), RangeError);
    CHECK_THROWS_AS(arith::factorize(arith::factorize_limit + 1), RangeError);
    CHECK_NOTHROW(arith::factorize(arith::factorize_limit));
}

TEST_CASE("factorize semiprimes beyond trial division") {
    const u128 p = 1000000000039ULL, q = 999999999989ULL;
    const auto f = arith::factorize(p * q);
    REQUIRE(f.size() == 2);
    CHECK(f[0].prime == q);
    CHECK(f[1].prime == p);
    // 2^64 + 13 is prime; its square times 3
    const u128 big = (u128(1) << 64) + 13;
    CHECK(arith::is_prime(big));
    const auto g = arith::factorize(3 * big);
    REQUIRE(g.size() == 2);
    CHECK(g[1].prime == big);
}

TEST_CASE("factorization invariants on random inputs") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        const u128 n = (u128(rng() >> 24) << (rng() % 40)) | 1;
        const auto f = arith::factorize(n);
        CHECK(product(f) == n);
        for (std::size_t j = 0; j < f.size(); ++j) {
            CHECK(arith::is_prime(f[j].prime));
            if (j) CHECK(f[j - 1].prime < f[j].prime);
        }
        CHECK(arith::factorize(n) == f);
    }
}

TEST_CASE("is_prime agrees with trial division") {
    for (std::int64_t n = 0; n < 5000; ++n) CHECK(arith::is_prime(u128(n)) == oracle::is_prime(n));
}

TEST_CASE("kronecker examples") {
    CHECK(arith::kronecker(-4, 2) == 0);
    CHECK(arith::kronecker(-23, 2) == 1);
    CHECK(arith::kronecker(5, 11) == 1);
}

TEST_CASE("kronecker matches square search mod p") {
    for (std::int64_t D = -99; D < 100; ++D) {
        if (((D % 4) + 4) % 4 > 1 || D == 0) continue;
        for (std::int64_t p = 3; p < 100; p += 2) {
            if (!oracle::is_prime(p)) continue;
            const int k = arith::kronecker(D, u128(p));
            CHECK(k == oracle::legendre_search(D, p));
            if (D % p) CHECK(k != 0);
        }
    }
}

TEST_CASE("kronecker is multiplicative in n") {
    for (std::int64_t D : {-23, -4, 5, 8, 12, -163, 1009}) {
        for (u128 m = 1; m < 60; ++m)
            for (u128 n = 1; n < 60; ++n)
                CHECK(arith::kronecker(D, m * n) == arith::kronecker(D, m) * arith::kronecker(D, n));
    }
}

TEST_CASE("fundamental discriminant windows") {
    CHECK(values(arith::fundamental_discriminants(3, 6, SignFilter::both)) == std::vector<std::int64_t>{-4, 5});
    CHECK(values(arith::fundamental_discriminants(0, 3, SignFilter::both)) == std::vector<std::int64_t>{-3});
    CHECK(values(arith::fundamental_discriminants(3, 6, SignFilter::positive)) == std::vector<std::int64_t>{5});
    CHECK(arith::fundamental_discriminants(10, 10).empty());
    CHECK(arith::fundamental_discriminants(10, 5).empty());
}

TEST_CASE("fundamental discriminants match the definition") {
    const auto got = values(arith::fundamental_discriminants(0, 3000, SignFilter::both));
    std::vector<std::int64_t> want;
    for (std::int64_t n = 1; n <= 3000; ++n) {
        if (oracle::fundamental(-n)) want.push_back(-n);
        if (oracle::fundamental(n)) want.push_back(n);
    }
    CHECK(got == want);
    for (auto D : got) {
        const Discriminant d = Discriminant::fundamental(D);
        CHECK(d.is_fundamental());
        CHECK(d.residue() <= 1);
    }
}

TEST_CASE("dyadic window counts stabilize") {
    for (std::uint64_t X = 1 << 14; X <= (1u << 17); X *= 2) {
        const double a = double(arith::fundamental_discriminants(X, 2 * X).size());
        const double b = double(arith::fundamental_discriminants(2 * X, 4 * X).size());
        CHECK(b / a >= 1.8);
        CHECK(b / a <= 2.2);
    }
}

TEST_CASE("discriminant validation") {
    CHECK_THROWS_AS(Discriminant(0), ValidationError);
    CHECK_THROWS_AS(Discriminant(7), ValidationError);
    CHECK_THROWS_AS(Discriminant::fundamental(-16), ValidationError);
    CHECK_THROWS_AS(Discriminant::fundamental(148), ValidationError);
    CHECK_NOTHROW(Discriminant::fundamental(-8));
    CHECK_FALSE(Discriminant(-16).is_fundamental());
    CHECK(arith::parse_sign_filter("positive") == SignFilter::positive);
    CHECK_THROWS_AS(arith::parse_sign_filter("sideways"), ValidationError);
}

TEST_CASE("sqrt_mod and sieve") {
    const auto ps = arith::primes_up_to(1000);
    CHECK(ps.size() == 168);
    for (auto p : ps) {
        for (std::uint64_t a = 1; a < std::min<std::uint64_t>(p, 50); ++a) {
            if (p > 2 && oracle::legendre_search(std::int64_t(a), p) != 1) continue;
            const auto x = arith::sqrt_mod(a, p);
            CHECK(x * x % p == a % p);
        }
    }
    CHECK_THROWS_AS(arith::sqrt_mod(2, 5), DomainError);
}
