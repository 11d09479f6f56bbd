#include <doctest.h>

#include <cmath>

#include "oracles.hpp"
#include "qtorsion/errors.hpp"
#include "qtorsion/primes.hpp"

using namespace qtorsion;
using arith::Discriminant;
using primes::Splitting;

namespace {

Discriminant fd(std::int64_t D) { return Discriminant::fundamental(D); }

std::uint64_t prime_pi(std::uint64_t x) {
    std::uint64_t n = 0;
    for (std::uint64_t k = 2; k <= x; ++k) n += oracle::is_prime(std::int64_t(k));
    return n;
}

} // namespace

TEST_CASE("splitting examples") {
    CHECK(primes::splitting_type(fd(-4), 5).kind == Splitting::split);
    CHECK(primes::splitting_type(fd(-4), 3).kind == Splitting::inert);
    CHECK(primes::splitting_type(fd(-4), 2).kind == Splitting::ramified);
    CHECK(primes::splitting_type(fd(-4), 5).ideals.size() == 2);
    CHECK(primes::splitting_type(fd(-4), 3).norm == 9);
    CHECK_THROWS_AS(primes::splitting_type(fd(-4), 9), ValidationError);
}

TEST_CASE("splitting agrees with factoring the minimal polynomial mod p") {
    for (std::int64_t n = 3; n < 200; ++n)
        for (std::int64_t D : {-n, n}) {
            if (!oracle::fundamental(D)) continue;
            const auto d = fd(D);
            const std::int64_t r = ((D % 4) + 4) % 4, c = (D - r) / 4;
            for (std::int64_t p = 2; p < 100; ++p) {
                if (!oracle::is_prime(p)) continue;
                const auto s = primes::splitting_type(d, std::uint64_t(p));
                const int roots = oracle::omega_root_count(D, p);
                CAPTURE(D);
                CAPTURE(p);
                // two roots: split, one (double) root: ramified, none: inert
                const Splitting want = roots == 2 ? Splitting::split : roots == 1 ? Splitting::ramified : Splitting::inert;
                CHECK(s.kind == want);
                CHECK(int(s.kind == Splitting::split) - int(s.kind == Splitting::inert) == arith::kronecker(D, u128(p)));
                if (s.kind == Splitting::inert) {
                    CHECK_FALSE(s.root.has_value());
                    CHECK(s.ideals.empty());
                } else {
                    REQUIRE(s.root.has_value());
                    const std::int64_t x = std::int64_t(*s.root);
                    CHECK((((x * x - r * x - c) % p) + p) % p == 0);
                    CHECK(s.ideals.size() == (s.kind == Splitting::split ? 2u : 1u));
                    for (const auto& P : s.ideals) CHECK(P.ideal(d).norm() == p);
                }
            }
        }
}

TEST_CASE("prime count examples") {
    const auto a = primes::prime_counts(fd(-4), 20);
    CHECK(a.pi_K == 8);
    CHECK(a.pi_K_1 == 6);
    const auto b = primes::prime_counts(fd(-4), 2);
    CHECK(b.pi_K == 1);
    CHECK(b.pi_K_1 == 0);
    const auto c = primes::prime_counts(fd(5), 4);
    CHECK(c.pi_K == 1);
    CHECK(c.pi_K_1 == 0);
    CHECK_THROWS_AS(primes::prime_counts(fd(5), 1.5), ValidationError);
}

TEST_CASE("prime count bounds and monotonicity") {
    const primes::PrimeTable table(5000);
    for (const auto& D : arith::fundamental_discriminants(0, 400)) {
        std::uint64_t omega = 0;
        for (std::int64_t p = 2; p <= std::int64_t(D.absolute()); ++p)
            if (D.absolute() % p == 0 && oracle::is_prime(p)) ++omega;
        std::uint64_t last_pi = 0, last_pi1 = 0;
        for (double x : {2.0, 10.0, 50.0, 300.0, 1000.0, 5000.0}) {
            const auto r = primes::prime_counts(D, x, table);
            CHECK(r.pi_K_1 <= r.pi_K);
            CHECK(r.pi_K <= r.pi_K_1 + omega + prime_pi(std::uint64_t(std::sqrt(x))));
            CHECK(r.pi_K >= last_pi);
            CHECK(r.pi_K_1 >= last_pi1);
            CHECK(r.pi_K_1 % 2 == 0);
            last_pi = r.pi_K;
            last_pi1 = r.pi_K_1;
        }
    }
}

TEST_CASE("split-prime counts average to x / log x") {
    const double x = 1e5;
    const primes::PrimeTable table{std::uint64_t(x)};
    const auto family = arith::fundamental_discriminants(2000, 2600);
    double mean = 0;
    for (const auto& D : family) mean += double(primes::prime_counts(D, x, table).pi_K_1);
    mean /= double(family.size());
    CHECK(mean / (x / std::log(x)) >= 0.8);
    CHECK(mean / (x / std::log(x)) <= 1.2);
}

TEST_CASE("exceptional-set detector") {
    const auto pass = primes::detect_exceptional({fd(-4)}, 100, 0.3);
    CHECK(pass.exceptional.empty());
    REQUIRE(pass.pi_K_1.size() == 1);
    CHECK(pass.pi_K_1[0] == 22);
    CHECK(pass.threshold == doctest::Approx(0.3 * 100 / std::log(100.0)));
    const auto fail = primes::detect_exceptional({fd(-4)}, 100, 10);
    CHECK(fail.exceptional.size() == 1);
    CHECK(fail.exceptional_fraction() == 1);
    CHECK_THROWS_AS(primes::detect_exceptional({fd(-4)}, 5, 0.3), ValidationError);
    CHECK_THROWS_AS(primes::detect_exceptional({fd(-4)}, 100, 0), ValidationError);
}

TEST_CASE("exceptional fraction over (10^4, 2 10^4]") {
    const auto family = arith::fundamental_discriminants(10000, 20000);
    const auto r = primes::detect_exceptional(family, 1000, 0.3, 2);
    CHECK(family.size() == 6074);
    CHECK(r.exceptional_fraction() <= 0.05);
    // regression constant from the census run
    CHECK(r.exceptional.size() == 0);
}
