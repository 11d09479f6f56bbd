#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "qtorsion/errors.hpp"
#include "qtorsion/tfw.hpp"

using namespace qtorsion;
using arith::Discriminant;
using heights::FieldContext;

namespace {

Discriminant fd(std::int64_t D) { return Discriminant::fundamental(D); }

void check_record(const FieldContext& K, const tfw::FMapRecord& rec) {
    const auto& G = K.group();
    const auto primes = K.split_primes(std::uint64_t(rec.Z));
    REQUIRE(rec.assignments.size() == primes.size());
    std::set<field::PrimeIdeal> seen;
    for (const auto& a : rec.assignments) {
        CHECK(seen.insert(a.prime).second);
        CHECK(a.cell >= 1);
        CHECK(a.cell <= rec.partition.n);
        REQUIRE(a.j >= 1);
        REQUIRE(a.j <= rec.representatives.size());
        const auto Pl = a.prime.ideal(K.discriminant()).power(rec.ell);
        CHECK(a.a == G.class_of(Pl));
        const auto& b = rec.representatives[a.j - 1];
        const auto I = field::Ideal::from_form(K.discriminant(), b.a, b.b) * Pl;
        CHECK(G.class_of(I) == 0);
        CHECK(field::Ideal::principal(a.generator) == I);
        if (K.discriminant().is_real()) CHECK(units::cell_index(rec.partition, a.coordinate) == a.cell);
    }
    std::size_t fibers = 0, total = 0;
    for (const auto& [key, size] : rec.fibers()) {
        ++fibers;
        total += size;
    }
    CHECK(total == rec.assignments.size());
    CHECK(fibers <= rec.a_order * rec.partition.n);
}

} // namespace

TEST_CASE("f-map examples") {
    const FieldContext Ki(fd(-4));
    const auto r4 = tfw::build_f_map(Ki, 2, 20);
    CHECK(r4.assignments.size() == 6);
    for (const auto& a : r4.assignments) {
        CHECK(a.a == 0);
        CHECK(a.cell == 1);
    }
    check_record(Ki, r4);

    const FieldContext K23(fd(-23));
    const auto r23 = tfw::build_f_map(K23, 3, 60);
    CHECK(r23.a_order == 1);
    for (const auto& a : r23.assignments) CHECK(a.a == 0);
    check_record(K23, r23);

    const FieldContext K5(fd(5));
    const auto r5 = tfw::build_f_map(K5, 2, 20, 1.0);
    CHECK(r5.partition.n == 1);
    for (const auto& a : r5.assignments) {
        CHECK(a.a == 0);
        CHECK(a.cell == 1);
    }
    check_record(K5, r5);

    CHECK_THROWS_AS(tfw::build_f_map(Ki, 2, 2), HypothesisError);
}

TEST_CASE("off-diagonal inequality examples") {
    const FieldContext Ki(fd(-4));
    const auto r = tfw::verify_offdiagonal(Ki, tfw::build_f_map(Ki, 2, 20), 1.0);
    CHECK(r.lhs == 36);
    CHECK(r.pi_1 == 6);
    CHECK(r.s_ell == 120);
    CHECK(r.rhs == 126);
    CHECK(r.holds);
    CHECK(r.pairs == 30);
    CHECK(r.witness_failures == 0);
    CHECK(r.cauchy_schwarz);
    // |S_2(Q(i), 400)| from the brute-force oracle
    CHECK(heights::s_ell_oracle(fd(-4), 2, 400).size() == 120);

    const auto z = tfw::verify_offdiagonal(Ki, tfw::build_f_map(Ki, 2, 2, 1.0, false), 1.0);
    CHECK(z.lhs == 0);
    CHECK(z.rhs == 0);
    CHECK(z.holds);

    // regression constants
    const FieldContext K23(fd(-23));
    const auto s = tfw::verify_offdiagonal(K23, tfw::build_f_map(K23, 3, 60), 1.0);
    CHECK(s.lhs == 256);
    CHECK(s.pi_1 == 16);
    CHECK(s.s_ell == 480);
    CHECK(s.rhs == 496);
    CHECK(s.holds);
    CHECK(s.witness_failures == 0);
}

TEST_CASE("torsion functional") {
    const FieldContext K23(fd(-23));
    const auto b = tfw::evaluate_tfw_bound(K23, 3, 60, 0.01, 1.0);
    CHECK(b.actual_torsion == 3);
    const double root = std::pow(23.0, 0.51);
    CHECK(b.bound_value == doctest::Approx(root / 16 + root * 480 / 256));
    CHECK(b.ratio < 10);
    CHECK(b.ratio == doctest::Approx(3 / b.bound_value));

    const FieldContext Ki(fd(-4));
    const auto g = tfw::evaluate_tfw_bound(Ki, 2, 20, 0, 1.0);
    CHECK(g.actual_torsion == 1);
    CHECK(g.bound_value == doctest::Approx(2.0 / 6 + 2.0 * 120 / 36));
    CHECK_THROWS_AS(tfw::evaluate_tfw_bound(Ki, 2, 2, 0, 1.0), HypothesisError);

    CHECK(tfw::default_c_tfw(fd(-4), 1) == doctest::Approx(std::exp(2.0)));
    CHECK(tfw::default_c_tfw(fd(5), 1) == doctest::Approx(std::exp(4.0)));
}

TEST_CASE("f-map invariants on sampled fields") {
    std::mt19937_64 rng(17);
    const auto family = arith::fundamental_discriminants(0, 3000);
    for (int i = 0; i < 40; ++i) {
        const auto& D = family[rng() % family.size()];
        const FieldContext K(D);
        for (unsigned ell : {2u, 3u})
            for (double Z : {20.0, 60.0}) {
                const auto rec = tfw::build_f_map(K, ell, Z, 1.0, false);
                CAPTURE(D.value());
                CAPTURE(ell);
                CAPTURE(Z);
                check_record(K, rec);
                const auto r = tfw::verify_offdiagonal(K, rec, tfw::default_c_tfw(D, 1));
                CHECK(r.holds);
                CHECK(r.cauchy_schwarz);
                CHECK(r.fiber_bound);
                CHECK(r.witness_failures == 0);
                CHECK(r.pi_1 * r.pi_1 <= r.nonempty_fibers * r.lhs);
            }
    }
}
