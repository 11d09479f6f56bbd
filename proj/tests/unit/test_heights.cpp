#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "qtorsion/errors.hpp"
#include "qtorsion/heights.hpp"

using namespace qtorsion;
using arith::Discriminant;
using field::FieldElement;
using field::Ideal;
using field::Rational;
using heights::FieldContext;
using heights::PointKind;

namespace {

Discriminant fd(std::int64_t D) { return Discriminant::fundamental(D); }

// a + b i in Q(i), where i = sqrt(-4)/2
FieldElement gauss(std::int64_t a, std::int64_t b) { return FieldElement(fd(-4), 2 * a, b, 2); }

long double H(const FieldElement& a) { return heights::weil_height(a).value; }

std::set<FieldElement> elements(const std::vector<heights::SEllElement>& v) {
    std::set<FieldElement> s;
    for (const auto& e : v) s.insert(e.beta);
    return s;
}

FieldElement random_element(const Discriminant& D, std::mt19937_64& rng) {
    for (;;) {
        const auto r = [&](int m) { return std::int64_t(rng() % (2 * m + 1)) - m; };
        FieldElement a(D, r(30), r(30), 1 + std::int64_t(rng() % 12));
        if (!a.is_zero()) return a;
    }
}

// Integral elements x + y w with |N| <= X (imaginary fields), zero included.
std::uint64_t integral_norm_count(std::int64_t D, std::int64_t X) {
    const std::int64_t r = ((D % 4) + 4) % 4, n = (D - r) / 4;
    std::uint64_t count = 0;
    const std::int64_t B = 4 * oracle::isqrt(X) + 4;
    for (std::int64_t x = -B; x <= B; ++x)
        for (std::int64_t y = -B; y <= B; ++y) {
            // N(x + y w) = x^2 + r x y - n y^2
            const std::int64_t N = x * x + r * x * y - n * y * y;
            if (N <= X) ++count;
        }
    return count;
}

} // namespace

TEST_CASE("weil height examples") {
    for (std::int64_t D : {-4, -23, 5, 8}) CHECK(H(FieldElement::from_rational(fd(D), 2)) == doctest::Approx(4));
    CHECK(double(H(FieldElement(fd(5), 1, 1, 2))) == doctest::Approx(1.618034).epsilon(1e-6));
    const auto beta = gauss(2, 1) / gauss(2, -1);
    const auto h = heights::weil_height(beta);
    REQUIRE(h.exact.has_value());
    CHECK(*h.exact == 5);
    CHECK_THROWS_AS(heights::weil_height(FieldElement(fd(-4))), DomainError);
}

TEST_CASE("weil height properties") {
    std::mt19937_64 rng(5);
    for (std::int64_t D : {-3, -4, -23, -71, 5, 8, 13, 229}) {
        const auto d = fd(D);
        const auto roots = units::roots_of_unity(d);
        for (int i = 0; i < 60; ++i) {
            const auto a = random_element(d, rng);
            const auto b = random_element(d, rng);
            const long double ha = H(a), hb = H(b);
            CHECK(ha >= 1);
            CHECK(double(H(a.inverse())) == doctest::Approx(double(ha)).epsilon(1e-12));
            CHECK(H(a * b) <= ha * hb * (1 + 1e-12L));
            for (const auto& z : roots) CHECK(double(H(z * a)) == doctest::Approx(double(ha)).epsilon(1e-12));
            // exact comparison agrees with the float value away from the boundary
            const Rational up = heights::exact_bound(double(ha) * (1 + 1e-9));
            const Rational down = heights::exact_bound(double(ha) * (1 - 1e-9));
            CHECK(heights::height_at_most(a, up));
            CHECK_FALSE(heights::height_at_most(a, down));
        }
    }
}

TEST_CASE("S_ell for the Gaussian field") {
    const auto s = heights::enumerate_s_ell(fd(-4), 2, 25);
    CHECK(s.size() == 8);
    const auto g = gauss(2, 1) / gauss(2, -1);
    std::set<FieldElement> want;
    for (const auto& u : units::roots_of_unity(fd(-4))) {
        want.insert(u * g * g);
        want.insert(u * (g * g).inverse());
    }
    CHECK(elements(s) == want);
    for (const auto& e : s) CHECK(double(e.height.value) == doctest::Approx(25));
    CHECK(heights::enumerate_s_ell(fd(-4), 2, 24).empty());
    CHECK(heights::enumerate_s_ell(fd(5), 2, 1).empty());
}

TEST_CASE("oracle examples") {
    CHECK(elements(heights::s_ell_oracle(fd(-4), 2, 25)) == elements(heights::enumerate_s_ell(fd(-4), 2, 25)));
    CHECK(heights::s_ell_oracle(fd(5), 2, 1).empty());
    // Cl(-23) = C3, so P^3 = (g) with g = (3 + sqrt -23)/2 of norm 8 and g/conj(g) has height 8
    const auto D = fd(-23);
    const FieldElement g(D, 3, 1, 2);
    const auto b = g / g.conjugate();
    const std::set<FieldElement> want{b, -b, b.inverse(), -b.inverse()};
    CHECK(elements(heights::s_ell_oracle(D, 3, 10)) == want);
    CHECK(elements(heights::enumerate_s_ell(D, 3, 10)) == want);
    CHECK(heights::s_ell_oracle(D, 3, 7.99).empty());
    CHECK_THROWS_AS(heights::s_ell_oracle(D, 3, 2e5), RefusalError);
}

TEST_CASE("enumeration equals the oracle on small fields") {
    for (const auto& D : arith::fundamental_discriminants(0, 120)) {
        const FieldContext K(D);
        for (unsigned ell : {2u, 3u})
            for (double Z : {16.0, 256.0, 2000.0}) {
                CAPTURE(D.value());
                CAPTURE(ell);
                CAPTURE(Z);
                const auto e = heights::enumerate_s_ell(K, ell, heights::exact_bound(Z));
                CHECK(elements(e) == elements(heights::s_ell_oracle(D, ell, Z)));
                CHECK(heights::count_s_ell(K, ell, heights::exact_bound(Z)) == e.size());
            }
    }
}

TEST_CASE("every element re-verifies") {
    for (std::int64_t d : {-4, -23, -47, 5, 13, 40, 229}) {
        const FieldContext K(fd(d));
        for (unsigned ell : {2u, 3u}) {
            const Rational Z = heights::exact_bound(3000);
            for (const auto& e : heights::enumerate_s_ell(K, ell, Z)) {
                const auto w = heights::s_ell_witness(e.beta, ell, Z);
                REQUIRE(w.has_value());
                CHECK(w->first == e.P1);
                CHECK(w->second == e.P2);
                CHECK(e.P1 != e.P2);
                CHECK(e.P1.p != 0);
                // N(beta) = (N P1 / N P2)^ell, and the constant term of the minimal polynomial is an ell-th power
                Rational q(e.P1.p, e.P2.p);
                Rational qe = 1;
                for (unsigned i = 0; i < ell; ++i) qe *= q;
                CHECK(abs(e.beta.norm()) == qe);
                CHECK_FALSE(e.beta.is_rational());
                CHECK(heights::height_at_most(e.beta, Z));
            }
        }
    }
}

TEST_CASE("family sums") {
    CHECK(heights::family_s_ell_sum({fd(-4)}, 2, 25).total == 8);
    const auto family = arith::fundamental_discriminants(0, 100);
    CHECK(heights::family_s_ell_sum(family, 2, 1).total == 0);
    // fixed by an oracle run over the same family
    std::uint64_t oracle_total = 0;
    for (const auto& D : family) oracle_total += heights::s_ell_oracle(D, 2, 25).size();
    CHECK(oracle_total == 232);
    const auto fs = heights::family_s_ell_sum(family, 2, 25, 2);
    CHECK(fs.total == 232);
    CHECK(fs.per_field.size() == family.size());
    const auto counts = heights::family_s_ell_counts(family, 2, {1, 25, 100});
    CHECK(counts[0] == 0);
    CHECK(counts[1] == 232);
    CHECK(counts[2] >= counts[1]);
}

TEST_CASE("small generators") {
    const FieldContext K(fd(-4));
    const auto one = heights::small_generator(K, Ideal::unit(fd(-4)));
    CHECK(one == FieldElement::from_rational(fd(-4), 1));
    const auto g = heights::small_generator(K, Ideal::principal(gauss(3, 1)));
    CHECK(double(H(g)) == doctest::Approx(10));
    CHECK((g / gauss(3, 1)).norm() == 1);
    const auto two = heights::small_generator(K, Ideal::rational(fd(-4), 2));
    CHECK(double(H(two)) == doctest::Approx(4));
    CHECK((two / FieldElement::from_rational(fd(-4), 2)).norm() == 1);
    const FieldContext K23(fd(-23));
    CHECK_THROWS_AS(heights::small_generator(K23, field::PrimeIdeal{2, 1}.ideal(fd(-23))), DomainError);
}

TEST_CASE("small generators stay below C_gen N") {
    std::mt19937_64 rng(9);
    for (std::int64_t d : {-4, -7, -23, 5, 13, 21, 376, 229}) {
        const auto D = fd(d);
        const FieldContext K(D);
        for (int i = 0; i < 40; ++i) {
            FieldElement a(D, std::int64_t(rng() % 41) - 20, std::int64_t(rng() % 41) - 20, 1);
            if (a.is_zero()) continue;
            const auto I = Ideal::principal(a);
            const auto g = heights::small_generator(K, I);
            CHECK(Ideal::principal(g) == I);
            CHECK(H(g) <= heights::default_c_gen * (long double)(double(I.norm())));
            CHECK(H(g) <= H(a) * (1 + 1e-12L));
        }
    }
}

TEST_CASE("fraction decomposition examples") {
    const FieldContext Ki(fd(-4));
    const auto f5 = heights::fraction_decomposition(Ki, FieldElement::from_rational(fd(-4), 5));
    CHECK(f5.t == FieldElement::from_rational(fd(-4), 5));
    CHECK(f5.t_prime == FieldElement::from_rational(fd(-4), 1));
    CHECK(f5.class_index == 1);
    const auto fg = heights::fraction_decomposition(Ki, gauss(2, 1) / gauss(2, -1));
    CHECK(Ideal::principal(fg.t) == Ideal::principal(gauss(2, 1)));
    CHECK(Ideal::principal(fg.t_prime) == Ideal::principal(gauss(2, -1)));
    CHECK(fg.class_index == 1);
    const FieldContext K5(fd(5));
    const auto f32 = heights::fraction_decomposition(K5, FieldElement::from_rational(fd(5), Rational(3, 2)));
    CHECK(f32.t == FieldElement::from_rational(fd(5), 3));
    CHECK(f32.t_prime == FieldElement::from_rational(fd(5), 2));
    CHECK(f32.class_index == 1);
}

TEST_CASE("fraction decomposition properties") {
    std::mt19937_64 rng(13);
    for (std::int64_t d : {-23, -47, -84, -4, 40, 316, 229}) {
        const auto D = fd(d);
        const FieldContext K(D);
        for (int i = 0; i < 40; ++i) {
            const auto a = random_element(D, rng);
            const auto f = heights::fraction_decomposition(K, a);
            CHECK(f.t / f.t_prime == a);
            CHECK(f.t.is_integral());
            CHECK(f.t_prime.is_integral());
            const auto g = Ideal::principal(f.t) + Ideal::principal(f.t_prime);
            CHECK(K.group().class_of(g) + 1 == f.class_index);
            const auto& rep = K.group().representative(f.class_index - 1);
            CHECK(g == Ideal::from_form(D, rep.a, rep.b));
            const long double ratio = std::max(H(f.t), H(f.t_prime)) / H(a);
            CHECK(double(f.c_frac) == doctest::Approx(double(ratio)).epsilon(1e-9));
        }
    }
}

TEST_CASE("count_points examples") {
    const FieldContext Ki(fd(-4));
    CHECK(heights::count_points(Ki, PointKind::integers_by_height, 4) == 13);
    CHECK(heights::count_points(Ki, PointKind::units_in_box, 1) == 4);
    const FieldContext K8(fd(8));
    CHECK(heights::count_points(K8, PointKind::units_in_box, 10) == 10);
    CHECK_THROWS_AS(heights::count_points(K8, PointKind::integers_by_height, 1e9), RefusalError);
    CHECK_THROWS(heights::count_points(K8, PointKind::unit_translates, 10));
}

TEST_CASE("integers by height match a norm-form count") {
    for (std::int64_t d : {-3, -4, -23, -71}) {
        const FieldContext K(fd(d));
        for (std::int64_t X : {1, 2, 5, 17, 60, 200})
            CHECK(heights::count_points(K, PointKind::integers_by_height, double(X)) == integral_norm_count(d, X));
    }
}

TEST_CASE("units in a box for Q(sqrt 2)") {
    const FieldContext K(fd(8));
    for (double X : {1.0, 2.0, 3.0, 100.0, 1e6}) {
        // +-(1 + sqrt 2)^n with |n| <= floor(log X / log(1 + sqrt 2))
        const auto m = std::uint64_t(std::floor(std::log(X) / std::log(1 + std::sqrt(2.0)) + 1e-12));
        CHECK(heights::count_points(K, PointKind::units_in_box, X) == 2 * (2 * m + 1));
    }
}

TEST_CASE("unit translates") {
    const FieldContext K(fd(5));
    const auto a = FieldElement::from_rational(fd(5), 3);
    // H(3u) = 9 max(1, |u|/3) max(1, |u'|/3): units with |u|, |u'| both <= 3
    CHECK(heights::count_points(K, PointKind::unit_translates, 9, a) ==
          heights::count_points(K, PointKind::units_in_box, 3));
    CHECK(heights::count_points(K, PointKind::unit_translates, 8.9, a) == 0);
}
