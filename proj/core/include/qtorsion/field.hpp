#pragma once

// Elements and ideals of a quadratic field Q(sqrt D).
//
// Elements are stored as (x + y*sqrt(D))/z with arbitrary-precision integers.
// The integral basis is (1, w) with w = (r + sqrt D)/2, r = D mod 4 in {0, 1}.
// Ideals are Z-modules {a, t + d*w} in Hermite normal form with 128-bit entries.

#include <boost/multiprecision/cpp_int.hpp>

#include <compare>
#include <string>
#include <utility>
#include <vector>

#include "qtorsion/arith.hpp"
#include "qtorsion/forms.hpp"

namespace qtorsion::field {

using Integer = boost::multiprecision::cpp_int;
using Rational = boost::multiprecision::cpp_rational;

/// Natural log of |n| for n != 0, safe for integers beyond long double range.
long double log_abs(const Integer& n);

class FieldElement {
public:
    explicit FieldElement(const arith::Discriminant& D);
    FieldElement(const arith::Discriminant& D, Integer x, Integer y, Integer z = 1);

    static FieldElement from_rational(const arith::Discriminant& D, const Rational& q);
    /// u + v*w.
    static FieldElement from_omega(const arith::Discriminant& D, const Rational& u, const Rational& v);
    static FieldElement omega(const arith::Discriminant& D);

    const arith::Discriminant& discriminant() const noexcept { return D_; }
    const Integer& x() const noexcept { return x_; }
    const Integer& y() const noexcept { return y_; }
    const Integer& z() const noexcept { return z_; }

    /// Coordinates in the integral basis (1, w).
    Rational omega_u() const;
    Rational omega_v() const;

    bool is_zero() const { return x_ == 0 && y_ == 0; }
    bool is_rational() const { return y_ == 0; }
    bool is_integral() const;
    /// Least s > 0 with s*alpha integral.
    Integer denominator() const;

    Rational norm() const;
    Rational trace() const;
    FieldElement conjugate() const;
    FieldElement inverse() const;
    FieldElement pow(long long k) const;

    /// log|alpha| at embedding i. Real fields: i = 0 uses +sqrt(D), i = 1 uses -sqrt(D).
    /// Imaginary fields: the complex absolute value (i ignored). Throws DomainError on zero.
    long double log_abs_embedding(int i) const;
    /// Sign of the real embedding i (real fields only): -1, 0, +1.
    int sign_embedding(int i) const;
    long double embedding(int i) const;

    std::string to_string() const;

    FieldElement operator-() const;
    friend FieldElement operator+(const FieldElement& a, const FieldElement& b);
    friend FieldElement operator-(const FieldElement& a, const FieldElement& b);
    friend FieldElement operator*(const FieldElement& a, const FieldElement& b);
    friend FieldElement operator/(const FieldElement& a, const FieldElement& b);

    friend bool operator==(const FieldElement& a, const FieldElement& b) {
        return a.D_ == b.D_ && a.x_ == b.x_ && a.y_ == b.y_ && a.z_ == b.z_;
    }
    /// Arbitrary but fixed total order for containers.
    friend bool operator<(const FieldElement& a, const FieldElement& b);

private:
    void normalize();
    void check_same(const FieldElement& o) const;

    arith::Discriminant D_;
    Integer x_, y_, z_;
};

/// Sign of p + q*sqrt(D) for D > 0 non-square (exact).
int sign_quadratic(const Integer& p, const Integer& q, std::int64_t D);

class Ideal {
public:
    static Ideal unit(const arith::Discriminant& D);
    /// Primitive ideal [|a|, (b + sqrt D)/2]; requires b = D mod 2 and 4a | b^2 - D.
    static Ideal from_form(const arith::Discriminant& D, std::int64_t a, std::int64_t b);
    static Ideal rational(const arith::Discriminant& D, i128 n);
    /// (alpha) for integral nonzero alpha; DomainError otherwise.
    static Ideal principal(const FieldElement& alpha);
    /// Z-span of the given (1, w)-coordinate vectors; must be a full-rank ideal.
    static Ideal from_generators(const arith::Discriminant& D, const std::vector<std::pair<i128, i128>>& gens);

    const arith::Discriminant& discriminant() const noexcept { return D_; }
    i128 a() const noexcept { return a_; }
    i128 t() const noexcept { return t_; }
    i128 d() const noexcept { return d_; }
    i128 norm() const { return a_ * d_; }
    i128 content() const noexcept { return d_; }
    bool is_primitive() const noexcept { return d_ == 1; }
    bool is_unit() const noexcept { return a_ == 1 && d_ == 1; }

    /// Primitive part as a form (A, B, C) with A > 0 and B in (-A, A].
    forms::QuadForm form() const;

    Ideal operator*(const Ideal& o) const;
    /// Sum of ideals (their gcd).
    Ideal operator+(const Ideal& o) const;
    Ideal conjugate() const;
    Ideal power(unsigned k) const;
    /// this / o, assuming o divides this.
    Ideal divide(const Ideal& o) const;

    bool contains(i128 u, i128 v) const;
    bool contains(const FieldElement& alpha) const;
    /// True if this ideal contains o (this | o).
    bool divides(const Ideal& o) const;

    std::string to_string() const;

    friend bool operator==(const Ideal& x, const Ideal& y) {
        return x.D_ == y.D_ && x.a_ == y.a_ && x.t_ == y.t_ && x.d_ == y.d_;
    }

private:
    Ideal(const arith::Discriminant& D, i128 a, i128 t, i128 d) : D_(D), a_(a), t_(t), d_(d) {}

    arith::Discriminant D_;
    i128 a_, t_, d_;
};

/// Degree-one or ramified prime ideal [p, (b + sqrt D)/2], b^2 = D mod 4p, b in (-p, p].
struct PrimeIdeal {
    std::uint64_t p = 0;
    std::int64_t b = 0;

    Ideal ideal(const arith::Discriminant& D) const { return Ideal::from_form(D, std::int64_t(p), b); }
    PrimeIdeal conjugate() const;

    friend bool operator==(const PrimeIdeal&, const PrimeIdeal&) = default;
    friend auto operator<=>(const PrimeIdeal&, const PrimeIdeal&) = default;
};

std::string to_string(const PrimeIdeal& P);

struct IdealReduction {
    forms::QuadForm reduced;  // a > 0; reduced as an ideal
    FieldElement multiplier;  // mu with mu * I = [reduced.a, (reduced.b + sqrt D)/2]
    long double log1 = 0;     // log|mu| at the embeddings
    long double log2 = 0;
};

/// log|(-b + sqrt D)/(2a)| at both embeddings (equal for D < 0), a > 0, computed
/// without cancellation.
std::pair<long double, long double> reduction_step_logs(std::int64_t D, i128 a, i128 b);

/// Reduce an ideal, tracking the multiplier. With exact = false only the logs are tracked
/// and the multiplier is left at 1.
IdealReduction reduce_ideal(const Ideal& I, bool exact = true);

} // namespace qtorsion::field
