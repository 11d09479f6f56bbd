#pragma once

// Binary quadratic forms (a, b, c) of discriminant b^2 - 4ac, with reduction,
// the rho step for indefinite forms, and composition.

#include <compare>
#include <cstddef>
#include <cstdint>
#include <string>

#include "qtorsion/arith.hpp"

namespace qtorsion::forms {

struct QuadForm {
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::int64_t c = 0;

    i128 discriminant() const { return i128(b) * b - i128(4) * a * c; }

    friend bool operator==(const QuadForm&, const QuadForm&) = default;
    friend auto operator<=>(const QuadForm&, const QuadForm&) = default;
};

std::string to_string(const QuadForm& f);

/// Discriminant plus floor(sqrt|D|), shared by the hot loops.
struct FormContext {
    std::int64_t D;
    std::int64_t root;

    explicit FormContext(const arith::Discriminant& d);
    explicit FormContext(std::int64_t d);
};

/// (a, b, (b^2 - D)/(4a)); throws ValidationError if 4a does not divide b^2 - D.
QuadForm make_form(const FormContext& ctx, std::int64_t a, std::int64_t b);

QuadForm principal_form(const FormContext& ctx);

inline QuadForm inverse(const QuadForm& f) { return {f.a, -f.b, f.c}; }

/// D < 0: |b| <= a <= c, b >= 0 if |b| = a or a = c.
/// D > 0: 0 < b < sqrt(D), sqrt(D) - b < 2|a| < sqrt(D) + b.
bool is_reduced(const FormContext& ctx, const QuadForm& f);

/// One rho step (a, b, c) -> (c, b', c') with b' = -b mod 2|c| normalized; D > 0.
QuadForm rho(const FormContext& ctx, const QuadForm& f);

/// D < 0: the unique reduced form in the class (requires a > 0).
/// D > 0: the first reduced form reached by rho steps (a form on the cycle).
/// Throws ValidationError if b^2 - 4ac differs from D.
QuadForm reduce(const FormContext& ctx, const QuadForm& f);

/// Unreduced composite with leading coefficient a1*a2/g^2 and b normalized mod 2|A|.
/// `content` receives g = gcd(a1, a2, (b1 + b2)/2).
QuadForm compose_raw(const FormContext& ctx, const QuadForm& f, const QuadForm& g,
                     std::int64_t* content = nullptr);

/// Reduced composite.
QuadForm compose(const FormContext& ctx, const QuadForm& f, const QuadForm& g);

QuadForm power(const FormContext& ctx, const QuadForm& f, std::int64_t k);

/// Translate b into (-|a|, |a|] (D < 0 style) keeping the class.
QuadForm normalize(const FormContext& ctx, const QuadForm& f);

/// b in [0, p] with b = D mod 2 and b^2 = D mod 4p, for a prime p that is not inert.
/// Throws DomainError if p is inert.
std::int64_t prime_form_b(std::int64_t D, std::uint64_t p);

/// Walk of the principal cycle of reduced ideals (D > 0).
struct CycleSummary {
    std::size_t period = 0;   // number of rho steps until the principal ideal recurs
    long double regulator = 0;
    int unit_norm = 0;        // (-1)^period
};

CycleSummary principal_cycle_summary(const FormContext& ctx);

} // namespace qtorsion::forms
