#pragma once

// Ideal class groups of quadratic fields via reduced forms (D < 0) and cycles of
// reduced ideals (D > 0), with group structure and an analytic cross-check.

#include <cstddef>
#include <cstdint>
#include <utility>
#include <vector>

#include "qtorsion/arith.hpp"
#include "qtorsion/forms.hpp"

namespace qtorsion::field {
class Ideal;
}

namespace qtorsion::classgroup {

using forms::QuadForm;

struct ClassGroupStructure {
    arith::Discriminant discriminant{-3};
    std::uint64_t order = 1;
    std::vector<std::uint64_t> elementary_divisors;  // d1 | d2 | ... , all >= 2
    std::uint64_t narrow_order = 1;
    int unit_norm = 0;            // +1 / -1 for D > 0, 0 for D < 0
    long double regulator = 0;    // D > 0 only

    std::uint64_t exponent() const { return elementary_divisors.empty() ? 1 : elementary_divisors.back(); }
};

struct ClassGroupOptions {
    /// Prime forms of norm below factor * log^2|D| seed the structure computation.
    double generator_bound_factor = 6.0;
};

QuadForm reduce_form(const arith::Discriminant& D, const QuadForm& f);
QuadForm compose(const arith::Discriminant& D, const QuadForm& f, const QuadForm& g);

/// Wide class group of the fundamental discriminant D; ValidationError otherwise.
ClassGroupStructure class_group(const arith::Discriminant& D, const ClassGroupOptions& opt = {});

/// prod gcd(ell, d_i) = |Cl[ell]|; ValidationError for ell < 2.
std::uint64_t torsion_count(const ClassGroupStructure& S, std::uint64_t ell);
std::uint64_t torsion_count(const std::vector<std::uint64_t>& divisors, std::uint64_t ell);

/// Elementary divisors of Z^n / (rows of M); M must have full rank.
std::vector<std::uint64_t> smith_divisors(std::vector<std::vector<std::int64_t>> M);

struct AnalyticEstimate {
    double value = 0;
    double error_bound = 0;
    std::uint64_t terms = 0;
};

/// Class number from the exponentially convergent series for L(1, chi_D) (times R for D > 0).
/// Throws ConvergenceError if `precision` is not reached within `max_terms`.
AnalyticEstimate analytic_check(const arith::Discriminant& D, double precision = 1e-3,
                                std::uint64_t max_terms = 10'000'000);

/// Number of roots of unity of the field.
unsigned roots_of_unity(const arith::Discriminant& D);

/// Enumerated class group of one field. Classes are numbered 0..h-1 with the
/// principal class 0; ids follow the pinned representatives, which are the reduced
/// ideals [a, (b + sqrt D)/2] of least (a, b) in each class.
class ClassGroup {
public:
    explicit ClassGroup(const arith::Discriminant& D, const ClassGroupOptions& opt = {});

    const arith::Discriminant& discriminant() const noexcept { return D_; }
    const forms::FormContext& context() const noexcept { return ctx_; }
    std::size_t order() const noexcept { return reps_.size(); }
    /// Reduced forms (D < 0) or reduced ideals (D > 0) enumerated.
    std::size_t reduced_count() const noexcept { return keys_.size(); }

    const QuadForm& representative(std::size_t id) const { return reps_.at(id); }
    const std::vector<QuadForm>& representatives() const noexcept { return reps_; }

    /// Class of the ideal [|a|, (b + sqrt D)/2] attached to f (any primitive form of discriminant D).
    std::size_t class_of(const QuadForm& f) const;
    std::size_t class_of(const field::Ideal& I) const;

    std::size_t multiply(std::size_t x, std::size_t y) const;
    std::size_t inverse(std::size_t x) const;
    std::size_t power(std::size_t x, std::int64_t k) const;
    std::size_t element_order(std::size_t x) const;

    const ClassGroupStructure& structure() const noexcept { return structure_; }

    /// D > 0 only.
    long double regulator() const noexcept { return cycle_.regulator; }
    int unit_norm() const noexcept { return cycle_.unit_norm; }

private:
    std::size_t lookup(std::int64_t a, std::int64_t b) const;
    void enumerate_imaginary();
    void enumerate_real();
    void compute_structure();

    arith::Discriminant D_;
    forms::FormContext ctx_;
    ClassGroupOptions opt_;
    std::vector<std::pair<std::int64_t, std::int64_t>> keys_;  // sorted (a, b)
    std::vector<std::uint32_t> key_class_;
    std::vector<QuadForm> reps_;
    forms::CycleSummary cycle_;
    ClassGroupStructure structure_;
};

} // namespace qtorsion::classgroup
