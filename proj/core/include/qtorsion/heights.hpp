#pragma once

// Weil heights on quadratic fields, the sets S_ell(K, Z) (by ideal-theoretic
// enumeration and by a brute-force minimal-polynomial oracle), small generators,
// fraction decompositions and lattice point counts.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "qtorsion/arith.hpp"
#include "qtorsion/classgroup.hpp"
#include "qtorsion/field.hpp"
#include "qtorsion/units_lattice.hpp"

namespace qtorsion::heights {

using field::FieldElement;
using field::Ideal;
using field::Integer;
using field::PrimeIdeal;
using field::Rational;

struct Height {
    long double value = 1;
    long double log_value = 0;
    std::optional<Rational> exact;  // present when the height is rational
};

/// prod over all places of max(1, |alpha|_v^{d_v}); DomainError for alpha = 0.
Height weil_height(const FieldElement& alpha);
/// Exact test H(alpha) <= Z.
bool height_at_most(const FieldElement& alpha, const Rational& Z);
/// Norm of the denominator ideal of alpha.
Integer denominator_norm(const FieldElement& alpha);

/// Exact rational from a double (binary expansion).
Rational exact_bound(double Z);

/// Per-field data shared by the height routines: class group, principal cycle,
/// fundamental unit and roots of unity. Immutable after construction except for
/// the lazily built exact cycle, which is guarded.
class FieldContext {
public:
    explicit FieldContext(const arith::Discriminant& D);

    const arith::Discriminant& discriminant() const noexcept { return D_; }
    const classgroup::ClassGroup& group() const noexcept { return group_; }
    /// Logarithmic data only.
    const units::PrincipalCycle& cycle() const noexcept { return cycle_; }
    /// Exact Gamma_k and fundamental unit (built on first use).
    const units::PrincipalCycle& exact_cycle() const;
    const std::vector<FieldElement>& roots_of_unity() const noexcept { return roots_; }
    long double regulator() const noexcept { return cycle_.regulator(); }

    /// Both prime ideals above every split prime p <= max_norm, sorted by (p, b).
    std::vector<PrimeIdeal> split_primes(std::uint64_t max_norm) const;

private:
    arith::Discriminant D_;
    classgroup::ClassGroup group_;
    units::PrincipalCycle cycle_;
    std::vector<FieldElement> roots_;
    mutable std::once_flag exact_once_;
    mutable std::unique_ptr<units::PrincipalCycle> exact_;
};

// --------------------------------------------------------------- S_ell(K, Z)

struct SEllElement {
    FieldElement beta;
    PrimeIdeal P1;  // (beta) = (P1 / P2)^ell
    PrimeIdeal P2;
    Height height;
};

/// Exact membership: returns (P1, P2) when (beta) = (P1 P2^-1)^ell for distinct
/// degree-one primes and H(beta) <= Z.
std::optional<std::pair<PrimeIdeal, PrimeIdeal>> s_ell_witness(const FieldElement& beta, unsigned ell,
                                                               const Rational& Z);

/// S_ell(K, Z) via prime pairs, principality in the class group and unit multiples.
std::vector<SEllElement> enumerate_s_ell(const FieldContext& K, unsigned ell, const Rational& Z);
std::vector<SEllElement> enumerate_s_ell(const arith::Discriminant& D, unsigned ell, double Z);

/// |S_ell(K, Z)| for each Z in `Zs` without materializing elements away from the boundary.
std::vector<std::uint64_t> count_s_ell(const FieldContext& K, unsigned ell, const std::vector<Rational>& Zs);
std::uint64_t count_s_ell(const FieldContext& K, unsigned ell, const Rational& Z);

inline constexpr double default_oracle_ceiling = 1e5;

/// Brute force over minimal polynomials X^2 + a1 X + a2: a2 = +-(u/v)^ell for primes
/// u, v with max(u, v)^ell <= Z, a1 = t/s with s | v^ell and |t| bounded by the
/// height, roots filtered by s_ell_witness. RefusalError if Z > ceiling.
std::vector<SEllElement> s_ell_oracle(const arith::Discriminant& D, unsigned ell, double Z,
                                      double ceiling = default_oracle_ceiling);

struct FamilySum {
    std::uint64_t total = 0;
    std::vector<std::pair<std::int64_t, std::uint64_t>> per_field;
};

FamilySum family_s_ell_sum(const std::vector<arith::Discriminant>& family, unsigned ell, double Z,
                           unsigned workers = 1);
/// Totals over the family for every Z in the schedule (one pass per field).
std::vector<std::uint64_t> family_s_ell_counts(const std::vector<arith::Discriminant>& family, unsigned ell,
                                               const std::vector<double>& Zs, unsigned workers = 1);

// ----------------------------------------------------- generators, fractions

inline constexpr double default_c_gen = 8.0;
inline constexpr double default_c_frac = 16.0;

/// Generator of a principal integral ideal of least height; ties go to the least
/// |log|a_1| - log|a_2||, then to the lexicographically greatest (1, w)-coordinates.
/// DomainError naming the class when the ideal is not principal.
FieldElement small_generator(const FieldContext& K, const Ideal& a);

struct FractionDecomposition {
    FieldElement t;
    FieldElement t_prime;
    std::size_t class_index = 1;  // 1-based; 1 is the principal class
    forms::QuadForm representative;  // pinned C_i
    long double c_frac = 0;          // max(H(t), H(t')) / H(alpha)
};

/// alpha = t / t' with t, t' integral and gcd((t), (t')) = C_i.
FractionDecomposition fraction_decomposition(const FieldContext& K, const FieldElement& alpha);

// --------------------------------------------------------------- point counts

enum class PointKind { integers_by_height, units_in_box, unit_translates };

const char* to_string(PointKind k);
PointKind parse_point_kind(const std::string& s);

struct CountLimits {
    double imaginary_ceiling = 1e12;  // integers_by_height, D < 0
    double real_ceiling = 16384;      // integers_by_height, D > 0
};

/// Exact counts; `alpha` is required for unit_translates. RefusalError above the ceilings.
std::uint64_t count_points(const FieldContext& K, PointKind kind, double X,
                           const std::optional<FieldElement>& alpha = std::nullopt,
                           const CountLimits& limits = {});

} // namespace qtorsion::heights
