#pragma once

// Splitting of rational primes, prime-ideal counting functions and the
// exceptional-set detector.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "qtorsion/arith.hpp"
#include "qtorsion/field.hpp"

namespace qtorsion::primes {

enum class Splitting { split, inert, ramified };

const char* to_string(Splitting s);

struct SplittingType {
    Splitting kind = Splitting::inert;
    std::uint64_t p = 0;
    std::uint64_t norm = 0;  // p for split / ramified, p^2 for inert
    /// Root of x^2 - r x - n (the minimal polynomial of w) mod p; absent for inert p.
    std::optional<std::uint64_t> root;
    /// Prime ideals above p of degree one (two when split, one when ramified).
    std::vector<field::PrimeIdeal> ideals;
};

/// ValidationError unless p is prime.
SplittingType splitting_type(const arith::Discriminant& D, std::uint64_t p);

struct PrimeCountRecord {
    double x = 0;
    std::uint64_t pi_K = 0;
    std::uint64_t pi_K_1 = 0;  // ideals above split primes only
};

/// Rational primes up to a bound, sieved once and shared read-only.
class PrimeTable {
public:
    explicit PrimeTable(std::uint64_t limit);
    std::uint64_t limit() const noexcept { return limit_; }
    const std::vector<std::uint32_t>& primes() const noexcept { return primes_; }

private:
    std::uint64_t limit_;
    std::vector<std::uint32_t> primes_;
};

/// ValidationError for x < 2.
PrimeCountRecord prime_counts(const arith::Discriminant& D, double x);
PrimeCountRecord prime_counts(const arith::Discriminant& D, double x, const PrimeTable& table);

struct ExceptionalReport {
    double x = 0;
    double c = 0;
    double threshold = 0;  // c x / log x
    std::vector<std::int64_t> passing;
    std::vector<std::int64_t> exceptional;
    std::vector<std::uint64_t> pi_K_1;  // per field, in family order
    double exceptional_fraction() const {
        const auto n = passing.size() + exceptional.size();
        return n == 0 ? 0.0 : double(exceptional.size()) / double(n);
    }
};

inline constexpr double default_lotz_c = 0.3;

/// Marks K passing when pi_K^(1)(x) >= c x / log x. ValidationError for x < 10 or c <= 0.
ExceptionalReport detect_exceptional(const std::vector<arith::Discriminant>& family, double x,
                                     double c = default_lotz_c, unsigned workers = 1);

} // namespace qtorsion::primes
