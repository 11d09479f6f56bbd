#pragma once

// Exact integer substrate: 128-bit factorization, Kronecker symbols and
// enumeration of fundamental discriminants.

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace qtorsion {

using i128 = __int128;
using u128 = unsigned __int128;

std::string to_string(i128 v);
std::string to_string(u128 v);

namespace arith {

struct PrimePower {
    u128 prime;
    unsigned exponent;

    friend bool operator==(const PrimePower&, const PrimePower&) = default;
};

/// Sorted by prime, primes strictly increasing.
using Factorization = std::vector<PrimePower>;

/// Largest accepted input to factorize(): 2^127.
inline constexpr u128 factorize_limit = u128(1) << 127;

/// Exact factorization of 1 <= n <= 2^127. Trial division by primes below 10^6,
/// then Brent's variant of Pollard rho with a fixed seed, so the output is
/// deterministic. Throws RangeError outside the range.
Factorization factorize(u128 n);

/// Deterministic for n < 3.3e24 (Miller-Rabin on the first 13 prime bases);
/// above that a strong Lucas test is added (Baillie-PSW).
bool is_prime(u128 n);

u128 gcd(u128 a, u128 b);
u128 mulmod(u128 a, u128 b, u128 m);
u128 powmod(u128 base, u128 exp, u128 m);
std::uint64_t isqrt(u128 n);
bool is_perfect_square(u128 n, std::uint64_t* root = nullptr);

/// Kronecker symbol (D / n) for n >= 1, with (D/2) = 0 for even D and
/// (D/2) = (-1)^((D^2-1)/8) for odd D.
int kronecker(i128 D, u128 n);

/// Some x with x^2 = a mod p for an odd prime p (or p = 2), a a square mod p.
/// Tonelli-Shanks; throws DomainError if a is a non-residue.
std::uint64_t sqrt_mod(std::uint64_t a, std::uint64_t p);

bool is_squarefree(u128 n);

/// Fundamentality test for a quadratic discriminant (D = 1 excluded).
bool is_fundamental_discriminant(std::int64_t D);

class Discriminant {
public:
    /// Throws ValidationError unless D is a nonzero integer congruent to 0 or 1 mod 4.
    explicit Discriminant(std::int64_t value);

    /// Throws ValidationError unless D is fundamental.
    static Discriminant fundamental(std::int64_t value);

    std::int64_t value() const noexcept { return value_; }
    std::uint64_t absolute() const noexcept {
        return value_ < 0 ? std::uint64_t(-value_) : std::uint64_t(value_);
    }
    bool is_fundamental() const noexcept { return fundamental_; }
    bool is_imaginary() const noexcept { return value_ < 0; }
    bool is_real() const noexcept { return value_ > 0; }
    /// D mod 4 in {0, 1}.
    int residue() const noexcept { return int(((value_ % 4) + 4) % 4); }

    friend bool operator==(const Discriminant& a, const Discriminant& b) noexcept {
        return a.value_ == b.value_;
    }

private:
    Discriminant(std::int64_t value, bool fundamental) : value_(value), fundamental_(fundamental) {}

    std::int64_t value_;
    bool fundamental_;
};

enum class SignFilter { negative, positive, both };

SignFilter parse_sign_filter(const std::string& s);
const char* to_string(SignFilter s);

/// Fundamental discriminants with lo < |D| <= hi, ascending |D|, negative before positive.
/// An empty interval yields an empty list.
std::vector<Discriminant> fundamental_discriminants(std::uint64_t lo, std::uint64_t hi,
                                                    SignFilter sign = SignFilter::both);

/// Primes p <= limit by a segmented sieve of Eratosthenes.
std::vector<std::uint32_t> primes_up_to(std::uint64_t limit);

/// Smallest-prime-factor table for 0..limit, shared and immutable once built.
class SmallestFactorTable {
public:
    explicit SmallestFactorTable(std::uint32_t limit);

    std::uint32_t limit() const noexcept { return limit_; }
    std::uint32_t smallest_factor(std::uint32_t n) const { return spf_[n]; }

    /// Divisors of 1 <= n <= limit, unsorted.
    void divisors(std::uint32_t n, std::vector<std::uint32_t>& out) const;

private:
    std::uint32_t limit_;
    std::vector<std::uint32_t> spf_;
};

/// Returns a table covering at least `limit`; tables are cached process-wide and
/// grown under a lock. Callers keep the returned pointer alive.
std::shared_ptr<const SmallestFactorTable> smallest_factor_table(std::uint32_t limit);

} // namespace arith
} // namespace qtorsion
