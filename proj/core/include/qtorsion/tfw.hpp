#pragma once

// The map f(P) = (a, i) on degree-one primes, its fiber statistics, the
// off-diagonal witnesses and the resulting torsion functional.

#include <cstddef>
#include <cstdint>
#include <vector>

#include "qtorsion/heights.hpp"
#include "qtorsion/units_lattice.hpp"

namespace qtorsion::tfw {

using field::FieldElement;
using field::PrimeIdeal;

struct Assignment {
    PrimeIdeal prime;
    std::size_t a = 0;     // class of P^ell, i.e. the image of P in Cl / Cl[ell]
    std::size_t cell = 1;  // 1-based
    std::size_t j = 1;     // 1-based index of b_j with b_j P^ell principal
    FieldElement generator;  // of b_j P^ell, moved into the fundamental domain
    long double coordinate = 0;  // (log|g|_1 - log|g|_2)/2 in [0, R); 0 for D < 0
};

struct FMapRecord {
    std::int64_t D = 0;
    unsigned ell = 2;
    double Z = 0;
    units::CellPartition partition;
    std::vector<forms::QuadForm> representatives;  // b_1..b_h
    std::size_t a_order = 1;                       // |A| = |Cl^ell|
    std::vector<Assignment> assignments;

    /// Fiber sizes keyed by (a, cell), in ascending key order.
    std::vector<std::pair<std::pair<std::size_t, std::size_t>, std::size_t>> fibers() const;
};

/// C_tfw = exp(2 C_cell (r + s)) with r + s = 2 for real and 1 for imaginary fields.
double default_c_tfw(const arith::Discriminant& D, double c_cell);

/// HypothesisError when there is no degree-one prime of norm <= Z and `require_primes` is set.
FMapRecord build_f_map(const heights::FieldContext& K, unsigned ell, double Z, const units::CellPartition& partition,
                       bool require_primes = true);
/// Partition from the regulator and C_cell (a single point cell for D < 0).
FMapRecord build_f_map(const heights::FieldContext& K, unsigned ell, double Z, double c_cell = 1.0,
                       bool require_primes = true);

struct OffDiagonalReport {
    std::uint64_t lhs = 0;             // sum over fibers of |fiber|^2
    std::uint64_t pi_1 = 0;            // pi_K^(1)(Z)
    std::uint64_t s_ell = 0;           // |S_ell(K, C_tfw Z^ell)|
    std::uint64_t rhs = 0;             // pi_1 + s_ell
    bool holds = false;                // lhs <= rhs
    std::uint64_t pairs = 0;           // ordered off-diagonal same-fiber pairs
    std::uint64_t witness_failures = 0;
    std::uint64_t distinct_witnesses = 0;
    std::size_t nonempty_fibers = 0;
    bool cauchy_schwarz = false;       // pi_1^2 <= fibers * lhs
    bool fiber_bound = false;          // fibers <= |A| n
    double c_tfw = 1;
};

OffDiagonalReport verify_offdiagonal(const heights::FieldContext& K, const FMapRecord& record, double c_tfw);

struct TfwBound {
    double bound_value = 0;
    std::uint64_t actual_torsion = 1;
    double ratio = 0;
    std::uint64_t pi_1 = 0;
    std::uint64_t s_ell = 0;
    double c_tfw = 1;
};

/// |D|^(1/2+eps)/pi_1 + |D|^(1/2+eps) |S_ell(K, C_tfw Z^ell)| / pi_1^2 with implied constant 1.
/// HypothesisError when pi_1 = 0. c_tfw <= 0 selects default_c_tfw(D, c_cell).
TfwBound evaluate_tfw_bound(const heights::FieldContext& K, unsigned ell, double Z, double eps, double c_tfw = 0,
                            double c_cell = 1.0);

} // namespace qtorsion::tfw
