#pragma once

// Units, regulators and the log embedding of quadratic fields; lattices with
// greedy Minkowski bases and cell partitions of their fundamental domains.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "qtorsion/arith.hpp"
#include "qtorsion/field.hpp"

namespace qtorsion::units {

using field::FieldElement;
using field::Rational;

struct RegulatorInfo {
    long double regulator = 0;
    int unit_norm = 0;
    std::size_t period = 0;
};

/// Regulator and norm of the fundamental unit from the principal cycle, without
/// forming the unit. DomainError for D < 0.
RegulatorInfo regulator_and_norm(const arith::Discriminant& D);

struct FundamentalUnit {
    FieldElement unit;  // eps > 1 at the embedding sqrt D -> +sqrt D
    long double regulator;
    int norm;
};

/// Exact fundamental unit; DomainError for D < 0.
FundamentalUnit fundamental_unit(const arith::Discriminant& D);

/// (d_v log|alpha|_v) over the archimedean places: two real places for D > 0,
/// one complex place (d_v = 2) for D < 0. DomainError for alpha = 0.
std::vector<long double> log_embedding(const FieldElement& alpha);

/// All roots of unity of the field, starting with 1.
std::vector<FieldElement> roots_of_unity(const arith::Discriminant& D);

/// The principal cycle of reduced ideals with the exact elements Gamma_k such
/// that Gamma_k * O is the k-th ideal on the cycle. For D < 0 the cycle is the
/// single ideal O.
class PrincipalCycle {
public:
    explicit PrincipalCycle(const arith::Discriminant& D, bool exact = true);

    const arith::Discriminant& discriminant() const noexcept { return D_; }
    std::size_t period() const noexcept { return keys_.size(); }
    std::optional<std::size_t> position(std::int64_t a, std::int64_t b) const;
    /// Requires exact construction.
    const FieldElement& element(std::size_t k) const;
    std::pair<long double, long double> logs(std::size_t k) const { return logs_.at(k); }

    /// Fundamental unit (exact construction) or 1 for D < 0.
    const FieldElement& unit() const;
    long double regulator() const noexcept { return regulator_; }
    int unit_norm() const noexcept { return unit_norm_; }

private:
    arith::Discriminant D_;
    bool exact_;
    std::vector<std::pair<std::int64_t, std::int64_t>> keys_;
    std::vector<std::pair<std::pair<std::int64_t, std::int64_t>, std::size_t>> index_;
    std::vector<FieldElement> elements_;
    std::vector<std::pair<long double, long double>> logs_;
    std::optional<FieldElement> unit_;
    long double regulator_ = 0;
    int unit_norm_ = 0;
};

struct Generator {
    FieldElement element;
    long double log1;  // log|element| at each embedding (equal for D < 0)
    long double log2;
};

/// A generator of the ideal I when I is principal; std::nullopt otherwise.
std::optional<Generator> principal_generator(const PrincipalCycle& cycle, const field::Ideal& I);

// ------------------------------------------------------------------ lattices

class Lattice {
public:
    /// Rows are basis vectors; DomainError if they are dependent or empty.
    static Lattice exact(std::vector<std::vector<Rational>> rows);
    static Lattice real(std::vector<std::vector<long double>> rows);
    /// One basis vector per line, entries as integers, p/q rationals or decimals.
    /// Decimal entries make the lattice inexact.
    static Lattice parse(std::istream& in);

    std::size_t rank() const noexcept { return real_.size(); }
    std::size_t dimension() const noexcept { return real_.empty() ? 0 : real_[0].size(); }
    bool is_exact() const noexcept { return exact_.has_value(); }
    const std::vector<std::vector<long double>>& basis() const noexcept { return real_; }
    const std::vector<std::vector<Rational>>& exact_basis() const;
    long double norm(std::size_t i) const;
    long double covolume() const;

private:
    Lattice() = default;
    std::vector<std::vector<long double>> real_;
    std::optional<std::vector<std::vector<Rational>>> exact_;
};

struct MinkowskiResult {
    Lattice basis;
    /// basis row i = sum_j transform[i][j] * input row j; unimodular.
    std::vector<std::vector<std::int64_t>> transform;
};

/// Greedy Minkowski basis: each b_i is a shortest vector extending b_1..b_{i-1}
/// to a basis. Ties go to the lexicographically greatest coordinate vector after
/// making its first nonzero coordinate positive.
MinkowskiResult minkowski_reduce(const Lattice& L);
Lattice minkowski_basis(const Lattice& L);

/// prod |b_i| / covol(L), for B a basis of L given as rows.
long double second_theorem_ratio(const Lattice& L, const std::vector<std::vector<long double>>& B);

// ----------------------------------------------------------- cell partitions

struct Cell {
    std::vector<long double> lo;  // per axis, in the coordinate of the partition
    std::vector<long double> hi;  // half-open [lo, hi)
};

struct CellPartition {
    std::size_t rank = 0;         // 0: imaginary field, a single point cell
    std::size_t n = 1;
    long double c_cell = 1;
    long double regulator = 0;    // rank 1
    std::vector<std::size_t> divisions;  // cells per axis
    std::vector<long double> axis_length;
    std::vector<Cell> cells;
    long double max_diameter = 0;
};

/// Imaginary fields: one cell.
CellPartition cell_partition_point(long double c_cell = 1);
/// Rank one: [0, R) in n = ceil(R / C) equal half-open intervals.
/// ConstraintError if n >= 5R + 1, ValidationError for C <= 0.
CellPartition cell_partition(long double regulator, long double c_cell);
/// General rank: the parallelepiped spanned by B split into boxes of diameter <= C.
CellPartition cell_partition(const Lattice& B, long double c_cell);

/// 1-based index of the rank-one cell containing t in [0, R) (t is reduced mod R).
std::size_t cell_index(const CellPartition& P, long double t);

} // namespace qtorsion::units
