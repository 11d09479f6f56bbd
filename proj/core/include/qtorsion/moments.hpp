#pragma once

// Moment sums of l-torsion over dyadic discriminant windows, tail counts,
// dyadic shells, log-slope fits and the table of reference exponents.

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "qtorsion/arith.hpp"
#include "qtorsion/classgroup.hpp"
#include "qtorsion/field.hpp"

namespace qtorsion::moments {

using classgroup::ClassGroupStructure;
using field::Integer;

/// Class group structures for a family, computed on `workers` threads, in family order.
std::vector<ClassGroupStructure> compute_structures(const std::vector<arith::Discriminant>& family,
                                                    unsigned workers = 1);

struct WindowRecord {
    std::uint64_t Q = 0;          // window (Q, 2Q] on |D|
    std::uint64_t count = 0;      // fields in the window
    long double sum = 0;          // sum of |Cl[l]|^r
    std::optional<Integer> exact_sum;  // integer r
};

/// Fields whose |D| lies in (Q, 2Q]; `fields` may cover any range. r >= 0; integral r is summed exactly.
WindowRecord moment_sum(const std::vector<ClassGroupStructure>& fields, unsigned ell, double r, std::uint64_t Q);
WindowRecord moment_sum(arith::SignFilter sign, unsigned ell, double r, std::uint64_t Q, unsigned workers = 1);

struct MomentSeries {
    arith::SignFilter sign = arith::SignFilter::both;
    unsigned d = 2;
    unsigned ell = 3;
    double r = 1;
    std::vector<WindowRecord> windows;
};

/// Windows Q = q_min * 2^k up to q_max.
MomentSeries moment_series(const std::vector<ClassGroupStructure>& fields, arith::SignFilter sign, unsigned ell,
                           double r, std::uint64_t q_min, std::uint64_t q_max);

/// |{K in (Q, 2Q] : |Cl_K[l]| >= H}|. ValidationError for H < 1.
std::uint64_t tail_counts(const std::vector<ClassGroupStructure>& fields, unsigned ell, std::uint64_t Q, double H);

struct DyadicShells {
    std::uint64_t Q = 0;
    std::uint64_t J = 0;                  // shells j = 0..J
    std::vector<std::uint64_t> counts;    // |{H = e^j <= |Cl[l]| < e^(j+1)}|
    std::uint64_t total = 0;              // |S(Q)|
    bool ceiling_exceeded = false;        // some field needed j > the Landau-type ceiling
};

/// J = ceil(log(sqrt(2Q) * max(1, log 2Q))), extended if a field exceeds it.
DyadicShells dyadic_shells(const std::vector<ClassGroupStructure>& fields, unsigned ell, std::uint64_t Q);

struct SlopeFit {
    double slope = 0;
    double intercept = 0;
    double max_residual = 0;
    double slope_stderr = 0;
    std::size_t points = 0;
};

/// OLS on (log X, log value). ValidationError for fewer than 3 points,
/// DomainError for a nonpositive X or value.
SlopeFit fit_log_slope(const std::vector<std::pair<double, double>>& series);

// ------------------------------------------------------- reference exponents

struct ReferenceExponent {
    std::string name;       // trivial, grh, hbp1, hbp, epw, fw, fm2, main, moment2, moment3
    std::optional<double> value;  // absent when the bound does not apply to (d, l, r)
    std::string note;
};

/// Exponents of Q for sum_K |Cl_K[l]|^r, with s the exponent of |S(Q)|.
std::vector<ReferenceExponent> reference_exponents(unsigned d, unsigned ell, double r, double s);
double main_exponent(unsigned d, unsigned ell, double r, double s);
inline unsigned big_r(unsigned d, unsigned ell) { return ell * (d - 1) + 1; }
/// Z-exponent of sum_K |S_l(K, Z)|: d - 1 + 2/l, and d [k:Q] - 1 + 2/l for the earlier bound.
double eta_exponent(unsigned d, unsigned ell);
double fw_eta_exponent(unsigned d, unsigned k_degree, unsigned ell);

struct BoundComparison {
    std::string family;
    unsigned d = 2;
    unsigned ell = 3;
    double r = 1;
    std::uint64_t q_min = 0, q_max = 0;
    SlopeFit measured;     // slope of the window sums
    SlopeFit count_slope;  // slope of |S(Q)|
    double tolerance = 0.1;
    std::vector<ReferenceExponent> references;
    std::vector<std::optional<bool>> passes;  // measured <= reference + tolerance, per reference
    double predicted = 0;                     // main exponent with the measured s
};

/// ValidationError for fewer than 3 windows with positive counts.
BoundComparison compare_bounds(const MomentSeries& series, double tolerance = 0.1);

// ---------------------------------------------------------------- dihedral

struct DihedralEstimate {
    std::uint64_t p = 3;
    std::optional<std::uint64_t> Q;
    std::optional<long double> proxy;  // sum (|Cl_K[3]| - 1)/2 over |D| <= Q (p = 3 only)
    double corollary = 0;              // 3/(p-1) - 2/((p+1)(p-1))
    double corollary_2p = 0;           // 3/(2p) - 1/(p(p+1))
    double fw = 0;                     // 3/(p-1) - 2/((p+2)(p-1))
    double fw_2p = 0;                  // 3/(2p) - 1/(p(p+2))
    double cohen_thorne = 0;           // 3/(p-1) - 1/(p(p-1))
    double kluners_2p = 0;             // 3/(2p)
};

/// ValidationError unless p is an odd prime. The proxy is computed only for p = 3 and a given Q.
DihedralEstimate dihedral_estimate(std::uint64_t p, std::optional<std::uint64_t> Q = std::nullopt,
                                   unsigned workers = 1);
/// Proxy from precomputed structures (|D| <= Q).
long double dihedral_proxy(const std::vector<ClassGroupStructure>& fields, std::uint64_t Q);

} // namespace qtorsion::moments
