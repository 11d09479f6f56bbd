#pragma once

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "oracles.hpp"
#include "qtorsion/units_lattice.hpp"

namespace oracle {

using qtorsion::field::Rational;
using qtorsion::units::Lattice;

using IntRows = std::vector<std::vector<std::int64_t>>;

inline Lattice exact(const IntRows& rows) {
    std::vector<std::vector<Rational>> r;
    for (const auto& row : rows) {
        r.emplace_back();
        for (auto x : row) r.back().push_back(Rational(x));
    }
    return Lattice::exact(r);
}

inline IntRows integer_rows(const Lattice& L) {
    IntRows out;
    for (const auto& row : L.exact_basis()) {
        out.emplace_back();
        for (const auto& x : row) {
            if (denominator(x) != 1) throw std::logic_error("non-integral basis entry");
            out.back().push_back(numerator(x).convert_to<std::int64_t>());
        }
    }
    return out;
}

inline std::int64_t norm2(const std::vector<std::int64_t>& v) {
    std::int64_t s = 0;
    for (auto x : v) s += x * x;
    return s;
}

// Exact Gram determinant (rank <= 4, small entries) by fraction-free elimination.
inline long double gram_det(const IntRows& B) {
    const std::size_t m = B.size();
    std::vector<std::vector<long double>> G(m, std::vector<long double>(m));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = 0; j < m; ++j) {
            long double s = 0;
            for (std::size_t k = 0; k < B[i].size(); ++k) s += (long double)B[i][k] * B[j][k];
            G[i][j] = s;
        }
    long double det = 1;
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t p = c;
        for (std::size_t r = c; r < m; ++r)
            if (std::fabs(G[r][c]) > std::fabs(G[p][c])) p = r;
        if (G[p][c] == 0) return 0;
        if (p != c) {
            std::swap(G[p], G[c]);
            det = -det;
        }
        det *= G[c][c];
        for (std::size_t r = c + 1; r < m; ++r) {
            const long double f = G[r][c] / G[c][c];
            for (std::size_t k = c; k < m; ++k) G[r][k] -= f * G[c][k];
        }
    }
    return det;
}

// Coefficient box containing every vector of squared norm <= r2 in basis B:
// |a_j| <= sqrt(r2) * |d_j| with d_j the dual basis.
inline std::vector<std::int64_t> coefficient_box(const IntRows& B, std::int64_t r2) {
    const std::size_t m = B.size();
    std::vector<std::vector<long double>> G(m, std::vector<long double>(2 * m));
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            long double s = 0;
            for (std::size_t k = 0; k < B[i].size(); ++k) s += (long double)B[i][k] * B[j][k];
            G[i][j] = s;
        }
        G[i][m + i] = 1;
    }
    for (std::size_t c = 0; c < m; ++c) {
        std::size_t p = c;
        for (std::size_t r = c; r < m; ++r)
            if (std::fabs(G[r][c]) > std::fabs(G[p][c])) p = r;
        std::swap(G[p], G[c]);
        const long double piv = G[c][c];
        for (auto& x : G[c]) x /= piv;
        for (std::size_t r = 0; r < m; ++r) {
            if (r == c) continue;
            const long double f = G[r][c];
            for (std::size_t k = 0; k < 2 * m; ++k) G[r][k] -= f * G[c][k];
        }
    }
    // |d_j|^2 = (G^-1)_jj
    std::vector<std::int64_t> box(m);
    for (std::size_t j = 0; j < m; ++j) box[j] = std::int64_t(std::sqrt((long double)r2 * G[j][m + j]) + 1e-9);
    return box;
}

inline std::vector<std::int64_t> combine(const IntRows& B, const std::vector<std::int64_t>& a) {
    std::vector<std::int64_t> v(B[0].size(), 0);
    for (std::size_t j = 0; j < B.size(); ++j)
        for (std::size_t k = 0; k < v.size(); ++k) v[k] += a[j] * B[j][k];
    return v;
}

inline std::int64_t gcd_tail(const std::vector<std::int64_t>& a, std::size_t from) {
    std::int64_t g = 0;
    for (std::size_t j = from; j < a.size(); ++j) g = std::gcd(g, a[j]);
    return g;
}

// Every b_i is no longer than any vector that extends b_1..b_{i-1} to a basis;
// b_1 attains the first minimum.
inline bool minkowski_by_enumeration(const IntRows& B) {
    const std::size_t m = B.size();
    std::int64_t longest = 0;
    for (const auto& b : B) longest = std::max(longest, norm2(b));
    bool ok = true;
    for_each_coefficients(coefficient_box(B, longest), [&](const std::vector<std::int64_t>& a) {
        const auto v = combine(B, a);
        const auto n = norm2(v);
        if (n == 0) return;
        for (std::size_t i = 0; i < m; ++i)
            if (gcd_tail(a, i) == 1 && n < norm2(B[i])) ok = false;
    });
    return ok;
}

} // namespace oracle
