#pragma once

// Brute-force reference implementations. Nothing here calls into the library,
// so agreement with it is an independent check.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <vector>

namespace oracle {

inline bool squarefree(std::int64_t n) {
    n = n < 0 ? -n : n;
    for (std::int64_t p = 2; p * p <= n; ++p)
        if (n % (p * p) == 0) return false;
    return true;
}

inline bool fundamental(std::int64_t D) {
    if (D == 0 || D == 1) return false;
    const std::int64_t m = ((D % 4) + 4) % 4;
    if (m == 1) return squarefree(D);
    if (m != 0) return false;
    const std::int64_t q = D / 4;
    const std::int64_t r = ((q % 4) + 4) % 4;
    return (r == 2 || r == 3) && squarefree(q);
}

inline bool is_prime(std::int64_t n) {
    if (n < 2) return false;
    for (std::int64_t p = 2; p * p <= n; ++p)
        if (n % p == 0) return false;
    return true;
}

// Legendre symbol by listing the squares mod p.
inline int legendre_search(std::int64_t D, std::int64_t p) {
    const std::int64_t a = ((D % p) + p) % p;
    if (a == 0) return 0;
    for (std::int64_t x = 1; x < p; ++x)
        if (x * x % p == a) return 1;
    return -1;
}

// Roots of the minimal polynomial of w = (r + sqrt D)/2, i.e. x^2 - r x - (D - r)/4, mod p.
inline int omega_root_count(std::int64_t D, std::int64_t p) {
    const std::int64_t r = ((D % 4) + 4) % 4;
    const std::int64_t n = (D - r) / 4;
    int roots = 0;
    for (std::int64_t x = 0; x < p; ++x) {
        const std::int64_t v = (((x * x - r * x - n) % p) + p) % p;
        if (v == 0) ++roots;
    }
    return roots;
}

struct Form {
    std::int64_t a, b, c;
    friend bool operator<(const Form& x, const Form& y) {
        return std::tie(x.a, x.b, x.c) < std::tie(y.a, y.b, y.c);
    }
    friend bool operator==(const Form& x, const Form& y) { return x.a == y.a && x.b == y.b && x.c == y.c; }
};

// Reduced positive definite forms of discriminant D < 0.
inline std::vector<Form> reduced_forms(std::int64_t D) {
    std::vector<Form> out;
    const std::int64_t N = -D;
    for (std::int64_t a = 1; 3 * a * a <= N; ++a)
        for (std::int64_t b = -a + 1; b <= a; ++b) {
            const std::int64_t num = b * b - D;
            if (num % (4 * a)) continue;
            const std::int64_t c = num / (4 * a);
            if (c < a) continue;
            if (c == a && b < 0) continue;
            out.push_back({a, b, c});
        }
    return out;
}

inline std::int64_t isqrt(std::int64_t n) {
    auto r = std::int64_t(std::sqrt(double(n)));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

// Reduced indefinite forms: 0 < b < sqrt D, sqrt D - b < 2|a| < sqrt D + b.
inline std::vector<Form> reduced_indefinite(std::int64_t D) {
    std::vector<Form> out;
    const std::int64_t s = isqrt(D);
    for (std::int64_t b = 1; b <= s; ++b) {
        if ((b - D) % 2) continue;
        const std::int64_t num = b * b - D;  // = 4ac < 0
        for (std::int64_t A = 1; 2 * A < s + b + 1; ++A) {
            // sqrt D - b < 2A < sqrt D + b, with sqrt D irrational
            const bool lower = (2 * A + b) * (2 * A + b) > D;
            const bool upper = 2 * A - b < 0 || (2 * A - b) * (2 * A - b) < D;
            if (!lower || !upper) continue;
            if (num % (4 * A)) continue;
            const std::int64_t c = num / (4 * A);
            out.push_back({A, b, c});
            out.push_back({-A, b, -c});
        }
    }
    return out;
}

// rho(a, b, c) = (c, b', a') with b' = -b mod 2|c| and sqrt D - 2|c| < b' < sqrt D.
inline Form rho(std::int64_t D, const Form& f) {
    const std::int64_t s = isqrt(D);
    const std::int64_t m = 2 * std::abs(f.c);
    std::int64_t b = ((-f.b % m) + m) % m;
    // largest b' = -b (mod m) with b' < sqrt D
    while (b + m <= s) b += m;
    while (b > s) b -= m;
    return {f.c, b, (b * b - D) / (4 * f.c)};
}

struct IndefiniteCensus {
    std::int64_t narrow = 0;  // number of rho cycles
    int unit_norm = 1;
};

inline IndefiniteCensus indefinite_census(std::int64_t D) {
    auto forms = reduced_indefinite(D);
    std::sort(forms.begin(), forms.end());
    std::set<Form> seen;
    IndefiniteCensus out;
    const std::int64_t s = isqrt(D);
    std::int64_t b0 = s;
    if ((b0 - D) % 2) --b0;
    const Form principal{1, b0, (b0 * b0 - D) / 4};
    for (const auto& f : forms) {
        if (seen.count(f)) continue;
        ++out.narrow;
        bool has_principal = false, has_minus = false;
        Form g = f;
        do {
            seen.insert(g);
            if (g.a == 1) has_principal = true;
            if (g.a == -1) has_minus = true;
            g = rho(D, g);
        } while (!(g == f));
        if (has_principal && has_minus) out.unit_norm = -1;
    }
    (void)principal;
    return out;
}

// Ordinary class number by brute force.
inline std::int64_t class_number(std::int64_t D) {
    if (D < 0) return std::int64_t(reduced_forms(D).size());
    const auto c = indefinite_census(D);
    return c.unit_norm == -1 ? c.narrow : c.narrow / 2;
}

// All lattice vectors sum a_j b_j (integer rows) with |a_j| <= box[j].
template <class F>
void for_each_coefficients(const std::vector<std::int64_t>& box, F&& f) {
    std::vector<std::int64_t> a(box.size());
    for (std::size_t j = 0; j < box.size(); ++j) a[j] = -box[j];
    for (;;) {
        f(a);
        std::size_t j = 0;
        while (j < box.size() && a[j] == box[j]) {
            a[j] = -box[j];
            ++j;
        }
        if (j == box.size()) return;
        ++a[j];
    }
}

} // namespace oracle
