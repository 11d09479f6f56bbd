#include "qtorsion/arith.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <mutex>

#include "qtorsion/errors.hpp"

namespace qtorsion {

std::string to_string(u128 v) {
    if (v == 0) return "0";
    std::string s;
    while (v > 0) {
        s.push_back(char('0' + int(v % 10)));
        v /= 10;
    }
    std::reverse(s.begin(), s.end());
    return s;
}

std::string to_string(i128 v) {
    if (v < 0) return "-" + to_string(u128(-(v + 1)) + 1);
    return to_string(u128(v));
}

namespace arith {

namespace {

constexpr std::uint32_t trial_division_bound = 1000000;

const std::vector<std::uint32_t>& trial_primes() {
    static const std::vector<std::uint32_t> primes = primes_up_to(trial_division_bound);
    return primes;
}

u128 addmod(u128 a, u128 b, u128 m) {
    // a, b < m <= 2^127 + 1, so a + b cannot wrap.
    u128 s = a + b;
    return s >= m ? s - m : s;
}

u128 submod(u128 a, u128 b, u128 m) { return a >= b ? a - b : a + (m - b); }

u128 half_mod(u128 a, u128 n) {
    // n odd; a < n.
    if (a & 1) return (a >> 1) + (n >> 1) + 1;
    return a >> 1;
}

bool miller_rabin(u128 n, u128 base) {
    u128 d = n - 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }
    u128 x = powmod(base % n, d, n);
    if (x == 1 || x == n - 1) return true;
    for (int r = 1; r < s; ++r) {
        x = mulmod(x, x, n);
        if (x == n - 1) return true;
        if (x == 1) return false;
    }
    return false;
}

u128 to_residue(i128 v, u128 n) {
    if (v >= 0) return u128(v) % n;
    u128 r = u128(-(v + 1)) % n;
    r = (r + 1) % n;
    return r == 0 ? 0 : n - r;
}

bool strong_lucas(u128 n) {
    if (is_perfect_square(n)) return false;
    i128 D = 5;
    for (;;) {
        int j = kronecker(D, n);
        if (j == -1) break;
        if (j == 0) {
            u128 absD = D < 0 ? u128(-D) : u128(D);
            if (absD % n != 0) return false;
        }
        D = D > 0 ? -(D + 2) : -(D - 2);
    }
    const i128 Q = (1 - D) / 4;
    const u128 Dm = to_residue(D, n);
    const u128 Qm = to_residue(Q, n);

    u128 d = n + 1;
    int s = 0;
    while ((d & 1) == 0) {
        d >>= 1;
        ++s;
    }

    u128 U = 1, V = 1, Qk = Qm; // k = 1, P = 1
    int top = 127;
    while (((d >> top) & 1) == 0) --top;
    for (int bit = top - 1; bit >= 0; --bit) {
        U = mulmod(U, V, n);
        V = submod(mulmod(V, V, n), addmod(Qk, Qk, n), n);
        Qk = mulmod(Qk, Qk, n);
        if ((d >> bit) & 1) {
            u128 U2 = half_mod(addmod(U, V, n), n);
            u128 V2 = half_mod(addmod(mulmod(Dm, U, n), V, n), n);
            U = U2;
            V = V2;
            Qk = mulmod(Qk, Qm, n);
        }
    }
    if (U == 0 || V == 0) return true;
    for (int r = 1; r < s; ++r) {
        V = submod(mulmod(V, V, n), addmod(Qk, Qk, n), n);
        Qk = mulmod(Qk, Qk, n);
        if (V == 0) return true;
    }
    return false;
}

u128 pollard_brent(u128 n) {
    if ((n & 1) == 0) return 2;
    for (u128 c = 1;; ++c) {
        u128 y = 2, x = 2, q = 1, g = 1, ys = 2;
        const u128 m = 128;
        u128 r = 1;
        auto f = [&](u128 v) { return addmod(mulmod(v, v, n), c, n); };
        do {
            x = y;
            for (u128 i = 0; i < r; ++i) y = f(y);
            u128 k = 0;
            do {
                ys = y;
                const u128 lim = std::min(m, r - k);
                for (u128 i = 0; i < lim; ++i) {
                    y = f(y);
                    q = mulmod(q, x > y ? x - y : y - x, n);
                }
                g = gcd(q, n);
                k += m;
            } while (k < r && g == 1);
            r <<= 1;
        } while (g == 1);
        if (g == n) {
            do {
                ys = f(ys);
                g = gcd(x > ys ? x - ys : ys - x, n);
            } while (g == 1);
        }
        if (g != n) return g;
    }
}

void split_large(u128 n, std::vector<u128>& out) {
    if (n == 1) return;
    if (is_prime(n)) {
        out.push_back(n);
        return;
    }
    u128 f = pollard_brent(n);
    split_large(f, out);
    split_large(n / f, out);
}

std::vector<char> squarefree_segment(std::uint64_t a, std::uint64_t b) {
    // flags[i] for n = a + i in [a, b]; a >= 1.
    std::vector<char> flags(b >= a ? b - a + 1 : 0, 1);
    if (flags.empty()) return flags;
    const auto primes = primes_up_to(isqrt(b));
    for (std::uint64_t p : primes) {
        const std::uint64_t sq = p * p;
        std::uint64_t start = ((a + sq - 1) / sq) * sq;
        for (std::uint64_t m = start; m <= b; m += sq) flags[m - a] = 0;
    }
    return flags;
}

} // namespace

u128 gcd(u128 a, u128 b) {
    while (b != 0) {
        u128 t = a % b;
        a = b;
        b = t;
    }
    return a;
}

u128 mulmod(u128 a, u128 b, u128 m) {
    a %= m;
    b %= m;
    if (m <= (u128(1) << 64)) return (a * b) % m;
    u128 result = 0;
    while (b > 0) {
        if (b & 1) result = addmod(result, a, m);
        a = addmod(a, a, m);
        b >>= 1;
    }
    return result;
}

u128 powmod(u128 base, u128 exp, u128 m) {
    u128 result = 1 % m;
    base %= m;
    while (exp > 0) {
        if (exp & 1) result = mulmod(result, base, m);
        base = mulmod(base, base, m);
        exp >>= 1;
    }
    return result;
}

std::uint64_t isqrt(u128 n) {
    if (n == 0) return 0;
    u128 r = u128(std::sqrt(static_cast<long double>(n)));
    if (r > 0xFFFFFFFFFFFFFFFFull) r = 0xFFFFFFFFFFFFFFFFull;
    while (r * r > n) --r;
    while ((r + 1) <= 0xFFFFFFFFFFFFFFFFull && (r + 1) * (r + 1) <= n) ++r;
    return std::uint64_t(r);
}

bool is_perfect_square(u128 n, std::uint64_t* root) {
    const std::uint64_t r = isqrt(n);
    if (root) *root = r;
    return u128(r) * r == n;
}

bool is_prime(u128 n) {
    if (n < 2) return false;
    static constexpr std::array<unsigned, 13> bases{2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41};
    for (unsigned p : bases) {
        if (n == p) return true;
        if (n % p == 0) return false;
    }
    if (n < 41 * 41) return true;
    for (unsigned b : bases)
        if (!miller_rabin(n, b)) return false;
    // The 13-base set is a proof below 3.3170e24 (Sorenson-Webster).
    static const u128 proven_limit = u128(3317044064679887ull) * u128(1000000000ull);
    if (n < proven_limit) return true;
    return strong_lucas(n);
}

Factorization factorize(u128 n) {
    if (n == 0 || n > factorize_limit)
        throw RangeError("factorize: argument must satisfy 1 <= n <= 2^127");
    Factorization out;
    for (std::uint32_t p : trial_primes()) {
        if (u128(p) * p > n) break;
        if (n % p != 0) continue;
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        out.push_back({p, e});
    }
    if (n > 1) {
        std::vector<u128> large;
        split_large(n, large);
        std::sort(large.begin(), large.end());
        for (u128 p : large) {
            if (!out.empty() && out.back().prime == p)
                ++out.back().exponent;
            else
                out.push_back({p, 1});
        }
    }
    return out;
}

int kronecker(i128 D, u128 n) {
    if (n == 0) return (D == 1 || D == -1) ? 1 : 0;
    int result = 1;
    if ((n & 1) == 0) {
        if ((D & 1) == 0) return 0;
        int v = 0;
        while ((n & 1) == 0) {
            n >>= 1;
            ++v;
        }
        const int r8 = int(((D % 8) + 8) % 8);
        if ((v & 1) && (r8 == 3 || r8 == 5)) result = -result;
    }
    if (n == 1) return result;
    // Jacobi symbol (a / n) with n odd.
    u128 a = to_residue(D, n);
    while (a != 0) {
        while ((a & 1) == 0) {
            a >>= 1;
            const unsigned r8 = unsigned(n % 8);
            if (r8 == 3 || r8 == 5) result = -result;
        }
        std::swap(a, n);
        if (a % 4 == 3 && n % 4 == 3) result = -result;
        a %= n;
    }
    return n == 1 ? result : 0;
}

std::uint64_t sqrt_mod(std::uint64_t a, std::uint64_t p) {
    a %= p;
    if (p == 2 || a == 0) return a;
    if (powmod(a, (p - 1) / 2, p) != 1) throw DomainError("sqrt_mod: not a quadratic residue");
    if (p % 4 == 3) return std::uint64_t(powmod(a, (p + 1) / 4, p));
    std::uint64_t q = p - 1;
    unsigned s = 0;
    while ((q & 1) == 0) {
        q >>= 1;
        ++s;
    }
    std::uint64_t z = 2;
    while (powmod(z, (p - 1) / 2, p) != p - 1) ++z;
    u128 c = powmod(z, q, p), x = powmod(a, (q + 1) / 2, p), t = powmod(a, q, p);
    unsigned m = s;
    while (t != 1) {
        unsigned i = 0;
        u128 tt = t;
        while (tt != 1) {
            tt = mulmod(tt, tt, p);
            ++i;
        }
        u128 b = c;
        for (unsigned j = 0; j + i + 1 < m; ++j) b = mulmod(b, b, p);
        x = mulmod(x, b, p);
        c = mulmod(b, b, p);
        t = mulmod(t, c, p);
        m = i;
    }
    return std::uint64_t(x);
}

bool is_squarefree(u128 n) {
    if (n == 0) return false;
    for (const auto& pe : factorize(n))
        if (pe.exponent > 1) return false;
    return true;
}

bool is_fundamental_discriminant(std::int64_t D) {
    if (D == 0 || D == 1) return false;
    const std::int64_t r = ((D % 4) + 4) % 4;
    const u128 absD = D < 0 ? u128(-(i128)D) : u128(D);
    if (r == 1) return is_squarefree(absD);
    if (r == 0) {
        const std::int64_t m = D / 4;
        const std::int64_t mr = ((m % 4) + 4) % 4;
        return (mr == 2 || mr == 3) && is_squarefree(absD / 4);
    }
    return false;
}

Discriminant::Discriminant(std::int64_t value) : value_(value), fundamental_(false) {
    const std::int64_t r = ((value % 4) + 4) % 4;
    if (value == 0 || (r != 0 && r != 1))
        throw ValidationError("discriminant must be nonzero and congruent to 0 or 1 mod 4: " +
                              std::to_string(value));
    fundamental_ = is_fundamental_discriminant(value);
}

Discriminant Discriminant::fundamental(std::int64_t value) {
    Discriminant d(value);
    if (!d.fundamental_)
        throw ValidationError("not a fundamental discriminant: " + std::to_string(value));
    return d;
}

SignFilter parse_sign_filter(const std::string& s) {
    if (s == "negative" || s == "neg" || s == "imaginary" || s == "-") return SignFilter::negative;
    if (s == "positive" || s == "pos" || s == "real" || s == "+") return SignFilter::positive;
    if (s == "both" || s == "all") return SignFilter::both;
    throw ValidationError("unknown sign filter: " + s);
}

const char* to_string(SignFilter s) {
    switch (s) {
    case SignFilter::negative: return "negative";
    case SignFilter::positive: return "positive";
    case SignFilter::both: return "both";
    }
    return "both";
}

std::vector<Discriminant> fundamental_discriminants(std::uint64_t lo, std::uint64_t hi,
                                                    SignFilter sign) {
    std::vector<Discriminant> out;
    if (hi <= lo) return out;
    const std::uint64_t a = lo + 1;
    if (hi > std::uint64_t(INT64_MAX))
        throw RangeError("fundamental_discriminants: window exceeds 63 bits");
    const auto sf = squarefree_segment(a, hi);
    const std::uint64_t qa = std::max<std::uint64_t>(1, a / 4);
    const std::uint64_t qb = hi / 4;
    const auto sf4 = qb >= qa ? squarefree_segment(qa, qb) : std::vector<char>{};
    auto quarter_ok = [&](std::uint64_t k) { return k >= qa && k <= qb && sf4[k - qa]; };

    const bool want_neg = sign != SignFilter::positive;
    const bool want_pos = sign != SignFilter::negative;
    for (std::uint64_t m = a; m <= hi; ++m) {
        const unsigned r = unsigned(m % 4);
        bool neg = false, pos = false;
        if (r == 3) {
            neg = sf[m - a];
        } else if (r == 1) {
            pos = m != 1 && sf[m - a];
        } else if (r == 0) {
            const std::uint64_t k = m / 4;
            if (quarter_ok(k)) {
                const unsigned kr = unsigned(k % 4);
                neg = kr == 1 || kr == 2;
                pos = kr == 2 || kr == 3;
            }
        }
        if (neg && want_neg) out.push_back(Discriminant::fundamental(-std::int64_t(m)));
        if (pos && want_pos) out.push_back(Discriminant::fundamental(std::int64_t(m)));
    }
    return out;
}

std::vector<std::uint32_t> primes_up_to(std::uint64_t limit) {
    std::vector<std::uint32_t> primes;
    if (limit < 2) return primes;
    const std::uint64_t root = isqrt(limit);
    std::vector<char> small(root + 1, 1);
    std::vector<std::uint32_t> base;
    for (std::uint64_t i = 2; i <= root; ++i) {
        if (!small[i]) continue;
        base.push_back(std::uint32_t(i));
        for (std::uint64_t j = i * i; j <= root; j += i) small[j] = 0;
    }
    constexpr std::uint64_t segment = 1u << 18;
    std::vector<char> block(segment);
    for (std::uint64_t lo = 2; lo <= limit; lo += segment) {
        const std::uint64_t hi = std::min(limit, lo + segment - 1);
        std::fill(block.begin(), block.begin() + (hi - lo + 1), 1);
        for (std::uint64_t p : base) {
            if (p * p > hi) break;
            std::uint64_t start = std::max(p * p, ((lo + p - 1) / p) * p);
            for (std::uint64_t j = start; j <= hi; j += p) block[j - lo] = 0;
        }
        for (std::uint64_t n = lo; n <= hi; ++n)
            if (block[n - lo]) primes.push_back(std::uint32_t(n));
    }
    return primes;
}

SmallestFactorTable::SmallestFactorTable(std::uint32_t limit) : limit_(limit), spf_(std::size_t(limit) + 1, 0) {
    std::vector<std::uint32_t> primes;
    for (std::uint32_t i = 2; i <= limit; ++i) {
        if (spf_[i] == 0) {
            spf_[i] = i;
            primes.push_back(i);
        }
        for (std::uint32_t p : primes) {
            const std::uint64_t m = std::uint64_t(p) * i;
            if (p > spf_[i] || m > limit) break;
            spf_[m] = p;
        }
    }
    if (limit >= 1) spf_[1] = 1;
}

void SmallestFactorTable::divisors(std::uint32_t n, std::vector<std::uint32_t>& out) const {
    out.clear();
    out.push_back(1);
    while (n > 1) {
        const std::uint32_t p = spf_[n];
        unsigned e = 0;
        while (n % p == 0) {
            n /= p;
            ++e;
        }
        const std::size_t base = out.size();
        std::uint32_t pk = 1;
        for (unsigned k = 1; k <= e; ++k) {
            pk *= p;
            for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * pk);
        }
    }
}

std::shared_ptr<const SmallestFactorTable> smallest_factor_table(std::uint32_t limit) {
    static std::mutex mutex;
    static std::shared_ptr<const SmallestFactorTable> cached;
    std::lock_guard<std::mutex> lock(mutex);
    if (cached && cached->limit() >= limit) return cached;
    std::uint64_t target = std::max<std::uint64_t>(limit, 1u << 16);
    if (cached) target = std::max<std::uint64_t>(target, std::uint64_t(cached->limit()) * 2);
    target = std::min<std::uint64_t>(target, 0xFFFFFFF0u);
    target = std::max<std::uint64_t>(target, limit);
    cached = std::make_shared<const SmallestFactorTable>(std::uint32_t(target));
    return cached;
}

} // namespace arith
} // namespace qtorsion
