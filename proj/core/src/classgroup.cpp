#include "qtorsion/classgroup.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "qtorsion/errors.hpp"
#include "qtorsion/field.hpp"
#include "detail/int128.hpp"

namespace qtorsion::classgroup {

using arith::Discriminant;
using detail::gcd128;

QuadForm reduce_form(const Discriminant& D, const QuadForm& f) {
    return forms::reduce(forms::FormContext(D), f);
}

QuadForm compose(const Discriminant& D, const QuadForm& f, const QuadForm& g) {
    return forms::compose(forms::FormContext(D), f, g);
}

unsigned roots_of_unity(const Discriminant& D) {
    if (D.value() == -3) return 6;
    if (D.value() == -4) return 4;
    return 2;
}

namespace {

const std::vector<std::uint32_t>& small_primes() {
    static const std::vector<std::uint32_t> primes = arith::primes_up_to(1u << 20);
    return primes;
}

// Divisors of n, using the shared sieve when n is small enough.
class DivisorSource {
public:
    explicit DivisorSource(std::uint64_t max_n) {
        if (max_n <= (1u << 25)) table_ = arith::smallest_factor_table(std::uint32_t(max_n));
    }

    void divisors(std::uint64_t n, std::vector<std::uint64_t>& out) {
        out.clear();
        if (table_) {
            table_->divisors(std::uint32_t(n), small_);
            out.assign(small_.begin(), small_.end());
            return;
        }
        out.push_back(1);
        for (const auto& pp : arith::factorize(n)) {
            const std::size_t base = out.size();
            std::uint64_t q = 1;
            for (unsigned e = 0; e < pp.exponent; ++e) {
                q *= std::uint64_t(pp.prime);
                for (std::size_t i = 0; i < base; ++i) out.push_back(out[i] * q);
            }
        }
    }

private:
    std::shared_ptr<const arith::SmallestFactorTable> table_;
    std::vector<std::uint32_t> small_;
};

} // namespace

ClassGroup::ClassGroup(const Discriminant& D, const ClassGroupOptions& opt) : D_(D), ctx_(D), opt_(opt) {
    if (!D.is_fundamental()) throw ValidationError("class group requires a fundamental discriminant");
    if (D.is_imaginary())
        enumerate_imaginary();
    else
        enumerate_real();
    compute_structure();
}

void ClassGroup::enumerate_imaginary() {
    const std::int64_t d = D_.value();
    const std::uint64_t ad = D_.absolute();
    const std::int64_t bmax = std::int64_t(arith::isqrt(ad / 3));
    DivisorSource src(ad / 3 + 1);
    std::vector<std::uint64_t> divs;
    for (std::int64_t b = (d & 1) ? 1 : 0; b <= bmax; b += 2) {
        const std::uint64_t n = std::uint64_t((b * b - d) / 4);
        src.divisors(n, divs);
        for (std::uint64_t au : divs) {
            const auto a = std::int64_t(au);
            const std::int64_t c = std::int64_t(n / au);
            if (a < b || a > c) continue;
            keys_.emplace_back(a, b);
            if (b > 0 && b < a && a < c) keys_.emplace_back(a, -b);
        }
    }
    std::sort(keys_.begin(), keys_.end());
    key_class_.resize(keys_.size());
    std::iota(key_class_.begin(), key_class_.end(), 0u);
    reps_.reserve(keys_.size());
    for (const auto& [a, b] : keys_) reps_.push_back(forms::make_form(ctx_, a, b));
}

void ClassGroup::enumerate_real() {
    const std::int64_t d = D_.value();
    const std::int64_t s = ctx_.root;
    DivisorSource src(std::uint64_t(d / 4 + 1));
    std::vector<std::uint64_t> divs;
    for (std::int64_t b = s; b >= 1; --b) {
        if (((b - d) & 1) != 0) continue;
        const std::uint64_t n = std::uint64_t((d - b * b) / 4);
        src.divisors(n, divs);
        for (std::uint64_t au : divs) {
            const auto a = std::int64_t(au);
            if (2 * a > s - b && 2 * a <= s + b) keys_.emplace_back(a, b);
        }
    }
    std::sort(keys_.begin(), keys_.end());
    constexpr std::uint32_t unset = ~0u;
    key_class_.assign(keys_.size(), unset);
    for (std::size_t i = 0; i < keys_.size(); ++i) {
        if (key_class_[i] != unset) continue;
        const auto cls = std::uint32_t(reps_.size());
        reps_.push_back(forms::make_form(ctx_, keys_[i].first, keys_[i].second));
        std::size_t j = i;
        do {
            key_class_[j] = cls;
            // rho on the ideal [a, (b + sqrt D)/2]: next a = (D - b^2)/(4a)
            const auto [a, b] = keys_[j];
            const QuadForm f{a, b, (b * b - d) / (4 * a)};
            const QuadForm g = forms::rho(ctx_, f);
            const auto it = std::lower_bound(keys_.begin(), keys_.end(), std::pair{g.a < 0 ? -g.a : g.a, g.b});
            if (it == keys_.end() || it->first != (g.a < 0 ? -g.a : g.a) || it->second != g.b)
                throw std::logic_error("reduced ideal cycle left the enumerated set");
            j = std::size_t(it - keys_.begin());
        } while (j != i);
    }
    cycle_ = forms::principal_cycle_summary(ctx_);
}

std::size_t ClassGroup::lookup(std::int64_t a, std::int64_t b) const {
    const std::pair key{a < 0 ? -a : a, b};
    const auto it = std::lower_bound(keys_.begin(), keys_.end(), key);
    if (it == keys_.end() || *it != key) throw std::logic_error("reduced form missing from class table");
    return key_class_[std::size_t(it - keys_.begin())];
}

std::size_t ClassGroup::class_of(const QuadForm& f) const {
    QuadForm g = f;
    if (D_.is_imaginary() && g.a < 0) {
        // the ideal attached to (a, b, c) is [|a|, (b + sqrt D)/2]
        g = {-g.a, g.b, -g.c};
    }
    const QuadForm r = forms::reduce(ctx_, g);
    return lookup(r.a, r.b);
}

std::size_t ClassGroup::class_of(const field::Ideal& I) const {
    if (!(I.discriminant() == D_)) throw ValidationError("ideal from a different field");
    return class_of(I.form());
}

std::size_t ClassGroup::multiply(std::size_t x, std::size_t y) const {
    if (x == 0) return y;
    if (y == 0) return x;
    const QuadForm r = forms::compose(ctx_, reps_.at(x), reps_.at(y));
    return lookup(r.a, r.b);
}

std::size_t ClassGroup::inverse(std::size_t x) const {
    if (x == 0) return 0;
    const QuadForm& f = reps_.at(x);
    return class_of(QuadForm{f.a, -f.b, f.c});
}

std::size_t ClassGroup::power(std::size_t x, std::int64_t k) const {
    std::size_t base = k < 0 ? inverse(x) : x;
    std::uint64_t e = k < 0 ? std::uint64_t(-(k + 1)) + 1 : std::uint64_t(k);
    std::size_t result = 0;
    while (e > 0) {
        if (e & 1) result = multiply(result, base);
        e >>= 1;
        if (e) base = multiply(base, base);
    }
    return result;
}

std::size_t ClassGroup::element_order(std::size_t x) const {
    std::size_t k = 1;
    for (std::size_t y = x; y != 0; y = multiply(y, x)) ++k;
    return k;
}

void ClassGroup::compute_structure() {
    const std::size_t h = reps_.size();
    structure_.discriminant = D_;
    structure_.order = h;
    if (D_.is_real()) {
        structure_.unit_norm = cycle_.unit_norm;
        structure_.regulator = cycle_.regulator;
        structure_.narrow_order = cycle_.unit_norm == -1 ? h : 2 * h;
    } else {
        structure_.narrow_order = h;
    }
    if (h == 1) return;

    // Expand a subgroup H one generator at a time, recording the relation that
    // closes each generator's coset chain.
    constexpr std::size_t stride = 64;
    std::vector<char> in_h(h, 0);
    std::vector<std::uint32_t> elems{0};
    std::vector<std::int32_t> coords(h * stride, 0);
    in_h[0] = 1;
    std::vector<std::vector<std::int64_t>> rows;

    auto add_generator = [&](std::size_t g) {
        if (in_h[g]) return;
        const std::size_t k = rows.size();
        std::int64_t e = 1;
        std::size_t x = g;
        while (!in_h[x]) {
            x = multiply(x, g);
            ++e;
        }
        std::vector<std::int64_t> row(k + 1, 0);
        for (std::size_t j = 0; j < k; ++j) row[j] = -coords[x * stride + j];
        row[k] = e;
        for (auto& r : rows) r.push_back(0);
        rows.push_back(std::move(row));

        const std::vector<std::uint32_t> base = elems;
        std::vector<std::uint32_t> layer = base;
        for (std::int64_t m = 1; m < e; ++m) {
            for (auto& y : layer) {
                const std::size_t prev = y;
                const std::size_t z = multiply(prev, g);
                std::copy_n(&coords[prev * stride], stride, &coords[z * stride]);
                coords[z * stride + k] = std::int32_t(m);
                in_h[z] = 1;
                elems.push_back(std::uint32_t(z));
                y = std::uint32_t(z);
            }
        }
    };

    const std::int64_t d = D_.value();
    const double lg = std::log(double(D_.absolute()));
    const double bound = std::max(2.0, opt_.generator_bound_factor * lg * lg);
    for (std::uint32_t p : small_primes()) {
        if (elems.size() == h || double(p) >= bound) break;
        if (arith::kronecker(d, p) == -1) continue;
        const std::int64_t b = forms::prime_form_b(d, p);
        add_generator(class_of(forms::make_form(ctx_, std::int64_t(p), b)));
        if (rows.size() >= stride) throw std::logic_error("too many class group generators");
    }
    for (std::size_t g = 1; g < h && elems.size() < h; ++g) add_generator(g);
    if (elems.size() != h) throw std::logic_error("class group generation did not close");
    structure_.elementary_divisors = smith_divisors(std::move(rows));
}

ClassGroupStructure class_group(const Discriminant& D, const ClassGroupOptions& opt) {
    if (!D.is_fundamental()) throw ValidationError("class group requires a fundamental discriminant");
    return ClassGroup(D, opt).structure();
}

std::uint64_t torsion_count(const std::vector<std::uint64_t>& divisors, std::uint64_t ell) {
    if (ell < 2) throw ValidationError("torsion_count requires ell >= 2");
    std::uint64_t out = 1;
    for (std::uint64_t d : divisors) out *= std::gcd(ell, d);
    return out;
}

std::uint64_t torsion_count(const ClassGroupStructure& S, std::uint64_t ell) {
    return torsion_count(S.elementary_divisors, ell);
}

std::vector<std::uint64_t> smith_divisors(std::vector<std::vector<std::int64_t>> M64) {
    const std::size_t n = M64.size();
    std::vector<std::vector<i128>> M(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (M64[i].size() != n) throw ValidationError("smith_divisors expects a square matrix");
        M[i].assign(M64[i].begin(), M64[i].end());
    }
    auto abs_ = [](i128 v) { return v < 0 ? -v : v; };
    std::vector<i128> diag;
    for (std::size_t t = 0; t < n; ++t) {
        for (;;) {
            std::size_t pi = n, pj = n;
            for (std::size_t i = t; i < n; ++i)
                for (std::size_t j = t; j < n; ++j)
                    if (M[i][j] != 0 && (pi == n || abs_(M[i][j]) < abs_(M[pi][pj]))) pi = i, pj = j;
            if (pi == n) throw ValidationError("smith_divisors: matrix is singular");
            std::swap(M[t], M[pi]);
            for (auto& row : M) std::swap(row[t], row[pj]);
            const i128 p = M[t][t];
            bool clean = true;
            for (std::size_t i = t + 1; i < n; ++i) {
                const i128 q = M[i][t] / p;
                if (q != 0)
                    for (std::size_t j = t; j < n; ++j) M[i][j] -= q * M[t][j];
                if (M[i][t] != 0) clean = false;
            }
            for (std::size_t j = t + 1; j < n; ++j) {
                const i128 q = M[t][j] / p;
                if (q != 0)
                    for (std::size_t i = t; i < n; ++i) M[i][j] -= q * M[i][t];
                if (M[t][j] != 0) clean = false;
            }
            if (!clean) continue;
            std::size_t bad = n;
            for (std::size_t i = t + 1; i < n && bad == n; ++i)
                for (std::size_t j = t + 1; j < n; ++j)
                    if (M[i][j] % p != 0) {
                        bad = i;
                        break;
                    }
            if (bad == n) break;
            for (std::size_t j = t; j < n; ++j) M[t][j] += M[bad][j];
        }
        diag.push_back(abs_(M[t][t]));
    }
    std::vector<std::uint64_t> out;
    for (i128 v : diag)
        if (v > 1) out.push_back(std::uint64_t(v));
    std::sort(out.begin(), out.end());
    return out;
}

AnalyticEstimate analytic_check(const Discriminant& D, double precision, std::uint64_t max_terms) {
    if (!D.is_fundamental()) throw ValidationError("analytic_check requires a fundamental discriminant");
    if (!(precision > 0)) throw ValidationError("precision must be positive");
    const std::int64_t d = D.value();
    const long double ad = static_cast<long double>(D.absolute());
    const long double pi = 3.14159265358979323846264338327950288L;
    const long double a = std::sqrt(pi / ad);
    const long double sq = std::sqrt(ad);
    long double scale = 1;  // divides the sum to produce h
    long double sum = 0, comp = 0;
    if (D.is_real()) scale = forms::principal_cycle_summary(forms::FormContext(D)).regulator;
    const long double w2 = D.is_imaginary() ? roots_of_unity(D) / 2.0L : 0.5L;

    auto tail_after = [&](std::uint64_t n) {
        // sum_{m > n} of a majorant of |term(m)|, times the leading factor
        const long double m = static_cast<long double>(n + 1);
        const long double q = std::exp(-a * a * (2 * m + 1));
        long double b;
        if (D.is_imaginary())
            b = 2 * std::exp(-a * a * m * m) / (std::sqrt(pi) * a * m);
        else
            b = 2 * (ad / pi) * std::exp(-a * a * m * m) / (m * m);
        return w2 * b / (1 - q);
    };

    std::uint64_t n = 0;
    long double tail = 0;
    for (;;) {
        ++n;
        const int chi = arith::kronecker(d, n);
        if (chi != 0) {
            const long double x = static_cast<long double>(n);
            long double term;
            if (D.is_imaginary())
                term = std::erfc(a * x) + sq / (pi * x) * std::exp(-a * a * x * x);
            else
                term = (sq / x) * std::erfc(a * x) - std::expint(-a * a * x * x);
            // Kahan summation
            const long double y = chi * w2 * term - comp;
            const long double t = sum + y;
            comp = (t - sum) - y;
            sum = t;
        }
        tail = tail_after(n);
        if (tail / scale < precision) break;
        if (n >= max_terms) {
            throw ConvergenceError("analytic class number series did not reach the requested precision",
                                   double(sum / scale), double(tail / scale));
        }
    }
    AnalyticEstimate out;
    out.value = double(sum / scale);
    out.error_bound = double(tail / scale + 1e-15L * n * std::fabs(sum / scale));
    out.terms = n;
    return out;
}

} // namespace qtorsion::classgroup
