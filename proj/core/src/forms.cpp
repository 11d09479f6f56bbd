#include "qtorsion/forms.hpp"

#include <cmath>

#include "qtorsion/errors.hpp"
#include "detail/int128.hpp"

namespace qtorsion::forms {

using detail::floor_mod;
using detail::narrow64;
using detail::xgcd;

std::string to_string(const QuadForm& f) {
    return "(" + std::to_string(f.a) + "," + std::to_string(f.b) + "," + std::to_string(f.c) + ")";
}

FormContext::FormContext(const arith::Discriminant& d) : FormContext(d.value()) {}

FormContext::FormContext(std::int64_t d) : D(d), root(std::int64_t(arith::isqrt(u128(d < 0 ? -i128(d) : i128(d))))) {}

namespace {

QuadForm from_wide(i128 a, i128 b, i128 c) { return {narrow64(a), narrow64(b), narrow64(c)}; }

i128 abs128(i128 v) { return v < 0 ? -v : v; }

// b mod 2|a| into (-|a|, |a|].
i128 centered(i128 b, i128 a) {
    const i128 m = 2 * abs128(a);
    i128 r = floor_mod(b, m);
    if (r > abs128(a)) r -= m;
    return r;
}

i128 rho_b(const FormContext& ctx, i128 b, i128 c) {
    const i128 ac = abs128(c);
    const i128 m = 2 * ac;
    if (ac <= ctx.root) {
        // unique b' = b mod m in (root - m, root]
        const i128 r = floor_mod(i128(ctx.root) - b, m);
        return i128(ctx.root) - r;
    }
    return centered(b, c);
}

i128 c_of(const FormContext& ctx, i128 a, i128 b) {
    const i128 num = b * b - ctx.D;
    const i128 den = 4 * a;
    if (num % den != 0) throw ValidationError("form coefficients inconsistent with discriminant");
    return num / den;
}

bool reduced_indefinite(const FormContext& ctx, i128 a, i128 b) {
    const i128 s = ctx.root;
    const i128 aa = 2 * abs128(a);
    return b > 0 && b <= s && aa > s - b && aa <= s + b;
}

void check_disc(const FormContext& ctx, const QuadForm& f) {
    if (f.discriminant() != i128(ctx.D))
        throw ValidationError("form " + to_string(f) + " does not have discriminant " +
                              std::to_string(ctx.D));
    if (f.a == 0) throw ValidationError("form with a = 0");
    if (ctx.D < 0 && f.a < 0) throw ValidationError("definite form must have a > 0");
}

QuadForm reduce_definite(const FormContext& ctx, i128 a, i128 b, i128 c) {
    // D < 0, a > 0.
    if (!(-a < b && b <= a)) {
        b = centered(b, a);
        c = c_of(ctx, a, b);
    }
    while (a > c) {
        const i128 na = c;
        i128 nb = -b;
        nb = centered(nb, na);
        const i128 nc = c_of(ctx, na, nb);
        a = na;
        b = nb;
        c = nc;
    }
    if ((a == c || b == a) && b < 0) b = -b;
    if (b == -a) b = a;
    return from_wide(a, b, c);
}

QuadForm reduce_indefinite(const FormContext& ctx, i128 a, i128 b, i128 c) {
    for (int guard = 0;; ++guard) {
        if (reduced_indefinite(ctx, a, b)) return from_wide(a, b, c);
        const i128 na = c;
        const i128 nb = rho_b(ctx, -b, na);
        const i128 nc = c_of(ctx, na, nb);
        a = na;
        b = nb;
        c = nc;
        if (guard > 100000) throw ConvergenceError("indefinite reduction did not terminate", 0, 0);
    }
}

} // namespace

QuadForm make_form(const FormContext& ctx, std::int64_t a, std::int64_t b) {
    if (a == 0) throw ValidationError("form with a = 0");
    return from_wide(a, b, c_of(ctx, a, b));
}

QuadForm principal_form(const FormContext& ctx) {
    const int r = int(((ctx.D % 4) + 4) % 4);
    if (ctx.D < 0) return make_form(ctx, 1, r);
    // Reduced principal form: largest b <= root with b = D mod 2 and b > root - 2.
    std::int64_t b = ctx.root;
    if (((b - r) % 2) != 0) --b;
    return make_form(ctx, 1, b);
}

bool is_reduced(const FormContext& ctx, const QuadForm& f) {
    if (ctx.D < 0) {
        const std::int64_t ab = f.b < 0 ? -f.b : f.b;
        if (!(ab <= f.a && f.a <= f.c)) return false;
        if ((ab == f.a || f.a == f.c) && f.b < 0) return false;
        return true;
    }
    return reduced_indefinite(ctx, f.a, f.b);
}

QuadForm rho(const FormContext& ctx, const QuadForm& f) {
    const i128 na = f.c;
    const i128 nb = rho_b(ctx, -i128(f.b), na);
    return from_wide(na, nb, c_of(ctx, na, nb));
}

QuadForm reduce(const FormContext& ctx, const QuadForm& f) {
    check_disc(ctx, f);
    if (ctx.D < 0) return reduce_definite(ctx, f.a, f.b, f.c);
    return reduce_indefinite(ctx, f.a, f.b, f.c);
}

QuadForm normalize(const FormContext& ctx, const QuadForm& f) {
    const i128 b = centered(f.b, f.a);
    return from_wide(f.a, b, c_of(ctx, f.a, b));
}

QuadForm compose_raw(const FormContext& ctx, const QuadForm& f, const QuadForm& g,
                     std::int64_t* content) {
    const i128 a1 = f.a, b1 = f.b, a2 = g.a, b2 = g.b;
    if (((b1 + b2) & 1) != 0) throw ValidationError("composition of forms with different discriminants");
    const i128 s = (b1 + b2) / 2;
    i128 u1, v1, x, w;
    const i128 g1 = xgcd(a1, a2, u1, v1);
    const i128 gg = xgcd(g1, s, x, w);
    const i128 u = x * u1, v = x * v1;
    const i128 A = (a1 / gg) * (a2 / gg);
    const i128 m = 2 * abs128(A);
    // B = (u a1 b2 + v a2 b1 + w (b1 b2 + D)/2) / g, reduced mod 2|A| piecewise.
    const i128 t1 = floor_mod(floor_mod(u, m) * floor_mod((a1 / gg) * b2, m), m);
    const i128 t2 = floor_mod(floor_mod(v, m) * floor_mod((a2 / gg) * b1, m), m);
    const i128 h = (b1 * b2 + ctx.D) / 2;
    if (h % gg != 0) throw ValidationError("composition of forms with different discriminants");
    const i128 t3 = floor_mod(floor_mod(w, m) * floor_mod(h / gg, m), m);
    i128 B = floor_mod(t1 + t2 + t3, m);
    B = centered(B, A);
    if (content) *content = narrow64(gg);
    return from_wide(A, B, c_of(ctx, A, B));
}

QuadForm compose(const FormContext& ctx, const QuadForm& f, const QuadForm& g) {
    if (f.discriminant() != i128(ctx.D) || g.discriminant() != i128(ctx.D))
        throw ValidationError("compose: discriminant mismatch");
    const QuadForm raw = compose_raw(ctx, f, g);
    if (ctx.D < 0) return reduce_definite(ctx, raw.a, raw.b, raw.c);
    return reduce_indefinite(ctx, raw.a, raw.b, raw.c);
}

QuadForm power(const FormContext& ctx, const QuadForm& f, std::int64_t k) {
    QuadForm base = k < 0 ? inverse(f) : f;
    std::uint64_t e = k < 0 ? std::uint64_t(-(k + 1)) + 1 : std::uint64_t(k);
    QuadForm result = principal_form(ctx);
    while (e > 0) {
        if (e & 1) result = compose(ctx, result, base);
        e >>= 1;
        if (e) base = compose(ctx, base, base);
    }
    return result;
}

std::int64_t prime_form_b(std::int64_t D, std::uint64_t p) {
    if (arith::kronecker(D, p) == -1) throw DomainError("prime " + std::to_string(p) + " is inert");
    if (p == 2) {
        const i128 r = floor_mod(D, 16);
        if (r % 2 == 1) return 1;
        // D = 4m: b = 0 if m even, b = 2 if m odd
        return ((D / 4) % 2 == 0) ? 0 : 2;
    }
    const std::uint64_t dm = std::uint64_t(floor_mod(D, i128(p)));
    std::int64_t b = std::int64_t(arith::sqrt_mod(dm, p));
    if (((b - D) % 2) != 0) b = std::int64_t(p) - b;
    return b;
}

CycleSummary principal_cycle_summary(const FormContext& ctx) {
    if (ctx.D <= 0) throw DomainError("principal cycle is defined for real fields only");
    const QuadForm start = principal_form(ctx);
    const long double sq = std::sqrt(static_cast<long double>(ctx.D));
    CycleSummary out;
    long double sum = 0;
    QuadForm f = start;
    for (;;) {
        const i128 a = f.a < 0 ? -i128(f.a) : i128(f.a);
        const i128 b = f.b;
        // log((sqrt D - b)/(2a)) with 0 < b < sqrt D
        sum += std::log(static_cast<long double>(i128(ctx.D) - b * b)) - std::log(static_cast<long double>(b) + sq) -
               std::log(2.0L * static_cast<long double>(a));
        f = rho(ctx, f);
        ++out.period;
        if ((f.a == 1 || f.a == -1) && f.b == start.b) break;
    }
    out.regulator = std::fabs(sum);
    out.unit_norm = (out.period % 2 == 0) ? 1 : -1;
    return out;
}

} // namespace qtorsion::forms
