#include "qtorsion/heights.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <set>

#include "qtorsion/errors.hpp"
#include "qtorsion/forms.hpp"
#include "detail/int128.hpp"
#include "detail/parallel.hpp"

namespace qtorsion::heights {

using arith::Discriminant;
using boost::multiprecision::denominator;
using boost::multiprecision::numerator;

namespace {

constexpr long double boundary_margin = 1e-9L;

i128 to_i128(const Integer& v) {
    static const Integer lim = Integer(1) << 126;
    if (v >= lim || v <= -lim) throw RangeError("integer exceeds the 128-bit range");
    const bool neg = v < 0;
    const Integer m = neg ? Integer(-v) : v;
    const auto lo = static_cast<std::uint64_t>(m & Integer(0xFFFFFFFFFFFFFFFFull));
    const auto hi = static_cast<std::uint64_t>(m >> 64);
    const i128 r = (i128(hi) << 64) | i128(lo);
    return neg ? -r : r;
}

Integer from_i128(i128 v) {
    const bool neg = v < 0;
    const u128 m = neg ? u128(-(v + 1)) + 1 : u128(v);
    Integer r = Integer(std::uint64_t(m >> 64));
    r <<= 64;
    r += Integer(std::uint64_t(m));
    return neg ? Integer(-r) : r;
}

Integer ipow(const Integer& b, unsigned e) {
    Integer r = 1;
    for (unsigned i = 0; i < e; ++i) r *= b;
    return r;
}

long double log_of(const Rational& q) {
    return field::log_abs(numerator(q)) - field::log_abs(denominator(q));
}

// |alpha_i| > 1 for the real embedding i (exact).
bool abs_exceeds_one(const FieldElement& a, int i) {
    const Integer y = i == 0 ? a.y() : Integer(-a.y());
    const std::int64_t D = a.discriminant().value();
    return field::sign_quadratic(a.x() - a.z(), y, D) > 0 || field::sign_quadratic(a.x() + a.z(), y, D) < 0;
}

// |alpha_i| <= X for the real embedding i, X = P/Q > 0 (exact).
bool abs_at_most(const FieldElement& a, int i, const Rational& X) {
    const Integer y = i == 0 ? a.y() : Integer(-a.y());
    const std::int64_t D = a.discriminant().value();
    const Integer P = numerator(X), Q = denominator(X);
    // -P z <= Q (x + y sqrt D) <= P z
    return field::sign_quadratic(P * a.z() - Q * a.x(), -Q * y, D) >= 0 &&
           field::sign_quadratic(P * a.z() + Q * a.x(), Q * y, D) >= 0;
}

// Largest p with p^ell <= Z.
std::uint64_t root_floor(const Rational& Z, unsigned ell) {
    if (Z < 1) return 0;
    auto p = static_cast<std::uint64_t>(std::floor(std::pow(Z.convert_to<long double>(), 1.0L / ell)));
    while (p > 0 && Rational(ipow(Integer(p), ell)) > Z) --p;
    while (Rational(ipow(Integer(p + 1), ell)) <= Z) ++p;
    return p;
}

} // namespace

Rational exact_bound(double Z) {
    if (!std::isfinite(Z)) throw ValidationError("bound must be finite");
    int e = 0;
    const double m = std::frexp(Z, &e);
    const auto mant = static_cast<std::int64_t>(std::ldexp(m, 53));
    e -= 53;
    Rational r(mant);
    if (e > 0) r *= Rational(Integer(1) << e);
    if (e < 0) r /= Rational(Integer(1) << (-e));
    return r;
}

namespace {

// (gamma) + (s) for alpha = gamma / s with s the least denominator.
Ideal numerator_gcd(const FieldElement& alpha, const Integer& s) {
    const Discriminant& D = alpha.discriminant();
    const FieldElement gamma = alpha * FieldElement(D, s, 0, 1);
    const i128 S = to_i128(s);
    const i128 u = detail::floor_mod(to_i128(numerator(gamma.omega_u()) % s), S);
    const i128 v = detail::floor_mod(to_i128(numerator(gamma.omega_v()) % s), S);
    // gamma * w = v n + (u + v r) w, w^2 = r w + n
    const i128 n = (i128(D.value()) - D.residue()) / 4;
    const i128 gu = detail::floor_mod(detail::mul_checked(v, detail::floor_mod(n, S)), S);
    const i128 gv = detail::floor_mod(u + detail::mul_checked(v, D.residue()), S);
    return Ideal::from_generators(D, {{S, 0}, {0, S}, {u, v}, {gu, gv}});
}

// Denominator ideal of alpha.
Ideal denominator_ideal(const FieldElement& alpha) {
    const Integer s = alpha.denominator();
    const Discriminant& D = alpha.discriminant();
    if (s == 1) return Ideal::unit(D);
    return Ideal::rational(D, to_i128(s)).divide(numerator_gcd(alpha, s));
}

} // namespace

Integer denominator_norm(const FieldElement& alpha) {
    const Integer s = alpha.denominator();
    if (s == 1) return 1;
    return (s * s) / from_i128(numerator_gcd(alpha, s).norm());
}

Height weil_height(const FieldElement& alpha) {
    if (alpha.is_zero()) throw DomainError("height of zero");
    const Integer Nd = denominator_norm(alpha);
    const long double lnd = field::log_abs(Nd);
    Height h;
    if (alpha.discriminant().is_imaginary()) {
        const Rational N = alpha.norm();
        const Rational arch = N > 1 ? N : Rational(1);
        h.exact = Rational(Nd) * arch;
        h.log_value = lnd + (N > 1 ? log_of(N) : 0.0L);
    } else {
        const bool g1 = abs_exceeds_one(alpha, 0), g2 = abs_exceeds_one(alpha, 1);
        h.log_value = lnd + (g1 ? alpha.log_abs_embedding(0) : 0.0L) + (g2 ? alpha.log_abs_embedding(1) : 0.0L);
        if (!g1 && !g2) h.exact = Rational(Nd);
        if (g1 && g2) {
            const Rational N = alpha.norm();
            h.exact = Rational(Nd) * (N < 0 ? Rational(-N) : N);
        }
    }
    h.value = std::exp(h.log_value);
    return h;
}

bool height_at_most(const FieldElement& alpha, const Rational& Z) {
    if (alpha.is_zero()) return Z >= 1;
    const Integer Nd = denominator_norm(alpha);
    if (alpha.discriminant().is_imaginary()) {
        const Rational N = alpha.norm();
        return Rational(Nd) * (N > 1 ? N : Rational(1)) <= Z;
    }
    const bool g1 = abs_exceeds_one(alpha, 0), g2 = abs_exceeds_one(alpha, 1);
    if (!g1 && !g2) return Rational(Nd) <= Z;
    if (g1 && g2) {
        const Rational N = alpha.norm();
        return Rational(Nd) * (N < 0 ? Rational(-N) : N) <= Z;
    }
    return abs_at_most(alpha, g1 ? 0 : 1, Z / Rational(Nd));
}

// ------------------------------------------------------------- FieldContext

FieldContext::FieldContext(const Discriminant& D)
    : D_(D), group_(D), cycle_(D, false), roots_(units::roots_of_unity(D)) {}

const units::PrincipalCycle& FieldContext::exact_cycle() const {
    std::call_once(exact_once_, [this] { exact_ = std::make_unique<units::PrincipalCycle>(D_, true); });
    return *exact_;
}

std::vector<PrimeIdeal> FieldContext::split_primes(std::uint64_t max_norm) const {
    std::vector<PrimeIdeal> out;
    if (max_norm < 2) return out;
    for (std::uint32_t p : arith::primes_up_to(max_norm)) {
        if (arith::kronecker(D_.value(), p) != 1) continue;
        const PrimeIdeal P{p, forms::prime_form_b(D_.value(), p)};
        out.push_back(P);
        out.push_back(P.conjugate());
    }
    std::sort(out.begin(), out.end());
    return out;
}

// --------------------------------------------------------------- S_ell core

namespace {

struct PairScan {
    PrimeIdeal P1, P2;
    Ideal I;                 // P1^ell * conj(P2)^ell, generated by beta * p2^ell
    Integer p2_ell;
    long double log_p2_ell;  // ell * log p2
    long double x0 = 0, y0 = 0;  // log|beta| at the embeddings (D > 0)
};

template <class F>
void for_each_principal_pair(const FieldContext& K, unsigned ell, const Rational& Z, F&& f) {
    const std::uint64_t pmax = root_floor(Z, ell);
    const auto primes = K.split_primes(pmax);
    if (primes.size() < 2) return;
    const Discriminant& D = K.discriminant();
    const auto& G = K.group();
    const forms::FormContext& ctx = G.context();
    std::vector<std::size_t> cls(primes.size());
    std::vector<Ideal> pow_ell;
    for (std::size_t i = 0; i < primes.size(); ++i) {
        const auto& P = primes[i];
        cls[i] = G.power(G.class_of(forms::make_form(ctx, std::int64_t(P.p), P.b)), ell);
        pow_ell.push_back(P.ideal(D).power(ell));
    }
    auto conj_index = [&](std::size_t j) {
        const PrimeIdeal c = primes[j].conjugate();
        return std::size_t(std::lower_bound(primes.begin(), primes.end(), c) - primes.begin());
    };
    for (std::size_t i = 0; i < primes.size(); ++i) {
        for (std::size_t j = 0; j < primes.size(); ++j) {
            if (i == j || cls[i] != cls[j]) continue;
            PairScan s{primes[i], primes[j], pow_ell[i] * pow_ell[conj_index(j)],
                       ipow(Integer(primes[j].p), ell), ell * std::log(static_cast<long double>(primes[j].p))};
            f(s);
        }
    }
}

// log-embedding of the generator of I chosen by the principal cycle.
std::pair<long double, long double> generator_logs(const FieldContext& K, const Ideal& I) {
    const field::IdealReduction red = field::reduce_ideal(I, false);
    const auto pos = K.cycle().position(red.reduced.a, red.reduced.b);
    if (!pos) throw std::logic_error("ideal expected to be principal is not");
    const auto [l1, l2] = K.cycle().logs(*pos);
    return {l1 - red.log1, l2 - red.log2};
}

FieldElement generator_of(const FieldContext& K, const Ideal& I) {
    const auto g = units::principal_generator(K.exact_cycle(), I);
    if (!g) throw std::logic_error("ideal expected to be principal is not");
    return g->element;
}

// Unit exponents n for beta * eps^n whose height may be <= Z (D > 0), with
// float log heights; callback(n, log_height).
template <class F>
void scan_unit_window(long double x0, long double y0, long double base, long double R, long double logZ, F&& f) {
    const long double nstar = std::round((y0 - x0) / (2 * R));
    auto lower = [&](long double n) { return base + (x0 + y0) / 2 + std::fabs(x0 - y0 + 2 * n * R) / 2; };
    auto logh = [&](long double n) {
        return base + std::max(0.0L, x0 + n * R) + std::max(0.0L, y0 - n * R);
    };
    for (long double n = nstar; lower(n) <= logZ + boundary_margin; n += 1) f(static_cast<long long>(n), logh(n));
    for (long double n = nstar - 1; lower(n) <= logZ + boundary_margin; n -= 1) f(static_cast<long long>(n), logh(n));
}

} // namespace

std::optional<std::pair<PrimeIdeal, PrimeIdeal>> s_ell_witness(const FieldElement& beta, unsigned ell,
                                                               const Rational& Z) {
    if (beta.is_zero() || beta.is_rational() || ell == 0) return std::nullopt;
    const Discriminant& D = beta.discriminant();
    const Integer s = beta.denominator();
    const FieldElement gamma = beta * FieldElement(D, s, 0, 1);
    const Rational ng = gamma.norm();
    Integer N = numerator(ng);
    if (N < 0) N = -N;
    // primes dividing N(gamma) or s
    std::set<std::uint64_t> primes;
    auto collect = [&](const Integer& n) {
        if (n <= 1) return;
        if (n >= (Integer(1) << 126)) throw RangeError("norm too large for the witness check");
        for (const auto& pp : arith::factorize(u128(to_i128(n)))) {
            if (pp.prime > u128(std::numeric_limits<std::uint64_t>::max())) throw RangeError("prime too large");
            primes.insert(std::uint64_t(pp.prime));
        }
    };
    collect(N);
    collect(s);
    auto val = [](Integer n, std::uint64_t q) {
        int v = 0;
        while (n != 0 && n % q == 0) {
            n /= q;
            ++v;
        }
        return v;
    };
    std::vector<std::pair<PrimeIdeal, int>> nonzero;
    for (std::uint64_t q : primes) {
        const int vn = val(N, q), vs = val(s, q);
        const int k = arith::kronecker(D.value(), q);
        if (k == 1) {
            const PrimeIdeal Q{q, forms::prime_form_b(D.value(), q)};
            const PrimeIdeal Qc = Q.conjugate();
            int e = 0;
            const Ideal base = Q.ideal(D);
            Ideal pw = base;
            while (e < vn && pw.contains(gamma)) {
                ++e;
                if (e < vn) pw = pw * base;
            }
            const int v1 = e - vs, v2 = (vn - e) - vs;
            if (v1 != 0) nonzero.emplace_back(Q, v1);
            if (v2 != 0) nonzero.emplace_back(Qc, v2);
        } else {
            // ramified or inert: a single prime that is not of degree one
            const int v = k == 0 ? vn - 2 * vs : vn / 2 - vs;
            if (v != 0) return std::nullopt;
        }
    }
    if (nonzero.size() != 2) return std::nullopt;
    const int e = int(ell);
    PrimeIdeal P1, P2;
    if (nonzero[0].second == e && nonzero[1].second == -e) {
        P1 = nonzero[0].first;
        P2 = nonzero[1].first;
    } else if (nonzero[1].second == e && nonzero[0].second == -e) {
        P1 = nonzero[1].first;
        P2 = nonzero[0].first;
    } else {
        return std::nullopt;
    }
    if (!height_at_most(beta, Z)) return std::nullopt;
    return std::pair{P1, P2};
}

std::vector<SEllElement> enumerate_s_ell(const FieldContext& K, unsigned ell, const Rational& Z) {
    if (ell < 2) throw ValidationError("ell must be at least 2");
    std::vector<SEllElement> out;
    if (Z < 1) return out;
    const Discriminant& D = K.discriminant();
    const long double logZ = log_of(Z);
    for_each_principal_pair(K, ell, Z, [&](PairScan& s) {
        const FieldElement beta = generator_of(K, s.I) / FieldElement(D, s.p2_ell, 0, 1);
        if (D.is_imaginary()) {
            for (const auto& z : K.roots_of_unity()) {
                const FieldElement b = z * beta;
                out.push_back({b, s.P1, s.P2, weil_height(b)});
            }
            return;
        }
        const auto [g1, g2] = generator_logs(K, s.I);
        const long double R = K.regulator();
        const FieldElement& eps = K.exact_cycle().unit();
        scan_unit_window(g1 - s.log_p2_ell, g2 - s.log_p2_ell, s.log_p2_ell, R, logZ, [&](long long n, long double lh) {
            if (lh > logZ + boundary_margin) return;
            const FieldElement b = beta * eps.pow(n);
            if (lh >= logZ - boundary_margin && !height_at_most(b, Z)) return;
            out.push_back({b, s.P1, s.P2, weil_height(b)});
            out.push_back({-b, s.P1, s.P2, weil_height(b)});
        });
    });
    return out;
}

std::vector<SEllElement> enumerate_s_ell(const Discriminant& D, unsigned ell, double Z) {
    const FieldContext K(D);
    return enumerate_s_ell(K, ell, exact_bound(Z));
}

std::vector<std::uint64_t> count_s_ell(const FieldContext& K, unsigned ell, const std::vector<Rational>& Zs) {
    if (ell < 2) throw ValidationError("ell must be at least 2");
    std::vector<std::uint64_t> counts(Zs.size(), 0);
    if (Zs.empty()) return counts;
    const Rational Zmax = *std::max_element(Zs.begin(), Zs.end());
    if (Zmax < 1) return counts;
    const Discriminant& D = K.discriminant();
    std::vector<long double> logZ;
    for (const auto& z : Zs) logZ.push_back(z > 0 ? log_of(z) : -1e300L);
    const long double logZmax = log_of(Zmax);
    const std::uint64_t w = K.roots_of_unity().size();
    for_each_principal_pair(K, ell, Zmax, [&](PairScan& s) {
        if (D.is_imaginary()) {
            const Integer top = ipow(Integer(std::max(s.P1.p, s.P2.p)), ell);
            for (std::size_t k = 0; k < Zs.size(); ++k)
                if (Rational(top) <= Zs[k]) counts[k] += w;
            return;
        }
        const auto [g1, g2] = generator_logs(K, s.I);
        std::optional<FieldElement> beta;
        scan_unit_window(g1 - s.log_p2_ell, g2 - s.log_p2_ell, s.log_p2_ell, K.regulator(), logZmax,
                         [&](long long n, long double lh) {
                             std::optional<FieldElement> b;
                             for (std::size_t k = 0; k < Zs.size(); ++k) {
                                 if (lh < logZ[k] - boundary_margin) {
                                     counts[k] += 2;
                                 } else if (lh <= logZ[k] + boundary_margin) {
                                     if (!b) {
                                         if (!beta)
                                             beta = generator_of(K, s.I) / FieldElement(D, s.p2_ell, 0, 1);
                                         b = *beta * K.exact_cycle().unit().pow(n);
                                     }
                                     if (height_at_most(*b, Zs[k])) counts[k] += 2;
                                 }
                             }
                         });
    });
    return counts;
}

std::uint64_t count_s_ell(const FieldContext& K, unsigned ell, const Rational& Z) {
    return count_s_ell(K, ell, std::vector<Rational>{Z})[0];
}

// ------------------------------------------------------------------- oracle

namespace {

bool is_square_i128(i128 q, std::uint64_t* root) {
    if (q < 0) return false;
    static constexpr std::uint64_t sq64 = [] {
        std::uint64_t m = 0;
        for (std::uint64_t i = 0; i < 64; ++i) m |= std::uint64_t(1) << ((i * i) % 64);
        return m;
    }();
    if (!((sq64 >> (std::uint64_t(q) & 63)) & 1)) return false;
    // 45045 = 63 * 65 * 11
    static const std::vector<char> sq45045 = [] {
        std::vector<char> t(45045, 0);
        for (std::uint64_t i = 0; i < 45045; ++i) t[(i * i) % 45045] = 1;
        return t;
    }();
    if (!sq45045[std::size_t(q % 45045)]) return false;
    return arith::is_perfect_square(u128(q), root);
}

} // namespace

std::vector<SEllElement> s_ell_oracle(const Discriminant& D, unsigned ell, double Z, double ceiling) {
    if (ell < 2) throw ValidationError("ell must be at least 2");
    if (Z > ceiling)
        throw RefusalError("brute-force S_ell oracle refuses Z = " + std::to_string(Z) + " above the ceiling " +
                           std::to_string(ceiling));
    const Rational Zr = exact_bound(Z);
    std::vector<SEllElement> out;
    if (Zr < 1) return out;
    const std::uint64_t pmax = root_floor(Zr, ell);
    const auto primes = arith::primes_up_to(pmax);
    const i128 d = D.value();
    const i128 ad = d < 0 ? -d : d;
    std::set<FieldElement> seen;
    const int signs[2] = {1, -1};
    for (std::uint32_t v : primes) {
        i128 vl = 1;
        for (unsigned i = 0; i < ell; ++i) vl *= v;
        for (std::uint32_t u : primes) {
            i128 ul = 1;
            for (unsigned i = 0; i < ell; ++i) ul *= u;
            for (int sigma : signs) {
                if (D.is_imaginary() && sigma < 0) continue;
                i128 s = 1;
                for (unsigned k = 0; k <= ell; ++k, s *= v) {
                    long double tb;
                    if (D.is_imaginary())
                        tb = 2.0L * static_cast<long double>(s) *
                             std::sqrt(static_cast<long double>(ul) / static_cast<long double>(vl));
                    else
                        tb = static_cast<long double>(s) * (Z / static_cast<long double>(vl) + 1);
                    const auto tmax = static_cast<i128>(std::floor(tb)) + 1;
                    const i128 c = detail::mul_checked(4 * sigma * ul, detail::mul_checked(s, s));
                    const i128 scale = detail::mul_checked(vl, d);
                    for (i128 t = -tmax; t <= tmax; ++t) {
                        if (k > 0 && t % v == 0) continue;
                        const i128 M = detail::mul_checked(t * t, vl) - c;
                        const i128 Q = detail::mul_checked(M, scale);
                        if (Q <= 0) continue;
                        std::uint64_t root = 0;
                        if (!is_square_i128(Q, &root)) continue;
                        const Integer num = from_i128(-t * vl * ad);
                        const Integer den = from_i128(2 * s * vl * ad);
                        for (int pm : signs) {
                            const FieldElement beta(D, num, Integer(pm) * Integer(root), den);
                            if (seen.count(beta)) continue;
                            if (const auto w = s_ell_witness(beta, ell, Zr)) {
                                seen.insert(beta);
                                out.push_back({beta, w->first, w->second, weil_height(beta)});
                            }
                        }
                    }
                }
            }
        }
    }
    return out;
}

// ------------------------------------------------------------------- family

FamilySum family_s_ell_sum(const std::vector<Discriminant>& family, unsigned ell, double Z, unsigned workers) {
    FamilySum out;
    out.per_field.resize(family.size());
    const Rational Zr = exact_bound(Z);
    detail::parallel_for(family.size(), workers, [&](std::size_t i) {
        const FieldContext K(family[i]);
        out.per_field[i] = {family[i].value(), count_s_ell(K, ell, Zr)};
    });
    for (const auto& [d, c] : out.per_field) out.total += c;
    return out;
}

std::vector<std::uint64_t> family_s_ell_counts(const std::vector<Discriminant>& family, unsigned ell,
                                               const std::vector<double>& Zs, unsigned workers) {
    std::vector<Rational> Zr;
    for (double z : Zs) Zr.push_back(exact_bound(z));
    std::vector<std::vector<std::uint64_t>> per(family.size());
    detail::parallel_for(family.size(), workers, [&](std::size_t i) {
        const FieldContext K(family[i]);
        per[i] = count_s_ell(K, ell, Zr);
    });
    std::vector<std::uint64_t> total(Zs.size(), 0);
    for (const auto& c : per)
        for (std::size_t k = 0; k < c.size(); ++k) total[k] += c[k];
    return total;
}

// ----------------------------------------------------- generators, fractions

namespace {

struct Candidate {
    FieldElement element;
    long double log_height;
    long double imbalance;
};

bool better(const Candidate& a, const Candidate& b) {
    const long double tol = 1e-12L * std::max(1.0L, std::fabs(b.log_height));
    if (a.log_height < b.log_height - tol) return true;
    if (a.log_height > b.log_height + tol) return false;
    const long double itol = 1e-12L * std::max(1.0L, b.imbalance);
    if (a.imbalance < b.imbalance - itol) return true;
    if (a.imbalance > b.imbalance + itol) return false;
    const Rational au = a.element.omega_u(), bu = b.element.omega_u();
    if (au != bu) return au > bu;
    return a.element.omega_v() > b.element.omega_v();
}

} // namespace

FieldElement small_generator(const FieldContext& K, const Ideal& a) {
    const Discriminant& D = K.discriminant();
    if (!(a.discriminant() == D)) throw ValidationError("ideal from a different field");
    const std::size_t cls = K.group().class_of(a);
    if (cls != 0) {
        const auto& rep = K.group().representative(cls);
        throw DomainError("ideal " + a.to_string() + " is not principal: class index " + std::to_string(cls + 1) +
                          " with representative " + forms::to_string(rep));
    }
    const auto g = units::principal_generator(K.exact_cycle(), a);
    if (!g) throw std::logic_error("principal ideal without generator");
    std::optional<Candidate> best;
    auto consider = [&](const FieldElement& e) {
        const Height h = weil_height(e);
        long double imb = 0;
        if (D.is_real()) imb = std::fabs(e.log_abs_embedding(0) - e.log_abs_embedding(1));
        Candidate c{e, h.log_value, imb};
        if (!best || better(c, *best)) best = std::move(c);
    };
    if (D.is_imaginary()) {
        for (const auto& z : K.roots_of_unity()) consider(z * g->element);
    } else {
        const long double R = K.regulator();
        const auto nstar = static_cast<long long>(std::round((g->log2 - g->log1) / (2 * R)));
        const FieldElement& eps = K.exact_cycle().unit();
        for (long long n = nstar - 2; n <= nstar + 2; ++n) {
            const FieldElement e = g->element * eps.pow(n);
            consider(e);
            consider(-e);
        }
    }
    return best->element;
}

FractionDecomposition fraction_decomposition(const FieldContext& K, const FieldElement& alpha) {
    if (alpha.is_zero()) throw DomainError("fraction decomposition of zero");
    const Discriminant& D = K.discriminant();
    if (!(alpha.discriminant() == D)) throw ValidationError("element from a different field");
    const Ideal den = denominator_ideal(alpha);
    const auto& G = K.group();
    const std::size_t id = G.class_of(den.conjugate());
    FractionDecomposition out{alpha, FieldElement::from_rational(D, 1), 1, {}, 0};
    out.class_index = id + 1;
    out.representative = G.representative(id);
    const Ideal C = Ideal::from_form(D, out.representative.a, out.representative.b);
    out.t_prime = small_generator(K, C * den);
    out.t = alpha * out.t_prime;
    const Height ht = weil_height(out.t), htp = weil_height(out.t_prime), ha = weil_height(alpha);
    out.c_frac = std::exp(std::max(ht.log_value, htp.log_value) - ha.log_value);
    return out;
}

// ------------------------------------------------------------- point counts

const char* to_string(PointKind k) {
    switch (k) {
    case PointKind::integers_by_height: return "integers_by_height";
    case PointKind::units_in_box: return "units_in_box";
    case PointKind::unit_translates: return "unit_translates";
    }
    return "?";
}

PointKind parse_point_kind(const std::string& s) {
    if (s == "integers_by_height") return PointKind::integers_by_height;
    if (s == "units_in_box") return PointKind::units_in_box;
    if (s == "unit_translates") return PointKind::unit_translates;
    throw ValidationError("unknown point kind '" + s + "'");
}

namespace {

std::uint64_t integers_imaginary(const Discriminant& D, const Rational& X) {
    // alpha = (X' + Y sqrt D) / 2, X' = r Y mod 2, N = (X'^2 + |D| Y^2) / 4 <= floor(X)
    const Integer F = numerator(X) / denominator(X);
    const u128 bound = u128(to_i128(F)) * 4;
    const u128 ad = D.absolute();
    const int r = D.residue();
    std::uint64_t count = 0;
    for (std::int64_t Y = 0; u128(Y) * u128(Y) * ad <= bound; ++Y) {
        const u128 rest = bound - u128(Y) * u128(Y) * ad;
        const auto m = static_cast<std::int64_t>(arith::isqrt(rest));
        // X' in [-m, m] with X' = r Y (mod 2)
        const std::int64_t nk = (r * Y) & 1 ? 2 * ((m + 1) / 2) : 2 * (m / 2) + 1;
        count += std::uint64_t(Y == 0 ? nk : 2 * nk);
    }
    return count;
}

std::uint64_t integers_real(const Discriminant& D, const Rational& X, double Xd) {
    const long double sd = std::sqrt(static_cast<long double>(D.value()));
    const long double logX = std::log(static_cast<long double>(Xd));
    const int r = D.residue();
    const auto ymax = static_cast<std::int64_t>(std::floor(2 * Xd / sd)) + 1;
    const auto xmax = static_cast<std::int64_t>(std::floor(2 * Xd)) + 1;
    std::uint64_t count = X >= 1 ? 1 : 0;  // zero
    for (std::int64_t Y = -ymax; Y <= ymax; ++Y) {
        const std::int64_t par = (r * Y) & 1;
        std::int64_t Xp = -xmax;
        if (((Xp - par) & 1) != 0) ++Xp;
        for (; Xp <= xmax; Xp += 2) {
            if (Xp == 0 && Y == 0) continue;
            const long double a1 = std::fabs((Xp + Y * sd) / 2), a2 = std::fabs((Xp - Y * sd) / 2);
            const long double lh = std::log(std::max(1.0L, a1)) + std::log(std::max(1.0L, a2));
            if (lh < logX - boundary_margin) {
                ++count;
            } else if (lh <= logX + boundary_margin) {
                if (height_at_most(FieldElement(D, Xp, Y, 2), X)) ++count;
            }
        }
    }
    return count;
}

std::uint64_t units_real(const FieldContext& K, const Rational& X, double Xd) {
    const auto& eps = K.exact_cycle().unit();
    auto m = static_cast<long long>(std::floor(std::log(static_cast<long double>(Xd)) / K.regulator()));
    // |eps^m| at the larger embedding is the binding one; |eps^-m| mirrors it
    auto fits = [&](long long k) { return k < 0 || abs_at_most(eps.pow(k), 0, X); };
    while (m >= 0 && !fits(m)) --m;
    while (fits(m + 1)) ++m;
    return m < 0 ? 0 : std::uint64_t(2 * (2 * m + 1));
}

std::uint64_t translates_real(const FieldContext& K, const FieldElement& alpha, const Rational& X) {
    const long double base = field::log_abs(denominator_norm(alpha));
    const long double logX = log_of(X);
    const auto& eps = K.exact_cycle().unit();
    std::uint64_t count = 0;
    scan_unit_window(alpha.log_abs_embedding(0), alpha.log_abs_embedding(1), base, K.regulator(), logX,
                     [&](long long n, long double lh) {
                         if (lh < logX - boundary_margin ||
                             (lh <= logX + boundary_margin && height_at_most(alpha * eps.pow(n), X)))
                             count += 2;
                     });
    return count;
}

} // namespace

std::uint64_t count_points(const FieldContext& K, PointKind kind, double X, const std::optional<FieldElement>& alpha,
                           const CountLimits& limits) {
    if (!std::isfinite(X) || X < 1) throw ValidationError("X must be a finite real >= 1");
    const Discriminant& D = K.discriminant();
    const Rational Xr = exact_bound(X);
    switch (kind) {
    case PointKind::integers_by_height:
        if (D.is_imaginary()) {
            if (X > limits.imaginary_ceiling)
                throw RefusalError("integers_by_height refuses X above " + std::to_string(limits.imaginary_ceiling));
            return integers_imaginary(D, Xr);
        }
        if (X > limits.real_ceiling)
            throw RefusalError("integers_by_height refuses X above " + std::to_string(limits.real_ceiling) +
                               " for real fields");
        return integers_real(D, Xr, X);
    case PointKind::units_in_box:
        if (D.is_imaginary()) return K.roots_of_unity().size();
        return units_real(K, Xr, X);
    case PointKind::unit_translates: {
        if (!alpha) throw ValidationError("unit_translates needs an element alpha");
        if (alpha->is_zero()) throw DomainError("unit_translates of zero");
        if (!(alpha->discriminant() == D)) throw ValidationError("element from a different field");
        if (D.is_imaginary()) return height_at_most(*alpha, Xr) ? K.roots_of_unity().size() : 0;
        return translates_real(K, *alpha, Xr);
    }
    }
    return 0;
}

} // namespace qtorsion::heights
