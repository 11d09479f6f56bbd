#include "qtorsion/moments.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "qtorsion/errors.hpp"
#include "detail/parallel.hpp"

namespace qtorsion::moments {

std::vector<ClassGroupStructure> compute_structures(const std::vector<arith::Discriminant>& family,
                                                    unsigned workers) {
    std::vector<ClassGroupStructure> out(family.size());
    detail::parallel_for(family.size(), workers, [&](std::size_t i) { out[i] = classgroup::class_group(family[i]); });
    return out;
}

namespace {

std::uint64_t abs_d(const ClassGroupStructure& S) {
    return S.discriminant.absolute();
}

bool in_window(const ClassGroupStructure& S, std::uint64_t Q) {
    const auto a = abs_d(S);
    return a > Q && a <= 2 * Q;
}

void check_ell(unsigned ell) {
    if (ell < 1) throw ValidationError("ell must be positive");
}

// Neumaier summation in a fixed order.
struct Compensated {
    long double sum = 0, c = 0;
    void add(long double x) {
        const long double t = sum + x;
        if (std::fabs(sum) >= std::fabs(x)) c += (sum - t) + x;
        else c += (x - t) + sum;
        sum = t;
    }
    long double value() const { return sum + c; }
};

} // namespace

WindowRecord moment_sum(const std::vector<ClassGroupStructure>& fields, unsigned ell, double r, std::uint64_t Q) {
    check_ell(ell);
    if (!(r >= 0) || !std::isfinite(r)) throw ValidationError("r must be a nonnegative real");
    if (Q < 1) throw ValidationError("Q must be at least 1");
    WindowRecord w;
    w.Q = Q;
    const bool integral = r == std::floor(r) && r <= 64;
    Integer exact = 0;
    Compensated acc;
    for (const auto& S : fields) {
        if (!in_window(S, Q)) continue;
        ++w.count;
        const std::uint64_t t = classgroup::torsion_count(S, ell);
        if (integral) {
            Integer term = 1;
            for (int i = 0; i < int(r); ++i) term *= t;
            exact += term;
        } else {
            acc.add(std::pow(static_cast<long double>(t), static_cast<long double>(r)));
        }
    }
    if (integral) {
        w.exact_sum = exact;
        w.sum = exact.convert_to<long double>();
    } else {
        w.sum = acc.value();
    }
    return w;
}

WindowRecord moment_sum(arith::SignFilter sign, unsigned ell, double r, std::uint64_t Q, unsigned workers) {
    if (Q < 1) throw ValidationError("Q must be at least 1");
    const auto fam = arith::fundamental_discriminants(Q, 2 * Q, sign);
    return moment_sum(compute_structures(fam, workers), ell, r, Q);
}

MomentSeries moment_series(const std::vector<ClassGroupStructure>& fields, arith::SignFilter sign, unsigned ell,
                           double r, std::uint64_t q_min, std::uint64_t q_max) {
    if (q_min < 1 || q_max < q_min) throw ValidationError("window range must satisfy 1 <= q_min <= q_max");
    MomentSeries s;
    s.sign = sign;
    s.ell = ell;
    s.r = r;
    for (std::uint64_t Q = q_min; Q <= q_max; Q *= 2) s.windows.push_back(moment_sum(fields, ell, r, Q));
    return s;
}

std::uint64_t tail_counts(const std::vector<ClassGroupStructure>& fields, unsigned ell, std::uint64_t Q, double H) {
    check_ell(ell);
    if (!(H >= 1)) throw ValidationError("H must be at least 1");
    std::uint64_t n = 0;
    for (const auto& S : fields)
        if (in_window(S, Q) && double(classgroup::torsion_count(S, ell)) >= H) ++n;
    return n;
}

DyadicShells dyadic_shells(const std::vector<ClassGroupStructure>& fields, unsigned ell, std::uint64_t Q) {
    check_ell(ell);
    if (Q < 1) throw ValidationError("Q must be at least 1");
    DyadicShells out;
    out.Q = Q;
    const double top = 2.0 * double(Q);
    out.J = static_cast<std::uint64_t>(std::ceil(std::log(std::sqrt(top) * std::max(1.0, std::log(top)))));
    out.counts.assign(out.J + 1, 0);
    for (const auto& S : fields) {
        if (!in_window(S, Q)) continue;
        ++out.total;
        const std::uint64_t t = classgroup::torsion_count(S, ell);
        // largest j with e^j <= t, checked against exp to avoid log rounding at powers
        auto j = static_cast<std::uint64_t>(std::floor(std::log(double(t))));
        while (j > 0 && std::exp(double(j)) > double(t)) --j;
        while (std::exp(double(j + 1)) <= double(t)) ++j;
        if (j > out.J) {
            out.ceiling_exceeded = true;
            out.J = j;
            out.counts.resize(j + 1, 0);
        }
        ++out.counts[j];
    }
    return out;
}

SlopeFit fit_log_slope(const std::vector<std::pair<double, double>>& series) {
    if (series.size() < 3) throw ValidationError("slope fit needs at least 3 points");
    std::vector<double> x, y;
    for (const auto& [X, v] : series) {
        if (!(X > 0) || !(v > 0)) throw DomainError("slope fit needs positive X and values");
        x.push_back(std::log(X));
        y.push_back(std::log(v));
    }
    const double n = double(x.size());
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += x[i];
        my += y[i];
    }
    mx /= n;
    my /= n;
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        sxx += (x[i] - mx) * (x[i] - mx);
        sxy += (x[i] - mx) * (y[i] - my);
    }
    if (sxx == 0) throw DomainError("slope fit needs at least two distinct X");
    SlopeFit f;
    f.points = x.size();
    f.slope = sxy / sxx;
    f.intercept = my - f.slope * mx;
    double ss = 0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double e = y[i] - (f.intercept + f.slope * x[i]);
        f.max_residual = std::max(f.max_residual, std::fabs(e));
        ss += e * e;
    }
    f.slope_stderr = x.size() > 2 ? std::sqrt(ss / (n - 2) / sxx) : 0.0;
    return f;
}

// ------------------------------------------------------- reference exponents

double main_exponent(unsigned d, unsigned ell, double r, double s) {
    const double R = big_r(d, ell);
    return r / 2 + std::max(0.0, s * (1 - r / R));
}

double eta_exponent(unsigned d, unsigned ell) { return double(d) - 1 + 2.0 / ell; }

double fw_eta_exponent(unsigned d, unsigned k_degree, unsigned ell) {
    return double(d) * k_degree - 1 + 2.0 / ell;
}

std::vector<ReferenceExponent> reference_exponents(unsigned d, unsigned ell, double r, double s) {
    if (d < 2 || ell < 1 || !(r >= 0)) throw ValidationError("need d >= 2, ell >= 1, r >= 0");
    const double L = ell;
    const bool r1 = r == 1;
    const unsigned R = big_r(d, ell);
    std::vector<ReferenceExponent> out;
    out.push_back({"trivial", r / 2 + s, "pointwise D^(1/2) times |S(Q)|"});
    out.push_back({"grh", r * (0.5 - 1.0 / (2 * L * (d - 1))) + s, "conditional; pointwise times |S(Q)|"});
    {
        ReferenceExponent e{"hbp1", std::nullopt, "d = 2, r = 1, l >= 5, imaginary fields"};
        if (d == 2 && r1 && ell >= 5) e.value = 1.5 * (1 - 1 / (L + 1));
        out.push_back(e);
    }
    {
        ReferenceExponent e{"hbp", std::nullopt, "d = 2, r >= l + 1, imaginary fields"};
        if (d == 2 && r >= L + 1) e.value = r / 2;
        out.push_back(e);
    }
    {
        ReferenceExponent e{"epw", std::nullopt, "r = 1, 2 <= d <= 5"};
        if (r1 && ell >= 2) {
            if (d == 2) e.value = 1.5 - 1 / (2 * L);
            if (d == 3) e.value = 1.5 - 1 / (4 * L);
            if (d == 4) e.value = 1.5 - std::min(1.0 / 48, 1 / (6 * L));
            if (d == 5) e.value = 1.5 - std::min(1.0 / 200, 1 / (8 * L));
        }
        out.push_back(e);
    }
    {
        ReferenceExponent e{"fw", std::nullopt, "d = 2 any r; 3 <= d <= 5 with r = 1"};
        if (d == 2) e.value = r / 2 + 1 - std::min(1.0, r / (L + 2));
        if (r1 && d == 3) e.value = 1.5 - std::min(2.0 / 25, 1 / (2 * L + 3));
        if (r1 && d == 4) e.value = 1.5 - std::min(1.0 / 48, 1 / (3 * L + 3));
        if (r1 && d == 5) e.value = 1.5 - std::min(1.0 / 200, 1 / (4 * L + 3));
        out.push_back(e);
    }
    out.push_back({"fm2", r / 2 + s - std::min(s, s * r / (L * (d - 1) + 2)), "conditional; beta = s"});
    out.push_back({"main", main_exponent(d, ell, r, s), "r/2 + max(0, s (1 - r/R))"});
    {
        ReferenceExponent e{"moment2", std::nullopt, "r >= R"};
        if (r >= R) e.value = r / 2;
        out.push_back(e);
    }
    {
        ReferenceExponent e{"moment3", std::nullopt, "d = 2, r = 1"};
        if (d == 2 && r1) e.value = 1.5 - 1 / (L + 1);
        out.push_back(e);
    }
    return out;
}

BoundComparison compare_bounds(const MomentSeries& series, double tolerance) {
    if (!(tolerance > 0 && tolerance < 1)) throw ValidationError("tolerance must lie in (0, 1)");
    std::vector<std::pair<double, double>> sums, counts;
    for (const auto& w : series.windows) {
        if (w.count == 0) continue;
        sums.emplace_back(double(w.Q), double(w.sum));
        counts.emplace_back(double(w.Q), double(w.count));
    }
    if (sums.size() < 3) throw ValidationError("comparison needs at least 3 nonempty windows");
    BoundComparison c;
    c.family = arith::to_string(series.sign);
    c.d = series.d;
    c.ell = series.ell;
    c.r = series.r;
    c.q_min = series.windows.front().Q;
    c.q_max = series.windows.back().Q;
    c.tolerance = tolerance;
    c.measured = fit_log_slope(sums);
    c.count_slope = fit_log_slope(counts);
    c.references = reference_exponents(series.d, series.ell, series.r, c.count_slope.slope);
    for (const auto& e : c.references) {
        if (e.value) c.passes.push_back(c.measured.slope <= *e.value + tolerance);
        else c.passes.push_back(std::nullopt);
    }
    c.predicted = main_exponent(series.d, series.ell, series.r, c.count_slope.slope);
    return c;
}

// ---------------------------------------------------------------- dihedral

long double dihedral_proxy(const std::vector<ClassGroupStructure>& fields, std::uint64_t Q) {
    long double s = 0;
    for (const auto& S : fields)
        if (abs_d(S) <= Q) s += (static_cast<long double>(classgroup::torsion_count(S, 3)) - 1) / 2;
    return s;
}

DihedralEstimate dihedral_estimate(std::uint64_t p, std::optional<std::uint64_t> Q, unsigned workers) {
    if (p % 2 == 0 || !arith::is_prime(p)) throw ValidationError("p must be an odd prime");
    DihedralEstimate e;
    e.p = p;
    e.Q = Q;
    const double P = double(p);
    e.corollary = 3 / (P - 1) - 2 / ((P + 1) * (P - 1));
    e.corollary_2p = 3 / (2 * P) - 1 / (P * (P + 1));
    e.fw = 3 / (P - 1) - 2 / ((P + 2) * (P - 1));
    e.fw_2p = 3 / (2 * P) - 1 / (P * (P + 2));
    e.cohen_thorne = 3 / (P - 1) - 1 / (P * (P - 1));
    e.kluners_2p = 3 / (2 * P);
    if (p == 3 && Q) {
        const auto fam = arith::fundamental_discriminants(0, *Q);
        e.proxy = dihedral_proxy(compute_structures(fam, workers), *Q);
    }
    return e;
}

} // namespace qtorsion::moments
