// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <CLI11.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <thread>

#include "lattice_oracle.hpp"
#include "oracles.hpp"
#include "qtorsion/classgroup.hpp"
#include "qtorsion/heights.hpp"
#include "qtorsion/moments.hpp"
#include "qtorsion/primes.hpp"
#include "qtorsion/tfw.hpp"
#include "qtorsion/units_lattice.hpp"

using namespace qtorsion;
using arith::Discriminant;
using arith::SignFilter;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
    bool pass = true;
    std::ostringstream detail;
    void fail(const std::string& why) {
        if (pass) detail.str("");
        if (!pass) detail << "; ";
        pass = false;
        detail << why;
    }
};

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

Discriminant fd(std::int64_t D) { return Discriminant::fundamental(D); }

struct Context {
    unsigned workers = 1;
    std::vector<moments::ClassGroupStructure> census;  // |D| <= 2^20, filled by criterion 5
};

void class_groups(Context&, Outcome& out) {
    const auto family = arith::fundamental_discriminants(0, 10000);
    double compute = 0;
    std::size_t bad_order = 0, bad_analytic = 0;
    for (const auto& D : family) {
        const auto t0 = Clock::now();
        const auto S = classgroup::class_group(D);
        compute += seconds_since(t0);
        if (std::int64_t(S.order) != oracle::class_number(D.value())) {
            if (!bad_order) out.fail("order mismatch at D=" + std::to_string(D.value()));
            ++bad_order;
        }
        if (std::abs(classgroup::analytic_check(D).value - double(S.order)) >= 0.5) {
            if (!bad_analytic) out.fail("analytic estimate off at D=" + std::to_string(D.value()));
            ++bad_analytic;
        }
    }
    if (compute > 60) out.fail("class groups took " + std::to_string(compute) + " s");
    if (out.pass) out.detail << family.size() << " fields, class groups in " << compute << " s";
}

void oracle_equivalence(Context& ctx, Outcome& out) {
    const auto n8 = heights::enumerate_s_ell(fd(-4), 2, 25).size();
    if (n8 != 8) out.fail("|S_2(Q(i), 25)| = " + std::to_string(n8));
    const auto family = arith::fundamental_discriminants(0, 500);
    std::vector<std::string> failures(family.size());
    std::vector<std::uint64_t> sizes(family.size());
    {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> next{0};
        for (unsigned w = 0; w < ctx.workers; ++w)
            pool.emplace_back([&] {
                for (std::size_t k; (k = next++) < family.size();) {
                    const heights::FieldContext K(family[k]);
                    for (unsigned ell : {2u, 3u})
                        for (double Z : {16.0, 256.0, 1e4}) {
                            std::set<field::FieldElement> a, b;
                            for (const auto& x : heights::enumerate_s_ell(K, ell, heights::exact_bound(Z)))
                                a.insert(x.beta);
                            for (const auto& x : heights::s_ell_oracle(family[k], ell, Z)) b.insert(x.beta);
                            sizes[k] += a.size();
                            if (a != b)
                                failures[k] += "D=" + std::to_string(family[k].value()) + " l=" + std::to_string(ell) +
                                               " Z=" + std::to_string(Z) + " ";
                        }
                }
            });
        for (auto& t : pool) t.join();
    }
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < family.size(); ++k) {
        total += sizes[k];
        if (!failures[k].empty()) out.fail(failures[k]);
    }
    if (out.pass) out.detail << family.size() << " fields x 6 (l, Z), " << total << " elements, |S_2(Q(i),25)| = 8";
}

void s_ell_slope(Context& ctx, Outcome& out) {
    const auto family = arith::fundamental_discriminants(0, 10000);
    std::vector<double> Zs;
    for (int k = 6; k <= 14; ++k) Zs.push_back(std::ldexp(1.0, k));
    for (unsigned ell : {2u, 3u}) {
        const auto totals = heights::family_s_ell_counts(family, ell, Zs, ctx.workers);
        std::vector<std::pair<double, double>> pts;
        for (std::size_t i = 0; i < Zs.size(); ++i) pts.emplace_back(Zs[i], double(totals[i]));
        const auto fit = moments::fit_log_slope(pts);
        const double limit = 1 + 2.0 / ell + 0.2;
        out.detail << (ell == 3 ? ", " : "") << "l=" << ell << " slope " << fit.slope << " (limit " << limit << ")";
        if (!(fit.slope <= limit)) out.fail("l=" + std::to_string(ell) + " slope " + std::to_string(fit.slope));
    }
}

void tfw_combinatorics(Context& ctx, Outcome& out) {
    {
        const heights::FieldContext Ki(fd(-4));
        const auto r = tfw::verify_offdiagonal(Ki, tfw::build_f_map(Ki, 2, 20), 1.0);
        if (r.lhs != 36 || r.rhs != 126 || !r.holds)
            out.fail("(-4, 2, 20): " + std::to_string(r.lhs) + " <= " + std::to_string(r.rhs));
    }
    const auto family = arith::fundamental_discriminants(0, 10000);
    std::mt19937_64 rng(20240611);
    std::vector<Discriminant> sample;
    std::set<std::int64_t> used;
    while (sample.size() < 100) {
        const auto& D = family[rng() % family.size()];
        if (used.insert(D.value()).second) sample.push_back(D);
    }
    std::vector<std::string> failures(sample.size());
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < ctx.workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t k; (k = next++) < sample.size();) {
                const heights::FieldContext K(sample[k]);
                for (unsigned ell : {2u, 3u})
                    for (double Z : {20.0, 60.0}) {
                        const auto rec = tfw::build_f_map(K, ell, Z, 1.0, false);
                        const auto r = tfw::verify_offdiagonal(K, rec, tfw::default_c_tfw(sample[k], 1));
                        const bool cs = r.pi_1 * r.pi_1 <= r.nonempty_fibers * r.lhs;
                        if (!r.holds || !cs || !r.cauchy_schwarz || r.witness_failures)
                            failures[k] += "D=" + std::to_string(sample[k].value()) + " l=" + std::to_string(ell) +
                                           " Z=" + std::to_string(int(Z)) + " ";
                    }
            }
        });
    for (auto& t : pool) t.join();
    for (const auto& f : failures)
        if (!f.empty()) out.fail(f);
    if (out.pass) out.detail << "400 (field, l, Z) cases, 0 failures; (-4, 2, 20): 36 <= 126";
}

void moment_exponents(Context& ctx, Outcome& out) {
    const auto t0 = Clock::now();
    if (ctx.census.empty())
        ctx.census = moments::compute_structures(arith::fundamental_discriminants(0, 1u << 20), ctx.workers);
    out.detail << ctx.census.size() << " fields in " << seconds_since(t0) << " s; ";
    for (auto [r, limit] : {std::pair{1.0, 1.25 + 0.1}, std::pair{4.0, 2.0 + 0.15}}) {
        const auto series = moments::moment_series(ctx.census, SignFilter::both, 3, r, 1 << 9, 1 << 19);
        const auto cmp = moments::compare_bounds(series);
        out.detail << "r=" << r << " slope " << cmp.measured.slope << " (limit " << limit << ") ";
        if (!(cmp.measured.slope <= limit)) out.fail("r=" + std::to_string(r) + " slope " + std::to_string(cmp.measured.slope));
    }
}

void tails(Context& ctx, Outcome& out) {
    const std::uint64_t Q = 100000;
    std::vector<moments::ClassGroupStructure> window;
    if (!ctx.census.empty()) {
        for (const auto& s : ctx.census)
            if (s.discriminant.absolute() > Q && s.discriminant.absolute() <= 2 * Q) window.push_back(s);
    } else {
        window = moments::compute_structures(arith::fundamental_discriminants(Q, 2 * Q), ctx.workers);
    }
    const auto size = moments::tail_counts(window, 3, Q, 1);
    if (size != window.size()) out.fail("|A(Q;1)| != |S(Q)|");
    std::uint64_t last = size;
    for (double H = 1; H <= 200; H *= 1.1) {
        const auto a = moments::tail_counts(window, 3, Q, H);
        if (a > last) out.fail("tail increases at H=" + std::to_string(H));
        last = a;
    }
    const auto sh = moments::dyadic_shells(window, 3, Q);
    std::uint64_t total = 0;
    for (auto c : sh.counts) total += c;
    if (total != size || sh.total != size) out.fail("shells do not partition the window");
    std::vector<std::pair<double, double>> pts;
    for (std::size_t j = 0; j < sh.counts.size(); ++j) {
        std::uint64_t a = 0;
        for (std::size_t i = j; i < sh.counts.size(); ++i) a += sh.counts[i];
        if (a != moments::tail_counts(window, 3, Q, std::exp(double(j)))) out.fail("shell sums differ from tails");
        if (a >= 30) pts.emplace_back(std::exp(double(j)), double(a));
    }
    if (pts.size() < 3) {
        out.fail("only " + std::to_string(pts.size()) + " shells with |A| >= 30");
        return;
    }
    const auto fit = moments::fit_log_slope(pts);
    if (!(fit.slope <= -1.0)) out.fail("decay slope " + std::to_string(fit.slope));
    if (out.pass) out.detail << size << " fields, decay slope " << fit.slope << " over " << pts.size() << " shells";
}

void lattices(Context&, Outcome& out) {
    std::mt19937_64 rng(77);
    int tested = 0, failures = 0;
    while (tested < 1000) {
        const std::size_t m = 1 + rng() % 4;
        const std::size_t n = m + rng() % (5 - m);
        oracle::IntRows B(m, std::vector<std::int64_t>(n));
        for (auto& row : B)
            for (auto& x : row) x = std::int64_t(rng() % 101) - 50;
        if (oracle::gram_det(B) == 0) continue;
        ++tested;
        const auto L = oracle::exact(B);
        const auto R = units::minkowski_reduce(L);
        const auto M = oracle::integer_rows(R.basis);
        bool ok = oracle::minkowski_by_enumeration(M);
        ok = ok && std::fabs(std::fabs(oracle::gram_det(M)) - std::fabs(oracle::gram_det(B))) <=
                       1e-6L * std::fabs(oracle::gram_det(B));
        for (std::size_t i = 0; i < m; ++i) ok = ok && oracle::combine(B, R.transform[i]) == M[i];
        ok = ok && units::second_theorem_ratio(L, R.basis.basis()) >= 1 - 1e-12L;
        if (!ok) ++failures;
    }
    if (failures) out.fail(std::to_string(failures) + " of 1000 lattices failed");
    else out.detail << "1000 lattices of rank <= 4, 0 failures";
}

// Least-squares log-slope of count_points around X (one octave each side).
double local_slope(const heights::FieldContext& K, heights::PointKind kind, double X) {
    std::vector<std::pair<double, double>> pts;
    for (int j = -8; j <= 8; ++j) {
        const double x = X * std::exp2(j / 8.0);
        pts.emplace_back(x, double(heights::count_points(K, kind, x)));
    }
    return moments::fit_log_slope(pts).slope;
}

void counting(Context&, Outcome& out) {
    for (std::int64_t d : {-4, -23, 5, 8}) {
        const heights::FieldContext K(fd(d));
        std::vector<std::pair<double, double>> pts;
        for (int k = 4; k <= 12; ++k) {
            const double X = std::ldexp(1.0, k);
            pts.emplace_back(X, double(heights::count_points(K, heights::PointKind::integers_by_height, X)));
        }
        const double widmer = moments::fit_log_slope(pts).slope;
        const double units = local_slope(K, heights::PointKind::units_in_box, 4096);
        out.detail << (d == -4 ? "" : ", ") << "D=" << d << ": " << widmer << "/" << units;
        if (!(widmer >= 0.9 && widmer <= 1.2)) out.fail("D=" + std::to_string(d) + " height slope " + std::to_string(widmer));
        if (!(units <= 0.15)) out.fail("D=" + std::to_string(d) + " unit slope " + std::to_string(units));
    }
}

void prime_counting(Context& ctx, Outcome& out) {
    const auto c = primes::prime_counts(fd(-4), 20);
    if (c.pi_K != 8 || c.pi_K_1 != 6) out.fail("(-4, 20) gives " + std::to_string(c.pi_K) + "/" + std::to_string(c.pi_K_1));
    const auto family = arith::fundamental_discriminants(10000, 20000);
    const auto r = primes::detect_exceptional(family, 1000, 0.3, ctx.workers);
    if (!(r.exceptional_fraction() <= 0.05)) out.fail("exceptional fraction " + std::to_string(r.exceptional_fraction()));
    if (out.pass)
        out.detail << "pi_K=8, pi_K^(1)=6; " << r.exceptional.size() << " of " << family.size() << " fields exceptional";
}

void regulators(Context& ctx, Outcome& out) {
    long double least = 1e9;
    std::int64_t at = 0;
    std::size_t n = 0;
    auto visit = [&](std::int64_t D, long double R) {
        ++n;
        if (R < least) {
            least = R;
            at = D;
        }
    };
    if (!ctx.census.empty()) {
        for (const auto& s : ctx.census)
            if (s.discriminant.is_real()) visit(s.discriminant.value(), s.regulator);
    } else {
        for (const auto& D : arith::fundamental_discriminants(0, 100000, SignFilter::positive))
            visit(D.value(), units::regulator_and_norm(D).regulator);
    }
    if (least < 0.205L) out.fail("regulator " + std::to_string(double(least)) + " at D=" + std::to_string(at));
    const double r5 = double(units::fundamental_unit(fd(5)).regulator);
    const double r8 = double(units::fundamental_unit(fd(8)).regulator);
    if (std::abs(r5 - 0.481212) > 1e-5) out.fail("R(5) = " + std::to_string(r5));
    if (std::abs(r8 - 0.881374) > 1e-5) out.fail("R(8) = " + std::to_string(r8));
    if (out.pass) {
        char buf[160];
        std::snprintf(buf, sizeof buf, "%zu real fields, least regulator %.6Lf at D=%lld; R(5)=%.6f R(8)=%.6f", n, least,
                      (long long)at, r5, r8);
        out.detail << buf;
    }
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"qtorsion acceptance run"};
    unsigned workers = std::max(1u, std::thread::hardware_concurrency());
    std::vector<int> only;
    app.add_option("--workers", workers, "worker threads")->check(CLI::Range(1u, 1024u));
    app.add_option("--only", only, "run only these criteria")->check(CLI::Range(1, 10));
    CLI11_PARSE(app, argc, argv);

    // criterion 5 builds the census that 6 and 10 reuse
    const std::vector<std::pair<int, std::function<void(Context&, Outcome&)>>> criteria = {
        {1, class_groups}, {2, oracle_equivalence}, {3, s_ell_slope}, {4, tfw_combinatorics},
        {5, moment_exponents}, {6, tails}, {7, lattices}, {8, counting}, {9, prime_counting}, {10, regulators}};
    static const std::map<int, const char*> names = {
        {1, "class groups"}, {2, "S_l oracle"}, {3, "S_l slope"}, {4, "tFW combinatorics"},
        {5, "moment exponents"}, {6, "tails"}, {7, "lattices"}, {8, "point counts"},
        {9, "prime counting"}, {10, "regulator floor"}};

    Context ctx;
    ctx.workers = workers;
    int failed = 0;
    for (const auto& [id, run] : criteria) {
        if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
        Outcome out;
        const auto t0 = Clock::now();
        try {
            run(ctx, out);
        } catch (const std::exception& e) {
            out.fail(std::string("exception: ") + e.what());
        }
        failed += !out.pass;
        std::printf("criterion %2d %-18s %s  %.1f s  %s\n", id, names.at(id), out.pass ? "PASS" : "FAIL",
                    seconds_since(t0), out.detail.str().c_str());
        std::fflush(stdout);
    }
    return failed ? 1 : 0;
}
