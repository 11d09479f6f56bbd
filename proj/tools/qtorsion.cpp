#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qtorsion/arith.hpp"
#include "qtorsion/classgroup.hpp"
#include "qtorsion/errors.hpp"
#include "qtorsion/experiment.hpp"
#include "qtorsion/heights.hpp"
#include "qtorsion/moments.hpp"
#include "qtorsion/primes.hpp"
#include "qtorsion/tfw.hpp"
#include "qtorsion/units_lattice.hpp"

using namespace qtorsion;
namespace ex = qtorsion::experiment;
using ojson = nlohmann::ordered_json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_verify = 2;
constexpr int exit_infra = 3;

std::string real(double x) { return ex::format_real(x); }

// Flags shared by every subcommand; kept as strings so that only the ones given
// on the command line override the config file.
struct CommonFlags {
    std::map<std::string, std::string> values;

    void attach(CLI::App* app, const std::vector<std::string>& names) {
        for (const auto& n : names) {
            auto& slot = values[n];
            app->add_option("--" + n, slot, help(n));
        }
    }
    static std::string help(const std::string& n) {
        static const std::map<std::string, std::string> h{
            {"d-min", "least |D| (inclusive)"},
            {"d-max", "largest |D| (inclusive)"},
            {"sign", "negative, positive or both"},
            {"ell", "torsion prime(s), comma separated"},
            {"r", "moment exponent(s), comma separated"},
            {"z", "height / norm bound(s), comma separated"},
            {"c-cell", "cell diameter bound"},
            {"c-tfw", "height constant for the off-diagonal witnesses"},
            {"tolerance", "additive exponent tolerance"},
            {"workers", "worker threads"},
            {"cache", "census cache file (JSONL)"},
            {"format", "csv or json"},
            {"out", "output file or directory"},
            {"q-min", "first dyadic window (Q, 2Q]"},
        };
        const auto it = h.find(n);
        return it == h.end() ? n : it->second;
    }
    void apply(ex::ExperimentConfig& cfg) const {
        for (const auto& [k, v] : values)
            if (!v.empty()) cfg.set(k, v);
    }
    bool given(const std::string& n) const {
        const auto it = values.find(n);
        return it != values.end() && !it->second.empty();
    }
};

const std::vector<std::string> all_flags{"d-min", "d-max", "sign",   "ell",    "r",     "z",     "c-cell",
                                         "c-tfw", "tolerance", "workers", "cache", "format", "out", "q-min"};

ex::ExperimentConfig make_config(const CommonFlags& f, const std::string& config_path) {
    ex::ExperimentConfig cfg = config_path.empty() ? ex::ExperimentConfig{} : ex::ExperimentConfig::load(config_path);
    f.apply(cfg);
    return cfg;
}

// Writes to --out when it names a file, stdout otherwise.
struct Output {
    std::ofstream file;
    std::ostream* os = &std::cout;
    explicit Output(const std::string& path) {
        if (path.empty() || path == "-") return;
        file.open(path, std::ios::trunc);
        if (!file) throw IOError("cannot write " + path);
        os = &file;
    }
    std::ostream& operator()() { return *os; }
};

std::string divisors_string(const std::vector<std::uint64_t>& d) {
    std::string s = "[";
    for (std::size_t i = 0; i < d.size(); ++i) s += (i ? " " : "") + std::to_string(d[i]);
    return s + "]";
}

std::unique_ptr<ex::Cache> open_cache(const ex::ExperimentConfig& cfg) {
    std::string path = cfg.cache;
    if (path.empty()) {
        const auto root = ex::cache_root_from_env();
        if (!root.empty()) path = root + "/census.jsonl";
    }
    if (path.empty()) return nullptr;
    auto c = std::make_unique<ex::Cache>(path);
    for (const auto& d : c->diagnostics()) std::cerr << "quarantined: " << d << '\n';
    return c;
}

arith::Discriminant parse_field(std::int64_t D) { return arith::Discriminant::fundamental(D); }

// ------------------------------------------------------------------ commands

int cmd_census(const ex::ExperimentConfig& cfg) {
    cfg.validate();
    const auto family = arith::fundamental_discriminants(cfg.d_min - 1, cfg.d_max, cfg.sign);
    auto cache = open_cache(cfg);
    ex::CensusStats st;
    const auto S = ex::census(family, cache.get(), cfg.workers, &st);
    Output out(cfg.out == "qtorsion-report" ? "" : cfg.out);
    if (cfg.format == ex::Format::csv) {
        out() << "D,h,divisors,regulator,unit_norm\n";
        for (const auto& s : S) {
            out() << s.discriminant.value() << ',' << s.order << ',' << divisors_string(s.elementary_divisors) << ',';
            if (s.discriminant.is_real()) out() << real(double(s.regulator)) << ',' << s.unit_norm;
            else out() << ',';
            out() << '\n';
        }
    } else {
        ojson arr = ojson::array();
        for (const auto& s : S) {
            ojson j;
            j["D"] = s.discriminant.value();
            j["h"] = s.order;
            j["divisors"] = s.elementary_divisors;
            j["regulator"] = s.discriminant.is_real() ? ojson(std::stod(real(double(s.regulator)))) : ojson(nullptr);
            j["unit_norm"] = s.discriminant.is_real() ? ojson(s.unit_norm) : ojson(nullptr);
            arr.push_back(j);
        }
        out() << arr.dump(2) << '\n';
    }
    std::cerr << st.fields << " fields, " << st.from_cache << " from cache, " << st.computed << " computed, "
              << st.spot_checked << " spot-checked\n";
    if (st.spot_mismatches) {
        std::cerr << st.spot_mismatches << " cached records disagree with recomputation\n";
        return exit_verify;
    }
    return exit_ok;
}

int cmd_classgroup(std::int64_t D, bool analytic, const ex::ExperimentConfig& cfg) {
    const auto d = parse_field(D);
    const classgroup::ClassGroup G(d);
    const auto& S = G.structure();
    Output out(cfg.out == "qtorsion-report" ? "" : cfg.out);
    ojson j;
    j["D"] = D;
    j["h"] = S.order;
    j["divisors"] = S.elementary_divisors;
    j["narrow_h"] = S.narrow_order;
    if (d.is_real()) {
        j["regulator"] = std::stod(real(double(S.regulator)));
        j["unit_norm"] = S.unit_norm;
    }
    ojson tors = ojson::object();
    for (unsigned l : cfg.ell) tors[std::to_string(l)] = classgroup::torsion_count(S, l);
    j["torsion"] = tors;
    ojson reps = ojson::array();
    for (const auto& f : G.representatives()) reps.push_back(forms::to_string(f));
    j["representatives"] = reps;
    if (analytic) {
        const auto a = classgroup::analytic_check(d);
        j["analytic"] = std::stod(real(a.value));
        j["analytic_error"] = std::stod(real(a.error_bound));
    }
    if (cfg.format == ex::Format::json) {
        out() << j.dump(2) << '\n';
    } else {
        out() << "D,h,divisors,narrow_h,regulator,unit_norm";
        for (unsigned l : cfg.ell) out() << ",torsion_" << l;
        out() << '\n' << D << ',' << S.order << ',' << divisors_string(S.elementary_divisors) << ',' << S.narrow_order
              << ',';
        if (d.is_real()) out() << real(double(S.regulator)) << ',' << S.unit_norm;
        else out() << ',';
        for (unsigned l : cfg.ell) out() << ',' << classgroup::torsion_count(S, l);
        out() << '\n';
    }
    return exit_ok;
}

int cmd_s_ell(std::int64_t D, bool oracle, bool compare, const ex::ExperimentConfig& cfg) {
    const auto d = parse_field(D);
    const heights::FieldContext K(d);
    Output out(cfg.out == "qtorsion-report" ? "" : cfg.out);
    int code = exit_ok;
    out() << "ell,Z,method,beta,P1,P2,height\n";
    for (unsigned l : cfg.ell)
        for (double Z : cfg.z) {
            std::vector<heights::SEllElement> els;
            if (oracle) els = heights::s_ell_oracle(d, l, Z);
            else els = heights::enumerate_s_ell(K, l, heights::exact_bound(Z));
            for (const auto& e : els)
                out() << l << ',' << real(Z) << ',' << (oracle ? "oracle" : "enumerate") << ',' << e.beta.to_string()
                      << ',' << field::to_string(e.P1) << ',' << field::to_string(e.P2) << ','
                      << real(double(e.height.value)) << '\n';
            if (compare) {
                std::set<field::FieldElement> a, b;
                for (const auto& e : heights::enumerate_s_ell(K, l, heights::exact_bound(Z))) a.insert(e.beta);
                for (const auto& e : heights::s_ell_oracle(d, l, Z)) b.insert(e.beta);
                std::cerr << "ell=" << l << " Z=" << real(Z) << ": enumerate " << a.size() << ", oracle " << b.size()
                          << (a == b ? " (equal)" : " (MISMATCH)") << '\n';
                if (a != b) code = exit_verify;
            }
        }
    return code;
}

int cmd_tfw(std::int64_t D, double eps, const ex::ExperimentConfig& cfg) {
    const auto d = parse_field(D);
    const heights::FieldContext K(d);
    Output out(cfg.out == "qtorsion-report" ? "" : cfg.out);
    int code = exit_ok;
    out() << "D,ell,Z,lhs,pi_1,s_ell,rhs,holds,pairs,witness_failures,fibers,cauchy_schwarz,fiber_bound,c_tfw,"
             "bound,torsion,ratio\n";
    for (unsigned l : cfg.ell)
        for (double Z : cfg.z) {
            const auto rec = tfw::build_f_map(K, l, Z, cfg.c_cell, false);
            const double c = cfg.c_tfw ? *cfg.c_tfw : tfw::default_c_tfw(d, cfg.c_cell);
            const auto r = tfw::verify_offdiagonal(K, rec, c);
            out() << D << ',' << l << ',' << real(Z) << ',' << r.lhs << ',' << r.pi_1 << ',' << r.s_ell << ','
                  << r.rhs << ',' << (r.holds ? "true" : "false") << ',' << r.pairs << ',' << r.witness_failures << ','
                  << r.nonempty_fibers << ',' << (r.cauchy_schwarz ? "true" : "false") << ','
                  << (r.fiber_bound ? "true" : "false") << ',' << real(c) << ',';
            if (r.pi_1 > 0) {
                const auto b = tfw::evaluate_tfw_bound(K, l, Z, eps, c, cfg.c_cell);
                out() << real(b.bound_value) << ',' << b.actual_torsion << ',' << real(b.ratio);
            } else {
                out() << ",,";
            }
            out() << '\n';
            if (!r.holds || (r.pi_1 > 0 && !r.cauchy_schwarz) || r.witness_failures || !r.fiber_bound)
                code = exit_verify;
        }
    return code;
}

int cmd_primes(std::optional<std::int64_t> D, double x, double c, const ex::ExperimentConfig& cfg) {
    Output out(cfg.out == "qtorsion-report" ? "" : cfg.out);
    if (D) {
        const auto r = primes::prime_counts(parse_field(*D), x);
        out() << "D,x,pi_K,pi_K_1\n" << *D << ',' << real(x) << ',' << r.pi_K << ',' << r.pi_K_1 << '\n';
        return exit_ok;
    }
    cfg.validate();
    const auto family = arith::fundamental_discriminants(cfg.d_min - 1, cfg.d_max, cfg.sign);
    const auto rep = primes::detect_exceptional(family, x, c, cfg.workers);
    out() << "D,pi_K_1,threshold,passing\n";
    for (std::size_t i = 0; i < family.size(); ++i)
        out() << family[i].value() << ',' << rep.pi_K_1[i] << ',' << real(rep.threshold) << ','
              << (double(rep.pi_K_1[i]) >= rep.threshold ? "true" : "false") << '\n';
    std::cerr << "exceptional " << rep.exceptional.size() << " of " << family.size() << " (fraction "
              << real(rep.exceptional_fraction()) << ")\n";
    return exit_ok;
}

int cmd_moments(const ex::ExperimentConfig& base) {
    ex::ExperimentConfig cfg = base;
    cfg.checks = {"moments"};
    const auto res = ex::run_experiment(cfg);
    for (const auto& a : res.artifacts) std::cerr << "wrote " << a << '\n';
    for (const auto& c : res.checks)
        std::cerr << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << c.detail << '\n';
    return res.exit_code;
}

int cmd_lattice(const std::string& path, const ex::ExperimentConfig& cfg) {
    std::ifstream file;
    std::istream* in = &std::cin;
    if (!path.empty() && path != "-") {
        file.open(path);
        if (!file) throw IOError("cannot read " + path);
        in = &file;
    }
    const auto L = units::Lattice::parse(*in);
    const auto M = units::minkowski_reduce(L);
    Output out(cfg.out == "qtorsion-report" ? "" : cfg.out);
    out() << "# minkowski basis, rank " << L.rank() << ", covolume " << real(double(L.covolume())) << '\n';
    const auto& B = M.basis;
    for (std::size_t i = 0; i < B.rank(); ++i) {
        if (B.is_exact()) {
            const auto& row = B.exact_basis()[i];
            for (std::size_t j = 0; j < row.size(); ++j) out() << (j ? " " : "") << row[j].str();
        } else {
            const auto& row = B.basis()[i];
            for (std::size_t j = 0; j < row.size(); ++j) out() << (j ? " " : "") << real(double(row[j]));
        }
        out() << "    # |b| = " << real(double(B.norm(i))) << '\n';
    }
    out() << "# second theorem ratio " << real(double(units::second_theorem_ratio(L, B.basis()))) << '\n';
    return exit_ok;
}

int cmd_report(const ex::ExperimentConfig& cfg) {
    const auto res = ex::run_experiment(cfg);
    for (const auto& a : res.artifacts) std::cerr << "wrote " << a << '\n';
    for (const auto& c : res.checks)
        std::cerr << (c.passed ? "ok   " : "FAIL ") << c.name << ": " << c.detail << '\n';
    std::cerr << res.census.fields << " fields (" << res.census.from_cache << " cached)\n";
    return res.exit_code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Class groups, l-torsion and height-bounded sets over quadratic fields"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(ex::version()));

    std::string config_path;
    std::int64_t D = 0;
    double eps = 0.01, x = 1000, c = primes::default_lotz_c;
    bool analytic = false, oracle = false, compare = false;
    std::optional<std::int64_t> primes_d;
    std::string lattice_path;

    CommonFlags flags;
    auto* census = app.add_subcommand("census", "class groups of every fundamental discriminant in a range");
    flags.attach(census, all_flags);
    census->add_option("--config", config_path, "config file");

    auto* cg = app.add_subcommand("classgroup", "class group, regulator and torsion of one field");
    cg->add_option("D", D, "fundamental discriminant")->required()->allow_extra_args(false);
    cg->add_flag("--analytic", analytic, "also evaluate the analytic class number formula");
    CommonFlags cg_flags;
    cg_flags.attach(cg, {"ell", "format", "out"});

    auto* sell = app.add_subcommand("s-ell", "elements of S_l(K, Z)");
    sell->add_option("D", D, "fundamental discriminant")->required();
    sell->add_flag("--oracle", oracle, "use the brute-force minimal polynomial search");
    sell->add_flag("--compare", compare, "compare both methods (exit 2 on mismatch)");
    CommonFlags sell_flags;
    sell_flags.attach(sell, {"ell", "z", "out"});

    auto* tv = app.add_subcommand("tfw-verify", "f-map fibers and off-diagonal witnesses for one field");
    tv->add_option("D", D, "fundamental discriminant")->required();
    tv->add_option("--eps", eps, "exponent slack in the torsion functional");
    CommonFlags tv_flags;
    tv_flags.attach(tv, {"ell", "z", "c-cell", "c-tfw", "out"});

    auto* pr = app.add_subcommand("primes", "prime ideal counts or the exceptional-set detector");
    pr->add_option("D", primes_d, "single field (otherwise the --d-min/--d-max family)");
    pr->add_option("--x", x, "norm bound");
    pr->add_option("--c", c, "detector constant");
    CommonFlags pr_flags;
    pr_flags.attach(pr, {"d-min", "d-max", "sign", "workers", "out"});

    auto* mo = app.add_subcommand("moments", "moment sums over dyadic windows and the exponent table");
    CommonFlags mo_flags;
    mo_flags.attach(mo, all_flags);
    mo->add_option("--config", config_path, "config file");

    auto* la = app.add_subcommand("lattice", "Minkowski basis of a lattice (one basis vector per line)");
    la->add_option("file", lattice_path, "input file, '-' or omitted for stdin");
    CommonFlags la_flags;
    la_flags.attach(la, {"out"});

    auto* rep = app.add_subcommand("report", "full experiment: census, checks, moments, report files");
    CommonFlags rep_flags;
    rep_flags.attach(rep, all_flags);
    rep->add_option("--config", config_path, "config file (flags override it)");
    std::string checks;
    rep->add_option("--checks", checks, "moments, tfw, s-ell, primes (comma separated)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? exit_ok : exit_infra;
    }

    try {
        if (census->parsed()) return cmd_census(make_config(flags, config_path));
        if (cg->parsed()) return cmd_classgroup(D, analytic, make_config(cg_flags, ""));
        if (sell->parsed()) {
            auto cfg = make_config(sell_flags, "");
            if (!sell_flags.given("z")) cfg.z = {100};
            if (!sell_flags.given("ell")) cfg.ell = {2};
            return cmd_s_ell(D, oracle, compare, cfg);
        }
        if (tv->parsed()) return cmd_tfw(D, eps, make_config(tv_flags, ""));
        if (pr->parsed()) return cmd_primes(primes_d, x, c, make_config(pr_flags, ""));
        if (mo->parsed()) return cmd_moments(make_config(mo_flags, config_path));
        if (la->parsed()) return cmd_lattice(lattice_path, make_config(la_flags, ""));
        if (rep->parsed()) {
            auto cfg = make_config(rep_flags, config_path);
            if (!checks.empty()) cfg.set("checks", checks);
            return cmd_report(cfg);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_infra;
    }
    return exit_infra;
}
