#include "qtorsion/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <json.hpp>

#include "qtorsion/errors.hpp"
#include "qtorsion/heights.hpp"
#include "qtorsion/primes.hpp"
#include "qtorsion/tfw.hpp"
#include "detail/parallel.hpp"

namespace qtorsion::experiment {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

const char* version() { return QTORSION_VERSION; }

Format parse_format(const std::string& s) {
    if (s == "csv") return Format::csv;
    if (s == "json") return Format::json;
    throw ValidationError("unsupported format '" + s + "' (csv or json)");
}

const char* to_string(Format f) { return f == Format::csv ? "csv" : "json"; }

// -------------------------------------------------------------------- config

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\"'");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r\"'");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split_list(const std::string& v) {
    std::string s = trim(v);
    if (!s.empty() && s.front() == '[') s.erase(0, 1);
    if (!s.empty() && s.back() == ']') s.pop_back();
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(item);
    }
    return out;
}

double to_double(const std::string& key, const std::string& v) {
    try {
        std::size_t pos = 0;
        const double x = std::stod(trim(v), &pos);
        if (pos != trim(v).size()) throw std::invalid_argument(v);
        return x;
    } catch (const std::exception&) {
        throw ValidationError("config key '" + key + "': not a number: '" + v + "'");
    }
}

std::uint64_t to_uint(const std::string& key, const std::string& v) {
    const double x = to_double(key, v);
    if (x < 0 || x != std::floor(x) || x > 9.0e18)
        throw ValidationError("config key '" + key + "': not a nonnegative integer: '" + v + "'");
    return static_cast<std::uint64_t>(x);
}

} // namespace

void ExperimentConfig::set(const std::string& raw_key, const std::string& value) {
    std::string key = trim(raw_key);
    std::replace(key.begin(), key.end(), '_', '-');
    if (key == "sign") sign = arith::parse_sign_filter(trim(value));
    else if (key == "d-min") d_min = to_uint(key, value);
    else if (key == "d-max") d_max = to_uint(key, value);
    else if (key == "q-min") q_min = to_uint(key, value);
    else if (key == "ell") {
        ell.clear();
        for (const auto& x : split_list(value)) ell.push_back(unsigned(to_uint(key, x)));
    } else if (key == "r") {
        r.clear();
        for (const auto& x : split_list(value)) r.push_back(to_double(key, x));
    } else if (key == "z") {
        z.clear();
        for (const auto& x : split_list(value)) z.push_back(to_double(key, x));
    } else if (key == "c-cell") c_cell = to_double(key, value);
    else if (key == "c-tfw") c_tfw = to_double(key, value);
    else if (key == "c-gen") c_gen = to_double(key, value);
    else if (key == "c-frac") c_frac = to_double(key, value);
    else if (key == "tolerance") tolerance = to_double(key, value);
    else if (key == "workers") workers = unsigned(to_uint(key, value));
    else if (key == "cache") cache = trim(value);
    else if (key == "format") format = parse_format(trim(value));
    else if (key == "out") out = trim(value);
    else if (key == "checks") checks = split_list(value);
    else if (key == "tfw-sample") tfw_sample = to_uint(key, value);
    else if (key == "primes-x") primes_x = to_double(key, value);
    else if (key == "primes-c") primes_c = to_double(key, value);
    else throw ValidationError("unknown config key '" + raw_key + "'");
}

ExperimentConfig ExperimentConfig::parse(std::istream& in) {
    ExperimentConfig c;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (const auto h = line.find('#'); h != std::string::npos) line.erase(h);
        if (trim(line).empty()) continue;
        if (trim(line).front() == '[') continue;  // TOML table headers carry no meaning here
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw ValidationError("config line " + std::to_string(n) + ": expected key = value");
        c.set(line.substr(0, eq), line.substr(eq + 1));
    }
    return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IOError("cannot read config file " + path);
    return parse(in);
}

void ExperimentConfig::validate() const {
    if (d_min < 1 || d_max < d_min) throw ValidationError("empty |D| range: need 1 <= d-min <= d-max");
    if (ell.empty() || r.empty()) throw ValidationError("ell and r lists must be nonempty");
    for (unsigned l : ell)
        if (l < 2) throw ValidationError("ell values must be at least 2");
    for (double x : r)
        if (!(x >= 0) || !std::isfinite(x)) throw ValidationError("r values must be nonnegative");
    for (double x : z)
        if (!(x >= 1) || !std::isfinite(x)) throw ValidationError("z values must be at least 1");
    auto positive = [](double x) { return x > 0 && std::isfinite(x); };
    if (!positive(c_cell) || !positive(c_gen) || !positive(c_frac) || (c_tfw && !positive(*c_tfw)))
        throw ValidationError("constants must be positive");
    if (!(tolerance > 0 && tolerance < 1)) throw ValidationError("tolerance must lie in (0, 1)");
    if (workers < 1) throw ValidationError("workers must be at least 1");
    if (q_min && *q_min < 1) throw ValidationError("q-min must be at least 1");
    for (const auto& c : checks)
        if (c != "moments" && c != "tfw" && c != "s-ell" && c != "primes")
            throw ValidationError("unknown check '" + c + "'");
    if (!(primes_x >= 10) || !positive(primes_c)) throw ValidationError("primes-x >= 10 and primes-c > 0 required");
}

std::string cache_root_from_env() {
    const char* v = std::getenv("QTORSION_CACHE_DIR");
    return v ? std::string(v) : std::string();
}

// --------------------------------------------------------------------- cache

namespace {

std::string version_tag() { return std::string(cache_format) + " " + version(); }

std::string utc_now() {
    const auto t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&t, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

} // namespace

CacheRecord CacheRecord::from_structure(const ClassGroupStructure& S, const std::string& timestamp) {
    CacheRecord r;
    r.D = S.discriminant.value();
    r.h = S.order;
    r.divisors = S.elementary_divisors;
    if (S.discriminant.is_real()) {
        r.regulator = static_cast<double>(S.regulator);
        r.unit_norm = S.unit_norm;
    }
    r.timestamp = timestamp;
    r.version = version_tag();
    return r;
}

ClassGroupStructure CacheRecord::to_structure() const {
    ClassGroupStructure S;
    S.discriminant = arith::Discriminant::fundamental(D);
    S.order = h;
    S.elementary_divisors = divisors;
    if (D > 0) {
        S.regulator = regulator.value_or(0);
        S.unit_norm = unit_norm.value_or(0);
        S.narrow_order = S.unit_norm == -1 ? h : 2 * h;
    } else {
        S.narrow_order = h;
    }
    return S;
}

std::string CacheRecord::serialize() const {
    ojson j;
    j["D"] = D;
    j["h"] = h;
    j["divisors"] = divisors;
    j["regulator"] = regulator ? ojson(*regulator) : ojson(nullptr);
    j["unit_norm"] = unit_norm ? ojson(*unit_norm) : ojson(nullptr);
    j["timestamp"] = timestamp;
    j["version"] = version;
    return j.dump();
}

CacheRecord CacheRecord::parse(const std::string& line) {
    ojson j;
    try {
        j = ojson::parse(line);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("malformed cache line: ") + e.what());
    }
    try {
        CacheRecord r;
        r.D = j.at("D").get<std::int64_t>();
        r.h = j.at("h").get<std::uint64_t>();
        r.divisors = j.at("divisors").get<std::vector<std::uint64_t>>();
        if (!j.at("regulator").is_null()) r.regulator = j.at("regulator").get<double>();
        if (!j.at("unit_norm").is_null()) r.unit_norm = j.at("unit_norm").get<int>();
        r.timestamp = j.at("timestamp").get<std::string>();
        r.version = j.at("version").get<std::string>();
        if (!arith::is_fundamental_discriminant(r.D)) throw ValidationError("not a fundamental discriminant");
        std::uint64_t prod = 1;
        for (auto d : r.divisors) prod *= d;
        if (prod != r.h) throw ValidationError("divisors do not multiply to h");
        return r;
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        throw ValidationError(std::string("malformed cache record: ") + e.what());
    }
}

Cache::Cache(std::string path) : path_(std::move(path)) { load(); }

void Cache::load() {
    std::ifstream in(path_);
    if (!in) {
        if (fs::exists(path_)) throw IOError("cannot read cache " + path_);
        return;
    }
    std::vector<std::string> bad;
    std::string line;
    std::size_t n = 0;
    while (std::getline(in, line)) {
        ++n;
        if (line.empty()) continue;
        CacheRecord r;
        try {
            r = CacheRecord::parse(line);
        } catch (const ValidationError& e) {
            ++quarantined_;
            diagnostics_.push_back(path_ + ":" + std::to_string(n) + ": " + e.what());
            bad.push_back(line);
            continue;
        }
        if (r.version != version_tag())
            throw IOError("cache " + path_ + " line " + std::to_string(n) + " has version '" + r.version +
                          "', expected '" + version_tag() + "'; refusing stale data");
        records_.emplace(r.D, std::move(r));
    }
    in.close();
    if (!bad.empty()) {
        std::ofstream q(path_ + ".quarantine", std::ios::app);
        for (const auto& b : bad) q << b << '\n';
        if (!q) throw IOError("cannot write " + path_ + ".quarantine");
        compact();
    }
}

const CacheRecord* Cache::find(std::int64_t D) const {
    const auto it = records_.find(D);
    return it == records_.end() ? nullptr : &it->second;
}

void Cache::append(const std::vector<CacheRecord>& records) {
    if (records.empty()) return;
    if (const auto dir = fs::path(path_).parent_path(); !dir.empty()) fs::create_directories(dir);
    std::ofstream out(path_, std::ios::app);
    if (!out) throw IOError("cannot append to cache " + path_);
    for (const auto& r : records) {
        if (records_.count(r.D)) continue;
        out << r.serialize() << '\n';
        records_.emplace(r.D, r);
    }
    out.flush();
    if (!out) throw IOError("write to cache " + path_ + " failed");
}

void Cache::compact() {
    if (const auto dir = fs::path(path_).parent_path(); !dir.empty()) fs::create_directories(dir);
    const std::string tmp = path_ + ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc);
        if (!out) throw IOError("cannot write " + tmp);
        for (const auto& [d, r] : records_) out << r.serialize() << '\n';
        if (!out) throw IOError("write to " + tmp + " failed");
    }
    fs::rename(tmp, path_);
}

std::vector<CacheRecord> Cache::records() const {
    std::vector<CacheRecord> out;
    for (const auto& [d, r] : records_) out.push_back(r);
    return out;
}

// -------------------------------------------------------------------- census

namespace {

bool spot_sampled(std::int64_t D) {
    const std::uint64_t a = D < 0 ? std::uint64_t(-D) : std::uint64_t(D);
    return a % 101 == 0;
}

bool same_invariants(const ClassGroupStructure& a, const ClassGroupStructure& b) {
    if (a.order != b.order || a.elementary_divisors != b.elementary_divisors || a.unit_norm != b.unit_norm)
        return false;
    const double ra = double(a.regulator), rb = double(b.regulator);
    return std::fabs(ra - rb) <= 1e-9 * std::max(1.0, std::fabs(ra));
}

} // namespace

std::vector<ClassGroupStructure> census(const std::vector<arith::Discriminant>& family, Cache* cache,
                                        unsigned workers, CensusStats* stats) {
    std::vector<ClassGroupStructure> out(family.size());
    std::vector<char> hit(family.size(), 0);
    std::vector<std::size_t> todo;
    for (std::size_t i = 0; i < family.size(); ++i) {
        const CacheRecord* r = cache ? cache->find(family[i].value()) : nullptr;
        if (r) {
            out[i] = r->to_structure();
            hit[i] = 1;
        }
        if (!r || spot_sampled(family[i].value())) todo.push_back(i);
    }
    std::vector<ClassGroupStructure> fresh(todo.size());
    detail::parallel_for(todo.size(), workers,
                         [&](std::size_t k) { fresh[k] = classgroup::class_group(family[todo[k]]); });
    CensusStats st;
    st.fields = family.size();
    std::vector<CacheRecord> new_records;
    const std::string now = utc_now();
    for (std::size_t k = 0; k < todo.size(); ++k) {
        const std::size_t i = todo[k];
        if (hit[i]) {
            ++st.spot_checked;
            if (!same_invariants(out[i], fresh[k])) ++st.spot_mismatches;
            out[i] = fresh[k];
        } else {
            out[i] = fresh[k];
            ++st.computed;
            if (cache) new_records.push_back(CacheRecord::from_structure(fresh[k], now));
        }
    }
    st.from_cache = st.fields - st.computed;
    if (cache) cache->append(new_records);
    if (stats) *stats = st;
    return out;
}

// -------------------------------------------------------------------- report

std::string format_real(double x) {
    if (std::isnan(x)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

namespace {

const std::vector<std::string> reference_names{"trivial", "grh",  "hbp1", "hbp",     "epw",
                                               "fw",      "fm2",  "main", "moment2", "moment3"};

std::optional<double> ref_value(const moments::BoundComparison& c, const std::string& name, std::optional<bool>* pass) {
    for (std::size_t i = 0; i < c.references.size(); ++i) {
        if (c.references[i].name == name) {
            if (pass) *pass = c.passes[i];
            return c.references[i].value;
        }
    }
    if (pass) *pass = std::nullopt;
    return std::nullopt;
}

std::string format_r(double r) { return format_real(r); }

void write_csv_row(std::ostream& out, const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) out << ',';
        out << cells[i];
    }
    out << '\n';
}

ojson json_real(double x) { return std::stod(format_real(x)); }

} // namespace

std::vector<std::string> report_columns() {
    std::vector<std::string> cols{"family", "d",           "ell",         "r",        "Q_min",
                                  "Q_max",  "measured_slope", "residual", "count_slope", "predicted"};
    for (const auto& n : reference_names) cols.push_back(n);
    for (const auto& n : reference_names) cols.push_back("pass_" + n);
    return cols;
}

void export_report(const std::vector<moments::BoundComparison>& rows, Format format, std::ostream& out) {
    const auto cols = report_columns();
    if (format == Format::csv) {
        write_csv_row(out, cols);
        for (const auto& c : rows) {
            std::vector<std::string> cells{c.family,
                                           std::to_string(c.d),
                                           std::to_string(c.ell),
                                           format_r(c.r),
                                           std::to_string(c.q_min),
                                           std::to_string(c.q_max),
                                           format_real(c.measured.slope),
                                           format_real(c.measured.max_residual),
                                           format_real(c.count_slope.slope),
                                           format_real(c.predicted)};
            std::vector<std::string> flags;
            for (const auto& n : reference_names) {
                std::optional<bool> pass;
                const auto v = ref_value(c, n, &pass);
                cells.push_back(v ? format_real(*v) : "");
                flags.push_back(pass ? (*pass ? "true" : "false") : "");
            }
            cells.insert(cells.end(), flags.begin(), flags.end());
            write_csv_row(out, cells);
        }
        return;
    }
    ojson arr = ojson::array();
    for (const auto& c : rows) {
        ojson j;
        j["family"] = c.family;
        j["d"] = c.d;
        j["ell"] = c.ell;
        j["r"] = json_real(c.r);
        j["Q_min"] = c.q_min;
        j["Q_max"] = c.q_max;
        j["measured_slope"] = json_real(c.measured.slope);
        j["residual"] = json_real(c.measured.max_residual);
        j["count_slope"] = json_real(c.count_slope.slope);
        j["predicted"] = json_real(c.predicted);
        std::vector<std::pair<std::string, std::optional<bool>>> flags;
        for (const auto& n : reference_names) {
            std::optional<bool> pass;
            const auto v = ref_value(c, n, &pass);
            j[n] = v ? json_real(*v) : ojson(nullptr);
            flags.emplace_back("pass_" + n, pass);
        }
        for (const auto& [n, p] : flags) j[n] = p ? ojson(*p) : ojson(nullptr);
        arr.push_back(std::move(j));
    }
    out << arr.dump(2) << '\n';
}

void export_report(const std::vector<moments::BoundComparison>& rows, Format format, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IOError("cannot write " + path);
    export_report(rows, format, out);
    if (!out) throw IOError("write to " + path + " failed");
}

void export_windows(const std::vector<moments::MomentSeries>& series, Format format, std::ostream& out) {
    if (format == Format::csv) {
        write_csv_row(out, {"family", "ell", "r", "Q", "count", "sum"});
        for (const auto& s : series)
            for (const auto& w : s.windows) {
                const std::string sum = w.exact_sum ? w.exact_sum->str() : format_real(double(w.sum));
                write_csv_row(out, {arith::to_string(s.sign), std::to_string(s.ell), format_r(s.r),
                                    std::to_string(w.Q), std::to_string(w.count), sum});
            }
        return;
    }
    ojson arr = ojson::array();
    for (const auto& s : series)
        for (const auto& w : s.windows) {
            ojson j;
            j["family"] = arith::to_string(s.sign);
            j["ell"] = s.ell;
            j["r"] = json_real(s.r);
            j["Q"] = w.Q;
            j["count"] = w.count;
            if (w.exact_sum && *w.exact_sum <= std::numeric_limits<std::uint64_t>::max())
                j["sum"] = w.exact_sum->convert_to<std::uint64_t>();
            else
                j["sum"] = json_real(double(w.sum));
            arr.push_back(std::move(j));
        }
    out << arr.dump(2) << '\n';
}

// ------------------------------------------------------------------------ run

namespace {

std::uint64_t first_window(const ExperimentConfig& c) {
    if (c.q_min) return *c.q_min;
    std::uint64_t q = 1;
    while (q < c.d_min) q *= 2;
    return q;
}

std::vector<ClassGroupStructure> filter_sign(const std::vector<ClassGroupStructure>& all, arith::SignFilter s) {
    std::vector<ClassGroupStructure> out;
    for (const auto& S : all) {
        const bool neg = S.discriminant.is_imaginary();
        if (s == arith::SignFilter::both || (s == arith::SignFilter::negative) == neg) out.push_back(S);
    }
    return out;
}

void run_moments(const ExperimentConfig& cfg, const std::vector<ClassGroupStructure>& all, ExperimentResult& res) {
    std::vector<arith::SignFilter> signs;
    if (cfg.sign == arith::SignFilter::both)
        signs = {arith::SignFilter::negative, arith::SignFilter::positive, arith::SignFilter::both};
    else
        signs = {cfg.sign};
    const std::uint64_t q0 = first_window(cfg);
    std::uint64_t q1 = q0;
    while (2 * (2 * q1) <= cfg.d_max) q1 *= 2;
    if (2 * q0 > cfg.d_max) {
        res.checks.push_back({"moments", true, "no complete window (Q, 2Q] inside the |D| range"});
        return;
    }
    for (auto sign : signs) {
        const auto fields = filter_sign(all, sign);
        for (unsigned ell : cfg.ell)
            for (double r : cfg.r) {
                auto series = moments::moment_series(fields, sign, ell, r, q0, q1);
                series.d = 2;
                bool sane = true;
                for (const auto& w : series.windows)
                    if (w.sum + 1e-9L < static_cast<long double>(w.count) && r >= 0) sane = false;
                std::size_t nonempty = 0;
                for (const auto& w : series.windows) nonempty += w.count > 0;
                const std::string tag = std::string(arith::to_string(sign)) + " ell=" + std::to_string(ell) +
                                        " r=" + format_real(r);
                if (!sane) res.checks.push_back({"moments " + tag, false, "window sum below field count"});
                if (nonempty >= 3) {
                    auto cmp = moments::compare_bounds(series, cfg.tolerance);
                    bool ok = true;
                    std::string detail = "slope " + format_real(cmp.measured.slope);
                    for (std::size_t i = 0; i < cmp.references.size(); ++i) {
                        const auto& name = cmp.references[i].name;
                        if ((name == "main" || name == "moment2" || name == "moment3") && cmp.passes[i] &&
                            !*cmp.passes[i]) {
                            ok = false;
                            detail += "; exceeds " + name + " " + format_real(*cmp.references[i].value);
                        }
                    }
                    res.checks.push_back({"moments " + tag, ok, detail});
                    res.comparisons.push_back(std::move(cmp));
                }
                res.series.push_back(std::move(series));
            }
    }
}

void run_tfw(const ExperimentConfig& cfg, const std::vector<arith::Discriminant>& family, ExperimentResult& res) {
    if (family.empty()) return;
    const std::size_t n = std::min(cfg.tfw_sample, family.size());
    std::vector<std::size_t> picks;
    for (std::size_t k = 0; k < n; ++k) picks.push_back(k * family.size() / n);
    std::vector<std::string> failures(picks.size());
    detail::parallel_for(picks.size(), cfg.workers, [&](std::size_t k) {
        const auto& D = family[picks[k]];
        const heights::FieldContext K(D);
        for (unsigned ell : cfg.ell)
            for (double Z : cfg.z) {
                const auto rec = tfw::build_f_map(K, ell, Z, cfg.c_cell, false);
                const double c = cfg.c_tfw ? *cfg.c_tfw : tfw::default_c_tfw(D, cfg.c_cell);
                const auto r = tfw::verify_offdiagonal(K, rec, c);
                if (!r.holds || (r.pi_1 > 0 && !r.cauchy_schwarz) || r.witness_failures || !r.fiber_bound)
                    failures[k] += "D=" + std::to_string(D.value()) + " ell=" + std::to_string(ell) +
                                   " Z=" + format_real(Z) + " lhs=" + std::to_string(r.lhs) +
                                   " rhs=" + std::to_string(r.rhs) + "; ";
            }
    });
    std::string all;
    for (const auto& f : failures) all += f;
    res.checks.push_back({"tfw", all.empty(),
                          all.empty() ? std::to_string(n) + " fields verified" : all});
}

void run_s_ell(const ExperimentConfig& cfg, const std::vector<arith::Discriminant>& family, ExperimentResult& res) {
    std::vector<arith::Discriminant> small;
    for (const auto& D : family)
        if (D.absolute() <= 500) small.push_back(D);
    std::vector<std::string> failures(small.size());
    detail::parallel_for(small.size(), cfg.workers, [&](std::size_t k) {
        const heights::FieldContext K(small[k]);
        for (unsigned ell : cfg.ell)
            for (double Z : cfg.z) {
                if (Z > heights::default_oracle_ceiling) continue;
                std::set<field::FieldElement> a, b;
                for (const auto& x : heights::enumerate_s_ell(K, ell, heights::exact_bound(Z))) a.insert(x.beta);
                for (const auto& x : heights::s_ell_oracle(small[k], ell, Z)) b.insert(x.beta);
                if (a != b)
                    failures[k] += "D=" + std::to_string(small[k].value()) + " ell=" + std::to_string(ell) +
                                   " Z=" + format_real(Z) + "; ";
            }
    });
    std::string all;
    for (const auto& f : failures) all += f;
    res.checks.push_back({"s-ell", all.empty(),
                          all.empty() ? std::to_string(small.size()) + " fields with |D| <= 500 agree" : all});
}

void run_primes(const ExperimentConfig& cfg, const std::vector<arith::Discriminant>& family, ExperimentResult& res) {
    const auto rep = primes::detect_exceptional(family, cfg.primes_x, cfg.primes_c, cfg.workers);
    const double f = rep.exceptional_fraction();
    res.checks.push_back({"primes", f <= 0.05,
                          "exceptional fraction " + format_real(f) + " of " + std::to_string(family.size())});
}

void write_checks(const std::vector<CheckOutcome>& checks, std::ostream& out) {
    write_csv_row(out, {"check", "passed", "detail"});
    for (const auto& c : checks) {
        std::string d = c.detail;
        std::replace(d.begin(), d.end(), ',', ';');
        write_csv_row(out, {c.name, c.passed ? "true" : "false", d});
    }
}

} // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
    cfg.validate();
    ExperimentResult res;
    const auto family = arith::fundamental_discriminants(cfg.d_min - 1, cfg.d_max, cfg.sign);

    std::optional<Cache> cache;
    std::string cache_path = cfg.cache;
    if (cache_path.empty()) {
        const std::string root = cache_root_from_env();
        if (!root.empty()) cache_path = (fs::path(root) / "census.jsonl").string();
    }
    if (!cache_path.empty()) cache.emplace(cache_path);
    const auto structures = census(family, cache ? &*cache : nullptr, cfg.workers, &res.census);
    if (cache && cache->quarantined())
        res.checks.push_back({"cache", true, std::to_string(cache->quarantined()) + " corrupt lines quarantined"});
    if (res.census.spot_mismatches)
        res.checks.push_back({"cache", false, std::to_string(res.census.spot_mismatches) +
                                                  " cached records disagree with recomputation"});

    auto wants = [&](const char* c) { return std::find(cfg.checks.begin(), cfg.checks.end(), c) != cfg.checks.end(); };
    if (wants("tfw")) run_tfw(cfg, family, res);
    if (wants("s-ell")) run_s_ell(cfg, family, res);
    if (wants("primes")) run_primes(cfg, family, res);
    if (wants("moments")) run_moments(cfg, structures, res);

    fs::create_directories(cfg.out);
    const std::string ext = cfg.format == Format::csv ? ".csv" : ".json";
    const std::string report = (fs::path(cfg.out) / ("report" + ext)).string();
    export_report(res.comparisons, cfg.format, report);
    res.artifacts.push_back(report);
    const std::string windows = (fs::path(cfg.out) / ("windows" + ext)).string();
    {
        std::ofstream out(windows, std::ios::trunc);
        if (!out) throw IOError("cannot write " + windows);
        export_windows(res.series, cfg.format, out);
    }
    res.artifacts.push_back(windows);
    const std::string checks = (fs::path(cfg.out) / "checks.csv").string();
    {
        std::ofstream out(checks, std::ios::trunc);
        if (!out) throw IOError("cannot write " + checks);
        write_checks(res.checks, out);
    }
    res.artifacts.push_back(checks);

    res.exit_code = 0;
    for (const auto& c : res.checks)
        if (!c.passed) res.exit_code = 2;
    return res;
}

} // namespace qtorsion::experiment
