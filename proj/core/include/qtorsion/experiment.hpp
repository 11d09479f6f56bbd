#pragma once

// Experiment plumbing: configuration, the JSONL census cache, the census
// itself, report export and the end-to-end run.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "qtorsion/arith.hpp"
#include "qtorsion/classgroup.hpp"
#include "qtorsion/moments.hpp"

namespace qtorsion::experiment {

using classgroup::ClassGroupStructure;

/// Library version, also the code tag stored in cache records.
const char* version();
/// Format tag of cache lines; records with another tag are refused.
inline constexpr const char* cache_format = "qtorsion-cache/1";

enum class Format { csv, json };
Format parse_format(const std::string& s);
const char* to_string(Format f);

struct ExperimentConfig {
    arith::SignFilter sign = arith::SignFilter::both;
    std::uint64_t d_min = 1;      // |D| in [d_min, d_max]
    std::uint64_t d_max = 1000;
    std::optional<std::uint64_t> q_min;  // first window (Q, 2Q]; default: least power of two >= d_min
    std::vector<unsigned> ell{3};
    std::vector<double> r{1};
    std::vector<double> z{20, 60};
    double c_cell = 1.0;
    std::optional<double> c_tfw;  // default exp(2 C_cell (r + s)) per field
    double c_gen = 8.0;
    double c_frac = 16.0;
    double tolerance = 0.1;
    unsigned workers = 1;
    std::string cache;            // empty: no cache
    Format format = Format::csv;
    std::string out = "qtorsion-report";
    std::vector<std::string> checks{"moments"};  // any of moments, tfw, s-ell, primes
    std::size_t tfw_sample = 100;
    double primes_x = 1000;
    double primes_c = 0.3;

    /// key = value; keys use dashes or underscores. ValidationError on unknown keys or bad values.
    void set(const std::string& key, const std::string& value);
    /// Lines "key = value", '#' comments, blank lines ignored.
    static ExperimentConfig parse(std::istream& in);
    static ExperimentConfig load(const std::string& path);
    /// ValidationError unless ranges are nonempty, constants positive and 0 < tolerance < 1.
    void validate() const;
};

/// Cache root from QTORSION_CACHE_DIR (empty when unset).
std::string cache_root_from_env();

// --------------------------------------------------------------------- cache

struct CacheRecord {
    std::int64_t D = 0;
    std::uint64_t h = 1;
    std::vector<std::uint64_t> divisors;
    std::optional<double> regulator;
    std::optional<int> unit_norm;
    std::string timestamp;
    std::string version;

    static CacheRecord from_structure(const ClassGroupStructure& S, const std::string& timestamp);
    ClassGroupStructure to_structure() const;
    /// One JSON object, keys in fixed order, no trailing newline.
    std::string serialize() const;
    /// ValidationError on malformed input.
    static CacheRecord parse(const std::string& line);

    friend bool operator==(const CacheRecord&, const CacheRecord&) = default;
};

/// Append-only JSONL file, one record per discriminant. Malformed lines are moved to
/// `<path>.quarantine`; records from another format or code version make open() fail.
class Cache {
public:
    explicit Cache(std::string path);

    const std::string& path() const noexcept { return path_; }
    std::size_t size() const noexcept { return records_.size(); }
    std::size_t quarantined() const noexcept { return quarantined_; }
    const std::vector<std::string>& diagnostics() const noexcept { return diagnostics_; }

    const CacheRecord* find(std::int64_t D) const;
    /// Appends records not yet present (later duplicates are ignored).
    void append(const std::vector<CacheRecord>& records);
    /// Rewrites the file sorted by D, one line per record.
    void compact();
    std::vector<CacheRecord> records() const;

private:
    void load();

    std::string path_;
    std::map<std::int64_t, CacheRecord> records_;
    std::size_t quarantined_ = 0;
    std::vector<std::string> diagnostics_;
};

// -------------------------------------------------------------------- census

struct CensusStats {
    std::size_t fields = 0;
    std::size_t from_cache = 0;
    std::size_t computed = 0;
    std::size_t spot_checked = 0;
    std::size_t spot_mismatches = 0;
};

/// Class group structures for the family, in family order, reusing and extending the cache.
/// About 1% of cached entries (chosen by |D|) are recomputed and compared.
std::vector<ClassGroupStructure> census(const std::vector<arith::Discriminant>& family, Cache* cache,
                                        unsigned workers, CensusStats* stats = nullptr);

// -------------------------------------------------------------------- report

/// "%.12g".
std::string format_real(double x);

/// CSV header of the comparison table.
std::vector<std::string> report_columns();
void export_report(const std::vector<moments::BoundComparison>& rows, Format format, std::ostream& out);
void export_report(const std::vector<moments::BoundComparison>& rows, Format format, const std::string& path);

/// Per-window sums: family, ell, r, Q, count, sum.
void export_windows(const std::vector<moments::MomentSeries>& series, Format format, std::ostream& out);

// ------------------------------------------------------------------------ run

struct CheckOutcome {
    std::string name;
    bool passed = true;
    std::string detail;
};

struct ExperimentResult {
    int exit_code = 0;  // 0 pass, 2 verification failure, 3 infrastructure error
    CensusStats census;
    std::vector<moments::MomentSeries> series;
    std::vector<moments::BoundComparison> comparisons;
    std::vector<CheckOutcome> checks;
    std::vector<std::string> artifacts;
};

/// Census, requested verifications, moments and report files under config.out.
/// Validation and I/O problems throw; failed checks give exit code 2.
ExperimentResult run_experiment(const ExperimentConfig& config);

} // namespace qtorsion::experiment
