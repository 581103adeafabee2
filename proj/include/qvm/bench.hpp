#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvm/assembler.hpp"
#include "qvm/engine.hpp"
#include "qvm/programs.hpp"

// Classical-vs-Grover factoring sweep. For each n the harness runs the
// trial-division program and the corrected Grover program and records one
// row per run. Success probability is the probability mass the d1 marginal
// puts on proper values dividing n.

namespace qvm {

struct BenchRecord {
    unsigned n = 0;
    std::string algorithm;  // "classical" | "grover"
    std::uint64_t steps = 0;
    std::size_t branch_peak = 0;
    double wall_time_s = 0.0;
    double success_probability = 0.0;
};

namespace bench_detail {

inline constexpr std::size_t kFactorCell = 1;  // both corpus programs report in d1

inline unsigned candidate_bits(unsigned n) {
    const unsigned root = static_cast<unsigned>(std::floor(std::sqrt(static_cast<double>(n))));
    const unsigned span = std::max(2u, root);
    unsigned bits = 0;
    while ((1u << bits) < span) ++bits;
    return bits;
}

inline unsigned grover_iterations(unsigned candidate_bits) {
    const double m = static_cast<double>(1u << candidate_bits);
    const auto k = static_cast<unsigned>(std::floor(std::numbers::pi / 4.0 * std::sqrt(m)));
    return std::max(1u, k);
}

inline double divisor_mass(const std::map<Word, double>& dist, unsigned n) {
    double mass = 0.0;
    for (const auto& [value, p] : dist) {
        if (value > 1 && value <= n && n % value == 0) mass += p;
    }
    return mass;
}

inline BenchRecord run_one(std::string_view source, const DefineMap& defines, unsigned n,
                           std::string algorithm, const MachineSettings& settings,
                           const RunLimits& limits) {
    ParseResult parsed = parse(source, defines, settings);
    if (!parsed.ok()) {
        throw std::runtime_error("bench program failed to parse for n=" + std::to_string(n));
    }
    const auto start = std::chrono::steady_clock::now();
    RunOutcome outcome = run(*parsed.program, limits);
    const auto elapsed = std::chrono::steady_clock::now() - start;
    if (outcome.fault) {
        throw std::runtime_error("bench run faulted at n=" + std::to_string(n) + " (" + algorithm +
                                 "): " + outcome.fault->message);
    }
    if (!outcome.halted) {
        throw std::runtime_error("bench run timed out at n=" + std::to_string(n) + " (" + algorithm +
                                 ")");
    }

    BenchRecord record;
    record.n = n;
    record.algorithm = std::move(algorithm);
    record.steps = outcome.steps_executed;
    record.branch_peak = outcome.branch_peak;
    record.wall_time_s = std::chrono::duration<double>(elapsed).count();
    record.success_probability = divisor_mass(distribution(outcome.state, kFactorCell), n);
    return record;
}

}  // namespace bench_detail

// One classical and one Grover record per n, sorted by (n, algorithm).
inline std::vector<BenchRecord> run_bench(unsigned n_min, unsigned n_max,
                                          const MachineSettings& settings = {},
                                          const RunLimits& limits = {}) {
    if (n_min < 4 || n_min > n_max) {
        throw std::invalid_argument("bench range requires 4 <= n_min <= n_max");
    }
    if (settings.word_width >= 64 || n_max > (std::uint64_t{1} << (settings.word_width - 1))) {
        throw std::invalid_argument("bench range exceeds 2^(word_width-1)");
    }

    std::vector<BenchRecord> records;
    for (unsigned n = n_min; n <= n_max; ++n) {
        records.push_back(bench_detail::run_one(programs::kTrialDivision, {{"NUMBER1", n}}, n,
                                                "classical", settings, limits));
        const unsigned bits = bench_detail::candidate_bits(n);
        DefineMap defines{{"NUMBER1", n},
                          {"NUMBER2", bits},
                          {"ITERATIONS", bench_detail::grover_iterations(bits)}};
        records.push_back(
            bench_detail::run_one(programs::kGroverFixed, defines, n, "grover", settings, limits));
    }
    std::sort(records.begin(), records.end(), [](const BenchRecord& a, const BenchRecord& b) {
        return a.n != b.n ? a.n < b.n : a.algorithm < b.algorithm;
    });
    return records;
}

// Fixed column set; everything except wall_time_s is deterministic.
inline std::string bench_to_csv(const std::vector<BenchRecord>& records) {
    std::ostringstream out;
    out << "n,algorithm,steps,branch_peak,wall_time_s,success_probability\n";
    char buf[64];
    for (const auto& r : records) {
        out << r.n << ',' << r.algorithm << ',' << r.steps << ',' << r.branch_peak << ',';
        std::snprintf(buf, sizeof(buf), "%.6f", r.wall_time_s);
        out << buf << ',';
        std::snprintf(buf, sizeof(buf), "%.9f", r.success_probability);
        out << buf << '\n';
    }
    return out.str();
}

}  // namespace qvm
