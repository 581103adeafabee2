// qvm: assembler + superposition virtual machine front end.
//
//   qvm run     <file.qasm> [options]   assemble, execute, report marginals
//   qvm trace   <file.qasm> [options]   as run, plus per-step trace records
//   qvm sample  <file.qasm> [options]   run then draw seeded measurements
//   qvm bench   <n_min> <n_max>         classical-vs-Grover factoring sweep
//   qvm check   <file.qasm> [options]   sparse engine vs dense reference
//
// Exit codes: 0 ok, 2 parse error, 3 runtime fault, 4 step limit exceeded.

#include <cmath>
#include <cstdint>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qvm/assembler.hpp"
#include "qvm/bench.hpp"
#include "qvm/dense_oracle.hpp"
#include "qvm/engine.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitParse = 2;
constexpr int kExitFault = 3;
constexpr int kExitTimeout = 4;

struct CommonOptions {
    std::string file;
    std::vector<std::string> defines;
    unsigned width = 8;
    unsigned cells = 32;
    std::uint64_t max_steps = 1000000;
    unsigned threads = 1;
    bool json = false;
    std::string cells_of_interest;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool with_file = true) {
    if (with_file) cmd->add_option("file", opts.file, "program file (.qasm)")->required();
    cmd->add_option("--define", opts.defines, "textual define NAME=INT (repeatable)");
    cmd->add_option("--width", opts.width, "cell word width in bits");
    cmd->add_option("--cells", opts.cells, "number of data cells");
    cmd->add_option("--max-steps", opts.max_steps, "global step limit");
    cmd->add_option("--threads", opts.threads, "branch groups evaluated in parallel");
    cmd->add_flag("--json", opts.json, "emit the report as JSON");
    cmd->add_option("--cells-of-interest", opts.cells_of_interest,
                    "comma-separated cells to report, e.g. d4,d1");
}

bool parse_defines(const std::vector<std::string>& raw, qvm::DefineMap& out) {
    for (const std::string& item : raw) {
        const std::size_t eq = item.find('=');
        if (eq == std::string::npos || eq == 0) {
            std::cerr << "error: bad define '" << item << "', expected NAME=INT\n";
            return false;
        }
        try {
            out[item.substr(0, eq)] = std::stoll(item.substr(eq + 1));
        } catch (const std::exception&) {
            std::cerr << "error: bad define value in '" << item << "'\n";
            return false;
        }
    }
    return true;
}

bool parse_cell_list(const std::string& raw, unsigned cell_count, std::vector<std::size_t>& out) {
    std::stringstream ss(raw);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::string digits = item[0] == 'd' ? item.substr(1) : item;
        try {
            const std::size_t index = std::stoul(digits);
            if (index >= cell_count) {
                std::cerr << "error: cell " << item << " out of range\n";
                return false;
            }
            out.push_back(index);
        } catch (const std::exception&) {
            std::cerr << "error: bad cell reference '" << item << "'\n";
            return false;
        }
    }
    return true;
}

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path);
    if (!in) {
        std::cerr << "error: cannot open '" << path << "'\n";
        return false;
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    out = buf.str();
    return true;
}

void print_diagnostics(const std::vector<qvm::ParseDiagnostic>& diagnostics,
                       const std::string& file) {
    for (const auto& d : diagnostics) {
        std::cerr << file << ':' << d.line << ':' << d.column << ": "
                  << (d.severity == qvm::Severity::error ? "error" : "warning") << ": " << d.message
                  << '\n';
    }
}

// Returns the parsed program or nullopt after printing diagnostics.
std::optional<qvm::Program> assemble(const CommonOptions& opts) {
    std::string source;
    if (!read_file(opts.file, source)) return std::nullopt;
    qvm::DefineMap defines;
    if (!parse_defines(opts.defines, defines)) return std::nullopt;
    qvm::MachineSettings settings{opts.width, opts.cells, opts.max_steps};
    qvm::ParseResult result = qvm::parse(source, defines, settings);
    print_diagnostics(result.diagnostics, opts.file);
    if (result.ok()) {
        print_diagnostics(qvm::validate(*result.program), opts.file);
    }
    return result.program;
}

nlohmann::json distribution_json(const std::map<qvm::Word, double>& dist) {
    nlohmann::json obj = nlohmann::json::object();
    for (const auto& [value, p] : dist) obj[std::to_string(value)] = p;
    return obj;
}

int report_outcome(const qvm::RunOutcome& outcome, const CommonOptions& opts,
                   const std::vector<std::size_t>& report_cells) {
    if (outcome.fault) {
        std::cerr << "fault at step " << outcome.fault->step << ": " << outcome.fault->message
                  << " (pc=" << outcome.fault->config.pc << ")\n";
        return kExitFault;
    }
    if (opts.json) {
        nlohmann::json report;
        report["halted"] = outcome.halted;
        report["steps"] = outcome.steps_executed;
        report["branches"] = outcome.state.branch_count();
        report["branch_peak"] = outcome.branch_peak;
        report["norm"] = std::sqrt(outcome.final_norm_squared);
        nlohmann::json dists = nlohmann::json::object();
        for (std::size_t cell : report_cells) {
            dists["d" + std::to_string(cell)] = distribution_json(
                qvm::distribution(outcome.state, cell));
        }
        report["distributions"] = dists;
        std::cout << report.dump(2) << '\n';
    } else {
        std::cout << "halted:  " << (outcome.halted ? "yes" : "no (step limit)") << '\n'
                  << "steps:   " << outcome.steps_executed << '\n'
                  << "branches:" << ' ' << outcome.state.branch_count()
                  << " (peak " << outcome.branch_peak << ")\n"
                  << "norm:    " << std::sqrt(outcome.final_norm_squared) << '\n';
        for (std::size_t cell : report_cells) {
            std::cout << "d" << cell << ":\n";
            for (const auto& [value, p] : qvm::distribution(outcome.state, cell)) {
                std::cout << "  " << value << "  " << p << '\n';
            }
        }
    }
    return outcome.halted ? kExitOk : kExitTimeout;
}

int cmd_run_or_trace(const CommonOptions& opts, std::uint64_t trace_every, std::size_t top_k) {
    auto program = assemble(opts);
    if (!program) return kExitParse;
    std::vector<std::size_t> report_cells;
    if (!parse_cell_list(opts.cells_of_interest, opts.cells, report_cells)) return kExitParse;

    qvm::RunLimits limits;
    limits.max_steps = opts.max_steps;
    limits.threads = opts.threads;
    limits.trace_every = trace_every;
    limits.trace_top_k = top_k;

    qvm::TraceSink sink;
    if (trace_every > 0) {
        sink = [](const qvm::TraceRecord& rec) {
            nlohmann::json line;
            line["step"] = rec.step;
            line["branch_count"] = rec.branch_count;
            line["norm"] = std::sqrt(rec.norm_squared);
            nlohmann::json top = nlohmann::json::array();
            for (const auto& b : rec.top) {
                top.push_back({{"pc", b.pc}, {"cells", b.cells_digest}, {"p", b.probability}});
            }
            line["top"] = top;
            std::cout << line.dump() << '\n';
        };
    }
    const qvm::RunOutcome outcome = qvm::run(*program, limits, sink);
    return report_outcome(outcome, opts, report_cells);
}

int cmd_sample(const CommonOptions& opts, std::uint64_t shots, std::uint64_t seed) {
    auto program = assemble(opts);
    if (!program) return kExitParse;
    std::vector<std::size_t> report_cells;
    if (!parse_cell_list(opts.cells_of_interest, opts.cells, report_cells)) return kExitParse;

    qvm::RunLimits limits;
    limits.max_steps = opts.max_steps;
    limits.threads = opts.threads;
    const qvm::RunOutcome outcome = qvm::run(*program, limits);
    if (outcome.fault) {
        std::cerr << "fault at step " << outcome.fault->step << ": " << outcome.fault->message
                  << '\n';
        return kExitFault;
    }
    if (!outcome.halted) {
        std::cerr << "step limit exceeded before halt\n";
        return kExitTimeout;
    }

    qvm::Sampler sampler(seed);
    // keyed by cell values of interest (full digest when none requested)
    std::map<std::string, std::uint64_t> counts;
    for (std::uint64_t i = 0; i < shots; ++i) {
        const qvm::Configuration config = sampler.draw(outcome.state);
        std::ostringstream key;
        if (report_cells.empty()) {
            key << qvm::detail::cells_digest(config);
        } else {
            for (std::size_t j = 0; j < report_cells.size(); ++j) {
                if (j) key << ' ';
                key << 'd' << report_cells[j] << '=' << config.cells[report_cells[j]];
            }
        }
        ++counts[key.str()];
    }

    if (opts.json) {
        nlohmann::json report;
        report["shots"] = shots;
        report["seed"] = seed;
        report["counts"] = counts;
        std::cout << report.dump(2) << '\n';
    } else {
        for (const auto& [key, count] : counts) std::cout << key << "  " << count << '\n';
    }
    return kExitOk;
}

int cmd_bench(unsigned n_min, unsigned n_max, const CommonOptions& opts,
              const std::string& csv_path) {
    qvm::MachineSettings settings{opts.width, opts.cells, opts.max_steps};
    qvm::RunLimits limits;
    limits.max_steps = opts.max_steps;
    limits.threads = opts.threads;
    std::vector<qvm::BenchRecord> records;
    try {
        records = qvm::run_bench(n_min, n_max, settings, limits);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFault;
    }
    const std::string csv = qvm::bench_to_csv(records);
    if (csv_path.empty()) {
        std::cout << csv;
    } else {
        std::ofstream out(csv_path);
        if (!out) {
            std::cerr << "error: cannot write '" << csv_path << "'\n";
            return kExitFault;
        }
        out << csv;
    }
    return kExitOk;
}

int cmd_check(const CommonOptions& opts, double tol) {
    auto program = assemble(opts);
    if (!program) return kExitParse;
    qvm::RunLimits limits;
    limits.max_steps = opts.max_steps;
    limits.threads = opts.threads;
    try {
        const qvm::RunOutcome sparse = qvm::run(*program, limits);
        if (sparse.fault) {
            std::cerr << "fault at step " << sparse.fault->step << ": " << sparse.fault->message
                      << '\n';
            return kExitFault;
        }
        const qvm::DenseOutcome dense = qvm::dense_run(*program, limits);
        const qvm::CompareReport report = qvm::compare(sparse.state, dense.state, tol);
        std::cout << qvm::compare_report_text(report) << '\n';
        return report.pass ? kExitOk : kExitFault;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitParse;
    } catch (const qvm::BranchFaultError& e) {
        std::cerr << "fault: " << e.what() << '\n';
        return kExitFault;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"assembler and sparse superposition virtual machine"};
    app.require_subcommand(1);

    CommonOptions run_opts, trace_opts, sample_opts, bench_opts, check_opts;

    CLI::App* run_cmd = app.add_subcommand("run", "assemble and execute a program");
    add_common(run_cmd, run_opts);

    CLI::App* trace_cmd = app.add_subcommand("trace", "execute with per-step trace records");
    add_common(trace_cmd, trace_opts);
    std::uint64_t trace_every = 1;
    std::size_t top_k = 5;
    trace_cmd->add_option("--trace-every", trace_every, "emit a record every N steps");
    trace_cmd->add_option("--top-k", top_k, "branches per trace record");

    CLI::App* sample_cmd = app.add_subcommand("sample", "run then draw seeded measurements");
    add_common(sample_cmd, sample_opts);
    std::uint64_t shots = 1;
    std::uint64_t seed = 0;
    sample_cmd->add_option("--shots", shots, "number of measurements");
    sample_cmd->add_option("--seed", seed, "sampler seed");

    CLI::App* bench_cmd = app.add_subcommand("bench", "classical-vs-Grover factoring sweep");
    unsigned n_min = 4, n_max = 64;
    std::string csv_path;
    bench_cmd->add_option("n_min", n_min, "first input")->required();
    bench_cmd->add_option("n_max", n_max, "last input")->required();
    bench_cmd->add_option("--csv", csv_path, "write CSV to a file instead of stdout");
    add_common(bench_cmd, bench_opts, /*with_file=*/false);

    CLI::App* check_cmd = app.add_subcommand("check", "sparse engine vs dense reference oracle");
    add_common(check_cmd, check_opts);
    double tol = 1e-9;
    check_cmd->add_option("--tol", tol, "max allowed amplitude difference");

    CLI11_PARSE(app, argc, argv);

    if (run_cmd->parsed()) return cmd_run_or_trace(run_opts, 0, 0);
    if (trace_cmd->parsed()) return cmd_run_or_trace(trace_opts, trace_every, top_k);
    if (sample_cmd->parsed()) return cmd_sample(sample_opts, shots, seed);
    if (bench_cmd->parsed()) return cmd_bench(n_min, n_max, bench_opts, csv_path);
    if (check_cmd->parsed()) return cmd_check(check_opts, tol);
    return kExitOk;
}
