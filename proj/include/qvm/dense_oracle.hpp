#pragma once

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvm/engine.hpp"
#include "qvm/isa.hpp"
#include "qvm/machine.hpp"
#include "qvm/state.hpp"

// Brute-force reference simulator over the fully enumerated configuration
// space. Semantics are re-derived here directly from the instruction table
// rather than routed through classical_transition or the sparse quantum
// transforms, so a bug shared with the sparse engine cannot hide.

namespace qvm {

inline constexpr unsigned kDenseMaxStateBits = 16;  // word_width * cell_count bound

struct DenseState {
    MachineSettings settings;
    std::size_t program_length = 0;
    std::vector<Amplitude> amps;  // index = pc * 2^(w*cells) + packed cell bits

    std::size_t space() const { return amps.empty() ? 0 : amps.size() / program_length; }
};

struct DenseOutcome {
    DenseState state;
    bool halted = false;
    std::uint64_t steps_executed = 0;
    std::vector<double> norm_history;
};

struct CompareReport {
    double max_abs_diff = 0.0;
    bool pass = false;
    Configuration worst;
};

namespace dense_detail {

inline unsigned state_bits(const MachineSettings& s) { return s.word_width * s.cell_count; }

inline Word unpack_cell(std::uint64_t packed, std::size_t cell, const MachineSettings& s) {
    return (packed >> (s.word_width * cell)) & word_mask(s.word_width);
}

inline std::uint64_t pack_cell(std::uint64_t packed, std::size_t cell, Word value,
                               const MachineSettings& s) {
    const unsigned shift = s.word_width * static_cast<unsigned>(cell);
    const std::uint64_t cleared = packed & ~(word_mask(s.word_width) << shift);
    return cleared | (static_cast<std::uint64_t>(value) << shift);
}

inline Configuration decode(std::uint64_t pc, std::uint64_t packed, const MachineSettings& s) {
    Configuration c;
    c.pc = pc;
    c.cells.resize(s.cell_count);
    for (std::size_t i = 0; i < s.cell_count; ++i) c.cells[i] = unpack_cell(packed, i, s);
    return c;
}

inline std::uint64_t encode_cells(const Configuration& c, const MachineSettings& s) {
    std::uint64_t packed = 0;
    for (std::size_t i = 0; i < c.cells.size(); ++i) packed = pack_cell(packed, i, c.cells[i], s);
    return packed;
}

inline Word value_of(const Operand& op, std::uint64_t packed, const MachineSettings& s) {
    if (op.kind == OperandKind::cell) {
        return unpack_cell(packed, static_cast<std::size_t>(op.ivalue), s);
    }
    return static_cast<Word>(static_cast<std::uint64_t>(op.ivalue)) & word_mask(s.word_width);
}

[[noreturn]] inline void fault(const std::string& message, std::uint64_t pc, std::uint64_t packed,
                               const MachineSettings& s) {
    throw BranchFaultError(message, decode(pc, packed, s));
}

// Classical successor as (pc', packed'); a second, independent reading of
// the instruction table.
inline std::pair<std::uint64_t, std::uint64_t> classical_successor(const Instruction& instr,
                                                                   std::uint64_t pc,
                                                                   std::uint64_t packed,
                                                                   const MachineSettings& s,
                                                                   std::size_t length) {
    const Word mask = word_mask(s.word_width);
    auto require_pc = [&](std::uint64_t target) {
        if (target >= length) fault("pc target out of range", pc, packed, s);
        return target;
    };
    auto write = [&](const Operand& dst, Word value) {
        packed = pack_cell(packed, static_cast<std::size_t>(dst.ivalue), value & mask, s);
    };

    switch (instr.op) {
        case Opcode::add:
            write(instr.operands[2], value_of(instr.operands[0], packed, s) +
                                         value_of(instr.operands[1], packed, s));
            return {require_pc(pc + 1), packed};
        case Opcode::sub:
            write(instr.operands[2], value_of(instr.operands[0], packed, s) -
                                         value_of(instr.operands[1], packed, s));
            return {require_pc(pc + 1), packed};
        case Opcode::mul:
            write(instr.operands[2], value_of(instr.operands[0], packed, s) *
                                         value_of(instr.operands[1], packed, s));
            return {require_pc(pc + 1), packed};
        case Opcode::div: {
            Word b = value_of(instr.operands[1], packed, s);
            if (b == 0) fault("division by zero", pc, packed, s);
            write(instr.operands[2], value_of(instr.operands[0], packed, s) / b);
            return {require_pc(pc + 1), packed};
        }
        case Opcode::mod: {
            Word b = value_of(instr.operands[1], packed, s);
            if (b == 0) fault("modulo by zero", pc, packed, s);
            write(instr.operands[2], value_of(instr.operands[0], packed, s) % b);
            return {require_pc(pc + 1), packed};
        }
        case Opcode::sqrt: {
            Word a = value_of(instr.operands[0], packed, s);
            Word r = 0;
            while ((r + 1) * (r + 1) <= a) ++r;  // floor sqrt by counting
            write(instr.operands[1], r);
            return {require_pc(pc + 1), packed};
        }
        case Opcode::neg: {
            Word a = value_of(instr.operands[0], packed, s);
            write(instr.operands[0], a == 0 ? 1 : 0);
            return {require_pc(pc + 1), packed};
        }
        case Opcode::and_:
            write(instr.operands[2], (value_of(instr.operands[0], packed, s) != 0 &&
                                      value_of(instr.operands[1], packed, s) != 0)
                                         ? 1
                                         : 0);
            return {require_pc(pc + 1), packed};
        case Opcode::or_:
            write(instr.operands[2], (value_of(instr.operands[0], packed, s) != 0 ||
                                      value_of(instr.operands[1], packed, s) != 0)
                                         ? 1
                                         : 0);
            return {require_pc(pc + 1), packed};
        case Opcode::set:
            write(instr.operands[0], value_of(instr.operands[1], packed, s));
            return {require_pc(pc + 1), packed};
        case Opcode::swap: {
            Word a = value_of(instr.operands[0], packed, s);
            Word b = value_of(instr.operands[1], packed, s);
            write(instr.operands[0], b);
            write(instr.operands[1], a);
            return {require_pc(pc + 1), packed};
        }
        case Opcode::setpc:
            return {require_pc(value_of(instr.operands[0], packed, s)), packed};
        case Opcode::jump:
            return {require_pc(static_cast<std::uint64_t>(instr.operands[0].ivalue)), packed};
        case Opcode::ifte: {
            Word cond = value_of(instr.operands[0], packed, s);
            const Operand& target = cond != 0 ? instr.operands[1] : instr.operands[2];
            return {require_pc(static_cast<std::uint64_t>(target.ivalue)), packed};
        }
        case Opcode::skip:
            return {require_pc(pc + 1), packed};
        case Opcode::stop:
            return {pc, packed};
        default:
            throw std::logic_error("quantum opcode in classical_successor");
    }
}

}  // namespace dense_detail

inline DenseState dense_initial(const Program& program) {
    const MachineSettings& s = program.settings;
    if (dense_detail::state_bits(s) > kDenseMaxStateBits) {
        throw std::invalid_argument("dense oracle dimension bound exceeded: word_width * cell_count = " +
                                    std::to_string(dense_detail::state_bits(s)) + " > " +
                                    std::to_string(kDenseMaxStateBits));
    }
    DenseState state;
    state.settings = s;
    state.program_length = program.size();
    state.amps.assign(program.size() << dense_detail::state_bits(s), Amplitude{0.0, 0.0});
    if (!state.amps.empty()) state.amps[0] = Amplitude{1.0, 0.0};  // pc 0, all cells zero
    return state;
}

inline double dense_norm_squared(const DenseState& state) {
    double total = 0.0;
    for (const Amplitude& a : state.amps) total += std::norm(a);
    return total;
}

inline bool dense_is_halted(const Program& program, const DenseState& state, double eps) {
    const std::size_t space = state.space();
    for (std::size_t idx = 0; idx < state.amps.size(); ++idx) {
        if (std::norm(state.amps[idx]) < eps * eps) continue;
        if (program.instructions[idx / space].op != Opcode::stop) return false;
    }
    return true;
}

// Full-vector evolution with the same lockstep and halting rules as the
// sparse engine. Diffusion and phase act on the support (entries above the
// prune threshold) of the branches at their instruction.
inline DenseOutcome dense_run(const Program& program, const RunLimits& limits = {}) {
    using namespace dense_detail;
    const MachineSettings& s = program.settings;
    const double eps = limits.prune_epsilon;
    const double eps_sq = eps * eps;

    DenseOutcome outcome;
    outcome.state = dense_initial(program);
    outcome.norm_history.push_back(dense_norm_squared(outcome.state));
    const std::size_t space = outcome.state.space();
    const std::size_t length = program.size();

    std::uint64_t steps = 0;
    while (steps < limits.max_steps && !dense_is_halted(program, outcome.state, eps)) {
        std::vector<Amplitude> next(outcome.state.amps.size(), Amplitude{0.0, 0.0});

        for (std::size_t pc = 0; pc < length; ++pc) {
            const Instruction& instr = program.instructions[pc];
            const std::size_t base = pc * space;

            if (instr.op == Opcode::diffusion) {
                // inversion about the mean over the support at this pc
                if (pc + 1 >= length) {
                    for (std::size_t packed = 0; packed < space; ++packed) {
                        if (std::norm(outcome.state.amps[base + packed]) >= eps_sq) {
                            fault("pc target out of range", pc, packed, s);
                        }
                    }
                    continue;
                }
                Amplitude sum{0.0, 0.0};
                std::size_t support = 0;
                for (std::size_t packed = 0; packed < space; ++packed) {
                    const Amplitude a = outcome.state.amps[base + packed];
                    if (std::norm(a) >= eps_sq) {
                        sum += a;
                        ++support;
                    }
                }
                if (support == 0) continue;
                const Amplitude mean = sum / static_cast<double>(support);
                for (std::size_t packed = 0; packed < space; ++packed) {
                    const Amplitude a = outcome.state.amps[base + packed];
                    if (std::norm(a) >= eps_sq) {
                        next[(pc + 1) * space + packed] += 2.0 * mean - a;
                    }
                }
                continue;
            }

            for (std::size_t packed = 0; packed < space; ++packed) {
                const Amplitude a = outcome.state.amps[base + packed];
                if (std::norm(a) < eps_sq) continue;

                switch (instr.op) {
                    case Opcode::havoc:
                    case Opcode::havocb: {
                        std::size_t cell;
                        unsigned lo, hi;
                        if (instr.op == Opcode::havoc) {
                            cell = static_cast<std::size_t>(instr.operands[0].ivalue);
                            if (instr.operands[1].ivalue < 0 ||
                                instr.operands[2].ivalue < instr.operands[1].ivalue ||
                                static_cast<std::uint64_t>(instr.operands[2].ivalue) > s.word_width) {
                                fault("havoc range out of bounds", pc, packed, s);
                            }
                            lo = static_cast<unsigned>(instr.operands[1].ivalue);
                            hi = static_cast<unsigned>(instr.operands[2].ivalue);
                        } else {
                            const std::int64_t q = instr.operands[0].ivalue;
                            if (q < 0 || static_cast<std::uint64_t>(q) >=
                                             std::uint64_t{s.cell_count} * s.word_width) {
                                fault("havocb qubit out of bounds", pc, packed, s);
                            }
                            cell = static_cast<std::size_t>(q) / s.word_width;
                            lo = static_cast<unsigned>(q) % s.word_width;
                            hi = lo + 1;
                        }
                        if (pc + 1 >= length) fault("pc target out of range", pc, packed, s);

                        // H^(n) |x> = 2^(-n/2) sum_y (-1)^(x.y) |y> on the bit range
                        const unsigned n = hi - lo;
                        const Word old_value = unpack_cell(packed, cell, s);
                        const Word range_mask = n >= 64 ? ~Word{0} : ((Word{1} << n) - 1) << lo;
                        const Word x_bits = (old_value & range_mask) >> lo;
                        const double scale = std::pow(2.0, -0.5 * static_cast<double>(n));
                        const std::uint64_t count = std::uint64_t{1} << n;
                        for (std::uint64_t y = 0; y < count; ++y) {
                            const int sign = (std::popcount(x_bits & y) & 1) ? -1 : 1;
                            const Word new_value = (old_value & ~range_mask) | (y << lo);
                            const std::uint64_t new_packed = pack_cell(packed, cell, new_value, s);
                            next[(pc + 1) * space + new_packed] += a * (sign * scale);
                        }
                        break;
                    }
                    case Opcode::phase: {
                        if (pc + 1 >= length) fault("pc target out of range", pc, packed, s);
                        const Amplitude factor{instr.operands[0].fvalue, instr.operands[1].fvalue};
                        next[(pc + 1) * space + packed] += a * factor;
                        break;
                    }
                    default: {
                        auto [next_pc, next_packed] = classical_successor(instr, pc, packed, s, length);
                        next[next_pc * space + next_packed] += a;
                        break;
                    }
                }
            }
        }

        for (Amplitude& a : next) {
            if (std::norm(a) < eps_sq) a = Amplitude{0.0, 0.0};
        }
        outcome.state.amps = std::move(next);
        ++steps;
        outcome.norm_history.push_back(dense_norm_squared(outcome.state));
    }

    outcome.steps_executed = steps;
    outcome.halted = dense_is_halted(program, outcome.state, eps);
    return outcome;
}

// Maximum absolute amplitude difference over the whole enumerated space.
inline CompareReport compare(const SparseState& sparse, const DenseState& dense, double tol) {
    using namespace dense_detail;
    CompareReport report;
    const std::size_t space = dense.space();
    for (std::size_t idx = 0; idx < dense.amps.size(); ++idx) {
        const Configuration config = decode(idx / space, idx % space, dense.settings);
        const double diff = std::abs(sparse.amplitude_of(config) - dense.amps[idx]);
        if (diff > report.max_abs_diff) {
            report.max_abs_diff = diff;
            report.worst = config;
        }
    }
    report.pass = report.max_abs_diff <= tol;
    return report;
}

inline std::string compare_report_text(const CompareReport& report) {
    std::ostringstream out;
    out << (report.pass ? "PASS" : "FAIL") << " max_abs_diff=" << report.max_abs_diff;
    if (!report.pass) {
        out << " at pc=" << report.worst.pc << " cells=[";
        for (std::size_t i = 0; i < report.worst.cells.size(); ++i) {
            if (i) out << ' ';
            out << report.worst.cells[i];
        }
        out << ']';
    }
    return out.str();
}

}  // namespace qvm
