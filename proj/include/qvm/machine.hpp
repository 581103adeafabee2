#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

#include "qvm/isa.hpp"
#include "qvm/state.hpp"

// Per-branch classical transition function.

namespace qvm {

// Runtime error attributed to one specific branch. The engine attaches the
// global step number when it surfaces the fault.
struct BranchFault {
    std::string message;
    Configuration config;
    std::uint64_t step = 0;
};

class BranchFaultError : public std::runtime_error {
  public:
    BranchFaultError(std::string message, Configuration config)
        : std::runtime_error(message), fault_{std::move(message), std::move(config)} {}

    const BranchFault& fault() const { return fault_; }

  private:
    BranchFault fault_;
};

namespace detail {

inline Word read_source(const Operand& op, const Configuration& config, Word mask) {
    switch (op.kind) {
        case OperandKind::cell:
            return config.cells[static_cast<std::size_t>(op.ivalue)];
        case OperandKind::int_imm:
        case OperandKind::address:
            return static_cast<Word>(static_cast<std::uint64_t>(op.ivalue)) & mask;
        case OperandKind::float_imm:
            break;
    }
    throw std::logic_error("float operand has no integer value");
}

inline std::size_t cell_index(const Operand& op) {
    return static_cast<std::size_t>(op.ivalue);
}

inline Word floor_sqrt(Word v) {
    Word r = static_cast<Word>(std::sqrt(static_cast<double>(v)));
    while (r > 0 && r * r > v) --r;
    while ((r + 1) * (r + 1) <= v) ++r;
    return r;
}

}  // namespace detail

// Applies one classical instruction to one configuration. Pure: the input
// configuration is never modified. Throws BranchFaultError on division or
// modulo by zero and on any control transfer (including fall-through) that
// leaves [0, program_length).
inline Configuration classical_transition(const Instruction& instr, const Configuration& config,
                                          const MachineSettings& settings,
                                          std::size_t program_length) {
    const Word mask = word_mask(settings.word_width);
    Configuration next = config;

    auto set_pc = [&](std::uint64_t target, const char* what) {
        if (target >= program_length) {
            throw BranchFaultError(std::string(what) + " target " + std::to_string(target) +
                                       " outside program of length " + std::to_string(program_length),
                                   config);
        }
        next.pc = target;
    };
    auto advance = [&] { set_pc(config.pc + 1, "fall-through"); };

    switch (instr.op) {
        case Opcode::add: {
            Word a = detail::read_source(instr.operands[0], config, mask);
            Word b = detail::read_source(instr.operands[1], config, mask);
            next.cells[detail::cell_index(instr.operands[2])] = (a + b) & mask;
            advance();
            break;
        }
        case Opcode::sub: {
            Word a = detail::read_source(instr.operands[0], config, mask);
            Word b = detail::read_source(instr.operands[1], config, mask);
            next.cells[detail::cell_index(instr.operands[2])] = (a - b) & mask;
            advance();
            break;
        }
        case Opcode::mul: {
            Word a = detail::read_source(instr.operands[0], config, mask);
            Word b = detail::read_source(instr.operands[1], config, mask);
            next.cells[detail::cell_index(instr.operands[2])] = (a * b) & mask;
            advance();
            break;
        }
        case Opcode::div: {
            Word a = detail::read_source(instr.operands[0], config, mask);
            Word b = detail::read_source(instr.operands[1], config, mask);
            if (b == 0) throw BranchFaultError("division by zero", config);
            next.cells[detail::cell_index(instr.operands[2])] = (a / b) & mask;
            advance();
            break;
        }
        case Opcode::mod: {
            Word a = detail::read_source(instr.operands[0], config, mask);
            Word b = detail::read_source(instr.operands[1], config, mask);
            if (b == 0) throw BranchFaultError("modulo by zero", config);
            next.cells[detail::cell_index(instr.operands[2])] = (a % b) & mask;
            advance();
            break;
        }
        case Opcode::sqrt: {
            Word a = detail::read_source(instr.operands[0], config, mask);
            next.cells[detail::cell_index(instr.operands[1])] = detail::floor_sqrt(a) & mask;
            advance();
            break;
        }
        case Opcode::neg: {
            std::size_t i = detail::cell_index(instr.operands[0]);
            next.cells[i] = truthy(config.cells[i]) ? 0 : 1;
            advance();
            break;
        }
        case Opcode::and_: {
            Word a = detail::read_source(instr.operands[0], config, mask);
            Word b = detail::read_source(instr.operands[1], config, mask);
            next.cells[detail::cell_index(instr.operands[2])] = (truthy(a) && truthy(b)) ? 1 : 0;
            advance();
            break;
        }
        case Opcode::or_: {
            Word a = detail::read_source(instr.operands[0], config, mask);
            Word b = detail::read_source(instr.operands[1], config, mask);
            next.cells[detail::cell_index(instr.operands[2])] = (truthy(a) || truthy(b)) ? 1 : 0;
            advance();
            break;
        }
        case Opcode::set: {
            next.cells[detail::cell_index(instr.operands[0])] =
                detail::read_source(instr.operands[1], config, mask);
            advance();
            break;
        }
        case Opcode::swap: {
            std::size_t i = detail::cell_index(instr.operands[0]);
            std::size_t j = detail::cell_index(instr.operands[1]);
            std::swap(next.cells[i], next.cells[j]);
            advance();
            break;
        }
        case Opcode::setpc:
            set_pc(config.cells[detail::cell_index(instr.operands[0])], "setpc");
            break;
        case Opcode::jump:
            set_pc(static_cast<std::uint64_t>(instr.operands[0].ivalue), "jump");
            break;
        case Opcode::ifte: {
            Word cond = config.cells[detail::cell_index(instr.operands[0])];
            const Operand& chosen = truthy(cond) ? instr.operands[1] : instr.operands[2];
            set_pc(static_cast<std::uint64_t>(chosen.ivalue), "ifte");
            break;
        }
        case Opcode::skip:
            advance();
            break;
        case Opcode::stop:
            break;  // fixed point: pc and cells unchanged
        case Opcode::havoc:
        case Opcode::havocb:
        case Opcode::diffusion:
        case Opcode::phase:
            throw std::logic_error("quantum opcode passed to classical_transition");
    }
    return next;
}

}  // namespace qvm
