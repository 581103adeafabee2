#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

// Instruction set for the quantum-augmented assembly language: opcodes,
// operand variants, per-opcode signatures, and the assembled Program.
// This header holds the "ISA view" only; execution semantics live in
// machine.hpp / quantum.hpp.

namespace qvm {

enum class Opcode : std::uint8_t {
    add,
    mul,
    div,
    sub,
    sqrt,
    mod,
    neg,
    and_,
    or_,
    set,
    swap,
    setpc,
    jump,
    skip,
    stop,
    ifte,
    havoc,
    havocb,
    diffusion,
    phase,
};

inline constexpr std::size_t kOpcodeCount = 20;

enum class OperandKind : std::uint8_t {
    cell,       // dN, a data cell reference
    int_imm,    // integer literal or resolved define
    float_imm,  // real literal, phase operands only
    address,    // instruction index from a label or a jump-position literal
};

struct Operand {
    OperandKind kind = OperandKind::int_imm;
    std::int64_t ivalue = 0;  // cell index, immediate, or address
    double fvalue = 0.0;      // float_imm payload

    static Operand cell(std::int64_t index) { return {OperandKind::cell, index, 0.0}; }
    static Operand int_imm(std::int64_t v) { return {OperandKind::int_imm, v, 0.0}; }
    static Operand float_imm(double v) { return {OperandKind::float_imm, 0, v}; }
    static Operand address(std::int64_t v) { return {OperandKind::address, v, 0.0}; }

    bool operator==(const Operand&) const = default;
};

struct Instruction {
    Opcode op = Opcode::stop;
    std::vector<Operand> operands;

    bool operator==(const Instruction&) const = default;
};

// What a given operand position accepts.
enum class SlotKind : std::uint8_t {
    cell,      // must be a cell reference
    source,    // cell reference or integer immediate (labels allowed as values)
    imm,       // integer immediate; labels allowed, cells not
    target,    // jump target: literals and labels both become addresses
    real,      // real number; integer literals promote
};

struct OpcodeSignature {
    Opcode op;
    std::string_view mnemonic;
    std::uint8_t arity;
    std::array<SlotKind, 3> slots;
    bool quantum;
};

inline constexpr std::array<OpcodeSignature, kOpcodeCount> kSignatures{{
    {Opcode::add, "add", 3, {SlotKind::source, SlotKind::source, SlotKind::cell}, false},
    {Opcode::mul, "mul", 3, {SlotKind::source, SlotKind::source, SlotKind::cell}, false},
    {Opcode::div, "div", 3, {SlotKind::source, SlotKind::source, SlotKind::cell}, false},
    {Opcode::sub, "sub", 3, {SlotKind::source, SlotKind::source, SlotKind::cell}, false},
    {Opcode::sqrt, "sqrt", 2, {SlotKind::source, SlotKind::cell, SlotKind::cell}, false},
    {Opcode::mod, "mod", 3, {SlotKind::source, SlotKind::source, SlotKind::cell}, false},
    {Opcode::neg, "neg", 1, {SlotKind::cell, SlotKind::cell, SlotKind::cell}, false},
    {Opcode::and_, "and", 3, {SlotKind::source, SlotKind::source, SlotKind::cell}, false},
    {Opcode::or_, "or", 3, {SlotKind::source, SlotKind::source, SlotKind::cell}, false},
    {Opcode::set, "set", 2, {SlotKind::cell, SlotKind::imm, SlotKind::cell}, false},
    {Opcode::swap, "swap", 2, {SlotKind::cell, SlotKind::cell, SlotKind::cell}, false},
    {Opcode::setpc, "setpc", 1, {SlotKind::cell, SlotKind::cell, SlotKind::cell}, false},
    {Opcode::jump, "jump", 1, {SlotKind::target, SlotKind::cell, SlotKind::cell}, false},
    {Opcode::skip, "skip", 0, {SlotKind::cell, SlotKind::cell, SlotKind::cell}, false},
    {Opcode::stop, "stop", 0, {SlotKind::cell, SlotKind::cell, SlotKind::cell}, false},
    {Opcode::ifte, "ifte", 3, {SlotKind::cell, SlotKind::target, SlotKind::target}, false},
    {Opcode::havoc, "havoc", 3, {SlotKind::cell, SlotKind::imm, SlotKind::imm}, true},
    {Opcode::havocb, "havocb", 1, {SlotKind::imm, SlotKind::cell, SlotKind::cell}, true},
    {Opcode::diffusion, "diffusion", 0, {SlotKind::cell, SlotKind::cell, SlotKind::cell}, true},
    {Opcode::phase, "phase", 2, {SlotKind::real, SlotKind::real, SlotKind::cell}, true},
}};

inline const OpcodeSignature& signature_of(Opcode op) {
    return kSignatures[static_cast<std::size_t>(op)];
}

inline std::string_view mnemonic_of(Opcode op) { return signature_of(op).mnemonic; }

inline std::optional<Opcode> opcode_from_mnemonic(std::string_view name) {
    std::string lowered(name);
    for (char& c : lowered) {
        if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    }
    for (const auto& sig : kSignatures) {
        if (sig.mnemonic == lowered) return sig.op;
    }
    return std::nullopt;
}

inline bool is_quantum(Opcode op) { return signature_of(op).quantum; }

struct MachineSettings {
    unsigned word_width = 8;    // bits per cell, arithmetic wraps mod 2^w
    unsigned cell_count = 32;
    std::uint64_t max_steps = 1000000;

    bool operator==(const MachineSettings&) const = default;
};

struct Program {
    std::vector<Instruction> instructions;
    std::map<std::string, std::size_t> labels;
    MachineSettings settings;
    std::vector<std::size_t> source_lines;  // per instruction, 0 if synthetic

    std::size_t size() const { return instructions.size(); }

    // Equality of behavior: labels are a source-level artifact.
    bool operator==(const Program& other) const {
        return instructions == other.instructions && settings == other.settings;
    }
};

}  // namespace qvm
