#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "qvm/isa.hpp"
#include "qvm/machine.hpp"
#include "qvm/state.hpp"

// The four quantum instructions as linear transforms on branch groups. A
// branch group is the subset of state entries whose pc addresses one
// specific quantum instruction in the current global step; callers pass it
// in canonical (configuration) order and merge the returned pairs.

namespace qvm {

inline constexpr double kInvSqrt2 = 0.7071067811865476;  // 1/sqrt(2)

namespace detail {

// Expands one weighted configuration through a Hadamard on a single bit of
// a cell. Does not touch the pc; range ops advance it once at the end.
inline void hadamard_bit_expand(const Configuration& config, Amplitude amp, std::size_t cell,
                                unsigned bit, std::vector<WeightedConfig>& out) {
    const Word value = config.cells[cell];
    const Word bit_mask = Word{1} << bit;
    const bool was_set = (value & bit_mask) != 0;

    Configuration zero = config;
    zero.cells[cell] = value & ~bit_mask;
    Configuration one = config;
    one.cells[cell] = value | bit_mask;

    // |0> -> (|0>+|1>)/sqrt2, |1> -> (|0>-|1>)/sqrt2
    out.emplace_back(std::move(zero), amp * kInvSqrt2);
    out.emplace_back(std::move(one), was_set ? amp * -kInvSqrt2 : amp * kInvSqrt2);
}

inline void advance_group_pc(std::vector<WeightedConfig>& pairs, std::size_t program_length) {
    for (auto& [config, amp] : pairs) {
        if (config.pc + 1 >= program_length) {
            throw BranchFaultError("fall-through target " + std::to_string(config.pc + 1) +
                                       " outside program of length " + std::to_string(program_length),
                                   config);
        }
        config.pc += 1;
    }
}

}  // namespace detail

// Hadamard on bit `bit` of cell `cell` for every branch in the group.
inline std::vector<WeightedConfig> apply_hadamard_bit(const std::vector<WeightedConfig>& group,
                                                      std::size_t cell, unsigned bit,
                                                      const MachineSettings& settings,
                                                      std::size_t program_length) {
    if (bit >= settings.word_width) throw std::out_of_range("hadamard bit index out of range");
    if (cell >= settings.cell_count) throw std::out_of_range("hadamard cell index out of range");
    std::vector<WeightedConfig> out;
    out.reserve(group.size() * 2);
    for (const auto& [config, amp] : group) {
        detail::hadamard_bit_expand(config, amp, cell, bit, out);
    }
    detail::advance_group_pc(out, program_length);
    return out;
}

// havoc d<cell> lo hi: Hadamard on every bit in the half-open range [lo, hi).
inline std::vector<WeightedConfig> apply_havoc_range(const std::vector<WeightedConfig>& group,
                                                     std::size_t cell, unsigned lo, unsigned hi,
                                                     const MachineSettings& settings,
                                                     std::size_t program_length) {
    if (lo > hi) throw std::out_of_range("havoc range is reversed");
    if (hi > settings.word_width) throw std::out_of_range("havoc range exceeds word width");
    if (cell >= settings.cell_count) throw std::out_of_range("havoc cell index out of range");
    std::vector<WeightedConfig> current(group.begin(), group.end());
    for (unsigned bit = lo; bit < hi; ++bit) {
        std::vector<WeightedConfig> next;
        next.reserve(current.size() * 2);
        for (const auto& [config, amp] : current) {
            detail::hadamard_bit_expand(config, amp, cell, bit, next);
        }
        current = std::move(next);
    }
    detail::advance_group_pc(current, program_length);
    return current;
}

// havocb q: Hadamard on global data qubit q. Qubits are numbered cell-major,
// little-endian within a cell: qubit q lives in bit q mod w of cell q div w.
inline std::vector<WeightedConfig> apply_havocb(const std::vector<WeightedConfig>& group,
                                                std::uint64_t qubit, const MachineSettings& settings,
                                                std::size_t program_length) {
    const std::uint64_t total = static_cast<std::uint64_t>(settings.cell_count) * settings.word_width;
    if (qubit >= total) throw std::out_of_range("havocb qubit index out of range");
    return apply_hadamard_bit(group, static_cast<std::size_t>(qubit / settings.word_width),
                              static_cast<unsigned>(qubit % settings.word_width), settings,
                              program_length);
}

// phase x y: multiplies every amplitude in the group by x + i*y. Only the
// branches currently at this instruction are touched, which is what lets a
// conditional jump route branches around the phase flip.
inline std::vector<WeightedConfig> apply_phase(const std::vector<WeightedConfig>& group, double x,
                                               double y, std::size_t program_length) {
    std::vector<WeightedConfig> out(group.begin(), group.end());
    const Amplitude factor{x, y};
    for (auto& [config, amp] : out) amp *= factor;
    detail::advance_group_pc(out, program_length);
    return out;
}

// diffusion: inversion about the mean, restricted to the branch group. With
// m the mean group amplitude, every amplitude a becomes 2m - a. This is the
// reflection 2|u><u| - I on the subspace spanned by the group's
// configurations and preserves the group's norm.
inline std::vector<WeightedConfig> apply_diffusion(const std::vector<WeightedConfig>& group,
                                                   std::size_t program_length) {
    if (group.empty()) throw std::invalid_argument("diffusion on empty branch group");
    Amplitude mean{0.0, 0.0};
    for (const auto& [config, amp] : group) mean += amp;
    mean /= static_cast<double>(group.size());

    std::vector<WeightedConfig> out(group.begin(), group.end());
    for (auto& [config, amp] : out) amp = 2.0 * mean - amp;
    detail::advance_group_pc(out, program_length);
    return out;
}

}  // namespace qvm
