#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <future>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "qvm/isa.hpp"
#include "qvm/machine.hpp"
#include "qvm/quantum.hpp"
#include "qvm/state.hpp"

// Lockstep execution over the superposition: every branch executes its
// current instruction in the same global step, then all successors are
// merged canonically.

namespace qvm {

struct RunLimits {
    std::uint64_t max_steps = 1000000;
    double prune_epsilon = kDefaultPruneEpsilon;
    std::uint64_t trace_every = 0;  // 0 = no trace
    std::size_t trace_top_k = 5;
    unsigned threads = 1;  // branch groups evaluated in parallel when > 1
};

struct TraceBranch {
    std::uint64_t pc = 0;
    std::string cells_digest;
    double probability = 0.0;
};

struct TraceRecord {
    std::uint64_t step = 0;
    std::size_t branch_count = 0;
    double norm_squared = 0.0;
    std::vector<TraceBranch> top;
};

using TraceSink = std::function<void(const TraceRecord&)>;

struct RunOutcome {
    SparseState state;
    bool halted = false;
    std::uint64_t steps_executed = 0;
    double final_norm_squared = 0.0;
    std::optional<BranchFault> fault;
    std::vector<double> norm_history;  // squared norm, index = step count
    std::size_t branch_peak = 0;
};

inline bool is_halted(const Program& program, const SparseState& state) {
    for (const auto& [config, amp] : state.entries()) {
        if (config.pc >= program.size() ||
            program.instructions[static_cast<std::size_t>(config.pc)].op != Opcode::stop) {
            return false;
        }
    }
    return true;  // vacuously true for the empty state
}

namespace detail {

using BranchGroup = std::vector<WeightedConfig>;

inline std::vector<WeightedConfig> apply_group(const Program& program, std::uint64_t pc,
                                               const BranchGroup& group) {
    const Instruction& instr = program.instructions[static_cast<std::size_t>(pc)];
    const MachineSettings& settings = program.settings;
    const std::size_t length = program.size();
    try {
        switch (instr.op) {
            case Opcode::havoc:
                return apply_havoc_range(group, cell_index(instr.operands[0]),
                                         static_cast<unsigned>(instr.operands[1].ivalue),
                                         static_cast<unsigned>(instr.operands[2].ivalue), settings,
                                         length);
            case Opcode::havocb:
                return apply_havocb(group, static_cast<std::uint64_t>(instr.operands[0].ivalue),
                                    settings, length);
            case Opcode::phase:
                return apply_phase(group, instr.operands[0].fvalue, instr.operands[1].fvalue,
                                   length);
            case Opcode::diffusion:
                return apply_diffusion(group, length);
            default:
                break;
        }
    } catch (const std::out_of_range& e) {
        throw BranchFaultError(e.what(), group.front().first);
    }

    std::vector<WeightedConfig> out;
    out.reserve(group.size());
    for (const auto& [config, amp] : group) {
        out.emplace_back(classical_transition(instr, config, settings, length), amp);
    }
    return out;
}

}  // namespace detail

// One global synchronous step. Entries are partitioned by pc (they arrive
// sorted, pc-major), each group is mapped through its instruction, and the
// results are merged and pruned. Throws BranchFaultError without the step
// number; run() attaches it.
inline SparseState step(const Program& program, const SparseState& state,
                        double prune_epsilon = kDefaultPruneEpsilon, unsigned threads = 1) {
    std::vector<std::pair<std::uint64_t, detail::BranchGroup>> groups;
    for (const auto& [config, amp] : state.entries()) {
        if (config.pc >= program.size()) {
            throw BranchFaultError("pc " + std::to_string(config.pc) + " outside program of length " +
                                       std::to_string(program.size()),
                                   config);
        }
        if (groups.empty() || groups.back().first != config.pc) {
            groups.emplace_back(config.pc, detail::BranchGroup{});
        }
        groups.back().second.emplace_back(config, amp);
    }

    std::vector<std::vector<WeightedConfig>> produced(groups.size());
    if (threads <= 1 || groups.size() <= 1) {
        for (std::size_t g = 0; g < groups.size(); ++g) {
            produced[g] = detail::apply_group(program, groups[g].first, groups[g].second);
        }
    } else {
        // Chunked fan-out; the canonical merge below makes the result
        // independent of scheduling.
        const std::size_t chunk = (groups.size() + threads - 1) / threads;
        std::vector<std::future<void>> futures;
        for (std::size_t begin = 0; begin < groups.size(); begin += chunk) {
            const std::size_t end = std::min(begin + chunk, groups.size());
            futures.push_back(std::async(std::launch::async, [&, begin, end] {
                for (std::size_t g = begin; g < end; ++g) {
                    produced[g] = detail::apply_group(program, groups[g].first, groups[g].second);
                }
            }));
        }
        std::exception_ptr first_error;
        for (auto& f : futures) {
            try {
                f.get();
            } catch (...) {
                if (!first_error) first_error = std::current_exception();
            }
        }
        if (first_error) std::rethrow_exception(first_error);
    }

    std::vector<WeightedConfig> all;
    std::size_t total = 0;
    for (const auto& p : produced) total += p.size();
    all.reserve(total);
    for (auto& p : produced) {
        all.insert(all.end(), std::make_move_iterator(p.begin()), std::make_move_iterator(p.end()));
    }
    return SparseState::merge_and_prune(std::move(all), prune_epsilon);
}

namespace detail {

inline std::string cells_digest(const Configuration& config) {
    std::ostringstream out;
    bool first = true;
    for (std::size_t i = 0; i < config.cells.size(); ++i) {
        if (config.cells[i] == 0) continue;
        if (!first) out << ' ';
        out << 'd' << i << '=' << config.cells[i];
        first = false;
    }
    return first ? std::string("all-zero") : out.str();
}

inline TraceRecord make_trace_record(std::uint64_t step_no, const SparseState& state,
                                     std::size_t top_k) {
    TraceRecord rec;
    rec.step = step_no;
    rec.branch_count = state.branch_count();
    rec.norm_squared = state.norm_squared();
    std::vector<std::pair<double, const Configuration*>> ranked;
    ranked.reserve(state.branch_count());
    for (const auto& [config, amp] : state.entries()) {
        ranked.emplace_back(std::norm(amp), &config);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first > b.first; });
    const double total = state.norm_squared();
    for (std::size_t i = 0; i < ranked.size() && i < top_k; ++i) {
        rec.top.push_back({ranked[i].second->pc, cells_digest(*ranked[i].second),
                           total > 0.0 ? ranked[i].first / total : 0.0});
    }
    return rec;
}

}  // namespace detail

// Iterates step() from the initial state until every branch sits on a stop
// instruction or max_steps is exhausted. A timeout is not a fault; a branch
// fault ends the run with the offending configuration and step recorded.
inline RunOutcome run(const Program& program, const RunLimits& limits = {},
                      const TraceSink& trace = nullptr) {
    RunOutcome outcome;
    if (program.instructions.empty()) {
        outcome.fault = BranchFault{"empty program", Configuration{}, 0};
        return outcome;
    }
    SparseState state = initial_state(program);
    outcome.norm_history.push_back(state.norm_squared());
    outcome.branch_peak = state.branch_count();
    if (trace && limits.trace_every > 0) {
        trace(detail::make_trace_record(0, state, limits.trace_top_k));
    }

    std::uint64_t steps = 0;
    while (steps < limits.max_steps && !state.empty() && !is_halted(program, state)) {
        try {
            state = step(program, state, limits.prune_epsilon, limits.threads);
        } catch (const BranchFaultError& e) {
            outcome.fault = e.fault();
            outcome.fault->step = steps + 1;
            break;
        }
        ++steps;
        outcome.norm_history.push_back(state.norm_squared());
        outcome.branch_peak = std::max(outcome.branch_peak, state.branch_count());
        if (trace && limits.trace_every > 0 && steps % limits.trace_every == 0) {
            trace(detail::make_trace_record(steps, state, limits.trace_top_k));
        }
    }

    outcome.steps_executed = steps;
    outcome.final_norm_squared = state.norm_squared();
    outcome.halted = !outcome.fault && is_halted(program, state);
    outcome.state = std::move(state);
    return outcome;
}

// Marginal distribution of one cell, renormalized by the total squared norm
// so non-unit phase usage still yields probabilities.
inline std::map<Word, double> distribution(const SparseState& state, std::size_t cell) {
    if (state.empty()) throw std::invalid_argument("distribution of empty state");
    std::map<Word, double> out;
    const double total = state.norm_squared();
    for (const auto& [config, amp] : state.entries()) {
        out[config.cells.at(cell)] += std::norm(amp) / total;
    }
    return out;
}

// Seeded measurement. One sampler draws a reproducible sequence; identical
// seed and state give identical draws.
class Sampler {
  public:
    explicit Sampler(std::uint64_t seed) : rng_(seed) {}

    Configuration draw(const SparseState& state) {
        if (state.empty()) throw std::invalid_argument("sample from empty state");
        const double u = static_cast<double>(rng_() >> 11) * 0x1.0p-53;
        const double threshold = u * state.norm_squared();
        double cumulative = 0.0;
        for (const auto& [config, amp] : state.entries()) {
            cumulative += std::norm(amp);
            if (cumulative >= threshold) return config;
        }
        return state.entries().rbegin()->first;  // numeric slack at u ~ 1
    }

  private:
    std::mt19937_64 rng_;
};

inline Configuration sample(const SparseState& state, std::uint64_t seed) {
    return Sampler(seed).draw(state);
}

}  // namespace qvm
