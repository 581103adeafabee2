#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <compare>
#include <cstdint>
#include <map>
#include <utility>
#include <vector>

#include "qvm/isa.hpp"

// Machine configurations and the sparse superposition state.

namespace qvm {

using Word = std::uint64_t;
using Amplitude = std::complex<double>;

inline constexpr double kDefaultPruneEpsilon = 1e-12;

inline Word word_mask(unsigned width) {
    return width >= 64 ? ~Word{0} : (Word{1} << width) - 1;
}

inline bool truthy(Word w) { return w != 0; }

// One classical basis state of the whole machine. Ordering is lexicographic
// by pc then cells, which fixes the canonical representation of states.
struct Configuration {
    std::uint64_t pc = 0;
    std::vector<Word> cells;

    auto operator<=>(const Configuration&) const = default;
};

using WeightedConfig = std::pair<Configuration, Amplitude>;

inline Configuration initial_configuration(const MachineSettings& settings) {
    Configuration c;
    c.pc = 0;
    c.cells.assign(settings.cell_count, 0);
    return c;
}

// Superposition as a canonical map from configuration to complex amplitude.
// Entries below the prune threshold never survive construction, and the
// squared norm is cached at build time.
class SparseState {
  public:
    using Entries = std::map<Configuration, Amplitude>;

    SparseState() = default;

    static SparseState single(Configuration config, Amplitude amp = {1.0, 0.0}) {
        SparseState s;
        s.entries_.emplace(std::move(config), amp);
        s.norm_squared_ = std::norm(amp);
        return s;
    }

    // Sums amplitudes of equal configurations and drops entries with
    // |amplitude| < prune_epsilon. Input pairs are sorted by (configuration,
    // amplitude) first, so the floating-point summation order (and therefore
    // the result) is independent of the input permutation.
    static SparseState merge_and_prune(std::vector<WeightedConfig> pairs,
                                       double prune_epsilon = kDefaultPruneEpsilon) {
        std::sort(pairs.begin(), pairs.end(), [](const WeightedConfig& a, const WeightedConfig& b) {
            if (a.first != b.first) return a.first < b.first;
            if (a.second.real() != b.second.real()) return a.second.real() < b.second.real();
            return a.second.imag() < b.second.imag();
        });
        SparseState out;
        const double eps_sq = prune_epsilon * prune_epsilon;
        std::size_t i = 0;
        while (i < pairs.size()) {
            std::size_t j = i;
            Amplitude sum{0.0, 0.0};
            while (j < pairs.size() && pairs[j].first == pairs[i].first) {
                sum += pairs[j].second;
                ++j;
            }
            if (std::norm(sum) >= eps_sq) {
                out.norm_squared_ += std::norm(sum);
                out.entries_.emplace(std::move(pairs[i].first), sum);
            }
            i = j;
        }
        return out;
    }

    const Entries& entries() const { return entries_; }
    std::size_t branch_count() const { return entries_.size(); }
    bool empty() const { return entries_.empty(); }
    double norm_squared() const { return norm_squared_; }

    Amplitude amplitude_of(const Configuration& config) const {
        auto it = entries_.find(config);
        return it == entries_.end() ? Amplitude{0.0, 0.0} : it->second;
    }

    bool operator==(const SparseState& other) const { return entries_ == other.entries_; }

  private:
    Entries entries_;
    double norm_squared_ = 0.0;
};

inline SparseState initial_state(const Program& program) {
    return SparseState::single(initial_configuration(program.settings));
}

}  // namespace qvm
