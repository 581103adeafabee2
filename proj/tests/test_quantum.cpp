#include <catch_amalgamated.hpp>

#include <array>
#include <cmath>
#include <random>

#include "qvm/quantum.hpp"
#include "qvm/state.hpp"

using namespace qvm;
using Catch::Matchers::WithinAbs;

namespace {

constexpr MachineSettings kSettings{8, 2, 1000};
constexpr std::size_t kLength = 10;

Configuration config_with(Word c0, Word c1 = 0, std::uint64_t pc = 0) {
    Configuration c;
    c.pc = pc;
    c.cells = {c0, c1};
    return c;
}

double group_norm(const std::vector<WeightedConfig>& group) {
    double total = 0.0;
    for (const auto& [c, a] : group) total += std::norm(a);
    return total;
}

Amplitude amp_of(const SparseState& s, Word c0, Word c1 = 0, std::uint64_t pc = 1) {
    return s.amplitude_of(config_with(c0, c1, pc));
}

}  // namespace

TEST_CASE("hadamard on one bit splits and signs correctly") {
    SECTION("H|0>") {
        auto out = apply_hadamard_bit({{config_with(0), {1.0, 0.0}}}, 0, 0, kSettings, kLength);
        SparseState s = SparseState::merge_and_prune(out);
        CHECK_THAT(amp_of(s, 0).real(), WithinAbs(kInvSqrt2, 1e-15));
        CHECK_THAT(amp_of(s, 1).real(), WithinAbs(kInvSqrt2, 1e-15));
    }
    SECTION("H|1> sign on bit 1") {
        auto out = apply_hadamard_bit({{config_with(2), {1.0, 0.0}}}, 0, 1, kSettings, kLength);
        SparseState s = SparseState::merge_and_prune(out);
        CHECK_THAT(amp_of(s, 0).real(), WithinAbs(kInvSqrt2, 1e-15));
        CHECK_THAT(amp_of(s, 2).real(), WithinAbs(-kInvSqrt2, 1e-15));
    }
    SECTION("H^2 = I after merging") {
        auto first = apply_hadamard_bit({{config_with(0), {1.0, 0.0}}}, 0, 0, kSettings, kLength);
        auto second = apply_hadamard_bit(first, 0, 0, kSettings, kLength);
        SparseState s = SparseState::merge_and_prune(second);
        REQUIRE(s.branch_count() == 1);
        CHECK_THAT(amp_of(s, 0, 0, 2).real(), WithinAbs(1.0, 1e-12));
    }
    SECTION("bit out of range") {
        CHECK_THROWS_AS(apply_hadamard_bit({{config_with(0), {1.0, 0.0}}}, 0, 8, kSettings, kLength),
                        std::out_of_range);
    }
}

TEST_CASE("havoc over a bit range") {
    SECTION("range [0,2) yields the uniform four-value superposition") {
        auto out = apply_havoc_range({{config_with(0), {1.0, 0.0}}}, 0, 0, 2, kSettings, kLength);
        SparseState s = SparseState::merge_and_prune(out);
        REQUIRE(s.branch_count() == 4);
        for (Word v : {0, 1, 2, 3}) {
            CHECK_THAT(amp_of(s, v).real(), WithinAbs(0.5, 1e-15));
        }
    }
    SECTION("empty range only advances the pc") {
        auto out = apply_havoc_range({{config_with(5, 0, 3), {1.0, 0.0}}}, 0, 4, 4, kSettings, kLength);
        REQUIRE(out.size() == 1);
        CHECK(out[0].first == config_with(5, 0, 4));
        CHECK(out[0].second == Amplitude{1.0, 0.0});
    }
    SECTION("applying the range twice is the identity") {
        auto once = apply_havoc_range({{config_with(0), {1.0, 0.0}}}, 0, 0, 2, kSettings, kLength);
        auto twice = apply_havoc_range(once, 0, 0, 2, kSettings, kLength);
        SparseState s = SparseState::merge_and_prune(twice);
        REQUIRE(s.branch_count() == 1);
        CHECK_THAT(amp_of(s, 0, 0, 2).real(), WithinAbs(1.0, 1e-12));
    }
    SECTION("range errors") {
        std::vector<WeightedConfig> g{{config_with(0), {1.0, 0.0}}};
        CHECK_THROWS_AS(apply_havoc_range(g, 0, 0, 9, kSettings, kLength), std::out_of_range);
        CHECK_THROWS_AS(apply_havoc_range(g, 0, 3, 1, kSettings, kLength), std::out_of_range);
    }
}

TEST_CASE("havocb addresses qubits cell-major, little-endian") {
    SECTION("qubit 0 is bit 0 of cell 0") {
        auto out = apply_havocb({{config_with(0, 0), {1.0, 0.0}}}, 0, kSettings, kLength);
        SparseState s = SparseState::merge_and_prune(out);
        CHECK_THAT(amp_of(s, 0, 0).real(), WithinAbs(kInvSqrt2, 1e-15));
        CHECK_THAT(amp_of(s, 1, 0).real(), WithinAbs(kInvSqrt2, 1e-15));
    }
    SECTION("qubit 8 is bit 0 of cell 1 at width 8") {
        auto out = apply_havocb({{config_with(0, 0), {1.0, 0.0}}}, 8, kSettings, kLength);
        SparseState s = SparseState::merge_and_prune(out);
        CHECK_THAT(amp_of(s, 0, 0).real(), WithinAbs(kInvSqrt2, 1e-15));
        CHECK_THAT(amp_of(s, 0, 1).real(), WithinAbs(kInvSqrt2, 1e-15));
    }
    SECTION("qubit 9 spreads cell 1 over {0,2}") {
        auto out = apply_havocb({{config_with(0, 0), {1.0, 0.0}}}, 9, kSettings, kLength);
        SparseState s = SparseState::merge_and_prune(out);
        CHECK_THAT(amp_of(s, 0, 0).real(), WithinAbs(kInvSqrt2, 1e-15));
        CHECK_THAT(amp_of(s, 0, 2).real(), WithinAbs(kInvSqrt2, 1e-15));
    }
    SECTION("qubit index out of range") {
        CHECK_THROWS_AS(apply_havocb({{config_with(0), {1.0, 0.0}}}, 16, kSettings, kLength),
                        std::out_of_range);
    }
}

TEST_CASE("phase multiplies amplitudes of the group only") {
    SECTION("marking flip") {
        auto out = apply_phase({{config_with(3), {0.5, 0.0}}}, -1.0, 0.0, kLength);
        REQUIRE(out.size() == 1);
        CHECK(out[0].second == Amplitude{-0.5, 0.0});
        CHECK(out[0].first.pc == 1);
    }
    SECTION("unit phase is the identity on amplitudes") {
        auto out = apply_phase({{config_with(3), {0.25, -0.5}}}, 1.0, 0.0, kLength);
        CHECK(out[0].second == Amplitude{0.25, -0.5});
    }
    SECTION("i^4 = 1") {
        std::vector<WeightedConfig> g{{config_with(0), {1.0, 0.0}}};
        for (int k = 0; k < 4; ++k) g = apply_phase(g, 0.0, 1.0, kLength);
        CHECK_THAT(g[0].second.real(), WithinAbs(1.0, 1e-15));
        CHECK_THAT(g[0].second.imag(), WithinAbs(0.0, 1e-15));
    }
}

TEST_CASE("diffusion inverts about the group mean") {
    auto group_of = [&](std::array<double, 4> amps) {
        std::vector<WeightedConfig> g;
        for (std::size_t i = 0; i < 4; ++i) {
            g.emplace_back(config_with(static_cast<Word>(i + 2)), Amplitude{amps[i], 0.0});
        }
        return g;
    };

    SECTION("single marked candidate of four goes to certainty") {
        // independent route: the textbook reflection matrix 2J/n - I
        std::array<double, 4> in{0.5, 0.5, 0.5, -0.5};
        std::array<double, 4> expected{};
        for (std::size_t r = 0; r < 4; ++r) {
            for (std::size_t c = 0; c < 4; ++c) {
                expected[r] += ((r == c ? -1.0 : 0.0) + 2.0 / 4.0) * in[c];
            }
        }
        CHECK(expected == std::array<double, 4>{0.0, 0.0, 0.0, 1.0});

        auto out = apply_diffusion(group_of(in), kLength);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK_THAT(out[i].second.real(), WithinAbs(expected[i], 1e-15));
            CHECK(out[i].first.pc == 1);
        }
    }
    SECTION("uniform amplitudes are a fixed point") {
        auto out = apply_diffusion(group_of({0.5, 0.5, 0.5, 0.5}), kLength);
        for (const auto& [c, a] : out) CHECK_THAT(a.real(), WithinAbs(0.5, 1e-15));
    }
    SECTION("zero mean negates") {
        auto out = apply_diffusion(group_of({0.5, -0.5, 0.5, -0.5}), kLength);
        std::array<double, 4> expected{-0.5, 0.5, -0.5, 0.5};
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK_THAT(out[i].second.real(), WithinAbs(expected[i], 1e-15));
        }
    }
    SECTION("empty group rejected") {
        CHECK_THROWS_AS(apply_diffusion({}, kLength), std::invalid_argument);
    }
}

TEST_CASE("quantum transforms preserve or scale the group norm", "[property]") {
    std::mt19937_64 rng(101);
    auto random_group = [&](std::size_t n) {
        std::vector<WeightedConfig> g;
        for (std::size_t i = 0; i < n; ++i) {
            g.emplace_back(config_with(static_cast<Word>(rng() % 16), static_cast<Word>(rng() % 16)),
                           Amplitude{(static_cast<double>(rng() % 256) - 128) / 128.0,
                                     (static_cast<double>(rng() % 256) - 128) / 128.0});
        }
        return SparseState::merge_and_prune(std::move(g));
    };

    for (int trial = 0; trial < 100; ++trial) {
        SparseState s = random_group(1 + rng() % 6);
        if (s.empty()) continue;
        std::vector<WeightedConfig> group(s.entries().begin(), s.entries().end());
        const double before = group_norm(group);

        {
            auto out = apply_hadamard_bit(group, 0, static_cast<unsigned>(rng() % 8), kSettings, kLength);
            CHECK_THAT(SparseState::merge_and_prune(out, 0.0).norm_squared(),
                       WithinAbs(before, 1e-12));
        }
        {
            unsigned lo = static_cast<unsigned>(rng() % 9);
            unsigned hi = lo + static_cast<unsigned>(rng() % (9 - lo));
            auto out = apply_havoc_range(group, 1, lo, hi, kSettings, kLength);
            CHECK_THAT(SparseState::merge_and_prune(out, 0.0).norm_squared(),
                       WithinAbs(before, 1e-12));
        }
        {
            auto out = apply_diffusion(group, kLength);
            CHECK_THAT(group_norm(out), WithinAbs(before, 1e-12));

            // involution: a second application restores the group
            auto back = apply_diffusion(out, kLength);
            for (std::size_t i = 0; i < group.size(); ++i) {
                CHECK_THAT(back[i].second.real(), WithinAbs(group[i].second.real(), 1e-12));
                CHECK_THAT(back[i].second.imag(), WithinAbs(group[i].second.imag(), 1e-12));
            }
        }
        {
            const double x = (static_cast<double>(rng() % 100) - 50) / 25.0;
            const double y = (static_cast<double>(rng() % 100) - 50) / 25.0;
            auto out = apply_phase(group, x, y, kLength);
            CHECK_THAT(group_norm(out), WithinAbs(before * (x * x + y * y), 1e-12));
        }
    }
}

TEST_CASE("havoc over the full word is the uniform distribution", "[property]") {
    for (unsigned w = 1; w <= 6; ++w) {
        MachineSettings settings{w, 1, 1000};
        Configuration zero;
        zero.cells = {0};
        auto out = apply_havoc_range({{zero, {1.0, 0.0}}}, 0, 0, w, settings, kLength);
        SparseState s = SparseState::merge_and_prune(out);
        REQUIRE(s.branch_count() == (std::size_t{1} << w));
        const double expected = std::pow(2.0, -static_cast<double>(w));
        for (const auto& [config, amp] : s.entries()) {
            CHECK_THAT(std::norm(amp), WithinAbs(expected, 1e-12));
        }
    }
}
