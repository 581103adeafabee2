#pragma once

#include <string_view>

// Embedded copies of the shipped program corpus. The .qasm files under
// programs/ are the user-facing artifacts; these strings let the benchmark
// harness and tests run without a filesystem lookup. A test pins the two
// copies to each other.

namespace qvm::programs {

inline constexpr std::string_view kListing1 = R"(; nondeterministic multiplication
; produces multiple powers of 2
start:
    havoc d0 0 2
    set d1 subMul
    set d2 2
    set d4 1
    add d0 d1 d3
    setpc d3

subMul:
    mul d4 d2 d4
    mul d4 d2 d4
    mul d4 d2 d4
    mul d4 d2 d4
    stop
)";

inline constexpr std::string_view kListing2Faithful = R"(start:
    ; set number for which is to
    ;   be factorized
    set d0 NUMBER1
    ; havoc is used in range format
    ; each int is represented by 8 bits
    ; NUMBER2 equals log2(sqrt(NUMBER1))
    havoc d1 0 NUMBER2
    add d1 2 d1
    mod d0 d1 d2
    ; d3 is the amount of iterations
    ;   of Grover's algorithm
    add d0 0 d3
    sqrt d3 d3
    div d3 4 d3
    mul d3 3 d3

grover:
    ifte d2 jumpTrue jumpFalse

jumpFalse:
    phase -1.0 0.0
    jump subDiffusion

jumpTrue:
    skip
    jump subDiffusion

subDiffusion:
    diffusion
    sub d3 1 d3
    ifte d3 subStop grover

subStop:
    stop
)";

inline constexpr std::string_view kGroverFixed = R"(; factoring via Grover's search, with the loop condition corrected and the
; iteration count given explicitly.
;
; defines: NUMBER1    number to factor
;          NUMBER2    bit count of the candidate range (candidates are
;                     2 .. 2 + 2^NUMBER2 - 1)
;          ITERATIONS Grover iterations to run
start:
    set d0 NUMBER1
    havoc d1 0 NUMBER2
    add d1 2 d1
    mod d0 d1 d2
    set d3 ITERATIONS

grover:
    ifte d2 jumpTrue jumpFalse

jumpFalse:
    phase -1.0 0.0
    jump subDiffusion

jumpTrue:
    skip
    jump subDiffusion

subDiffusion:
    diffusion
    sub d3 1 d3
    ifte d3 grover subStop

subStop:
    stop
)";

inline constexpr std::string_view kTrialDivision = R"(; classical trial division: the smallest divisor >= 2 of NUMBER1 ends up in
; d1 (NUMBER1 itself when the input is prime).
start:
    set d0 NUMBER1
    set d1 2

loop:
    mod d0 d1 d2
    neg d2
    ifte d2 found next

next:
    add d1 1 d1
    jump loop

found:
    stop
)";

}  // namespace qvm::programs
