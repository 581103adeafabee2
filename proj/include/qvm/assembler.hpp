#pragma once

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "qvm/isa.hpp"

// Two-pass assembler for the .qasm surface syntax, plus the canonical
// disassembler and the post-parse lint pass.
//
// Grammar:
//   program  := line*
//   line     := [ident ":"] [instr] [";" comment] NEWLINE
//   instr    := mnemonic operand*
//   operand  := cellref | int | float | ident
//   cellref  := "d" uint
//
// Mnemonics are case-insensitive; labels and defines are case-sensitive.
// Identifiers resolve against labels first, then against defines. A label
// binds to the index of the next instruction after the label line.

namespace qvm {

enum class Severity { error, warning };

struct ParseDiagnostic {
    std::size_t line = 0;    // 1-based into the original source
    std::size_t column = 0;  // 1-based
    std::string message;
    Severity severity = Severity::error;
};

struct ParseResult {
    std::optional<Program> program;
    std::vector<ParseDiagnostic> diagnostics;

    bool ok() const { return program.has_value(); }
};

using DefineMap = std::map<std::string, std::int64_t>;

namespace detail {

struct Token {
    std::string text;
    std::size_t column;  // 1-based
};

struct SourceLine {
    std::size_t number = 0;  // 1-based
    std::optional<Token> label;
    std::vector<Token> tokens;  // mnemonic + operands
};

inline bool is_ident(std::string_view s) {
    if (s.empty()) return false;
    if (!std::isalpha(static_cast<unsigned char>(s[0])) && s[0] != '_') return false;
    for (char c : s) {
        if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
    }
    return true;
}

inline bool is_cellref(std::string_view s) {
    if (s.size() < 2 || s[0] != 'd') return false;
    for (char c : s.substr(1)) {
        if (!std::isdigit(static_cast<unsigned char>(c))) return false;
    }
    return true;
}

inline bool is_int_literal(std::string_view s) {
    if (s.empty()) return false;
    std::size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i) {
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    }
    return true;
}

inline bool is_float_literal(std::string_view s) {
    if (s.find('.') == std::string_view::npos && s.find('e') == std::string_view::npos &&
        s.find('E') == std::string_view::npos) {
        return false;
    }
    std::string copy(s);
    char* end = nullptr;
    std::strtod(copy.c_str(), &end);
    return end == copy.c_str() + copy.size() && !copy.empty();
}

inline std::vector<SourceLine> scan(std::string_view source) {
    std::vector<SourceLine> lines;
    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos <= source.size()) {
        std::size_t eol = source.find('\n', pos);
        std::string_view raw =
            eol == std::string_view::npos ? source.substr(pos) : source.substr(pos, eol - pos);
        ++line_no;

        std::size_t comment = raw.find(';');
        if (comment != std::string_view::npos) raw = raw.substr(0, comment);

        SourceLine line;
        line.number = line_no;
        std::size_t i = 0;
        while (i < raw.size()) {
            while (i < raw.size() && std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
            if (i >= raw.size()) break;
            std::size_t start = i;
            while (i < raw.size() && !std::isspace(static_cast<unsigned char>(raw[i]))) ++i;
            line.tokens.push_back({std::string(raw.substr(start, i - start)), start + 1});
        }
        // label prefix: first token ending in ':'
        if (!line.tokens.empty() && line.tokens[0].text.size() > 1 &&
            line.tokens[0].text.back() == ':') {
            Token label = line.tokens[0];
            label.text.pop_back();
            line.label = label;
            line.tokens.erase(line.tokens.begin());
        }
        if (line.label || !line.tokens.empty()) lines.push_back(std::move(line));

        if (eol == std::string_view::npos) break;
        pos = eol + 1;
    }
    return lines;
}

inline const char* slot_noun(SlotKind slot) {
    switch (slot) {
        case SlotKind::cell: return "a cell reference";
        case SlotKind::source: return "a cell reference or integer immediate";
        case SlotKind::imm: return "an integer immediate";
        case SlotKind::target: return "a jump target";
        case SlotKind::real: return "a real number";
    }
    return "an operand";
}

}  // namespace detail

// Two-pass assembly: pass 1 collects labels, pass 2 resolves operands
// against the signature table. Diagnostics accumulate; the program is only
// produced when no errors occurred.
inline ParseResult parse(std::string_view source, const DefineMap& defines = {},
                         const MachineSettings& settings = {}) {
    ParseResult result;
    auto error = [&](std::size_t line, std::size_t col, std::string msg) {
        result.diagnostics.push_back({line, col, std::move(msg), Severity::error});
    };

    std::vector<detail::SourceLine> lines = detail::scan(source);

    // Pass 1: label table.
    Program program;
    program.settings = settings;
    std::size_t instr_count = 0;
    for (const auto& line : lines) {
        if (line.label) {
            const std::string& name = line.label->text;
            if (!detail::is_ident(name)) {
                error(line.number, line.label->column, "invalid label name '" + name + "'");
            } else if (detail::is_cellref(name)) {
                error(line.number, line.label->column,
                      "label '" + name + "' would shadow cell reference syntax");
            } else if (program.labels.count(name)) {
                error(line.number, line.label->column, "duplicate label '" + name + "'");
            } else {
                program.labels[name] = instr_count;
            }
        }
        if (!line.tokens.empty()) ++instr_count;
    }
    const std::size_t program_length = instr_count;

    // Pass 2: instructions and operand resolution.
    for (const auto& line : lines) {
        if (line.tokens.empty()) continue;
        const detail::Token& head = line.tokens[0];
        auto op = opcode_from_mnemonic(head.text);
        if (!op) {
            error(line.number, head.column, "unknown mnemonic '" + head.text + "'");
            continue;
        }
        const OpcodeSignature& sig = signature_of(*op);
        const std::size_t given = line.tokens.size() - 1;
        if (given != sig.arity) {
            error(line.number, head.column,
                  std::string(sig.mnemonic) + " expects " + std::to_string(sig.arity) +
                      " operand(s), got " + std::to_string(given));
            continue;
        }

        Instruction instr;
        instr.op = *op;
        bool line_ok = true;
        for (std::size_t k = 0; k < sig.arity; ++k) {
            const detail::Token& tok = line.tokens[k + 1];
            const SlotKind slot = sig.slots[k];
            auto reject = [&](const std::string& got) {
                error(line.number, tok.column,
                      std::string(sig.mnemonic) + " operand " + std::to_string(k + 1) +
                          " expects " + detail::slot_noun(slot) + ", got " + got);
                line_ok = false;
            };

            std::optional<std::int64_t> int_value;     // literal or define
            std::optional<std::int64_t> label_value;   // instruction index
            std::optional<double> float_value;
            bool is_cell = false;
            std::int64_t cell_index = 0;

            if (detail::is_cellref(tok.text)) {
                is_cell = true;
                cell_index = std::strtoll(tok.text.c_str() + 1, nullptr, 10);
                if (cell_index < 0 || static_cast<std::uint64_t>(cell_index) >= settings.cell_count) {
                    error(line.number, tok.column,
                          "cell index " + std::to_string(cell_index) + " out of range (cell count " +
                              std::to_string(settings.cell_count) + ")");
                    line_ok = false;
                    continue;
                }
            } else if (detail::is_int_literal(tok.text)) {
                int_value = std::strtoll(tok.text.c_str(), nullptr, 10);
            } else if (detail::is_float_literal(tok.text)) {
                float_value = std::strtod(tok.text.c_str(), nullptr);
            } else if (detail::is_ident(tok.text)) {
                if (auto it = program.labels.find(tok.text); it != program.labels.end()) {
                    label_value = static_cast<std::int64_t>(it->second);
                } else if (auto dt = defines.find(tok.text); dt != defines.end()) {
                    int_value = dt->second;
                } else {
                    error(line.number, tok.column, "unresolved identifier '" + tok.text + "'");
                    line_ok = false;
                    continue;
                }
            } else {
                reject("'" + tok.text + "'");
                continue;
            }

            auto check_address = [&](std::int64_t value) {
                if (value < 0 || static_cast<std::size_t>(value) >= program_length) {
                    error(line.number, tok.column,
                          "address " + std::to_string(value) + " outside program of length " +
                              std::to_string(program_length));
                    line_ok = false;
                    return false;
                }
                return true;
            };

            switch (slot) {
                case SlotKind::cell:
                    if (!is_cell) { reject("'" + tok.text + "'"); break; }
                    instr.operands.push_back(Operand::cell(cell_index));
                    break;
                case SlotKind::source:
                    if (is_cell) {
                        instr.operands.push_back(Operand::cell(cell_index));
                    } else if (label_value) {
                        if (check_address(*label_value))
                            instr.operands.push_back(Operand::address(*label_value));
                    } else if (int_value) {
                        instr.operands.push_back(Operand::int_imm(*int_value));
                    } else {
                        reject("a real number");
                    }
                    break;
                case SlotKind::imm:
                    if (label_value) {
                        if (check_address(*label_value))
                            instr.operands.push_back(Operand::address(*label_value));
                    } else if (int_value) {
                        instr.operands.push_back(Operand::int_imm(*int_value));
                    } else {
                        reject(is_cell ? "a cell reference" : "a real number");
                    }
                    break;
                case SlotKind::target: {
                    std::optional<std::int64_t> value =
                        label_value ? label_value : int_value;
                    if (!value) {
                        reject(is_cell ? "a cell reference" : "a real number");
                        break;
                    }
                    if (check_address(*value)) instr.operands.push_back(Operand::address(*value));
                    break;
                }
                case SlotKind::real:
                    if (float_value) {
                        instr.operands.push_back(Operand::float_imm(*float_value));
                    } else if (int_value) {
                        // integer literals promote to reals in phase positions
                        instr.operands.push_back(Operand::float_imm(static_cast<double>(*int_value)));
                    } else {
                        reject(is_cell ? "a cell reference" : "'" + tok.text + "'");
                    }
                    break;
            }
        }
        if (line_ok) {
            program.instructions.push_back(std::move(instr));
            program.source_lines.push_back(line.number);
        }
    }

    for (const auto& d : result.diagnostics) {
        if (d.severity == Severity::error) return result;
    }
    result.program = std::move(program);
    return result;
}

namespace detail {

inline std::string format_real(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    std::string s(buf);
    if (s.find('.') == std::string::npos && s.find('e') == std::string::npos &&
        s.find('E') == std::string::npos && s.find("inf") == std::string::npos &&
        s.find("nan") == std::string::npos) {
        s += ".0";
    }
    return s;
}

}  // namespace detail

// Canonical lowercase text. Every address operand target gets a synthetic
// label L<index>; reparsing the output yields an equal Program.
inline std::string disassemble(const Program& program) {
    std::set<std::size_t> targets;
    for (const auto& instr : program.instructions) {
        for (const auto& op : instr.operands) {
            if (op.kind == OperandKind::address) targets.insert(static_cast<std::size_t>(op.ivalue));
        }
    }
    std::ostringstream out;
    for (std::size_t i = 0; i < program.instructions.size(); ++i) {
        const Instruction& instr = program.instructions[i];
        if (targets.count(i)) out << "L" << i << ":\n";
        out << "  " << mnemonic_of(instr.op);
        for (const auto& op : instr.operands) {
            out << ' ';
            switch (op.kind) {
                case OperandKind::cell: out << 'd' << op.ivalue; break;
                case OperandKind::int_imm: out << op.ivalue; break;
                case OperandKind::address: out << 'L' << op.ivalue; break;
                case OperandKind::float_imm: out << detail::format_real(op.fvalue); break;
            }
        }
        out << '\n';
    }
    return out.str();
}

// Lint pass: diagnostics only, never errors.
inline std::vector<ParseDiagnostic> validate(const Program& program) {
    std::vector<ParseDiagnostic> out;
    auto line_of = [&](std::size_t index) -> std::size_t {
        return index < program.source_lines.size() ? program.source_lines[index] : 0;
    };

    if (!program.instructions.empty()) {
        const Instruction& last = program.instructions.back();
        switch (last.op) {
            case Opcode::stop:
            case Opcode::jump:
            case Opcode::setpc:
            case Opcode::ifte:
                break;
            default:
                out.push_back({line_of(program.instructions.size() - 1), 1,
                               "last instruction falls through past the end of the program",
                               Severity::warning});
                break;
        }
    }
    for (std::size_t i = 0; i < program.instructions.size(); ++i) {
        const Instruction& instr = program.instructions[i];
        if (instr.op == Opcode::phase) {
            double mag = std::hypot(instr.operands[0].fvalue, instr.operands[1].fvalue);
            if (std::abs(mag - 1.0) > 1e-9) {
                out.push_back({line_of(i), 1,
                               "non-unit phase factor magnitude " + detail::format_real(mag),
                               Severity::warning});
            }
        } else if (instr.op == Opcode::havoc) {
            if (instr.operands[1].ivalue == instr.operands[2].ivalue) {
                out.push_back({line_of(i), 1, "havoc range is empty", Severity::warning});
            }
        }
    }
    return out;
}

}  // namespace qvm
