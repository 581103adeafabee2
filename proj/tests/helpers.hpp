#pragma once

#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>

#include "qvm/assembler.hpp"

namespace test_helpers {

inline std::string load_program_file(const std::string& name) {
    const std::string path = std::string(QVM_PROGRAMS_DIR) + "/" + name;
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

inline qvm::Program parse_or_throw(std::string_view source, const qvm::DefineMap& defines = {},
                                   const qvm::MachineSettings& settings = {}) {
    qvm::ParseResult result = qvm::parse(source, defines, settings);
    if (!result.ok()) {
        std::ostringstream msg;
        msg << "parse failed:";
        for (const auto& d : result.diagnostics) {
            msg << " [" << d.line << ':' << d.column << "] " << d.message;
        }
        throw std::runtime_error(msg.str());
    }
    return *result.program;
}

}  // namespace test_helpers
