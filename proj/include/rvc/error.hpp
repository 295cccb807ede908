#pragma once

#include <stdexcept>
#include <string>

namespace rvc {

struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

// Malformed input text or files; carries a human-readable position.
struct ParseError : Error {
    ParseError(const std::string& what, int line, int column)
        : Error("parse error at " + std::to_string(line) + ":" + std::to_string(column) + ": " + what),
          line(line),
          column(column)
    {
    }
    int line;
    int column;
};

// A guarded enumeration would exceed its configured cap.
struct CapExceeded : Error {
    explicit CapExceeded(const std::string& what) : Error(what) {}
};

} // namespace rvc
