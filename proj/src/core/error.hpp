#pragma once

#include <stdexcept>
#include <string>

namespace resched {

// Malformed instance text. Carries the 1-based line and column of the token
// that broke the parse (column 0 when the problem is the line as a whole).
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& message, int line, int col = 0)
        : std::runtime_error("line " + std::to_string(line) +
                             (col > 0 ? ", col " + std::to_string(col) : std::string()) +
                             ": " + message),
          line_(line),
          col_(col) {}

    int line() const { return line_; }
    int col() const { return col_; }

private:
    int line_;
    int col_;
};

// A dispatch that violates the construction rules (busy machine, unready
// operation, not a legal option pair).
class IllegalAction : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace resched
