#pragma once

#include <stdexcept>
#include <string>

namespace tcbforge {

// Caller broke an operation's precondition (bad arity, foreign id, pseudo
// where none is allowed, ...). These are bugs in the caller, not inputs.
struct ContractError : std::logic_error {
  using std::logic_error::logic_error;
};

// Assembly text rejected. Carries the 1-based line number of the offence.
struct ParseError : std::runtime_error {
  int line;
  ParseError(int line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg),
        line(line_) {}
};

// An instruction could not be rendered as text (out-of-range immediate).
// Printing never truncates silently.
struct PrintError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace tcbforge
