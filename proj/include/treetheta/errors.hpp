#pragma once

#include <stdexcept>
#include <string>

namespace treetheta {

// Invalid or degenerate data: validation failures, estimator domain
// violations, file contents that cannot be used. The CLI maps this to
// exit code 3; programmer errors (bad call arguments) stay
// std::invalid_argument.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Data error tagged with the 1-based source line it was found on.
struct ParseError : DataError {
    ParseError(int line_number, const std::string& message)
        : DataError("line " + std::to_string(line_number) + ": " + message),
          line(line_number) {}

    int line;
};

}  // namespace treetheta
