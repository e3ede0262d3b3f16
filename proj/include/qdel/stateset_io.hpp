// Plain-text state-set files: `#` begins a comment, each state is one line
// of `label re0 im0 re1 im1 ...`, whitespace separated. The dimension is
// inferred from the token count and must be uniform across lines; states
// are normalized at load time.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>

#include "qdel/machine.hpp"

namespace qdel {

struct ParseError : std::runtime_error {
  ParseError(int line_number, const std::string& message)
      : std::runtime_error("line " + std::to_string(line_number) + ": " + message),
        line(line_number) {}
  int line;
};

StateSet parse_state_set(std::istream& in);
StateSet read_state_set(const std::filesystem::path& path);
void write_state_set(std::ostream& out, const StateSet& set);

// 17 significant digits, enough for exact double round-trips.
std::string format_double(double value);

}  // namespace qdel
