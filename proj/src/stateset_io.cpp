#include "qdel/stateset_io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <vector>

namespace qdel {

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", value);
  return buf;
}

StateSet parse_state_set(std::istream& in) {
  std::vector<Ket> states;
  std::vector<std::string> labels;
  int dim = -1;
  std::string line;
  int line_number = 0;
  while (std::getline(in, line)) {
    ++line_number;
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string label;
    if (!(tokens >> label)) continue;  // blank or comment-only line

    std::vector<double> values;
    std::string tok;
    while (tokens >> tok) {
      try {
        size_t used = 0;
        double v = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument(tok);
        values.push_back(v);
      } catch (const std::exception&) {
        throw ParseError(line_number, "not a number: '" + tok + "'");
      }
    }
    if (values.empty()) throw ParseError(line_number, "state has no amplitudes");
    if (values.size() % 2 != 0) {
      throw ParseError(line_number, "odd amplitude token count; need re/im pairs");
    }
    int d = static_cast<int>(values.size() / 2);
    if (dim == -1) {
      dim = d;
    } else if (d != dim) {
      throw ParseError(line_number, "dimension " + std::to_string(d) +
                                        " does not match earlier dimension " +
                                        std::to_string(dim));
    }
    Eigen::VectorXcd amps(d);
    for (int i = 0; i < d; ++i) amps[i] = cxd(values[2 * i], values[2 * i + 1]);
    try {
      states.push_back(Ket::normalized(std::move(amps), {d}));
    } catch (const std::exception& e) {
      throw ParseError(line_number, e.what());
    }
    labels.push_back(label);
  }
  if (states.empty()) throw ParseError(line_number, "no states in file");
  return StateSet(std::move(states), std::move(labels));
}

StateSet read_state_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open state-set file: " + path.string());
  return parse_state_set(in);
}

void write_state_set(std::ostream& out, const StateSet& set) {
  out << "# state set: label re0 im0 re1 im1 ...\n";
  for (int k = 0; k < set.size(); ++k) {
    out << set.labels()[k];
    const auto& amps = set.state(k).amplitudes();
    for (long i = 0; i < amps.size(); ++i) {
      out << ' ' << format_double(amps[i].real()) << ' ' << format_double(amps[i].imag());
    }
    out << '\n';
  }
}

}  // namespace qdel
