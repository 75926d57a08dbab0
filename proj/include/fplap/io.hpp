#pragma once

#include <iosfwd>
#include <string>

#include "fplap/grid.hpp"

namespace fplap {

struct parse_error : std::runtime_error {
  long byte_offset;
  parse_error(const std::string& msg, long byte) : std::runtime_error(msg), byte_offset(byte) {}
};

// All floats in emitted files carry 17 significant digits (round-trip exact).
std::string fmt17(double v);

// {n, h, extent, exterior:{kind, A, alpha}, values:[row-major]}
void write_grid_function_json(std::ostream& os, const GridFunction& u);
GridFunction read_grid_function_json(std::istream& is);
GridFunction read_grid_function_file(const std::string& path);
void write_grid_function_file(const std::string& path, const GridFunction& u);

// columns x1..xn, u
void write_grid_function_csv(std::ostream& os, const GridFunction& u);

}  // namespace fplap
