#include "fplap/io.hpp"

#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>

#include "json.hpp"

namespace fplap {

std::string fmt17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {
const char* kind_name(Exterior k) {
  switch (k) {
    case Exterior::Zero: return "zero";
    case Exterior::Constant: return "constant";
    default: return "power_decay";
  }
}

Exterior kind_from(const std::string& s) {
  if (s == "zero") return Exterior::Zero;
  if (s == "constant") return Exterior::Constant;
  if (s == "power_decay") return Exterior::PowerDecay;
  throw std::invalid_argument("unknown exterior kind: " + s);
}
}  // namespace

void write_grid_function_json(std::ostream& os, const GridFunction& u) {
  os << "{\"n\":" << u.grid.n << ",\"h\":" << fmt17(u.grid.h)
     << ",\"extent\":" << u.grid.extent << ",\"exterior\":{\"kind\":\""
     << kind_name(u.exterior.kind) << "\",\"A\":" << fmt17(u.exterior.amplitude)
     << ",\"alpha\":" << fmt17(u.exterior.alpha) << "},\"values\":[";
  for (size_t i = 0; i < u.values.size(); ++i) {
    if (i) os << ',';
    os << fmt17(u.values[i]);
  }
  os << "]}\n";
}

GridFunction read_grid_function_json(std::istream& is) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(is);
  } catch (const nlohmann::json::parse_error& e) {
    throw parse_error("parse error at byte " + std::to_string(e.byte) + ": " + e.what(),
                      static_cast<long>(e.byte));
  }
  Grid g(j.at("n").get<int>(), j.at("h").get<double>(), j.at("extent").get<int>());
  ExteriorRule rule;
  const auto& ej = j.at("exterior");
  rule.kind = kind_from(ej.at("kind").get<std::string>());
  rule.amplitude = ej.value("A", 0.0);
  rule.alpha = ej.value("alpha", 0.0);
  if (rule.kind == Exterior::PowerDecay) rule = ExteriorRule::power_decay(rule.amplitude, rule.alpha);
  GridFunction u(g, rule);
  const auto& vals = j.at("values");
  if (static_cast<long>(vals.size()) != g.node_count())
    throw std::invalid_argument("grid function: values length does not match extent");
  for (size_t i = 0; i < vals.size(); ++i) u.values[i] = vals[i].get<double>();
  u.validate_finite();
  return u;
}

GridFunction read_grid_function_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::invalid_argument("cannot open input file: " + path);
  return read_grid_function_json(f);
}

void write_grid_function_file(const std::string& path, const GridFunction& u) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot open output file: " + path);
  write_grid_function_json(f, u);
}

void write_grid_function_csv(std::ostream& os, const GridFunction& u) {
  for (int a = 0; a < u.grid.n; ++a) os << 'x' << (a + 1) << ',';
  os << "u\n";
  const long total = u.grid.node_count();
  for (long f = 0; f < total; ++f) {
    const Index i = u.grid.unflat(f);
    const Point x = u.grid.point(i);
    for (int a = 0; a < u.grid.n; ++a) os << fmt17(x[a]) << ',';
    os << fmt17(u.values[f]) << '\n';
  }
}

}  // namespace fplap
