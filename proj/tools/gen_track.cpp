// Writes the built-in track fixtures as CSV.

#include <cstdio>
#include <fstream>
#include <string>

#include <CLI11.hpp>

#include "cimpcc/track_fixtures.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Generate track fixtures"};
  std::string shape = "stadium-chicane";
  std::string out;
  double spacing = 0.1;
  app.add_option("--shape", shape, "stadium-chicane | stadium | circle")
      ->check(CLI::IsMember({"stadium-chicane", "stadium", "circle"}));
  app.add_option("--spacing", spacing, "Point spacing in meters");
  app.add_option("--out", out, "Output CSV")->required();
  CLI11_PARSE(app, argc, argv);

  using namespace cimpcc;
  const Centerline cl = shape == "stadium"  ? fixtures::stadium(10.0, 2.0, 0.75, spacing)
                        : shape == "circle" ? fixtures::circle(2.0, 200, 0.5)
                                            : fixtures::stadium_chicane(spacing);
  std::ofstream(out, std::ios::binary) << to_csv(cl);
  std::printf("%s: %zu points, %.3f m\n", out.c_str(), cl.size(), cl.total_length());
  return 0;
}
