#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "ccs/grid.hpp"

namespace ccs {

// Population file:
//   # ccs-pop v1, nm=<int>, nd=<int>, label=<text>
//   N_M lines of N_D comma-separated values printed with 17 significant digits.
void write_population(std::ostream& out, const PopulationGrid& pop);
void write_population(const std::filesystem::path& path, const PopulationGrid& pop);
PopulationGrid read_population(std::istream& in, const std::string& source = "<stream>");
PopulationGrid read_population(const std::filesystem::path& path);

struct ManifestEntry {
  std::string name;
  std::filesystem::path path;
};

// {"variables": [{"name": ..., "path": ...}]}; relative paths resolve against
// the manifest's directory.
void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries);
std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path);

std::string format_real(double v);

}  // namespace ccs
