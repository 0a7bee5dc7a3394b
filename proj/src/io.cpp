#include "ccs/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

namespace ccs {

std::string format_real(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_population(std::ostream& out, const PopulationGrid& pop) {
  const Grid& g = pop.values;
  std::string label = pop.label;
  for (char& c : label)
    if (c == '\n' || c == '\r') c = ' ';
  out << "# ccs-pop v1, nm=" << g.rows() << ", nd=" << g.cols() << ", label=" << label << "\n";
  std::string line;
  for (std::size_t i = 0; i < g.rows(); ++i) {
    line.clear();
    const auto r = g.row(i);
    for (std::size_t k = 0; k < r.size(); ++k) {
      if (k) line += ',';
      line += format_real(r[k]);
    }
    line += '\n';
    out << line;
  }
}

void write_population(const std::filesystem::path& path, const PopulationGrid& pop) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  write_population(out, pop);
  if (!out) throw std::runtime_error("write failed for '" + path.string() + "'");
}

namespace {

std::size_t header_int(const std::string& header, const std::string& key,
                       const std::string& source) {
  const auto pos = header.find(key + "=");
  if (pos == std::string::npos) {
    throw std::runtime_error(source + ": header lacks '" + key + "='");
  }
  std::size_t v = 0;
  const char* first = header.data() + pos + key.size() + 1;
  auto [ptr, ec] = std::from_chars(first, header.data() + header.size(), v);
  if (ec != std::errc() || ptr == first) {
    throw std::runtime_error(source + ": bad integer for '" + key + "'");
  }
  return v;
}

}  // namespace

PopulationGrid read_population(std::istream& in, const std::string& source) {
  std::string header;
  if (!std::getline(in, header)) throw std::runtime_error(source + ": empty population file");
  if (header.rfind("# ccs-pop v1", 0) != 0) {
    throw std::runtime_error(source + ": missing '# ccs-pop v1' header");
  }
  const std::size_t nm = header_int(header, "nm", source);
  const std::size_t nd = header_int(header, "nd", source);
  if (nm == 0 || nd == 0) throw std::runtime_error(source + ": empty grid dimensions");
  std::string label;
  if (const auto lp = header.find("label="); lp != std::string::npos) {
    label = header.substr(lp + 6);
    while (!label.empty() && (label.back() == '\r')) label.pop_back();
  }
  Grid g(nm, nd);
  std::string line;
  for (std::size_t i = 0; i < nm; ++i) {
    if (!std::getline(in, line)) {
      throw std::runtime_error(source + ": expected " + std::to_string(nm) + " rows, got " +
                               std::to_string(i));
    }
    const char* p = line.data();
    const char* end = line.data() + line.size();
    while (end > p && (end[-1] == '\r' || end[-1] == ' ')) --end;
    for (std::size_t k = 0; k < nd; ++k) {
      while (p < end && *p == ' ') ++p;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(p, end, v);
      if (ec != std::errc() || ptr == p || !std::isfinite(v)) {
        throw std::runtime_error(source + ": bad value at row " + std::to_string(i + 1) +
                                 ", column " + std::to_string(k + 1));
      }
      g(i, k) = v;
      p = ptr;
      while (p < end && *p == ' ') ++p;
      if (k + 1 < nd) {
        if (p >= end || *p != ',') {
          throw std::runtime_error(source + ": row " + std::to_string(i + 1) + " has fewer than " +
                                   std::to_string(nd) + " values");
        }
        ++p;
      }
    }
    if (p != end) {
      throw std::runtime_error(source + ": row " + std::to_string(i + 1) + " has more than " +
                               std::to_string(nd) + " values");
    }
  }
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \r\t") != std::string::npos) {
      throw std::runtime_error(source + ": trailing data after " + std::to_string(nm) + " rows");
    }
  }
  return {std::move(g), label};
}

PopulationGrid read_population(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open population file '" + path.string() + "'");
  return read_population(in, path.string());
}

void write_manifest(const std::filesystem::path& path, const std::vector<ManifestEntry>& entries) {
  nlohmann::json j;
  j["variables"] = nlohmann::json::array();
  for (const auto& e : entries) {
    j["variables"].push_back({{"name", e.name}, {"path", e.path.generic_string()}});
  }
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  out << j.dump(2) << "\n";
}

std::vector<ManifestEntry> read_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open manifest '" + path.string() + "'");
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw std::runtime_error("manifest '" + path.string() + "': " + e.what());
  }
  if (!j.contains("variables") || !j["variables"].is_array()) {
    throw std::runtime_error("manifest '" + path.string() + "' lacks a 'variables' array");
  }
  std::vector<ManifestEntry> out;
  for (const auto& v : j["variables"]) {
    ManifestEntry e{v.at("name").get<std::string>(), v.at("path").get<std::string>()};
    if (e.path.is_relative()) e.path = path.parent_path() / e.path;
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace ccs
