#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>

#include "kdelinalg/kernels.hpp"

namespace kdelinalg {

// One point per line; coordinates separated by commas and/or whitespace.
// Blank lines are skipped. Ragged rows and bad tokens raise ParseError.
PointSet read_points(std::istream& in);
PointSet read_points_file(const std::string& path);

// Comma-separated, 17 significant digits (round-trips bit-exactly).
void write_points(std::ostream& out, const PointSet& X);
void write_points_file(const std::string& path, const PointSet& X);
std::string format_double(double v);

enum class GeneratorKind { Identical, Separated, GaussianBlobs, Dp };

struct GeneratorSpec {
  GeneratorKind kind = GeneratorKind::GaussianBlobs;
  std::map<std::string, double> params;

  double get(const std::string& key, double fallback) const;
};

// "kind:key=value,key=value", e.g. "gaussian_blobs:n=500,d=5".
GeneratorSpec parse_generator_spec(std::string_view text);
std::string_view to_string(GeneratorKind kind);

// identical       n, d                      one random point repeated
// separated       n, d, spacing (100)       points spacing apart on a line
// gaussian_blobs  n, d, k (5), spread (0.5), box (5)
// dp              n, p (1/sqrt n), scale (auto)
PointSet generate(const GeneratorSpec& spec, std::uint64_t seed);

}  // namespace kdelinalg
