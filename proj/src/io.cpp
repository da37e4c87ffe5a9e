#include "kdelinalg/io.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <random>

#include "kdelinalg/errors.hpp"
#include "kdelinalg/kernelsum.hpp"

namespace kdelinalg {

namespace {

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\f' || c == '\v'; }

std::vector<double> parse_row(const std::string& line, std::size_t lineno) {
  std::vector<double> out;
  std::size_t i = 0;
  const std::size_t len = line.size();
  bool need_value = false;  // set after a comma
  while (true) {
    while (i < len && is_space(line[i])) ++i;
    if (i == len) {
      if (need_value) throw ParseError(lineno, "missing value after ','");
      break;
    }
    if (line[i] == ',') throw ParseError(lineno, "empty field");
    std::size_t j = i;
    while (j < len && !is_space(line[j]) && line[j] != ',') ++j;
    std::string_view tok(line.data() + i, j - i);
    if (!tok.empty() && tok.front() == '+') tok.remove_prefix(1);
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty())
      throw ParseError(lineno, "not a number: '" + line.substr(i, j - i) + "'");
    if (!std::isfinite(v)) throw ParseError(lineno, "non-finite value: '" + line.substr(i, j - i) + "'");
    out.push_back(v);
    i = j;
    while (i < len && is_space(line[i])) ++i;
    need_value = false;
    if (i < len && line[i] == ',') {
      ++i;
      need_value = true;
    }
  }
  return out;
}

}  // namespace

PointSet read_points(std::istream& in) {
  std::vector<double> flat;
  std::size_t d = 0, n = 0, lineno = 0;
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    const std::vector<double> row = parse_row(line, lineno);
    if (row.empty()) continue;
    if (d == 0) d = row.size();
    if (row.size() != d)
      throw ParseError(lineno, "expected " + std::to_string(d) + " values, found " + std::to_string(row.size()));
    flat.insert(flat.end(), row.begin(), row.end());
    ++n;
  }
  if (n == 0) throw ParseError(lineno + 1, "no points");
  return PointSet(n, d, std::move(flat));
}

PointSet read_points_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ArgumentError("cannot open input file: " + path);
  return read_points(in);
}

std::string format_double(double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

void write_points(std::ostream& out, const PointSet& X) {
  for (std::size_t i = 0; i < X.n(); ++i) {
    for (std::size_t k = 0; k < X.d(); ++k) {
      if (k) out << ',';
      out << format_double(X.data(i)[k]);
    }
    out << '\n';
  }
}

void write_points_file(const std::string& path, const PointSet& X) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot open output file: " + path);
  write_points(out, X);
}

double GeneratorSpec::get(const std::string& key, double fallback) const {
  const auto it = params.find(key);
  return it == params.end() ? fallback : it->second;
}

std::string_view to_string(GeneratorKind kind) {
  switch (kind) {
    case GeneratorKind::Identical: return "identical";
    case GeneratorKind::Separated: return "separated";
    case GeneratorKind::GaussianBlobs: return "gaussian_blobs";
    case GeneratorKind::Dp: return "dp";
  }
  return "unknown";
}

GeneratorSpec parse_generator_spec(std::string_view text) {
  GeneratorSpec spec;
  const auto colon = text.find(':');
  const std::string_view kind = text.substr(0, colon);
  if (kind == "identical") spec.kind = GeneratorKind::Identical;
  else if (kind == "separated") spec.kind = GeneratorKind::Separated;
  else if (kind == "gaussian_blobs" || kind == "blobs") spec.kind = GeneratorKind::GaussianBlobs;
  else if (kind == "dp") spec.kind = GeneratorKind::Dp;
  else throw ArgumentError("unknown generator kind: " + std::string(kind));

  static const std::map<GeneratorKind, std::vector<std::string>> allowed{
      {GeneratorKind::Identical, {"n", "d"}},
      {GeneratorKind::Separated, {"n", "d", "spacing"}},
      {GeneratorKind::GaussianBlobs, {"n", "d", "k", "spread", "box"}},
      {GeneratorKind::Dp, {"n", "p", "scale"}},
  };
  if (colon == std::string_view::npos) return spec;
  std::string_view rest = text.substr(colon + 1);
  while (!rest.empty()) {
    const auto comma = rest.find(',');
    const std::string_view item = rest.substr(0, comma);
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    const auto eq = item.find('=');
    if (eq == std::string_view::npos) throw ArgumentError("generator parameter needs key=value: " + std::string(item));
    const std::string key(item.substr(0, eq));
    const std::string_view val = item.substr(eq + 1);
    const auto& keys = allowed.at(spec.kind);
    if (std::find(keys.begin(), keys.end(), key) == keys.end())
      throw ArgumentError("unknown parameter '" + key + "' for generator " + std::string(kind));
    double v = 0.0;
    const auto [ptr, ec] = std::from_chars(val.data(), val.data() + val.size(), v);
    if (ec != std::errc() || ptr != val.data() + val.size() || !std::isfinite(v))
      throw ArgumentError("bad value for generator parameter '" + key + "'");
    spec.params[key] = v;
  }
  return spec;
}

namespace {

std::size_t count_param(const GeneratorSpec& spec, const std::string& key, double fallback) {
  const double v = spec.get(key, fallback);
  if (!(v >= 1.0) || v != std::floor(v)) throw ArgumentError("generator parameter '" + key + "' must be a positive integer");
  return static_cast<std::size_t>(v);
}

}  // namespace

PointSet generate(const GeneratorSpec& spec, std::uint64_t seed) {
  const std::size_t n = count_param(spec, "n", 100);
  std::mt19937_64 gen(seed);

  if (spec.kind == GeneratorKind::Dp) {
    const double p = spec.get("p", 1.0 / std::sqrt(static_cast<double>(n)));
    return generate_dp_dataset(n, p, spec.get("scale", 0.0), seed);
  }

  const std::size_t d = count_param(spec, "d", 3);
  RowMatrix X(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(d));
  switch (spec.kind) {
    case GeneratorKind::Identical: {
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      Eigen::RowVectorXd p(static_cast<Eigen::Index>(d));
      for (auto& c : p) c = u(gen);
      X.rowwise() = p;
      break;
    }
    case GeneratorKind::Separated: {
      const double spacing = spec.get("spacing", 100.0);
      if (!(spacing > 0.0)) throw ArgumentError("separated: spacing must be positive");
      X.setZero();
      for (Eigen::Index i = 0; i < X.rows(); ++i) X(i, 0) = spacing * static_cast<double>(i);
      break;
    }
    case GeneratorKind::GaussianBlobs: {
      const std::size_t k = count_param(spec, "k", 5);
      const double spread = spec.get("spread", 0.5);
      const double box = spec.get("box", 5.0);
      if (!(spread >= 0.0) || !(box >= 0.0)) throw ArgumentError("gaussian_blobs: spread and box must be >= 0");
      std::uniform_real_distribution<double> u(-box, box);
      RowMatrix centers(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(d));
      for (Eigen::Index i = 0; i < centers.size(); ++i) centers.data()[i] = u(gen);
      std::uniform_int_distribution<Eigen::Index> pick(0, static_cast<Eigen::Index>(k) - 1);
      std::normal_distribution<double> g(0.0, 1.0);
      for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const Eigen::Index c = pick(gen);
        for (Eigen::Index j = 0; j < X.cols(); ++j) X(i, j) = centers(c, j) + spread * g(gen);
      }
      break;
    }
    case GeneratorKind::Dp: break;
  }
  return PointSet(std::move(X));
}

}  // namespace kdelinalg
