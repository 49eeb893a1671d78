#pragma once

#include <charconv>
#include <cmath>
#include <optional>
#include <fstream>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <Eigen/Sparse>

#include "osgm/error.hpp"
#include "osgm/linalg.hpp"
#include "osgm/problems.hpp"
#include "osgm/rng.hpp"
#include "osgm/scaling.hpp"

namespace osgm {

/// LIBSVM data: one label and one sorted sparse row per sample.
/// Indices are 1-based as in the file format.
struct SparseDataset {
  std::vector<std::vector<std::pair<long, double>>> rows;
  std::vector<double> labels;
  long num_features = 0;

  std::size_t size() const { return rows.size(); }
  bool operator==(const SparseDataset&) const = default;
};

namespace detail {

inline std::string position(std::size_t line, std::size_t column) {
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

/// from_chars with an optional leading '+'.
inline bool read_double(std::string_view s, double& out) {
  if (s.size() > 1 && s[0] == '+' && s[1] != '-' && s[1] != '+') s.remove_prefix(1);
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

inline bool read_long(std::string_view s, long& out) {
  auto res = std::from_chars(s.data(), s.data() + s.size(), out);
  return res.ec == std::errc() && res.ptr == s.data() + s.size();
}

}  // namespace detail

/// Parses LIBSVM text. Blank lines and '#' comments (whole-line or
/// trailing) are skipped. Errors name the 1-based line and column.
inline SparseDataset parse_libsvm(std::string_view text) {
  SparseDataset ds;
  std::size_t line_no = 0;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    ++line_no;
    start = end + 1;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);

    std::vector<std::pair<std::size_t, std::string_view>> tokens;  // (column, token)
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) tokens.emplace_back(i + 1, line.substr(i, j - i));
      i = j;
    }
    if (tokens.empty()) {
      if (end == text.size()) break;
      continue;
    }

    double label = 0.0;
    if (!detail::read_double(tokens[0].second, label)) {
      throw Error(ErrorCode::parse_error, "unparseable label '" + std::string(tokens[0].second) +
                                              "' at " + detail::position(line_no, tokens[0].first));
    }
    std::vector<std::pair<long, double>> row;
    for (std::size_t t = 1; t < tokens.size(); ++t) {
      const auto [col, tok] = tokens[t];
      const auto colon = tok.find(':');
      if (colon == std::string_view::npos || colon == 0 || colon + 1 == tok.size()) {
        throw Error(ErrorCode::parse_error, "malformed pair '" + std::string(tok) + "' at " +
                                                detail::position(line_no, col));
      }
      long index = 0;
      if (!detail::read_long(tok.substr(0, colon), index) || index < 1) {
        throw Error(ErrorCode::parse_error, "bad feature index '" +
                                                std::string(tok.substr(0, colon)) + "' at " +
                                                detail::position(line_no, col));
      }
      double value = 0.0;
      if (!detail::read_double(tok.substr(colon + 1), value)) {
        throw Error(ErrorCode::parse_error, "unparseable number '" +
                                                std::string(tok.substr(colon + 1)) + "' at " +
                                                detail::position(line_no, col + colon + 1));
      }
      if (!row.empty() && index <= row.back().first) {
        throw Error(ErrorCode::parse_error, "non-increasing feature index at line " +
                                                std::to_string(line_no) + ", column " +
                                                std::to_string(col));
      }
      row.emplace_back(index, value);
      ds.num_features = std::max(ds.num_features, index);
    }
    ds.labels.push_back(label);
    ds.rows.push_back(std::move(row));
    if (end == text.size()) break;
  }
  return ds;
}

/// Shortest round-trip formatting; parse_libsvm(serialize_libsvm(d)) == d
/// up to num_features, which is recomputed from the rows.
inline std::string serialize_libsvm(const SparseDataset& ds) {
  if (ds.rows.size() != ds.labels.size()) {
    throw Error(ErrorCode::dimension_mismatch, "dataset has different row and label counts");
  }
  std::string out;
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    out += detail::format_double(ds.labels[r]);
    for (const auto& [index, value] : ds.rows[r]) {
      out += ' ';
      out += std::to_string(index);
      out += ':';
      out += detail::format_double(value);
    }
    out += '\n';
  }
  return out;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io_error, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io_error, "cannot write '" + path + "'");
  out << content;
  if (!out) throw Error(ErrorCode::io_error, "write failed for '" + path + "'");
}

inline SparseDataset load_libsvm(const std::string& path) {
  try {
    return parse_libsvm(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse_error) throw Error(ErrorCode::parse_error, path + ": " + e.what());
    throw;
  }
}

/// Feature matrix with 0-based columns.
inline SparseRows to_sparse_rows(const SparseDataset& ds, long num_features = 0) {
  const long n = std::max(num_features, ds.num_features);
  if (n == 0 || ds.rows.empty()) throw Error(ErrorCode::invalid_argument, "empty dataset");
  std::vector<Eigen::Triplet<double>> trips;
  for (std::size_t r = 0; r < ds.rows.size(); ++r)
    for (const auto& [index, value] : ds.rows[r])
      trips.emplace_back(static_cast<int>(r), static_cast<int>(index - 1), value);
  SparseRows x(static_cast<Eigen::Index>(ds.rows.size()), n);
  x.setFromTriplets(trips.begin(), trips.end());
  return x;
}

/// Squared-hinge SVM on a LIBSVM dataset with lambda = 5/n (n features)
/// unless given. Labels must be +-1.
inline Objective make_svm(const SparseDataset& ds, std::optional<double> lambda = std::nullopt) {
  SparseRows x = to_sparse_rows(ds);
  Vec y(static_cast<Eigen::Index>(ds.labels.size()));
  for (std::size_t i = 0; i < ds.labels.size(); ++i) y[static_cast<Eigen::Index>(i)] = ds.labels[i];
  const double lam = lambda.value_or(5.0 / static_cast<double>(x.cols()));
  return make_objective<SvmSquaredHingeInstance>(std::move(x), std::move(y), lam);
}

/// Seeded least-squares data: A = C diag(u) C' + sigma I with C = I + 0.01 G.
/// Draw order: G row-major (n^2 normals), then u (n uniforms), then b (n uniforms).
struct GeneratedInstance {
  Mat a;
  Vec b;
  int n = 0;
  double sigma = 0.0;
  std::uint64_t seed = 0;

  Objective objective() const { return make_objective<LeastSquaresInstance>(a, b); }
};

inline GeneratedInstance gen_least_squares(int n, double sigma, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::invalid_argument, "sigma must be >= 0");
  Rng rng(seed);
  Mat g(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) g(i, j) = rng.normal();
  Vec u(n);
  for (int i = 0; i < n; ++i) u[i] = rng.uniform();
  Vec b(n);
  for (int i = 0; i < n; ++i) b[i] = rng.uniform();
  const Mat c = Mat::Identity(n, n) + 0.01 * g;
  Mat a = c * u.asDiagonal() * c.transpose();
  a.diagonal().array() += sigma;
  // Mirror the upper triangle so A is exactly symmetric.
  a.triangularView<Eigen::StrictlyLower>() = a.transpose().triangularView<Eigen::StrictlyLower>();
  return {std::move(a), std::move(b), n, sigma, seed};
}

/// x1 = g/||g|| with g standard normal.
inline Vec init_point(int n, std::uint64_t seed) {
  if (n < 1) throw Error(ErrorCode::invalid_argument, "n must be >= 1");
  Rng rng(seed);
  Vec g(n);
  for (int i = 0; i < n; ++i) g[i] = rng.normal();
  return g / g.norm();
}

/// Instance text: header "n sigma seed", n rows of A, then b on one line.
inline std::string serialize_instance(const GeneratedInstance& inst) {
  std::string out = std::to_string(inst.n) + ' ' + detail::format_double(inst.sigma) + ' ' +
                    std::to_string(inst.seed) + '\n';
  for (int i = 0; i < inst.n; ++i) {
    for (int j = 0; j < inst.n; ++j) {
      if (j) out += ' ';
      out += detail::format_double(inst.a(i, j));
    }
    out += '\n';
  }
  for (int i = 0; i < inst.n; ++i) {
    if (i) out += ' ';
    out += detail::format_double(inst.b[i]);
  }
  out += '\n';
  return out;
}

inline GeneratedInstance parse_instance(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < text.size()) {
    std::size_t end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string_view line = text.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") != std::string_view::npos) lines.push_back(line);
    start = end + 1;
  }
  auto fields = [](std::string_view line) {
    std::vector<std::string_view> out;
    std::size_t i = 0;
    while (i < line.size()) {
      while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) ++i;
      std::size_t j = i;
      while (j < line.size() && line[j] != ' ' && line[j] != '\t') ++j;
      if (j > i) out.push_back(line.substr(i, j - i));
      i = j;
    }
    return out;
  };
  if (lines.empty()) throw Error(ErrorCode::parse_error, "instance: empty input");
  auto header = fields(lines[0]);
  if (header.size() != 3) throw Error(ErrorCode::parse_error, "instance line 1: expected 'n sigma seed'");
  GeneratedInstance inst;
  long n = 0;
  if (!detail::read_long(header[0], n) || n < 1) {
    throw Error(ErrorCode::parse_error, "instance line 1: bad n '" + std::string(header[0]) + "'");
  }
  inst.n = static_cast<int>(n);
  if (!detail::read_double(header[1], inst.sigma)) {
    throw Error(ErrorCode::parse_error, "instance line 1: bad sigma '" + std::string(header[1]) + "'");
  }
  {
    auto res = std::from_chars(header[2].data(), header[2].data() + header[2].size(), inst.seed);
    if (res.ec != std::errc() || res.ptr != header[2].data() + header[2].size()) {
      throw Error(ErrorCode::parse_error, "instance line 1: bad seed '" + std::string(header[2]) + "'");
    }
  }
  if (lines.size() != static_cast<std::size_t>(n) + 2) {
    throw Error(ErrorCode::parse_error, "instance: expected " + std::to_string(n + 2) +
                                            " non-empty lines, got " + std::to_string(lines.size()));
  }
  inst.a.resize(n, n);
  inst.b.resize(n);
  for (long i = 0; i <= n; ++i) {
    auto row = fields(lines[static_cast<std::size_t>(i + 1)]);
    if (row.size() != static_cast<std::size_t>(n)) {
      throw Error(ErrorCode::parse_error, "instance data line " + std::to_string(i + 2) +
                                              ": expected " + std::to_string(n) + " values");
    }
    for (long j = 0; j < n; ++j) {
      double v = 0.0;
      if (!detail::read_double(row[static_cast<std::size_t>(j)], v)) {
        throw Error(ErrorCode::parse_error, "instance data line " + std::to_string(i + 2) +
                                                ": bad number '" +
                                                std::string(row[static_cast<std::size_t>(j)]) + "'");
      }
      if (i < n) inst.a(i, j) = v;
      else inst.b[j] = v;
    }
  }
  return inst;
}

inline GeneratedInstance load_instance(const std::string& path) {
  try {
    return parse_instance(read_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::parse_error) throw Error(ErrorCode::parse_error, path + ": " + e.what());
    throw;
  }
}

/// Least squares with A = diag(sqrt(h)), h log-spaced on [h_min, h_max], so
/// the Hessian is diag(h). b is U[0,1]^n from the seed.
inline Objective log_spaced_diagonal_problem(int n, double h_min, double h_max, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "n must be >= 2");
  Vec h(n);
  for (int i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(n - 1);
    h[i] = h_min * std::pow(h_max / h_min, t);
  }
  Rng rng(seed);
  Vec b(n);
  for (int i = 0; i < n; ++i) b[i] = rng.uniform();
  return make_objective<LeastSquaresInstance>(Mat(h.cwiseSqrt().asDiagonal()), b);
}

/// Small near-diagonal SPD matrix: diagonal log-spaced on [1, scale] plus a
/// symmetric perturbation of relative size `coupling` from the seed.
inline Mat toy_near_diagonal(int n, double scale, double coupling, std::uint64_t seed) {
  if (n < 2) throw Error(ErrorCode::invalid_argument, "n must be >= 2");
  Rng rng(seed);
  Vec diag(n);
  for (int i = 0; i < n; ++i) {
    diag[i] = std::pow(scale, static_cast<double>(i) / static_cast<double>(n - 1));
  }
  Mat e(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) e(i, j) = rng.normal();
  e = (0.5 * (e + e.transpose())).eval();
  const Vec s = diag.cwiseSqrt();
  Mat a = s.asDiagonal() * (Mat::Identity(n, n) + coupling * e / std::sqrt(static_cast<double>(n))) *
          s.asDiagonal();
  a = (0.5 * (a + a.transpose())).eval();
  require_spd(a, "toy matrix");
  return a;
}

}  // namespace osgm
