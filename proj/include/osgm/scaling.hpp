#pragma once

#include <algorithm>
#include <charconv>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "osgm/error.hpp"
#include "osgm/linalg.hpp"

namespace osgm {

enum class PatternKind { full, diagonal, sparse, diag_plus_low_rank };

/// Structured candidate set for the scaling matrix P, plus an optional
/// Frobenius ball. Coordinates per kind:
///   full                n*n entries, row-major
///   diagonal            n diagonal entries
///   sparse              one entry per mask position, in mask order
///   diag_plus_low_rank  (d_1..d_n, alpha) for P = diag(d) + alpha * U V'
struct ScalingPattern {
  PatternKind kind = PatternKind::diagonal;
  Eigen::Index n = 0;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> mask;  // 0-based, row-major sorted
  Mat factor_u;                                             // n x r
  Mat factor_v;                                             // n x r
  std::optional<double> ball_radius;

  static ScalingPattern full(Eigen::Index n) { return make(PatternKind::full, n); }
  static ScalingPattern diagonal(Eigen::Index n) { return make(PatternKind::diagonal, n); }

  static ScalingPattern sparse(Eigen::Index n,
                               std::vector<std::pair<Eigen::Index, Eigen::Index>> mask) {
    ScalingPattern p = make(PatternKind::sparse, n);
    std::sort(mask.begin(), mask.end());
    mask.erase(std::unique(mask.begin(), mask.end()), mask.end());
    for (auto [i, j] : mask) {
      if (i < 0 || j < 0 || i >= n || j >= n) {
        throw Error(ErrorCode::invalid_argument, "sparse mask index out of range");
      }
    }
    p.mask = std::move(mask);
    return p;
  }

  /// P = diag(d) + alpha * U V'.
  static ScalingPattern diag_plus_low_rank(Mat u, Mat v) {
    if (u.rows() != v.rows() || u.cols() != v.cols() || u.rows() == 0) {
      throw Error(ErrorCode::dimension_mismatch, "low-rank factors must have equal shape");
    }
    ScalingPattern p = make(PatternKind::diag_plus_low_rank, u.rows());
    p.factor_u = std::move(u);
    p.factor_v = std::move(v);
    return p;
  }

  static ScalingPattern diag_plus_low_rank(Mat u) {
    Mat v = u;
    return diag_plus_low_rank(std::move(u), std::move(v));
  }

  ScalingPattern with_ball(double radius) const {
    if (!(radius > 0.0)) throw Error(ErrorCode::invalid_argument, "ball radius must be positive");
    ScalingPattern p = *this;
    p.ball_radius = radius;
    return p;
  }

  Eigen::Index num_coeffs() const {
    switch (kind) {
      case PatternKind::full: return n * n;
      case PatternKind::diagonal: return n;
      case PatternKind::sparse: return static_cast<Eigen::Index>(mask.size());
      case PatternKind::diag_plus_low_rank: return n + 1;
    }
    return 0;
  }

  Mat low_rank_dense() const { return factor_u * factor_v.transpose(); }

  bool operator==(const ScalingPattern& o) const {
    return kind == o.kind && n == o.n && mask == o.mask && ball_radius == o.ball_radius &&
           factor_u.rows() == o.factor_u.rows() && factor_u.cols() == o.factor_u.cols() &&
           factor_u == o.factor_u && factor_v == o.factor_v;
  }

 private:
  static ScalingPattern make(PatternKind kind, Eigen::Index n) {
    if (n <= 0) throw Error(ErrorCode::invalid_argument, "pattern dimension must be positive");
    ScalingPattern p;
    p.kind = kind;
    p.n = n;
    return p;
  }
};

struct ScalingMatrix {
  std::shared_ptr<const ScalingPattern> pattern;
  Vec coeffs;

  static ScalingMatrix zero(std::shared_ptr<const ScalingPattern> p) {
    Vec c = Vec::Zero(p->num_coeffs());
    return {std::move(p), std::move(c)};
  }

  Eigen::Index dim() const { return pattern->n; }
};

/// Coefficients of c*I in the pattern, or nullopt when c*I is not representable.
inline std::optional<Vec> scaled_identity(const ScalingPattern& p, double c) {
  Vec out = Vec::Zero(p.num_coeffs());
  switch (p.kind) {
    case PatternKind::full:
      for (Eigen::Index i = 0; i < p.n; ++i) out[i * p.n + i] = c;
      return out;
    case PatternKind::diagonal:
      out.setConstant(c);
      return out;
    case PatternKind::sparse: {
      Eigen::Index found = 0;
      for (std::size_t k = 0; k < p.mask.size(); ++k) {
        if (p.mask[k].first == p.mask[k].second) {
          out[static_cast<Eigen::Index>(k)] = c;
          ++found;
        }
      }
      if (found != p.n) return std::nullopt;
      return out;
    }
    case PatternKind::diag_plus_low_rank:
      out.head(p.n).setConstant(c);
      return out;
  }
  return std::nullopt;
}

/// Dense P for the coefficient vector.
inline Mat materialize(const ScalingPattern& p, const Vec& c) {
  require_dim(c, p.num_coeffs(), "coefficients");
  Mat m = Mat::Zero(p.n, p.n);
  switch (p.kind) {
    case PatternKind::full:
      for (Eigen::Index i = 0; i < p.n; ++i)
        for (Eigen::Index j = 0; j < p.n; ++j) m(i, j) = c[i * p.n + j];
      break;
    case PatternKind::diagonal: m.diagonal() = c; break;
    case PatternKind::sparse:
      for (std::size_t k = 0; k < p.mask.size(); ++k)
        m(p.mask[k].first, p.mask[k].second) = c[static_cast<Eigen::Index>(k)];
      break;
    case PatternKind::diag_plus_low_rank:
      m = c[p.n] * p.low_rank_dense();
      m.diagonal() += c.head(p.n);
      break;
  }
  return m;
}

inline Mat materialize(const ScalingMatrix& s) { return materialize(*s.pattern, s.coeffs); }

/// Coordinates of a dense matrix restricted to the pattern's entries.
/// Not defined for diag_plus_low_rank, whose coordinates are not entries.
inline Vec coefficients_of(const ScalingPattern& p, const Mat& m) {
  if (m.rows() != p.n || m.cols() != p.n) throw Error(ErrorCode::dimension_mismatch, "matrix size");
  Vec c(p.num_coeffs());
  switch (p.kind) {
    case PatternKind::full:
      for (Eigen::Index i = 0; i < p.n; ++i)
        for (Eigen::Index j = 0; j < p.n; ++j) c[i * p.n + j] = m(i, j);
      return c;
    case PatternKind::diagonal: return m.diagonal();
    case PatternKind::sparse:
      for (std::size_t k = 0; k < p.mask.size(); ++k)
        c[static_cast<Eigen::Index>(k)] = m(p.mask[k].first, p.mask[k].second);
      return c;
    case PatternKind::diag_plus_low_rank:
      throw Error(ErrorCode::invalid_argument, "diag_plus_low_rank has no entrywise coordinates");
  }
  return c;
}

/// P g in O(nnz(P)), or O(n * rank) for the low-rank kind.
inline Vec apply(const ScalingPattern& p, const Vec& c, const Vec& g) {
  require_dim(g, p.n, "vector");
  require_dim(c, p.num_coeffs(), "coefficients");
  switch (p.kind) {
    case PatternKind::full: {
      Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> m(
          c.data(), p.n, p.n);
      return m * g;
    }
    case PatternKind::diagonal: return c.cwiseProduct(g);
    case PatternKind::sparse: {
      Vec out = Vec::Zero(p.n);
      for (std::size_t k = 0; k < p.mask.size(); ++k)
        out[p.mask[k].first] += c[static_cast<Eigen::Index>(k)] * g[p.mask[k].second];
      return out;
    }
    case PatternKind::diag_plus_low_rank: {
      Vec out = c.head(p.n).cwiseProduct(g);
      out += c[p.n] * (p.factor_u * (p.factor_v.transpose() * g));
      return out;
    }
  }
  return Vec();
}

inline Vec apply(const ScalingMatrix& s, const Vec& g) { return apply(*s.pattern, s.coeffs, g); }

/// Pattern coordinates of scale * u v'. For entrywise kinds this is the
/// Euclidean projection onto the pattern subspace. For diag_plus_low_rank it
/// is the partial derivative in (d, alpha) of <G, P(d, alpha)>, i.e.
/// (scale * u.*v, scale * u'Mv).
inline Vec restrict_outer(const Vec& u, const Vec& v, double scale, const ScalingPattern& p) {
  require_dim(u, p.n, "u");
  require_dim(v, p.n, "v");
  Vec out(p.num_coeffs());
  switch (p.kind) {
    case PatternKind::full:
      for (Eigen::Index i = 0; i < p.n; ++i) {
        const double su = scale * u[i];
        for (Eigen::Index j = 0; j < p.n; ++j) out[i * p.n + j] = su * v[j];
      }
      break;
    case PatternKind::diagonal: out = scale * u.cwiseProduct(v); break;
    case PatternKind::sparse:
      for (std::size_t k = 0; k < p.mask.size(); ++k)
        out[static_cast<Eigen::Index>(k)] = scale * u[p.mask[k].first] * v[p.mask[k].second];
      break;
    case PatternKind::diag_plus_low_rank:
      out.head(p.n) = scale * u.cwiseProduct(v);
      out[p.n] = scale * (p.factor_u.transpose() * u).dot(p.factor_v.transpose() * v);
      break;
  }
  return out;
}

/// Projection onto the feasible set: identity when unbounded, otherwise
/// radial scaling into the ball of radius D (in coefficient coordinates).
inline Vec project(const ScalingPattern& p, Vec raw) {
  require_dim(raw, p.num_coeffs(), "coefficients");
  if (!p.ball_radius) return raw;
  const double norm = raw.norm();
  if (norm > *p.ball_radius) raw *= *p.ball_radius / norm;
  return raw;
}

namespace detail {

inline std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, const std::string& context) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::parse_error, context + ": bad number '" + std::string(s) + "'");
  }
  return v;
}

inline long long parse_int(std::string_view s, const std::string& context) {
  long long v = 0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
    throw Error(ErrorCode::parse_error, context + ": bad integer '" + std::string(s) + "'");
  }
  return v;
}

inline std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    auto pos = s.find(sep, start);
    out.emplace_back(s.substr(start, pos == std::string_view::npos ? s.npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline std::string join_matrix(const Mat& m) {
  std::string out;
  for (Eigen::Index i = 0; i < m.rows(); ++i)
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (!out.empty()) out += ',';
      out += format_double(m(i, j));
    }
  return out;
}

}  // namespace detail

/// One-line text form used in run-config files, e.g.
///   "diagonal n=4", "sparse n=3 mask=0:0,1:2 ball=2",
///   "diag_lowrank n=2 rank=1 u=1,1 v=1,1".
inline std::string to_string(const ScalingPattern& p) {
  std::string out;
  switch (p.kind) {
    case PatternKind::full: out = "full"; break;
    case PatternKind::diagonal: out = "diagonal"; break;
    case PatternKind::sparse: out = "sparse"; break;
    case PatternKind::diag_plus_low_rank: out = "diag_lowrank"; break;
  }
  out += " n=" + std::to_string(p.n);
  if (p.kind == PatternKind::sparse) {
    out += " mask=";
    for (std::size_t k = 0; k < p.mask.size(); ++k) {
      if (k) out += ',';
      out += std::to_string(p.mask[k].first) + ":" + std::to_string(p.mask[k].second);
    }
  }
  if (p.kind == PatternKind::diag_plus_low_rank) {
    out += " rank=" + std::to_string(p.factor_u.cols());
    out += " u=" + detail::join_matrix(p.factor_u);
    out += " v=" + detail::join_matrix(p.factor_v);
  }
  if (p.ball_radius) out += " ball=" + detail::format_double(*p.ball_radius);
  return out;
}

inline ScalingPattern parse_pattern(const std::string& text) {
  std::istringstream in(text);
  std::string kind;
  in >> kind;
  std::optional<Eigen::Index> n;
  std::optional<double> ball;
  std::optional<Eigen::Index> rank;
  std::string mask_text, u_text, v_text;
  bool has_mask = false;
  std::string tok;
  while (in >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::parse_error, "pattern token '" + tok + "'");
    std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
    if (key == "n") n = detail::parse_int(val, "pattern n");
    else if (key == "ball") ball = detail::parse_double(val, "pattern ball");
    else if (key == "mask") { mask_text = val; has_mask = true; }
    else if (key == "rank") rank = detail::parse_int(val, "pattern rank");
    else if (key == "u") u_text = val;
    else if (key == "v") v_text = val;
    else throw Error(ErrorCode::parse_error, "unknown pattern key '" + key + "'");
  }
  if (!n || *n <= 0) throw Error(ErrorCode::parse_error, "pattern needs n=<positive>");
  ScalingPattern p;
  if (kind == "full") {
    p = ScalingPattern::full(*n);
  } else if (kind == "diagonal") {
    p = ScalingPattern::diagonal(*n);
  } else if (kind == "sparse") {
    std::vector<std::pair<Eigen::Index, Eigen::Index>> mask;
    if (has_mask && !mask_text.empty()) {
      for (const auto& item : detail::split(mask_text, ',')) {
        auto colon = item.find(':');
        if (colon == std::string::npos) throw Error(ErrorCode::parse_error, "mask entry '" + item + "'");
        mask.emplace_back(detail::parse_int(item.substr(0, colon), "mask row"),
                          detail::parse_int(item.substr(colon + 1), "mask col"));
      }
    }
    p = ScalingPattern::sparse(*n, std::move(mask));
  } else if (kind == "diag_lowrank") {
    if (!rank || *rank <= 0) throw Error(ErrorCode::parse_error, "diag_lowrank needs rank=<positive>");
    auto read = [&](const std::string& txt, const char* what) {
      auto items = detail::split(txt, ',');
      if (static_cast<Eigen::Index>(items.size()) != *n * *rank) {
        throw Error(ErrorCode::parse_error, std::string(what) + " needs n*rank values");
      }
      Mat m(*n, *rank);
      for (Eigen::Index i = 0; i < *n; ++i)
        for (Eigen::Index j = 0; j < *rank; ++j)
          m(i, j) = detail::parse_double(items[static_cast<std::size_t>(i * *rank + j)], what);
      return m;
    };
    p = ScalingPattern::diag_plus_low_rank(read(u_text, "u"), read(v_text, "v"));
  } else {
    throw Error(ErrorCode::parse_error, "unknown pattern kind '" + kind + "'");
  }
  if (ball) p = p.with_ball(*ball);
  return p;
}

}  // namespace osgm
