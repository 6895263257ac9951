#include "matchforge/dissimilarity.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <thread>

#include "matchforge/error.hpp"

namespace matchforge {

namespace {

using RowMatrix =
    Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

DenseMatrix<double> to_dense(const Eigen::MatrixXd& m) {
  DenseMatrix<double> out(static_cast<std::size_t>(m.rows()),
                          static_cast<std::size_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      out(static_cast<std::size_t>(i), static_cast<std::size_t>(j)) = m(i, j);
    }
  }
  return out;
}

// Inverse of a symmetric positive definite matrix, or nullopt.
std::optional<Eigen::MatrixXd> spd_inverse(const Eigen::MatrixXd& cov) {
  if (!cov.isApprox(cov.transpose(), 1e-12)) return std::nullopt;
  Eigen::LLT<Eigen::MatrixXd> llt(cov);
  if (llt.info() != Eigen::Success) return std::nullopt;
  // LLT accepts tiny or negative pivots in rounding noise; reject those too.
  const auto& l = llt.matrixL();
  for (Eigen::Index i = 0; i < cov.rows(); ++i) {
    if (!(l(i, i) > 0.0) || !std::isfinite(l(i, i))) return std::nullopt;
  }
  Eigen::MatrixXd inv =
      llt.solve(Eigen::MatrixXd::Identity(cov.rows(), cov.cols()));
  if (!inv.allFinite()) return std::nullopt;
  return inv;
}

void check_dimension(const MetricSpec& metric, const Unit& u) {
  if (metric.kind == MetricKind::kScoreAbsDiff) {
    if (!u.score) throw InvalidInput("unit '" + u.id + "' has no score");
    return;
  }
  if (u.covariates.size() != metric.dimension) {
    throw InvalidInput("unit '" + u.id + "': dimension " +
                       std::to_string(u.covariates.size()) +
                       " does not match metric dimension " +
                       std::to_string(metric.dimension));
  }
}

double distance_unchecked(const MetricSpec& metric, const Unit& a,
                          const Unit& b) {
  switch (metric.kind) {
    case MetricKind::kScoreAbsDiff:
      return std::abs(*a.score - *b.score);
    case MetricKind::kEuclidean: {
      double s = 0.0;
      for (std::size_t k = 0; k < metric.dimension; ++k) {
        const double d = a.covariates[k] - b.covariates[k];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case MetricKind::kStandardizedEuclidean: {
      double s = 0.0;
      for (std::size_t k = 0; k < metric.dimension; ++k) {
        const double d = (a.covariates[k] - b.covariates[k]) / metric.scales[k];
        s += d * d;
      }
      return std::sqrt(s);
    }
    case MetricKind::kMahalanobis: {
      const std::size_t p = metric.dimension;
      double s = 0.0;
      for (std::size_t r = 0; r < p; ++r) {
        const double dr = a.covariates[r] - b.covariates[r];
        double row = 0.0;
        for (std::size_t c = 0; c < p; ++c) {
          row += metric.inverse_covariance(r, c) *
                 (a.covariates[c] - b.covariates[c]);
        }
        s += dr * row;
      }
      // Rounding can push a zero quadratic form slightly negative.
      return std::sqrt(std::max(s, 0.0));
    }
  }
  return 0.0;
}

}  // namespace

std::string_view to_string(MetricKind kind) {
  switch (kind) {
    case MetricKind::kEuclidean:
      return "euclidean";
    case MetricKind::kStandardizedEuclidean:
      return "standardized-euclidean";
    case MetricKind::kMahalanobis:
      return "mahalanobis";
    case MetricKind::kScoreAbsDiff:
      return "score-abs-diff";
  }
  return "unknown";
}

MetricKind parse_metric_kind(std::string_view name) {
  for (auto kind : {MetricKind::kEuclidean, MetricKind::kStandardizedEuclidean,
                    MetricKind::kMahalanobis, MetricKind::kScoreAbsDiff}) {
    if (name == to_string(kind)) return kind;
  }
  throw InvalidInput("unknown metric '" + std::string(name) + "'");
}

MetricSpec MetricSpec::euclidean(std::size_t dimension) {
  MetricSpec m;
  m.kind = MetricKind::kEuclidean;
  m.dimension = dimension;
  return m;
}

MetricSpec MetricSpec::score_abs_diff() {
  MetricSpec m;
  m.kind = MetricKind::kScoreAbsDiff;
  return m;
}

MetricSpec MetricSpec::mahalanobis(const DenseMatrix<double>& covariance) {
  if (!covariance.square() || covariance.rows == 0) {
    throw InvalidInput("covariance must be a non-empty square matrix");
  }
  const auto p = static_cast<Eigen::Index>(covariance.rows);
  Eigen::MatrixXd cov(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      cov(i, j) = covariance(static_cast<std::size_t>(i),
                             static_cast<std::size_t>(j));
    }
  }
  auto inv = spd_inverse(cov);
  if (!inv) throw InvalidInput("covariance is not symmetric positive definite");
  MetricSpec m;
  m.kind = MetricKind::kMahalanobis;
  m.dimension = covariance.rows;
  m.inverse_covariance = to_dense(*inv);
  return m;
}

MetricSpec fit_metric(std::span<const Unit> units, MetricKind kind,
                      std::optional<double> epsilon) {
  if (units.size() < 2) throw InvalidInput("fit_metric needs at least 2 units");
  const std::size_t p = validate_units(units);

  if (kind == MetricKind::kScoreAbsDiff) {
    for (const auto& u : units) {
      if (!u.score) throw InvalidInput("unit '" + u.id + "' has no score");
    }
    return MetricSpec::score_abs_diff();
  }
  if (p == 0) throw InvalidInput("covariate dimension must be at least 1");
  if (kind == MetricKind::kEuclidean) return MetricSpec::euclidean(p);

  const auto n = static_cast<Eigen::Index>(units.size());
  RowMatrix x(n, static_cast<Eigen::Index>(p));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (std::size_t k = 0; k < p; ++k) {
      x(i, static_cast<Eigen::Index>(k)) = units[static_cast<std::size_t>(i)].covariates[k];
    }
  }
  const Eigen::RowVectorXd mean = x.colwise().mean();
  const RowMatrix centered = x.rowwise() - mean;
  const Eigen::MatrixXd cov =
      (centered.transpose() * centered) / static_cast<double>(n - 1);

  MetricSpec m;
  m.kind = kind;
  m.dimension = p;
  if (kind == MetricKind::kStandardizedEuclidean) {
    m.scales.resize(p);
    for (std::size_t k = 0; k < p; ++k) {
      const double sd = std::sqrt(cov(static_cast<Eigen::Index>(k),
                                      static_cast<Eigen::Index>(k)));
      if (!(sd > 0.0)) {
        throw InvalidInput("covariate " + std::to_string(k + 1) +
                           " has zero variance");
      }
      m.scales[k] = sd;
    }
    return m;
  }

  const double eps =
      epsilon.value_or(1e-8 * cov.diagonal().mean());
  if (eps < 0.0 || !std::isfinite(eps)) {
    throw InvalidInput("regularization epsilon must be finite and >= 0");
  }
  Eigen::MatrixXd reg = cov;
  reg.diagonal().array() += eps;
  auto inv = spd_inverse(reg);
  if (!inv) {
    throw InvalidInput("covariance matrix is singular even after regularization");
  }
  m.inverse_covariance = to_dense(*inv);
  return m;
}

double distance(const MetricSpec& metric, const Unit& a, const Unit& b) {
  check_dimension(metric, a);
  check_dimension(metric, b);
  return distance_unchecked(metric, a, b);
}

CostMatrix pairwise_costs(std::span<const Unit> treated,
                          std::span<const Unit> controls,
                          const MetricSpec& metric, unsigned threads) {
  for (const auto& u : treated) check_dimension(metric, u);
  for (const auto& u : controls) check_dimension(metric, u);

  DenseMatrix<double> values(treated.size(), controls.size());
  auto fill_rows = [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) {
      for (std::size_t j = 0; j < controls.size(); ++j) {
        values(i, j) = distance_unchecked(metric, treated[i], controls[j]);
      }
    }
  };

  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  const std::size_t workers =
      std::min<std::size_t>(threads, std::max<std::size_t>(1, treated.size()));
  if (workers <= 1) {
    fill_rows(0, treated.size());
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    const std::size_t chunk = (treated.size() + workers - 1) / workers;
    for (std::size_t w = 0; w < workers; ++w) {
      const std::size_t begin = w * chunk;
      const std::size_t end = std::min(treated.size(), begin + chunk);
      if (begin >= end) break;
      pool.emplace_back(fill_rows, begin, end);
    }
  }
  return CostMatrix::dense(std::move(values));
}

BipartiteGraph complete_graph(std::span<const Unit> treated,
                              std::span<const Unit> controls,
                              const MetricSpec& metric, unsigned threads) {
  const CostMatrix costs = pairwise_costs(treated, controls, metric, threads);
  std::vector<std::string> t_ids, c_ids;
  t_ids.reserve(treated.size());
  c_ids.reserve(controls.size());
  for (const auto& u : treated) t_ids.push_back(u.id);
  for (const auto& u : controls) c_ids.push_back(u.id);
  return graph_from_cost_matrix(costs, std::move(t_ids), std::move(c_ids));
}

std::int64_t integerize_value(double cost, int digits) {
  if (digits < 0) throw InvalidInput("digits must be >= 0");
  if (!std::isfinite(cost)) throw InvalidInput("cannot integerize a non-finite cost");
  const double scaled = cost * std::pow(10.0, digits);
  if (!(std::abs(scaled) <= kMaxIntegerCost)) {
    throw LimitExceeded("cost " + std::to_string(cost) + " overflows at " +
                        std::to_string(digits) + " digits");
  }
  return std::llround(scaled);
}

IntegerCostMatrix integerize(const CostMatrix& costs, int digits) {
  IntegerCostMatrix out;
  out.scale = std::pow(10.0, digits);
  out.allowed = costs.allowed;
  out.values = DenseMatrix<std::int64_t>(costs.rows(), costs.cols());
  for (std::size_t k = 0; k < costs.values.data.size(); ++k) {
    const double v = costs.values.data[k];
    out.values.data[k] = integerize_value(v, digits);
    if (static_cast<double>(out.values.data[k]) != v * out.scale) out.exact = false;
  }
  out.sentinel = integerize_value(costs.sentinel, digits);
  return out;
}

IntegerizedGraph integerize(const BipartiteGraph& graph, int digits) {
  IntegerizedGraph out;
  out.scale = std::pow(10.0, digits);
  std::vector<Edge> edges(graph.edges().begin(), graph.edges().end());
  for (auto& e : edges) {
    const auto v = integerize_value(e.cost, digits);
    if (static_cast<double>(v) != e.cost * out.scale) out.exact = false;
    e.cost = static_cast<double>(v);
  }
  out.graph = BipartiteGraph(graph.treated_ids(), graph.control_ids(),
                             std::move(edges));
  return out;
}

}  // namespace matchforge
