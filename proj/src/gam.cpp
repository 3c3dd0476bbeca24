#include "motiv/gam.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <cmath>
#include <set>

#include "motiv/errors.hpp"

namespace motiv::gam {

std::string_view to_string(TermKind k) { return k == TermKind::kLinear ? "linear" : "spline"; }
std::string_view to_string(Granularity g) { return g == Granularity::kPerCounty ? "per_county" : "per_tweet"; }

std::optional<TermKind> parse_term_kind(std::string_view s) {
  if (s == "linear") return TermKind::kLinear;
  if (s == "spline") return TermKind::kSpline;
  return std::nullopt;
}

std::optional<Granularity> parse_granularity(std::string_view s) {
  if (s == "per_county") return Granularity::kPerCounty;
  if (s == "per_tweet") return Granularity::kPerTweet;
  return std::nullopt;
}

std::vector<double> default_lambda_grid() {
  std::vector<double> grid;
  for (int i = 0; i <= 12; ++i) grid.push_back(std::pow(10.0, -3.0 + 0.5 * i));
  return grid;
}

void ModelSpec::validate() const {
  if (target.empty()) throw ModelError("model has no target");
  if (terms.empty()) throw ModelError("model needs at least one term");
  std::set<std::string> seen;
  for (const auto& t : terms) {
    if (t.feature == target) throw ModelError("feature '" + t.feature + "' is also the target");
    if (!seen.insert(t.feature).second) throw ModelError("feature '" + t.feature + "' appears twice");
  }
  if (penalty_order < 1) throw ModelError("penalty_order must be at least 1");
  if (spline_basis_size < std::max(4, penalty_order + 2)) {
    throw ModelError("spline_basis_size must be at least max(4, penalty_order + 2)");
  }
  if (lambda_grid.empty()) throw ModelError("lambda_grid is empty");
  for (double l : lambda_grid) {
    if (!std::isfinite(l) || l < 0.0) throw ModelError("lambda_grid values must be finite and non-negative");
  }
}

bool ModelSpec::all_linear() const {
  return std::all_of(terms.begin(), terms.end(), [](const TermSpec& t) { return t.kind == TermKind::kLinear; });
}

// ---------------------------------------------------------------------------

ColumnScale column_scale(const Eigen::VectorXd& x) {
  ColumnScale s;
  if (x.size() == 0) return s;
  s.mean = x.mean();
  s.sd = std::sqrt((x.array() - s.mean).square().mean());
  return s;
}

Eigen::VectorXd zscore(const Eigen::VectorXd& x, const ColumnScale& s) {
  return ((x.array() - s.mean) / s.sd).matrix();
}

Eigen::Index DesignTable::column(std::string_view feature) const {
  auto it = std::find(features.begin(), features.end(), feature);
  if (it == features.end()) throw ModelError("unknown feature '" + std::string(feature) + "'");
  return static_cast<Eigen::Index>(it - features.begin());
}

DesignTable DesignTable::permuted(std::span<const Eigen::Index> perm) const {
  DesignTable out = *this;
  for (Eigen::Index i = 0; i < static_cast<Eigen::Index>(perm.size()); ++i) {
    out.x.row(i) = x.row(perm[static_cast<std::size_t>(i)]);
    out.y(i) = y(perm[static_cast<std::size_t>(i)]);
    if (!row_keys.empty()) out.row_keys[static_cast<std::size_t>(i)] = row_keys[static_cast<std::size_t>(perm[i])];
  }
  return out;
}

DesignTable make_table(std::string target, Eigen::VectorXd y, std::vector<std::string> features,
                       Eigen::MatrixXd x) {
  if (x.rows() != y.size() || x.cols() != static_cast<Eigen::Index>(features.size())) {
    throw ModelError("table dimensions do not match");
  }
  DesignTable t;
  t.target = std::move(target);
  t.y = std::move(y);
  t.features = std::move(features);
  t.x = std::move(x);
  return t;
}

DesignTable design_row_table(const analytics::FeatureTable& features, const ModelSpec& spec) {
  using analytics::FeatureTable;
  spec.validate();
  const bool per_county = spec.granularity == Granularity::kPerCounty;
  std::vector<std::string> names;
  for (const auto& t : spec.terms) names.push_back(t.feature);
  for (const std::string& n : [&] {
         auto all = names;
         all.push_back(spec.target);
         return all;
       }()) {
    const bool known = per_county ? FeatureTable::is_county_feature(n)
                                  : (FeatureTable::is_county_feature(n) || FeatureTable::is_tweet_feature(n));
    if (!known) {
      throw ModelError("unknown feature '" + n + "' for " + std::string(to_string(spec.granularity)) + " models");
    }
  }

  std::vector<std::vector<double>> rows;
  std::vector<double> ys;
  DesignTable table;
  table.target = spec.target;
  table.features = names;

  auto add_row = [&](auto&& value_of, const std::string& key) {
    std::vector<double> row;
    auto y = value_of(spec.target);
    if (!y) {
      ++table.dropped;
      return;
    }
    for (const auto& n : names) {
      auto v = value_of(n);
      if (!v) {
        ++table.dropped;
        return;
      }
      row.push_back(*v);
    }
    rows.push_back(std::move(row));
    ys.push_back(*y);
    table.row_keys.push_back(key);
  };

  const Dataset& ds = features.dataset();
  if (per_county) {
    for (const auto& [fips, county] : ds.counties()) {
      add_row([&](const std::string& n) { return features.county_value(county, n); }, fips);
    }
  } else {
    for (const Tweet& t : ds.tweets()) {
      add_row([&](const std::string& n) { return features.tweet_value(t, n); }, t.id);
    }
  }

  table.x.resize(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(names.size()));
  table.y.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t j = 0; j < names.size(); ++j) {
      table.x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
    table.y(static_cast<Eigen::Index>(i)) = ys[i];
  }
  if (table.y.size() == 0 || column_scale(table.y).sd == 0.0) throw ModelError("degenerate target");
  return table;
}

// ---------------------------------------------------------------------------

BSplineBasis::BSplineBasis(double lo, double hi, int size) : lo_(lo), hi_(hi), size_(size) {
  if (size < kDegree + 1) throw ModelError("spline basis needs at least 4 functions");
  if (!(hi > lo) || !std::isfinite(lo) || !std::isfinite(hi)) throw ModelError("zero-width domain");
  step_ = (hi - lo) / (size - kDegree);
}

Eigen::RowVectorXd BSplineBasis::evaluate(double x) const {
  const double u = std::clamp(x, lo_, hi_);
  int span = static_cast<int>(std::floor((u - lo_) / step_)) + kDegree;
  span = std::clamp(span, kDegree, size_ - 1);

  // Cox-de Boor: the degree+1 non-zero functions on the knot span.
  double n[kDegree + 1];
  double left[kDegree + 1];
  double right[kDegree + 1];
  n[0] = 1.0;
  for (int j = 1; j <= kDegree; ++j) {
    left[j] = u - knot(span + 1 - j);
    right[j] = knot(span + j) - u;
    double saved = 0.0;
    for (int r = 0; r < j; ++r) {
      const double tmp = n[r] / (right[r + 1] + left[j - r]);
      n[r] = saved + right[r + 1] * tmp;
      saved = left[j - r] * tmp;
    }
    n[j] = saved;
  }
  Eigen::RowVectorXd row = Eigen::RowVectorXd::Zero(size_);
  for (int r = 0; r <= kDegree; ++r) row(span - kDegree + r) = n[r];
  return row;
}

Eigen::MatrixXd BSplineBasis::evaluate(const Eigen::VectorXd& x) const {
  Eigen::MatrixXd out(x.size(), size_);
  for (Eigen::Index i = 0; i < x.size(); ++i) out.row(i) = evaluate(x(i));
  return out;
}

Eigen::MatrixXd bspline_basis(const Eigen::VectorXd& x, int k) {
  if (x.size() == 0 || !x.allFinite()) throw ModelError("spline input must be finite and non-empty");
  return BSplineBasis(x.minCoeff(), x.maxCoeff(), k).evaluate(x);
}

Eigen::MatrixXd difference_matrix(int k, int order) {
  Eigen::MatrixXd d = Eigen::MatrixXd::Identity(k, k);
  for (int o = 0; o < order; ++o) {
    Eigen::MatrixXd next(d.rows() - 1, k);
    for (Eigen::Index r = 0; r + 1 < d.rows(); ++r) next.row(r) = d.row(r + 1) - d.row(r);
    d = std::move(next);
  }
  return d;
}

// ---------------------------------------------------------------------------

double FittedTerm::raw(double x) const {
  const double z = scale.to_z(x);
  if (spec.kind == TermKind::kLinear) return slope_z * z;
  return basis->evaluate(z).dot(theta);
}

const FittedTerm& GamModel::term(std::string_view feature) const {
  for (const auto& t : terms) {
    if (t.spec.feature == feature) return t;
  }
  throw ModelError("feature '" + std::string(feature) + "' is not a model term");
}

Eigen::VectorXd GamModel::predict(const DesignTable& table) const {
  Eigen::VectorXd out = Eigen::VectorXd::Constant(table.x.rows(), intercept);
  for (const FittedTerm& t : terms) {
    const Eigen::Index col = table.column(t.spec.feature);
    for (Eigen::Index i = 0; i < table.x.rows(); ++i) out(i) += t.value(table.x(i, col));
  }
  return out;
}

double GamModel::intercept_at_origin() const {
  double v = intercept;
  for (const FittedTerm& t : terms) v += t.value(0.0);
  return v;
}

namespace {

// Assembled design for one table and spec, independent of lambda.
struct Design {
  std::vector<FittedTerm> terms;
  Eigen::MatrixXd x;         // n x p
  Eigen::MatrixXd pen_root;  // r x p, penalty = pen_root' pen_root
  Eigen::MatrixXd xtx;
  Eigen::VectorXd xty;
  Eigen::VectorXd y;
};

Eigen::MatrixXd sum_to_zero_constraint(const Eigen::MatrixXd& basis) {
  const Eigen::VectorXd c = basis.colwise().sum().transpose();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(c);
  const Eigen::MatrixXd q = qr.householderQ();
  return q.rightCols(basis.cols() - 1);
}

void check_finite(const DesignTable& table) {
  for (Eigen::Index j = 0; j < table.x.cols(); ++j) {
    if (!table.x.col(j).allFinite()) {
      throw ModelError("non-finite value in column '" + table.features[static_cast<std::size_t>(j)] + "'");
    }
  }
  if (!table.y.allFinite()) throw ModelError("non-finite value in column '" + table.target + "'");
}

Design build_design(const DesignTable& table, const ModelSpec& spec) {
  spec.validate();
  check_finite(table);
  const Eigen::Index n = table.y.size();
  if (n == 0) throw ModelError("no rows to fit");
  if (column_scale(table.y).sd == 0.0) throw ModelError("degenerate target");

  Design d;
  d.y = table.y;
  std::vector<Eigen::MatrixXd> blocks;
  std::vector<Eigen::MatrixXd> roots;
  Eigen::Index p = 1;
  for (const TermSpec& ts : spec.terms) {
    FittedTerm t;
    t.spec = ts;
    t.column = table.column(ts.feature);
    const Eigen::VectorXd xcol = table.x.col(t.column);
    t.x_min = xcol.minCoeff();
    t.x_max = xcol.maxCoeff();
    t.scale = column_scale(xcol);
    if (t.scale.sd == 0.0) {
      if (ts.kind == TermKind::kSpline) throw ModelError("zero-width domain for feature '" + ts.feature + "'");
      throw ModelError("rank-deficient design: feature '" + ts.feature + "' is constant");
    }
    const Eigen::VectorXd z = zscore(xcol, t.scale);
    t.z_mean = z.mean();
    if (ts.kind == TermKind::kLinear) {
      blocks.push_back(z);
      roots.push_back(Eigen::MatrixXd::Zero(0, 1));
      t.n_coef = 1;
    } else {
      t.basis.emplace(z.minCoeff(), z.maxCoeff(), spec.spline_basis_size);
      const Eigen::MatrixXd b = t.basis->evaluate(z);
      t.constraint = sum_to_zero_constraint(b);
      blocks.push_back(b * t.constraint);
      roots.push_back(difference_matrix(spec.spline_basis_size, spec.penalty_order) * t.constraint);
      t.n_coef = spec.spline_basis_size - 1;
    }
    t.first_coef = p;
    p += t.n_coef;
    d.terms.push_back(std::move(t));
  }
  if (n < p + 1) {
    throw ModelError("not enough rows: " + std::to_string(n) + " rows for " + std::to_string(p) + " coefficients");
  }

  d.x.resize(n, p);
  d.x.col(0).setOnes();
  Eigen::Index r_rows = 0;
  for (const auto& r : roots) r_rows += r.rows();
  d.pen_root = Eigen::MatrixXd::Zero(r_rows, p);
  Eigen::Index r_at = 0;
  for (std::size_t i = 0; i < blocks.size(); ++i) {
    const FittedTerm& t = d.terms[i];
    d.x.middleCols(t.first_coef, t.n_coef) = blocks[i];
    d.pen_root.block(r_at, t.first_coef, roots[i].rows(), t.n_coef) = roots[i];
    r_at += roots[i].rows();
  }
  d.xtx = d.x.transpose() * d.x;
  d.xty = d.x.transpose() * d.y;
  return d;
}

struct Solution {
  Eigen::VectorXd beta;
  double edf = 0.0;
  double rss = 0.0;
  bool jittered = false;
};

constexpr double kRankTolerance = 1e-9;
constexpr double kJitter = 1e-8;

Solution solve(const Design& d, double lambda) {
  const Eigen::Index p = d.x.cols();
  Eigen::MatrixXd augmented(d.x.rows() + d.pen_root.rows(), p);
  augmented << d.x, std::sqrt(lambda) * d.pen_root;
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(augmented);
  qr.setThreshold(kRankTolerance);
  if (qr.rank() < p) throw ModelError("rank-deficient design");

  Eigen::MatrixXd a = d.xtx;
  if (lambda > 0.0) a.noalias() += lambda * d.pen_root.transpose() * d.pen_root;
  Solution s;
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    a.diagonal().array() += kJitter;
    llt.compute(a);
    if (llt.info() != Eigen::Success) throw ModelError("rank-deficient design");
    s.jittered = true;
  }
  s.beta = llt.solve(d.xty);
  s.edf = llt.solve(d.xtx).trace();
  s.rss = (d.y - d.x * s.beta).squaredNorm();
  return s;
}

double gcv_score(double rss, double edf, Eigen::Index n) {
  const double nn = static_cast<double>(n);
  return nn * rss / ((nn - edf) * (nn - edf));
}

GamModel assemble(const Design& d, const ModelSpec& spec, double lambda, const Solution& s) {
  GamModel m;
  m.spec = spec;
  m.terms = d.terms;
  m.lambda = spec.all_linear() ? 0.0 : lambda;
  m.beta = s.beta;
  m.edf = s.edf;
  m.rss = s.rss;
  m.n_rows = static_cast<std::size_t>(d.y.size());
  m.gcv_score = gcv_score(s.rss, s.edf, d.y.size());
  m.fitted = d.x * s.beta;
  m.jittered = s.jittered;
  m.intercept = s.beta(0);
  for (FittedTerm& t : m.terms) {
    const Eigen::VectorXd coef = s.beta.segment(t.first_coef, t.n_coef);
    if (t.spec.kind == TermKind::kLinear) {
      t.slope_z = coef(0);
    } else {
      t.theta = t.constraint * coef;
      t.lambda = lambda;
    }
    t.offset = (d.x.middleCols(t.first_coef, t.n_coef) * coef).mean();
    m.intercept += t.offset;
  }
  const Eigen::Index n = d.y.size();
  const Eigen::Index p = d.x.cols();
  if (spec.all_linear() && n > p) {
    const double sigma2 = s.rss / static_cast<double>(n - p);
    m.covariance = sigma2 * d.xtx.llt().solve(Eigen::MatrixXd::Identity(p, p));
  }
  return m;
}

struct Path {
  std::vector<GcvCandidate> candidates;
  std::string first_error;
};

Path compute_path(const Design& d, const ModelSpec& spec) {
  Path path;
  const Eigen::Index n = d.y.size();
  for (double lambda : spec.lambda_grid) {
    GcvCandidate c;
    c.lambda = lambda;
    try {
      const Solution s = solve(d, lambda);
      c.valid = s.edf < static_cast<double>(n);
      c.score = c.valid ? gcv_score(s.rss, s.edf, n) : 0.0;
    } catch (const ModelError& e) {
      c.valid = false;
      if (path.first_error.empty()) path.first_error = e.what();
    }
    path.candidates.push_back(c);
  }
  return path;
}

}  // namespace

PenalizedDesign penalized_design(const GamModel& model, const DesignTable& table) {
  const Eigen::Index n = table.x.rows();
  const Eigen::Index p = model.beta.size();
  PenalizedDesign out;
  out.x.resize(n, p);
  out.x.col(0).setOnes();
  out.penalty = Eigen::MatrixXd::Zero(p, p);
  for (const FittedTerm& t : model.terms) {
    const Eigen::VectorXd z = zscore(table.x.col(table.column(t.spec.feature)), t.scale);
    if (t.spec.kind == TermKind::kLinear) {
      out.x.col(t.first_coef) = z;
    } else {
      out.x.middleCols(t.first_coef, t.n_coef) = t.basis->evaluate(z) * t.constraint;
      const Eigen::MatrixXd root = difference_matrix(t.basis->size(), model.spec.penalty_order) * t.constraint;
      out.penalty.block(t.first_coef, t.first_coef, t.n_coef, t.n_coef) = root.transpose() * root;
    }
  }
  return out;
}

std::size_t select_lambda(std::span<const GcvCandidate> candidates) {
  constexpr double kTieTolerance = 1e-12;
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    const GcvCandidate& c = candidates[i];
    if (!c.valid) continue;
    if (!best) {
      best = i;
      continue;
    }
    const GcvCandidate& b = candidates[*best];
    const double tol = kTieTolerance * std::max(std::abs(c.score), std::abs(b.score));
    if (c.score < b.score - tol) {
      best = i;
    } else if (std::abs(c.score - b.score) <= tol && c.lambda > b.lambda) {
      best = i;
    }
  }
  if (!best) throw ModelError("no valid smoothing parameter in lambda_grid");
  return *best;
}

std::vector<GcvCandidate> gcv_path(const DesignTable& table, const ModelSpec& spec) {
  return compute_path(build_design(table, spec), spec).candidates;
}

GamModel fit_at(const DesignTable& table, const ModelSpec& spec, double lambda) {
  if (!std::isfinite(lambda) || lambda < 0.0) throw ModelError("lambda must be finite and non-negative");
  const Design d = build_design(table, spec);
  const double used = spec.all_linear() ? 0.0 : lambda;
  return assemble(d, spec, used, solve(d, used));
}

GamModel fit(const DesignTable& table, const ModelSpec& spec) {
  const Design d = build_design(table, spec);
  if (spec.all_linear()) return assemble(d, spec, 0.0, solve(d, 0.0));
  const Path path = compute_path(d, spec);
  const bool any_valid =
      std::any_of(path.candidates.begin(), path.candidates.end(), [](const GcvCandidate& c) { return c.valid; });
  if (!any_valid && !path.first_error.empty()) throw ModelError(path.first_error);
  const double lambda = path.candidates[select_lambda(path.candidates)].lambda;
  return assemble(d, spec, lambda, solve(d, lambda));
}

PartialDependence partial_dependence(const GamModel& model, std::string_view feature, int points) {
  const FittedTerm& t = model.term(feature);
  if (points < 2) throw ModelError("partial dependence needs at least 2 grid points");
  PartialDependence pd;
  pd.feature = t.spec.feature;
  pd.kind = t.spec.kind;
  for (int i = 0; i < points; ++i) {
    const double x = i + 1 == points ? t.x_max : t.x_min + (t.x_max - t.x_min) * i / (points - 1);
    pd.grid.push_back(x);
    pd.values.push_back(t.value(x));
  }
  if (model.covariance) {
    const double var = (*model.covariance)(t.first_coef, t.first_coef);
    std::vector<double> band;
    for (double x : pd.grid) band.push_back(2.0 * std::abs(t.scale.to_z(x) - t.z_mean) * std::sqrt(var));
    pd.se_band = std::move(band);
  }
  return pd;
}

std::vector<TermTest> linear_pvalues(const GamModel& model) {
  if (!model.all_linear()) throw ModelError("p-values are only reported for all-linear models");
  const auto n = static_cast<Eigen::Index>(model.n_rows);
  const Eigen::Index p = model.beta.size();
  if (n <= p || !model.covariance) throw ModelError("p-values need more rows than coefficients");
  const boost::math::students_t dist(static_cast<double>(n - p));
  std::vector<TermTest> out;
  for (const FittedTerm& t : model.terms) {
    TermTest r;
    r.feature = t.spec.feature;
    const double se_z = std::sqrt((*model.covariance)(t.first_coef, t.first_coef));
    r.coefficient = t.slope();
    r.std_error = se_z / t.scale.sd;
    r.t = se_z > 0.0 ? t.slope_z / se_z : std::numeric_limits<double>::infinity();
    r.p_value = std::isfinite(r.t) ? 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))) : 0.0;
    out.push_back(r);
  }
  return out;
}

}  // namespace motiv::gam
