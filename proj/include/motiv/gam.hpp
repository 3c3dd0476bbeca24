#pragma once

#include <Eigen/Dense>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "motiv/analytics.hpp"

namespace motiv::gam {

enum class TermKind { kLinear, kSpline };
enum class Granularity { kPerCounty, kPerTweet };

std::string_view to_string(TermKind k);
std::string_view to_string(Granularity g);
std::optional<TermKind> parse_term_kind(std::string_view s);
std::optional<Granularity> parse_granularity(std::string_view s);

struct TermSpec {
  std::string feature;
  TermKind kind = TermKind::kLinear;
};

/// 13 log-spaced values from 1e-3 to 1e3.
std::vector<double> default_lambda_grid();

struct ModelSpec {
  std::string target;
  std::vector<TermSpec> terms;
  Granularity granularity = Granularity::kPerCounty;
  int spline_basis_size = 10;
  int penalty_order = 2;
  std::vector<double> lambda_grid = default_lambda_grid();

  /// Throws ModelError: no terms, repeated features, target used as a term,
  /// basis smaller than penalty_order + 2 (or 4), empty or negative grid.
  void validate() const;
  bool all_linear() const;
};

// ---------------------------------------------------------------------------
// Design tables

struct ColumnScale {
  double mean = 0.0;
  double sd = 1.0;  // population standard deviation

  double to_z(double x) const { return (x - mean) / sd; }
  double from_z(double z) const { return mean + z * sd; }
};

/// Returns the scale of `x`; sd is 0 for a constant column.
ColumnScale column_scale(const Eigen::VectorXd& x);
Eigen::VectorXd zscore(const Eigen::VectorXd& x, const ColumnScale& s);

struct DesignTable {
  std::string target;
  std::vector<std::string> features;
  std::vector<std::string> row_keys;  // FIPS or tweet id
  Eigen::MatrixXd x;                  // raw values, one column per feature
  Eigen::VectorXd y;                  // raw target
  std::size_t dropped = 0;            // rows lacking a required value

  /// Column index of `feature`, or ModelError naming it.
  Eigen::Index column(std::string_view feature) const;
  /// Rows reordered by `perm` (row i of the result is row perm[i]).
  DesignTable permuted(std::span<const Eigen::Index> perm) const;
};

DesignTable make_table(std::string target, Eigen::VectorXd y, std::vector<std::string> features,
                       Eigen::MatrixXd x);

/// One row per county (per_county) or per tweet (per_tweet) holding the
/// target and every term feature; rows with an absent value are dropped and
/// counted. Throws ModelError for unknown features and for a target that is
/// constant across the retained rows.
DesignTable design_row_table(const analytics::FeatureTable& features, const ModelSpec& spec);

// ---------------------------------------------------------------------------
// Splines

/// Cubic B-spline basis with `size` functions on equally spaced knots over
/// [lo, hi], padded by three knots on each side. Arguments outside the domain
/// are clamped to it.
class BSplineBasis {
 public:
  static constexpr int kDegree = 3;

  /// Throws ModelError for size < 4 or hi <= lo ("zero-width domain").
  BSplineBasis(double lo, double hi, int size);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  int size() const { return size_; }
  double knot(int i) const { return lo_ + (i - kDegree) * step_; }

  Eigen::RowVectorXd evaluate(double x) const;
  Eigen::MatrixXd evaluate(const Eigen::VectorXd& x) const;

 private:
  double lo_;
  double hi_;
  int size_;
  double step_;
};

/// n x k basis over [min x, max x].
Eigen::MatrixXd bspline_basis(const Eigen::VectorXd& x, int k);

/// (k - order) x k matrix of order-th differences.
Eigen::MatrixXd difference_matrix(int k, int order);

// ---------------------------------------------------------------------------
// Models

struct FittedTerm {
  TermSpec spec;
  Eigen::Index column = 0;  // in the design table
  ColumnScale scale;
  double x_min = 0.0;  // observed range, original units
  double x_max = 0.0;
  double lambda = 0.0;

  // Linear: one slope on the standardized feature.
  // Spline: basis over the standardized range, the sum-to-zero
  // reparameterization `constraint` (k x (k-1)) and basis coefficients
  // `theta` = constraint * free coefficients.
  std::optional<BSplineBasis> basis;
  Eigen::MatrixXd constraint;
  Eigen::VectorXd theta;
  double slope_z = 0.0;

  Eigen::Index first_coef = 0;  // offset into GamModel::beta
  Eigen::Index n_coef = 0;

  double offset = 0.0;  // training-row mean of the raw contribution
  double z_mean = 0.0;  // training-row mean of the standardized feature

  /// Shape-function value before centering.
  double raw(double x) const;
  /// Centered shape function: raw(x) - offset.
  double value(double x) const { return raw(x) - offset; }
  /// Slope in original units (linear terms).
  double slope() const { return slope_z / scale.sd; }
};

struct GamModel {
  ModelSpec spec;
  std::vector<FittedTerm> terms;
  double intercept = 0.0;  // includes the term offsets
  double lambda = 0.0;     // shared smoothing parameter of the spline terms
  double edf = 0.0;
  double rss = 0.0;
  double gcv_score = 0.0;
  std::size_t n_rows = 0;
  Eigen::VectorXd beta;    // coefficients in the fitted parameterization
  Eigen::VectorXd fitted;  // fitted values on the training rows
  std::optional<Eigen::MatrixXd> covariance;  // of beta, all-linear models only
  bool jittered = false;

  const FittedTerm& term(std::string_view feature) const;
  bool all_linear() const { return spec.all_linear(); }

  Eigen::VectorXd predict(const DesignTable& table) const;
  /// Prediction with every feature at 0, in original units. For all-linear
  /// models this is the ordinary regression intercept.
  double intercept_at_origin() const;
};

/// Penalized design of a fitted model for a table: columns
/// [1 | term blocks...] and the unscaled penalty, so that the objective is
/// ||y - X beta||^2 + lambda * beta' S beta.
struct PenalizedDesign {
  Eigen::MatrixXd x;
  Eigen::MatrixXd penalty;
};
PenalizedDesign penalized_design(const GamModel& model, const DesignTable& table);

struct GcvCandidate {
  double lambda = 0.0;
  double score = 0.0;
  bool valid = true;  // false when edf >= n or the system was singular
};

/// Index of the candidate minimizing the score; ties go to the larger
/// lambda. Throws ModelError when no candidate is valid.
std::size_t select_lambda(std::span<const GcvCandidate> candidates);

/// Fits every lambda in the spec's grid and keeps the GCV choice. Models
/// without spline terms are fitted once with lambda 0.
GamModel fit(const DesignTable& table, const ModelSpec& spec);

/// Fits at one lambda. Throws ModelError on NaN/Inf input, a degenerate
/// target, too few rows, or a rank-deficient design.
GamModel fit_at(const DesignTable& table, const ModelSpec& spec, double lambda);

/// GCV scores of every grid value (invalid candidates flagged).
std::vector<GcvCandidate> gcv_path(const DesignTable& table, const ModelSpec& spec);

struct PartialDependence {
  std::string feature;
  TermKind kind = TermKind::kLinear;
  std::vector<double> grid;    // original units, ascending
  std::vector<double> values;  // centered shape function
  std::optional<std::vector<double>> se_band;  // 2 * standard error, all-linear models
};

inline constexpr int kPdGridPoints = 50;

/// Throws ModelError when `feature` is not a model term.
PartialDependence partial_dependence(const GamModel& model, std::string_view feature, int points = kPdGridPoints);

struct TermTest {
  std::string feature;
  double coefficient = 0.0;  // original units
  double std_error = 0.0;    // original units
  double t = 0.0;
  double p_value = 1.0;
};

/// Two-sided Student-t tests of each slope. Throws ModelError unless every
/// term is linear and n > p.
std::vector<TermTest> linear_pvalues(const GamModel& model);

}  // namespace motiv::gam
