#ifndef MCLS_ANOVA_HPP
#define MCLS_ANOVA_HPP

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "mcls/evaluation.hpp"

namespace mcls {

/// One response with its level under each factor.
struct AnovaObservation {
  std::vector<std::string> levels;
  double response = 0.0;
};

struct AnovaTerm {
  std::string name;
  double ss = 0.0;
  double df = 0.0;
  double ms = 0.0;
  double f = 0.0;
  double p = 0.0;
};

struct AnovaTable {
  std::vector<AnovaTerm> terms;
  AnovaTerm residual;
  double total_ss = 0.0;
  double grand_mean = 0.0;
  std::size_t observations = 0;
  /// Residual mean square is zero: F is +inf (or NaN for 0/0).
  bool degenerate = false;
};

/// Fixed-effects ANOVA on a balanced design. `interactions` lists factor
/// index pairs whose two-way interaction is added to the model.
AnovaTable anova(std::span<const AnovaObservation> data, std::span<const std::string> factors,
                 std::span<const std::pair<std::size_t, std::size_t>> interactions = {});

/// Factors: members, size, architecture, resampling. Failed cells are dropped
/// and the balance is checked on what remains.
AnovaTable anova_main_effects(std::span<const ExperimentCell> cells, std::span<const std::string> factors,
                              std::span<const std::pair<std::size_t, std::size_t>> interactions = {});

/// Regularized incomplete beta I_x(a, b).
double incomplete_beta(double a, double b, double x);

/// P(F > f) for an F(d1, d2) variable.
double f_survival(double f, double d1, double d2);

}  // namespace mcls

#endif  // MCLS_ANOVA_HPP
