#pragma once

// Collinearity screening (VIF) followed by backward stepwise AIC
// elimination, for the linear and logistic predictors.

#include <string>
#include <utility>
#include <vector>

#include "hwdyn/linear.hpp"

namespace hwdyn::learn {

enum class LinearKind { ols, logistic };

inline constexpr double kVifThreshold = 4.0;
inline constexpr double kVifClamp = 1e6;

/// 1 / (1 - R^2) of regressing `column` on every other column with an
/// intercept; kVifClamp once R^2 >= 1 - 1e-6 (duplicates, constants).
double vif(const DesignMatrix& m, std::string_view column);

/// OLS: n ln(RSS / n) + 2 (k + 1), RSS clamped at 1e-12.
/// Logistic: -2 logLik + 2 (k + 1). k counts predictors.
/// The model is refitted on all of m's columns.
double aic(const DesignMatrix& m, LinearKind kind);
/// Same for an already fitted model.
double aic(const LinearFit& fit, const DesignMatrix& m, LinearKind kind);

struct SelectionTrace {
  std::vector<std::pair<std::string, double>> removed_by_vif;  // name, VIF at removal
  std::vector<std::string> removed_by_aic;                     // removal order
  std::vector<std::string> surviving;                          // original column order
  double initial_aic = 0.0;  // after the VIF phase
  double final_aic = 0.0;
};

/// Phase 1 repeatedly drops the column with the largest VIF above 4.
/// Phase 2 repeatedly drops the column whose removal gives the lowest AIC
/// while that lowers AIC. Ties go to the first name in lexicographic order.
/// The last remaining column is never dropped. Requires >= 3 columns.
SelectionTrace select_features(const DesignMatrix& m, LinearKind kind);

}  // namespace hwdyn::learn
