#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace unmeasure {

/// n payoff functions on a finite sample space: rows are functions, columns
/// sample points.
class PayoffSystem {
 public:
  explicit PayoffSystem(std::vector<std::vector<double>> payoffs);

  std::size_t num_functions() const { return payoffs_.size(); }
  std::size_t num_points() const { return payoffs_.front().size(); }
  double operator()(std::size_t function, std::size_t point) const {
    return payoffs_[function][point];
  }
  const std::vector<std::vector<double>>& rows() const { return payoffs_; }

  /// Parses comma-separated rows; blank lines and lines starting with '#' are skipped.
  static PayoffSystem from_csv(const std::string& text);

 private:
  std::vector<std::vector<double>> payoffs_;
};

enum class DichotomyBranch { kArbitrage, kMeasure };

/// Either positive weights s with sum_i s_i X_i < 0 pointwise (arbitrage), or
/// a non-zero measure mu >= 0 with every integral sum_w X_i(w) mu(w) >= 0.
struct DichotomyCertificate {
  DichotomyBranch branch = DichotomyBranch::kMeasure;
  std::vector<double> weights;  ///< arbitrage branch
  std::vector<double> measure;  ///< measure branch, normalized to total mass 1
  /// Arbitrage: min_w -(sum_i s_i X_i)(w). Measure: min_i of the integrals.
  double verification_margin = 0.0;
  /// Measure branch with margin <= tol: every integral can only be made 0.
  bool boundary = false;
};

/// Decides the dichotomy with two exact LPs: maximize t subject to
/// sum_i s_i X_i(w) <= -t, s_i >= 1, t <= 1; t > tol gives arbitrage,
/// otherwise maximize min_i integral over probability measures.
DichotomyCertificate decide(const PayoffSystem& system, double tol = 1e-12);

/// Re-checks a certificate against the raw payoffs without any LP.
bool verify(const PayoffSystem& system, const DichotomyCertificate& certificate);

std::string to_string(DichotomyBranch branch);
void to_json(nlohmann::json& j, const DichotomyCertificate& c);

}  // namespace unmeasure
