#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

namespace ramankit::optim {

struct FitResult {
  std::vector<double> params;
  double objective_value = 0.0;
  int n_evaluations = 0;
  bool converged = false;
};

struct NelderMeadOptions {
  double tol = 1e-9;    // relative simplex diameter / objective spread
  int max_eval = 20000; // exhausting the budget yields converged = false
};

using Objective = std::function<double(std::span<const double>)>;

// Downhill simplex (Nelder-Mead) minimization. The initial simplex is x0
// plus one vertex per dimension displaced by scale[i]; every scale entry
// must be nonzero. Exact objective ties are broken by lexicographic vertex
// comparison so runs are bit-reproducible.
FitResult nelder_mead(const Objective& objective, std::span<const double> x0,
                      std::span<const double> scale, const NelderMeadOptions& opts = {});

// Runs nelder_mead once from x0 and (n_starts - 1) times from uniformly
// jittered copies (x0[i] +/- scale[i]); returns the best result found.
FitResult nelder_mead_multistart(const Objective& objective, std::span<const double> x0,
                                 std::span<const double> scale, int n_starts,
                                 std::uint64_t seed, const NelderMeadOptions& opts = {});

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double stderr_slope = 0.0;
};

// Ordinary least squares y = slope * x + intercept. Throws if fewer than two
// points or all abscissae coincide. stderr_slope is the usual residual-based
// estimate (zero when n == 2).
LinearFit linear_fit(std::span<const double> x, std::span<const double> y);

struct ExponentialFit {
  double rate = 0.0;
  double amplitude = 0.0;
};

// Fits y = amplitude * exp(rate * t). Strictly positive data is seeded by a
// log-linear least squares fit and then refined with nelder_mead on the
// linear-space residual; otherwise the simplex runs directly from a heuristic
// starting point.
ExponentialFit exponential_fit(std::span<const double> t, std::span<const double> y);

struct LorentzianPeak {
  double center = 0.0;
  double fwhm = 0.0;       // > 0
  double amplitude = 0.0;  // peak height above baseline, >= 0
};

double lorentzian_eval(const LorentzianPeak& peak, double x);
double multi_lorentzian_eval(std::span<const LorentzianPeak> peaks, double baseline, double x);

}  // namespace ramankit::optim
