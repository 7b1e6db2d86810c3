#include "ramankit/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "ramankit/rng.hpp"

namespace ramankit::optim {

namespace {

bool lex_less(const std::vector<double>& a, const std::vector<double>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end());
}

struct Vertex {
  std::vector<double> x;
  double f;
};

bool vertex_less(const Vertex& a, const Vertex& b) {
  if (a.f != b.f) return a.f < b.f;
  return lex_less(a.x, b.x);
}

double simplex_diameter(const std::vector<Vertex>& simplex) {
  double d = 0.0;
  for (std::size_t i = 1; i < simplex.size(); ++i)
    for (std::size_t k = 0; k < simplex[i].x.size(); ++k)
      d = std::max(d, std::abs(simplex[i].x[k] - simplex[0].x[k]));
  return d;
}

double inf_norm(const std::vector<double>& v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

FitResult nelder_mead(const Objective& objective, std::span<const double> x0,
                      std::span<const double> scale, const NelderMeadOptions& opts) {
  const std::size_t n = x0.size();
  if (n == 0) throw std::invalid_argument("nelder_mead: empty parameter vector");
  if (scale.size() != n) throw std::invalid_argument("nelder_mead: scale size mismatch");
  for (double s : scale)
    if (s == 0.0 || !std::isfinite(s))
      throw std::invalid_argument("nelder_mead: scale entries must be nonzero and finite");

  int evals = 0;
  auto eval = [&](const std::vector<double>& x) {
    ++evals;
    return objective(std::span<const double>(x));
  };

  std::vector<Vertex> simplex;
  simplex.reserve(n + 1);
  {
    std::vector<double> v(x0.begin(), x0.end());
    simplex.push_back({v, eval(v)});
    for (std::size_t i = 0; i < n; ++i) {
      std::vector<double> vi(x0.begin(), x0.end());
      vi[i] += scale[i];
      simplex.push_back({vi, eval(vi)});
    }
  }
  std::sort(simplex.begin(), simplex.end(), vertex_less);

  const double rho = 1.0, chi = 2.0, gam = 0.5, sig = 0.5;

  bool converged = false;
  while (true) {
    const double spread = simplex.back().f - simplex.front().f;
    const double f_scale = std::max(1.0, std::abs(simplex.front().f));
    const double x_scale = std::max(1.0, inf_norm(simplex.front().x));
    if (spread <= opts.tol * f_scale || simplex_diameter(simplex) <= opts.tol * x_scale) {
      converged = true;
      break;
    }
    if (evals >= opts.max_eval) break;

    std::vector<double> centroid(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t k = 0; k < n; ++k) centroid[k] += simplex[i].x[k];
    }
    for (double& c : centroid) c /= static_cast<double>(n);

    auto along = [&](double coeff) {
      std::vector<double> p(n);
      for (std::size_t k = 0; k < n; ++k)
        p[k] = centroid[k] + coeff * (simplex.back().x[k] - centroid[k]);
      return p;
    };

    Vertex reflected{along(-rho), 0.0};
    reflected.f = eval(reflected.x);

    if (vertex_less(reflected, simplex.front())) {
      Vertex expanded{along(-rho * chi), 0.0};
      expanded.f = eval(expanded.x);
      simplex.back() = vertex_less(expanded, reflected) ? expanded : reflected;
    } else if (vertex_less(reflected, simplex[n - 1])) {
      simplex.back() = reflected;
    } else {
      bool outside = vertex_less(reflected, simplex.back());
      Vertex contracted{along(outside ? -rho * gam : gam), 0.0};
      contracted.f = eval(contracted.x);
      const Vertex& bar = outside ? reflected : simplex.back();
      if (vertex_less(contracted, bar)) {
        simplex.back() = contracted;
      } else {
        // shrink toward the current best vertex
        for (std::size_t i = 1; i <= n; ++i) {
          for (std::size_t k = 0; k < n; ++k)
            simplex[i].x[k] = simplex[0].x[k] + sig * (simplex[i].x[k] - simplex[0].x[k]);
          simplex[i].f = eval(simplex[i].x);
        }
      }
    }
    std::sort(simplex.begin(), simplex.end(), vertex_less);
  }

  FitResult result;
  result.params = simplex.front().x;
  result.objective_value = simplex.front().f;
  result.n_evaluations = evals;
  result.converged = converged;
  return result;
}

FitResult nelder_mead_multistart(const Objective& objective, std::span<const double> x0,
                                 std::span<const double> scale, int n_starts,
                                 std::uint64_t seed, const NelderMeadOptions& opts) {
  if (n_starts < 1) throw std::invalid_argument("nelder_mead_multistart: n_starts must be >= 1");
  FitResult best = nelder_mead(objective, x0, scale, opts);
  int total_evals = best.n_evaluations;
  std::vector<double> start(x0.begin(), x0.end());
  for (int k = 1; k < n_starts; ++k) {
    rng::Stream stream(rng::mix(seed, static_cast<std::uint64_t>(k)));
    for (std::size_t i = 0; i < start.size(); ++i)
      start[i] = x0[i] + scale[i] * (2.0 * stream.uniform() - 1.0);
    FitResult r = nelder_mead(objective, start, scale, opts);
    total_evals += r.n_evaluations;
    if (r.objective_value < best.objective_value ||
        (r.objective_value == best.objective_value && r.converged && !best.converged)) {
      best = r;
    }
  }
  best.n_evaluations = total_evals;
  return best;
}

LinearFit linear_fit(std::span<const double> x, std::span<const double> y) {
  const std::size_t n = x.size();
  if (n != y.size()) throw std::invalid_argument("linear_fit: size mismatch");
  if (n < 2) throw std::invalid_argument("linear_fit: need at least two points");

  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);

  double sxx = 0.0, sxy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw std::invalid_argument("linear_fit: singular (all abscissae equal)");

  LinearFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  if (n > 2) {
    double ssr = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double r = y[i] - (fit.slope * x[i] + fit.intercept);
      ssr += r * r;
    }
    fit.stderr_slope = std::sqrt(ssr / static_cast<double>(n - 2) / sxx);
  }
  return fit;
}

ExponentialFit exponential_fit(std::span<const double> t, std::span<const double> y) {
  const std::size_t n = t.size();
  if (n != y.size()) throw std::invalid_argument("exponential_fit: size mismatch");
  if (n < 3) throw std::invalid_argument("exponential_fit: need at least three points");

  double t_span = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) t_span = std::max(t_span, std::abs(t[i] - t[j]));
  if (t_span == 0.0) throw std::invalid_argument("exponential_fit: all abscissae equal");

  bool all_positive = true;
  for (double v : y)
    if (!(v > 0.0)) all_positive = false;

  double a0, r0;
  if (all_positive) {
    std::vector<double> logy(n);
    for (std::size_t i = 0; i < n; ++i) logy[i] = std::log(y[i]);
    const LinearFit lf = linear_fit(t, logy);
    a0 = std::exp(lf.intercept);
    r0 = lf.slope;
  } else {
    // log-linear seeding is unavailable; start from the endpoints
    double ymax = 0.0;
    for (double v : y) ymax = std::max(ymax, std::abs(v));
    a0 = ymax > 0.0 ? y.front() : 1.0;
    if (a0 == 0.0) a0 = ymax;
    const double yf = std::abs(y.front()), yl = std::abs(y.back());
    r0 = (yf > 0.0 && yl > 0.0) ? std::log(yl / yf) / t_span : 0.0;
  }

  auto sse = [&](std::span<const double> p) {
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double ex = std::clamp(p[1] * t[i], -700.0, 700.0);
      const double r = p[0] * std::exp(ex) - y[i];
      acc += r * r;
    }
    return acc;
  };

  const double x0[2] = {a0, r0};
  const double scale[2] = {0.1 * std::abs(a0) + 1e-12, 0.1 * std::abs(r0) + 0.1 / t_span};
  const FitResult fit = nelder_mead(sse, x0, scale);
  return {fit.params[1], fit.params[0]};
}

double lorentzian_eval(const LorentzianPeak& peak, double x) {
  const double hw = 0.5 * peak.fwhm;
  const double d = x - peak.center;
  return peak.amplitude * hw * hw / (d * d + hw * hw);
}

double multi_lorentzian_eval(std::span<const LorentzianPeak> peaks, double baseline, double x) {
  double v = baseline;
  for (const auto& p : peaks) v += lorentzian_eval(p, x);
  return v;
}

}  // namespace ramankit::optim
