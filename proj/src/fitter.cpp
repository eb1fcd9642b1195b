#include "twinhet/fitter.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <tuple>

#include <fmt/format.h>

#include "twinhet/squeezing.hpp"

namespace twinhet {

namespace {

constexpr double kDbPerNeper = 10.0 / std::numbers::ln10;
constexpr std::array<double, 2> kLower = {0.0, 0.0};
constexpr std::array<double, 2> kUpper = {1.0, 0.5};

using Params = std::array<double, 2>;

Params project(Params p) {
  for (int j = 0; j < 2; ++j) p[j] = std::clamp(p[j], kLower[j], kUpper[j]);
  return p;
}

struct Problem {
  std::vector<double> y;
  std::vector<double> w;
  std::vector<double> own;    // pure variance of the point's own branch
  std::vector<double> other;  // pure variance of the opposite branch

  std::size_t size() const { return y.size(); }

  double model(std::size_t i, const Params& p) const {
    const double v = p[0] * ((1.0 - p[1]) * own[i] + p[1] * other[i]) + (1.0 - p[0]);
    return kDbPerNeper * std::log(v);
  }

  double cost(const Params& p) const {
    double c = 0.0;
    for (std::size_t i = 0; i < size(); ++i) {
      const double r = y[i] - model(i, p);
      c += w[i] * r * r;
    }
    return c;
  }

  /// Normal-equation matrix A = J^T W J and gradient g = J^T W (y - m).
  void linearize(const Params& p, std::array<std::array<double, 2>, 2>& a, Params& g) const {
    a = {};
    g = {};
    for (std::size_t i = 0; i < size(); ++i) {
      const double mixed = (1.0 - p[1]) * own[i] + p[1] * other[i];
      const double v = p[0] * mixed + (1.0 - p[0]);
      const double d_eta = kDbPerNeper * (mixed - 1.0) / v;
      const double d_xi = kDbPerNeper * p[0] * (other[i] - own[i]) / v;
      const double r = y[i] - kDbPerNeper * std::log(v);
      const Params d = {d_eta, d_xi};
      for (int j = 0; j < 2; ++j) {
        g[j] += w[i] * d[j] * r;
        for (int k = 0; k < 2; ++k) a[j][k] += w[i] * d[j] * d[k];
      }
    }
  }
};

Problem make_problem(const SqueezingDataset& data) {
  std::vector<SqueezingPoint> pts = data.points;
  // Canonical order so the fit does not depend on input ordering.
  std::sort(pts.begin(), pts.end(), [](const SqueezingPoint& a, const SqueezingPoint& b) {
    return std::make_tuple(a.x, static_cast<int>(a.quadrature), a.noise_db, a.weight,
                           a.replicates) <
           std::make_tuple(b.x, static_cast<int>(b.quadrature), b.noise_db, b.weight,
                           b.replicates);
  });
  Problem prob;
  double weight_sum = 0.0;
  for (const auto& pt : pts) weight_sum += pt.weight * pt.replicates;
  const double weight_mean = weight_sum / static_cast<double>(pts.size());
  for (const auto& pt : pts) {
    const VariancePair v = pure_variances(pt.x);
    const bool sq = pt.quadrature == Quadrature::squeezed;
    prob.y.push_back(pt.noise_db);
    prob.w.push_back(pt.weight * pt.replicates / weight_mean);
    prob.own.push_back(sq ? v.v_minus : v.v_plus);
    prob.other.push_back(sq ? v.v_plus : v.v_minus);
  }
  return prob;
}

struct LmRun {
  Params p{};
  double cost = 0.0;
  int iterations = 0;
  bool converged = false;
};

using StepObserver = std::function<void(double, double)>;

LmRun levenberg_marquardt(const Problem& prob, Params start, std::array<bool, 2> free,
                          int max_iterations, const StepObserver& observer = {}) {
  LmRun run;
  run.p = project(start);
  run.cost = prob.cost(run.p);
  double lambda = 1e-3;
  for (int it = 0; it < max_iterations; ++it) {
    run.iterations = it + 1;
    if (run.cost == 0.0) {
      run.converged = true;
      break;
    }
    std::array<std::array<double, 2>, 2> a;
    Params g;
    prob.linearize(run.p, a, g);

    // Parameters pinned at a bound with the gradient pushing outward stay put.
    std::array<bool, 2> active = free;
    for (int j = 0; j < 2; ++j) {
      if (!active[j]) continue;
      if ((run.p[j] <= kLower[j] && g[j] <= 0.0) || (run.p[j] >= kUpper[j] && g[j] >= 0.0)) {
        active[j] = false;
      }
    }
    if (!active[0] && !active[1]) {
      run.converged = true;
      break;
    }

    Params step = {0.0, 0.0};
    std::array<double, 2> diag;
    for (int j = 0; j < 2; ++j) diag[j] = a[j][j] * (1.0 + lambda) + 1e-300;
    if (active[0] && active[1]) {
      const double det = diag[0] * diag[1] - a[0][1] * a[1][0];
      if (det > 0.0) {
        step[0] = (g[0] * diag[1] - a[0][1] * g[1]) / det;
        step[1] = (diag[0] * g[1] - a[1][0] * g[0]) / det;
      } else {
        step = {g[0] / diag[0], g[1] / diag[1]};
      }
    } else {
      const int j = active[0] ? 0 : 1;
      step[j] = g[j] / diag[j];
    }

    const Params candidate = project({run.p[0] + step[0], run.p[1] + step[1]});
    const double c = prob.cost(candidate);
    if (c < run.cost) {
      const double decrease = run.cost - c;
      const bool tiny_step =
          std::abs(candidate[0] - run.p[0]) <= 1e-13 * (std::abs(run.p[0]) + 1e-9) &&
          std::abs(candidate[1] - run.p[1]) <= 1e-13 * (std::abs(run.p[1]) + 1e-9);
      run.p = candidate;
      run.cost = c;
      if (observer) observer(run.p[0], run.p[1]);
      lambda = std::max(lambda * 0.1, 1e-12);
      if (tiny_step || decrease <= 1e-15 * c) {
        run.converged = true;
        break;
      }
    } else {
      lambda *= 10.0;
      if (lambda > 1e12) {
        // No descent left at machine precision.
        run.converged = true;
        break;
      }
    }
  }
  return run;
}

bool invert2(const std::array<std::array<double, 2>, 2>& a,
             std::array<std::array<double, 2>, 2>& inv) {
  const double det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
  if (!(std::abs(det) > 1e-300) || !std::isfinite(det)) return false;
  inv = {{{a[1][1] / det, -a[0][1] / det}, {-a[1][0] / det, a[0][0] / det}}};
  return true;
}

/// Profile cost: minimum over eta_c at fixed Xi'.
double profile_cost(const Problem& prob, double xi, double& eta_warm, int max_iterations) {
  const LmRun run = levenberg_marquardt(prob, {eta_warm, xi}, {true, false}, max_iterations);
  eta_warm = run.p[0];
  return run.cost;
}

double profile_edge(const Problem& prob, const Params& best, double threshold, double step0,
                    int direction, int max_iterations) {
  const double limit = direction > 0 ? kUpper[1] : kLower[1];
  double eta = best[0];
  double inside = best[1];
  double step = step0;
  double outside = limit;
  bool bracketed = false;
  for (int k = 0; k < 200; ++k) {
    double cand = inside + direction * step;
    cand = direction > 0 ? std::min(cand, limit) : std::max(cand, limit);
    if (profile_cost(prob, cand, eta, max_iterations) > threshold) {
      outside = cand;
      bracketed = true;
      break;
    }
    inside = cand;
    if (cand == limit) break;
    step *= 2.0;
  }
  if (!bracketed) return limit;
  eta = best[0];
  for (int k = 0; k < 100; ++k) {
    const double mid = 0.5 * (inside + outside);
    if (std::abs(outside - inside) <= 1e-13 + 1e-10 * std::abs(mid)) break;
    if (profile_cost(prob, mid, eta, max_iterations) > threshold) {
      outside = mid;
    } else {
      inside = mid;
    }
  }
  return 0.5 * (inside + outside);
}

LmRun best_of_starts(const Problem& prob, const FitOptions& options) {
  std::vector<Params> starts = {options.init};
  for (int k = 0; k < options.xi_seeds; ++k) {
    const double exponent =
        options.xi_seeds == 1 ? -4.0 : -6.0 + 4.0 * k / static_cast<double>(options.xi_seeds - 1);
    starts.push_back({options.init[0], std::pow(10.0, exponent)});
  }
  LmRun best;
  int total_iterations = 0;
  bool have = false;
  for (const Params& s : starts) {
    const LmRun run =
        levenberg_marquardt(prob, s, {true, true}, options.max_iterations, options.on_accepted_step);
    total_iterations += run.iterations;
    if (!have || run.cost < best.cost) {
      best = run;
      have = true;
    }
  }
  best.iterations = total_iterations;
  return best;
}

}  // namespace

std::size_t SqueezingDataset::distinct_x() const {
  std::set<double> xs;
  for (const auto& p : points) xs.insert(p.x);
  return xs.size();
}

bool SqueezingDataset::has_both_quadratures() const {
  bool sq = false;
  bool anti = false;
  for (const auto& p : points) {
    (p.quadrature == Quadrature::squeezed ? sq : anti) = true;
  }
  return sq && anti;
}

void SqueezingDataset::validate() const {
  for (std::size_t i = 0; i < points.size(); ++i) {
    const auto& p = points[i];
    if (!(p.x >= 0.0 && p.x < 1.0)) {
      throw NumericError(fmt::format("dataset point {}: x = {} outside [0, 1)", i, p.x));
    }
    if (!std::isfinite(p.noise_db)) {
      throw NumericError(fmt::format("dataset point {}: noise level is not finite", i));
    }
    if (!(p.weight > 0.0) || !std::isfinite(p.weight) || p.replicates < 1) {
      throw NumericError(
          fmt::format("dataset point {}: weight must be > 0 and replicates >= 1", i));
    }
  }
  if (distinct_x() < 3) {
    throw NumericError(fmt::format(
        "degenerate dataset: {} distinct pump values, at least 3 are required", distinct_x()));
  }
}

double model_db(double x, Quadrature quadrature, double eta_c, double xi_prime) {
  const VariancePair v = degrade(pure_variances(x), eta_c, xi_prime);
  return to_db(quadrature == Quadrature::squeezed ? v.v_minus : v.v_plus);
}

FitResult fit_dephasing_model(const SqueezingDataset& data, const FitOptions& options) {
  data.validate();
  const Problem prob = make_problem(data);

  const LmRun best = best_of_starts(prob, options);
  FitResult fit;
  fit.eta_c = best.p[0];
  fit.xi_prime = best.p[1];
  fit.iterations = best.iterations;
  fit.converged = best.converged;
  fit.joint = data.has_both_quadratures();
  fit.points = prob.size();
  fit.residual_norm = std::sqrt(best.cost);
  const double dof = static_cast<double>(prob.size()) - 2.0;
  fit.residual_variance = dof > 0.0 ? best.cost / dof : 0.0;

  std::array<std::array<double, 2>, 2> a;
  Params g;
  prob.linearize(best.p, a, g);
  std::array<std::array<double, 2>, 2> inv;
  if (invert2(a, inv)) {
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k) fit.covariance[j][k] = fit.residual_variance * inv[j][k];
    fit.eta_c_error = std::sqrt(std::max(0.0, fit.covariance[0][0]));
    fit.xi_prime_error = std::sqrt(std::max(0.0, fit.covariance[1][1]));
  } else {
    fit.eta_c_error = std::numeric_limits<double>::infinity();
    fit.xi_prime_error = std::numeric_limits<double>::infinity();
  }

  fit.xi_prime_lower = std::max(kLower[1], fit.xi_prime - fit.xi_prime_error);
  fit.xi_prime_upper = std::min(kUpper[1], fit.xi_prime + fit.xi_prime_error);
  if (options.profile_bounds) {
    if (fit.residual_variance > 0.0) {
      const double threshold = best.cost + fit.residual_variance;
      const double step0 = std::isfinite(fit.xi_prime_error) && fit.xi_prime_error > 0.0
                               ? fit.xi_prime_error
                               : 1e-6;
      fit.xi_prime_upper =
          profile_edge(prob, best.p, threshold, step0, +1, options.max_iterations);
      fit.xi_prime_lower =
          profile_edge(prob, best.p, threshold, step0, -1, options.max_iterations);
    } else {
      fit.xi_prime_lower = fit.xi_prime;
      fit.xi_prime_upper = fit.xi_prime;
    }
  }

  if (options.bootstrap_replicas > 0) {
    const int replicas = options.bootstrap_replicas;
    const RngStream rng(options.bootstrap_seed, "fitter/bootstrap");
    std::vector<double> model(prob.size());
    std::vector<double> scaled(prob.size());
    for (std::size_t i = 0; i < prob.size(); ++i) {
      model[i] = prob.model(i, best.p);
      scaled[i] = std::sqrt(prob.w[i]) * (prob.y[i] - model[i]);
    }
    std::vector<Params> estimates(static_cast<std::size_t>(replicas));
#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < replicas; ++b) {
      const RngStream replica = rng.derive(static_cast<std::uint64_t>(b));
      Problem resampled = prob;
      for (std::size_t i = 0; i < prob.size(); ++i) {
        const double u = replica.uniform_pair(i)[0];
        const auto j = std::min(prob.size() - 1,
                                static_cast<std::size_t>(u * static_cast<double>(prob.size())));
        resampled.y[i] = model[i] + scaled[j] / std::sqrt(prob.w[i]);
      }
      estimates[static_cast<std::size_t>(b)] =
          levenberg_marquardt(resampled, best.p, {true, true}, options.max_iterations).p;
    }
    for (int j = 0; j < 2; ++j) {
      double mean = 0.0;
      for (const auto& e : estimates) mean += e[j];
      mean /= replicas;
      double var = 0.0;
      for (const auto& e : estimates) var += (e[j] - mean) * (e[j] - mean);
      const double sd = replicas > 1 ? std::sqrt(var / (replicas - 1)) : 0.0;
      (j == 0 ? fit.bootstrap_eta_c_sd : fit.bootstrap_xi_prime_sd) = sd;
    }
  }
  return fit;
}

EfficiencyPair invert_dephasing(double eta_c, double xi_prime, double assumed_theta_rms,
                                double eta_c_error, double xi_prime_error) {
  if (!(eta_c > 0.0 && eta_c <= 1.0)) {
    throw NumericError(fmt::format("common efficiency {} outside (0, 1]", eta_c));
  }
  if (!(assumed_theta_rms >= 0.0)) throw NumericError("theta_rms must be >= 0");
  const double t2 = assumed_theta_rms * assumed_theta_rms;
  const double denom = 1.0 - 2.0 * t2;
  if (!(denom > 0.0)) throw NumericError("theta_rms too large for the dephasing model");
  const double xi = (xi_prime - t2) / denom;
  if (xi < -1e-15) {
    throw PhaseNoiseDominated(fmt::format(
        "phase-noise-dominated: theta_rms^2 = {:.4g} exceeds the fitted dephasing {:.4g}", t2,
        xi_prime));
  }
  const double xi_c = std::max(0.0, xi);
  // eta_c^2 - eta_c^2 (1 - 2 Xi)^2 = 4 eta_c^2 Xi (1 - Xi)
  const double spread_sq = eta_c * eta_c - eta_c * eta_c * (1.0 - 2.0 * xi_c) * (1.0 - 2.0 * xi_c);
  if (spread_sq < 0.0) throw NumericError("negative discriminant in efficiency inversion");
  const double spread = std::sqrt(spread_sq);

  EfficiencyPair out;
  out.eta1 = eta_c - spread;
  out.eta2 = eta_c + spread;
  if (out.eta2 > 1.0) {
    throw NumericError(fmt::format(
        "inverted path efficiency {:.4g} exceeds 1; dephasing too large for eta_c = {:.4g}",
        out.eta2, eta_c));
  }

  // d spread / d eta_c = spread / eta_c; d spread / d Xi = eta_c (1 - 2 Xi) / sqrt(Xi (1 - Xi)).
  const double d_eta = spread / eta_c;
  double d_xi = 0.0;
  if (xi_c > 0.0) d_xi = eta_c * (1.0 - 2.0 * xi_c) / std::sqrt(xi_c * (1.0 - xi_c));
  const double xi_error = xi_prime_error / denom;
  out.eta1_error = std::hypot((1.0 - d_eta) * eta_c_error, d_xi * xi_error);
  out.eta2_error = std::hypot((1.0 + d_eta) * eta_c_error, d_xi * xi_error);
  return out;
}

EfficiencyPair invert_dephasing(const FitResult& fit, double assumed_theta_rms) {
  const double xi_err = 0.5 * (fit.xi_prime_error_minus() + fit.xi_prime_error_plus());
  return invert_dephasing(fit.eta_c, fit.xi_prime, assumed_theta_rms, fit.eta_c_error, xi_err);
}

PhaseNoiseEstimate theta_rms_from_fit(const FitResult& fit, double assumed_xi) {
  if (!(assumed_xi >= 0.0 && assumed_xi < 0.5)) {
    throw NumericError(fmt::format("assumed dephasing {} outside [0, 0.5)", assumed_xi));
  }
  if (!(fit.xi_prime >= 0.0)) throw NumericError("fitted dephasing must be >= 0");
  const auto theta = [&](double xi_prime) {
    return std::sqrt(std::max(0.0, (xi_prime - assumed_xi) / (1.0 - 2.0 * assumed_xi)));
  };
  return {theta(fit.xi_prime), theta(fit.xi_prime_lower), theta(fit.xi_prime_upper)};
}

SqueezingDataset model_dataset(double eta_c, double xi_prime, std::span<const double> x_grid,
                               int replicates, double noise_db, const RngStream& rng,
                               std::uint64_t first_index) {
  if (replicates < 1) throw NumericError("replicates must be >= 1");
  if (!(noise_db >= 0.0)) throw NumericError("noise level must be >= 0");
  SqueezingDataset data;
  std::uint64_t index = first_index;
  for (double x : x_grid) {
    for (Quadrature q : {Quadrature::squeezed, Quadrature::antisqueezed}) {
      const double truth = model_db(x, q, eta_c, xi_prime);
      for (int r = 0; r < replicates; ++r) {
        const double noise = noise_db > 0.0 ? noise_db * rng.normal_pair(index++).first : 0.0;
        data.points.push_back({x, q, truth + noise, 1.0, 1});
      }
    }
  }
  return data;
}

}  // namespace twinhet
