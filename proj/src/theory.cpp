#include "ppds/theory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ppds/kernels.hpp"
#include "ppds/rng.hpp"

namespace ppds {

void RateParams::check() const {
  if (!(mu > 0.0) || !(L > 0.0) || mu > L) {
    throw std::invalid_argument("RateParams: need 0 < mu <= L");
  }
  if (M < 1 || S < 1 || S > M) {
    throw std::invalid_argument("RateParams: need 1 <= S <= M");
  }
  if (lambda < 0.0 || lambda >= 1.0) {
    throw std::invalid_argument("RateParams: need lambda in [0, 1)");
  }
}

namespace {

// M^T (I - J) M, computed as C = M - colmean(M) rows, then M^T C
DenseMatrix centered_gram(const DenseMatrix& m) {
  const DenseVector mean = column_means(m);
  DenseMatrix centered = m;
  for (int i = 0; i < centered.rows; ++i) {
    kern::sub(centered.row(i), centered.row(i), mean.data(),
              static_cast<std::size_t>(centered.cols));
  }
  return matmul(transpose(m), centered);
}

constexpr double kDoublyTol = 1e-12;

bool doubly_stochastic(const DenseMatrix& m) {
  for (int i = 0; i < m.rows; ++i) {
    double rsum = 0.0;
    for (int j = 0; j < m.cols; ++j) {
      if (m(i, j) < -kDoublyTol) return false;
      rsum += m(i, j);
    }
    if (std::fabs(rsum - 1.0) > kDoublyTol) return false;
  }
  for (int j = 0; j < m.cols; ++j) {
    double csum = 0.0;
    for (int i = 0; i < m.rows; ++i) csum += m(i, j);
    if (std::fabs(csum - 1.0) > kDoublyTol) return false;
  }
  return true;
}

double spectral_max(const DenseMatrix& a, const DenseMatrix& b) {
  const double ra = spectral_radius_symmetric(a).value;
  const double rb = spectral_radius_symmetric(b).value;
  double lam = std::max(ra, rb);
  if (lam <= 1e-13) lam = 0.0;  // rounding residue of an exactly zero matrix
  return lam;
}

}  // namespace

LambdaEstimate estimate_lambda(const MixingStrategy& strategy,
                               const SamplingPlan& plan, int n_samples,
                               std::uint64_t seed) {
  if (n_samples < 1) {
    throw std::invalid_argument("estimate_lambda: need n_samples >= 1");
  }
  const int m = plan.node_count;
  Rng rng(seed);
  const int n_batches = std::min(10, n_samples);
  std::vector<DenseMatrix> batch_a(static_cast<std::size_t>(n_batches),
                                   DenseMatrix(m, m, 0.0));
  std::vector<DenseMatrix> batch_b = batch_a;
  std::vector<int> batch_count(static_cast<std::size_t>(n_batches), 0);

  for (int s = 0; s < n_samples; ++s) {
    const std::vector<int> active = sample_devices(plan, rng);
    const MixingPair pair = sample_mixing(strategy, active, rng);
    if (!doubly_stochastic(pair.A) || !doubly_stochastic(pair.B)) {
      throw std::runtime_error(
          "estimate_lambda: drawn pair is not doubly stochastic; the "
          "contraction factor is defined only for doubly stochastic mixing");
    }
    const DenseMatrix ga = centered_gram(pair.A);
    const DenseMatrix gb = centered_gram(pair.B);
    const auto bidx = static_cast<std::size_t>(s % n_batches);
    kern::add(batch_a[bidx].data.data(), batch_a[bidx].data.data(),
              ga.data.data(), ga.data.size());
    kern::add(batch_b[bidx].data.data(), batch_b[bidx].data.data(),
              gb.data.data(), gb.data.size());
    batch_count[bidx] += 1;
  }

  DenseMatrix avg_a(m, m, 0.0), avg_b(m, m, 0.0);
  for (int b = 0; b < n_batches; ++b) {
    kern::add(avg_a.data.data(), avg_a.data.data(),
              batch_a[static_cast<std::size_t>(b)].data.data(),
              avg_a.data.size());
    kern::add(avg_b.data.data(), avg_b.data.data(),
              batch_b[static_cast<std::size_t>(b)].data.data(),
              avg_b.data.size());
  }
  kern::scale(avg_a.data.data(), avg_a.data.data(), 1.0 / n_samples,
              avg_a.data.size());
  kern::scale(avg_b.data.data(), avg_b.data.data(), 1.0 / n_samples,
              avg_b.data.size());

  LambdaEstimate est;
  est.samples = n_samples;
  est.lambda_hat = spectral_max(avg_a, avg_b);

  if (n_batches > 1) {
    std::vector<double> lams;
    lams.reserve(static_cast<std::size_t>(n_batches));
    for (int b = 0; b < n_batches; ++b) {
      const auto bi = static_cast<std::size_t>(b);
      if (batch_count[bi] == 0) continue;
      DenseMatrix ba = batch_a[bi], bb = batch_b[bi];
      kern::scale(ba.data.data(), ba.data.data(), 1.0 / batch_count[bi],
                  ba.data.size());
      kern::scale(bb.data.data(), bb.data.data(), 1.0 / batch_count[bi],
                  bb.data.size());
      lams.push_back(spectral_max(ba, bb));
    }
    // a fixed strategy yields bit-identical batches: report exactly zero
    const bool all_equal =
        std::all_of(lams.begin(), lams.end(),
                    [&](double v) { return v == lams.front(); });
    if (!all_equal && lams.size() > 1) {
      double mean = 0.0;
      for (double v : lams) mean += v;
      mean /= static_cast<double>(lams.size());
      double var = 0.0;
      for (double v : lams) var += (v - mean) * (v - mean);
      var /= static_cast<double>(lams.size() - 1);
      est.stderr_ = std::sqrt(var / static_cast<double>(lams.size()));
    }
  }
  return est;
}

double stepsize_bound(const RateParams& params) {
  params.check();
  const double one_ml = 1.0 - params.lambda;
  const double ratio = static_cast<double>(params.M) / params.S;
  const double t1 = one_ml * one_ml / (14.0 * params.L) * std::sqrt(ratio);
  const double t2 =
      one_ml * one_ml / (2304.0 * params.L) * std::pow(ratio, 1.5);
  const double t3 = 1.0 / (576.0 * params.L) * std::sqrt(ratio);
  return std::min({t1, t2, t3});
}

double convergence_rate(const RateParams& params) {
  params.check();
  if (!(params.eta > 0.0)) {
    throw std::invalid_argument("convergence_rate: eta must be positive");
  }
  const double s_over_m = static_cast<double>(params.S) / params.M;
  return std::max(1.0 - params.eta * params.mu * s_over_m / 2.0,
                  1.0 - s_over_m / 4.0);
}

double iteration_complexity(const RateParams& params, double eps) {
  params.check();
  if (!(eps > 0.0) || eps >= 1.0) {
    throw std::invalid_argument("iteration_complexity: need eps in (0, 1)");
  }
  const double ratio = static_cast<double>(params.M) / params.S;
  const double one_ml = 1.0 - params.lambda;
  return ((params.L / params.mu) * std::sqrt(ratio) / (one_ml * one_ml) +
          ratio) *
         std::log(1.0 / eps);
}

RecurrenceSystem build_recurrence_system(const RateParams& params) {
  params.check();
  if (!(params.eta > 0.0)) {
    throw std::invalid_argument("build_recurrence_system: eta must be positive");
  }
  const double eta = params.eta, L = params.L, mu = params.mu,
               lam = params.lambda;
  const double M = params.M, S = params.S;
  const double onem = 1.0 - lam;

  RecurrenceSystem sys;
  sys.Q = DenseMatrix(4, 4, 0.0);
  auto& Q = sys.Q;
  // tracked order: [distance^2, X-dispersion, Y-dispersion, memory error]
  Q(0, 0) = 1.0 - eta * mu * S / (2.0 * M);
  Q(0, 1) = eta * L * S / (M * M) + 10.0 * eta * eta * L * L * S * S / (M * M * M);
  Q(0, 2) = 2.0 * eta * eta * S * S / (M * M * M);
  Q(0, 3) = 4.0 * eta * eta * S * S / (M * M * M);

  Q(1, 1) = (1.0 + lam) / 2.0 + 20.0 * eta * eta * L * L * S / (M * onem);
  Q(1, 2) = 4.0 * eta * eta * S / (M * onem);
  Q(1, 3) = 8.0 * eta * eta * S / (M * onem);

  Q(2, 1) = 8.0 * L * L * S / (M * onem);
  Q(2, 2) = (1.0 + lam) / 2.0;
  Q(2, 3) = 4.0 * S / (M * onem);

  Q(3, 1) = 2.0 * L * L * S / M;
  Q(3, 3) = 1.0 - S / M;

  sys.q = {-eta * S / M + 20.0 * eta * eta * L * S * S / (M * M),
           40.0 * eta * eta * L * S / onem, 16.0 * L * S / onem, 4.0 * L * S};

  sys.v = {1.0, std::sqrt(S) * onem / std::pow(M, 1.5),
           eta * onem / (96.0 * M * L), eta / (12.0 * M * L)};

  sys.rho = convergence_rate(params);
  return sys;
}

LyapunovCertificate lyapunov_check(const RateParams& params) {
  const RecurrenceSystem sys = build_recurrence_system(params);
  LyapunovCertificate cert;
  cert.vQ_le_rho_v = true;
  for (int j = 0; j < 4; ++j) {
    double vq_j = 0.0;
    for (int i = 0; i < 4; ++i) vq_j += sys.v[static_cast<std::size_t>(i)] * sys.Q(i, j);
    const double margin = sys.rho * sys.v[static_cast<std::size_t>(j)] - vq_j;
    cert.margins[static_cast<std::size_t>(j)] = margin;
    if (margin < 0.0) cert.vQ_le_rho_v = false;
  }
  double vq = 0.0;
  for (int i = 0; i < 4; ++i) vq += sys.v[static_cast<std::size_t>(i)] * sys.q[static_cast<std::size_t>(i)];
  cert.margins[4] = -vq;
  cert.vq_nonpositive = vq <= 0.0;
  return cert;
}

double GradientBoundReport::min_slack_rel() const {
  return std::min({slack_rel[0], slack_rel[1], slack_rel[2]});
}

GradientBoundReport check_gradient_bounds(const DenseMatrix& X, const DenseMatrix& Z,
                                    const DenseMatrix& G, const Objective& obj,
                                    std::span<const double> x_star,
                                    const SmoothnessConstants& constants) {
  const int m = obj.nodes();
  const auto d = static_cast<std::size_t>(obj.dim());
  if (X.rows != m || Z.rows != m || G.rows != m ||
      static_cast<std::size_t>(X.cols) != d || x_star.size() != d) {
    throw std::invalid_argument("check_gradient_bounds: shape mismatch");
  }
  const double L = constants.L;
  const double f_star = obj.global_value(x_star);

  DenseMatrix grad_x(m, static_cast<int>(d)), grad_z(m, static_cast<int>(d)),
      grad_star(m, static_cast<int>(d));
  for (int i = 0; i < m; ++i) {
    obj.local_gradient(i, X.row_span(i), grad_x.row_span(i));
    obj.local_gradient(i, Z.row_span(i), grad_z.row_span(i));
    obj.local_gradient(i, x_star, grad_star.row_span(i));
  }

  const DenseVector xbar = column_means(X);
  double x_disp = 0.0;
  for (int i = 0; i < m; ++i) x_disp += dist2_squared(X.row_span(i), xbar);
  // the optimality gap is nonnegative by definition; near convergence the
  // subtraction cancels to rounding noise, which must not flip its sign
  const double e_gap = std::max(0.0, obj.global_value(xbar) - f_star);

  double h_mem = 0.0;
  for (int i = 0; i < m; ++i) {
    h_mem += dist2_squared(grad_z.row_span(i), grad_star.row_span(i));
  }

  // Y recovered from the estimator identity G = Y + ∇F(X) - ∇F(Z)
  DenseMatrix Y = G;
  kern::sub(Y.data.data(), Y.data.data(), grad_x.data.data(), Y.data.size());
  kern::add(Y.data.data(), Y.data.data(), grad_z.data.data(), Y.data.size());
  const DenseVector ybar = column_means(Y);
  double y_disp = 0.0;
  for (int i = 0; i < m; ++i) y_disp += dist2_squared(Y.row_span(i), ybar);

  GradientBoundReport rep;
  double lhs_a = 0.0, lhs_b = 0.0;
  for (int i = 0; i < m; ++i) {
    lhs_a += dist2_squared(grad_x.row_span(i), grad_star.row_span(i));
    lhs_b += dist2_squared(grad_x.row_span(i), grad_z.row_span(i));
  }
  double lhs_c = 0.0;
  for (int i = 0; i < m; ++i) lhs_c += norm2_squared(G.row_span(i));

  rep.lhs = {lhs_a, lhs_b, lhs_c};
  rep.rhs = {2.0 * L * L * x_disp + 4.0 * m * L * e_gap,
             4.0 * L * L * x_disp + 8.0 * m * L * e_gap + 2.0 * h_mem,
             10.0 * L * L * x_disp + 20.0 * m * L * e_gap + 4.0 * h_mem +
                 2.0 * y_disp};
  for (std::size_t k = 0; k < 3; ++k) {
    rep.slack_rel[k] = (rep.rhs[k] - rep.lhs[k]) / std::max(1.0, rep.rhs[k]);
  }
  return rep;
}

RateFit empirical_rate(std::span<const MetricsRecord> series,
                       double tail_fraction) {
  if (!(tail_fraction > 0.0) || tail_fraction > 1.0) {
    throw std::invalid_argument("empirical_rate: tail_fraction in (0, 1]");
  }
  RateFit fit;
  const std::size_t n = series.size();
  const auto start = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * (1.0 - tail_fraction)));
  std::vector<double> ts, ys;
  for (std::size_t i = start; i < n; ++i) {
    if (series[i].subopt > 0.0) {
      ts.push_back(static_cast<double>(series[i].t));
      ys.push_back(std::log10(series[i].subopt));
    }
  }
  if (ts.size() < 2) {
    fit.below_floor = true;
    return fit;
  }
  const auto k = static_cast<double>(ts.size());
  double tm = 0.0, ym = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    tm += ts[i];
    ym += ys[i];
  }
  tm /= k;
  ym /= k;
  double stt = 0.0, sty = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < ts.size(); ++i) {
    stt += (ts[i] - tm) * (ts[i] - tm);
    sty += (ts[i] - tm) * (ys[i] - ym);
    syy += (ys[i] - ym) * (ys[i] - ym);
  }
  if (stt == 0.0) {
    fit.below_floor = true;
    return fit;
  }
  fit.slope = sty / stt;
  fit.r2 = syy == 0.0 ? 1.0 : (sty * sty) / (stt * syy);
  return fit;
}

}  // namespace ppds
