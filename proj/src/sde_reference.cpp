// Serial reference for simulate_means: whole-history storage, matrix-vector
// drift assembled from the analytic coefficient matrices, one path after
// another. Same scheme and random streams as the parallel kernel.

#include <algorithm>
#include <cmath>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>

#include "osc/linalg.hpp"
#include "osc/sde.hpp"
#include "sde_detail.hpp"

namespace osc {

namespace {

struct Frame {
  linalg::SquareMatrix drift{4};  // without the delayed control term
  std::vector<double> g_w;        // coefficient of dW
  std::vector<double> g_cl;       // coefficient of dW_cl
};

Frame frame(const ModelParams& p, const CovMatrix& vf, const CovMatrix& vs, bool lagged) {
  const MeanCoefficients fc = filter_means_matrices(p, vf);
  Frame f;
  for (std::size_t i = 0; i < 2; ++i)
    for (std::size_t j = 0; j < 2; ++j) {
      f.drift(i, j) = fc.filter_drift(i, j);
      f.drift(i, j + 2) = fc.system_drift(i, j);
    }
  f.drift(2, 3) = 1.0;
  f.drift(3, 2) = -1.0;
  if (!lagged) f.drift(3, 1) = -p.k;
  const double gs = 2.0 * std::sqrt(p.eta_s * p.alpha_s);
  f.g_w = {fc.noise_w[0], fc.noise_w[1], gs * vs.v_xx, gs * vs.v_xp};
  f.g_cl = {fc.noise_cl[0], fc.noise_cl[1], 0.0, 0.0};
  return f;
}

}  // namespace

TrajectoryStats simulate_means_reference(const ModelParams& params, const SimConfig& sim, const MeanPair& x0,
                                         const IdenticalCase& baseline) {
  validate_plant(params);
  validate(sim, params);

  const VarianceSchedule schedule = detail::make_schedule(params, sim);
  const std::size_t n_steps = step_count(sim);
  const std::size_t lag = params.tau > 0.0 ? delay_steps(params.tau, sim.dt) : 0;
  const bool lagged = lag > 0;
  const auto records = detail::record_steps(n_steps, sim.record_stride);
  const double e_cap = kDivergenceRatio * detail::reference_energy(baseline, steady_variances(params));
  const double h = sim.dt;

  std::vector<Frame> frames;
  for (std::size_t j = 0; j <= 2 * n_steps; ++j)
    frames.push_back(frame(params, schedule.filter(j), schedule.system(j), lagged));

  std::vector<double> e_sum(records.size()), e_sq(records.size());
  std::vector<MomentVector> m_sum(records.size(), MomentVector{});
  double x_sum = 0.0, x_sq = 0.0, p_sum = 0.0, p_sq = 0.0, dev_x = 0.0, dev_p = 0.0;
  std::size_t n_div = 0;

  for (std::size_t path = 0; path < sim.n_paths; ++path) {
    boost::random::mt19937_64 rng(stream_seed(sim.seed, path));
    boost::random::normal_distribution<double> normal(0.0, std::sqrt(sim.dt));
    std::vector<std::vector<double>> hist{{x0.x_pi, x0.p_pi, x0.x_rho, x0.p_rho}};
    bool frozen = false;

    // filter momentum at fractional grid position t / dt, constant before 0
    auto p_pi_at = [&](double pos) {
      if (pos <= 0.0) return hist[0][1];
      const auto i = static_cast<std::size_t>(std::floor(pos));
      const double f = pos - static_cast<double>(i);
      return f == 0.0 ? hist[i][1] : hist[i][1] + f * (hist[i + 1][1] - hist[i][1]);
    };
    auto rhs = [&](const std::vector<double>& y, const Frame& fr, double pos) {
      std::vector<double> d = linalg::multiply(fr.drift, y);
      if (lagged) d[3] -= params.k * p_pi_at(pos - static_cast<double>(lag));
      return d;
    };

    for (std::size_t n = 0; n < n_steps; ++n) {
      std::vector<double> y = hist.back();
      const double dw = normal(rng);
      const double dw_cl = params.nu > 0.0 ? normal(rng) : 0.0;
      if (!frozen) {
        const Frame& f0 = frames[2 * n];
        const Frame& f1 = frames[2 * n + 1];
        const Frame& f2 = frames[2 * n + 2];
        for (std::size_t i = 0; i < 4; ++i) y[i] += 0.5 * (f0.g_w[i] * dw + f0.g_cl[i] * dw_cl);
        const double t = static_cast<double>(n);
        auto k1 = rhs(y, f0, t);
        std::vector<double> y2(4), y3(4), y4(4);
        for (std::size_t i = 0; i < 4; ++i) y2[i] = y[i] + 0.5 * h * k1[i];
        auto k2 = rhs(y2, f1, t + 0.5);
        for (std::size_t i = 0; i < 4; ++i) y3[i] = y[i] + 0.5 * h * k2[i];
        auto k3 = rhs(y3, f1, t + 0.5);
        for (std::size_t i = 0; i < 4; ++i) y4[i] = y[i] + h * k3[i];
        auto k4 = rhs(y4, f2, t + 1.0);
        for (std::size_t i = 0; i < 4; ++i) y[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        for (std::size_t i = 0; i < 4; ++i) y[i] += 0.5 * (f2.g_w[i] * dw + f2.g_cl[i] * dw_cl);
        const double e = 0.5 * (y[2] * y[2] + y[3] * y[3]);
        if (!(e <= e_cap)) {
          frozen = true;
          ++n_div;
        }
      }
      hist.push_back(y);
    }

    for (std::size_t r = 0; r < records.size(); ++r) {
      const auto& y = hist[records[r]];
      const double e = 0.5 * (y[2] * y[2] + y[3] * y[3]);
      e_sum[r] += e;
      e_sq[r] += e * e;
      for (std::size_t m = 0; m < kMomentCount; ++m) m_sum[r][m] += y[kMomentPairs[m][0]] * y[kMomentPairs[m][1]];
    }
    for (const auto& y : hist) {
      dev_x = std::max(dev_x, std::abs(y[0] - y[2]));
      dev_p = std::max(dev_p, std::abs(y[1] - y[3]));
    }
    const auto& y = hist.back();
    x_sum += y[2];
    x_sq += y[2] * y[2];
    p_sum += y[3];
    p_sq += y[3] * y[3];
  }

  TrajectoryStats st;
  const double n = static_cast<double>(sim.n_paths);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const CovMatrix& vs = schedule.system(2 * records[r]);
    st.times.push_back(static_cast<double>(records[r]) * sim.dt);
    st.mean_energy.push_back(e_sum[r] / n + 0.5 * (vs.v_xx + vs.v_pp));
    st.std_error.push_back(detail::standard_error(e_sum[r], e_sq[r], sim.n_paths));
    MomentVector m;
    for (std::size_t i = 0; i < kMomentCount; ++i) m[i] = m_sum[r][i] / n;
    st.second_moments.push_back(m);
  }
  st.mean_x_rho = x_sum / n;
  st.mean_p_rho = p_sum / n;
  st.se_x_rho = detail::standard_error(x_sum, x_sq, sim.n_paths);
  st.se_p_rho = detail::standard_error(p_sum, p_sq, sim.n_paths);
  st.max_dev_x = dev_x;
  st.max_dev_p = dev_p;
  st.n_diverged = n_div;
  st.diverged = n_div > 0;
  return st;
}

}  // namespace osc
