#include "osc/sde.hpp"

#include <omp.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <boost/random/mersenne_twister.hpp>
#include <boost/random/normal_distribution.hpp>
#include <stdexcept>

#include "sde_detail.hpp"

namespace osc {

namespace {

constexpr std::size_t kBlockPaths = 64;
constexpr std::size_t kWaveBlocks = 256;

bool near_integer(double r) { return std::abs(r - std::round(r)) <= 1e-9 * std::max(1.0, std::abs(r)); }

CovMatrix axpy(const CovMatrix& v, double h, const CovMatrix& d) {
  return {v.v_xx + h * d.v_xx, v.v_xp + h * d.v_xp, v.v_pp + h * d.v_pp};
}

void require_positive(const CovMatrix& v) {
  if (!(v.v_xx > 0.0 && v.det() > 0.0) || !std::isfinite(v.v_pp)) throw std::runtime_error("positivity lost");
}

CovMatrix rk4_cov(const CovMatrix& v, Side side, const ModelParams& p, double h) {
  require_positive(v);
  const CovMatrix k1 = riccati_rhs(v, side, p);
  const CovMatrix v2 = axpy(v, 0.5 * h, k1);
  require_positive(v2);
  const CovMatrix k2 = riccati_rhs(v2, side, p);
  const CovMatrix v3 = axpy(v, 0.5 * h, k2);
  require_positive(v3);
  const CovMatrix k3 = riccati_rhs(v3, side, p);
  const CovMatrix v4 = axpy(v, h, k3);
  require_positive(v4);
  const CovMatrix k4 = riccati_rhs(v4, side, p);
  const CovMatrix out{v.v_xx + h / 6.0 * (k1.v_xx + 2.0 * k2.v_xx + 2.0 * k3.v_xx + k4.v_xx),
                      v.v_xp + h / 6.0 * (k1.v_xp + 2.0 * k2.v_xp + 2.0 * k3.v_xp + k4.v_xp),
                      v.v_pp + h / 6.0 * (k1.v_pp + 2.0 * k2.v_pp + 2.0 * k3.v_pp + k4.v_pp)};
  require_positive(out);
  return out;
}

bool settled(const CovMatrix& a, const CovMatrix& b) {
  const double tol = 4.0 * std::numeric_limits<double>::epsilon();
  return std::abs(a.v_xx - b.v_xx) <= tol * std::abs(b.v_xx) && std::abs(a.v_xp - b.v_xp) <= tol * std::abs(b.v_pp) &&
         std::abs(a.v_pp - b.v_pp) <= tol * std::abs(b.v_pp);
}

}  // namespace

void validate(const SimConfig& sim, const ModelParams& params) {
  if (!(std::isfinite(sim.dt) && sim.dt > 0.0)) throw ValidationError("dt", "step nonpositive");
  if (!(std::isfinite(sim.t_final) && sim.t_final > 0.0)) throw ValidationError("t_final", "horizon nonpositive");
  if (sim.t_final < params.tau) throw ValidationError("t_final", "horizon shorter than the delay");
  if (sim.n_paths < 1) throw ValidationError("n_paths", "ensemble empty");
  if (sim.record_stride < 1) throw ValidationError("record_stride", "stride zero");
  if (sim.threads < 0) throw ValidationError("threads", "negative thread count");
  if (params.tau > 0.0 && !near_integer(params.tau / sim.dt))
    throw ValidationError("tau", "delay not a whole number of steps");
  if (sim.filter_v0 && !sim.filter_v0->positive_definite())
    throw ValidationError("filter_v0", "covariance not positive definite");
  if (sim.system_v0 && !sim.system_v0->positive_definite())
    throw ValidationError("system_v0", "covariance not positive definite");
}

namespace {

std::size_t whole_steps(double span, double dt) {
  const double r = span / dt;
  return static_cast<std::size_t>(near_integer(r) ? std::round(r) : std::ceil(r));
}

}  // namespace

std::size_t step_count(const SimConfig& sim) { return whole_steps(sim.t_final, sim.dt); }

std::size_t delay_steps(double tau, double dt) { return static_cast<std::size_t>(std::round(tau / dt)); }

std::uint64_t stream_seed(std::uint64_t master, std::uint64_t index) {
  // SplitMix64 over a Weyl sequence position.
  std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

RiccatiSeries integrate_riccati(const CovMatrix& v0, Side side, const ModelParams& params, double dt,
                                double t_final) {
  if (!v0.positive_definite()) throw ValidationError("v0", "covariance not positive definite");
  if (!(dt > 0.0) || !(t_final >= 0.0)) throw ValidationError("dt", "step nonpositive");
  const std::size_t n = whole_steps(t_final, dt);
  RiccatiSeries out;
  out.times.reserve(n + 1);
  out.values.reserve(n + 1);
  out.times.push_back(0.0);
  out.values.push_back(v0);
  CovMatrix v = v0;
  for (std::size_t i = 1; i <= n; ++i) {
    v = rk4_cov(v, side, params, dt);
    out.times.push_back(static_cast<double>(i) * dt);
    out.values.push_back(v);
  }
  return out;
}

// --- variance schedule -------------------------------------------------------

VarianceSchedule::VarianceSchedule(const ModelParams& params) {
  const SteadyVariances sv = steady_variances(params);
  filter_.push_back(sv.filter);
  system_.push_back(sv.system);
}

VarianceSchedule::VarianceSchedule(const ModelParams& params, const CovMatrix& filter0, const CovMatrix& system0,
                                   double dt, double t_final) {
  const double h = 0.5 * dt;
  const std::size_t n_half = 2 * whole_steps(t_final, dt) + 2;
  filter_.push_back(filter0);
  system_.push_back(system0);
  for (std::size_t j = 1; j <= n_half; ++j) {
    const CovMatrix f = rk4_cov(filter_.back(), Side::filter, params, h);
    const CovMatrix s = rk4_cov(system_.back(), Side::system, params, h);
    const bool done = settled(f, filter_.back()) && settled(s, system_.back());
    filter_.push_back(f);
    system_.push_back(s);
    if (done) break;
  }
}

// --- stepper -----------------------------------------------------------------

MeanStepper::MeanStepper(const ModelParams& params, double dt, const VarianceSchedule& schedule)
    : params_(params),
      dt_(dt),
      lag_(params.tau > 0.0 ? delay_steps(params.tau, dt) : 0),
      sqrt_nu_(std::sqrt(params.nu)),
      schedule_(&schedule) {
  table_.reserve(schedule.size());
  for (std::size_t j = 0; j < schedule.size(); ++j) table_.push_back(make_coeffs(j));
}

MeanStepper::Coeffs MeanStepper::make_coeffs(std::size_t j) const {
  const CovMatrix& v = schedule_->filter(j);
  const CovMatrix& r = schedule_->system(j);
  const auto& p = params_;
  const double w = 1.0 + p.d_omega_f;
  const double bf = 4.0 * p.alpha_f * p.eta_f;
  const double bfs = 4.0 * std::sqrt(p.alpha_f * p.alpha_s * p.eta_f * p.eta_s);
  const double gf = 2.0 * std::sqrt(p.eta_f * p.alpha_f);
  const double gs = 2.0 * std::sqrt(p.eta_s * p.alpha_s);
  return {-bf * v.v_xx, 1.0, -w * w - bf * v.v_xp, -p.k, bfs * v.v_xx, bfs * v.v_xp,
          gf * v.v_xx,  gf * v.v_xp, gs * r.v_xx, gs * r.v_xp};
}

std::array<double, 4> MeanStepper::drift(const std::array<double, 4>& z, double p_delayed, const Coeffs& c) const {
  return {c.f00 * z[0] + c.f01 * z[1] + c.c00 * z[2],
          c.f10 * z[0] + c.f11 * z[1] + c.c10 * z[2],
          z[3],
          -z[2] - params_.k * p_delayed};
}

PathState MeanStepper::start(const MeanPair& x0) const {
  PathState s;
  s.z = {x0.x_pi, x0.p_pi, x0.x_rho, x0.p_rho};
  // Before tau has elapsed the control holds its initial value.
  s.p_ring.assign(lag_ + 1, x0.p_pi);
  return s;
}

std::array<double, 2> MeanStepper::delayed(const PathState& s) const {
  const std::size_t m = lag_ + 1;
  // slots for n - lag and n - lag + 1; negative indices were never written
  return {s.p_ring[(s.n + 1) % m], s.p_ring[(s.n + 2) % m]};
}

void MeanStepper::step(PathState& s, double dw, double dw_cl) const {
  if (s.frozen) {
    ++s.n;
    return;
  }
  const double h = dt_;
  const Coeffs& c0 = coeffs(2 * s.n);
  const Coeffs& ch = coeffs(2 * s.n + 1);
  const Coeffs& c1 = coeffs(2 * s.n + 2);
  const double xi = dw + sqrt_nu_ * dw_cl;

  auto z = s.z;
  z[0] += 0.5 * c0.g_pi0 * xi;
  z[1] += 0.5 * c0.g_pi1 * xi;
  z[2] += 0.5 * c0.g_rho0 * dw;
  z[3] += 0.5 * c0.g_rho1 * dw;

  const bool lagged = lag_ > 0;
  const auto pd = lagged ? delayed(s) : std::array<double, 2>{};
  // control at t_n - tau, midpoint, t_n+1 - tau; undelayed uses the stage itself
  auto stage = [&](const std::array<double, 4>& y, double frac, const Coeffs& c) {
    return drift(y, lagged ? pd[0] + frac * (pd[1] - pd[0]) : y[1], c);
  };
  auto shift = [](const std::array<double, 4>& y, double a, const std::array<double, 4>& k) {
    return std::array<double, 4>{y[0] + a * k[0], y[1] + a * k[1], y[2] + a * k[2], y[3] + a * k[3]};
  };
  const auto k1 = stage(z, 0.0, c0);
  const auto k2 = stage(shift(z, 0.5 * h, k1), 0.5, ch);
  const auto k3 = stage(shift(z, 0.5 * h, k2), 0.5, ch);
  const auto k4 = stage(shift(z, h, k3), 1.0, c1);
  for (std::size_t i = 0; i < 4; ++i) z[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);

  z[0] += 0.5 * c1.g_pi0 * xi;
  z[1] += 0.5 * c1.g_pi1 * xi;
  z[2] += 0.5 * c1.g_rho0 * dw;
  z[3] += 0.5 * c1.g_rho1 * dw;

  s.z = z;
  ++s.n;
  if (lagged) s.p_ring[s.n % (lag_ + 1)] = z[1];
}

// --- ensemble ----------------------------------------------------------------

namespace detail {

std::vector<std::size_t> record_steps(std::size_t n_steps, std::size_t stride) {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i <= n_steps; i += stride) out.push_back(i);
  if (out.back() != n_steps) out.push_back(n_steps);
  return out;
}

VarianceSchedule make_schedule(const ModelParams& params, const SimConfig& sim) {
  if (sim.variance_mode == VarianceMode::analytic_steady) return VarianceSchedule(params);
  const SteadyVariances sv = steady_variances(params);
  return VarianceSchedule(params, sim.filter_v0.value_or(sv.filter), sim.system_v0.value_or(sv.system), sim.dt,
                          sim.t_final);
}

double reference_energy(const IdenticalCase& baseline, const SteadyVariances& sv) {
  const double e = baseline.energy();
  if (std::isfinite(e) && e > 0.0) return e;
  return 0.5 * (sv.system.v_xx + sv.system.v_pp);
}

double standard_error(double sum, double sum_sq, std::size_t n) {
  if (n < 2) return 0.0;
  const double nn = static_cast<double>(n);
  const double mean = sum / nn;
  const double var = std::max(0.0, (sum_sq - nn * mean * mean) / (nn - 1.0));
  return std::sqrt(var / nn);
}

}  // namespace detail

namespace {

// Layout of one record's sums: energy, energy^2, then the ten moments.
constexpr std::size_t kRecordWidth = 2 + kMomentCount;

struct BlockSums {
  std::vector<double> rec;
  double x = 0.0, x2 = 0.0, p = 0.0, p2 = 0.0;
  double dev_x = 0.0, dev_p = 0.0;
  std::size_t n_diverged = 0;
};

void run_block(const MeanStepper& stepper, const ModelParams& params, const SimConfig& sim, const MeanPair& x0,
               const std::vector<std::size_t>& records, double e_cap, std::size_t first, std::size_t last,
               BlockSums& out) {
  out.rec.assign(records.size() * kRecordWidth, 0.0);
  const std::size_t n_steps = records.back();
  const bool classical = params.nu > 0.0;
  for (std::size_t path = first; path < last; ++path) {
    boost::random::mt19937_64 rng(stream_seed(sim.seed, path));
    boost::random::normal_distribution<double> normal(0.0, std::sqrt(sim.dt));
    PathState s = stepper.start(x0);
    std::size_t r = 0;
    for (std::size_t n = 0;; ++n) {
      const auto& z = s.z;
      out.dev_x = std::max(out.dev_x, std::abs(z[0] - z[2]));
      out.dev_p = std::max(out.dev_p, std::abs(z[1] - z[3]));
      if (n == records[r]) {
        double* acc = &out.rec[r * kRecordWidth];
        const double e = 0.5 * (z[2] * z[2] + z[3] * z[3]);
        acc[0] += e;
        acc[1] += e * e;
        for (std::size_t m = 0; m < kMomentCount; ++m) acc[2 + m] += z[kMomentPairs[m][0]] * z[kMomentPairs[m][1]];
        ++r;
      }
      if (n == n_steps) break;
      const double dw = normal(rng);
      const double dw_cl = classical ? normal(rng) : 0.0;
      stepper.step(s, dw, dw_cl);
      const double e = 0.5 * (s.z[2] * s.z[2] + s.z[3] * s.z[3]);
      if (!s.frozen && !(e <= e_cap)) {
        s.frozen = true;
        ++out.n_diverged;
      }
    }
    out.x += s.z[2];
    out.x2 += s.z[2] * s.z[2];
    out.p += s.z[3];
    out.p2 += s.z[3] * s.z[3];
  }
}

}  // namespace

TrajectoryStats simulate_means(const ModelParams& params, const SimConfig& sim, const MeanPair& x0,
                               const IdenticalCase& baseline) {
  validate_plant(params);
  validate(sim, params);
  if (!x0.finite()) throw ValidationError("x0", "initial means not finite");

  const VarianceSchedule schedule = detail::make_schedule(params, sim);
  const MeanStepper stepper(params, sim.dt, schedule);
  const auto records = detail::record_steps(step_count(sim), sim.record_stride);
  const double e_cap = kDivergenceRatio * detail::reference_energy(baseline, steady_variances(params));

  const std::size_t n_blocks = (sim.n_paths + kBlockPaths - 1) / kBlockPaths;
  std::vector<double> total(records.size() * kRecordWidth, 0.0);
  BlockSums fin;
  std::vector<BlockSums> wave;
  for (std::size_t w0 = 0; w0 < n_blocks; w0 += kWaveBlocks) {
    const std::size_t nb = std::min(kWaveBlocks, n_blocks - w0);
    wave.assign(nb, BlockSums{});
    const int threads = sim.threads > 0 ? sim.threads : omp_get_max_threads();
#pragma omp parallel for schedule(dynamic) num_threads(threads)
    for (std::size_t b = 0; b < nb; ++b) {
      const std::size_t first = (w0 + b) * kBlockPaths;
      const std::size_t last = std::min(first + kBlockPaths, sim.n_paths);
      run_block(stepper, params, sim, x0, records, e_cap, first, last, wave[b]);
    }
    // Fixed-order merge keeps the sums independent of scheduling.
    for (const auto& bs : wave) {
      for (std::size_t i = 0; i < total.size(); ++i) total[i] += bs.rec[i];
      fin.x += bs.x;
      fin.x2 += bs.x2;
      fin.p += bs.p;
      fin.p2 += bs.p2;
      fin.dev_x = std::max(fin.dev_x, bs.dev_x);
      fin.dev_p = std::max(fin.dev_p, bs.dev_p);
      fin.n_diverged += bs.n_diverged;
    }
  }

  TrajectoryStats st;
  const double n = static_cast<double>(sim.n_paths);
  for (std::size_t r = 0; r < records.size(); ++r) {
    const double* acc = &total[r * kRecordWidth];
    const CovMatrix& vs = schedule.system(2 * records[r]);
    st.times.push_back(static_cast<double>(records[r]) * sim.dt);
    st.mean_energy.push_back(acc[0] / n + 0.5 * (vs.v_xx + vs.v_pp));
    st.std_error.push_back(detail::standard_error(acc[0], acc[1], sim.n_paths));
    MomentVector m;
    for (std::size_t i = 0; i < kMomentCount; ++i) m[i] = acc[2 + i] / n;
    st.second_moments.push_back(m);
  }
  st.mean_x_rho = fin.x / n;
  st.mean_p_rho = fin.p / n;
  st.se_x_rho = detail::standard_error(fin.x, fin.x2, sim.n_paths);
  st.se_p_rho = detail::standard_error(fin.p, fin.p2, sim.n_paths);
  st.max_dev_x = fin.dev_x;
  st.max_dev_p = fin.dev_p;
  st.n_diverged = fin.n_diverged;
  st.diverged = fin.n_diverged > 0;
  return st;
}

TrajectoryStats simulate_means(const ModelParams& params, const SimConfig& sim, const MeanPair& x0) {
  return simulate_means(params, sim, x0, IdenticalCase::from_filter(params));
}

NumericClassification classify_numeric(const ModelParams& params, const SimConfig& sim,
                                       const IdenticalCase& baseline) {
  SimConfig steady = sim;
  steady.variance_mode = VarianceMode::analytic_steady;
  steady.record_stride = step_count(sim);
  const TrajectoryStats st = simulate_means(params, steady, MeanPair{}, baseline);
  NumericClassification out;
  out.e_inf_0 = detail::reference_energy(baseline, steady_variances(params));
  out.final_ratio = st.mean_energy.back() / out.e_inf_0;
  out.diverged = st.diverged;
  out.stable = !st.diverged && out.final_ratio <= 100.0;
  return out;
}

NumericClassification classify_numeric(const ModelParams& params, const SimConfig& sim) {
  return classify_numeric(params, sim, IdenticalCase::from_filter(params));
}

}  // namespace osc
