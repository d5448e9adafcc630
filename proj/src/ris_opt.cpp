#include "rissim/ris_opt.hpp"

#include <cmath>
#include <numbers>

namespace rissim {

namespace {

struct Workspace {
  std::vector<cd> a;  // K x N combined channel of one antenna
};

double scale_of(const RateModel& model) {
  return model.power / (model.n * model.upsilon * model.noise_var);
}

void check_dims(const CVector& phi, const RateModel& model) {
  if (static_cast<int>(model.h_hat.dim(3)) != model.n)
    throw DimensionError("rate model subcarrier count mismatch");
  if (phi.size() != static_cast<Eigen::Index>(model.h_hat.dim(2)))
    throw DimensionError("phase vector length must be R+1");
  if (model.gamma.rows() != static_cast<Eigen::Index>(model.h_hat.dim(0)) ||
      model.gamma.cols() != model.n)
    throw DimensionError("gamma must be K x N");
}

/// a[k][n] = gamma_k(n) sum_r h[k][m][r][n] phi_r for one antenna m.
void combine(const CVector& phi, const RateModel& model, std::size_t m, std::vector<cd>& a) {
  const std::size_t K = model.h_hat.dim(0), P = model.h_hat.dim(2), N = model.h_hat.dim(3);
  a.assign(K * N, cd{0.0, 0.0});
  for (std::size_t k = 0; k < K; ++k) {
    cd* dst = a.data() + k * N;
    for (std::size_t r = 0; r < P; ++r) {
      const cd w = phi(static_cast<Eigen::Index>(r));
      auto h = model.h_hat.row(k, m, r);
      for (std::size_t n = 0; n < N; ++n) dst[n] += h[n] * w;
    }
    for (std::size_t n = 0; n < N; ++n) dst[n] *= model.gamma(k, n);
  }
}

double objective(const CVector& phi, const RateModel& model, Workspace& ws) {
  const std::size_t K = model.h_hat.dim(0), M = model.h_hat.dim(1), N = model.h_hat.dim(3);
  const double c = scale_of(model);
  double f2 = 0.0;
  for (std::size_t m = 0; m < M; ++m) {
    combine(phi, model, m, ws.a);
    for (std::size_t n = 0; n < N; ++n) {
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += std::norm(ws.a[k * N + n]);
      f2 += std::log1p(c * s);
    }
  }
  return f2;
}

}  // namespace

RateModel RateModel::from_cfr(Tensor4 h_hat, double power, double noise_var, double upsilon,
                              int l_cp) {
  RateModel model;
  model.n = static_cast<int>(h_hat.dim(3));
  model.gamma = CMatrix::Ones(static_cast<Eigen::Index>(h_hat.dim(0)), model.n);
  model.h_hat = std::move(h_hat);
  model.power = power;
  model.noise_var = noise_var;
  model.upsilon = upsilon;
  model.l_cp = l_cp;
  return model;
}

void PgmParams::validate() const {
  if (!(mu0 > 0.0)) throw ConfigError("constraint violated: mu0 > 0");
  if (!(rho > 0.0 && rho < 1.0)) throw ConfigError("constraint violated: 0 < rho < 1");
  if (!(delta_phi > 0.0)) throw ConfigError("constraint violated: delta_phi > 0");
  if (max_iters < 1) throw ConfigError("constraint violated: max_iters >= 1");
  if (!(tol >= 0.0)) throw ConfigError("constraint violated: tol >= 0");
}

RateValue achievable_rate(const RisPhases& phi, const RateModel& model) {
  check_dims(phi.phi_d, model);
  Workspace ws;
  const double f2 = objective(phi.phi_d, model, ws);
  return {f2 / std::numbers::ln2 / (model.n + model.l_cp), f2};
}

CVector rate_gradient(const RisPhases& phi, const RateModel& model) {
  check_dims(phi.phi_d, model);
  const std::size_t K = model.h_hat.dim(0), M = model.h_hat.dim(1), P = model.h_hat.dim(2);
  const std::size_t N = model.h_hat.dim(3);
  const double c = scale_of(model);
  CVector grad = CVector::Zero(static_cast<Eigen::Index>(P) - 1);
  std::vector<cd> a;
  std::vector<cd> w(K * N);
  for (std::size_t m = 0; m < M; ++m) {
    combine(phi.phi_d, model, m, a);
    for (std::size_t n = 0; n < N; ++n) {
      double s = 0.0;
      for (std::size_t k = 0; k < K; ++k) s += std::norm(a[k * N + n]);
      const double inv_a = c / (1.0 + c * s);
      // a already carries one gamma factor; the second one completes |gamma|^2
      for (std::size_t k = 0; k < K; ++k)
        w[k * N + n] = inv_a * std::conj(model.gamma(k, n)) * a[k * N + n];
    }
    for (std::size_t r = 1; r < P; ++r) {
      cd acc{0.0, 0.0};
      for (std::size_t k = 0; k < K; ++k) {
        auto h = model.h_hat.row(k, m, r);
        for (std::size_t n = 0; n < N; ++n) acc += w[k * N + n] * std::conj(h[n]);
      }
      grad(static_cast<Eigen::Index>(r) - 1) += acc;
    }
  }
  return grad;
}

CVector project_unit_modulus(const CVector& phi_raw) {
  CVector out(phi_raw.size());
  for (Eigen::Index i = 0; i < phi_raw.size(); ++i) {
    const double mag = std::abs(phi_raw(i));
    out(i) = mag > 0.0 ? phi_raw(i) / mag : cd{1.0, 0.0};
  }
  if (out.size() > 0) out(0) = 1.0;
  return out;
}

RisPhases all_ones_phases(int r) { return {CVector::Ones(r + 1)}; }

PgmResult pgm_optimize(const RateModel& model, const PgmParams& params, const RisPhases& init) {
  params.validate();
  check_dims(init.phi_d, model);
  Workspace ws;
  PgmResult res;
  CVector phi = project_unit_modulus(init.phi_d);
  double f = objective(phi, model, ws);
  res.trace.push_back(f);
  const Eigen::Index R = phi.size() - 1;

  for (int it = 0; it < params.max_iters; ++it) {
    res.iterations = it + 1;
    const CVector g = rate_gradient({phi}, model);
    if (R == 0 || g.norm() == 0.0) break;
    bool accepted = false;
    CVector cand;
    double fc = 0.0, step = 0.0;
    double mu = params.mu0;
    for (int kt = 0; kt <= params.max_backtracks; ++kt, mu *= params.rho) {
      CVector raw = phi;
      raw.tail(R) += mu * g;
      cand = project_unit_modulus(raw);
      fc = objective(cand, model, ws);
      step = (cand - phi).squaredNorm();
      if (fc - f >= params.delta_phi * step) {
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      res.line_search_exhausted = true;
      break;
    }
    phi = cand;
    f = fc;
    res.trace.push_back(f);
    if (std::sqrt(step) < params.tol) break;
  }
  res.phases.phi_d = phi;
  return res;
}

RisPhases grid_search(const RateModel& model, int levels) {
  if (levels < 2) throw RangeError("grid search needs at least 2 levels");
  const int R = static_cast<int>(model.h_hat.dim(2)) - 1;
  const double budget = std::pow(static_cast<double>(levels), R);
  if (budget > 1e7)
    throw RangeError("grid search needs " + std::to_string(levels) + "^" + std::to_string(R) +
                     " evaluations, over the budget of 1e7");
  std::vector<cd> alphabet(levels);
  for (int i = 0; i < levels; ++i) {
    const double a = 2.0 * std::numbers::pi * i / levels;
    alphabet[i] = {std::cos(a), std::sin(a)};
  }
  // exact unit for i = 0 so the coarse grid is a subset of the fine one
  alphabet[0] = {1.0, 0.0};
  Workspace ws;
  std::vector<int> idx(R, 0);
  CVector phi = CVector::Ones(R + 1);
  CVector best = phi;
  double best_f = -1.0;
  const long long total = static_cast<long long>(budget + 0.5);
  for (long long c = 0; c < total; ++c) {
    for (int r = 0; r < R; ++r) phi(r + 1) = alphabet[idx[r]];
    const double f = objective(phi, model, ws);
    if (f > best_f) {
      best_f = f;
      best = phi;
    }
    for (int r = R - 1; r >= 0; --r) {
      if (++idx[r] < levels) break;
      idx[r] = 0;
    }
  }
  return {best};
}

}  // namespace rissim
