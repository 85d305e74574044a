#include "bridge.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "errors.hpp"
#include "parallel.hpp"

namespace levybridge {

using numerics::kNegInf;

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double c : v) s += c * c;
  return std::sqrt(s);
}

// Orthonormal vectors completing `axis` (unit length) to a basis of R^n.
std::vector<std::vector<double>> complement_basis(const std::vector<double>& axis) {
  const std::size_t n = axis.size();
  std::vector<std::vector<double>> basis{axis};
  for (std::size_t e = 0; e < n && basis.size() < n; ++e) {
    std::vector<double> v(n, 0.0);
    v[e] = 1.0;
    for (const auto& b : basis) {
      double dot = 0.0;
      for (std::size_t i = 0; i < n; ++i) dot += v[i] * b[i];
      for (std::size_t i = 0; i < n; ++i) v[i] -= dot * b[i];
    }
    const double len = norm(v);
    if (len < 1e-6) continue;
    for (double& c : v) c /= len;
    basis.push_back(std::move(v));
  }
  basis.erase(basis.begin());
  return basis;
}

constexpr int kBurnIn = 1000;
constexpr long kMaxConsecutiveRejections = 20000;
constexpr double kRetuneAcceptance = 0.05;

// One conditional jump: density proportional to exp(-f(|y|) + F_{k-1}(|z - y|)).
// The Gaussian proposal has standard coordinates (u, w) along the target and
// across it; the log ratio target/proposal depends on u and |w| only.
class StepSampler {
public:
  StepSampler(const ConvolutionTable& table, std::span<const double> target, int remaining)
      : table_(table), fun_(table.fun()), target_(target.begin(), target.end()), remaining_(remaining) {
    const std::size_t n = target_.size();
    const double len = norm(target_);
    axis_.assign(n, 0.0);
    if (len > 0.0) {
      for (std::size_t i = 0; i < n; ++i) axis_[i] = target_[i] / len;
    } else {
      axis_[0] = 1.0;
    }
    ortho_ = complement_basis(axis_);
    center_.resize(n);
    for (std::size_t i = 0; i < n; ++i) center_[i] = target_[i] / remaining_;

    const double v = len / remaining_;
    double curvature = fun_.derivative_unchecked(v, 2);
    if (!(curvature > 0.0) || !std::isfinite(curvature) || v <= fun_.convexity_threshold()) {
      curvature = numeric_curvature(v);
    }
    sigma_along_ = std::sqrt(1.5 / curvature);
    sigma_across_ = std::sqrt(1.5 * (fun_.alpha() - 1.0) / curvature);
  }

  std::vector<double> point(double u, std::span<const double> w) const {
    std::vector<double> y = center_;
    for (std::size_t i = 0; i < y.size(); ++i) {
      y[i] += sigma_along_ * u * axis_[i];
      for (std::size_t k = 0; k < w.size(); ++k) y[i] += sigma_across_ * w[k] * ortho_[k][i];
    }
    return y;
  }

  double log_target(std::span<const double> y) const {
    std::vector<double> rest(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) rest[i] = target_[i] - y[i];
    const double tail = table_.log_density(remaining_ - 1, norm(rest));
    if (tail == kNegInf) return kNegInf;
    return -fun_.f(norm(y)) + tail;
  }

  /// Log ratio target / proposal at standard coordinates (u, w), up to a constant.
  double log_ratio(double u, std::span<const double> w) const {
    double w2 = 0.0;
    for (double c : w) w2 += c * c;
    return log_target(point(u, w)) + 0.5 * (u * u + w2);
  }

  struct Envelope {
    double log_bound;
    /// Acceptance rate of rejection sampling under this bound, estimated on the scan grid.
    double acceptance;
  };

  /// Multiplies both proposal scales.
  void widen(double factor) {
    sigma_along_ *= factor;
    sigma_across_ *= factor;
  }

  /// Upper bound of the log ratio from a grid scan refined by golden sections.
  Envelope certify() const {
    const bool axial = target_.size() > 1;
    const double du = 0.5, ds = 0.5, extent = 12.0;
    std::vector<double> w(target_.size() - 1, 0.0);
    auto at = [&](double u, double s) {
      if (axial) w[0] = s;
      return log_ratio(u, w);
    };
    const int nu = static_cast<int>(std::lround(2.0 * extent / du)) + 1;
    const int ns = axial ? static_cast<int>(std::lround(extent / ds)) + 1 : 1;
    std::vector<double> grid(static_cast<std::size_t>(nu) * ns);
    auto cell = [&](int i, int j) -> double& { return grid[static_cast<std::size_t>(i) * ns + j]; };
    double best = kNegInf;
    for (int i = 0; i < nu; ++i) {
      for (int j = 0; j < ns; ++j) {
        cell(i, j) = at(-extent + i * du, j * ds);
        best = std::max(best, cell(i, j));
      }
    }
    if (best == kNegInf) throw NumericFailure("conditional jump density vanishes on the proposal range");
    // The target can be multimodal (a cusp at the origin and one at the endpoint), so every
    // local maximum of the scan is refined, not only the largest.
    for (int i = 0; i < nu; ++i) {
      for (int j = 0; j < ns; ++j) {
        const double v = cell(i, j);
        if (v == kNegInf) continue;
        bool peak = true;
        for (int di = -1; di <= 1 && peak; ++di) {
          for (int dj = -1; dj <= 1 && peak; ++dj) {
            const int a = i + di, b = j + dj;
            if ((di || dj) && a >= 0 && a < nu && b >= 0 && b < ns && cell(a, b) > v) peak = false;
          }
        }
        if (!peak) continue;
        double bu = -extent + i * du, bs = j * ds;
        for (int round = 0; round < (axial ? 2 : 1); ++round) {
          bu = golden_max([&](double u) { return at(u, bs); }, bu - du, bu + du);
          if (axial) bs = golden_max([&](double s) { return at(bu, s); }, std::max(0.0, bs - ds), bs + ds);
          best = std::max(best, at(bu, bs));
        }
      }
    }
    const double bound = best + 1e-3;
    const std::size_t across = target_.size() - 1;
    double acceptance = 0.0;
    for (int i = 0; i < nu; ++i) {
      const double u = -extent + i * du;
      for (int j = 0; j < ns; ++j) {
        const double s = j * ds;
        // Probability weight of the cell under the standard proposal; |w| has a chi law.
        double weight = std::exp(-0.5 * u * u) * du / std::sqrt(2.0 * std::numbers::pi);
        if (across == 1) weight *= (j == 0 ? 0.5 : 1.0) * 2.0 * std::exp(-0.5 * s * s) * ds / std::sqrt(2.0 * std::numbers::pi);
        if (across == 2) weight *= s * std::exp(-0.5 * s * s) * ds;
        acceptance += weight * std::exp(cell(i, j) - bound);
      }
    }
    return {bound, acceptance};
  }

  std::size_t across_dim() const noexcept { return ortho_.size(); }

private:
  template <class F>
  static double golden_max(F&& f, double lo, double hi) {
    constexpr double inv_phi = 0.6180339887498949;
    double a = hi - inv_phi * (hi - lo), b = lo + inv_phi * (hi - lo);
    double fa = f(a), fb = f(b);
    for (int it = 0; it < 30; ++it) {
      if (fa < fb) {
        lo = a;
        a = b;
        fa = fb;
        b = lo + inv_phi * (hi - lo);
        fb = f(b);
      } else {
        hi = b;
        b = a;
        fb = fa;
        a = hi - inv_phi * (hi - lo);
        fa = f(a);
      }
    }
    return fa > fb ? a : b;
  }

  double numeric_curvature(double v) const {
    const double h = 1e-2 * (1.0 + v);
    std::vector<double> y = center_;
    auto along = [&](double d) {
      for (std::size_t i = 0; i < y.size(); ++i) y[i] = center_[i] + d * axis_[i];
      return log_target(y);
    };
    const double k = -(along(h) - 2.0 * along(0.0) + along(-h)) / (h * h);
    return k > 0.0 && std::isfinite(k) ? k : 1.0;
  }

  const ConvolutionTable& table_;
  const RVFunction& fun_;
  std::vector<double> target_;
  int remaining_;
  std::vector<double> axis_;
  std::vector<std::vector<double>> ortho_;
  std::vector<double> center_;
  double sigma_along_ = 1.0;
  double sigma_across_ = 1.0;
};

}  // namespace

double BridgeConfig::endpoint_norm() const { return norm(endpoint); }

void BridgeConfig::validate() const {
  if (dim < 1 || dim > 3) throw std::invalid_argument("dimension must be 1, 2 or 3");
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw std::invalid_argument("epsilon must be positive");
  if (!(horizon > 0.0) || !std::isfinite(horizon)) throw std::invalid_argument("horizon must be positive");
  if (r_eps) {
    if (!(*r_eps > 0.0) || !std::isfinite(*r_eps)) throw std::invalid_argument("r_eps must be positive");
  } else if (!(rho < 1.0) || !std::isfinite(rho)) {
    throw std::invalid_argument("rho must be below 1");
  }
  if (static_cast<int>(endpoint.size()) != dim) {
    throw std::invalid_argument("endpoint has " + std::to_string(endpoint.size()) +
                                " components, expected " + std::to_string(dim));
  }
  if (!(endpoint_norm() > 0.0) || !std::isfinite(endpoint_norm())) {
    throw std::invalid_argument("endpoint must be nonzero and finite");
  }
}

BridgeModel::BridgeModel(BridgeConfig config, const BridgeNumerics& numerics)
    : config_(std::move(config)), numerics_(numerics) {
  config_.validate();
  const double radius = config_.scaled_radius();
  if (!(radius > 1.0)) throw DomainError("|x| / eps must exceed 1", 1.0);
  window_exponent_ = std::log(config_.total_time()) / std::log(radius);
  if (!(window_exponent_ < 1.0)) {
    throw DomainError("r_eps T must stay below (|x| / eps)^gamma for some gamma < 1", 1.0);
  }
  table_ = std::make_shared<ConvolutionTable>(
      config_.fun, config_.dim, 1, ConvolutionOptions{radius, numerics.spacing, numerics.workers});
  marginal_ = std::make_unique<MarginalDensity>(
      table_, config_.total_time(),
      MarginalOptions{.r_max = radius, .m_cap = numerics.m_cap, .spacing = numerics.spacing,
                      .workers = numerics.workers});
  log_endpoint_density_ = marginal_->eval(radius).log_density;
  if (log_endpoint_density_ == kNegInf) throw NumericFailure("endpoint density underflows");

  count_cdf_.resize(static_cast<std::size_t>(m_cap()));
  double total = 0.0;
  for (int m = 1; m <= m_cap(); ++m) {
    total += std::exp(count_log_pmf(m));
    count_cdf_[static_cast<std::size_t>(m - 1)] = total;
  }
}

double BridgeModel::count_log_pmf(int m) const {
  if (m < 1) throw std::invalid_argument("jump count must be at least 1");
  if (m > m_cap()) return kNegInf;
  return marginal_->log_term(m, config_.scaled_radius()) - log_endpoint_density_;
}

std::vector<double> BridgeModel::draw_jump(std::span<const double> target, int remaining,
                                           RandomStream& rng, bool& used_fallback) const {
  StepSampler step(*table_, target, remaining);
  auto envelope = step.certify();
  if (envelope.acceptance < kRetuneAcceptance) {
    // The curvature at the center misjudges the width of flat or multimodal targets.
    double scale = 1.0, best_scale = 1.0;
    for (double factor : {2.0, 4.0, 8.0, 0.5, 0.25}) {
      step.widen(factor / scale);
      scale = factor;
      const auto candidate = step.certify();
      if (candidate.acceptance > envelope.acceptance) {
        envelope = candidate;
        best_scale = factor;
      }
    }
    step.widen(best_scale / scale);
  }
  const double bound = envelope.log_bound;
  std::vector<double> w(step.across_dim());
  auto propose = [&](double& u) {
    u = rng.normal();
    for (double& c : w) c = rng.normal();
  };
  for (long tries = 0; tries < kMaxConsecutiveRejections; ++tries) {
    double u;
    propose(u);
    const double r = step.log_ratio(u, w);
    // A ratio above the certified bound means the envelope is invalid here.
    if (r > bound) break;
    if (std::log(rng.uniform()) < r - bound) return step.point(u, w);
  }
  // Independence Metropolis chain with the same proposal, started at the center.
  used_fallback = true;
  double u_state = 0.0;
  std::vector<double> w_state(w.size(), 0.0);
  double r_state = step.log_ratio(0.0, w_state);
  for (int it = 0; it < kBurnIn; ++it) {
    double u;
    propose(u);
    const double r = step.log_ratio(u, w);
    if (r_state == kNegInf || std::log(rng.uniform()) < r - r_state) {
      u_state = u;
      w_state = w;
      r_state = r;
    }
  }
  return step.point(u_state, w_state);
}

BridgePath BridgeModel::sample(std::uint64_t index) const {
  BridgePath path;
  path.sample = index;
  RandomStream rng(config_.seed, index, 0);
  const double u = rng.uniform() * count_cdf_.back();
  const auto it = std::lower_bound(count_cdf_.begin(), count_cdf_.end(), u);
  const int count = static_cast<int>(std::min<std::ptrdiff_t>(it - count_cdf_.begin(), m_cap() - 1)) + 1;

  path.jump_times.resize(static_cast<std::size_t>(count));
  for (double& t : path.jump_times) t = rng.uniform() * config_.horizon;
  std::sort(path.jump_times.begin(), path.jump_times.end());

  std::vector<double> remaining(config_.endpoint.size());
  for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] = config_.endpoint[i] / config_.epsilon;
  bool fallback = false;
  for (int j = 0; j + 1 < count; ++j) {
    RandomStream jump_rng(config_.seed, index, static_cast<std::uint32_t>(j + 1));
    auto jump = draw_jump(remaining, count - j, jump_rng, fallback);
    for (std::size_t i = 0; i < remaining.size(); ++i) remaining[i] -= jump[i];
    path.jumps.push_back(std::move(jump));
  }
  path.jumps.push_back(remaining);
  if (fallback) path.method_flag = "metropolis";
  return path;
}

std::vector<BridgePath> BridgeModel::sample_many(std::uint64_t first, std::size_t count, int workers) const {
  std::vector<BridgePath> paths(count);
  parallel_for(count, workers, [&](std::size_t i) { paths[i] = sample(first + i); });
  return paths;
}

const BridgeModel::Slice& BridgeModel::slice(double t) {
  if (!(t > 0.0) || !(t < config_.horizon)) throw std::invalid_argument("time must lie in (0, T)");
  for (const auto& [time, s] : slices_) {
    if (time == t) return s;
  }
  const double scale = config_.time_scale();
  const MarginalOptions opts{.r_max = config_.scaled_radius(), .spacing = numerics_.spacing,
                             .workers = numerics_.workers};
  Slice s{std::make_unique<MarginalDensity>(table_, scale * t, opts),
          std::make_unique<MarginalDensity>(table_, scale * (config_.horizon - t), opts)};
  slices_.emplace_back(t, std::move(s));
  return slices_.back().second;
}

double BridgeModel::marginal_logdensity(double t, std::span<const double> y) {
  if (static_cast<int>(y.size()) != config_.dim) throw std::invalid_argument("point has the wrong dimension");
  const Slice& s = slice(t);
  std::vector<double> rest(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) rest[i] = config_.endpoint[i] - y[i];
  const double eps = config_.epsilon;
  return -config_.dim * std::log(eps) + s.before->eval(norm(y) / eps).log_density +
         s.after->eval(norm(rest) / eps).log_density - log_endpoint_density_;
}

BridgeAtoms BridgeModel::atoms(double t) {
  const Slice& s = slice(t);
  const double radius = config_.scaled_radius();
  return {s.before->log_atom() + s.after->eval(radius).log_density - log_endpoint_density_,
          s.after->log_atom() + s.before->eval(radius).log_density - log_endpoint_density_};
}

SaddleBridgeDensity saddle_bridge_logdensity(const BridgeConfig& config, double t, std::span<const double> y) {
  config.validate();
  if (!(t > 0.0) || !(t < config.horizon)) throw std::invalid_argument("time must lie in (0, T)");
  if (static_cast<int>(y.size()) != config.dim) throw std::invalid_argument("point has the wrong dimension");
  std::vector<double> rest(y.size());
  for (std::size_t i = 0; i < y.size(); ++i) rest[i] = config.endpoint[i] - y[i];
  const double to_start = norm(y), to_end = norm(rest), whole = config.endpoint_norm();
  if (!(to_start > 0.0) || !(to_end > 0.0)) {
    throw std::invalid_argument("the analytic bridge density needs y away from 0 and x");
  }
  const GSolver auxiliary({config.fun, config.dim, Variant::GZero, {}});
  const double mass = jump_measure_mass(config.fun, config.dim);
  const double eps = config.epsilon, scale = config.time_scale();
  const auto before = saddle_log_marginal(auxiliary, mass, to_start / eps, scale * t);
  const auto after = saddle_log_marginal(auxiliary, mass, to_end / eps, scale * (config.horizon - t));
  const auto total = saddle_log_marginal(auxiliary, mass, whole / eps, scale * config.horizon);
  // The -a t parts of the three terms cancel exactly.
  const double rate_sum = to_start * before.rate + to_end * after.rate - whole * total.rate;
  const double remainder = -config.dim * std::log(eps) + before.remainder + after.remainder - total.remainder;
  return {rate_sum / eps + remainder, rate_sum, remainder};
}

}  // namespace levybridge
