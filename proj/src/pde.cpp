#include "dualvote/pde.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "dualvote/errors.hpp"
#include "dualvote/stats.hpp"

namespace dualvote {

namespace {

constexpr double kRangeSlack = 1e-8;

std::size_t cells(double lo, double hi, double h) {
  require(h > 0.0 && hi > lo, ErrorKind::DomainError, "grid needs h > 0 and hi > lo");
  return static_cast<std::size_t>(std::llround((hi - lo) / h));
}

// one explicit Euler step; returns false on range escape
bool step(const GridField& in, GridField& out, double dt, double D, const std::vector<double>& react) {
  const std::size_t nx = in.nx, ny = in.ny;
  const double lam = dt * D / (in.h * in.h);
  const bool periodic = in.boundary == Boundary::Periodic;
  const double* u = in.values.data();
  double* v = out.values.data();
  const std::size_t deg = react.size();
  double lo = 0.0, hi = 1.0;
  auto reaction = [&](double x) {
    double acc = 0.0;
    for (std::size_t k = deg; k-- > 0;) acc = acc * x + react[k];
    return acc;
  };
  if (in.dimension == 1) {
    for (std::size_t i = 0; i < nx; ++i) {
      const double c = u[i];
      const double l = i > 0 ? u[i - 1] : (periodic ? u[nx - 1] : c);
      const double r = i + 1 < nx ? u[i + 1] : (periodic ? u[0] : c);
      const double nv = c + lam * (l + r - 2.0 * c) + reaction(c);
      v[i] = nv;
      lo = std::min(lo, nv);
      hi = std::max(hi, nv);
    }
  } else {
    for (std::size_t j = 0; j < ny; ++j) {
      const double* row = u + j * nx;
      const double* up = j + 1 < ny ? row + nx : (periodic ? u : row);
      const double* dn = j > 0 ? row - nx : (periodic ? u + (ny - 1) * nx : row);
      double* dst = v + j * nx;
      for (std::size_t i = 0; i < nx; ++i) {
        const double c = row[i];
        const double l = i > 0 ? row[i - 1] : (periodic ? row[nx - 1] : c);
        const double r = i + 1 < nx ? row[i + 1] : (periodic ? row[0] : c);
        const double nv = c + lam * (l + r + up[i] + dn[i] - 4.0 * c) + reaction(c);
        dst[i] = nv;
        lo = std::min(lo, nv);
        hi = std::max(hi, nv);
      }
    }
  }
  return lo >= -kRangeSlack && hi <= 1.0 + kRangeSlack;
}

}  // namespace

GridField GridField::line(double lo, double hi, double h, Boundary b) {
  GridField f;
  f.dimension = 1;
  f.nx = cells(lo, hi, h);
  f.h = (hi - lo) / static_cast<double>(f.nx);
  f.x0 = lo + 0.5 * f.h;
  f.boundary = b;
  f.values.assign(f.nx, 0.0);
  return f;
}

GridField GridField::square(double lo, double hi, double h, Boundary b) {
  GridField f;
  f.dimension = 2;
  f.nx = f.ny = cells(lo, hi, h);
  f.h = (hi - lo) / static_cast<double>(f.nx);
  f.x0 = f.y0 = lo + 0.5 * f.h;
  f.boundary = b;
  f.values.assign(f.nx * f.ny, 0.0);
  return f;
}

double GridField::interpolate(double px, double py) const {
  auto locate = [this](double p, double origin, std::size_t n, std::size_t& i, double& w) {
    const double s = (p - origin) / h;
    if (s <= 0.0 || n == 1) {
      i = 0;
      w = 0.0;
    } else if (s >= static_cast<double>(n - 1)) {
      i = n - 2;
      w = 1.0;
    } else {
      i = static_cast<std::size_t>(s);
      w = s - static_cast<double>(i);
    }
  };
  std::size_t i, j;
  double wx, wy;
  locate(px, x0, nx, i, wx);
  if (dimension == 1) return nx == 1 ? values[0] : (1.0 - wx) * values[i] + wx * values[i + 1];
  locate(py, y0, ny, j, wy);
  const double a = (1.0 - wx) * at(i, j) + wx * at(i + 1, j);
  const double b = (1.0 - wx) * at(i, j + 1) + wx * at(i + 1, j + 1);
  return (1.0 - wy) * a + wy * b;
}

void GridField::fill(const std::function<double(double, double)>& f) {
  for (std::size_t j = 0; j < ny; ++j)
    for (std::size_t i = 0; i < nx; ++i) at(i, j) = f(x(i), dimension == 2 ? y(j) : 0.0);
}

double max_abs_slope(const DPoly& phi) {
  const DPoly d = phi.derivative();
  double m = 0.0;
  for (int k = 0; k <= 10000; ++k) m = std::max(m, std::abs(d(k / 10000.0)));
  return m;
}

double stable_dt(const RdeProblem& p, double safety) {
  const double diff = p.h * p.h / (2.0 * p.dimension * p.diffusion);
  const double slope = p.reaction_scale() * max_abs_slope(p.phi);
  const double react = slope > 0.0 ? 0.5 / slope : std::numeric_limits<double>::infinity();
  return safety * std::min(diff, react);
}

void check_stability(const RdeProblem& p) {
  require(p.diffusion > 0.0 && p.h > 0.0 && p.dt > 0.0, ErrorKind::StabilityViolation,
          "diffusion, h and dt must be positive");
  require(p.dimension == 1 || p.dimension == 2, ErrorKind::DomainError, "dimension must be 1 or 2");
  const double diff_limit = p.h * p.h / (2.0 * p.dimension * p.diffusion);
  if (p.dt > diff_limit * (1.0 + 1e-12))
    raise(ErrorKind::StabilityViolation,
          "dt=" + std::to_string(p.dt) + " exceeds h^2/(2 dim D)=" + std::to_string(diff_limit));
  const double r = p.dt * p.reaction_scale() * max_abs_slope(p.phi);
  if (r > 0.5 * (1.0 + 1e-12))
    raise(ErrorKind::StabilityViolation, "dt * eps^-2 * max|phi'| = " + std::to_string(r) + " exceeds 1/2");
}

Trajectory solve(const RdeProblem& problem, double horizon, const std::vector<double>& sample_times) {
  check_stability(problem);
  require(horizon >= 0.0, ErrorKind::DomainError, "horizon must be >= 0");
  const GridField& init = problem.init;
  require(init.dimension == problem.dimension && !init.values.empty() &&
              init.values.size() == init.nx * init.ny && std::abs(init.h - problem.h) <= 1e-12 * problem.h,
          ErrorKind::DomainError, "initial field does not match the problem grid");
  for (double v : init.values)
    if (v < -kRangeSlack || v > 1.0 + kRangeSlack) raise(ErrorKind::RangeEscape, "initial data outside [0,1]");

  std::vector<double> targets;
  for (double t : sample_times)
    if (t > 0.0 && t < horizon) targets.push_back(t);
  std::sort(targets.begin(), targets.end());
  targets.erase(std::unique(targets.begin(), targets.end()), targets.end());
  targets.push_back(horizon);

  Trajectory traj;
  traj.times.push_back(0.0);
  traj.fields.push_back(init);
  GridField cur = init, nxt = init;
  double t = 0.0;
  const double scale = problem.reaction_scale();
  for (double target : targets) {
    const double seg = target - t;
    if (seg > 0.0) {
      const auto n = static_cast<std::size_t>(std::ceil(seg / problem.dt - 1e-9));
      const double dt = seg / static_cast<double>(n);
      std::vector<double> react = problem.phi.coeffs();
      for (double& c : react) c *= dt * scale;
      for (std::size_t k = 0; k < n; ++k) {
        if (!step(cur, nxt, dt, problem.diffusion, react))
          raise(ErrorKind::RangeEscape, "solution left [0,1] near t=" + std::to_string(t + (k + 1) * dt));
        std::swap(cur, nxt);
      }
    }
    t = target;
    if (traj.times.back() != target) {
      traj.times.push_back(target);
      traj.fields.push_back(cur);
    }
  }
  return traj;
}

GridField solve_final(const RdeProblem& problem, double horizon) {
  return std::move(solve(problem, horizon).fields.back());
}

double level_crossing(const GridField& f, double level, std::size_t row) {
  require(row < f.ny, ErrorKind::DomainError, "row outside grid");
  for (std::size_t i = 0; i + 1 < f.nx; ++i) {
    const double a = f.at(i, row) - level;
    const double b = f.at(i + 1, row) - level;
    if (a == 0.0) return f.x(i);
    if ((a < 0.0) != (b < 0.0) && b != 0.0) return f.x(i) + f.h * a / (a - b);
    if (b == 0.0) return f.x(i + 1);
  }
  raise(ErrorKind::FrontLost, "no crossing of level " + std::to_string(level));
}

FrontTrack wave_speed(const RdeProblem& problem, double horizon, double level, std::size_t n_samples) {
  require(problem.dimension == 1, ErrorKind::DomainError, "wave speed needs a 1D problem");
  require(n_samples >= 4 && horizon > 0.0, ErrorKind::DomainError, "wave speed needs >= 4 samples and horizon > 0");
  std::vector<double> times;
  for (std::size_t k = 1; k < n_samples; ++k)
    times.push_back(horizon * static_cast<double>(k) / static_cast<double>(n_samples - 1));
  const Trajectory traj = solve(problem, horizon, times);
  FrontTrack track;
  for (std::size_t k = 0; k < traj.times.size(); ++k) {
    track.times.push_back(traj.times[k]);
    track.positions.push_back(level_crossing(traj.fields[k], level));
  }
  const std::size_t half = track.times.size() / 2;
  const LinearFit fit = least_squares(std::span(track.times).subspan(half), std::span(track.positions).subspan(half));
  track.speed = fit.slope;
  track.intercept = fit.intercept;
  track.residual = fit.residual_rms;
  return track;
}

IntegralSign integral_sign(const RPoly& phi, const RealRoot& upper) {
  const RPoly F = phi.antiderivative();
  IntegralSign out;
  if (upper.exact) {
    const Rational v = F(*upper.exact);
    out.exact = v;
    out.sign = sign(v);
    out.value = to_double(v);
  } else {
    const Rational v = F(exact_rational(upper.value));
    out.value = to_double(v);
    out.sign = sign(v);
  }
  return out;
}

double level_set_radius(const GridField& f, double level, std::size_t rays) {
  require(f.dimension == 2, ErrorKind::DomainError, "level set radius needs a 2D field");
  const double rmax = std::min(f.x(f.nx - 1), f.y(f.ny - 1));
  const double dr = f.h / 4.0;
  double sum = 0.0;
  for (std::size_t k = 0; k < rays; ++k) {
    const double th = (static_cast<double>(k) + 0.5) / static_cast<double>(rays) * std::numbers::pi / 2.0;
    const double c = std::cos(th), s = std::sin(th);
    double prev = f.interpolate(0.0, 0.0) - level;
    if (prev >= 0.0) raise(ErrorKind::FrontLost, "inner phase has vanished");
    double r = 0.0, found = -1.0;
    while (r + dr <= rmax) {
      const double cur = f.interpolate((r + dr) * c, (r + dr) * s) - level;
      if (cur >= 0.0) {
        found = r + dr * prev / (prev - cur);
        break;
      }
      prev = cur;
      r += dr;
    }
    if (found < 0.0) raise(ErrorKind::FrontLost, "ray does not cross the level set");
    sum += found;
  }
  const double radius = sum / static_cast<double>(rays);
  if (radius < 5.0 * f.h) raise(ErrorKind::FrontLost, "radius below 5 grid cells");
  return radius;
}

CircleRun shrinking_circle(const RdeProblem& problem, double R0, double u_in, double u_out, double level,
                           const std::vector<double>& times) {
  require(problem.dimension == 2, ErrorKind::DomainError, "shrinking circle needs a 2D problem");
  require(!times.empty(), ErrorKind::DomainError, "shrinking circle needs sample times");
  RdeProblem p = problem;
  p.init.fill([&](double x, double y) { return std::hypot(x, y) < R0 ? u_in : u_out; });
  const double horizon = *std::max_element(times.begin(), times.end());
  CircleRun run;
  run.snapshots = solve(p, horizon, times);
  std::vector<double> sq;
  for (std::size_t k = 0; k < run.snapshots.times.size(); ++k) {
    const double t = run.snapshots.times[k];
    if (t == 0.0 && std::find(times.begin(), times.end(), 0.0) == times.end()) continue;
    const double r = level_set_radius(run.snapshots.fields[k], level);
    run.track.times.push_back(t);
    run.track.positions.push_back(r);
    sq.push_back(r * r);
  }
  if (run.track.times.size() >= 2) {
    const LinearFit fit = least_squares(run.track.times, sq);
    run.track.speed = fit.slope;
    run.track.intercept = fit.intercept;
    run.track.residual = fit.residual_rms;
  }
  return run;
}

std::vector<double> radial_front(const RadialProblem& p, double R0, double u_in, double u_out, double level,
                                 const std::vector<double>& times) {
  require(p.h > 0.0 && p.dt > 0.0 && p.r_max > R0, ErrorKind::DomainError, "bad radial problem");
  const double scale = 1.0 / (p.eps * p.eps);
  if (p.dt * scale * max_abs_slope(p.phi) > 0.5)
    raise(ErrorKind::StabilityViolation, "radial reaction step too large");
  const auto n = static_cast<std::size_t>(std::llround(p.r_max / p.h));
  const double h = p.r_max / static_cast<double>(n);
  std::vector<double> r(n), u(n);
  for (std::size_t i = 0; i < n; ++i) {
    r[i] = (static_cast<double>(i) + 0.5) * h;
    u[i] = r[i] < R0 ? u_in : u_out;
  }
  // (I - dt D A) u_new = rhs with conservative radial Laplacian, zero flux at both ends
  std::vector<double> lower(n, 0.0), diag(n, 1.0), upper(n, 0.0);
  const double k = p.dt * p.diffusion / (h * h);
  for (std::size_t i = 0; i < n; ++i) {
    const double rm = static_cast<double>(i) * h;
    const double rp = (static_cast<double>(i) + 1.0) * h;
    const double wl = i > 0 ? k * rm / r[i] : 0.0;
    const double wr = i + 1 < n ? k * rp / r[i] : 0.0;
    lower[i] = -wl;
    upper[i] = -wr;
    diag[i] = 1.0 + wl + wr;
  }
  // Thomas factorisation, reused every step
  std::vector<double> cp(n), m(n);
  m[0] = diag[0];
  cp[0] = upper[0] / m[0];
  for (std::size_t i = 1; i < n; ++i) {
    m[i] = diag[i] - lower[i] * cp[i - 1];
    cp[i] = upper[i] / m[i];
  }
  std::vector<double> sorted = times;
  std::sort(sorted.begin(), sorted.end());
  std::vector<double> out;
  std::vector<double> rhs(n);
  double t = 0.0;
  auto crossing = [&]() {
    if (u[0] >= level) return std::numeric_limits<double>::quiet_NaN();
    for (std::size_t i = 0; i + 1 < n; ++i)
      if (u[i + 1] >= level) return r[i] + h * (level - u[i]) / (u[i + 1] - u[i]);
    return std::numeric_limits<double>::quiet_NaN();
  };
  for (double target : sorted) {
    const double seg = target - t;
    if (seg > 0.0) {
      const auto steps = static_cast<std::size_t>(std::ceil(seg / p.dt - 1e-9));
      const double dt = seg / static_cast<double>(steps);
      // rescale the factorisation if the step shrank
      const double ratio = dt / p.dt;
      std::vector<double> lo2 = lower, di2 = diag, up2 = upper;
      for (std::size_t i = 0; i < n; ++i) {
        lo2[i] *= ratio;
        up2[i] *= ratio;
        di2[i] = 1.0 + (diag[i] - 1.0) * ratio;
      }
      m[0] = di2[0];
      cp[0] = up2[0] / m[0];
      for (std::size_t i = 1; i < n; ++i) {
        m[i] = di2[i] - lo2[i] * cp[i - 1];
        cp[i] = up2[i] / m[i];
      }
      for (std::size_t s = 0; s < steps; ++s) {
        for (std::size_t i = 0; i < n; ++i) rhs[i] = u[i] + dt * scale * p.phi(u[i]);
        u[0] = rhs[0] / m[0];
        for (std::size_t i = 1; i < n; ++i) u[i] = (rhs[i] - lo2[i] * u[i - 1]) / m[i];
        for (std::size_t i = n - 1; i-- > 0;) u[i] -= cp[i] * u[i + 1];
      }
    }
    t = target;
    out.push_back(crossing());
  }
  return out;
}

}  // namespace dualvote
