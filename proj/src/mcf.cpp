#include "dualvote/mcf.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dualvote/errors.hpp"
#include "dualvote/rng.hpp"

namespace dualvote {

namespace {

double norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

std::vector<double> random_direction(Stream& rng, std::size_t d) {
  std::vector<double> v(d);
  double n = 0.0;
  while (n < 1e-12) {
    for (auto& x : v) x = rng.normal();
    n = norm(v);
  }
  for (auto& x : v) x /= n;
  return v;
}

}  // namespace

FlowSpec FlowSpec::half_plane(std::vector<double> normal, double offset, double D) {
  FlowSpec f;
  f.shape = Shape::HalfPlane;
  f.dimension = static_cast<int>(normal.size());
  const double n = norm(normal);
  require(n > 0.0, ErrorKind::DomainError, "half plane normal must be nonzero");
  for (auto& x : normal) x /= n;
  f.normal = std::move(normal);
  f.offset = offset;
  f.speed_const = D;
  return f;
}

FlowSpec FlowSpec::sphere(std::vector<double> center, double R0, double D) {
  require(R0 > 0.0, ErrorKind::DomainError, "sphere radius must be > 0");
  FlowSpec f;
  f.shape = Shape::Sphere;
  f.dimension = static_cast<int>(center.size());
  f.center = std::move(center);
  f.R0 = R0;
  f.speed_const = D;
  return f;
}

double extinction_time(double R0, int dimension, double D) {
  require(dimension >= 2 && D > 0.0, ErrorKind::DomainError, "sphere flow needs dimension >= 2, D > 0");
  return R0 * R0 / (2.0 * (dimension - 1) * D);
}

double sphere_radius(double R0, double t, int dimension, double D) {
  require(t >= 0.0, ErrorKind::DomainError, "time must be >= 0");
  const double T = extinction_time(R0, dimension, D);
  if (t > T) raise(ErrorKind::Extinct, "sphere extinct at t=" + std::to_string(T));
  return std::sqrt(std::max(0.0, R0 * R0 - 2.0 * (dimension - 1) * D * t));
}

double signed_distance(const FlowSpec& flow, std::span<const double> x, double t) {
  require(x.size() == static_cast<std::size_t>(flow.dimension), ErrorKind::DomainError, "point dimension mismatch");
  if (flow.shape == FlowSpec::Shape::HalfPlane) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * flow.normal[i];
    return s - flow.offset;
  }
  const double R = sphere_radius(flow.R0, t, flow.dimension, flow.speed_const);
  double r2 = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) r2 += (x[i] - flow.center[i]) * (x[i] - flow.center[i]);
  return std::sqrt(r2) - R;
}

RegularityReport regularity_check(const FlowSpec& flow, std::size_t samples, double band, double t,
                                  std::uint64_t seed, double tol) {
  const auto d = static_cast<std::size_t>(flow.dimension);
  double R = 0.0;
  if (flow.shape == FlowSpec::Shape::Sphere) {
    R = sphere_radius(flow.R0, t, flow.dimension, flow.speed_const);
    require(band < R / 2.0, ErrorKind::DomainError, "band must be below R(t)/2");
  }
  Stream rng = derive_stream(seed, {"mcf", static_cast<std::uint64_t>(flow.shape)});
  const double hg = 1e-5, hl = 1e-4, ht = 1e-5, lip_step = 1e-3;
  RegularityReport rep;
  rep.samples = samples;

  auto place = [&](double offset) {
    std::vector<double> x(d);
    if (flow.shape == FlowSpec::Shape::Sphere) {
      const auto dir = random_direction(rng, d);
      for (std::size_t i = 0; i < d; ++i) x[i] = flow.center[i] + (R + offset) * dir[i];
    } else {
      for (auto& v : x) v = 4.0 * rng.uniform() - 2.0;
      double s = 0.0;
      for (std::size_t i = 0; i < d; ++i) s += x[i] * flow.normal[i];
      for (std::size_t i = 0; i < d; ++i) x[i] += (flow.offset + offset - s) * flow.normal[i];
    }
    return x;
  };
  auto dist = [&](std::vector<double> x, std::size_t i, double shift, double tt) {
    x[i] += shift;
    return signed_distance(flow, x, tt);
  };

  for (std::size_t k = 0; k < samples; ++k) {
    const auto x = place(band * (2.0 * rng.uniform() - 1.0));
    double g2 = 0.0;
    for (std::size_t i = 0; i < d; ++i) {
      const double gi = (dist(x, i, hg, t) - dist(x, i, -hg, t)) / (2.0 * hg);
      g2 += gi * gi;
    }
    const double err = std::abs(std::sqrt(g2) - 1.0);
    rep.max_eikonal_error = std::max(rep.max_eikonal_error, err);
    rep.rows.push_back({"grad_norm", x, std::sqrt(g2), err});
    double s = lip_step;
    if (flow.shape == FlowSpec::Shape::Sphere)
      s = std::min(s, 0.5 * (extinction_time(flow.R0, flow.dimension, flow.speed_const) - t));
    if (s > 0.0)
      rep.lipschitz_t = std::max(rep.lipschitz_t, std::abs(signed_distance(flow, x, t + s) - signed_distance(flow, x, t)) / s);
  }
  for (std::size_t k = 0; k < samples; ++k) {
    const auto x = place(0.0);
    const double tm = std::max(0.0, t - ht);
    const double dt = (signed_distance(flow, x, t + ht) - signed_distance(flow, x, tm)) / (t + ht - tm);
    const double d0 = signed_distance(flow, x, t);
    double lap = 0.0;
    for (std::size_t i = 0; i < d; ++i) lap += (dist(x, i, hl, t) - 2.0 * d0 + dist(x, i, -hl, t)) / (hl * hl);
    // normal velocity -d_t d against D * (-Lap d)
    const double err = std::abs(-dt - (-flow.speed_const * lap));
    rep.max_velocity_error = std::max(rep.max_velocity_error, err);
    rep.rows.push_back({"velocity_identity", x, -dt, err});
  }
  rep.pass = rep.max_eikonal_error <= tol && rep.max_velocity_error <= tol;
  return rep;
}

std::string to_csv(const RegularityReport& report) {
  std::ostringstream os;
  os.precision(17);
  os << "quantity,point,value,residual\n";
  for (const auto& r : report.rows) {
    os << r.quantity << ",\"";
    for (std::size_t i = 0; i < r.point.size(); ++i) os << (i ? ";" : "") << r.point[i];
    os << "\"," << r.value << ',' << r.residual << '\n';
  }
  return os.str();
}

}  // namespace dualvote
