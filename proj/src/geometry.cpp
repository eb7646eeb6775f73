#include "heatlab/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include <boost/math/tools/minima.hpp>

#include "heatlab/errors.hpp"
#include "heatlab/numerics.hpp"

namespace heatlab {

namespace nm = numerics;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double norm(std::span<const double> x) {
  double s = 0.0;
  for (double v : x) s += v * v;
  return std::sqrt(s);
}

double distance(std::span<const double> x, const Point& c) {
  double s = 0.0;
  for (std::size_t i = 0; i < c.size(); ++i) s += (x[i] - c[i]) * (x[i] - c[i]);
  return std::sqrt(s);
}

void require_dim(int d) {
  if (d < 1 || d > 3) throw DomainError("dimension must be 1, 2 or 3");
}

void require_point(int d, const Point& p) {
  if (static_cast<int>(p.size()) != d) throw DomainError("point dimension does not match the domain");
}

// C^{1,1} profile: 1 at 0, 0 beyond 1, |bump''| <= 4.
double bump(double s) {
  s = std::abs(s);
  if (s >= 1.0) return 0.0;
  if (s <= 0.5) return 1.0 - 2.0 * s * s;
  return 2.0 * (1.0 - s) * (1.0 - s);
}

double bump_slope(double s) {
  const double a = std::abs(s);
  double g = 0.0;
  if (a < 0.5) g = -4.0 * a;
  else if (a < 1.0) g = -4.0 * (1.0 - a);
  return s < 0 ? -g : g;
}

// Directions on the unit sphere in dimension d, roughly uniform.
std::vector<Point> sphere_directions(int d, std::size_t n) {
  std::vector<Point> out;
  if (d == 1) return {{1.0}, {-1.0}};
  if (d == 2) {
    for (std::size_t i = 0; i < n; ++i) {
      const double th = 2.0 * nm::kPi * (i + 0.5) / n;
      out.push_back({std::cos(th), std::sin(th)});
    }
    return out;
  }
  const double golden = nm::kPi * (3.0 - std::sqrt(5.0));
  for (std::size_t i = 0; i < n; ++i) {
    const double z = 1.0 - 2.0 * (i + 0.5) / n;
    const double rr = std::sqrt(1.0 - z * z);
    out.push_back({rr * std::cos(golden * i), rr * std::sin(golden * i), z});
  }
  return out;
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt(const Point& p) {
  std::string s = "(";
  for (std::size_t i = 0; i < p.size(); ++i) s += (i ? "," : "") + fmt(p[i]);
  return s + ")";
}

}  // namespace

std::string to_string(DomainKind kind) {
  switch (kind) {
    case DomainKind::Ball: return "ball";
    case DomainKind::ExteriorBall: return "exterior-ball";
    case DomainKind::Halfspace: return "halfspace";
    case DomainKind::HalfspaceLikeSlabBump: return "halfspace-bump";
    case DomainKind::UnionTwoBalls: return "union-two-balls";
    case DomainKind::Interval: return "interval";
    case DomainKind::WholeSpace: return "whole-space";
  }
  return "unknown";
}

DomainKind domain_kind_from_string(const std::string& name) {
  for (auto k : {DomainKind::Ball, DomainKind::ExteriorBall, DomainKind::Halfspace, DomainKind::HalfspaceLikeSlabBump,
                 DomainKind::UnionTwoBalls, DomainKind::Interval, DomainKind::WholeSpace}) {
    if (to_string(k) == name) return k;
  }
  throw DomainError("unknown domain kind '" + name + "'");
}

Domain Domain::ball(int d, Point center, double radius) {
  require_dim(d);
  require_point(d, center);
  if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
  Domain D(DomainKind::Ball, d);
  D.c1_ = std::move(center);
  D.radius_ = radius;
  return D;
}

Domain Domain::exterior_ball(int d, Point center, double radius) {
  Domain D = ball(d, std::move(center), radius);
  D.kind_ = DomainKind::ExteriorBall;
  return D;
}

Domain Domain::halfspace(int d, double level) {
  require_dim(d);
  Domain D(DomainKind::Halfspace, d);
  D.a_ = level;
  return D;
}

Domain Domain::halfspace_bump(int d, double high, double low, double width) {
  require_dim(d);
  if (d < 2) throw DomainError("halfspace bump needs d >= 2");
  if (!(high > low)) throw DomainError("halfspace bump needs high > low");
  if (!(width > 0.0)) throw DomainError("halfspace bump width must be positive");
  Domain D(DomainKind::HalfspaceLikeSlabBump, d);
  D.a_ = high;
  D.b_ = low;
  D.w_ = width;
  return D;
}

Domain Domain::union_two_balls(int d, Point c1, Point c2, double radius) {
  require_dim(d);
  require_point(d, c1);
  require_point(d, c2);
  if (!(radius > 0.0)) throw DomainError("ball radius must be positive");
  Domain D(DomainKind::UnionTwoBalls, d);
  D.c1_ = std::move(c1);
  D.c2_ = std::move(c2);
  D.radius_ = radius;
  return D;
}

Domain Domain::interval(double lo, double hi) {
  if (!(hi > lo)) throw DomainError("interval needs lo < hi");
  Domain D(DomainKind::Interval, 1);
  D.lo_ = lo;
  D.hi_ = hi;
  return D;
}

Domain Domain::whole_space(int d) {
  require_dim(d);
  return Domain(DomainKind::WholeSpace, d);
}

std::string Domain::describe() const {
  std::string s = to_string(kind_) + " d=" + std::to_string(d_);
  switch (kind_) {
    case DomainKind::Ball:
    case DomainKind::ExteriorBall: return s + " center=" + fmt(c1_) + " radius=" + fmt(radius_);
    case DomainKind::Halfspace: return s + " level=" + fmt(a_);
    case DomainKind::HalfspaceLikeSlabBump:
      return s + " high=" + fmt(a_) + " low=" + fmt(b_) + " width=" + fmt(w_);
    case DomainKind::UnionTwoBalls:
      return s + " c1=" + fmt(c1_) + " c2=" + fmt(c2_) + " radius=" + fmt(radius_);
    case DomainKind::Interval: return s + " lo=" + fmt(lo_) + " hi=" + fmt(hi_);
    case DomainKind::WholeSpace: return s;
  }
  return s;
}

double Domain::bump_height(double rho) const { return b_ + (a_ - b_) * bump(rho / w_); }

double Domain::bump_dist(std::span<const double> x) const {
  const double xd = x[d_ - 1];
  const double rho = norm(x.first(d_ - 1));
  if (xd <= bump_height(rho)) return 0.0;
  // nearest boundary point lies in the plane through the vertical axis and x
  double best = rho >= w_ ? xd - b_ : std::hypot(w_ - rho, xd - b_);
  auto d2 = [&](double p) { return (p - rho) * (p - rho) + (xd - bump_height(p)) * (xd - bump_height(p)); };
  constexpr int n = 256;
  int arg = 0;
  double val = kInf;
  for (int i = 0; i <= n; ++i) {
    const double p = -w_ + 2.0 * w_ * i / n;
    const double v = d2(p);
    if (v < val) {
      val = v;
      arg = i;
    }
  }
  const double step = 2.0 * w_ / n;
  const double lo = std::max(-w_, -w_ + step * (arg - 1));
  const double hi = std::min(w_, -w_ + step * (arg + 1));
  auto res = boost::math::tools::brent_find_minima(d2, lo, hi, 50);
  best = std::min({best, std::sqrt(val), std::sqrt(res.second)});
  return best;
}

bool Domain::contains(std::span<const double> x) const {
  switch (kind_) {
    case DomainKind::Ball: return distance(x, c1_) < radius_;
    case DomainKind::ExteriorBall: return distance(x, c1_) > radius_;
    case DomainKind::Halfspace: return x[d_ - 1] > a_;
    case DomainKind::HalfspaceLikeSlabBump: return x[d_ - 1] > bump_height(norm(x.first(d_ - 1)));
    case DomainKind::UnionTwoBalls: return distance(x, c1_) < radius_ || distance(x, c2_) < radius_;
    case DomainKind::Interval: return x[0] > lo_ && x[0] < hi_;
    case DomainKind::WholeSpace: return true;
  }
  return false;
}

double Domain::dist(std::span<const double> x) const {
  switch (kind_) {
    case DomainKind::Ball: return std::max(0.0, radius_ - distance(x, c1_));
    case DomainKind::ExteriorBall: return std::max(0.0, distance(x, c1_) - radius_);
    case DomainKind::Halfspace: return std::max(0.0, x[d_ - 1] - a_);
    case DomainKind::HalfspaceLikeSlabBump: return bump_dist(x);
    case DomainKind::UnionTwoBalls: {
      if (!contains(x)) return 0.0;
      // nearest points on each sphere that are not covered by the other ball, plus the rim
      double best = kInf;
      auto consider = [&](const Point& c, const Point& other) {
        const double rx = distance(x, c);
        std::vector<Point> cands;
        if (d_ == 1) {
          cands = {{c[0] - radius_}, {c[0] + radius_}};
        } else if (rx > 0.0) {
          Point p(d_);
          for (int i = 0; i < d_; ++i) p[i] = c[i] + radius_ * (x[i] - c[i]) / rx;
          cands.push_back(std::move(p));
        } else {
          best = std::min(best, radius_);
          return;
        }
        for (const auto& p : cands) {
          if (distance(p, other) >= radius_ * (1.0 - 1e-12)) best = std::min(best, distance(x, p));
        }
      };
      consider(c1_, c2_);
      consider(c2_, c1_);
      const double sep = distance(c2_, c1_);
      if (d_ > 1 && sep < 2.0 * radius_) {
        const double h = std::sqrt(radius_ * radius_ - 0.25 * sep * sep);
        double along = 0.0;
        for (int i = 0; i < d_; ++i) along += (x[i] - 0.5 * (c1_[i] + c2_[i])) * (c2_[i] - c1_[i]) / sep;
        double perp2 = 0.0;
        for (int i = 0; i < d_; ++i) {
          const double v = x[i] - 0.5 * (c1_[i] + c2_[i]) - along * (c2_[i] - c1_[i]) / sep;
          perp2 += v * v;
        }
        best = std::min(best, std::hypot(along, std::sqrt(perp2) - h));
      }
      return best;
    }
    case DomainKind::Interval: return std::max(0.0, std::min(x[0] - lo_, hi_ - x[0]));
    case DomainKind::WholeSpace: return kInf;
  }
  return 0.0;
}

C11Scales Domain::c11_scales() const {
  C11Scales s;
  switch (kind_) {
    case DomainKind::Ball:
      s.r_in = s.r_out = radius_;
      break;
    case DomainKind::ExteriorBall:
      s.r_in = s.r_out = radius_;
      s.R1 = s.R2 = radius_;
      s.has_exterior_pair = true;
      break;
    case DomainKind::Halfspace:
    case DomainKind::WholeSpace:
      s.r_in = s.r_out = kInf;
      break;
    case DomainKind::HalfspaceLikeSlabBump: {
      // half the smallest radius of curvature of the profile, which also clears the flat parts
      const double r = w_ * w_ / (8.0 * (a_ - b_));
      s.r_in = s.r_out = std::min(r, w_ / 4.0);
      break;
    }
    case DomainKind::UnionTwoBalls: {
      const double gap = distance(c2_, c1_) - 2.0 * radius_;
      const double r = gap > 0.0 ? std::min(radius_, 0.5 * gap) : 0.0;
      s.r_in = s.r_out = r;
      break;
    }
    case DomainKind::Interval:
      s.r_in = 0.5 * (hi_ - lo_);
      s.r_out = kInf;
      break;
  }
  return s;
}

double Domain::inradius() const {
  switch (kind_) {
    case DomainKind::Ball:
    case DomainKind::UnionTwoBalls: return radius_;
    case DomainKind::Interval: return 0.5 * (hi_ - lo_);
    default: return kInf;
  }
}

double Domain::diameter() const {
  switch (kind_) {
    case DomainKind::Ball: return 2.0 * radius_;
    case DomainKind::UnionTwoBalls: return std::max(distance(c2_, c1_) + 2.0 * radius_, 2.0 * radius_);
    case DomainKind::Interval: return hi_ - lo_;
    default: return kInf;
  }
}

bool Domain::bounded() const {
  return kind_ == DomainKind::Ball || kind_ == DomainKind::UnionTwoBalls || kind_ == DomainKind::Interval;
}

std::vector<BoundaryPoint> Domain::boundary_points(std::size_t n) const {
  std::vector<BoundaryPoint> out;
  auto on_sphere = [&](const Point& c, double sign, const Point* other) {
    for (const auto& u : sphere_directions(d_, n)) {
      BoundaryPoint bp;
      bp.q.resize(d_);
      bp.inward.resize(d_);
      for (int i = 0; i < d_; ++i) {
        bp.q[i] = c[i] + radius_ * u[i];
        bp.inward[i] = -sign * u[i];
      }
      if (other && distance(bp.q, *other) < radius_) continue;
      out.push_back(std::move(bp));
    }
  };
  switch (kind_) {
    case DomainKind::Ball: on_sphere(c1_, 1.0, nullptr); break;
    case DomainKind::ExteriorBall: on_sphere(c1_, -1.0, nullptr); break;
    case DomainKind::UnionTwoBalls: {
      on_sphere(c1_, 1.0, &c2_);
      on_sphere(c2_, 1.0, &c1_);
      break;
    }
    case DomainKind::Interval:
      out.push_back({{lo_}, {1.0}});
      out.push_back({{hi_}, {-1.0}});
      break;
    case DomainKind::Halfspace:
    case DomainKind::HalfspaceLikeSlabBump: {
      if (d_ == 1) {
        out.push_back({{a_}, {1.0}});
        break;
      }
      const double span = kind_ == DomainKind::Halfspace ? 4.0 : 2.0 * w_;
      const std::size_t m = d_ == 2 ? n : static_cast<std::size_t>(std::ceil(std::sqrt(double(n))));
      for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = 0; j < (d_ == 3 ? m : 1); ++j) {
          Point xp(d_ - 1);
          xp[0] = -span + 2.0 * span * (i + 0.5) / m;
          if (d_ == 3) xp[1] = -span + 2.0 * span * (j + 0.5) / m;
          BoundaryPoint bp;
          bp.q = xp;
          bp.inward.assign(d_, 0.0);
          if (kind_ == DomainKind::Halfspace) {
            bp.q.push_back(a_);
            bp.inward[d_ - 1] = 1.0;
          } else {
            const double rho = norm(xp);
            bp.q.push_back(bump_height(rho));
            // graph normal: (-grad g, 1)
            const double slope = rho > 0.0 ? (a_ - b_) * bump_slope(rho / w_) / w_ : 0.0;
            double nn = 1.0;
            for (int k = 0; k < d_ - 1; ++k) {
              bp.inward[k] = rho > 0.0 ? -slope * xp[k] / rho : 0.0;
              nn += bp.inward[k] * bp.inward[k];
            }
            bp.inward[d_ - 1] = 1.0;
            nn = std::sqrt(nn);
            for (auto& v : bp.inward) v /= nn;
          }
          out.push_back(std::move(bp));
        }
      }
      break;
    }
    case DomainKind::WholeSpace: break;
  }
  return out;
}

double dist_to_complement(const Domain& domain, std::span<const double> x) { return domain.dist(x); }

IJValues script_IJ(const ProcessModel& model, const RenewalTable& table, double r, std::size_t points) {
  if (!(r > 0.0)) throw DomainError("script_IJ needs r > 0");
  const double floor = table.r_min();
  if (r / 2 < floor) throw RangeError("renewal table does not reach r/2");
  IJValues out;
  out.resolution = points;
  out.I = out.J = kInf;
  const double tail_r = model.tail_mass(r);
  for (double rho : nm::geomspace(floor, r / 2, points)) {
    const double v = table.V(rho);
    const double q = (model.tail_mass(rho) - tail_r) * v * v;
    if (q < out.I) {
      out.I = q;
      out.rho_I = rho;
    }
  }
  for (double rho : nm::geomspace(floor, r, points)) {
    const double v = table.V(rho);
    const double q = model.tail_mass(rho) * v * v;
    if (q < out.J) {
      out.J = q;
      out.rho_J = rho;
    }
  }
  return out;
}

}  // namespace heatlab
