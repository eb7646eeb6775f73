#pragma once

#include <span>
#include <string>
#include <vector>

#include "heatlab/process_models.hpp"
#include "heatlab/renewal.hpp"

namespace heatlab {

using Point = std::vector<double>;

enum class DomainKind { Ball, ExteriorBall, Halfspace, HalfspaceLikeSlabBump, UnionTwoBalls, Interval, WholeSpace };

std::string to_string(DomainKind kind);
DomainKind domain_kind_from_string(const std::string& name);

/// C^{1,1} data. Unbounded scales are +inf.
struct C11Scales {
  double r_in = 0.0;
  double r_out = 0.0;
  /// Exterior pair: C^{1,1} at scale R1 and complement inside the closed ball of radius R2.
  double R1 = 0.0;
  double R2 = 0.0;
  bool has_exterior_pair = false;
  double scale() const { return r_in < r_out ? r_in : r_out; }
};

struct BoundaryPoint {
  Point q;
  /// Unit normal pointing into the domain.
  Point inward;
};

/// Analytic domains in R^d, d in {1, 2, 3}. The last coordinate is the
/// vertical one for halfspace kinds: D = {x_d > a}.
class Domain {
 public:
  static Domain ball(int d, Point center, double radius);
  static Domain exterior_ball(int d, Point center, double radius);
  static Domain halfspace(int d, double level);
  /// {x_d > g(|x'|)} with g = low + (high - low) * bump(|x'| / width), so
  /// {x_d > high} is inside D and D is inside {x_d > low}. Needs d >= 2.
  static Domain halfspace_bump(int d, double high, double low, double width);
  static Domain union_two_balls(int d, Point c1, Point c2, double radius);
  static Domain interval(double lo, double hi);
  static Domain whole_space(int d);

  DomainKind kind() const { return kind_; }
  int dimension() const { return d_; }
  std::string describe() const;

  bool contains(std::span<const double> x) const;
  /// Distance to the complement; 0 outside D, +inf for the whole space.
  double dist(std::span<const double> x) const;
  C11Scales c11_scales() const;
  double inradius() const;
  double diameter() const;
  bool bounded() const;

  /// Deterministic boundary sample with inward normals (empty for the whole space).
  std::vector<BoundaryPoint> boundary_points(std::size_t n) const;

  const Point& center() const { return c1_; }
  const Point& center2() const { return c2_; }
  double radius() const { return radius_; }
  /// Halfspace level, or (high, low, width) for the bump.
  double level() const { return a_; }
  double low_level() const { return b_; }
  double width() const { return w_; }
  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  Domain(DomainKind kind, int d) : kind_(kind), d_(d) {}
  double bump_height(double rho) const;
  double bump_dist(std::span<const double> x) const;

  DomainKind kind_;
  int d_;
  Point c1_, c2_;
  double radius_ = 0.0;
  double a_ = 0.0, b_ = 0.0, w_ = 0.0;
  double lo_ = 0.0, hi_ = 0.0;
};

double dist_to_complement(const Domain& domain, std::span<const double> x);

struct IJValues {
  double I = 0.0;
  double J = 0.0;
  double rho_I = 0.0;
  double rho_J = 0.0;
  std::size_t resolution = 0;
};

/// I(r) = inf over rho in (0, r/2] of nu(B_r \ B_rho) V^2(rho) and
/// J(r) = inf over rho in (0, r] of nu(B_rho^c) V^2(rho), on a log grid whose
/// lower end is the smallest radius the table covers.
IJValues script_IJ(const ProcessModel& model, const RenewalTable& table, double r, std::size_t points = 200);

}  // namespace heatlab
