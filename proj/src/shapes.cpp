#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <variant>

#include "latentcloud/data.hpp"
#include "latentcloud/error.hpp"

namespace latentcloud {

namespace {

constexpr double kPi = std::numbers::pi;

// Parallelogram o + a*u + b*v, a, b in [0, 1]; u and v are orthogonal.
struct Rect {
  Vec3 o, u, v;
};

// Vertical lateral surface between y0 and y0 + h.
struct Frustum {
  double cx, cz, y0, h, r0, r1;
};

// Horizontal disc.
struct Disc {
  double cx, y, cz, r;
};

using Patch = std::variant<Rect, Frustum, Disc>;

double norm(const Vec3& a) { return std::sqrt(a[0] * a[0] + a[1] * a[1] + a[2] * a[2]); }

double area(const Patch& p) {
  if (const auto* r = std::get_if<Rect>(&p)) return norm(r->u) * norm(r->v);
  if (const auto* f = std::get_if<Frustum>(&p)) {
    const double slant = std::hypot(f->h, f->r0 - f->r1);
    return kPi * (f->r0 + f->r1) * slant;
  }
  const auto& d = std::get<Disc>(p);
  return kPi * d.r * d.r;
}

Vec3 sample(const Patch& p, Rng& rng) {
  if (const auto* r = std::get_if<Rect>(&p)) {
    const double a = rng.uniform();
    const double b = rng.uniform();
    return {r->o[0] + a * r->u[0] + b * r->v[0], r->o[1] + a * r->u[1] + b * r->v[1],
            r->o[2] + a * r->u[2] + b * r->v[2]};
  }
  if (const auto* f = std::get_if<Frustum>(&p)) {
    const double theta = 2.0 * kPi * rng.uniform();
    const double s = rng.uniform();
    // Area density grows linearly with the radius along the side.
    double t = s;
    if (f->r0 != f->r1) {
      const double r = std::sqrt(f->r0 * f->r0 + s * (f->r1 * f->r1 - f->r0 * f->r0));
      t = (r - f->r0) / (f->r1 - f->r0);
    }
    const double radius = f->r0 + t * (f->r1 - f->r0);
    return {f->cx + radius * std::cos(theta), f->y0 + t * f->h, f->cz + radius * std::sin(theta)};
  }
  const auto& d = std::get<Disc>(p);
  const double theta = 2.0 * kPi * rng.uniform();
  const double radius = d.r * std::sqrt(rng.uniform());
  return {d.cx + radius * std::cos(theta), d.y, d.cz + radius * std::sin(theta)};
}

void add_box(std::vector<Patch>& out, const Vec3& lo, const Vec3& hi) {
  const double dx = hi[0] - lo[0], dy = hi[1] - lo[1], dz = hi[2] - lo[2];
  out.push_back(Rect{{lo[0], lo[1], lo[2]}, {0, dy, 0}, {0, 0, dz}});
  out.push_back(Rect{{hi[0], lo[1], lo[2]}, {0, dy, 0}, {0, 0, dz}});
  out.push_back(Rect{{lo[0], lo[1], lo[2]}, {dx, 0, 0}, {0, 0, dz}});
  out.push_back(Rect{{lo[0], hi[1], lo[2]}, {dx, 0, 0}, {0, 0, dz}});
  out.push_back(Rect{{lo[0], lo[1], lo[2]}, {dx, 0, 0}, {0, dy, 0}});
  out.push_back(Rect{{lo[0], lo[1], hi[2]}, {dx, 0, 0}, {0, dy, 0}});
}

void add_leg(std::vector<Patch>& out, double x, double z, double r, double height) {
  out.push_back(Frustum{x, z, 0.0, height, r, r});
}

std::vector<Patch> chair_patches(const ChairParams& p) {
  std::vector<Patch> out;
  const double hw = p.seat_width / 2, hd = p.seat_depth / 2;
  const double seat_bottom = p.seat_height - kSeatThickness;
  add_box(out, {-hw, seat_bottom, -hd}, {hw, p.seat_height, hd});
  const double lx = hw - p.leg_radius - 0.01, lz = hd - p.leg_radius - 0.01;
  for (double sx : {-1.0, 1.0}) {
    for (double sz : {-1.0, 1.0}) add_leg(out, sx * lx, sz * lz, p.leg_radius, seat_bottom);
  }
  add_box(out, {-hw, p.seat_height, -hd}, {hw, p.seat_height + p.back_height, -hd + kBackThickness});
  if (p.armrests) {
    const double top = p.seat_height + p.armrest_height;
    for (double sx : {-1.0, 1.0}) {
      const double x0 = sx > 0 ? hw - kArmrestThickness : -hw;
      const double x1 = x0 + kArmrestThickness;
      add_box(out, {x0, top - kArmrestThickness, -hd + kBackThickness}, {x1, top, hd});
      add_box(out, {x0, p.seat_height, hd - kArmrestThickness}, {x1, top - kArmrestThickness, hd});
    }
  }
  return out;
}

std::vector<Patch> table_patches(const TableParams& p) {
  std::vector<Patch> out;
  const double hw = p.top_width / 2, hd = p.top_depth / 2;
  const double bottom = p.height - kTableTopThickness;
  add_box(out, {-hw, bottom, -hd}, {hw, p.height, hd});
  const double lx = hw - p.leg_radius - 0.04, lz = hd - p.leg_radius - 0.04;
  for (double sx : {-1.0, 1.0}) {
    for (double sz : {-1.0, 1.0}) add_leg(out, sx * lx, sz * lz, p.leg_radius, bottom);
  }
  return out;
}

std::vector<Patch> lamp_patches(const LampParams& p) {
  std::vector<Patch> out;
  out.push_back(Frustum{0, 0, 0, kLampBaseThickness, p.base_radius, p.base_radius});
  out.push_back(Disc{0, 0, 0, p.base_radius});
  out.push_back(Disc{0, kLampBaseThickness, 0, p.base_radius});
  out.push_back(Frustum{0, 0, kLampBaseThickness, p.pole_height, p.pole_radius, p.pole_radius});
  const double shade_top = kLampBaseThickness + p.pole_height;
  out.push_back(Frustum{0, 0, shade_top - p.shade_height, p.shade_height, p.shade_bottom_radius,
                        p.shade_top_radius});
  return out;
}

void check_range(double v, double lo, double hi, const char* name) {
  if (!(v >= lo && v <= hi)) {
    throw ConfigError(std::string(name) + " = " + std::to_string(v) + " outside [" +
                      std::to_string(lo) + ", " + std::to_string(hi) + "]");
  }
}

}  // namespace

std::string_view family_name(ShapeFamily f) {
  switch (f) {
    case ShapeFamily::BoxChair: return "box-chair";
    case ShapeFamily::Table: return "table";
    case ShapeFamily::Lamp: return "lamp";
  }
  return "unknown";
}

ShapeFamily parse_family(std::string_view name) {
  for (ShapeFamily f : all_families()) {
    if (family_name(f) == name) return f;
  }
  throw ConfigError("unknown shape family '" + std::string(name) +
                    "' (expected box-chair, table or lamp)");
}

const std::vector<ShapeFamily>& all_families() {
  static const std::vector<ShapeFamily> families = {ShapeFamily::BoxChair, ShapeFamily::Table,
                                                    ShapeFamily::Lamp};
  return families;
}

ShapeParams ShapeParams::make(const ChairParams& p) {
  ShapeParams s;
  s.family = ShapeFamily::BoxChair;
  s.chair = p;
  return s;
}

ShapeParams ShapeParams::make(const TableParams& p) {
  ShapeParams s;
  s.family = ShapeFamily::Table;
  s.table = p;
  return s;
}

ShapeParams ShapeParams::make(const LampParams& p) {
  ShapeParams s;
  s.family = ShapeFamily::Lamp;
  s.lamp = p;
  return s;
}

ShapeParams ShapeParams::sample(ShapeFamily family, Rng& rng) {
  switch (family) {
    case ShapeFamily::BoxChair: {
      ChairParams p;
      p.seat_width = rng.uniform(0.40, 0.60);
      p.seat_depth = rng.uniform(0.40, 0.60);
      p.seat_height = rng.uniform(0.40, 0.50);
      p.leg_radius = rng.uniform(0.02, 0.04);
      p.back_height = rng.uniform(0.30, 0.60);
      p.armrests = rng.uniform() < 0.5;
      p.armrest_height = rng.uniform(0.15, 0.25);
      return make(p);
    }
    case ShapeFamily::Table: {
      TableParams p;
      p.top_width = rng.uniform(0.80, 1.40);
      p.top_depth = rng.uniform(0.50, 0.90);
      p.height = rng.uniform(0.60, 0.80);
      p.leg_radius = rng.uniform(0.02, 0.05);
      return make(p);
    }
    case ShapeFamily::Lamp: {
      LampParams p;
      p.base_radius = rng.uniform(0.10, 0.20);
      p.pole_radius = rng.uniform(0.01, 0.02);
      p.pole_height = rng.uniform(0.60, 1.20);
      p.shade_bottom_radius = rng.uniform(0.15, 0.30);
      p.shade_top_radius = rng.uniform(0.05, 0.12);
      p.shade_height = rng.uniform(0.15, 0.30);
      return make(p);
    }
  }
  throw ConfigError("unknown shape family");
}

void ShapeParams::validate() const {
  switch (family) {
    case ShapeFamily::BoxChair:
      check_range(chair.seat_width, 0.40, 0.60, "seat_width");
      check_range(chair.seat_depth, 0.40, 0.60, "seat_depth");
      check_range(chair.seat_height, 0.40, 0.50, "seat_height");
      check_range(chair.leg_radius, 0.02, 0.04, "leg_radius");
      check_range(chair.back_height, 0.30, 0.60, "back_height");
      check_range(chair.armrest_height, 0.15, 0.25, "armrest_height");
      return;
    case ShapeFamily::Table:
      check_range(table.top_width, 0.80, 1.40, "top_width");
      check_range(table.top_depth, 0.50, 0.90, "top_depth");
      check_range(table.height, 0.60, 0.80, "height");
      check_range(table.leg_radius, 0.02, 0.05, "leg_radius");
      return;
    case ShapeFamily::Lamp:
      check_range(lamp.base_radius, 0.10, 0.20, "base_radius");
      check_range(lamp.pole_radius, 0.01, 0.02, "pole_radius");
      check_range(lamp.pole_height, 0.60, 1.20, "pole_height");
      check_range(lamp.shade_bottom_radius, 0.15, 0.30, "shade_bottom_radius");
      check_range(lamp.shade_top_radius, 0.05, 0.12, "shade_top_radius");
      check_range(lamp.shade_height, 0.15, 0.30, "shade_height");
      return;
  }
  throw ConfigError("unknown shape family");
}

PointCloud generate_shape(const ShapeParams& params, std::size_t n, std::uint64_t seed) {
  params.validate();
  if (n == 0) throw DimensionError("shape must be sampled with at least one point");
  std::vector<Patch> patches;
  switch (params.family) {
    case ShapeFamily::BoxChair: patches = chair_patches(params.chair); break;
    case ShapeFamily::Table: patches = table_patches(params.table); break;
    case ShapeFamily::Lamp: patches = lamp_patches(params.lamp); break;
  }
  std::vector<double> cumulative;
  double total = 0.0;
  for (const Patch& p : patches) {
    total += area(p);
    cumulative.push_back(total);
  }
  Rng rng(seed ^ 0x9E3779B97F4A7C15ULL);
  std::vector<Vec3> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pick = rng.uniform() * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), pick);
    if (it == cumulative.end()) --it;
    points.push_back(sample(patches[static_cast<std::size_t>(it - cumulative.begin())], rng));
  }
  return PointCloud(std::move(points));
}

}  // namespace latentcloud
