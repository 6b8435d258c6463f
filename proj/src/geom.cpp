#include "attrcat/geom.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace attrcat {

double Vec3::norm() const { return std::sqrt(dot(*this)); }

Quat Quat::normalized() const {
  double n = std::sqrt(w * w + x * x + y * y + z * z);
  if (n < 1e-12) throw GeomError("degenerate quaternion");
  return {w / n, x / n, y / n, z / n};
}

Vec3 Quat::rotate(const Vec3& v) const {
  // q v q*
  Vec3 u{x, y, z};
  Vec3 t = {u.y * v.z - u.z * v.y, u.z * v.x - u.x * v.z, u.x * v.y - u.y * v.x};
  t = t * 2.0;
  Vec3 cross = {u.y * t.z - u.z * t.y, u.z * t.x - u.x * t.z, u.x * t.y - u.y * t.x};
  return v + t * w + cross;
}

Quat Quat::slerp(const Quat& a_in, const Quat& b_in, double t) {
  Quat a = a_in.normalized();
  Quat b = b_in.normalized();
  double dot = a.w * b.w + a.x * b.x + a.y * b.y + a.z * b.z;
  if (dot < 0) {
    b = {-b.w, -b.x, -b.y, -b.z};
    dot = -dot;
  }
  if (dot > 1 - 1e-12) {
    Quat out{a.w + (b.w - a.w) * t, a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t,
             a.z + (b.z - a.z) * t};
    return out.normalized();
  }
  double theta = std::acos(std::clamp(dot, -1.0, 1.0));
  double sa = std::sin((1 - t) * theta) / std::sin(theta);
  double sb = std::sin(t * theta) / std::sin(theta);
  return Quat{a.w * sa + b.w * sb, a.x * sa + b.x * sb, a.y * sa + b.y * sb, a.z * sa + b.z * sb}
      .normalized();
}

bool pose_close(const Pose& a, const Pose& b, double tol) {
  if (std::abs(a.pos.x - b.pos.x) > tol || std::abs(a.pos.y - b.pos.y) > tol ||
      std::abs(a.pos.z - b.pos.z) > tol) {
    return false;
  }
  double direct = std::abs(a.rot.w - b.rot.w) + std::abs(a.rot.x - b.rot.x) +
                  std::abs(a.rot.y - b.rot.y) + std::abs(a.rot.z - b.rot.z);
  double flipped = std::abs(a.rot.w + b.rot.w) + std::abs(a.rot.x + b.rot.x) +
                   std::abs(a.rot.y + b.rot.y) + std::abs(a.rot.z + b.rot.z);
  return std::min(direct, flipped) <= 4 * tol;
}

// ---------------------------------------------------------------------------
// Primitive collision tests
// ---------------------------------------------------------------------------

namespace {

bool sphere_sphere_disjoint(double r1, const Vec3& c1, double r2, const Vec3& c2) {
  Vec3 d = c1 - c2;
  double rr = r1 + r2;
  return d.dot(d) > rr * rr;
}

Vec3 box_axis(const Quat& q, int i) {
  Vec3 axis = i == 0 ? Vec3{1, 0, 0} : i == 1 ? Vec3{0, 1, 0} : Vec3{0, 0, 1};
  return q.rotate(axis);
}

bool sphere_box_disjoint(double r, const Vec3& c, const Shape& box, const Pose& pb) {
  // Closest point on the oriented box to the sphere center.
  Vec3 d = c - pb.pos;
  Vec3 closest = pb.pos;
  double half[3] = {box.half.x, box.half.y, box.half.z};
  for (int i = 0; i < 3; ++i) {
    Vec3 axis = box_axis(pb.rot, i);
    double dist = std::clamp(d.dot(axis), -half[i], half[i]);
    closest = closest + axis * dist;
  }
  Vec3 delta = c - closest;
  return delta.dot(delta) > r * r;
}

// Separating axis test over the 15 candidate axes.
bool box_box_disjoint(const Shape& a, const Pose& pa, const Shape& b, const Pose& pb) {
  Vec3 axes_a[3] = {box_axis(pa.rot, 0), box_axis(pa.rot, 1), box_axis(pa.rot, 2)};
  Vec3 axes_b[3] = {box_axis(pb.rot, 0), box_axis(pb.rot, 1), box_axis(pb.rot, 2)};
  double half_a[3] = {a.half.x, a.half.y, a.half.z};
  double half_b[3] = {b.half.x, b.half.y, b.half.z};
  Vec3 t = pb.pos - pa.pos;
  auto separated = [&](const Vec3& axis) {
    double len = axis.norm();
    if (len < 1e-12) return false;
    Vec3 n = axis * (1.0 / len);
    double ra = 0, rb = 0;
    for (int i = 0; i < 3; ++i) {
      ra += half_a[i] * std::abs(axes_a[i].dot(n));
      rb += half_b[i] * std::abs(axes_b[i].dot(n));
    }
    return std::abs(t.dot(n)) > ra + rb;
  };
  for (int i = 0; i < 3; ++i) {
    if (separated(axes_a[i]) || separated(axes_b[i])) return true;
  }
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      Vec3 cross = {axes_a[i].y * axes_b[j].z - axes_a[i].z * axes_b[j].y,
                    axes_a[i].z * axes_b[j].x - axes_a[i].x * axes_b[j].z,
                    axes_a[i].x * axes_b[j].y - axes_a[i].y * axes_b[j].x};
      if (separated(cross)) return true;
    }
  }
  return false;
}

}  // namespace

bool shapes_disjoint(const Shape& a, const Pose& pa, const Shape& b, const Pose& pb) {
  if (a.kind == Shape::Kind::Sphere && b.kind == Shape::Kind::Sphere) {
    return sphere_sphere_disjoint(a.radius, pa.pos, b.radius, pb.pos);
  }
  if (a.kind == Shape::Kind::Sphere) return sphere_box_disjoint(a.radius, pa.pos, b, pb);
  if (b.kind == Shape::Kind::Sphere) return sphere_box_disjoint(b.radius, pb.pos, a, pa);
  return box_box_disjoint(a, pa, b, pb);
}

// ---------------------------------------------------------------------------
// Objects
// ---------------------------------------------------------------------------

namespace {

double get_const(const std::map<std::string, double>& consts, const std::string& key,
                 std::optional<double> fallback = std::nullopt) {
  auto it = consts.find(key);
  if (it != consts.end()) return it->second;
  if (fallback) return *fallback;
  throw GeomError("missing model constant '" + key + "'");
}

std::vector<Pose> part_poses(const GeomObject::Part& part, const double* p) {
  if (part.model == "point-robot-2d") {
    double z = get_const(part.consts, "z", 0.0);
    return {Pose{Quat::identity(), {p[0], p[1], z}}};
  }
  if (part.model == "pair-carrier-2d") {
    double z1 = get_const(part.consts, "z1", 0.0);
    double z2 = get_const(part.consts, "z2", 1.0);
    return {Pose{Quat::identity(), {p[0], p[1], z1}}, Pose{Quat::identity(), {p[0], p[1], z2}}};
  }
  if (part.model == "free-body-3d") {
    return {Pose{Quat::identity(), {p[0], p[1], p[2]}}};
  }
  return {};  // value spaces have no bodies
}

}  // namespace

int GeomObject::param_dim() const {
  int n = 0;
  for (const auto& part : parts) n += part.param_dim;
  return n;
}

int GeomObject::simple_count() const {
  int n = 0;
  for (const auto& part : parts) n += static_cast<int>(part.simples.size());
  return n;
}

std::vector<Shape> GeomObject::all_simples() const {
  std::vector<Shape> out;
  for (const auto& part : parts) {
    out.insert(out.end(), part.simples.begin(), part.simples.end());
  }
  return out;
}

std::vector<Pose> GeomObject::poses(const std::vector<double>& p) const {
  if (static_cast<int>(p.size()) != param_dim()) {
    throw GeomError("parameter dimension mismatch: got " + std::to_string(p.size()) +
                    ", expected " + std::to_string(param_dim()));
  }
  std::vector<Pose> out;
  int off = 0;
  for (const auto& part : parts) {
    auto poses = part_poses(part, p.data() + off);
    out.insert(out.end(), poses.begin(), poses.end());
    off += part.param_dim;
  }
  return out;
}

bool GeomObject::in_box(const std::vector<double>& p) const {
  if (static_cast<int>(p.size()) != param_dim()) return false;
  int off = 0;
  for (const auto& part : parts) {
    for (int i = 0; i < part.param_dim; ++i) {
      if (p[off + i] < part.lo[i] - 1e-12 || p[off + i] > part.hi[i] + 1e-12) return false;
    }
    if (part.model == "value-finite") {
      double v = p[off];
      if (std::abs(v - std::round(v)) > 1e-9) return false;
    }
    off += part.param_dim;
  }
  return true;
}

bool GeomObject::member(const std::vector<double>& p) const {
  if (!in_box(p)) return false;
  auto ps = poses(p);
  auto shapes = all_simples();
  for (size_t i = 0; i < shapes.size(); ++i) {
    for (size_t j = i + 1; j < shapes.size(); ++j) {
      if (!shapes_disjoint(shapes[i], ps[i], shapes[j], ps[j])) return false;
    }
  }
  return true;
}

bool GeomObject::same_simples(const GeomObject& o) const {
  auto a = all_simples();
  auto b = o.all_simples();
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (a[i].kind != b[i].kind || a[i].radius != b[i].radius || a[i].half.x != b[i].half.x ||
        a[i].half.y != b[i].half.y || a[i].half.z != b[i].half.z) {
      return false;
    }
  }
  return true;
}

namespace {

uint64_t splitmix(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

double uniform01(uint64_t& state) {
  return static_cast<double>(splitmix(state) >> 11) * 0x1.0p-53;
}

std::vector<double> sample_box(const GeomObject& obj, uint64_t& state) {
  std::vector<double> p;
  for (const auto& part : obj.parts) {
    for (int i = 0; i < part.param_dim; ++i) {
      double v = part.lo[i] + (part.hi[i] - part.lo[i]) * uniform01(state);
      if (part.model == "value-finite") v = std::round(v);
      p.push_back(v);
    }
  }
  return p;
}

}  // namespace

GeomObject instantiate_object(const std::string& model,
                              const std::map<std::string, double>& consts) {
  GeomObject obj;
  GeomObject::Part part;
  part.model = model;
  part.consts = consts;
  if (model == "point-robot-2d") {
    double radius = get_const(consts, "radius");
    if (radius <= 0) throw GeomError("point-robot-2d: radius must be positive");
    part.param_dim = 2;
    part.simples = {{Shape::Kind::Sphere, radius, {}}};
    part.lo = {get_const(consts, "x0", 0.0), get_const(consts, "y0", 0.0)};
    part.hi = {get_const(consts, "x1", 10.0), get_const(consts, "y1", 10.0)};
  } else if (model == "pair-carrier-2d") {
    double r1 = get_const(consts, "r1");
    double r2 = get_const(consts, "r2");
    if (r1 <= 0 || r2 <= 0) throw GeomError("pair-carrier-2d: radii must be positive");
    part.param_dim = 2;
    part.simples = {{Shape::Kind::Sphere, r1, {}}, {Shape::Kind::Sphere, r2, {}}};
    part.lo = {get_const(consts, "x0", 0.0), get_const(consts, "y0", 0.0)};
    part.hi = {get_const(consts, "x1", 10.0), get_const(consts, "y1", 10.0)};
  } else if (model == "free-body-3d") {
    part.param_dim = 3;
    Shape s;
    if (consts.count("radius")) {
      s.kind = Shape::Kind::Sphere;
      s.radius = get_const(consts, "radius");
      if (s.radius <= 0) throw GeomError("free-body-3d: radius must be positive");
    } else {
      s.kind = Shape::Kind::Box;
      s.half = {get_const(consts, "hx"), get_const(consts, "hy"), get_const(consts, "hz")};
      if (s.half.x <= 0 || s.half.y <= 0 || s.half.z <= 0) {
        throw GeomError("free-body-3d: half-extents must be positive");
      }
    }
    part.simples = {s};
    part.lo = {get_const(consts, "x0", 0.0), get_const(consts, "y0", 0.0),
               get_const(consts, "z0", 0.0)};
    part.hi = {get_const(consts, "x1", 10.0), get_const(consts, "y1", 10.0),
               get_const(consts, "z1", 10.0)};
  } else if (model == "value-box") {
    int dim = static_cast<int>(get_const(consts, "dim"));
    if (dim < 0) throw GeomError("value-box: dim must be nonnegative");
    part.param_dim = dim;
    for (int i = 0; i < dim; ++i) {
      part.lo.push_back(get_const(consts, "min" + std::to_string(i), 0.0));
      part.hi.push_back(get_const(consts, "max" + std::to_string(i), 10.0));
    }
  } else if (model == "value-finite") {
    int n = static_cast<int>(get_const(consts, "n"));
    if (n <= 0) throw GeomError("value-finite: n must be positive");
    part.param_dim = 1;
    part.lo = {0.0};
    part.hi = {static_cast<double>(n - 1)};
  } else {
    throw GeomError("unknown model '" + model + "'");
  }
  obj.parts.push_back(std::move(part));

  // Self-disjointness of the structure map, sampled.
  uint64_t state = 12345;
  for (int s = 0; s < 64; ++s) {
    auto p = sample_box(obj, state);
    if (!obj.in_box(p)) continue;
    auto ps = obj.poses(p);
    auto shapes = obj.all_simples();
    for (size_t i = 0; i < shapes.size(); ++i) {
      for (size_t j = i + 1; j < shapes.size(); ++j) {
        if (!shapes_disjoint(shapes[i], ps[i], shapes[j], ps[j])) {
          std::ostringstream msg;
          msg << model << ": simples " << i << " and " << j
              << " intersect at a sampled parameter point (structure-map disjointness violated)";
          throw GeomError(msg.str());
        }
      }
    }
  }
  return obj;
}

GeomObject tensor_objects(const GeomObject& x, const GeomObject& y) {
  GeomObject out = x;
  out.parts.insert(out.parts.end(), y.parts.begin(), y.parts.end());
  return out;
}

// ---------------------------------------------------------------------------
// Morphisms
// ---------------------------------------------------------------------------

GeomMorphism identity_morphism(const GeomObject& obj, double duration) {
  GeomMorphism f;
  f.dom = obj;
  f.cod = obj;
  f.duration = duration;
  f.map = [](const std::vector<double>& p) { return std::optional<std::vector<double>>(p); };
  f.path = [obj](const std::vector<double>& p, double) { return obj.poses(p); };
  return f;
}

GeomMorphism line_move(const GeomObject& obj, const Vec3& displacement, double duration) {
  if (duration < 0) throw GeomError("duration must be nonnegative");
  GeomMorphism f;
  f.dom = obj;
  f.cod = obj;
  f.duration = duration;
  int dim = obj.param_dim();
  // Displacement acts on the leading spatial coordinates of each part.
  auto shift = [obj, displacement](const std::vector<double>& p, double s) {
    std::vector<double> q = p;
    int off = 0;
    for (const auto& part : obj.parts) {
      if (part.param_dim >= 2) {
        q[off] += displacement.x * s;
        q[off + 1] += displacement.y * s;
        if (part.param_dim >= 3) q[off + 2] += displacement.z * s;
      }
      off += part.param_dim;
    }
    return q;
  };
  f.map = [obj, shift, dim](const std::vector<double>& p) -> std::optional<std::vector<double>> {
    if (static_cast<int>(p.size()) != dim || !obj.member(p)) return std::nullopt;
    auto q = shift(p, 1.0);
    if (!obj.in_box(q)) return std::nullopt;
    return q;
  };
  f.path = [obj, shift, duration](const std::vector<double>& p, double t) {
    double s = duration == 0 ? 1.0 : std::clamp(t / duration, 0.0, 1.0);
    return obj.poses(shift(p, s));
  };
  return f;
}

GeomMorphism restrict_morphism(const GeomMorphism& f, const std::vector<double>& lo,
                               const std::vector<double>& hi) {
  GeomMorphism g = f;
  auto inner = f.map;
  g.map = [inner, lo, hi](const std::vector<double>& p) -> std::optional<std::vector<double>> {
    for (size_t i = 0; i < lo.size() && i < p.size(); ++i) {
      if (p[i] < lo[i] || p[i] > hi[i]) return std::nullopt;
    }
    return inner(p);
  };
  return g;
}

GeomMorphism compose(const GeomMorphism& f, const GeomMorphism& g) {
  if (!f.cod.same_simples(g.dom) || f.cod.param_dim() != g.dom.param_dim()) {
    throw GeomError("compose: boundary objects do not match");
  }
  GeomMorphism h;
  h.dom = f.dom;
  h.cod = g.cod;
  h.duration = f.duration + g.duration;
  auto fm = f.map;
  auto gm = g.map;
  h.map = [fm, gm](const std::vector<double>& p) -> std::optional<std::vector<double>> {
    auto mid = fm(p);
    if (!mid) return std::nullopt;
    return gm(*mid);
  };
  auto fp = f.path;
  auto gp = g.path;
  double t_f = f.duration;
  h.path = [fm, fp, gp, t_f](const std::vector<double>& p, double t) {
    if (t <= t_f) return fp(p, t);
    auto mid = fm(p);
    if (!mid) throw GeomError("path evaluated where the map is undefined");
    return gp(*mid, t - t_f);
  };
  return h;
}

ValueService mk_value_service(const GeomObject& value_object) {
  if (value_object.simple_count() != 0) {
    throw GeomError("mk_value_service requires a pure value object (no simple bodies)");
  }
  const GeomObject& v = value_object;
  GeomObject vv = tensor_objects(v, v);
  int dim = v.param_dim();
  ValueService svc;

  svc.delta_m.dom = v;
  svc.delta_m.cod = vv;
  svc.delta_m.map = [dim](const std::vector<double>& p) -> std::optional<std::vector<double>> {
    std::vector<double> out = p;
    out.insert(out.end(), p.begin(), p.end());
    return out;
  };
  svc.delta_m.path = [](const std::vector<double>&, double) { return std::vector<Pose>{}; };

  svc.eps_m.dom = v;
  svc.eps_m.cod = GeomObject{};
  svc.eps_m.map = [](const std::vector<double>&) {
    return std::optional<std::vector<double>>(std::vector<double>{});
  };
  svc.eps_m.path = [](const std::vector<double>&, double) { return std::vector<Pose>{}; };

  svc.mu_m.dom = vv;
  svc.mu_m.cod = v;
  svc.mu_m.map = [dim](const std::vector<double>& p) -> std::optional<std::vector<double>> {
    for (int i = 0; i < dim; ++i) {
      if (std::abs(p[i] - p[dim + i]) > 1e-9) return std::nullopt;
    }
    return std::vector<double>(p.begin(), p.begin() + dim);
  };
  svc.mu_m.path = [](const std::vector<double>&, double) { return std::vector<Pose>{}; };
  return svc;
}

GeomMorphism tensor_value_morphisms(const GeomMorphism& f, const GeomMorphism& g) {
  if (f.duration != 0 || g.duration != 0 || f.dom.simple_count() != 0 ||
      g.dom.simple_count() != 0) {
    throw GeomError("tensor of morphisms is only defined for duration-0 value morphisms");
  }
  GeomMorphism h;
  h.dom = tensor_objects(f.dom, g.dom);
  h.cod = tensor_objects(f.cod, g.cod);
  h.duration = 0;
  int fd = f.dom.param_dim();
  auto fm = f.map;
  auto gm = g.map;
  h.map = [fm, gm, fd](const std::vector<double>& p) -> std::optional<std::vector<double>> {
    std::vector<double> pf(p.begin(), p.begin() + fd);
    std::vector<double> pg(p.begin() + fd, p.end());
    auto rf = fm(pf);
    if (!rf) return std::nullopt;
    auto rg = gm(pg);
    if (!rg) return std::nullopt;
    std::vector<double> out = *rf;
    out.insert(out.end(), rg->begin(), rg->end());
    return out;
  };
  h.path = [](const std::vector<double>&, double) { return std::vector<Pose>{}; };
  return h;
}

std::vector<Finding> check_morphism(const GeomMorphism& f, const GeomObject& x,
                                    const GeomObject& y, int samples, double dt, unsigned seed) {
  std::vector<Finding> findings;
  uint64_t state = 0x5eedULL + seed;
  auto shapes = x.all_simples();
  for (int s = 0; s < samples; ++s) {
    auto p = sample_box(x, state);
    if (!x.member(p)) continue;
    auto q = f.map(p);
    if (!q) continue;
    std::ostringstream where;
    where << "sample " << s;
    auto at0 = f.path(p, 0.0);
    auto expect0 = x.poses(p);
    for (size_t i = 0; i < at0.size(); ++i) {
      if (!pose_close(at0[i], expect0[i], 1e-9)) {
        findings.push_back({where.str(), "path start differs from the structure map"});
        break;
      }
    }
    auto atT = f.path(p, f.duration);
    auto expectT = y.poses(*q);
    for (size_t i = 0; i < atT.size(); ++i) {
      if (!pose_close(atT[i], expectT[i], 1e-9)) {
        findings.push_back({where.str(), "path end differs from the target structure map"});
        break;
      }
    }
    int steps = f.duration > 0 ? static_cast<int>(std::ceil(f.duration / dt)) : 0;
    for (int k = 0; k <= steps; ++k) {
      double t = std::min(k * dt, f.duration);
      auto poses = f.path(p, t);
      bool bad = false;
      for (size_t i = 0; i < shapes.size() && !bad; ++i) {
        for (size_t j = i + 1; j < shapes.size() && !bad; ++j) {
          if (!shapes_disjoint(shapes[i], poses[i], shapes[j], poses[j])) {
            std::ostringstream msg;
            msg << "bodies " << i << " and " << j << " intersect at t=" << t;
            findings.push_back({where.str(), msg.str()});
            bad = true;
          }
        }
      }
      if (bad) break;
    }
  }
  return findings;
}

bool leq_morphism(const GeomMorphism& f, const GeomMorphism& g, int samples, unsigned seed) {
  if (!f.dom.same_simples(g.dom) || f.dom.param_dim() != g.dom.param_dim() ||
      !f.cod.same_simples(g.cod) || f.cod.param_dim() != g.cod.param_dim()) {
    throw GeomError("leq_morphism: boundary objects do not match");
  }
  if (f.duration != g.duration) return false;
  uint64_t state = 0xfeedULL + seed;
  for (int s = 0; s < samples; ++s) {
    auto p = sample_box(f.dom, state);
    auto rf = f.map(p);
    if (!rf) continue;
    auto rg = g.map(p);
    if (!rg) return false;
    for (size_t i = 0; i < rf->size(); ++i) {
      if (std::abs((*rf)[i] - (*rg)[i]) > 1e-9) return false;
    }
    for (int k = 0; k <= 4; ++k) {
      double t = f.duration * k / 4.0;
      auto pf = f.path(p, t);
      auto pg = g.path(p, t);
      for (size_t i = 0; i < pf.size(); ++i) {
        if (!pose_close(pf[i], pg[i], 1e-9)) return false;
      }
    }
  }
  return true;
}

// ---------------------------------------------------------------------------
// Bindings and plan evaluation
// ---------------------------------------------------------------------------

GeomBinding parse_bindings(std::string_view text, const Signature& sig) {
  GeomBinding bind;
  int line_no = 0;
  size_t pos = 0;
  while (pos < text.size()) {
    size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(pos, end - pos));
    pos = end + 1;
    line_no++;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;

    std::istringstream in(line);
    std::string head;
    in >> head;
    auto parse_consts = [&](const std::string& rest) {
      std::map<std::string, double> consts;
      size_t open = rest.find('(');
      if (open == std::string::npos) return consts;
      size_t close = rest.rfind(')');
      std::string body = rest.substr(open + 1, close - open - 1);
      std::istringstream cs(body);
      std::string item;
      while (std::getline(cs, item, ',')) {
        size_t eq = item.find('=');
        if (eq == std::string::npos) {
          throw ParseError("expected key=value in constants", line_no, 1);
        }
        std::string key = item.substr(0, eq);
        key.erase(std::remove_if(key.begin(), key.end(), ::isspace), key.end());
        consts[key] = std::stod(item.substr(eq + 1));
      }
      return consts;
    };

    if (head == "bind") {
      std::string kind, name, eq, target;
      in >> kind >> name >> eq >> target;
      if (eq != "=") throw ParseError("expected: bind obj|gen <name> = <model> (...)", line_no, 1);
      std::string rest;
      std::getline(in, rest);
      auto consts = parse_consts(target + rest);
      size_t paren = target.find('(');
      if (paren != std::string::npos) target = target.substr(0, paren);
      if (kind == "obj") {
        if (!sig.find_object(name)) throw ParseError("unknown object '" + name + "'", line_no, 1);
        bind.objects[name] = instantiate_object(target, consts);
      } else if (kind == "gen") {
        if (!sig.find_generator(name)) {
          throw ParseError("unknown generator '" + name + "'", line_no, 1);
        }
        bind.generators[name] = {target, consts};
      } else {
        throw ParseError("expected 'bind obj' or 'bind gen'", line_no, 1);
      }
    } else if (head == "init") {
      std::string name, eq, rest;
      in >> name >> eq;
      std::getline(in, rest);
      size_t open = rest.find('(');
      size_t close = rest.rfind(')');
      if (eq != "=" || open == std::string::npos || close == std::string::npos) {
        throw ParseError("expected: init <obj> = (v, v, ...)", line_no, 1);
      }
      std::vector<double> point;
      std::istringstream vs(rest.substr(open + 1, close - open - 1));
      std::string item;
      while (std::getline(vs, item, ',')) {
        if (item.find_first_not_of(" \t") == std::string::npos) continue;
        point.push_back(std::stod(item));
      }
      bind.init[name] = point;
    } else {
      throw ParseError("unknown binding declaration '" + head + "'", line_no, 1);
    }
  }
  return bind;
}

namespace {

struct StepEval {
  std::vector<std::vector<double>> outs;
  double duration = 0;
  // Parameter point of each output wire at time t in [0, duration].
  std::function<std::vector<std::vector<double>>(double)> at;
};

std::optional<StepEval> eval_family(const GeomBinding::GenBinding& fam,
                                    const std::vector<std::vector<double>>& ins) {
  auto consts = fam.consts;
  if (fam.family == "move-2d") {
    // (entity p, target l) -> entity at l, straight line.
    const auto& p = ins.at(0);
    const auto& l = ins.at(1);
    double duration = consts.count("T") ? consts.at("T") : 1.0;
    StepEval ev;
    ev.outs = {l};
    ev.duration = duration;
    ev.at = [p, l, duration](double t) {
      double s = duration == 0 ? 1.0 : std::clamp(t / duration, 0.0, 1.0);
      std::vector<double> q(p.size());
      for (size_t i = 0; i < p.size(); ++i) q[i] = p[i] + (l[i] - p[i]) * s;
      return std::vector<std::vector<double>>{q};
    };
    return ev;
  }
  if (fam.family == "merge-2d") {
    const auto& p = ins.at(0);
    const auto& q = ins.at(1);
    for (size_t i = 0; i < p.size(); ++i) {
      if (std::abs(p[i] - q[i]) > 1e-9) return std::nullopt;
    }
    StepEval ev;
    ev.outs = {p};
    ev.duration = consts.count("T") ? consts.at("T") : 0.0;
    ev.at = [p](double) { return std::vector<std::vector<double>>{p}; };
    return ev;
  }
  if (fam.family == "split-2d") {
    const auto& p = ins.at(0);
    StepEval ev;
    ev.outs = {p, p};
    ev.duration = consts.count("T") ? consts.at("T") : 0.0;
    ev.at = [p](double) { return std::vector<std::vector<double>>{p, p}; };
    return ev;
  }
  if (fam.family == "hold") {
    StepEval ev;
    ev.outs = ins;
    ev.duration = consts.count("T") ? consts.at("T") : 0.0;
    ev.at = [ins](double) { return ins; };
    return ev;
  }
  throw GeomError("unknown morphism family '" + fam.family + "'");
}

std::string fmt_point(const std::vector<double>& p) {
  std::ostringstream out;
  out << "(";
  for (size_t i = 0; i < p.size(); ++i) {
    if (i) out << ", ";
    out << p[i];
  }
  out << ")";
  return out.str();
}

}  // namespace

GeomTrace evaluate_plan(const Diagram& d, const Signature& sig, const GeomBinding& bind,
                        const std::vector<std::string>& input_names,
                        const std::vector<std::vector<std::string>>& step_outputs, double dt) {
  GeomTrace trace;
  (void)sig;
  std::map<int, std::vector<double>> params;  // wire -> parameter point
  std::map<int, std::string> names;           // wire -> label

  auto object_for = [&](const std::string& type) -> const GeomObject& {
    auto it = bind.objects.find(type);
    if (it == bind.objects.end()) throw GeomError("no model bound for object '" + type + "'");
    return it->second;
  };

  if (input_names.size() != d.inputs.size()) {
    throw GeomError("input name list does not match diagram boundary");
  }
  for (size_t i = 0; i < d.inputs.size(); ++i) {
    int w = d.inputs[i];
    auto it = bind.init.find(input_names[i]);
    if (it == bind.init.end()) {
      throw GeomError("no initial parameter point for input '" + input_names[i] + "'");
    }
    const GeomObject& obj = object_for(d.wires[w].type);
    if (static_cast<int>(it->second.size()) != obj.param_dim()) {
      throw GeomError("initial point for '" + input_names[i] + "' has wrong dimension");
    }
    if (!obj.member(it->second)) {
      throw GeomError("initial point for '" + input_names[i] + "' is outside the parameter space");
    }
    params[w] = it->second;
    names[w] = input_names[i];
  }

  double clock = 0;
  auto emit_rows = [&](double t) {
    for (const auto& [w, p] : params) {
      const GeomObject& obj = object_for(d.wires[w].type);
      if (obj.simple_count() == 0) continue;
      auto poses = obj.poses(p);
      for (size_t i = 0; i < poses.size(); ++i) {
        std::string label = names[w];
        if (poses.size() > 1) label += "[" + std::to_string(i) + "]";
        trace.rows.push_back({t, label, poses[i]});
      }
    }
  };
  auto check_collisions = [&](double t, int moving_wire,
                              const std::vector<std::pair<int, std::vector<double>>>& moving) {
    // All live bodies at time t: moving wires at their path point, others parked.
    std::vector<std::pair<std::string, std::pair<Shape, Pose>>> bodies;
    auto add = [&](int w, const std::vector<double>& p) {
      const GeomObject& obj = object_for(d.wires[w].type);
      auto shapes = obj.all_simples();
      auto poses = obj.poses(p);
      for (size_t i = 0; i < shapes.size(); ++i) {
        bodies.push_back({names[w], {shapes[i], poses[i]}});
      }
    };
    for (const auto& [w, p] : params) {
      bool is_moving = false;
      for (const auto& [mw, mp] : moving) {
        if (mw == w) is_moving = true;
      }
      if (!is_moving) add(w, p);
    }
    for (const auto& [mw, mp] : moving) add(mw, mp);
    (void)moving_wire;
    for (size_t i = 0; i < bodies.size(); ++i) {
      for (size_t j = i + 1; j < bodies.size(); ++j) {
        if (!shapes_disjoint(bodies[i].second.first, bodies[i].second.second,
                             bodies[j].second.first, bodies[j].second.second)) {
          std::ostringstream msg;
          msg << bodies[i].first << " and " << bodies[j].first << " intersect at t=" << t;
          trace.findings.push_back({"collision", msg.str()});
        }
      }
    }
  };

  emit_rows(0.0);
  check_collisions(0.0, -1, {});
  int gen_index = 0;
  for (int node : topo_order(d)) {
    const DiagramNode& n = d.nodes[node];
    auto in_param = [&](int port) -> std::vector<double> {
      auto it = params.find(n.ins[port]);
      if (it == params.end()) throw GeomError("internal: wire evaluated before its producer");
      return it->second;
    };
    auto pass = [&](int out_port, const std::vector<double>& p, const std::string& label) {
      params[n.outs[out_port]] = p;
      names[n.outs[out_port]] = label;
    };
    switch (n.kind) {
      case NodeKind::Gamma: {
        auto p = in_param(0);
        std::string label = names[n.ins[0]];
        params.erase(n.ins[0]);
        pass(0, p, label);
        pass(1, p, label);
        break;
      }
      case NodeKind::Phi:
      case NodeKind::Mu: {
        auto p = in_param(0);
        auto v = in_param(1);
        std::string label = names[n.ins[0]];
        if (p.size() != v.size()) {
          throw GeomError("guard at " + std::string(node_kind_name(n.kind)) + "[" + n.payload +
                          "]: dimension mismatch");
        }
        for (size_t i = 0; i < p.size(); ++i) {
          if (std::abs(p[i] - v[i]) > 1e-9) {
            throw GeomError("guard failed at " + std::string(node_kind_name(n.kind)) + "[" +
                            n.payload + "] on " + label + ": " + fmt_point(p) +
                            " != " + fmt_point(v));
          }
        }
        params.erase(n.ins[0]);
        params.erase(n.ins[1]);
        pass(0, p, label);
        break;
      }
      case NodeKind::Delta: {
        auto p = in_param(0);
        std::string label = names[n.ins[0]];
        params.erase(n.ins[0]);
        pass(0, p, label);
        pass(1, p, label);
        break;
      }
      case NodeKind::Eps: {
        params.erase(n.ins[0]);
        break;
      }
      case NodeKind::Spider: {
        auto p = in_param(0);
        std::string label = names[n.ins[0]];
        for (size_t i = 1; i < n.ins.size(); ++i) {
          auto q = in_param(static_cast<int>(i));
          for (size_t k = 0; k < p.size(); ++k) {
            if (std::abs(p[k] - q[k]) > 1e-9) {
              throw GeomError("guard failed at spider[" + n.payload + "]: " + fmt_point(p) +
                              " != " + fmt_point(q));
            }
          }
        }
        for (int w : n.ins) params.erase(w);
        for (size_t i = 0; i < n.outs.size(); ++i) pass(static_cast<int>(i), p, label);
        break;
      }
      case NodeKind::Generator: {
        auto fam_it = bind.generators.find(n.payload);
        if (fam_it == bind.generators.end()) {
          throw GeomError("no morphism family bound for generator '" + n.payload + "'");
        }
        std::vector<std::vector<double>> ins;
        std::vector<std::string> in_labels;
        for (size_t i = 0; i < n.ins.size(); ++i) {
          ins.push_back(in_param(static_cast<int>(i)));
          in_labels.push_back(names[n.ins[i]]);
        }
        auto ev = eval_family(fam_it->second, ins);
        if (!ev) {
          std::string detail;
          for (size_t i = 0; i < ins.size(); ++i) {
            if (i) detail += ", ";
            detail += in_labels[i] + "=" + fmt_point(ins[i]);
          }
          throw GeomError("step map of '" + n.payload + "' undefined at " + detail);
        }
        trace.steps.push_back(n.payload);
        std::vector<std::string> out_labels;
        if (gen_index < static_cast<int>(step_outputs.size())) {
          out_labels = step_outputs[gen_index];
        }
        gen_index++;
        for (int w : n.ins) params.erase(w);
        // Sampled motion: outputs follow the family path, everything else parks.
        if (ev->duration > 0) {
          int steps = static_cast<int>(std::ceil(ev->duration / dt));
          for (int k = 1; k <= steps; ++k) {
            double t = std::min(k * dt, ev->duration);
            auto pts = ev->at(t);
            std::vector<std::pair<int, std::vector<double>>> moving;
            for (size_t c = 0; c < n.outs.size(); ++c) {
              moving.push_back({n.outs[c], pts[c]});
              std::string label = c < out_labels.size() ? out_labels[c] : n.payload;
              const GeomObject& obj = object_for(d.wires[n.outs[c]].type);
              if (obj.simple_count() > 0) {
                auto poses = obj.poses(pts[c]);
                for (size_t i = 0; i < poses.size(); ++i) {
                  std::string row_label = label;
                  if (poses.size() > 1) row_label += "[" + std::to_string(i) + "]";
                  trace.rows.push_back({clock + t, row_label, poses[i]});
                }
              }
            }
            check_collisions(clock + t, -1, moving);
            // Parked bodies are also reported so the trace is complete.
            for (const auto& [w, p] : params) {
              const GeomObject& obj = object_for(d.wires[w].type);
              if (obj.simple_count() == 0) continue;
              auto poses = obj.poses(p);
              for (size_t i = 0; i < poses.size(); ++i) {
                std::string label = names[w];
                if (poses.size() > 1) label += "[" + std::to_string(i) + "]";
                trace.rows.push_back({clock + t, label, poses[i]});
              }
            }
          }
        }
        clock += ev->duration;
        for (size_t c = 0; c < n.outs.size(); ++c) {
          params[n.outs[c]] = ev->outs[c];
          names[n.outs[c]] = c < out_labels.size() ? out_labels[c] : n.payload;
        }
        break;
      }
    }
  }

  for (int w : d.outputs) {
    auto it = params.find(w);
    if (it == params.end()) throw GeomError("internal: missing output parameter");
    trace.final_params.push_back({names[w], it->second});
  }
  return trace;
}

}  // namespace attrcat
