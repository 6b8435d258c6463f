#pragma once

#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "attrcat/diagram.hpp"
#include "attrcat/signature.hpp"

namespace attrcat {

class GeomError : public std::runtime_error {
 public:
  explicit GeomError(const std::string& message) : std::runtime_error(message) {}
};

struct Vec3 {
  double x = 0, y = 0, z = 0;
  Vec3 operator+(const Vec3& o) const { return {x + o.x, y + o.y, z + o.z}; }
  Vec3 operator-(const Vec3& o) const { return {x - o.x, y - o.y, z - o.z}; }
  Vec3 operator*(double s) const { return {x * s, y * s, z * s}; }
  double dot(const Vec3& o) const { return x * o.x + y * o.y + z * o.z; }
  double norm() const;
};

/// Unit quaternion (w, x, y, z); kept normalized within 1e-9.
struct Quat {
  double w = 1, x = 0, y = 0, z = 0;
  static Quat identity() { return {}; }
  Quat normalized() const;
  Vec3 rotate(const Vec3& v) const;
  static Quat slerp(const Quat& a, const Quat& b, double t);
};

struct Pose {
  Quat rot;
  Vec3 pos;
};

bool pose_close(const Pose& a, const Pose& b, double tol);

struct Shape {
  enum class Kind { Sphere, Box } kind = Kind::Sphere;
  double radius = 0;
  Vec3 half;  // box half-extents
};

/// Exact primitive-pair disjointness: sphere-sphere by distance, box pairs
/// by separating axes, sphere-box by closest point.
bool shapes_disjoint(const Shape& a, const Pose& pa, const Shape& b, const Pose& pb);

/// Object of the geometric semantics: simple bodies, a box-bounded
/// parameter space with constraints, and a structure map to poses.
/// Tensor products concatenate parts; membership additionally requires the
/// transformed simples to be pairwise disjoint.
struct GeomObject {
  struct Part {
    std::string model;
    std::map<std::string, double> consts;
    int param_dim = 0;
    std::vector<Shape> simples;
    std::vector<double> lo, hi;
  };
  std::vector<Part> parts;

  int param_dim() const;
  int simple_count() const;
  std::vector<Shape> all_simples() const;
  /// Structure map; requires p in the bounding box (not full membership).
  std::vector<Pose> poses(const std::vector<double>& p) const;
  bool in_box(const std::vector<double>& p) const;
  bool member(const std::vector<double>& p) const;
  bool same_simples(const GeomObject& o) const;
};

/// Built-in models: point-robot-2d(radius[,z,x0,y0,x1,y1]),
/// pair-carrier-2d(r1,z1,r2,z2[,bounds]), free-body-3d(radius|hx,hy,hz[,bounds]),
/// value-box(dim,min0,max0,...), value-finite(n).
GeomObject instantiate_object(const std::string& model,
                              const std::map<std::string, double>& consts);

GeomObject tensor_objects(const GeomObject& x, const GeomObject& y);

/// Morphism: duration, partial parameter map, and a timed pose path defined
/// exactly where the map is.
struct GeomMorphism {
  GeomObject dom, cod;
  double duration = 0;
  std::function<std::optional<std::vector<double>>(const std::vector<double>&)> map;
  std::function<std::vector<Pose>(const std::vector<double>&, double)> path;
};

GeomMorphism identity_morphism(const GeomObject& obj, double duration = 0);
/// Straight-line translation of every body by `displacement` over `duration`.
GeomMorphism line_move(const GeomObject& obj, const Vec3& displacement, double duration);
/// Restricts definedness to a sub-box of the parameter space.
GeomMorphism restrict_morphism(const GeomMorphism& f, const std::vector<double>& lo,
                               const std::vector<double>& hi);

GeomMorphism compose(const GeomMorphism& f, const GeomMorphism& g);

/// delta, eps, mu of the canonical partial-function data service on a pure
/// value object (k = 0), all with duration 0.
struct ValueService {
  GeomMorphism delta_m;
  GeomMorphism eps_m;
  GeomMorphism mu_m;
};
ValueService mk_value_service(const GeomObject& value_object);

/// Tensor of duration-0 value morphisms (no bodies, no time, so the
/// interchange obstruction does not arise).
GeomMorphism tensor_value_morphisms(const GeomMorphism& f, const GeomMorphism& g);

std::vector<Finding> check_morphism(const GeomMorphism& f, const GeomObject& x,
                                    const GeomObject& y, int samples, double dt,
                                    unsigned seed = 0);

bool leq_morphism(const GeomMorphism& f, const GeomMorphism& g, int samples, unsigned seed = 0);

/// Model bindings for evaluating plan diagrams.
struct GeomBinding {
  std::map<std::string, GeomObject> objects;  // signature object -> model
  struct GenBinding {
    std::string family;  // move-2d | merge-2d | split-2d | hold
    std::map<std::string, double> consts;
  };
  std::map<std::string, GenBinding> generators;
  std::map<std::string, std::vector<double>> init;  // problem object -> point
};

/// Parses `bind obj`, `bind gen`, and `init` lines.
GeomBinding parse_bindings(std::string_view text, const Signature& sig);

struct GeomTrace {
  struct Row {
    double t;
    std::string object;
    Pose pose;
  };
  std::vector<std::string> steps;  // generator names in firing order
  std::vector<Row> rows;
  std::vector<std::pair<std::string, std::vector<double>>> final_params;  // boundary outputs
  std::vector<Finding> findings;  // collision reports
};

/// Folds a plan-shaped diagram top-to-bottom over the bound models.
/// `input_names` label boundary inputs; `step_outputs` name the codomain
/// wires of each generator node in order. Data nodes act by copy/discard
/// and mu/chi nodes as equality guards; a failed guard or undefined step
/// map aborts with a GeomError naming the node and values.
GeomTrace evaluate_plan(const Diagram& d, const Signature& sig, const GeomBinding& bind,
                        const std::vector<std::string>& input_names,
                        const std::vector<std::vector<std::string>>& step_outputs, double dt);

}  // namespace attrcat
