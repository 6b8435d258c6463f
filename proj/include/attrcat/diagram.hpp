#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "attrcat/signature.hpp"
#include "attrcat/term.hpp"

namespace attrcat {

/// Node kinds of the port graph. Mu/Delta/Eps are the data-service
/// primitives as written; Spider is the canonical fused form produced by
/// normalization (m >= 1 unordered inputs, n >= 0 unordered outputs).
enum class NodeKind { Generator, Mu, Delta, Eps, Gamma, Phi, Spider };

const char* node_kind_name(NodeKind kind);

/// Wire endpoint: node == -1 means the diagram boundary, with `port` the
/// index into the boundary list; otherwise `port` indexes the node's
/// ordered in/out list.
struct WireEnd {
  int node = -1;
  int port = 0;
  bool operator==(const WireEnd&) const = default;
};

struct Wire {
  std::string type;  // object name
  WireEnd src;       // boundary input or node output
  WireEnd dst;       // boundary output or node input
  bool alive = true;
};

struct DiagramNode {
  NodeKind kind;
  std::string payload;    // generator name, attribute name, or data object
  std::vector<int> ins;   // wire ids, ordered (unordered legs for Spider)
  std::vector<int> outs;
  bool alive = true;
};

struct BoundaryType {
  std::vector<std::string> inputs;
  std::vector<std::string> outputs;
  bool operator==(const BoundaryType&) const = default;
};

/// Acyclic typed port graph with ordered boundary. Every port is the
/// endpoint of exactly one wire; symmetry is wire crossings only.
struct Diagram {
  std::vector<DiagramNode> nodes;
  std::vector<Wire> wires;
  std::vector<int> inputs;   // wire ids
  std::vector<int> outputs;  // wire ids

  int add_node(NodeKind kind, std::string payload);
  int add_wire(std::string type);
  void kill_node(int node);
  void kill_wire(int wire);
  /// Drops dead nodes/wires and renumbers densely; rebuilds port lists.
  void compact();
  int live_node_count() const;
  /// Connect helpers keep node port lists and wire endpoints in sync.
  void set_src(int wire, int node, int port);
  void set_dst(int wire, int node, int port);
};

class DiagramError : public std::runtime_error {
 public:
  explicit DiagramError(const std::string& message) : std::runtime_error(message) {}
};

Diagram build_diagram(const Term& term, const Signature& sig);
BoundaryType boundary(const Diagram& d);
std::vector<Finding> validate_diagram(const Diagram& d, const Signature& sig);

/// Syntactic identity up to a node/wire bijection preserving kinds, port
/// order (spider legs are unordered), and boundary order.
bool iso_check(const Diagram& a, const Diagram& b);

/// Refinement hash compatible with iso_check: iso diagrams hash equal.
uint64_t diagram_key(const Diagram& d);

/// Topological order of live nodes (deterministic). Throws on a cycle.
std::vector<int> topo_order(const Diagram& d);

}  // namespace attrcat
