#include "attrcat/diagram.hpp"

#include <algorithm>
#include <map>
#include <queue>
#include <set>

namespace attrcat {

const char* node_kind_name(NodeKind kind) {
  switch (kind) {
    case NodeKind::Generator: return "gen";
    case NodeKind::Mu: return "mu";
    case NodeKind::Delta: return "delta";
    case NodeKind::Eps: return "eps";
    case NodeKind::Gamma: return "gamma";
    case NodeKind::Phi: return "phi";
    case NodeKind::Spider: return "spider";
  }
  return "?";
}

int Diagram::add_node(NodeKind kind, std::string payload) {
  nodes.push_back({kind, std::move(payload), {}, {}, true});
  return static_cast<int>(nodes.size()) - 1;
}

int Diagram::add_wire(std::string type) {
  wires.push_back({std::move(type), {}, {}, true});
  return static_cast<int>(wires.size()) - 1;
}

void Diagram::kill_node(int node) { nodes[node].alive = false; }
void Diagram::kill_wire(int wire) { wires[wire].alive = false; }

void Diagram::set_src(int wire, int node, int port) {
  wires[wire].src = {node, port};
  if (node >= 0) {
    if (static_cast<int>(nodes[node].outs.size()) <= port) nodes[node].outs.resize(port + 1, -1);
    nodes[node].outs[port] = wire;
  }
}

void Diagram::set_dst(int wire, int node, int port) {
  wires[wire].dst = {node, port};
  if (node >= 0) {
    if (static_cast<int>(nodes[node].ins.size()) <= port) nodes[node].ins.resize(port + 1, -1);
    nodes[node].ins[port] = wire;
  }
}

int Diagram::live_node_count() const {
  int n = 0;
  for (const auto& node : nodes) {
    if (node.alive) n++;
  }
  return n;
}

void Diagram::compact() {
  std::vector<int> node_map(nodes.size(), -1);
  std::vector<int> wire_map(wires.size(), -1);
  std::vector<DiagramNode> new_nodes;
  std::vector<Wire> new_wires;
  for (size_t i = 0; i < nodes.size(); ++i) {
    if (nodes[i].alive) {
      node_map[i] = static_cast<int>(new_nodes.size());
      new_nodes.push_back(nodes[i]);
    }
  }
  for (size_t i = 0; i < wires.size(); ++i) {
    if (wires[i].alive) {
      wire_map[i] = static_cast<int>(new_wires.size());
      new_wires.push_back(wires[i]);
    }
  }
  for (auto& w : new_wires) {
    if (w.src.node >= 0) w.src.node = node_map[w.src.node];
    if (w.dst.node >= 0) w.dst.node = node_map[w.dst.node];
  }
  for (auto& n : new_nodes) {
    for (auto& w : n.ins) w = wire_map[w];
    for (auto& w : n.outs) w = wire_map[w];
  }
  for (auto& w : inputs) w = wire_map[w];
  for (auto& w : outputs) w = wire_map[w];
  // Boundary ports renumber with their position.
  nodes = std::move(new_nodes);
  wires = std::move(new_wires);
  for (size_t i = 0; i < inputs.size(); ++i) wires[inputs[i]].src = {-1, static_cast<int>(i)};
  for (size_t i = 0; i < outputs.size(); ++i) wires[outputs[i]].dst = {-1, static_cast<int>(i)};
}

namespace {

void append_graph(Diagram& into, const Diagram& from, std::vector<int>& wire_map) {
  int node_off = static_cast<int>(into.nodes.size());
  int wire_off = static_cast<int>(into.wires.size());
  wire_map.assign(from.wires.size(), -1);
  for (const auto& n : from.nodes) {
    DiagramNode copy = n;
    for (auto& w : copy.ins) w += wire_off;
    for (auto& w : copy.outs) w += wire_off;
    into.nodes.push_back(std::move(copy));
  }
  for (size_t i = 0; i < from.wires.size(); ++i) {
    Wire copy = from.wires[i];
    if (copy.src.node >= 0) copy.src.node += node_off;
    if (copy.dst.node >= 0) copy.dst.node += node_off;
    into.wires.push_back(std::move(copy));
    wire_map[i] = wire_off + static_cast<int>(i);
  }
}

Diagram build_rec(const Term& term, const Signature& sig);

Diagram build_leaf_data(NodeKind kind, const std::string& data, const Signature& sig,
                        const Term& term) {
  const ObjectDecl* obj = sig.find_object(data);
  if (!obj) throw DiagramError("unknown object '" + data + "'");
  if (obj->sort != Sort::Data) {
    throw DiagramError("data primitive '" + std::string(node_kind_name(kind)) +
                       "' on non-data object '" + data + "'");
  }
  (void)term;
  Diagram d;
  int node = d.add_node(kind, data);
  int n_in = kind == NodeKind::Mu ? 2 : 1;
  int n_out = kind == NodeKind::Mu ? 1 : (kind == NodeKind::Delta ? 2 : 0);
  for (int i = 0; i < n_in; ++i) {
    int w = d.add_wire(data);
    d.wires[w].src = {-1, i};
    d.set_dst(w, node, i);
    d.inputs.push_back(w);
  }
  for (int i = 0; i < n_out; ++i) {
    int w = d.add_wire(data);
    d.set_src(w, node, i);
    d.wires[w].dst = {-1, i};
    d.outputs.push_back(w);
  }
  return d;
}

// gamma as a node: Delta for the implicit copy attribute, Gamma otherwise.
// Out port 0 is the carrier continuation, port 1 the retrieved value.
int add_gamma_node(Diagram& d, const AttributeDecl& attr) {
  if (attr.implicit_copy) return d.add_node(NodeKind::Delta, attr.value);
  return d.add_node(NodeKind::Gamma, attr.name);
}

int add_phi_node(Diagram& d, const AttributeDecl& attr) {
  if (attr.implicit_copy) return d.add_node(NodeKind::Mu, attr.value);
  return d.add_node(NodeKind::Phi, attr.name);
}

const AttributeDecl& lookup_attr(const Signature& sig, const std::string& name) {
  const AttributeDecl* attr = sig.find_attribute(name);
  if (!attr) {
    throw DiagramError("unknown attribute '" + name +
                       "' (use copy_<D> for the implicit copy attribute)");
  }
  return *attr;
}

Diagram build_rec(const Term& term, const Signature& sig) {
  switch (term.kind) {
    case Term::Kind::Id: {
      const ObjectDecl* obj = sig.find_object(term.args[0]);
      if (!obj) throw DiagramError("unknown object '" + term.args[0] + "'");
      Diagram d;
      int w = d.add_wire(term.args[0]);
      d.wires[w].src = {-1, 0};
      d.wires[w].dst = {-1, 0};
      d.inputs.push_back(w);
      d.outputs.push_back(w);
      return d;
    }
    case Term::Kind::Swap: {
      for (const auto& name : term.args) {
        if (!sig.find_object(name)) throw DiagramError("unknown object '" + name + "'");
      }
      Diagram d;
      int w0 = d.add_wire(term.args[0]);
      int w1 = d.add_wire(term.args[1]);
      d.wires[w0].src = {-1, 0};
      d.wires[w1].src = {-1, 1};
      d.wires[w0].dst = {-1, 1};
      d.wires[w1].dst = {-1, 0};
      d.inputs = {w0, w1};
      d.outputs = {w1, w0};
      return d;
    }
    case Term::Kind::Mu:
      return build_leaf_data(NodeKind::Mu, term.args[0], sig, term);
    case Term::Kind::Delta:
      return build_leaf_data(NodeKind::Delta, term.args[0], sig, term);
    case Term::Kind::Eps:
      return build_leaf_data(NodeKind::Eps, term.args[0], sig, term);
    case Term::Kind::Get: {
      const AttributeDecl& attr = lookup_attr(sig, term.args[0]);
      Diagram d;
      int node = add_gamma_node(d, attr);
      int w_in = d.add_wire(attr.carrier);
      d.wires[w_in].src = {-1, 0};
      d.set_dst(w_in, node, 0);
      int w_m = d.add_wire(attr.carrier);
      d.set_src(w_m, node, 0);
      d.wires[w_m].dst = {-1, 0};
      int w_d = d.add_wire(attr.value);
      d.set_src(w_d, node, 1);
      d.wires[w_d].dst = {-1, 1};
      d.inputs = {w_in};
      d.outputs = {w_m, w_d};
      return d;
    }
    case Term::Kind::Set: {
      const AttributeDecl& attr = lookup_attr(sig, term.args[0]);
      Diagram d;
      int node = add_phi_node(d, attr);
      int w_m = d.add_wire(attr.carrier);
      d.wires[w_m].src = {-1, 0};
      d.set_dst(w_m, node, 0);
      int w_d = d.add_wire(attr.value);
      d.wires[w_d].src = {-1, 1};
      d.set_dst(w_d, node, 1);
      int w_out = d.add_wire(attr.carrier);
      d.set_src(w_out, node, 0);
      d.wires[w_out].dst = {-1, 0};
      d.inputs = {w_m, w_d};
      d.outputs = {w_out};
      return d;
    }
    case Term::Kind::Chi: {
      const AttributeDecl& a1 = lookup_attr(sig, term.args[0]);
      const AttributeDecl& a2 = lookup_attr(sig, term.args[1]);
      if (a1.value != a2.value) {
        throw DiagramError("chi between attributes of different data services: " + a1.name +
                           " vs " + a2.name);
      }
      Diagram d;
      int g1 = add_gamma_node(d, a1);
      int g2 = add_gamma_node(d, a2);
      int mu = d.add_node(NodeKind::Mu, a1.value);
      int eps = d.add_node(NodeKind::Eps, a1.value);
      int in0 = d.add_wire(a1.carrier);
      d.wires[in0].src = {-1, 0};
      d.set_dst(in0, g1, 0);
      int in1 = d.add_wire(a2.carrier);
      d.wires[in1].src = {-1, 1};
      d.set_dst(in1, g2, 0);
      int out0 = d.add_wire(a1.carrier);
      d.set_src(out0, g1, 0);
      d.wires[out0].dst = {-1, 0};
      int out1 = d.add_wire(a2.carrier);
      d.set_src(out1, g2, 0);
      d.wires[out1].dst = {-1, 1};
      int d1 = d.add_wire(a1.value);
      d.set_src(d1, g1, 1);
      d.set_dst(d1, mu, 0);
      int d2 = d.add_wire(a2.value);
      d.set_src(d2, g2, 1);
      d.set_dst(d2, mu, 1);
      int dm = d.add_wire(a1.value);
      d.set_src(dm, mu, 0);
      d.set_dst(dm, eps, 0);
      d.inputs = {in0, in1};
      d.outputs = {out0, out1};
      return d;
    }
    case Term::Kind::Gen: {
      const GeneratorDecl* gen = sig.find_generator(term.args[0]);
      if (!gen) throw DiagramError("unknown generator '" + term.args[0] + "'");
      Diagram d;
      int node = d.add_node(NodeKind::Generator, gen->name);
      for (size_t i = 0; i < gen->domain.size(); ++i) {
        int w = d.add_wire(gen->domain[i]);
        d.wires[w].src = {-1, static_cast<int>(i)};
        d.set_dst(w, node, static_cast<int>(i));
        d.inputs.push_back(w);
      }
      for (size_t i = 0; i < gen->codomain.size(); ++i) {
        int w = d.add_wire(gen->codomain[i]);
        d.set_src(w, node, static_cast<int>(i));
        d.wires[w].dst = {-1, static_cast<int>(i)};
        d.outputs.push_back(w);
      }
      return d;
    }
    case Term::Kind::Seq: {
      Diagram a = build_rec(*term.left, sig);
      Diagram b = build_rec(*term.right, sig);
      BoundaryType ba = boundary(a);
      BoundaryType bb = boundary(b);
      if (ba.outputs != bb.inputs) {
        std::string lhs, rhs;
        for (const auto& t : ba.outputs) lhs += (lhs.empty() ? "" : "*") + t;
        for (const auto& t : bb.inputs) rhs += (rhs.empty() ? "" : "*") + t;
        throw DiagramError("type mismatch in ';' composition: " + (lhs.empty() ? "I" : lhs) +
                           " vs " + (rhs.empty() ? "I" : rhs) + " (line " +
                           std::to_string(term.line) + ")");
      }
      std::vector<int> wire_map;
      Diagram out = a;
      append_graph(out, b, wire_map);
      std::vector<int> a_outs = out.outputs;
      out.outputs.clear();
      for (int w : b.outputs) out.outputs.push_back(wire_map[w]);
      for (size_t i = 0; i < a_outs.size(); ++i) {
        // Splice a's output wire onto b's input wire's consumer.
        int w_out = a_outs[i];
        int w_in = wire_map[b.inputs[i]];
        WireEnd dst = out.wires[w_in].dst;
        out.wires[w_out].dst = dst;
        if (dst.node >= 0) {
          out.nodes[dst.node].ins[dst.port] = w_out;
        } else {
          out.outputs[dst.port] = w_out;  // through-wire of b
        }
        out.kill_wire(w_in);
      }
      out.compact();
      return out;
    }
    case Term::Kind::Par: {
      Diagram a = build_rec(*term.left, sig);
      Diagram b = build_rec(*term.right, sig);
      Diagram out = a;
      std::vector<int> wire_map;
      append_graph(out, b, wire_map);
      int in_off = static_cast<int>(a.inputs.size());
      int out_off = static_cast<int>(a.outputs.size());
      for (size_t i = 0; i < b.inputs.size(); ++i) {
        int w = wire_map[b.inputs[i]];
        out.inputs.push_back(w);
        out.wires[w].src = {-1, in_off + static_cast<int>(i)};
      }
      for (size_t i = 0; i < b.outputs.size(); ++i) {
        int w = wire_map[b.outputs[i]];
        out.outputs.push_back(w);
        out.wires[w].dst = {-1, out_off + static_cast<int>(i)};
      }
      return out;
    }
  }
  throw DiagramError("unreachable term kind");
}

}  // namespace

Diagram build_diagram(const Term& term, const Signature& sig) {
  Diagram d = build_rec(term, sig);
  d.compact();
  return d;
}

BoundaryType boundary(const Diagram& d) {
  BoundaryType b;
  for (int w : d.inputs) b.inputs.push_back(d.wires[w].type);
  for (int w : d.outputs) b.outputs.push_back(d.wires[w].type);
  return b;
}

std::vector<int> topo_order(const Diagram& d) {
  std::vector<int> indegree(d.nodes.size(), 0);
  for (const auto& w : d.wires) {
    if (w.alive && w.src.node >= 0 && w.dst.node >= 0) indegree[w.dst.node]++;
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  int live = 0;
  for (size_t i = 0; i < d.nodes.size(); ++i) {
    if (!d.nodes[i].alive) continue;
    live++;
    if (indegree[i] == 0) ready.push(static_cast<int>(i));
  }
  std::vector<int> order;
  while (!ready.empty()) {
    int n = ready.top();
    ready.pop();
    order.push_back(n);
    for (int w : d.nodes[n].outs) {
      if (w < 0 || !d.wires[w].alive) continue;
      int m = d.wires[w].dst.node;
      if (m >= 0 && --indegree[m] == 0) ready.push(m);
    }
  }
  if (static_cast<int>(order.size()) != live) throw DiagramError("diagram contains a cycle");
  return order;
}

std::vector<Finding> validate_diagram(const Diagram& d, const Signature& sig) {
  std::vector<Finding> findings;
  auto report = [&](const std::string& where, const std::string& message) {
    findings.push_back({where, message});
  };

  // Every port must be the endpoint of exactly one wire.
  std::map<std::pair<int, int>, int> in_ports, out_ports;
  for (size_t i = 0; i < d.wires.size(); ++i) {
    const auto& w = d.wires[i];
    if (!w.alive) continue;
    if (++out_ports[{w.src.node, w.src.port}] > 1) {
      report("wire " + std::to_string(i), "port multiply connected");
    }
    if (++in_ports[{w.dst.node, w.dst.port}] > 1) {
      report("wire " + std::to_string(i), "port multiply connected");
    }
    if (!sig.find_object(w.type)) {
      report("wire " + std::to_string(i), "undeclared wire type '" + w.type + "'");
    }
  }

  for (size_t i = 0; i < d.nodes.size(); ++i) {
    const auto& n = d.nodes[i];
    if (!n.alive) continue;
    std::string where = std::string(node_kind_name(n.kind)) + "[" + n.payload + "]";
    auto in_type = [&](int port) -> const std::string& { return d.wires[n.ins[port]].type; };
    auto out_type = [&](int port) -> const std::string& { return d.wires[n.outs[port]].type; };
    auto expect_arity = [&](size_t n_in, size_t n_out) {
      if (n.ins.size() != n_in || n.outs.size() != n_out) {
        report(where, "wrong arity");
        return false;
      }
      return true;
    };
    switch (n.kind) {
      case NodeKind::Mu:
      case NodeKind::Delta:
      case NodeKind::Eps:
      case NodeKind::Spider: {
        if (!sig.is_data(n.payload)) {
          report(where, "data primitive on non-data object");
          break;
        }
        size_t n_in = n.kind == NodeKind::Mu ? 2 : (n.kind == NodeKind::Spider ? n.ins.size() : 1);
        size_t n_out = n.kind == NodeKind::Mu   ? 1
                       : n.kind == NodeKind::Delta ? 2
                       : n.kind == NodeKind::Eps   ? 0
                                                   : n.outs.size();
        if (n.kind == NodeKind::Spider && n.ins.empty()) {
          report(where, "spider with no inputs (data services have no unit)");
        }
        if (!expect_arity(n_in, n_out)) break;
        bool ok = true;
        for (size_t p = 0; p < n.ins.size(); ++p) ok &= in_type(static_cast<int>(p)) == n.payload;
        for (size_t p = 0; p < n.outs.size(); ++p) ok &= out_type(static_cast<int>(p)) == n.payload;
        if (!ok) report(where, "data primitive on entity wire");
        break;
      }
      case NodeKind::Gamma: {
        const AttributeDecl* attr = sig.find_attribute(n.payload);
        if (!attr) {
          report(where, "unknown attribute");
          break;
        }
        if (!expect_arity(1, 2)) break;
        if (in_type(0) != attr->carrier || out_type(0) != attr->carrier ||
            out_type(1) != attr->value) {
          report(where, "gamma wiring does not match attribute type");
        }
        break;
      }
      case NodeKind::Phi: {
        const AttributeDecl* attr = sig.find_attribute(n.payload);
        if (!attr) {
          report(where, "unknown attribute");
          break;
        }
        if (!expect_arity(2, 1)) break;
        if (in_type(0) != attr->carrier || in_type(1) != attr->value ||
            out_type(0) != attr->carrier) {
          report(where, "phi wiring does not match attribute type");
        }
        break;
      }
      case NodeKind::Generator: {
        const GeneratorDecl* gen = sig.find_generator(n.payload);
        if (!gen) {
          report(where, "unknown generator");
          break;
        }
        if (!expect_arity(gen->domain.size(), gen->codomain.size())) break;
        bool ok = true;
        for (size_t p = 0; p < gen->domain.size(); ++p) {
          ok &= in_type(static_cast<int>(p)) == gen->domain[p];
        }
        for (size_t p = 0; p < gen->codomain.size(); ++p) {
          ok &= out_type(static_cast<int>(p)) == gen->codomain[p];
        }
        if (!ok) report(where, "generator wiring does not match declaration");
        break;
      }
    }
  }

  try {
    topo_order(d);
  } catch (const DiagramError& e) {
    report("diagram", e.what());
  }
  return findings;
}

namespace {

uint64_t hash_mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
  return h;
}

uint64_t hash_str(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 1099511628211ULL;
  }
  return h;
}

struct ColorContext {
  const Diagram& d;
  std::vector<uint64_t> colors;

  explicit ColorContext(const Diagram& d) : d(d), colors(d.nodes.size(), 0) {
    for (size_t i = 0; i < d.nodes.size(); ++i) {
      const auto& n = d.nodes[i];
      if (!n.alive) continue;
      uint64_t h = hash_mix(static_cast<uint64_t>(n.kind) + 11, hash_str(n.payload));
      h = hash_mix(h, n.ins.size());
      h = hash_mix(h, n.outs.size() * 131);
      colors[i] = h;
    }
  }

  // One endpoint descriptor. Boundary positions are significant; spider
  // ports are unordered so their port index is erased.
  uint64_t end_descr(const WireEnd& e, bool is_src) const {
    if (e.node < 0) return hash_mix(is_src ? 0xb0 : 0xb1, static_cast<uint64_t>(e.port));
    uint64_t h = hash_mix(0xa0, colors[e.node]);
    if (d.nodes[e.node].kind != NodeKind::Spider) h = hash_mix(h, e.port + 7);
    return h;
  }

  void refine(int rounds) {
    for (int r = 0; r < rounds; ++r) {
      std::vector<uint64_t> next = colors;
      for (size_t i = 0; i < d.nodes.size(); ++i) {
        const auto& n = d.nodes[i];
        if (!n.alive) continue;
        bool spider = n.kind == NodeKind::Spider;
        std::vector<uint64_t> in_d, out_d;
        for (size_t p = 0; p < n.ins.size(); ++p) {
          const Wire& w = d.wires[n.ins[p]];
          uint64_t h = hash_mix(end_descr(w.src, true), hash_str(w.type));
          if (!spider) h = hash_mix(h, p + 17);
          in_d.push_back(h);
        }
        for (size_t p = 0; p < n.outs.size(); ++p) {
          const Wire& w = d.wires[n.outs[p]];
          uint64_t h = hash_mix(end_descr(w.dst, false), hash_str(w.type));
          if (!spider) h = hash_mix(h, p + 17);
          out_d.push_back(h);
        }
        if (spider) {
          std::sort(in_d.begin(), in_d.end());
          std::sort(out_d.begin(), out_d.end());
        }
        uint64_t h = colors[i];
        for (uint64_t v : in_d) h = hash_mix(h, v);
        h = hash_mix(h, 0x5eed);
        for (uint64_t v : out_d) h = hash_mix(h, v);
        next[i] = h;
      }
      colors = next;
    }
  }
};

}  // namespace

uint64_t diagram_key(const Diagram& d_in) {
  Diagram d = d_in;
  d.compact();
  ColorContext ctx(d);
  ctx.refine(4);
  std::vector<uint64_t> all;
  for (size_t i = 0; i < d.nodes.size(); ++i) all.push_back(ctx.colors[i]);
  std::sort(all.begin(), all.end());
  uint64_t h = 0x243f6a8885a308d3ULL;
  for (uint64_t v : all) h = hash_mix(h, v);
  h = hash_mix(h, 0x1111);
  for (int w : d.inputs) {
    h = hash_mix(h, hash_str(d.wires[w].type));
    h = hash_mix(h, ctx.end_descr(d.wires[w].dst, false));
  }
  h = hash_mix(h, 0x2222);
  for (int w : d.outputs) {
    h = hash_mix(h, hash_str(d.wires[w].type));
    h = hash_mix(h, ctx.end_descr(d.wires[w].src, true));
  }
  h = hash_mix(h, d.wires.size());
  return h;
}

namespace {

// Wire fingerprint under a node mapping; spider port indices are erased.
struct WireKey {
  int src_kind;  // 0 boundary, 1 ordered node, 2 spider node
  int src_a, src_b;
  int dst_kind;
  int dst_a, dst_b;
  std::string type;
  auto tied() const { return std::tie(src_kind, src_a, src_b, dst_kind, dst_a, dst_b, type); }
  bool operator<(const WireKey& o) const { return tied() < o.tied(); }
  bool operator==(const WireKey& o) const { return tied() == o.tied(); }
};

WireKey wire_key(const Diagram& d, const Wire& w, const std::vector<int>& node_map) {
  WireKey k;
  k.type = w.type;
  auto fill = [&](const WireEnd& e, int& kind, int& a, int& b) {
    if (e.node < 0) {
      kind = 0;
      a = e.port;
      b = 0;
    } else {
      int mapped = node_map.empty() ? e.node : node_map[e.node];
      if (d.nodes[e.node].kind == NodeKind::Spider) {
        kind = 2;
        a = mapped;
        b = 0;
      } else {
        kind = 1;
        a = mapped;
        b = e.port;
      }
    }
  };
  fill(w.src, k.src_kind, k.src_a, k.src_b);
  fill(w.dst, k.dst_kind, k.dst_a, k.dst_b);
  return k;
}

}  // namespace

bool iso_check(const Diagram& a_in, const Diagram& b_in) {
  Diagram a = a_in;
  Diagram b = b_in;
  a.compact();
  b.compact();
  if (a.nodes.size() != b.nodes.size() || a.wires.size() != b.wires.size()) return false;
  if (boundary(a) != boundary(b)) return false;

  ColorContext ca(a), cb(b);
  ca.refine(4);
  cb.refine(4);
  std::map<uint64_t, std::vector<int>> buckets_b;
  for (size_t i = 0; i < b.nodes.size(); ++i) buckets_b[cb.colors[i]].push_back(static_cast<int>(i));
  {
    std::map<uint64_t, int> count_a;
    for (size_t i = 0; i < a.nodes.size(); ++i) count_a[ca.colors[i]]++;
    for (const auto& [color, n] : count_a) {
      auto it = buckets_b.find(color);
      if (it == buckets_b.end() || static_cast<int>(it->second.size()) != n) return false;
    }
  }

  // Backtracking over color-compatible assignments; rarest colors first.
  std::vector<int> order(a.nodes.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = static_cast<int>(i);
  std::sort(order.begin(), order.end(), [&](int x, int y) {
    size_t sx = buckets_b[ca.colors[x]].size();
    size_t sy = buckets_b[ca.colors[y]].size();
    return std::tie(sx, x) < std::tie(sy, y);
  });

  std::vector<int> node_map(a.nodes.size(), -1);
  std::vector<bool> used(b.nodes.size(), false);

  std::multiset<WireKey> b_keys;
  for (const auto& w : b.wires) b_keys.insert(wire_key(b, w, {}));

  auto full_check = [&]() {
    std::multiset<WireKey> a_keys;
    for (const auto& w : a.wires) a_keys.insert(wire_key(a, w, node_map));
    return a_keys == b_keys;
  };

  std::function<bool(size_t)> assign = [&](size_t idx) -> bool {
    if (idx == order.size()) return full_check();
    int an = order[idx];
    for (int bn : buckets_b[ca.colors[an]]) {
      if (used[bn]) continue;
      const auto& na = a.nodes[an];
      const auto& nb = b.nodes[bn];
      if (na.kind != nb.kind || na.payload != nb.payload || na.ins.size() != nb.ins.size() ||
          na.outs.size() != nb.outs.size()) {
        continue;
      }
      node_map[an] = bn;
      used[bn] = true;
      if (assign(idx + 1)) return true;
      node_map[an] = -1;
      used[bn] = false;
    }
    return false;
  };
  return assign(0);
}

}  // namespace attrcat
