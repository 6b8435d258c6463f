#include "attrcat/render.hpp"

#include <sstream>

namespace attrcat {

namespace {

std::string node_label(const DiagramNode& n) {
  switch (n.kind) {
    case NodeKind::Generator: return n.payload;
    case NodeKind::Mu: return "mu[" + n.payload + "]";
    case NodeKind::Delta: return "delta[" + n.payload + "]";
    case NodeKind::Eps: return "eps[" + n.payload + "]";
    case NodeKind::Gamma: return "gamma[" + n.payload + "]";
    case NodeKind::Phi: return "phi[" + n.payload + "]";
    case NodeKind::Spider:
      return "spider[" + n.payload + " " + std::to_string(n.ins.size()) + "->" +
             std::to_string(n.outs.size()) + "]";
  }
  return "?";
}

std::string node_shape(const DiagramNode& n) {
  switch (n.kind) {
    case NodeKind::Generator: return "box";
    case NodeKind::Gamma:
    case NodeKind::Phi: return "triangle";
    default: return "circle";
  }
}

}  // namespace

std::string render_dot(const Diagram& d_in, const Signature& sig) {
  Diagram d = d_in;
  d.compact();
  std::ostringstream out;
  out << "digraph diagram {\n";
  out << "  rankdir=TB;\n";
  out << "  node [fontsize=10];\n";
  for (size_t i = 0; i < d.inputs.size(); ++i) {
    out << "  in" << i << " [shape=point, label=\"\"];\n";
  }
  for (size_t i = 0; i < d.outputs.size(); ++i) {
    out << "  out" << i << " [shape=point, label=\"\"];\n";
  }
  for (size_t i = 0; i < d.nodes.size(); ++i) {
    out << "  n" << i << " [shape=" << node_shape(d.nodes[i]) << ", label=\""
        << node_label(d.nodes[i]) << "\"];\n";
  }
  for (size_t i = 0; i < d.wires.size(); ++i) {
    const Wire& w = d.wires[i];
    std::string src = w.src.node < 0 ? "in" + std::to_string(w.src.port)
                                     : "n" + std::to_string(w.src.node);
    std::string dst = w.dst.node < 0 ? "out" + std::to_string(w.dst.port)
                                     : "n" + std::to_string(w.dst.node);
    bool data = sig.is_data(w.type);
    out << "  " << src << " -> " << dst << " [label=\"" << w.type << "\""
        << (data ? ", style=dashed" : "") << "];\n";
  }
  out << "}\n";
  return out.str();
}

}  // namespace attrcat
