#pragma once

// Finite partial-function model: an independent denotational oracle for
// data-only diagrams and attribute actions. Evaluation is direct forward
// propagation over the port graph and shares nothing with the rewrite
// engine's normal forms or matching.

#include <map>
#include <optional>
#include <stdexcept>
#include <vector>

#include "attrcat/diagram.hpp"

namespace attrcat::testmodel {

using Tuple = std::vector<int>;

// Carriers are finite sets; each attribute is interpreted by a total map
// carrier -> D (the comonoid action gamma x = (x, f x)), and phi is the
// induced filter phi(x, e) = x iff f(x) == e.
struct ActionModel {
  int d = 1;                                       // |D|
  std::map<std::string, int> entity_size;          // by entity object name
  std::map<std::string, std::vector<int>> attr_f;  // by attribute name
};

inline std::optional<Tuple> eval_diagram(const Diagram& diag, const Tuple& input,
                                         const ActionModel* model = nullptr) {
  std::map<int, int> val;
  for (size_t i = 0; i < diag.inputs.size(); ++i) val[diag.inputs[i]] = input[i];
  for (int n : topo_order(diag)) {
    const DiagramNode& node = diag.nodes[n];
    switch (node.kind) {
      case NodeKind::Mu: {
        int a = val.at(node.ins[0]);
        int b = val.at(node.ins[1]);
        if (a != b) return std::nullopt;
        val[node.outs[0]] = a;
        break;
      }
      case NodeKind::Delta: {
        int a = val.at(node.ins[0]);
        val[node.outs[0]] = a;
        val[node.outs[1]] = a;
        break;
      }
      case NodeKind::Eps:
        break;
      case NodeKind::Spider: {
        int a = val.at(node.ins[0]);
        for (size_t i = 1; i < node.ins.size(); ++i) {
          if (val.at(node.ins[i]) != a) return std::nullopt;
        }
        for (int w : node.outs) val[w] = a;
        break;
      }
      case NodeKind::Gamma: {
        if (!model) throw std::runtime_error("eval_diagram: gamma without a model");
        int x = val.at(node.ins[0]);
        val[node.outs[0]] = x;
        val[node.outs[1]] = model->attr_f.at(node.payload)[x];
        break;
      }
      case NodeKind::Phi: {
        if (!model) throw std::runtime_error("eval_diagram: phi without a model");
        int x = val.at(node.ins[0]);
        int e = val.at(node.ins[1]);
        if (model->attr_f.at(node.payload)[x] != e) return std::nullopt;
        val[node.outs[0]] = x;
        break;
      }
      case NodeKind::Generator:
        throw std::runtime_error("eval_diagram: generator node has no model");
    }
  }
  Tuple out;
  for (int w : diag.outputs) out.push_back(val.at(w));
  return out;
}

// Full table over all inputs; entity wires range over their carrier size,
// data wires over k.
inline std::vector<std::optional<Tuple>> denotation_table(const Diagram& diag, int k,
                                                          const ActionModel* model = nullptr) {
  std::vector<int> radix;
  for (int w : diag.inputs) {
    const std::string& type = diag.wires[w].type;
    bool entity = model && model->entity_size.count(type);
    radix.push_back(entity ? model->entity_size.at(type) : k);
  }
  long total = 1;
  for (int r : radix) total *= r;
  std::vector<std::optional<Tuple>> table;
  table.reserve(total);
  for (long idx = 0; idx < total; ++idx) {
    Tuple in(radix.size());
    long v = idx;
    for (size_t i = 0; i < radix.size(); ++i) {
      in[i] = static_cast<int>(v % radix[i]);
      v /= radix[i];
    }
    table.push_back(eval_diagram(diag, in, model));
  }
  return table;
}

inline std::optional<int> derived_phi(const std::vector<int>& f, int x, int e) {
  if (f[x] == e) return x;
  return std::nullopt;
}

// First-equals-third identity of the modified Frobenius laws for a
// candidate map M x D -> M + undefined (encoded as candidate[x*d + e]):
//   (gamma x id);(id x mu)  ==  (id x delta);(phi x id)
inline bool satisfies_first_equals_third(int m, int d, const std::vector<int>& f,
                                         const std::vector<std::optional<int>>& candidate) {
  for (int x = 0; x < m; ++x) {
    for (int e = 0; e < d; ++e) {
      bool lhs_defined = f[x] == e;
      const auto& phi_xe = candidate[x * d + e];
      if (lhs_defined != phi_xe.has_value()) return false;
      if (lhs_defined && *phi_xe != x) return false;  // rhs = (phi(x,e), e)
    }
  }
  return true;
}

// Pointwise check of the action laws (semigroup action, comonoid action,
// modified Frobenius, modified special) for the derived phi.
inline bool derived_phi_satisfies_action_laws(int m, int d, const std::vector<int>& f) {
  for (int x = 0; x < m; ++x) {
    // comonoid action counit: gamma;(id x eps) = id; coassoc is automatic
    // for graphs of functions. Modified special: gamma;phi = id.
    auto special = derived_phi(f, x, f[x]);
    if (!special || *special != x) return false;
    for (int e1 = 0; e1 < d; ++e1) {
      for (int e2 = 0; e2 < d; ++e2) {
        // semigroup action: phi(phi(x,e1),e2) == phi(x, mu(e1,e2))
        auto lhs = derived_phi(f, x, e1);
        if (lhs) lhs = derived_phi(f, *lhs, e2);
        std::optional<int> rhs;
        if (e1 == e2) rhs = derived_phi(f, x, e1);
        if (lhs != rhs) return false;
      }
      // modified Frobenius, all three composites on (x, e1):
      //   first  = (x, f x) if f x == e1
      //   second = (phi(x,e1), f(phi(x,e1)))
      //   third  = (phi(x,e1), e1)
      bool first_defined = f[x] == e1;
      auto p = derived_phi(f, x, e1);
      if (first_defined != p.has_value()) return false;
      if (p) {
        if (*p != x) return false;
        if (f[*p] != f[x]) return false;  // second == first
        if (e1 != f[x]) return false;     // third == first
      }
    }
  }
  return true;
}

}  // namespace attrcat::testmodel
