#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>

#include "attrcat/diagram.hpp"
#include "attrcat/signature.hpp"

namespace attrcat::testutil {

inline std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline std::string data_path(const std::string& name) {
  return std::string(ATTRCAT_DATA_DIR) + "/" + name;
}

inline Signature robot_ball_signature() {
  return parse_signature(slurp(data_path("robot_ball.attr")));
}

inline std::map<std::string, std::string> robot_ball_terms() {
  std::map<std::string, std::string> terms;
  std::istringstream in(slurp(data_path("robot_ball.terms")));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("term ", 0) != 0) continue;
    auto eq = line.find('=');
    auto name = line.substr(5, eq - 5);
    name.erase(name.find_last_not_of(" \t") + 1);
    terms[name] = line.substr(eq + 1);
  }
  return terms;
}

inline Diagram term_diagram(const std::string& text, const Signature& sig) {
  return build_diagram(*parse_term(text), sig);
}

// Deterministic RNG used by property tests.
inline uint64_t splitmix(uint64_t& state) {
  state += 0x9e3779b97f4a7c15ULL;
  uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Random acyclic data-only diagram over one data object, <= max_nodes
// primitive nodes, built by consuming open wires.
inline Diagram random_data_diagram(uint64_t& state, const std::string& data_object,
                                   int max_nodes) {
  Diagram d;
  std::vector<int> open;
  int m = 1 + static_cast<int>(splitmix(state) % 3);
  for (int i = 0; i < m; ++i) {
    int w = d.add_wire(data_object);
    d.wires[w].src = {-1, i};
    d.inputs.push_back(w);
    open.push_back(w);
  }
  int nodes = 0;
  while (nodes < max_nodes && !open.empty()) {
    if (nodes > 0 && splitmix(state) % 5 == 0) break;
    int op = static_cast<int>(splitmix(state) % 3);
    if (op == 0 && open.size() < 2) op = 1 + static_cast<int>(splitmix(state) % 2);
    auto take = [&]() {
      size_t i = splitmix(state) % open.size();
      int w = open[i];
      open.erase(open.begin() + i);
      return w;
    };
    if (op == 0) {
      int node = d.add_node(NodeKind::Mu, data_object);
      d.set_dst(take(), node, 0);
      d.set_dst(take(), node, 1);
      int w = d.add_wire(data_object);
      d.set_src(w, node, 0);
      open.push_back(w);
    } else if (op == 1) {
      int node = d.add_node(NodeKind::Delta, data_object);
      d.set_dst(take(), node, 0);
      for (int p = 0; p < 2; ++p) {
        int w = d.add_wire(data_object);
        d.set_src(w, node, p);
        open.push_back(w);
      }
    } else {
      int node = d.add_node(NodeKind::Eps, data_object);
      d.set_dst(take(), node, 0);
    }
    nodes++;
  }
  // Remaining open wires exit in a shuffled order.
  for (size_t i = open.size(); i > 1; --i) {
    std::swap(open[i - 1], open[splitmix(state) % i]);
  }
  for (size_t i = 0; i < open.size(); ++i) {
    d.wires[open[i]].dst = {-1, static_cast<int>(i)};
    d.outputs.push_back(open[i]);
  }
  return d;
}

}  // namespace attrcat::testutil
