#include "attrcat/rewrite.hpp"

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <queue>
#include <random>
#include <set>
#include <sstream>

namespace attrcat {

// ---------------------------------------------------------------------------
// Spider normal form
// ---------------------------------------------------------------------------

namespace {

bool is_data_node(const DiagramNode& n) {
  switch (n.kind) {
    case NodeKind::Mu:
    case NodeKind::Delta:
    case NodeKind::Eps:
    case NodeKind::Spider:
      return true;
    default:
      return false;
  }
}

// Is there a directed path from `from` to `to` that avoids the direct wires
// between them? Used as the convexity condition for spider fusion.
bool path_avoiding_direct(const Diagram& d, int from, int to) {
  std::vector<bool> seen(d.nodes.size(), false);
  std::vector<int> stack;
  auto push_succs = [&](int node) {
    for (int w : d.nodes[node].outs) {
      if (w < 0 || !d.wires[w].alive) continue;
      int next = d.wires[w].dst.node;
      if (next < 0) continue;
      if (node == from && next == to) continue;  // skip direct wires
      if (!seen[next]) {
        seen[next] = true;
        stack.push_back(next);
      }
    }
  };
  push_succs(from);
  while (!stack.empty()) {
    int n = stack.back();
    stack.pop_back();
    if (n == to) return true;
    push_succs(n);
  }
  return false;
}

void shuffle_ints(std::vector<int>& v, unsigned seed) {
  if (seed == 0) return;
  std::mt19937 rng(seed);
  for (size_t i = v.size(); i > 1; --i) {
    size_t j = rng() % i;
    std::swap(v[i - 1], v[j]);
  }
}

// Merges wire w's consumer slot to point at `wire`.
void retarget_dst(Diagram& d, int wire, WireEnd dst) {
  d.wires[wire].dst = dst;
  if (dst.node >= 0) {
    d.nodes[dst.node].ins[dst.port] = wire;
  } else {
    d.outputs[dst.port] = wire;
  }
}

}  // namespace

Diagram normalize_data(const Diagram& d_in, unsigned order_seed) {
  Diagram d = d_in;
  d.compact();
  for (auto& n : d.nodes) {
    if (is_data_node(n)) n.kind = NodeKind::Spider;
  }
  bool changed = true;
  while (changed) {
    changed = false;

    // Parallel wires between two data nodes collapse by the special law.
    std::vector<int> wire_order;
    for (size_t i = 0; i < d.wires.size(); ++i) wire_order.push_back(static_cast<int>(i));
    shuffle_ints(wire_order, order_seed);
    for (int wi : wire_order) {
      const Wire& w = d.wires[wi];
      if (!w.alive || w.src.node < 0 || w.dst.node < 0) continue;
      if (!d.nodes[w.src.node].alive || !d.nodes[w.dst.node].alive) continue;
      if (d.nodes[w.src.node].kind != NodeKind::Spider ||
          d.nodes[w.dst.node].kind != NodeKind::Spider) {
        continue;
      }
      for (size_t j = 0; j < d.wires.size(); ++j) {
        const Wire& other = d.wires[j];
        if (static_cast<int>(j) == wi || !other.alive) continue;
        if (other.src.node == w.src.node && other.dst.node == w.dst.node) {
          // Drop `other`, remove its legs.
          auto& outs = d.nodes[w.src.node].outs;
          outs.erase(std::remove(outs.begin(), outs.end(), static_cast<int>(j)), outs.end());
          auto& ins = d.nodes[w.dst.node].ins;
          ins.erase(std::remove(ins.begin(), ins.end(), static_cast<int>(j)), ins.end());
          d.kill_wire(static_cast<int>(j));
          changed = true;
        }
      }
    }

    // Fusion of adjacent spiders, subject to convexity.
    for (int wi : wire_order) {
      const Wire& w = d.wires[wi];
      if (!w.alive || w.src.node < 0 || w.dst.node < 0) continue;
      int a = w.src.node;
      int b = w.dst.node;
      if (a == b) continue;
      if (!d.nodes[a].alive || !d.nodes[b].alive) continue;
      if (d.nodes[a].kind != NodeKind::Spider || d.nodes[b].kind != NodeKind::Spider) continue;
      if (path_avoiding_direct(d, a, b)) continue;
      // Fuse b into a: a keeps its other legs, gains b's.
      std::vector<int> new_ins, new_outs;
      for (int x : d.nodes[a].ins) {
        if (x >= 0 && d.wires[x].alive) new_ins.push_back(x);
      }
      for (int x : d.nodes[b].ins) {
        if (x >= 0 && d.wires[x].alive && d.wires[x].src.node != a) new_ins.push_back(x);
      }
      for (int x : d.nodes[a].outs) {
        if (x >= 0 && d.wires[x].alive && d.wires[x].dst.node != b) new_outs.push_back(x);
      }
      for (int x : d.nodes[b].outs) {
        if (x >= 0 && d.wires[x].alive) new_outs.push_back(x);
      }
      for (int x : d.nodes[a].outs) {
        if (x >= 0 && d.wires[x].alive && d.wires[x].dst.node == b) d.kill_wire(x);
      }
      d.nodes[a].ins = new_ins;
      d.nodes[a].outs = new_outs;
      for (size_t p = 0; p < new_ins.size(); ++p) d.wires[new_ins[p]].dst = {a, static_cast<int>(p)};
      for (size_t p = 0; p < new_outs.size(); ++p) d.wires[new_outs[p]].src = {a, static_cast<int>(p)};
      d.kill_node(b);
      changed = true;
    }

    // One-in one-out spiders are plain wires.
    for (size_t i = 0; i < d.nodes.size(); ++i) {
      auto& n = d.nodes[i];
      if (!n.alive || n.kind != NodeKind::Spider) continue;
      if (n.ins.size() == 1 && n.outs.size() == 1) {
        int w_in = n.ins[0];
        int w_out = n.outs[0];
        retarget_dst(d, w_in, d.wires[w_out].dst);
        d.kill_wire(w_out);
        d.kill_node(static_cast<int>(i));
        changed = true;
      }
    }
  }
  d.compact();
  return d;
}

// ---------------------------------------------------------------------------
// Built-in rules
// ---------------------------------------------------------------------------

namespace {

// Small builder for pattern diagrams.
struct Pat {
  Diagram d;

  int node(NodeKind kind, const std::string& payload) { return d.add_node(kind, payload); }

  int wire(const std::string& type, int from_node, int from_port, int to_node, int to_port) {
    int w = d.add_wire(type);
    if (from_node >= 0) {
      d.set_src(w, from_node, from_port);
    } else {
      d.wires[w].src = {-1, static_cast<int>(d.inputs.size())};
      d.inputs.push_back(w);
    }
    if (to_node >= 0) {
      d.set_dst(w, to_node, to_port);
    } else {
      d.wires[w].dst = {-1, static_cast<int>(d.outputs.size())};
      d.outputs.push_back(w);
    }
    return w;
  }
};

constexpr int kIn = -1;
constexpr int kOut = -1;

RewriteRule make_rule(const std::string& name, Diagram lhs, Diagram rhs, bool leq = false) {
  RewriteRule r;
  r.name = name;
  r.lhs = std::move(lhs);
  r.rhs = std::move(rhs);
  r.leq_only = leq;
  return r;
}

void add_data_rules(std::vector<RewriteRule>& rules, const std::string& D) {
  {  // assoc: (mu x id);mu = (id x mu);mu
    Pat l;
    int m1 = l.node(NodeKind::Mu, D), m2 = l.node(NodeKind::Mu, D);
    l.wire(D, kIn, 0, m1, 0);
    l.wire(D, kIn, 0, m1, 1);
    l.wire(D, m1, 0, m2, 0);
    l.wire(D, kIn, 0, m2, 1);
    l.wire(D, m2, 0, kOut, 0);
    Pat r;
    int n1 = r.node(NodeKind::Mu, D), n2 = r.node(NodeKind::Mu, D);
    r.wire(D, kIn, 0, n2, 0);
    r.wire(D, kIn, 0, n1, 0);
    r.wire(D, kIn, 0, n1, 1);
    r.wire(D, n1, 0, n2, 1);
    r.wire(D, n2, 0, kOut, 0);
    rules.push_back(make_rule("assoc[" + D + "]", l.d, r.d));
  }
  {  // comm: swap;mu = mu
    Pat l;
    int m = l.node(NodeKind::Mu, D);
    l.wire(D, kIn, 0, m, 1);
    l.wire(D, kIn, 0, m, 0);
    l.wire(D, m, 0, kOut, 0);
    Pat r;
    int n = r.node(NodeKind::Mu, D);
    r.wire(D, kIn, 0, n, 0);
    r.wire(D, kIn, 0, n, 1);
    r.wire(D, n, 0, kOut, 0);
    rules.push_back(make_rule("comm[" + D + "]", l.d, r.d));
  }
  {  // coassoc: delta;(delta x id) = delta;(id x delta)
    Pat l;
    int d1 = l.node(NodeKind::Delta, D), d2 = l.node(NodeKind::Delta, D);
    l.wire(D, kIn, 0, d1, 0);
    l.wire(D, d1, 0, d2, 0);
    l.wire(D, d2, 0, kOut, 0);
    l.wire(D, d2, 1, kOut, 0);
    l.wire(D, d1, 1, kOut, 0);
    Pat r;
    int e1 = r.node(NodeKind::Delta, D), e2 = r.node(NodeKind::Delta, D);
    r.wire(D, kIn, 0, e1, 0);
    r.wire(D, e1, 0, kOut, 0);
    r.wire(D, e1, 1, e2, 0);
    r.wire(D, e2, 0, kOut, 0);
    r.wire(D, e2, 1, kOut, 0);
    rules.push_back(make_rule("coassoc_data[" + D + "]", l.d, r.d));
  }
  {  // cocomm: delta;swap = delta
    Pat l;
    int n = l.node(NodeKind::Delta, D);
    l.wire(D, kIn, 0, n, 0);
    int a = l.d.add_wire(D);
    l.d.set_src(a, n, 1);
    l.d.wires[a].dst = {-1, 0};
    int b = l.d.add_wire(D);
    l.d.set_src(b, n, 0);
    l.d.wires[b].dst = {-1, 1};
    l.d.outputs = {a, b};
    Pat r;
    int m = r.node(NodeKind::Delta, D);
    r.wire(D, kIn, 0, m, 0);
    r.wire(D, m, 0, kOut, 0);
    r.wire(D, m, 1, kOut, 0);
    rules.push_back(make_rule("cocomm[" + D + "]", l.d, r.d));
  }
  {  // counit: delta;(id x eps) = id
    Pat l;
    int del = l.node(NodeKind::Delta, D), eps = l.node(NodeKind::Eps, D);
    l.wire(D, kIn, 0, del, 0);
    l.wire(D, del, 0, kOut, 0);
    l.wire(D, del, 1, eps, 0);
    Pat r;
    r.wire(D, kIn, 0, kOut, 0);
    rules.push_back(make_rule("counit_data[" + D + "]", l.d, r.d));
  }
  {  // frobenius: (delta x id);(id x mu) = mu;delta
    Pat l;
    int del = l.node(NodeKind::Delta, D), mu = l.node(NodeKind::Mu, D);
    l.wire(D, kIn, 0, del, 0);
    l.wire(D, del, 0, kOut, 0);
    l.wire(D, del, 1, mu, 0);
    l.wire(D, kIn, 0, mu, 1);
    l.wire(D, mu, 0, kOut, 0);
    Pat r;
    int mu2 = r.node(NodeKind::Mu, D), del2 = r.node(NodeKind::Delta, D);
    r.wire(D, kIn, 0, mu2, 0);
    r.wire(D, kIn, 0, mu2, 1);
    r.wire(D, mu2, 0, del2, 0);
    r.wire(D, del2, 0, kOut, 0);
    r.wire(D, del2, 1, kOut, 0);
    rules.push_back(make_rule("frobenius1[" + D + "]", l.d, r.d));
  }
  {  // frobenius mirror: mu;delta = (id x delta);(mu x id)
    Pat l;
    int mu2 = l.node(NodeKind::Mu, D), del2 = l.node(NodeKind::Delta, D);
    l.wire(D, kIn, 0, mu2, 0);
    l.wire(D, kIn, 0, mu2, 1);
    l.wire(D, mu2, 0, del2, 0);
    l.wire(D, del2, 0, kOut, 0);
    l.wire(D, del2, 1, kOut, 0);
    Pat r;
    int del = r.node(NodeKind::Delta, D), mu = r.node(NodeKind::Mu, D);
    r.wire(D, kIn, 0, mu, 0);
    r.wire(D, kIn, 0, del, 0);
    r.wire(D, del, 0, mu, 1);
    r.wire(D, mu, 0, kOut, 0);
    r.wire(D, del, 1, kOut, 0);
    rules.push_back(make_rule("frobenius2[" + D + "]", l.d, r.d));
  }
  {  // special: delta;mu = id
    Pat l;
    int del = l.node(NodeKind::Delta, D), mu = l.node(NodeKind::Mu, D);
    l.wire(D, kIn, 0, del, 0);
    l.wire(D, del, 0, mu, 0);
    l.wire(D, del, 1, mu, 1);
    l.wire(D, mu, 0, kOut, 0);
    Pat r;
    r.wire(D, kIn, 0, kOut, 0);
    rules.push_back(make_rule("special[" + D + "]", l.d, r.d));
  }
  {  // well-behavedness, as the derived spider split (leq-only)
    RewriteRule r;
    r.name = "well_behaved[" + D + "]";
    r.leq_only = true;
    r.split_move = true;
    r.data_object = D;
    rules.push_back(std::move(r));
  }
}

void add_action_rules(std::vector<RewriteRule>& rules, const AttributeDecl& a) {
  const std::string& M = a.carrier;
  const std::string& D = a.value;
  const std::string& A = a.name;
  auto gamma = [&](Pat& p) { return p.node(NodeKind::Gamma, A); };
  auto phi = [&](Pat& p) { return p.node(NodeKind::Phi, A); };

  {  // counit action: gamma;(id x eps) = id_M
    Pat l;
    int g = gamma(l);
    int sp = l.node(NodeKind::Spider, D);
    l.wire(M, kIn, 0, g, 0);
    l.wire(M, g, 0, kOut, 0);
    l.wire(D, g, 1, sp, 0);
    Pat r;
    r.wire(M, kIn, 0, kOut, 0);
    rules.push_back(make_rule("counit[" + A + "]", l.d, r.d));
  }
  {  // coassoc action: gamma;gamma = gamma;(id x delta)
    Pat l;
    int g1 = gamma(l), g2 = gamma(l);
    l.wire(M, kIn, 0, g1, 0);
    l.wire(M, g1, 0, g2, 0);
    l.wire(M, g2, 0, kOut, 0);
    l.wire(D, g2, 1, kOut, 0);
    l.wire(D, g1, 1, kOut, 0);
    Pat r;
    int g = gamma(r);
    int sp = r.node(NodeKind::Spider, D);
    r.wire(M, kIn, 0, g, 0);
    r.wire(M, g, 0, kOut, 0);
    r.wire(D, g, 1, sp, 0);
    r.wire(D, sp, 0, kOut, 0);
    r.wire(D, sp, 1, kOut, 0);
    rules.push_back(make_rule("coassoc[" + A + "]", l.d, r.d));
  }
  {  // phi is determined by gamma: phi = (gamma x id);(id x mu);(id x eps)
    Pat l;
    int p = phi(l);
    l.wire(M, kIn, 0, p, 0);
    l.wire(D, kIn, 0, p, 1);
    l.wire(M, p, 0, kOut, 0);
    Pat r;
    int g = gamma(r);
    int sp = r.node(NodeKind::Spider, D);
    r.wire(M, kIn, 0, g, 0);
    r.wire(D, kIn, 0, sp, 1);
    r.wire(M, g, 0, kOut, 0);
    r.wire(D, g, 1, sp, 0);
    rules.push_back(make_rule("phi_def[" + A + "]", l.d, r.d));
  }
  {  // modified special law: gamma;phi = id_M
    Pat l;
    int g = gamma(l), p = phi(l);
    l.wire(M, kIn, 0, g, 0);
    l.wire(M, g, 0, p, 0);
    l.wire(D, g, 1, p, 1);
    l.wire(M, p, 0, kOut, 0);
    Pat r;
    r.wire(M, kIn, 0, kOut, 0);
    rules.push_back(make_rule("action_special[" + A + "]", l.d, r.d));
  }
  {  // semigroup action: phi;phi = (id x mu);phi
    Pat l;
    int p1 = phi(l), p2 = phi(l);
    l.wire(M, kIn, 0, p1, 0);
    l.wire(D, kIn, 0, p1, 1);
    l.wire(D, kIn, 0, p2, 1);
    l.wire(M, p1, 0, p2, 0);
    l.wire(M, p2, 0, kOut, 0);
    Pat r;
    int sp = r.node(NodeKind::Spider, D);
    int p = phi(r);
    r.wire(M, kIn, 0, p, 0);
    r.wire(D, kIn, 0, sp, 0);
    r.wire(D, kIn, 0, sp, 1);
    r.wire(D, sp, 0, p, 1);
    r.wire(M, p, 0, kOut, 0);
    rules.push_back(make_rule("action_assoc[" + A + "]", l.d, r.d));
  }
  // Modified Frobenius laws: three equal composites M x D -> M x D.
  auto frob_first = [&]() {
    Pat p;
    int g = gamma(p);
    int sp = p.node(NodeKind::Spider, D);
    p.wire(M, kIn, 0, g, 0);
    p.wire(M, g, 0, kOut, 0);
    p.wire(D, g, 1, sp, 0);
    p.wire(D, kIn, 0, sp, 1);
    p.wire(D, sp, 0, kOut, 0);
    return p.d;
  };
  auto frob_second = [&]() {
    Pat p;
    int ph = phi(p);
    int g = gamma(p);
    p.wire(M, kIn, 0, ph, 0);
    p.wire(D, kIn, 0, ph, 1);
    p.wire(M, ph, 0, g, 0);
    p.wire(M, g, 0, kOut, 0);
    p.wire(D, g, 1, kOut, 0);
    return p.d;
  };
  auto frob_third = [&]() {
    Pat p;
    int sp = p.node(NodeKind::Spider, D);
    int ph = phi(p);
    p.wire(M, kIn, 0, ph, 0);
    p.wire(D, kIn, 0, sp, 0);
    p.wire(D, sp, 0, ph, 1);
    p.wire(M, ph, 0, kOut, 0);
    p.wire(D, sp, 1, kOut, 0);
    return p.d;
  };
  rules.push_back(make_rule("action_frob_a[" + A + "]", frob_first(), frob_second()));
  rules.push_back(make_rule("action_frob_b[" + A + "]", frob_second(), frob_third()));
  rules.push_back(make_rule("action_frob_c[" + A + "]", frob_first(), frob_third()));
}

// Lax data service homomorphism laws for a generator f : D -> D'.
void add_lax_rules(std::vector<RewriteRule>& rules, const GeneratorDecl& f) {
  const std::string& D = f.domain[0];
  const std::string& Dp = f.codomain[0];
  {  // f;delta' <= delta;(f x f)
    Pat l;
    int g = l.node(NodeKind::Generator, f.name);
    int sp = l.node(NodeKind::Spider, Dp);
    l.wire(D, kIn, 0, g, 0);
    l.wire(Dp, g, 0, sp, 0);
    l.wire(Dp, sp, 0, kOut, 0);
    l.wire(Dp, sp, 1, kOut, 0);
    Pat r;
    int sp2 = r.node(NodeKind::Spider, D);
    int g1 = r.node(NodeKind::Generator, f.name);
    int g2 = r.node(NodeKind::Generator, f.name);
    r.wire(D, kIn, 0, sp2, 0);
    r.wire(D, sp2, 0, g1, 0);
    r.wire(D, sp2, 1, g2, 0);
    r.wire(Dp, g1, 0, kOut, 0);
    r.wire(Dp, g2, 0, kOut, 0);
    rules.push_back(make_rule("lax_copy[" + f.name + "]", l.d, r.d, true));
  }
  {  // f;eps' <= eps
    Pat l;
    int g = l.node(NodeKind::Generator, f.name);
    int sp = l.node(NodeKind::Spider, Dp);
    l.wire(D, kIn, 0, g, 0);
    l.wire(Dp, g, 0, sp, 0);
    Pat r;
    int sp2 = r.node(NodeKind::Spider, D);
    r.wire(D, kIn, 0, sp2, 0);
    rules.push_back(make_rule("lax_del[" + f.name + "]", l.d, r.d, true));
  }
  {  // mu;f <= (f x f);mu'
    Pat l;
    int sp = l.node(NodeKind::Spider, D);
    int g = l.node(NodeKind::Generator, f.name);
    l.wire(D, kIn, 0, sp, 0);
    l.wire(D, kIn, 0, sp, 1);
    l.wire(D, sp, 0, g, 0);
    l.wire(Dp, g, 0, kOut, 0);
    Pat r;
    int g1 = r.node(NodeKind::Generator, f.name);
    int g2 = r.node(NodeKind::Generator, f.name);
    int sp2 = r.node(NodeKind::Spider, Dp);
    r.wire(D, kIn, 0, g1, 0);
    r.wire(D, kIn, 0, g2, 0);
    r.wire(Dp, g1, 0, sp2, 0);
    r.wire(Dp, g2, 0, sp2, 1);
    r.wire(Dp, sp2, 0, kOut, 0);
    rules.push_back(make_rule("lax_merge[" + f.name + "]", l.d, r.d, true));
  }
}

}  // namespace

std::vector<RewriteRule> build_rules(const Signature& sig) {
  std::vector<RewriteRule> rules;
  for (const auto& obj : sig.objects) {
    if (obj.sort == Sort::Data) add_data_rules(rules, obj.name);
  }
  for (const auto& attr : sig.attributes) {
    if (!attr.implicit_copy) add_action_rules(rules, attr);
  }
  for (const auto& gen : sig.generators) {
    if (gen.domain.size() == 1 && gen.codomain.size() == 1 && sig.is_data(gen.domain[0]) &&
        sig.is_data(gen.codomain[0])) {
      add_lax_rules(rules, gen);
    }
  }
  for (const auto& ax : sig.axioms) {
    Diagram lhs = normalize_data(build_diagram(*ax.lhs, sig));
    Diagram rhs = normalize_data(build_diagram(*ax.rhs, sig));
    rules.push_back(make_rule("axiom:" + ax.name, std::move(lhs), std::move(rhs),
                              ax.kind == AxiomDecl::Kind::Leq));
  }
  std::sort(rules.begin(), rules.end(),
            [](const RewriteRule& a, const RewriteRule& b) { return a.name < b.name; });
  return rules;
}

// ---------------------------------------------------------------------------
// Pattern matching with flexible spider legs
// ---------------------------------------------------------------------------

namespace {

struct Match {
  std::vector<int> node_map;  // pattern node -> state node
  std::vector<int> wire_map;  // pattern wire -> state wire (-1: absorbed link)
  struct Residual {
    int p_node;
    bool is_in;
    std::vector<int> legs;   // state wire ids absorbed
    int absorber_pwire;      // pattern boundary wire bound to the link
  };
  std::vector<Residual> residuals;
};

struct Matcher {
  const Diagram& S;
  const Diagram& P;
  std::vector<int> node_map;
  std::vector<bool> used;
  std::vector<Match> results;

  Matcher(const Diagram& s, const Diagram& p)
      : S(s), P(p), node_map(p.nodes.size(), -1), used(s.nodes.size(), false) {}

  static bool ordered_kind(NodeKind k) { return k != NodeKind::Spider; }

  bool candidate_ok(int pn, int sn) const {
    const auto& np = P.nodes[pn];
    const auto& ns = S.nodes[sn];
    if (!ns.alive || np.kind != ns.kind || np.payload != ns.payload) return false;
    if (ordered_kind(np.kind)) {
      return np.ins.size() == ns.ins.size() && np.outs.size() == ns.outs.size();
    }
    int p_in_open = 0, p_out_open = 0;
    for (int w : np.ins) {
      if (P.wires[w].src.node < 0) p_in_open++;
    }
    for (int w : np.outs) {
      if (P.wires[w].dst.node < 0) p_out_open++;
    }
    if (p_in_open == 0 && ns.ins.size() != np.ins.size()) return false;
    if (p_in_open > 0 && ns.ins.size() < np.ins.size()) return false;
    if (p_out_open == 0 && ns.outs.size() != np.outs.size()) return false;
    if (p_out_open > 0 && ns.outs.size() < np.outs.size()) return false;
    return true;
  }

  // Quick adjacency pruning against already assigned neighbours.
  bool adjacent_ok(int pn) const {
    for (size_t wi = 0; wi < P.wires.size(); ++wi) {
      const Wire& pw = P.wires[wi];
      int u = pw.src.node, v = pw.dst.node;
      if (u < 0 || v < 0) continue;
      if (u != pn && v != pn) continue;
      int other = u == pn ? v : u;
      if (node_map[other] < 0) continue;
      int su = node_map[u], sv = node_map[v];
      bool u_ord = ordered_kind(P.nodes[u].kind);
      bool v_ord = ordered_kind(P.nodes[v].kind);
      if (u_ord) {
        int sw = S.nodes[su].outs[pw.src.port];
        if (sw < 0 || !S.wires[sw].alive) return false;
        if (v_ord) {
          if (S.wires[sw].dst.node != sv || S.wires[sw].dst.port != pw.dst.port) return false;
        } else {
          if (S.wires[sw].dst.node != sv) return false;
        }
      } else if (v_ord) {
        int sw = S.nodes[sv].ins[pw.dst.port];
        if (sw < 0 || !S.wires[sw].alive) return false;
        if (S.wires[sw].src.node != su) return false;
      } else {
        bool found = false;
        for (int sw : S.nodes[su].outs) {
          if (sw >= 0 && S.wires[sw].alive && S.wires[sw].dst.node == sv) found = true;
        }
        if (!found) return false;
      }
    }
    return true;
  }

  void run() {
    // Wire-only patterns: enumerate state wires per through-wire.
    bool has_nodes = false;
    for (const auto& n : P.nodes) {
      if (n.alive) has_nodes = true;
    }
    if (!has_nodes) {
      if (P.wires.size() != 1) return;  // unsupported; none of the rules need it
      for (size_t i = 0; i < S.wires.size(); ++i) {
        if (!S.wires[i].alive || S.wires[i].type != P.wires[0].type) continue;
        Match m;
        m.node_map = {};
        m.wire_map = {static_cast<int>(i)};
        results.push_back(std::move(m));
      }
      return;
    }
    assign(0);
  }

  void assign(size_t pn) {
    while (pn < P.nodes.size() && !P.nodes[pn].alive) pn++;
    if (pn == P.nodes.size()) {
      finalize();
      return;
    }
    for (size_t sn = 0; sn < S.nodes.size(); ++sn) {
      if (used[sn] || !candidate_ok(static_cast<int>(pn), static_cast<int>(sn))) continue;
      node_map[pn] = static_cast<int>(sn);
      used[sn] = true;
      if (adjacent_ok(static_cast<int>(pn))) assign(pn + 1);
      node_map[pn] = -1;
      used[sn] = false;
    }
  }

  void finalize() {
    Match m;
    m.node_map = node_map;
    m.wire_map.assign(P.wires.size(), -2);
    std::set<int> used_wires;

    // Resolve wires pinned by an ordered endpoint.
    for (size_t wi = 0; wi < P.wires.size(); ++wi) {
      const Wire& pw = P.wires[wi];
      int u = pw.src.node, v = pw.dst.node;
      bool u_ord = u >= 0 && ordered_kind(P.nodes[u].kind);
      bool v_ord = v >= 0 && ordered_kind(P.nodes[v].kind);
      if (!u_ord && !v_ord) continue;
      int sw;
      if (u_ord) {
        sw = S.nodes[node_map[u]].outs[pw.src.port];
      } else {
        sw = S.nodes[node_map[v]].ins[pw.dst.port];
      }
      if (sw < 0 || !S.wires[sw].alive || S.wires[sw].type != pw.type) return;
      // Check the other endpoint.
      if (u_ord && v >= 0) {
        if (S.wires[sw].dst.node != node_map[v]) return;
        if (ordered_kind(P.nodes[v].kind) && S.wires[sw].dst.port != pw.dst.port) return;
      }
      if (!u_ord && u >= 0) {
        if (S.wires[sw].src.node != node_map[u]) return;
      }
      if (v_ord && !u_ord && u < 0) {
        // src must be the state boundary or an unmatched producer: fine either way.
      }
      if (u_ord && v < 0) {
        // open continuation; fine.
      }
      if (used_wires.count(sw)) return;
      used_wires.insert(sw);
      m.wire_map[wi] = sw;
    }

    // Spider-spider pattern wires: pick distinct connecting wires.
    for (size_t wi = 0; wi < P.wires.size(); ++wi) {
      if (m.wire_map[wi] != -2) continue;
      const Wire& pw = P.wires[wi];
      int u = pw.src.node, v = pw.dst.node;
      if (u < 0 || v < 0) continue;
      bool found = false;
      for (int sw : S.nodes[node_map[u]].outs) {
        if (sw < 0 || !S.wires[sw].alive || used_wires.count(sw)) continue;
        if (S.wires[sw].dst.node == node_map[v]) {
          used_wires.insert(sw);
          m.wire_map[wi] = sw;
          found = true;
          break;
        }
      }
      if (!found) return;
    }

    // Open spider legs: direct bindings plus at most one absorber per side.
    for (size_t pn = 0; pn < P.nodes.size(); ++pn) {
      if (!P.nodes[pn].alive || ordered_kind(P.nodes[pn].kind)) continue;
      int sn = node_map[pn];
      for (bool in_side : {true, false}) {
        const auto& p_legs = in_side ? P.nodes[pn].ins : P.nodes[pn].outs;
        const auto& s_legs = in_side ? S.nodes[sn].ins : S.nodes[sn].outs;
        std::vector<int> open;
        for (int w : p_legs) {
          bool is_open = in_side ? P.wires[w].src.node < 0 : P.wires[w].dst.node < 0;
          if (is_open) open.push_back(w);
        }
        std::vector<int> remaining;
        for (int w : s_legs) {
          if (w >= 0 && S.wires[w].alive && !used_wires.count(w)) remaining.push_back(w);
        }
        std::sort(remaining.begin(), remaining.end());
        if (open.empty()) {
          if (!remaining.empty()) return;
          continue;
        }
        if (remaining.size() < open.size()) return;
        size_t direct = open.size() - 1;
        for (size_t i = 0; i < direct; ++i) {
          m.wire_map[open[i]] = remaining[i];
          used_wires.insert(remaining[i]);
        }
        std::vector<int> rest(remaining.begin() + direct, remaining.end());
        if (rest.size() == 1) {
          m.wire_map[open.back()] = rest[0];
          used_wires.insert(rest[0]);
        } else {
          for (int w : rest) used_wires.insert(w);
          m.wire_map[open.back()] = -1;
          m.residuals.push_back({static_cast<int>(pn), in_side, rest, open.back()});
        }
      }
    }

    for (int w : m.wire_map) {
      if (w == -2) return;  // unresolved (shouldn't happen)
    }
    if (!convex(m)) return;
    results.push_back(std::move(m));
  }

  // No directed path may leave the matched region and re-enter it.
  bool convex(const Match& m) const {
    std::vector<bool> in_region(S.nodes.size(), false);
    for (int sn : m.node_map) {
      if (sn >= 0) in_region[sn] = true;
    }
    std::set<int> internal;  // state wires fully inside the match
    for (size_t wi = 0; wi < P.wires.size(); ++wi) {
      const Wire& pw = P.wires[wi];
      if (pw.src.node >= 0 && pw.dst.node >= 0 && m.wire_map[wi] >= 0) {
        internal.insert(m.wire_map[wi]);
      }
    }
    std::vector<bool> seen(S.nodes.size(), false);
    std::vector<int> stack;
    for (size_t sn = 0; sn < S.nodes.size(); ++sn) {
      if (!in_region[sn]) continue;
      for (int w : S.nodes[sn].outs) {
        if (w < 0 || !S.wires[w].alive || internal.count(w)) continue;
        int next = S.wires[w].dst.node;
        if (next < 0) continue;
        if (in_region[next]) return false;  // unmatched direct wire re-enters
        if (!seen[next]) {
          seen[next] = true;
          stack.push_back(next);
        }
      }
    }
    while (!stack.empty()) {
      int n = stack.back();
      stack.pop_back();
      for (int w : S.nodes[n].outs) {
        if (w < 0 || !S.wires[w].alive) continue;
        int next = S.wires[w].dst.node;
        if (next < 0) continue;
        if (in_region[next]) return false;
        if (!seen[next]) {
          seen[next] = true;
          stack.push_back(next);
        }
      }
    }
    return true;
  }
};

std::vector<Match> find_matches(const Diagram& S, const Diagram& P) {
  Matcher m(S, P);
  m.run();
  return std::move(m.results);
}

Diagram apply_match(const Diagram& S, const Diagram& P, const Diagram& R, const Match& m) {
  Diagram out = S;

  // Residual spiders for absorbed legs, with a link wire each.
  std::map<int, int> link_for;  // pattern wire -> link wire id in `out`
  for (const auto& res : m.residuals) {
    const std::string& D = P.nodes[res.p_node].payload;
    int rs = out.add_node(NodeKind::Spider, D);
    int link = out.add_wire(D);
    if (res.is_in) {
      for (size_t i = 0; i < res.legs.size(); ++i) {
        out.wires[res.legs[i]].dst = {rs, static_cast<int>(i)};
        out.nodes[rs].ins.push_back(res.legs[i]);
      }
      out.set_src(link, rs, 0);
    } else {
      for (size_t i = 0; i < res.legs.size(); ++i) {
        out.wires[res.legs[i]].src = {rs, static_cast<int>(i)};
        out.nodes[rs].outs.push_back(res.legs[i]);
      }
      out.set_dst(link, rs, 0);
    }
    link_for[res.absorber_pwire] = link;
  }

  auto bound = [&](int p_wire) {
    if (m.wire_map[p_wire] >= 0) return m.wire_map[p_wire];
    return link_for.at(p_wire);
  };

  // Split state wires bound to a pattern through-wire (input and output).
  std::map<int, int> bound_out_override;
  for (size_t j = 0; j < P.inputs.size(); ++j) {
    for (size_t k = 0; k < P.outputs.size(); ++k) {
      if (P.inputs[j] == P.outputs[k]) {
        int ws = bound(P.inputs[j]);
        int ws2 = out.add_wire(out.wires[ws].type);
        retarget_dst(out, ws2, out.wires[ws].dst);
        bound_out_override[P.outputs[k]] = ws2;
      }
    }
  }
  auto bound_out = [&](int p_wire) {
    auto it = bound_out_override.find(p_wire);
    return it != bound_out_override.end() ? it->second : bound(p_wire);
  };

  // Remove the matched subgraph.
  for (int sn : m.node_map) {
    if (sn >= 0) out.kill_node(sn);
  }
  for (size_t wi = 0; wi < P.wires.size(); ++wi) {
    const Wire& pw = P.wires[wi];
    if (pw.src.node >= 0 && pw.dst.node >= 0 && m.wire_map[wi] >= 0) {
      out.kill_wire(m.wire_map[wi]);
    }
  }

  // Instantiate the replacement.
  std::vector<int> new_node(R.nodes.size(), -1);
  for (size_t i = 0; i < R.nodes.size(); ++i) {
    if (!R.nodes[i].alive) continue;
    new_node[i] = out.add_node(R.nodes[i].kind, R.nodes[i].payload);
    out.nodes[new_node[i]].ins.assign(R.nodes[i].ins.size(), -1);
    out.nodes[new_node[i]].outs.assign(R.nodes[i].outs.size(), -1);
  }
  // Boundary position of each R wire endpoint, if any.
  auto r_input_pos = [&](int w) {
    for (size_t j = 0; j < R.inputs.size(); ++j) {
      if (R.inputs[j] == w) return static_cast<int>(j);
    }
    return -1;
  };
  auto r_output_pos = [&](int w) {
    for (size_t k = 0; k < R.outputs.size(); ++k) {
      if (R.outputs[k] == w) return static_cast<int>(k);
    }
    return -1;
  };
  for (size_t wi = 0; wi < R.wires.size(); ++wi) {
    const Wire& rw = R.wires[wi];
    if (!rw.alive) continue;
    int in_pos = r_input_pos(static_cast<int>(wi));
    int out_pos = r_output_pos(static_cast<int>(wi));
    if (in_pos < 0 && out_pos < 0) {
      int w = out.add_wire(rw.type);
      out.set_src(w, new_node[rw.src.node], rw.src.port);
      out.set_dst(w, new_node[rw.dst.node], rw.dst.port);
    } else if (in_pos >= 0 && out_pos < 0) {
      int w = bound(P.inputs[in_pos]);
      out.set_dst(w, new_node[rw.dst.node], rw.dst.port);
    } else if (in_pos < 0 && out_pos >= 0) {
      int w = bound_out(P.outputs[out_pos]);
      out.set_src(w, new_node[rw.src.node], rw.src.port);
    } else {
      // Through-wire in the replacement: splice the two state wires.
      int w_in = bound(P.inputs[in_pos]);
      int w_out = bound_out(P.outputs[out_pos]);
      retarget_dst(out, w_in, out.wires[w_out].dst);
      out.kill_wire(w_out);
    }
  }
  out.compact();
  return out;
}

// Well-behavedness split: one spider becomes two disconnected spiders over a
// leg partition. Sound for well-behaved data services (mu;delta <= id x id).
struct SplitLoc {
  int node;
  unsigned mask_in;
  unsigned mask_out;
};

std::vector<SplitLoc> enumerate_splits(const Diagram& d, const std::string& data_object) {
  std::vector<SplitLoc> locs;
  for (size_t i = 0; i < d.nodes.size(); ++i) {
    const auto& n = d.nodes[i];
    if (!n.alive || n.kind != NodeKind::Spider || n.payload != data_object) continue;
    size_t m = n.ins.size(), k = n.outs.size();
    if (m < 2 || m + k > 10) continue;
    for (unsigned mi = 1; mi < (1u << m) - 1; ++mi) {
      if (!(mi & 1u)) continue;  // leg 0 stays with part one
      for (unsigned mo = 0; mo < (1u << k); ++mo) {
        locs.push_back({static_cast<int>(i), mi, mo});
      }
    }
  }
  return locs;
}

Diagram apply_split(const Diagram& d, const SplitLoc& loc) {
  Diagram out = d;
  const DiagramNode n = out.nodes[loc.node];
  int s1 = out.add_node(NodeKind::Spider, n.payload);
  int s2 = out.add_node(NodeKind::Spider, n.payload);
  for (size_t i = 0; i < n.ins.size(); ++i) {
    int target = (loc.mask_in >> i) & 1u ? s1 : s2;
    out.nodes[target].ins.push_back(n.ins[i]);
    out.wires[n.ins[i]].dst = {target, static_cast<int>(out.nodes[target].ins.size()) - 1};
  }
  for (size_t i = 0; i < n.outs.size(); ++i) {
    int target = (loc.mask_out >> i) & 1u ? s1 : s2;
    out.nodes[target].outs.push_back(n.outs[i]);
    out.wires[n.outs[i]].src = {target, static_cast<int>(out.nodes[target].outs.size()) - 1};
  }
  out.kill_node(loc.node);
  out.compact();
  return out;
}

const RewriteRule* find_rule(const std::vector<RewriteRule>& rules, const std::string& name) {
  for (const auto& r : rules) {
    if (r.name == name) return &r;
  }
  return nullptr;
}

}  // namespace

namespace {

// Single step without the leq direction guard (valley proofs legitimately
// rewrite the end side with leq rules r2l).
Diagram apply_step(const Diagram& d, const std::string& rule, int at, bool l2r,
                   const std::vector<RewriteRule>& rules) {
  const RewriteRule* r = find_rule(rules, rule);
  if (!r) throw DiagramError("unknown rule '" + rule + "'");
  if (r->split_move) {
    if (!l2r) throw DiagramError("split rule '" + rule + "' has no r2l matches");
    auto locs = enumerate_splits(d, r->data_object);
    if (at < 0 || at >= static_cast<int>(locs.size())) {
      throw DiagramError("no match for rule '" + rule + "' at location " + std::to_string(at));
    }
    return apply_split(d, locs[at]);
  }
  const Diagram& from = l2r ? r->lhs : r->rhs;
  const Diagram& to = l2r ? r->rhs : r->lhs;
  auto matches = find_matches(d, from);
  if (at < 0 || at >= static_cast<int>(matches.size())) {
    throw DiagramError("no match for rule '" + rule + "' at location " + std::to_string(at));
  }
  return apply_match(d, from, to, matches[at]);
}

}  // namespace

int count_matches(const Diagram& d, const std::string& rule, bool l2r,
                  const std::vector<RewriteRule>& rules) {
  const RewriteRule* r = find_rule(rules, rule);
  if (!r) throw DiagramError("unknown rule '" + rule + "'");
  if (r->split_move) {
    return l2r ? static_cast<int>(enumerate_splits(d, r->data_object).size()) : 0;
  }
  return static_cast<int>(find_matches(d, l2r ? r->lhs : r->rhs).size());
}

Diagram apply_axiom(const Diagram& d, const std::string& rule, int at, bool l2r,
                    const std::vector<RewriteRule>& rules) {
  const RewriteRule* r = find_rule(rules, rule);
  if (!r) throw DiagramError("unknown rule '" + rule + "'");
  if (r->leq_only && !l2r) {
    throw DiagramError("rule '" + rule + "' is leq-only: r2l application forbidden");
  }
  return apply_step(d, rule, at, l2r, rules);
}

// ---------------------------------------------------------------------------
// Proof search
// ---------------------------------------------------------------------------

namespace {

int spider_signature_distance(const Diagram& a, const Diagram& b) {
  auto sig = [](const Diagram& d) {
    std::multiset<std::tuple<std::string, size_t, size_t>> s;
    for (const auto& n : d.nodes) {
      if (n.alive && n.kind == NodeKind::Spider) s.insert({n.payload, n.ins.size(), n.outs.size()});
    }
    return s;
  };
  auto sa = sig(a), sb = sig(b);
  std::vector<std::tuple<std::string, size_t, size_t>> diff;
  std::set_symmetric_difference(sa.begin(), sa.end(), sb.begin(), sb.end(),
                                std::back_inserter(diff));
  return static_cast<int>(diff.size());
}

int heuristic(const Diagram& d, const Diagram& target) {
  return std::abs(d.live_node_count() - target.live_node_count()) +
         spider_signature_distance(d, target);
}

struct SearchState {
  Diagram d;
  uint64_t key;
  int parent = -1;
  ProofStep step;
  int side = 0;
  int depth = 0;
};

struct SearchResult {
  std::vector<std::pair<Diagram, ProofStep>> left_chain;   // from start, inclusive of moves
  std::vector<std::pair<Diagram, ProofStep>> right_chain;  // from end
  Diagram meet_left, meet_right;
};

// Expansion move: (rule index, direction). Split moves expand per location.
std::optional<Proof> search(const Diagram& d1_in, const Diagram& d2_in, const Budget& budget,
                            const Signature& sig, bool leq) {
  BoundaryType b1 = boundary(d1_in);
  BoundaryType b2 = boundary(d2_in);
  if (b1 != b2) throw DiagramError("boundary mismatch between proof goal sides");

  std::vector<RewriteRule> rules = build_rules(sig);
  Diagram start = normalize_data(d1_in);
  Diagram goal = normalize_data(d2_in);

  Proof proof;
  proof.start = start;
  proof.end = goal;
  if (iso_check(start, goal)) return proof;  // empty proof

  auto t0 = std::chrono::steady_clock::now();
  std::vector<SearchState> states;
  std::map<uint64_t, std::vector<int>> visited[2];

  auto add_root = [&](const Diagram& d, int side) {
    SearchState s;
    s.d = d;
    s.key = diagram_key(d);
    s.side = side;
    states.push_back(std::move(s));
    visited[side][states.back().key].push_back(static_cast<int>(states.size()) - 1);
  };
  add_root(start, 0);
  add_root(goal, 1);

  // (score, insertion counter, state id)
  using QEntry = std::tuple<int, long, int>;
  std::priority_queue<QEntry, std::vector<QEntry>, std::greater<>> queue;
  long counter = 0;
  queue.push({heuristic(start, goal), counter++, 0});
  queue.push({heuristic(goal, start), counter++, 1});

  int node_cap = std::max(start.live_node_count(), goal.live_node_count()) + 10;
  long expanded = 0;
  int meet_a = -1, meet_b = -1;  // state ids, sides 0 and 1

  auto try_insert = [&](Diagram&& nd, int side, int parent, const ProofStep& step) {
    if (nd.live_node_count() > node_cap) return;
    uint64_t key = diagram_key(nd);
    auto& own = visited[side][key];
    for (int id : own) {
      if (iso_check(states[id].d, nd)) return;  // already seen on this side
    }
    SearchState s;
    s.d = std::move(nd);
    s.key = key;
    s.parent = parent;
    s.step = step;
    s.side = side;
    s.depth = states[parent].depth + 1;
    states.push_back(std::move(s));
    int id = static_cast<int>(states.size()) - 1;
    own.push_back(id);
    // Meet?
    auto it = visited[1 - side].find(key);
    if (it != visited[1 - side].end()) {
      for (int other : it->second) {
        if (iso_check(states[other].d, states[id].d)) {
          if (side == 0) {
            meet_a = id;
            meet_b = other;
          } else {
            meet_a = other;
            meet_b = id;
          }
          return;
        }
      }
    }
    const Diagram& target = side == 0 ? goal : start;
    queue.push({states[id].depth + heuristic(states[id].d, target), counter++, id});
  };

  while (!queue.empty() && meet_a < 0) {
    auto [score, tie, id] = queue.top();
    queue.pop();
    if (++expanded > budget.max_states) break;
    if ((expanded & 0xff) == 0) {
      double elapsed = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (elapsed > budget.max_seconds) break;
    }
    const int side = states[id].side;
    for (size_t ri = 0; ri < rules.size() && meet_a < 0; ++ri) {
      const RewriteRule& rule = rules[ri];
      if (rule.split_move) {
        // leq-only split, left side only.
        if (!leq || side != 0) continue;
        auto locs = enumerate_splits(states[id].d, rule.data_object);
        for (size_t li = 0; li < locs.size() && meet_a < 0; ++li) {
          Diagram nd = normalize_data(apply_split(states[id].d, locs[li]));
          try_insert(std::move(nd), side, id, {rule.name, static_cast<int>(li), true});
        }
        continue;
      }
      for (bool l2r : {true, false}) {
        if (meet_a >= 0) break;
        if (rule.leq_only) {
          if (!leq) continue;
          // Left side applies l2r; right side applies r2l (flipped to l2r
          // when the right chain is reversed into the final proof).
          if (side == 0 && !l2r) continue;
          if (side == 1 && l2r) continue;
        }
        const Diagram& from = l2r ? rule.lhs : rule.rhs;
        const Diagram& to = l2r ? rule.rhs : rule.lhs;
        auto matches = find_matches(states[id].d, from);
        for (size_t mi = 0; mi < matches.size() && meet_a < 0; ++mi) {
          Diagram nd = normalize_data(apply_match(states[id].d, from, to, matches[mi]));
          try_insert(std::move(nd), side, id, {rule.name, static_cast<int>(mi), l2r});
        }
      }
    }
  }

  if (meet_a < 0) return std::nullopt;

  // Reconstruct both valley legs: start -> meet and end -> meet.
  auto chain_of = [&](int id) {
    std::vector<int> chain;
    for (int cur = id; cur >= 0; cur = states[cur].parent) chain.push_back(cur);
    std::reverse(chain.begin(), chain.end());
    return chain;
  };
  std::vector<int> left = chain_of(meet_a);
  std::vector<int> right = chain_of(meet_b);

  // Recompute stable match locations by exact replay along each leg.
  auto emit_leg = [&](const std::vector<int>& chain, const Diagram& root, bool from_end) {
    Diagram cur = root;
    for (size_t i = 1; i < chain.size(); ++i) {
      const ProofStep& rec = states[chain[i]].step;
      const Diagram& expect = states[chain[i]].d;
      bool placed = false;
      int n = count_matches(cur, rec.rule, rec.l2r, rules);
      for (int at = 0; at < n && !placed; ++at) {
        Diagram candidate = normalize_data(apply_step(cur, rec.rule, at, rec.l2r, rules));
        if (iso_check(candidate, expect)) {
          proof.steps.push_back({rec.rule, at, rec.l2r, from_end});
          cur = std::move(candidate);
          placed = true;
        }
      }
      if (!placed) throw DiagramError("internal: failed to replay proof step " + rec.rule);
    }
  };
  emit_leg(left, start, false);
  emit_leg(right, goal, true);
  return proof;
}

}  // namespace

std::optional<Proof> prove_equal(const Diagram& d1, const Diagram& d2, const Budget& budget,
                                 const Signature& sig) {
  return search(d1, d2, budget, sig, false);
}

std::optional<Proof> prove_leq(const Diagram& d1, const Diagram& d2, const Budget& budget,
                               const Signature& sig) {
  return search(d1, d2, budget, sig, true);
}

Diagram replay_proof(const Proof& proof, const std::vector<RewriteRule>& rules) {
  Diagram fwd = normalize_data(proof.start);
  Diagram bwd = normalize_data(proof.end);
  for (const auto& step : proof.steps) {
    Diagram& cur = step.from_end ? bwd : fwd;
    cur = normalize_data(apply_step(cur, step.rule, step.location, step.l2r, rules));
  }
  if (!iso_check(fwd, bwd)) throw DiagramError("proof does not replay: legs do not meet");
  return fwd;
}

std::string proof_to_text(const Proof& proof) {
  std::ostringstream out;
  for (const auto& step : proof.steps) {
    out << step.rule << " @ " << step.location << " " << (step.l2r ? "l2r" : "r2l")
        << (step.from_end ? " from-end" : "") << "\n";
  }
  return out.str();
}

// ---------------------------------------------------------------------------
// Derived morphisms
// ---------------------------------------------------------------------------

Diagram derive_phi(const std::string& attr, const Signature& sig) {
  const AttributeDecl* a = sig.find_attribute(attr);
  if (!a) throw DiagramError("unknown attribute '" + attr + "'");
  Diagram d;
  int g = a->implicit_copy ? d.add_node(NodeKind::Delta, a->value)
                           : d.add_node(NodeKind::Gamma, a->name);
  int mu = d.add_node(NodeKind::Mu, a->value);
  int eps = d.add_node(NodeKind::Eps, a->value);
  int w_m_in = d.add_wire(a->carrier);
  d.wires[w_m_in].src = {-1, 0};
  d.set_dst(w_m_in, g, 0);
  int w_d_in = d.add_wire(a->value);
  d.wires[w_d_in].src = {-1, 1};
  d.set_dst(w_d_in, mu, 1);
  int w_m_out = d.add_wire(a->carrier);
  d.set_src(w_m_out, g, 0);
  d.wires[w_m_out].dst = {-1, 0};
  int w_gd = d.add_wire(a->value);
  d.set_src(w_gd, g, 1);
  d.set_dst(w_gd, mu, 0);
  int w_me = d.add_wire(a->value);
  d.set_src(w_me, mu, 0);
  d.set_dst(w_me, eps, 0);
  d.inputs = {w_m_in, w_d_in};
  d.outputs = {w_m_out};
  return d;
}

Diagram build_chi(const std::string& attr1, const std::string& attr2, const Signature& sig) {
  const AttributeDecl* a1 = sig.find_attribute(attr1);
  const AttributeDecl* a2 = sig.find_attribute(attr2);
  if (!a1 || !a2) throw DiagramError("unknown attribute in chi");
  if (a1->value != a2->value) {
    throw DiagramError("chi requires attributes over one data service: " + attr1 + " vs " + attr2);
  }
  Term t;
  t.kind = Term::Kind::Chi;
  t.args = {attr1, attr2};
  return build_diagram(t, sig);
}

}  // namespace attrcat
