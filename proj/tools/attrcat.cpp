#include <cstdio>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include <CLI11.hpp>

#include "attrcat/geom.hpp"
#include "attrcat/pddl.hpp"
#include "attrcat/render.hpp"
#include "attrcat/rewrite.hpp"

using namespace attrcat;

namespace {

constexpr int kOk = 0;       // success / proved / valid
constexpr int kInvalid = 1;  // refuted / invalid
constexpr int kUnknown = 2;  // budget exhausted
constexpr int kUsage = 3;    // usage / parse error

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string file_stem(const std::string& path) {
  size_t slash = path.find_last_of('/');
  std::string name = slash == std::string::npos ? path : path.substr(slash + 1);
  size_t dot = name.find_last_of('.');
  return dot == std::string::npos ? name : name.substr(0, dot);
}

void write_out(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::cout << content;
  } else {
    std::ofstream out(out_path, std::ios::binary);
    out << content;
  }
}

std::map<std::string, std::string> load_terms_file(const std::string& path) {
  std::map<std::string, std::string> terms;
  std::istringstream in(slurp(path));
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    line_no++;
    size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::istringstream ls(line);
    std::string kw, name, eq;
    ls >> kw >> name >> eq;
    if (kw != "term" || eq != "=") {
      throw ParseError("expected: term <name> = <term>", line_no, 1);
    }
    std::string body;
    std::getline(ls, body);
    terms[name] = body;
  }
  return terms;
}

// Resolves a term reference: inline text, @term-name, or @axiom.lhs/.rhs.
Diagram resolve_term(const std::string& ref, const Signature& sig,
                     const std::map<std::string, std::string>& terms) {
  if (!ref.empty() && ref[0] == '@') {
    std::string name = ref.substr(1);
    auto it = terms.find(name);
    if (it != terms.end()) return build_diagram(*parse_term(it->second), sig);
    size_t dot = name.find_last_of('.');
    if (dot != std::string::npos) {
      std::string ax_name = name.substr(0, dot);
      std::string side = name.substr(dot + 1);
      for (const auto& ax : sig.axioms) {
        if (ax.name == ax_name) {
          if (side == "lhs") return build_diagram(*ax.lhs, sig);
          if (side == "rhs") return build_diagram(*ax.rhs, sig);
        }
      }
    }
    throw std::runtime_error("unresolved term reference '" + ref + "'");
  }
  return build_diagram(*parse_term(ref), sig);
}

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.9g", v);
  return buf;
}

std::string trace_csv(const GeomTrace& trace) {
  std::ostringstream out;
  out << "t,object,qx,qy,qz,qw,x,y,z\n";
  for (const auto& row : trace.rows) {
    out << fmt(row.t) << "," << row.object << "," << fmt(row.pose.rot.x) << ","
        << fmt(row.pose.rot.y) << "," << fmt(row.pose.rot.z) << "," << fmt(row.pose.rot.w) << ","
        << fmt(row.pose.pos.x) << "," << fmt(row.pose.pos.y) << "," << fmt(row.pose.pos.z) << "\n";
  }
  return out.str();
}

// Problem objects that reach the diagram boundary (everything the plan does
// not introduce as a fresh output), matching plan_to_diagram.
std::vector<std::string> diagram_input_names(const Plan& plan, const Problem& prob,
                                             const Signature& sig) {
  std::map<std::string, int> first_use, first_novel;
  for (size_t k = 0; k < plan.steps.size(); ++k) {
    const GeneratorDecl* gen = sig.find_generator(plan.steps[k].action);
    size_t m = gen->domain.size();
    for (size_t i = 0; i < m; ++i) {
      if (!first_use.count(plan.steps[k].args[i])) {
        first_use[plan.steps[k].args[i]] = static_cast<int>(k);
      }
    }
    auto match = gen->codomain_match();
    int rank = 0;
    for (size_t c = 0; c < match.size(); ++c) {
      if (match[c] < 0) {
        const std::string& obj = plan.steps[k].args[m + rank++];
        if (!first_novel.count(obj)) first_novel[obj] = static_cast<int>(k);
      }
    }
  }
  std::vector<std::string> names;
  for (const auto& obj : prob.objects) {
    bool created = first_novel.count(obj.name) &&
                   (!first_use.count(obj.name) || first_novel[obj.name] <= first_use[obj.name]);
    if (!created) names.push_back(obj.name);
  }
  return names;
}

// Codomain object names per plan step.
std::vector<std::vector<std::string>> plan_step_outputs(const Plan& plan, const Signature& sig) {
  std::vector<std::vector<std::string>> outs;
  for (const auto& step : plan.steps) {
    const GeneratorDecl* gen = sig.find_generator(step.action);
    auto match = gen->codomain_match();
    size_t m = gen->domain.size();
    std::vector<std::string> names;
    int rank = 0;
    for (size_t c = 0; c < match.size(); ++c) {
      if (match[c] >= 0) {
        names.push_back(step.args[match[c]]);
      } else {
        names.push_back(step.args[m + rank++]);
      }
    }
    outs.push_back(names);
  }
  return outs;
}

int run(int argc, char** argv) {
  CLI::App app{"attrcat - diagrammatic planning kernel"};
  app.require_subcommand(1);

  std::string sig_path, prob_path, plan_path, bind_path, out_path, terms_path;
  std::string lhs_ref, rhs_ref, term_ref, name_opt, format = "dot";
  long budget_states = 100000;
  double budget_seconds = 10.0;
  double dt = 0.01;
  long seed = 0;
  bool leq = false, compat_flip = false;

  auto* check = app.add_subcommand("check", "parse and validate a signature");
  check->add_option("signature", sig_path)->required();

  auto* emit_d = app.add_subcommand("emit-pddl", "emit a PDDL domain");
  emit_d->add_option("signature", sig_path)->required();
  emit_d->add_option("--name", name_opt, "domain name (default: file stem)");
  emit_d->add_option("--out", out_path);

  auto* emit_p = app.add_subcommand("emit-problem", "emit a PDDL problem");
  emit_p->add_option("signature", sig_path)->required();
  emit_p->add_option("problem", prob_path)->required();
  emit_p->add_option("--name", name_opt);
  emit_p->add_option("--out", out_path);

  auto* vplan = app.add_subcommand("validate-plan", "validate a plan against a problem");
  vplan->add_option("signature", sig_path)->required();
  vplan->add_option("problem", prob_path)->required();
  vplan->add_option("plan", plan_path)->required();
  vplan->add_flag("--compat-literal-flip", compat_flip, "use the literal bit-flip update rule");
  vplan->add_option("--out", out_path);

  auto* prove = app.add_subcommand("prove", "prove a diagram equality or inequality");
  prove->add_option("signature", sig_path)->required();
  prove->add_option("--lhs", lhs_ref)->required();
  prove->add_option("--rhs", rhs_ref)->required();
  prove->add_flag("--leq", leq, "prove lhs <= rhs instead of equality");
  prove->add_option("--budget", budget_states, "frontier state budget");
  prove->add_option("--seconds", budget_seconds, "time budget");
  prove->add_option("--terms", terms_path, "stored-terms file for @name references");
  prove->add_option("--seed", seed);
  prove->add_option("--out", out_path);

  auto* sim = app.add_subcommand("simulate", "execute a validated plan geometrically");
  sim->add_option("signature", sig_path)->required();
  sim->add_option("problem", prob_path)->required();
  sim->add_option("plan", plan_path)->required();
  sim->add_option("bindings", bind_path)->required();
  sim->add_option("--dt", dt, "sampling interval in seconds");
  sim->add_option("--out", out_path);

  auto* render = app.add_subcommand("render", "render a diagram");
  render->add_option("signature", sig_path)->required();
  render->add_option("--term", term_ref)->required();
  render->add_option("--terms", terms_path);
  render->add_option("--format", format, "output format (dot)");
  render->add_option("--out", out_path);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }

  try {
    Signature sig = parse_signature(slurp(sig_path));

    if (check->parsed()) {
      auto findings = validate_signature(sig);
      if (findings.empty()) {
        std::cout << "signature OK\n";
        return kOk;
      }
      for (const auto& f : findings) std::cerr << f.where << ": " << f.message << "\n";
      return kInvalid;
    }

    if (emit_d->parsed()) {
      std::string name = name_opt.empty() ? file_stem(sig_path) : name_opt;
      write_out(out_path, emit_domain(sig, name));
      return kOk;
    }

    if (emit_p->parsed()) {
      std::string name = name_opt.empty() ? file_stem(prob_path) : name_opt;
      Problem prob = parse_problem(slurp(prob_path), sig, name);
      write_out(out_path, emit_problem(prob, sig, file_stem(sig_path)));
      return kOk;
    }

    if (vplan->parsed()) {
      Problem prob = parse_problem(slurp(prob_path), sig, file_stem(prob_path));
      Plan plan = parse_plan(slurp(plan_path), sig, prob);
      UpdateRule rule = compat_flip ? UpdateRule::LiteralFlip : UpdateRule::MinimalModification;
      BoolTrace trace;
      try {
        trace = validate_plan(plan, prob, sig, rule);
      } catch (const PlanError& e) {
        std::cerr << e.what() << "\n";
        return kInvalid;
      }
      std::ostringstream report;
      report << "states: " << trace.states.size() << "\n";
      for (size_t i = 0; i < trace.states.size(); ++i) {
        report << "s" << i << ":";
        for (const auto& atom : trace.states[i].true_atoms()) report << " " << atom.to_string();
        report << "\n";
      }
      report << "goal: " << (trace.goal_satisfied ? "satisfied" : "not satisfied") << "\n";
      write_out(out_path, report.str());
      return trace.goal_satisfied ? kOk : kInvalid;
    }

    if (prove->parsed()) {
      std::map<std::string, std::string> terms;
      if (!terms_path.empty()) terms = load_terms_file(terms_path);
      Diagram d1 = resolve_term(lhs_ref, sig, terms);
      Diagram d2 = resolve_term(rhs_ref, sig, terms);
      if (boundary(d1) != boundary(d2)) {
        std::cerr << "boundary mismatch between --lhs and --rhs\n";
        return kUsage;
      }
      Budget budget{budget_states, budget_seconds};
      auto proof = leq ? prove_leq(d1, d2, budget, sig) : prove_equal(d1, d2, budget, sig);
      if (!proof) {
        std::cerr << "unknown: budget exhausted\n";
        return kUnknown;
      }
      write_out(out_path, proof_to_text(*proof));
      std::cerr << "proved in " << proof->steps.size() << " steps\n";
      return kOk;
    }

    if (sim->parsed()) {
      Problem prob = parse_problem(slurp(prob_path), sig, file_stem(prob_path));
      Plan plan = parse_plan(slurp(plan_path), sig, prob);
      GeomBinding bind = parse_bindings(slurp(bind_path), sig);
      Diagram diagram = plan_to_diagram(plan, prob, sig);
      GeomTrace trace = evaluate_plan(diagram, sig, bind, diagram_input_names(plan, prob, sig),
                                      plan_step_outputs(plan, sig), dt);
      for (const auto& f : trace.findings) std::cerr << f.where << ": " << f.message << "\n";
      for (const auto& [name, p] : trace.final_params) {
        std::cerr << "final " << name << " =";
        for (double v : p) std::cerr << " " << fmt(v);
        std::cerr << "\n";
      }
      write_out(out_path, trace_csv(trace));
      return trace.findings.empty() ? kOk : kInvalid;
    }

    if (render->parsed()) {
      if (format != "dot") {
        std::cerr << "unsupported --format '" << format << "'\n";
        return kUsage;
      }
      std::map<std::string, std::string> terms;
      if (!terms_path.empty()) terms = load_terms_file(terms_path);
      Diagram d = resolve_term(term_ref, sig, terms);
      write_out(out_path, render_dot(d, sig));
      return kOk;
    }
  } catch (const ParseError& e) {
    std::cerr << "parse error at line " << e.line << ", col " << e.col << ": " << e.what() << "\n";
    return kUsage;
  } catch (const PlanError& e) {
    std::cerr << e.what() << "\n";
    return kInvalid;
  } catch (const GeomError& e) {
    // Guard failures and undefined step maps refute the plan geometrically.
    std::cerr << e.what() << "\n";
    return kInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsage;
  }
  return kUsage;
}

}  // namespace

int main(int argc, char** argv) { return run(argc, argv); }
