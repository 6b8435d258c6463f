#include <doctest.h>

#include <set>

#include "attrcat/pddl.hpp"
#include "support/testutil.hpp"

using namespace attrcat;
using namespace attrcat::testutil;

namespace {

Problem robot_ball_problem(const Signature& sig) {
  return parse_problem(slurp(data_path("robot_ball.prob")), sig, "carry");
}

Plan robot_ball_plan(const Signature& sig, const Problem& prob) {
  return parse_plan(slurp(data_path("robot_ball.plan")), sig, prob);
}

// Minimal s-expression reader used as the reparse oracle for emitted PDDL.
struct Sexp {
  std::string atom;
  std::vector<Sexp> items;
  bool is_atom() const { return items.empty() && !atom.empty(); }
};

Sexp parse_sexp(const std::string& text, size_t& pos) {
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) pos++;
  };
  skip();
  Sexp s;
  if (text[pos] == '(') {
    pos++;
    skip();
    while (pos < text.size() && text[pos] != ')') {
      s.items.push_back(parse_sexp(text, pos));
      skip();
    }
    pos++;  // ')'
    return s;
  }
  while (pos < text.size() && !std::isspace(static_cast<unsigned char>(text[pos])) &&
         text[pos] != '(' && text[pos] != ')') {
    s.atom.push_back(text[pos++]);
  }
  return s;
}

Sexp parse_sexp(const std::string& text) {
  size_t pos = 0;
  return parse_sexp(text, pos);
}

const Sexp* find_section(const Sexp& root, const std::string& head) {
  for (const auto& item : root.items) {
    if (!item.items.empty() && item.items[0].atom == head) return &item;
  }
  return nullptr;
}

}  // namespace

TEST_CASE("emit_domain: structure and the moveto effect") {
  Signature sig = robot_ball_signature();
  std::string text = emit_domain(sig, "robot_ball");
  CHECK(text.find("(:requirements :strips :typing :equality)") != std::string::npos);
  CHECK(text.find("(agree-L-loc_R-copy ?x0 ?x1)") != std::string::npos);
  CHECK(text.find("(:action moveto") != std::string::npos);
  CHECK(text.find("(:action movetop") != std::string::npos);

  // Reparse oracle: declarations round-trip structurally.
  Sexp root = parse_sexp(text);
  CHECK(root.items[0].atom == "define");
  const Sexp* preds = find_section(root, ":predicates");
  REQUIRE(preds != nullptr);
  // One predicate per ordered attribute pair over L (4 attributes).
  CHECK(preds->items.size() - 1 == 16);
  int action_count = 0;
  for (const auto& item : root.items) {
    if (!item.items.empty() && item.items[0].atom == ":action") {
      action_count++;
      std::set<std::string> known = {"moveto", "movetop", "pick", "place"};
      CHECK(known.count(item.items[1].atom));
      // pick carries its precondition.
      if (item.items[1].atom == "pick") {
        bool has_pre = false;
        for (size_t i = 0; i < item.items.size(); ++i) {
          if (item.items[i].atom == ":precondition") has_pre = true;
        }
        CHECK(has_pre);
      }
    }
  }
  CHECK(action_count == 4);
}

TEST_CASE("emit_domain: generators only when present") {
  Signature sig = parse_signature("entity R\ndata L\nattr a : R -> L\n");
  std::string text = emit_domain(sig, "dom");
  CHECK(text.find(":action") == std::string::npos);
  CHECK(text.find("agree-L-a-copy") != std::string::npos);
}

TEST_CASE("emit_domain is injective on generators") {
  Signature sig = robot_ball_signature();
  std::string text = emit_domain(sig, "d");
  std::set<std::string> names;
  size_t pos = 0;
  while ((pos = text.find("(:action ", pos)) != std::string::npos) {
    size_t end = text.find('\n', pos);
    names.insert(text.substr(pos + 9, end - pos - 9));
    pos = end;
  }
  CHECK(names.size() == sig.generators.size());
}

TEST_CASE("problem parsing and saturation of the initial state") {
  Signature sig = robot_ball_signature();
  Problem prob = robot_ball_problem(sig);
  CHECK(prob.objects.size() == 5);
  CHECK(prob.atoms->size() == 20);
  // Mirrors are derived.
  CHECK(prob.init.get(prob.atoms->index_of({"agree-L-copy-loc_B", {"l1", "b"}})));
  // Robot and ball start apart.
  CHECK_FALSE(prob.init.get(prob.atoms->index_of({"agree-L-loc_R-loc_B", {"r", "b"}})));
}

TEST_CASE("emit_problem text") {
  Signature sig = robot_ball_signature();
  Problem prob = robot_ball_problem(sig);
  std::string text = emit_problem(prob, sig, "robot_ball");
  CHECK(text.find("(:objects r - R b - B rb - R_B l1 - L l2 - L)") != std::string::npos);
  CHECK(text.find("(agree-L-loc_B-copy b l1)") != std::string::npos);
  CHECK(text.find("(:goal (and (agree-L-loc_B-copy b l2)))") != std::string::npos);

  // Empty init: no init atoms at all.
  Problem empty = parse_problem("object r : R\nobject l : L\ngoal agree(loc_R@r, copy@l)\n", sig,
                                "empty");
  std::string etext = emit_problem(empty, sig, "robot_ball");
  CHECK(etext.find("(:init)") != std::string::npos);

  // Unsatisfiable goal is rejected.
  Problem bot = empty;
  bot.goal = Proposition::bot(bot.atoms);
  CHECK_THROWS_AS(emit_problem(bot, sig, "robot_ball"), PlanError);
}

TEST_CASE("plan parsing") {
  Signature sig = robot_ball_signature();
  Problem prob = robot_ball_problem(sig);
  Plan two = parse_plan("(moveto r l1)\n(pick r b rb)\n", sig, prob);
  CHECK(two.steps.size() == 2);
  CHECK(two.steps[0].action == "MoveTo");
  CHECK(two.steps[1].args == std::vector<std::string>{"r", "b", "rb"});

  CHECK_THROWS_AS(parse_plan("(moveto r)\n", sig, prob), ParseError);  // arity
  CHECK_THROWS_AS(parse_plan("(jump r l1)\n", sig, prob), ParseError);
  CHECK_THROWS_AS(parse_plan("(moveto r nowhere)\n", sig, prob), ParseError);

  Plan four = robot_ball_plan(sig, prob);
  CHECK(four.steps.size() == 4);
  // Round trip through the printer.
  Plan reparsed = parse_plan(print_plan(four), sig, prob);
  REQUIRE(reparsed.steps.size() == four.steps.size());
  for (size_t i = 0; i < four.steps.size(); ++i) {
    CHECK(reparsed.steps[i].action == four.steps[i].action);
    CHECK(reparsed.steps[i].args == four.steps[i].args);
  }
}

TEST_CASE("validate_plan: the four-step plan yields a five-state trace") {
  Signature sig = robot_ball_signature();
  Problem prob = robot_ball_problem(sig);
  Plan plan = robot_ball_plan(sig, prob);
  BoolTrace trace = validate_plan(plan, prob, sig);
  REQUIRE(trace.states.size() == 5);
  CHECK(trace.goal_satisfied);
  for (const auto& ann : trace.annotations) {
    CHECK(ann.pre_ok);
    CHECK(ann.post_ok);
    CHECK(ann.warnings.empty());
  }
  // After the first move the robot joins the ball.
  CHECK(trace.states[1].get(prob.atoms->index_of({"agree-L-loc_R-loc_B", {"r", "b"}})));
  // After placing, the ball sits at the goal.
  CHECK(trace.states[4].get(prob.atoms->index_of({"agree-L-loc_B-copy", {"b", "l2"}})));
  // Exclusivity: the ball is no longer at l1.
  CHECK_FALSE(trace.states[4].get(prob.atoms->index_of({"agree-L-loc_B-copy", {"b", "l1"}})));
}

TEST_CASE("validate_plan is deterministic") {
  Signature sig = robot_ball_signature();
  Problem prob = robot_ball_problem(sig);
  Plan plan = robot_ball_plan(sig, prob);
  BoolTrace a = validate_plan(plan, prob, sig);
  BoolTrace b = validate_plan(plan, prob, sig);
  REQUIRE(a.states.size() == b.states.size());
  for (size_t i = 0; i < a.states.size(); ++i) CHECK(a.states[i].bits == b.states[i].bits);
}

TEST_CASE("validate_plan: pick before moveto fails naming the predicate") {
  Signature sig = robot_ball_signature();
  Problem prob = robot_ball_problem(sig);
  Plan bad = parse_plan("(pick r b rb)\n(moveto r l1)\n", sig, prob);
  try {
    validate_plan(bad, prob, sig);
    FAIL("expected PlanError");
  } catch (const PlanError& e) {
    CHECK(e.step == 1);
    CHECK(std::string(e.what()).find("agree-L-loc_R-loc_B") != std::string::npos);
  }
}

TEST_CASE("validate_plan: empty plan with init satisfying the goal") {
  Signature sig = robot_ball_signature();
  Problem prob = parse_problem(
      "object b : B\nobject l2 : L\ninit agree(loc_B@b, copy@l2)\ngoal agree(loc_B@b, copy@l2)\n",
      sig, "done");
  BoolTrace trace = validate_plan(Plan{}, prob, sig);
  CHECK(trace.states.size() == 1);
  CHECK(trace.goal_satisfied);
}

TEST_CASE("validate_plan: without exclusivity hints only literals change") {
  Signature sig = robot_ball_signature();
  std::string text = slurp(data_path("robot_ball.prob"));
  // Strip the exclusive hints.
  std::string stripped;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("exclusive", 0) != 0) stripped += line + "\n";
  }
  Problem prob = parse_problem(stripped, sig, "carry");
  Plan step1 = parse_plan("(moveto r l1)\n", sig, prob);
  BoolTrace trace = validate_plan(step1, prob, sig);
  // The literal itself (and its mirror) hold...
  CHECK(trace.states[1].get(prob.atoms->index_of({"agree-L-loc_R-copy", {"r", "l1"}})));
  // ...but nothing is derived: the old location marker survives and the
  // robot-ball agreement is not inferred.
  CHECK(trace.states[1].get(prob.atoms->index_of({"agree-L-loc_R-copy", {"r", "l2"}})));
  CHECK_FALSE(trace.states[1].get(prob.atoms->index_of({"agree-L-loc_R-loc_B", {"r", "b"}})));
}

TEST_CASE("plan_to_diagram: structure of the four-step composite") {
  Signature sig = robot_ball_signature();
  Problem prob = robot_ball_problem(sig);
  Plan plan = robot_ball_plan(sig, prob);
  Diagram d = plan_to_diagram(plan, prob, sig);
  CHECK(validate_diagram(d, sig).empty());
  BoundaryType b = boundary(d);
  CHECK(b.inputs == std::vector<std::string>{"R", "B", "L", "L"});
  CHECK(b.outputs == std::vector<std::string>{"R", "B"});

  // Generator sequence equals the plan's step sequence, read top-to-bottom.
  std::vector<std::string> gens;
  for (int n : topo_order(d)) {
    if (d.nodes[n].kind == NodeKind::Generator) gens.push_back(d.nodes[n].payload);
  }
  REQUIRE(gens.size() == plan.steps.size());
  for (size_t i = 0; i < gens.size(); ++i) CHECK(gens[i] == plan.steps[i].action);

  // The Pick precondition appears as a chi guard: two gammas into a merge.
  int gamma_count = 0, mu_count = 0, eps_count = 0, phi_count = 0;
  for (const auto& node : d.nodes) {
    if (!node.alive) continue;
    if (node.kind == NodeKind::Gamma) gamma_count++;
    if (node.kind == NodeKind::Mu) mu_count++;
    if (node.kind == NodeKind::Eps) eps_count++;
    if (node.kind == NodeKind::Phi) phi_count++;
  }
  CHECK(gamma_count == 5);  // chi reads (2) + pick post source + place post sources (2)
  CHECK(mu_count == 1);     // the chi merge
  CHECK(eps_count == 1);    // the chi delete
  CHECK(phi_count == 5);    // moveto, pick, movetop filters and place (2)
}

TEST_CASE("plan_to_diagram: empty plan is the identity on the object list") {
  Signature sig = robot_ball_signature();
  Problem prob = robot_ball_problem(sig);
  Diagram d = plan_to_diagram(Plan{}, prob, sig);
  CHECK(d.live_node_count() == 0);
  CHECK(boundary(d).inputs == std::vector<std::string>{"R", "B", "R_B", "L", "L"});
  CHECK(boundary(d).outputs == boundary(d).inputs);
}

TEST_CASE("plan_to_diagram rejects invalid plans") {
  Signature sig = robot_ball_signature();
  Problem prob = robot_ball_problem(sig);
  Plan bad = parse_plan("(pick r b rb)\n", sig, prob);
  CHECK_THROWS_AS(plan_to_diagram(bad, prob, sig), PlanError);
}

TEST_CASE("verify_condition: declared conditions follow from the axioms") {
  Signature sig = robot_ball_signature();
  Budget budget;
  const GeneratorDecl* moveto = sig.find_generator("MoveTo");
  REQUIRE(moveto != nullptr);
  auto post = verify_condition("MoveTo", false, moveto->post[0], sig, budget);
  REQUIRE(post.has_value());

  const GeneratorDecl* pick = sig.find_generator("Pick");
  REQUIRE(pick != nullptr);
  auto pre = verify_condition("Pick", true, pick->pre[0], sig, budget);
  REQUIRE(pre.has_value());
}

TEST_CASE("verify_condition: unsupported conditions come back unknown") {
  Signature sig = parse_signature(
      "entity R\n"
      "entity B\n"
      "data L\n"
      "attr loc_R : R -> L\n"
      "attr loc_B : B -> L\n"
      "gen F : R * B -> R * B\n");
  Budget budget{500, 2.0};
  AgreementLiteral lit{Polarity::Pos, "loc_R", 0, "loc_B", 1};
  auto proof = verify_condition("F", true, lit, sig, budget);
  CHECK_FALSE(proof.has_value());
}

TEST_CASE("generator_action lifts through the boolean engine like validate_plan") {
  // On a hint-free problem, folding lift_action over the plan agrees with
  // validate_plan (the saturation adds nothing without exclusivity).
  Signature sig = robot_ball_signature();
  std::string stripped;
  std::istringstream in(slurp(data_path("robot_ball.prob")));
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("exclusive", 0) != 0) stripped += line + "\n";
  }
  Problem prob = parse_problem(stripped, sig, "carry");
  // Without hints pick's precondition cannot be derived, so move only.
  Plan plan = parse_plan("(moveto r l1)\n(moveto r l2)\n", sig, prob);

  BoolTrace trace = validate_plan(plan, prob, sig);
  Valuation s = prob.init;
  for (const auto& step : plan.steps) {
    const GeneratorDecl* gen = sig.find_generator(step.action);
    BoolAction action = generator_action(sig, *gen);
    Binding j;
    for (size_t i = 0; i < step.args.size(); ++i) j["x" + std::to_string(i)] = step.args[i];
    s = lift_action(action, j, prob.objects, s);
  }
  CHECK(s.bits == trace.states.back().bits);
}
