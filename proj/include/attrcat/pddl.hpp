#pragma once

#include <optional>
#include <string>
#include <vector>

#include "attrcat/boolean.hpp"
#include "attrcat/diagram.hpp"
#include "attrcat/rewrite.hpp"
#include "attrcat/signature.hpp"

namespace attrcat {

class PlanError : public std::runtime_error {
 public:
  PlanError(std::string message, int step) : std::runtime_error(std::move(message)), step(step) {}
  int step;  // 1-based; 0 = not step-specific
};

/// A ground agreement fact: attribute instances (attr, object) on both sides.
struct GroundLiteral {
  bool positive = true;
  std::string attr_left;
  std::string obj_left;
  std::string attr_right;
  std::string obj_right;
};

struct Problem {
  std::string name;
  std::vector<TypedObj> objects;
  std::vector<std::string> exclusive;  // attribute names (canonical)
  AtomSetPtr atoms;
  Valuation init;
  std::vector<GroundLiteral> goal_literals;
  Proposition goal;
};

struct PlanStep {
  std::string action;             // generator name (canonical)
  std::vector<std::string> args;  // domain objects, then novel codomain objects
};

struct Plan {
  std::vector<PlanStep> steps;
};

struct StepAnnotation {
  bool pre_ok = true;
  std::vector<GroundLiteral> effect;  // literals applied (before derivation)
  bool post_ok = true;
  std::vector<std::string> warnings;
};

struct BoolTrace {
  std::vector<Valuation> states;  // length = steps + 1
  std::vector<StepAnnotation> annotations;
  bool goal_satisfied = false;
};

/// PDDL action name for a generator (lowercased, PDDL-safe).
std::string pddl_action_name(const std::string& generator);
/// Predicate name for an ordered attribute pair over a shared data service.
std::string agreement_predicate(const Signature& sig, const AttributeDecl& left,
                                const AttributeDecl& right);

/// Derived predicate list: one per ordered attribute pair sharing a data
/// service (including the implicit copy attributes).
std::vector<TypedPred> derive_predicates(const Signature& sig);

/// Atom set for a problem: agreement predicates instantiated over all
/// ordered pairs of distinct attribute instances.
AtomSetPtr problem_atoms(const Signature& sig, const std::vector<TypedObj>& objects);

std::string emit_domain(const Signature& sig, const std::string& name);
std::string emit_problem(const Problem& p, const Signature& sig, const std::string& domain_name);

Problem parse_problem(std::string_view text, const Signature& sig, const std::string& name);

Plan parse_plan(std::string_view text, const Signature& sig, const Problem& problem);
std::string print_plan(const Plan& plan);

/// Folds the action updates over the plan from the initial state. Exclusive
/// attribute hints extend each post-condition with the forced negative
/// literals and the agreement facts derivable through known values; the
/// resulting literal conjunction is applied by minimal modification.
BoolTrace validate_plan(const Plan& plan, const Problem& problem, const Signature& sig,
                        UpdateRule rule = UpdateRule::MinimalModification);

/// The string diagram induced by a validated plan: one generator node per
/// step, chi checks for preconditions, gamma/phi filters for postconditions.
Diagram plan_to_diagram(const Plan& plan, const Problem& problem, const Signature& sig);

/// Checks a declared pre/post condition of a generator against the diagram
/// axioms: builds the guarded composite and asks prove_equal.
std::optional<Proof> verify_condition(const std::string& generator, bool is_pre,
                                      const AgreementLiteral& lit, const Signature& sig,
                                      const Budget& budget);

/// The BoolAction corresponding to a generator (local atoms over its
/// parameters); parameter names are x0, x1, ...
BoolAction generator_action(const Signature& sig, const GeneratorDecl& gen);

}  // namespace attrcat
