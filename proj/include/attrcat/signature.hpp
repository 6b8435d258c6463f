#pragma once

#include <optional>
#include <string>
#include <vector>

#include "attrcat/term.hpp"

namespace attrcat {

enum class Sort { Entity, Data };

struct ObjectDecl {
  std::string name;
  Sort sort;
};

/// An attribute attaches a retrievable datum of type `value` to instances of
/// `carrier`. Every data object D implicitly carries a copy attribute whose
/// retrieval map is the comultiplication of D; it is registered under the
/// canonical name `copy_<D>` and prints as `copy`.
struct AttributeDecl {
  std::string name;      // canonical, unique across the signature
  std::string carrier;
  std::string value;
  bool implicit_copy = false;

  std::string display_name() const { return implicit_copy ? "copy" : name; }
};

enum class Polarity { Pos, Neg };

/// agree(attrL@posL, attrR@posR). Positions index the generator's combined
/// port list: domain positions first, then codomain positions.
struct AgreementLiteral {
  Polarity polarity = Polarity::Pos;
  std::string attr_left;
  int pos_left = 0;
  std::string attr_right;
  int pos_right = 0;
};

struct GeneratorDecl {
  std::string name;
  std::vector<std::string> domain;
  std::vector<std::string> codomain;
  std::vector<AgreementLiteral> pre;
  std::vector<AgreementLiteral> post;

  /// For each codomain position, the domain position carrying the same object
  /// forward (first-fit by object name), or -1 if the output is novel.
  std::vector<int> codomain_match() const;
  /// For each domain position, whether it survives into the codomain.
  std::vector<bool> domain_survives() const;
};

struct AxiomDecl {
  std::string name;
  enum class Kind { Equal, Leq } kind = Kind::Equal;
  TermPtr lhs;
  TermPtr rhs;
};

struct Finding {
  std::string where;
  std::string message;
};

struct Signature {
  std::vector<ObjectDecl> objects;
  std::vector<AttributeDecl> attributes;  // declared attrs, then implicit copies
  std::vector<GeneratorDecl> generators;
  std::vector<AxiomDecl> axioms;

  const ObjectDecl* find_object(const std::string& name) const;
  const AttributeDecl* find_attribute(const std::string& name) const;
  const GeneratorDecl* find_generator(const std::string& name) const;
  /// Resolves an attribute name as written in a literal: `copy` picks the
  /// implicit copy attribute of the data object at the carrier position.
  const AttributeDecl* resolve_attribute(const std::string& name,
                                         const std::string& carrier) const;
  bool is_data(const std::string& object) const;
  /// Canonical copy-attribute name for a data object.
  static std::string copy_attr_name(const std::string& data_object);
};

Signature parse_signature(std::string_view text);
std::vector<Finding> validate_signature(const Signature& sig);
std::string print_signature(const Signature& sig);

}  // namespace attrcat
