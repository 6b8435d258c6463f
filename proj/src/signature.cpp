#include "attrcat/signature.hpp"

#include <algorithm>
#include <cctype>
#include <set>
#include <sstream>

#include "attrcat/diagram.hpp"

namespace attrcat {

std::vector<int> GeneratorDecl::codomain_match() const {
  std::vector<int> match(codomain.size(), -1);
  std::vector<bool> used(domain.size(), false);
  for (size_t c = 0; c < codomain.size(); ++c) {
    for (size_t d = 0; d < domain.size(); ++d) {
      if (!used[d] && domain[d] == codomain[c]) {
        match[c] = static_cast<int>(d);
        used[d] = true;
        break;
      }
    }
  }
  return match;
}

std::vector<bool> GeneratorDecl::domain_survives() const {
  std::vector<bool> survives(domain.size(), false);
  for (int d : codomain_match()) {
    if (d >= 0) survives[d] = true;
  }
  return survives;
}

const ObjectDecl* Signature::find_object(const std::string& name) const {
  for (const auto& o : objects) {
    if (o.name == name) return &o;
  }
  return nullptr;
}

const AttributeDecl* Signature::find_attribute(const std::string& name) const {
  for (const auto& a : attributes) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const GeneratorDecl* Signature::find_generator(const std::string& name) const {
  for (const auto& g : generators) {
    if (g.name == name) return &g;
  }
  return nullptr;
}

const AttributeDecl* Signature::resolve_attribute(const std::string& name,
                                                  const std::string& carrier) const {
  if (name == "copy") return find_attribute(copy_attr_name(carrier));
  return find_attribute(name);
}

bool Signature::is_data(const std::string& object) const {
  const ObjectDecl* obj = find_object(object);
  return obj && obj->sort == Sort::Data;
}

std::string Signature::copy_attr_name(const std::string& data_object) {
  return "copy_" + data_object;
}

namespace {

struct LineScanner {
  std::string_view text;
  size_t pos = 0;
  int line_no = 0;

  // Returns the next non-empty line with comments stripped, or nullopt.
  std::optional<std::pair<std::string, int>> next() {
    while (pos < text.size()) {
      size_t end = text.find('\n', pos);
      if (end == std::string_view::npos) end = text.size();
      std::string line(text.substr(pos, end - pos));
      pos = end + 1;
      line_no++;
      size_t hash = line.find('#');
      if (hash != std::string::npos) line.erase(hash);
      if (line.find_first_not_of(" \t\r") != std::string::npos) {
        return std::make_pair(line, line_no);
      }
    }
    return std::nullopt;
  }
};

std::vector<std::string> tokenize(const std::string& line) {
  std::vector<std::string> toks;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) {
      toks.push_back(cur);
      cur.clear();
    }
  };
  for (char c : line) {
    if (std::isspace(static_cast<unsigned char>(c))) {
      flush();
    } else if (c == ':' || c == ',') {
      flush();
      toks.push_back(std::string(1, c));
    } else {
      cur.push_back(c);
    }
  }
  flush();
  return toks;
}

// agree(attr@idx, attr@idx) or !agree(...). Returns literals found on a line.
std::vector<AgreementLiteral> parse_literals(const std::string& text, int line) {
  std::vector<AgreementLiteral> lits;
  size_t i = 0;
  auto skip_ws = [&] {
    while (i < text.size() && std::isspace(static_cast<unsigned char>(text[i]))) i++;
  };
  auto ident = [&]() -> std::string {
    std::string out;
    while (i < text.size() &&
           (std::isalnum(static_cast<unsigned char>(text[i])) || text[i] == '_' ||
            text[i] == '\'')) {
      out.push_back(text[i++]);
    }
    if (out.empty()) throw ParseError("expected identifier in literal", line, (int)i + 1);
    return out;
  };
  auto expect = [&](char c) {
    skip_ws();
    if (i >= text.size() || text[i] != c) {
      throw ParseError(std::string("expected '") + c + "' in literal", line, (int)i + 1);
    }
    i++;
  };
  while (true) {
    skip_ws();
    if (i >= text.size()) break;
    AgreementLiteral lit;
    if (text[i] == '!') {
      lit.polarity = Polarity::Neg;
      i++;
      skip_ws();
    }
    std::string kw = ident();
    if (kw != "agree") throw ParseError("expected 'agree' literal", line, (int)i + 1);
    expect('(');
    skip_ws();
    lit.attr_left = ident();
    expect('@');
    skip_ws();
    lit.pos_left = std::stoi(ident());
    expect(',');
    skip_ws();
    lit.attr_right = ident();
    expect('@');
    skip_ws();
    lit.pos_right = std::stoi(ident());
    expect(')');
    lits.push_back(lit);
    skip_ws();
    if (i < text.size() && text[i] == ',') i++;
  }
  return lits;
}

}  // namespace

Signature parse_signature(std::string_view text) {
  Signature sig;
  LineScanner scanner{text};
  std::set<std::string> names;
  auto claim_name = [&](const std::string& n, int line) {
    if (!names.insert(n).second) {
      throw ParseError("duplicate name '" + n + "'", line, 1);
    }
  };
  auto require_object = [&](const std::string& n, int line) {
    if (!sig.find_object(n)) {
      throw ParseError("unknown object '" + n + "'", line, 1);
    }
  };

  GeneratorDecl* open_gen = nullptr;
  while (auto entry = scanner.next()) {
    const auto& [line, line_no] = *entry;
    bool indented = line[0] == ' ' || line[0] == '\t';
    std::vector<std::string> toks = tokenize(line);
    const std::string& head = toks[0];

    if (indented && (head == "pre" || head == "post")) {
      if (!open_gen) throw ParseError("'" + head + "' outside a generator block", line_no, 1);
      size_t at = line.find(head) + head.size();
      auto lits = parse_literals(line.substr(at), line_no);
      auto& dest = head == "pre" ? open_gen->pre : open_gen->post;
      dest.insert(dest.end(), lits.begin(), lits.end());
      continue;
    }

    if (head == "entity" || head == "data") {
      if (toks.size() != 2) throw ParseError("expected: " + head + " <name>", line_no, 1);
      claim_name(toks[1], line_no);
      sig.objects.push_back({toks[1], head == "entity" ? Sort::Entity : Sort::Data});
      open_gen = nullptr;
    } else if (head == "attr") {
      // attr <name> : <carrier> -> <value>
      if (toks.size() != 6 || toks[2] != ":" || toks[4] != "->") {
        throw ParseError("expected: attr <name> : <carrier> -> <value>", line_no, 1);
      }
      claim_name(toks[1], line_no);
      require_object(toks[3], line_no);
      require_object(toks[5], line_no);
      sig.attributes.push_back({toks[1], toks[3], toks[5], false});
      open_gen = nullptr;
    } else if (head == "gen") {
      // gen <name> : <obj> (* <obj>)* -> <obj> (* <obj>)*
      if (toks.size() < 4 || toks[2] != ":") {
        throw ParseError("expected: gen <name> : <domain> -> <codomain>", line_no, 1);
      }
      claim_name(toks[1], line_no);
      GeneratorDecl gen;
      gen.name = toks[1];
      bool in_domain = true;
      for (size_t i = 3; i < toks.size(); ++i) {
        if (toks[i] == "->") {
          in_domain = false;
        } else if (toks[i] == "*") {
          continue;
        } else {
          require_object(toks[i], line_no);
          (in_domain ? gen.domain : gen.codomain).push_back(toks[i]);
        }
      }
      if (in_domain) throw ParseError("generator missing '->'", line_no, 1);
      sig.generators.push_back(std::move(gen));
      open_gen = &sig.generators.back();
    } else if (head == "axiom") {
      // axiom <name> : <term> = <term>  |  axiom <name> : <term> <= <term>
      size_t colon = line.find(':');
      if (toks.size() < 3 || colon == std::string::npos) {
        throw ParseError("expected: axiom <name> : <term> (=|<=) <term>", line_no, 1);
      }
      claim_name(toks[1], line_no);
      std::string body = line.substr(colon + 1);
      AxiomDecl ax;
      ax.name = toks[1];
      size_t leq = body.find("<=");
      size_t eq = body.find('=');
      std::string lhs_text, rhs_text;
      if (leq != std::string::npos) {
        ax.kind = AxiomDecl::Kind::Leq;
        lhs_text = body.substr(0, leq);
        rhs_text = body.substr(leq + 2);
      } else if (eq != std::string::npos) {
        ax.kind = AxiomDecl::Kind::Equal;
        lhs_text = body.substr(0, eq);
        rhs_text = body.substr(eq + 1);
      } else {
        throw ParseError("axiom missing '=' or '<='", line_no, 1);
      }
      try {
        ax.lhs = parse_term(lhs_text);
        ax.rhs = parse_term(rhs_text);
      } catch (const ParseError& e) {
        throw ParseError("in axiom '" + ax.name + "': " + e.what(), line_no, e.col);
      }
      sig.axioms.push_back(std::move(ax));
      open_gen = nullptr;
    } else {
      throw ParseError("unknown declaration '" + head + "'", line_no, 1);
    }
  }

  // Implicit copy attribute per data object.
  for (const auto& obj : sig.objects) {
    if (obj.sort == Sort::Data) {
      sig.attributes.push_back({Signature::copy_attr_name(obj.name), obj.name, obj.name, true});
    }
  }
  return sig;
}

std::vector<Finding> validate_signature(const Signature& sig) {
  std::vector<Finding> findings;
  auto report = [&](const std::string& where, const std::string& message) {
    findings.push_back({where, message});
  };

  std::set<std::string> object_names;
  for (const auto& o : sig.objects) {
    if (!object_names.insert(o.name).second) report(o.name, "duplicate object name");
  }

  std::set<std::string> attr_names;
  for (const auto& a : sig.attributes) {
    if (!attr_names.insert(a.name).second) report(a.name, "duplicate attribute name");
    if (!sig.find_object(a.carrier)) report(a.name, "unknown carrier '" + a.carrier + "'");
    const ObjectDecl* value = sig.find_object(a.value);
    if (!value) {
      report(a.name, "unknown value object '" + a.value + "'");
    } else if (value->sort != Sort::Data) {
      report(a.name, "attribute value must be data sort");
    }
  }

  for (const auto& g : sig.generators) {
    for (const auto& obj : g.domain) {
      if (!sig.find_object(obj)) report(g.name, "unknown domain object '" + obj + "'");
    }
    for (const auto& obj : g.codomain) {
      if (!sig.find_object(obj)) report(g.name, "unknown codomain object '" + obj + "'");
    }
    std::vector<std::string> ports = g.domain;
    ports.insert(ports.end(), g.codomain.begin(), g.codomain.end());
    std::vector<int> match = g.codomain_match();

    auto check_literal = [&](const AgreementLiteral& lit, bool is_pre) {
      int limit = is_pre ? static_cast<int>(g.domain.size()) : static_cast<int>(ports.size());
      for (auto [attr, pos] : {std::pair{lit.attr_left, lit.pos_left},
                               std::pair{lit.attr_right, lit.pos_right}}) {
        if (pos < 0 || pos >= limit) {
          report(g.name, "literal position " + std::to_string(pos) + " out of range");
          return;
        }
        const AttributeDecl* a = sig.resolve_attribute(attr, ports[pos]);
        if (!a) {
          report(g.name, "unknown attribute '" + attr + "' in literal");
          return;
        }
        if (a->carrier != ports[pos]) {
          report(g.name, "attribute '" + attr + "' does not apply to a " + ports[pos] +
                             " at position " + std::to_string(pos));
        }
      }
      const AttributeDecl* l = sig.resolve_attribute(lit.attr_left, ports[lit.pos_left]);
      const AttributeDecl* r = sig.resolve_attribute(lit.attr_right, ports[lit.pos_right]);
      if (l && r && l->value != r->value) {
        report(g.name, "agreement between attributes of different data services");
      }
      if (!is_pre && l) {
        // The left side of a post literal states a fact about the post-state,
        // so it must name an object that survives the generator.
        bool in_codomain = lit.pos_left >= static_cast<int>(g.domain.size());
        bool survives = !in_codomain && g.domain_survives()[lit.pos_left];
        if (!in_codomain && !survives) {
          report(g.name, "post literal targets consumed input position " +
                             std::to_string(lit.pos_left));
        }
      }
      (void)match;
    };
    for (const auto& lit : g.pre) check_literal(lit, true);
    for (const auto& lit : g.post) check_literal(lit, false);
  }

  for (const auto& ax : sig.axioms) {
    try {
      Diagram lhs = build_diagram(*ax.lhs, sig);
      Diagram rhs = build_diagram(*ax.rhs, sig);
      BoundaryType bl = boundary(lhs);
      BoundaryType br = boundary(rhs);
      if (bl.inputs != br.inputs || bl.outputs != br.outputs) {
        report(ax.name, "axiom boundary mismatch");
      }
      for (const auto& f : validate_diagram(lhs, sig)) {
        report(ax.name, "lhs: " + f.message);
      }
      for (const auto& f : validate_diagram(rhs, sig)) {
        report(ax.name, "rhs: " + f.message);
      }
    } catch (const std::exception& e) {
      report(ax.name, e.what());
    }
  }
  return findings;
}

std::string print_signature(const Signature& sig) {
  std::ostringstream out;
  for (const auto& o : sig.objects) {
    out << (o.sort == Sort::Entity ? "entity " : "data ") << o.name << "\n";
  }
  for (const auto& a : sig.attributes) {
    if (a.implicit_copy) continue;
    out << "attr " << a.name << " : " << a.carrier << " -> " << a.value << "\n";
  }
  auto print_literals = [&](const char* label, const std::vector<AgreementLiteral>& lits) {
    if (lits.empty()) return;
    out << "  " << label << " ";
    for (size_t i = 0; i < lits.size(); ++i) {
      const auto& lit = lits[i];
      if (i) out << ", ";
      if (lit.polarity == Polarity::Neg) out << "!";
      out << "agree(" << lit.attr_left << "@" << lit.pos_left << ", " << lit.attr_right << "@"
          << lit.pos_right << ")";
    }
    out << "\n";
  };
  for (const auto& g : sig.generators) {
    out << "gen " << g.name << " : ";
    for (size_t i = 0; i < g.domain.size(); ++i) {
      if (i) out << " * ";
      out << g.domain[i];
    }
    out << " -> ";
    for (size_t i = 0; i < g.codomain.size(); ++i) {
      if (i) out << " * ";
      out << g.codomain[i];
    }
    out << "\n";
    print_literals("pre", g.pre);
    print_literals("post", g.post);
  }
  for (const auto& ax : sig.axioms) {
    out << "axiom " << ax.name << " : " << print_term(*ax.lhs)
        << (ax.kind == AxiomDecl::Kind::Equal ? " = " : " <= ") << print_term(*ax.rhs) << "\n";
  }
  return out.str();
}

}  // namespace attrcat
