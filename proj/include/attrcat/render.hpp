#pragma once

#include <string>

#include "attrcat/diagram.hpp"
#include "attrcat/signature.hpp"

namespace attrcat {

/// Deterministic DOT export, read top-to-bottom: solid edges for entity
/// wires, dashed for data wires.
std::string render_dot(const Diagram& d, const Signature& sig);

}  // namespace attrcat
