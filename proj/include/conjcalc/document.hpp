#pragma once

#include <map>
#include <string>
#include <string_view>
#include <variant>

#include "conjcalc/convex_fn.hpp"
#include "conjcalc/operators.hpp"

namespace conjcalc {

using Operator = std::variant<PreservingOp, ReversingOp>;

/// A set of named functions and operators sharing one dimension.
///
/// JSON layout:
///   { "version": 1, "dimension": n,
///     "functions": { name: entry, ... }, "operators": { name: entry, ... } }
/// Function specs:
///   { "kind": "max_affine", "pieces": [{"u": [..], "alpha": a}],
///     "domain": [{"a": [..], "b": b}] }             (domain optional)
///   { "kind": "point_indicator", "anchor": [..], "level": l }  (level optional)
///   { "kind": "grid", "axes": [{"lo", "hi", "count"}], "values": [..] }
/// Grid values are row-major with the last axis fastest; "inf" stands for +inf.
/// Operator specs:
///   { "kind": "preserving", "E": [[..]], "c": [..], "w": [..], "tau", "beta" }
///   { "kind": "reversing", "H": [[..]], "v": [..], "y": [..], "rho", "tau" }
struct Document {
  static constexpr int kVersion = 1;

  int version = kVersion;
  int dimension = 1;
  std::map<std::string, ConvexFn> functions;
  std::map<std::string, Operator> operators;

  const ConvexFn& function(const std::string& name) const;
  const Operator& op(const std::string& name) const;
};

/// Throws SchemaError whose path() is a JSON pointer to the offending field;
/// syntax errors carry the line and column in the message.
Document parse_document(std::string_view text);

/// Pretty-printed JSON. Numbers use the shortest decimal form that reads back
/// to the same double.
std::string serialize_document(const Document& doc);

Document read_document(const std::string& path);
void write_document(const Document& doc, const std::string& path);

}  // namespace conjcalc
