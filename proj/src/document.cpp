#include "conjcalc/document.hpp"

#include <cmath>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "conjcalc/errors.hpp"

namespace conjcalc {

using nlohmann::json;

namespace {

std::string escape_token(const std::string& name) {
  std::string out;
  for (char ch : name) {
    if (ch == '~') out += "~0";
    else if (ch == '/') out += "~1";
    else out += ch;
  }
  return out;
}

std::string child(const std::string& path, const std::string& key) {
  return path + "/" + escape_token(key);
}

std::string child(const std::string& path, std::size_t index) {
  return path + "/" + std::to_string(index);
}

const json& field(const json& obj, const std::string& path, const char* key) {
  const auto it = obj.find(key);
  if (it == obj.end()) throw SchemaError(child(path, key), "missing required field");
  return *it;
}

void expect_object(const json& j, const std::string& path,
                   std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& [key, value] : j.items())
    if (!keys.count(key)) throw SchemaError(child(path, key), "unknown field");
}

double number(const json& j, const std::string& path, bool allow_inf = false) {
  if (j.is_number()) return j.get<double>();
  if (allow_inf && j.is_string() && j.get<std::string>() == "inf")
    return std::numeric_limits<double>::infinity();
  throw SchemaError(path, allow_inf ? "expected a number or \"inf\"" : "expected a number");
}

int integer(const json& j, const std::string& path) {
  if (!j.is_number_integer()) throw SchemaError(path, "expected an integer");
  return j.get<int>();
}

Vec vec(const json& j, const std::string& path, int n) {
  if (!j.is_array()) throw SchemaError(path, "expected an array");
  if (static_cast<int>(j.size()) != n)
    throw SchemaError(path, "expected " + std::to_string(n) + " entries, got " +
                                std::to_string(j.size()));
  Vec v(n);
  for (int k = 0; k < n; ++k) v[k] = number(j[static_cast<std::size_t>(k)], child(path, k));
  return v;
}

Mat mat(const json& j, const std::string& path, int n) {
  if (!j.is_array() || static_cast<int>(j.size()) != n)
    throw SchemaError(path, "expected " + std::to_string(n) + " rows");
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m.row(i) = vec(j[static_cast<std::size_t>(i)], child(path, i), n);
  return m;
}

// Re-raises library validation errors at the path of the entry being built.
template <class Build>
auto at_path(const std::string& path, Build&& build) {
  try {
    return build();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    throw SchemaError(path, e.what());
  }
}

ConvexFn parse_function(const json& j, const std::string& path, int n) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  const json& kind_j = field(j, path, "kind");
  if (!kind_j.is_string()) throw SchemaError(child(path, "kind"), "expected a string");
  const auto kind = kind_j.get<std::string>();

  if (kind == "max_affine") {
    expect_object(j, path, {"kind", "pieces", "domain"});
    const std::string pp = child(path, "pieces");
    const json& pieces_j = field(j, path, "pieces");
    if (!pieces_j.is_array() || pieces_j.empty())
      throw SchemaError(pp, "expected a non-empty array");
    std::vector<AffineFn> pieces;
    for (std::size_t i = 0; i < pieces_j.size(); ++i) {
      const std::string ip = child(pp, i);
      expect_object(pieces_j[i], ip, {"u", "alpha"});
      pieces.emplace_back(vec(field(pieces_j[i], ip, "u"), child(ip, "u"), n),
                          number(field(pieces_j[i], ip, "alpha"), child(ip, "alpha")));
    }
    std::vector<Halfspace> domain;
    if (const auto it = j.find("domain"); it != j.end()) {
      const std::string dp = child(path, "domain");
      if (!it->is_array()) throw SchemaError(dp, "expected an array");
      for (std::size_t i = 0; i < it->size(); ++i) {
        const std::string ip = child(dp, i);
        const json& h = (*it)[i];
        expect_object(h, ip, {"a", "b"});
        const Vec a = vec(field(h, ip, "a"), child(ip, "a"), n);
        const double b = number(field(h, ip, "b"), child(ip, "b"));
        domain.push_back(at_path(ip, [&] { return Halfspace(a, b); }));
      }
    }
    return at_path(path, [&] { return ConvexFn(PolyhedralFn(std::move(pieces), std::move(domain))); });
  }

  if (kind == "point_indicator") {
    expect_object(j, path, {"kind", "anchor", "level"});
    const Vec anchor = vec(field(j, path, "anchor"), child(path, "anchor"), n);
    double level = 0.0;
    if (const auto it = j.find("level"); it != j.end()) level = number(*it, child(path, "level"));
    return at_path(path, [&] { return ConvexFn(PointIndicatorFn(anchor, level)); });
  }

  if (kind == "grid") {
    expect_object(j, path, {"kind", "axes", "values"});
    const std::string ap = child(path, "axes");
    const json& axes_j = field(j, path, "axes");
    if (!axes_j.is_array() || static_cast<int>(axes_j.size()) != n)
      throw SchemaError(ap, "expected " + std::to_string(n) + " axes");
    std::vector<GridAxis> axes;
    std::size_t total = 1;
    for (std::size_t k = 0; k < axes_j.size(); ++k) {
      const std::string kp = child(ap, k);
      expect_object(axes_j[k], kp, {"lo", "hi", "count"});
      GridAxis ax{number(field(axes_j[k], kp, "lo"), child(kp, "lo")),
                  number(field(axes_j[k], kp, "hi"), child(kp, "hi")),
                  integer(field(axes_j[k], kp, "count"), child(kp, "count"))};
      if (ax.count < 2) throw SchemaError(child(kp, "count"), "count must be >= 2");
      if (!(ax.lo < ax.hi)) throw SchemaError(kp, "lo must be < hi");
      total *= static_cast<std::size_t>(ax.count);
      axes.push_back(ax);
    }
    const std::string vp = child(path, "values");
    const json& values_j = field(j, path, "values");
    if (!values_j.is_array() || values_j.size() != total)
      throw SchemaError(vp, "expected an array of " + std::to_string(total) + " values");
    std::vector<double> values(total);
    for (std::size_t i = 0; i < total; ++i) values[i] = number(values_j[i], child(vp, i), true);
    return at_path(path, [&] { return ConvexFn(GridFn(std::move(axes), std::move(values))); });
  }

  throw SchemaError(child(path, "kind"),
                    "unknown function kind '" + kind + "' (max_affine, point_indicator, grid)");
}

Operator parse_operator(const json& j, const std::string& path, int n) {
  if (!j.is_object()) throw SchemaError(path, "expected an object");
  const json& kind_j = field(j, path, "kind");
  if (!kind_j.is_string()) throw SchemaError(child(path, "kind"), "expected a string");
  const auto kind = kind_j.get<std::string>();
  if (kind == "preserving") {
    expect_object(j, path, {"kind", "E", "c", "w", "tau", "beta"});
    Mat E = mat(field(j, path, "E"), child(path, "E"), n);
    Vec c = vec(field(j, path, "c"), child(path, "c"), n);
    Vec w = vec(field(j, path, "w"), child(path, "w"), n);
    const double tau = number(field(j, path, "tau"), child(path, "tau"));
    const double beta = number(field(j, path, "beta"), child(path, "beta"));
    return at_path(path, [&] { return Operator(PreservingOp(E, c, w, tau, beta)); });
  }
  if (kind == "reversing") {
    expect_object(j, path, {"kind", "H", "v", "y", "rho", "tau"});
    Mat H = mat(field(j, path, "H"), child(path, "H"), n);
    Vec v = vec(field(j, path, "v"), child(path, "v"), n);
    Vec y = vec(field(j, path, "y"), child(path, "y"), n);
    const double rho = number(field(j, path, "rho"), child(path, "rho"));
    const double tau = number(field(j, path, "tau"), child(path, "tau"));
    return at_path(path, [&] { return Operator(ReversingOp(H, v, y, rho, tau)); });
  }
  throw SchemaError(child(path, "kind"),
                    "unknown operator kind '" + kind + "' (preserving, reversing)");
}

json number_json(double x) {
  if (std::isinf(x) && x > 0) return "inf";
  return x;
}

json vec_json(const Vec& v) {
  json out = json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(number_json(v[k]));
  return out;
}

json mat_json(const Mat& m) {
  json out = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) out.push_back(vec_json(m.row(i).transpose()));
  return out;
}

json function_json(const ConvexFn& f) {
  if (const auto* p = f.polyhedral()) {
    json pieces = json::array();
    for (const auto& piece : p->pieces())
      pieces.push_back({{"u", vec_json(piece.slope)}, {"alpha", piece.offset}});
    json out = {{"kind", "max_affine"}, {"pieces", std::move(pieces)}};
    if (!p->domain().empty()) {
      json domain = json::array();
      for (const auto& h : p->domain()) domain.push_back({{"a", vec_json(h.normal)}, {"b", h.bound}});
      out["domain"] = std::move(domain);
    }
    return out;
  }
  if (const auto* ind = f.indicator())
    return {{"kind", "point_indicator"}, {"anchor", vec_json(ind->anchor())}, {"level", ind->level()}};
  const auto& g = *f.grid();
  json axes = json::array();
  for (const auto& ax : g.axes()) axes.push_back({{"lo", ax.lo}, {"hi", ax.hi}, {"count", ax.count}});
  json values = json::array();
  for (double v : g.raw_values()) values.push_back(number_json(v));
  return {{"kind", "grid"}, {"axes", std::move(axes)}, {"values", std::move(values)}};
}

json operator_json(const Operator& op) {
  if (const auto* T = std::get_if<PreservingOp>(&op))
    return {{"kind", "preserving"}, {"E", mat_json(T->E())}, {"c", vec_json(T->c())},
            {"w", vec_json(T->w())},  {"tau", T->tau()},       {"beta", T->beta()}};
  const auto& S = std::get<ReversingOp>(op);
  return {{"kind", "reversing"}, {"H", mat_json(S.H())}, {"v", vec_json(S.v())},
          {"y", vec_json(S.y())}, {"rho", S.rho()},       {"tau", S.tau()}};
}

}  // namespace

const ConvexFn& Document::function(const std::string& name) const {
  const auto it = functions.find(name);
  if (it == functions.end()) throw InvalidArgument("unknown function '" + name + "'");
  return it->second;
}

const Operator& Document::op(const std::string& name) const {
  const auto it = operators.find(name);
  if (it == operators.end()) throw InvalidArgument("unknown operator '" + name + "'");
  return it->second;
}

Document parse_document(std::string_view text) {
  json root;
  try {
    root = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    throw SchemaError("", e.what());
  }
  expect_object(root, "", {"version", "dimension", "functions", "operators"});

  Document doc;
  doc.version = integer(field(root, "", "version"), "/version");
  if (doc.version != Document::kVersion)
    throw SchemaError("/version", "unsupported version " + std::to_string(doc.version));
  doc.dimension = integer(field(root, "", "dimension"), "/dimension");
  if (doc.dimension < 1 || doc.dimension > kMaxDim)
    throw SchemaError("/dimension", "dimension must be 1, 2 or 3");

  if (const auto it = root.find("functions"); it != root.end()) {
    if (!it->is_object()) throw SchemaError("/functions", "expected an object");
    for (const auto& [name, entry] : it->items())
      doc.functions.emplace(name, parse_function(entry, child("/functions", name), doc.dimension));
  }
  if (const auto it = root.find("operators"); it != root.end()) {
    if (!it->is_object()) throw SchemaError("/operators", "expected an object");
    for (const auto& [name, entry] : it->items())
      doc.operators.emplace(name, parse_operator(entry, child("/operators", name), doc.dimension));
  }
  return doc;
}

std::string serialize_document(const Document& doc) {
  json functions = json::object();
  for (const auto& [name, f] : doc.functions) {
    if (f.dim() != doc.dimension)
      throw DimensionMismatch("function '" + name + "'", doc.dimension, f.dim());
    functions[name] = function_json(f);
  }
  json operators = json::object();
  for (const auto& [name, op] : doc.operators) {
    const int dim = std::visit([](const auto& o) { return o.dim(); }, op);
    if (dim != doc.dimension) throw DimensionMismatch("operator '" + name + "'", doc.dimension, dim);
    operators[name] = operator_json(op);
  }
  const json root = {{"version", doc.version},
                     {"dimension", doc.dimension},
                     {"functions", std::move(functions)},
                     {"operators", std::move(operators)}};
  return root.dump(2) + "\n";
}

Document read_document(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_document(buf.str());
}

void write_document(const Document& doc, const std::string& path) {
  const std::string text = serialize_document(doc);
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
  if (!out) throw InvalidArgument("error writing '" + path + "'");
}

}  // namespace conjcalc
