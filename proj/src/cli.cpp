#include "conjcalc/cli.hpp"

#include <CLI11.hpp>

#include <algorithm>
#include <chrono>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "conjcalc/conjugate.hpp"
#include "conjcalc/document.hpp"
#include "conjcalc/errors.hpp"
#include "conjcalc/harness.hpp"
#include "conjcalc/operators.hpp"

namespace conjcalc::cli {
namespace {

ConjPreference parse_method(const std::string& m) {
  if (m == "auto") return ConjPreference::automatic;
  if (m == "exact") return ConjPreference::exact;
  if (m == "naive") return ConjPreference::naive;
  if (m == "llt") return ConjPreference::llt;
  throw InvalidArgument("unknown method '" + m + "'");
}

// a o b for any mix of preserving and reversing operators. A reversing S
// factors as S = R o F with R = dual_side(S) and F the conjugation, and
// F o T = dualize(T) o F.
Operator compose_ops(const Operator& a, const Operator& b) {
  const auto* Ta = std::get_if<PreservingOp>(&a);
  const auto* Tb = std::get_if<PreservingOp>(&b);
  if (Ta && Tb) return compose(*Ta, *Tb);
  if (!Ta && !Tb) return compose_reversing(std::get<ReversingOp>(a), std::get<ReversingOp>(b));
  if (Ta) return from_dual_side(compose(*Ta, dual_side(std::get<ReversingOp>(b))));
  return from_dual_side(compose(dual_side(std::get<ReversingOp>(a)), dualize(*Tb)));
}

Operator invert_op(const Operator& op) {
  if (const auto* T = std::get_if<PreservingOp>(&op)) return invert(*T);
  // S^{-1} = F o R^{-1} = dualize(R^{-1}) o F
  return from_dual_side(dualize(invert(dual_side(std::get<ReversingOp>(op)))));
}

const PreservingOp& require_preserving(const Operator& op, const std::string& name) {
  const auto* T = std::get_if<PreservingOp>(&op);
  if (!T) throw InvalidArgument("operator '" + name + "' must be order preserving");
  return *T;
}

void write_csv(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
  if (!out) throw InvalidArgument("error writing '" + path + "'");
}

struct Options {
  std::string doc_path;
  std::string out_path;
  std::string result_name = "result";
  std::string fn_name;
  std::vector<std::string> op_names;
  std::string method = "auto";
  int nodes = 0;
  std::string suite = "all";
  int trials = 100;
  std::uint64_t seed = 1;
  std::string report_path;
  std::vector<long> sizes{1024, 4096, 16384, 65536, 262144, 1048576};
  int repeats = 3;
  long naive_max = 16384;
  std::vector<double> box{-10.0, 10.0};
  int samples = 201;
};

Document output_doc(int dimension) {
  Document doc;
  doc.dimension = dimension;
  return doc;
}

void emit(const Document& doc, const Options& o, std::ostream& out) {
  // the written document must parse back under the same rules as any input
  const std::string text = serialize_document(doc);
  (void)parse_document(text);
  if (o.out_path.empty() || o.out_path == "-") {
    out << text;
  } else {
    write_document(doc, o.out_path);
  }
}

int cmd_conj(const Options& o, std::ostream& out, std::ostream& err) {
  const Document in = read_document(o.doc_path);
  const ConvexFn& f = in.function(o.fn_name);
  std::optional<std::vector<GridAxis>> axes;
  if (o.nodes > 0) {
    if (!f.grid()) throw InvalidArgument("--nodes applies to grid functions only");
    axes = default_dual_axes(*f.grid(), o.nodes);
  }
  const auto res = conjugate(f, parse_method(o.method), axes);
  Document doc = output_doc(in.dimension);
  doc.functions.emplace(o.result_name, res.fn);
  emit(doc, o, out);
  err << "method: " << to_string(res.method) << '\n';
  return kExitOk;
}

int cmd_apply(const Options& o, std::ostream& out, std::ostream&) {
  if (o.op_names.size() != 1) throw InvalidArgument("apply takes exactly one --op");
  const Document in = read_document(o.doc_path);
  const Operator& op = in.op(o.op_names.front());
  const ConvexFn& f = in.function(o.fn_name);
  Document doc = output_doc(in.dimension);
  if (const auto* T = std::get_if<PreservingOp>(&op)) {
    doc.functions.emplace(o.result_name, apply_preserving(*T, f));
  } else {
    doc.functions.emplace(o.result_name,
                          apply_reversing(std::get<ReversingOp>(op), f, parse_method(o.method)));
  }
  emit(doc, o, out);
  return kExitOk;
}

int cmd_compose(const Options& o, std::ostream& out, std::ostream&) {
  if (o.op_names.size() < 2) throw InvalidArgument("compose needs at least two --op");
  const Document in = read_document(o.doc_path);
  // --op A --op B --op C gives A o B o C
  Operator acc = in.op(o.op_names.back());
  for (auto it = o.op_names.rbegin() + 1; it != o.op_names.rend(); ++it)
    acc = compose_ops(in.op(*it), acc);
  Document doc = output_doc(in.dimension);
  doc.operators.emplace(o.result_name, std::move(acc));
  emit(doc, o, out);
  return kExitOk;
}

int cmd_invert(const Options& o, std::ostream& out, std::ostream&) {
  if (o.op_names.size() != 1) throw InvalidArgument("invert takes exactly one --op");
  const Document in = read_document(o.doc_path);
  Document doc = output_doc(in.dimension);
  doc.operators.emplace(o.result_name, invert_op(in.op(o.op_names.front())));
  emit(doc, o, out);
  return kExitOk;
}

int cmd_classify(const Options& o, std::ostream& out, std::ostream&) {
  if (o.op_names.size() != 1) throw InvalidArgument("classify takes exactly one --op");
  const Document in = read_document(o.doc_path);
  const Operator& op = in.op(o.op_names.front());
  if (const auto* T = std::get_if<PreservingOp>(&op)) {
    const auto v = classify_involution(*T);
    out << "kind: preserving\n"
        << "involution: " << (v.is_involution ? "yes" : "no") << '\n';
    for (const auto& c : v.failed_conditions) out << "failed: " << c << '\n';
    return kExitOk;
  }
  const auto& S = std::get<ReversingOp>(op);
  const PreservingOp twice = compose_reversing(S, S);
  const bool inv = parameter_distance(twice, PreservingOp::identity(S.dim())) <= 1e-9;
  out << "kind: reversing\n"
      << "involution: " << (inv ? "yes" : "no") << '\n';
  return kExitOk;
}

int cmd_dualize(const Options& o, std::ostream& out, std::ostream&) {
  if (o.op_names.size() != 1) throw InvalidArgument("dualize takes exactly one --op");
  const Document in = read_document(o.doc_path);
  const auto& name = o.op_names.front();
  Document doc = output_doc(in.dimension);
  doc.operators.emplace(o.result_name, dualize(require_preserving(in.op(name), name)));
  emit(doc, o, out);
  return kExitOk;
}

int cmd_to_reversing(const Options& o, std::ostream& out, std::ostream&) {
  if (o.op_names.size() != 1) throw InvalidArgument("to-reversing takes exactly one --op");
  const Document in = read_document(o.doc_path);
  const auto& name = o.op_names.front();
  Document doc = output_doc(in.dimension);
  doc.operators.emplace(o.result_name, to_reversing(require_preserving(in.op(name), name)));
  emit(doc, o, out);
  return kExitOk;
}

int cmd_check(const Options& o, std::ostream& out, std::ostream&) {
  const auto reports = run_suite(o.suite, o.trials, o.seed);
  std::ostringstream text;
  bool ok = true;
  for (const auto& r : reports) {
    write_report(text, r);
    ok = ok && r.meets_expectation();
  }
  text << "overall " << (ok ? "pass" : "fail") << '\n';
  out << text.str();
  if (!o.report_path.empty()) write_csv(o.report_path, text.str());
  return ok ? kExitOk : kExitPropertyFailure;
}

int cmd_bench(const Options& o, std::ostream& out, std::ostream&) {
  if (o.repeats < 1) throw InvalidArgument("--repeats must be >= 1");
  using clock = std::chrono::steady_clock;
  auto ms_since = [](clock::time_point t0) {
    return std::chrono::duration<double, std::milli>(clock::now() - t0).count();
  };
  out << "size,naive_ms,llt_ms,max_abs_diff\n";
  for (long n : o.sizes) {
    if (n < 2) throw InvalidArgument("sizes must be >= 2");
    const auto N = static_cast<std::size_t>(n);
    std::mt19937_64 rng(o.seed + N);
    std::uniform_real_distribution<double> noise(0.0, 0.01);
    const GridAxis xa{-2.0, 2.0, static_cast<int>(n)};
    const GridAxis ua{-3.0, 3.0, static_cast<int>(n)};
    std::vector<double> x(N), f(N), u(N), fast(N), slow(N);
    for (std::size_t i = 0; i < N; ++i) {
      x[i] = xa.node(static_cast<int>(i));
      u[i] = ua.node(static_cast<int>(i));
      f[i] = 0.5 * x[i] * x[i] + noise(rng);
    }
    double llt_ms = 1e300;
    for (int r = 0; r < o.repeats; ++r) {
      const auto t0 = clock::now();
      legendre_llt_1d(x, f, u, fast);
      llt_ms = std::min(llt_ms, ms_since(t0));
    }
    out << n << ',';
    if (n <= o.naive_max) {
      double naive_ms = 1e300;
      for (int r = 0; r < o.repeats; ++r) {
        const auto t0 = clock::now();
        legendre_naive_1d(x, f, u, slow);
        naive_ms = std::min(naive_ms, ms_since(t0));
      }
      double diff = 0.0;
      for (std::size_t j = 0; j < N; ++j) diff = std::max(diff, std::abs(fast[j] - slow[j]));
      out << format_double(naive_ms) << ',' << format_double(llt_ms) << ',' << format_double(diff)
          << '\n';
    } else {
      out << ',' << format_double(llt_ms) << ",\n";
    }
  }
  return kExitOk;
}

int cmd_export(const Options& o, std::ostream& out, std::ostream&) {
  if (o.box.size() != 2 || !(o.box[0] < o.box[1])) throw InvalidArgument("--box needs lo,hi with lo < hi");
  if (o.samples < 2) throw InvalidArgument("--samples must be >= 2");
  const Document in = read_document(o.doc_path);
  const ConvexFn& f = in.function(o.fn_name);
  const int n = f.dim();
  std::string text;
  for (int k = 0; k < n; ++k) text += n == 1 ? "x," : "x" + std::to_string(k + 1) + ",";
  text += "f\n";
  const GridAxis ax{o.box[0], o.box[1], o.samples};
  std::size_t total = 1;
  for (int k = 0; k < n; ++k) total *= static_cast<std::size_t>(o.samples);
  for (std::size_t i = 0; i < total; ++i) {
    Point x(n);
    std::size_t rest = i;
    for (int k = n - 1; k >= 0; --k) {
      x[k] = ax.node(static_cast<int>(rest % static_cast<std::size_t>(o.samples)));
      rest /= static_cast<std::size_t>(o.samples);
    }
    for (int k = 0; k < n; ++k) text += format_double(x[k]) + ",";
    text += format_double(eval(f, x).raw()) + "\n";
  }
  if (o.out_path.empty() || o.out_path == "-") out << text;
  else write_csv(o.out_path, text);
  return kExitOk;
}

}  // namespace

int run_command(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Conjugate calculus for convex functions on R^n, n <= 3", "conjcalc"};
  app.require_subcommand(1);
  Options o;

  auto add_doc = [&](CLI::App* sub) {
    sub->add_option("--doc", o.doc_path, "Input JSON document")->required();
    sub->add_option("--name", o.result_name, "Name of the result in the output document");
  };
  auto add_out = [&](CLI::App* sub, bool required) {
    auto* opt = sub->add_option("--out", o.out_path, "Output file ('-' for standard output)");
    if (required) opt->required();
  };

  auto* conj = app.add_subcommand("conj", "Fenchel conjugate of a function");
  add_doc(conj);
  conj->add_option("--fn", o.fn_name)->required();
  conj->add_option("--method", o.method, "auto, exact, naive or llt");
  conj->add_option("--nodes", o.nodes, "Dual nodes per axis for grid inputs");
  add_out(conj, true);

  auto* apply = app.add_subcommand("apply", "Apply an operator to a function");
  add_doc(apply);
  apply->add_option("--op", o.op_names)->required();
  apply->add_option("--fn", o.fn_name)->required();
  apply->add_option("--method", o.method, "Conjugation method for reversing operators");
  add_out(apply, true);

  auto* compose_cmd = app.add_subcommand("compose", "Compose operators, leftmost applied last");
  add_doc(compose_cmd);
  compose_cmd->add_option("--op", o.op_names)->required();
  add_out(compose_cmd, true);

  auto* invert_cmd = app.add_subcommand("invert", "Inverse operator");
  add_doc(invert_cmd);
  invert_cmd->add_option("--op", o.op_names)->required();
  add_out(invert_cmd, true);

  auto* classify = app.add_subcommand("classify", "Involution verdict for an operator");
  classify->add_option("--doc", o.doc_path)->required();
  classify->add_option("--op", o.op_names)->required();

  auto* dualize_cmd = app.add_subcommand("dualize", "Preserving R with (T f)* = R(f*)");
  add_doc(dualize_cmd);
  dualize_cmd->add_option("--op", o.op_names)->required();
  add_out(dualize_cmd, true);

  auto* to_rev = app.add_subcommand("to-reversing", "Reversing S with S(f) = (T f)*");
  add_doc(to_rev);
  to_rev->add_option("--op", o.op_names)->required();
  add_out(to_rev, true);

  auto* check = app.add_subcommand("check", "Run property suites");
  check->add_option("--suite", o.suite)
      ->check(CLI::IsMember({"order", "reversing", "involution", "fenchel-moreau",
                             "counterexample", "all"}));
  check->add_option("--trials", o.trials)->check(CLI::PositiveNumber);
  check->add_option("--seed", o.seed);
  check->add_option("--report", o.report_path, "Also write the report to this file");

  auto* bench = app.add_subcommand("bench-llt", "Time naive and linear-time discrete conjugates");
  bench->add_option("--sizes", o.sizes)->delimiter(',');
  bench->add_option("--repeats", o.repeats);
  bench->add_option("--naive-max", o.naive_max, "Largest size timed with the naive transform");
  bench->add_option("--seed", o.seed);

  auto* exp = app.add_subcommand("export", "Sample a function to CSV");
  exp->add_option("--doc", o.doc_path)->required();
  exp->add_option("--fn", o.fn_name)->required();
  exp->add_option("--box", o.box, "lo,hi")->delimiter(',')->expected(2);
  exp->add_option("--samples", o.samples, "Samples per axis");
  add_out(exp, false);

  std::vector<std::string> storage{"conjcalc"};
  storage.insert(storage.end(), args.begin(), args.end());
  std::vector<char*> argv;
  for (auto& s : storage) argv.push_back(s.data());

  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (*conj) return cmd_conj(o, out, err);
    if (*apply) return cmd_apply(o, out, err);
    if (*compose_cmd) return cmd_compose(o, out, err);
    if (*invert_cmd) return cmd_invert(o, out, err);
    if (*classify) return cmd_classify(o, out, err);
    if (*dualize_cmd) return cmd_dualize(o, out, err);
    if (*to_rev) return cmd_to_reversing(o, out, err);
    if (*check) return cmd_check(o, out, err);
    if (*bench) return cmd_bench(o, out, err);
    if (*exp) return cmd_export(o, out, err);
  } catch (const Error& e) {
    err << "error: " << e.what() << '\n';
    return kExitUsage;
  }
  return kExitUsage;
}

}  // namespace conjcalc::cli
