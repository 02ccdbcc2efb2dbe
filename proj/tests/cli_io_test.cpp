#include <gtest/gtest.h>

#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "conjcalc/cli.hpp"
#include "conjcalc/document.hpp"
#include "conjcalc/errors.hpp"
#include "conjcalc/harness.hpp"
#include "test_support.hpp"

using namespace conjcalc;
using namespace testing_support;
namespace fs = std::filesystem;

namespace {

constexpr const char* kDoc = R"({
  "version": 1,
  "dimension": 1,
  "functions": {
    "abs": {"kind": "max_affine", "pieces": [{"u": [1], "alpha": 0}, {"u": [-1], "alpha": 0}]},
    "pos": {"kind": "max_affine", "pieces": [{"u": [1], "alpha": 0}, {"u": [0], "alpha": 0}]},
    "box": {"kind": "max_affine", "pieces": [{"u": [0], "alpha": 0}],
            "domain": [{"a": [1], "b": 1}, {"a": [-1], "b": 1}]},
    "pt": {"kind": "point_indicator", "anchor": [3], "level": 2},
    "sq": {"kind": "grid", "axes": [{"lo": -1, "hi": 1, "count": 5}],
           "values": [0.5, 0.125, 0, 0.125, 0.5]},
    "edge": {"kind": "grid", "axes": [{"lo": 0, "hi": 2, "count": 3}], "values": ["inf", 1, 4]}
  },
  "operators": {
    "T": {"kind": "preserving", "E": [[2]], "c": [1], "w": [3], "tau": 2, "beta": 5},
    "R": {"kind": "preserving", "E": [[-1]], "c": [1], "w": [2], "tau": 1, "beta": -1},
    "F": {"kind": "reversing", "H": [[1]], "v": [0], "y": [0], "rho": 0, "tau": 1},
    "S": {"kind": "reversing", "H": [[0.5]], "v": [1], "y": [-2], "rho": 3, "tau": 1.5}
  }
})";

class TempDir {
 public:
  TempDir() {
    std::random_device rd;
    path_ = fs::temp_directory_path() / ("conjcalc_test_" + std::to_string(rd()));
    fs::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  std::string file(const std::string& name, const std::string& contents) const {
    const auto p = path_ / name;
    std::ofstream(p) << contents;
    return p.string();
  }
  std::string path(const std::string& name) const { return (path_ / name).string(); }

 private:
  fs::path path_;
};

struct CliRun {
  int code;
  std::string out;
  std::string err;
};

CliRun run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::run_command(args, out, err);
  return {code, out.str(), err.str()};
}

std::string schema_path_of(const std::string& text) {
  try {
    parse_document(text);
  } catch (const SchemaError& e) {
    return e.path();
  }
  return "<no error>";
}

std::string schema_message_of(const std::string& text) {
  try {
    parse_document(text);
  } catch (const SchemaError& e) {
    return e.what();
  }
  return "<no error>";
}

const PreservingOp& preserving(const Document& d, const std::string& name) {
  return std::get<PreservingOp>(d.op(name));
}

}  // namespace

// --------------------------------------------------------------- parsing

TEST(Document, ParsesEveryKind) {
  const Document d = parse_document(kDoc);
  EXPECT_EQ(d.dimension, 1);
  EXPECT_EQ(eval(d.function("abs"), v1(-2)).raw(), 2.0);
  EXPECT_TRUE(eval(d.function("box"), v1(1.5)).is_infinite());
  EXPECT_EQ(d.function("pt").indicator()->level(), 2.0);
  EXPECT_EQ(eval(d.function("sq"), v1(0.5)).raw(), 0.125);
  EXPECT_TRUE(std::isinf(d.function("edge").grid()->raw_values()[0]));
  EXPECT_EQ(preserving(d, "T").beta(), 5.0);
  EXPECT_EQ(std::get<ReversingOp>(d.op("S")).rho(), 3.0);
  EXPECT_THROW((void)d.function("missing"), InvalidArgument);
}

TEST(Document, TauZeroIsRejectedWithPath) {
  const std::string text = R"({"version":1,"dimension":1,"functions":{},
    "operators":{"T":{"kind":"preserving","E":[[1]],"c":[0],"w":[0],"tau":0,"beta":0}}})";
  EXPECT_EQ(schema_path_of(text), "/operators/T");
  EXPECT_NE(schema_message_of(text).find("tau must be > 0"), std::string::npos);
}

TEST(Document, AllInfiniteGridIsImproper) {
  const std::string text = R"({"version":1,"dimension":1,"operators":{},
    "functions":{"g":{"kind":"grid","axes":[{"lo":0,"hi":1,"count":2}],"values":["inf","inf"]}}})";
  EXPECT_EQ(schema_path_of(text), "/functions/g");
  EXPECT_NE(schema_message_of(text).find("+inf"), std::string::npos);
}

TEST(Document, SchemaErrorsPointAtTheField) {
  EXPECT_EQ(schema_path_of(R"({"version":2,"dimension":1})"), "/version");
  EXPECT_EQ(schema_path_of(R"({"version":1,"dimension":4})"), "/dimension");
  EXPECT_EQ(schema_path_of(R"({"version":1,"dimension":1,"extra":0})"), "/extra");
  EXPECT_EQ(schema_path_of(R"({"version":1,"dimension":1,"functions":{"f":{"kind":"blob"}}})"),
            "/functions/f/kind");
  EXPECT_EQ(schema_path_of(
                R"({"version":1,"dimension":1,"functions":{"f":{"kind":"max_affine","pieces":[{"u":[1,2],"alpha":0}]}}})"),
            "/functions/f/pieces/0/u");
  EXPECT_EQ(schema_path_of(
                R"({"version":1,"dimension":1,"functions":{"f":{"kind":"max_affine","pieces":[{"u":["x"],"alpha":0}]}}})"),
            "/functions/f/pieces/0/u/0");
}

TEST(Document, SyntaxErrorsMentionLocation) {
  const std::string msg = schema_message_of("{\n  \"version\": 1,\n  oops\n}");
  EXPECT_NE(msg.find("line 3"), std::string::npos) << msg;
}

TEST(Document, RoundTripIsFieldForField) {
  Rng rng(3);
  Document d;
  d.dimension = 2;
  for (int i = 0; i < 5; ++i) d.functions.emplace("p" + std::to_string(i), random_polyhedral(rng, 2));
  d.functions.emplace("ind", PointIndicatorFn(vec({0.1, 1.0 / 3.0}), -2.5));
  std::vector<double> vals{kInf, 1.0 / 7.0, 2.0, 3.5, 0.1, 1e-300};
  d.functions.emplace("grid", GridFn({GridAxis{-1, 1, 2}, GridAxis{0, 0.3, 3}}, vals));
  for (int i = 0; i < 3; ++i) {
    d.operators.emplace("T" + std::to_string(i), random_preserving(rng, 2));
    d.operators.emplace("S" + std::to_string(i), random_reversing(rng, 2));
  }
  const std::string text = serialize_document(d);
  const Document back = parse_document(text);
  EXPECT_EQ(serialize_document(back), text);
  ASSERT_EQ(back.functions.size(), d.functions.size());
  for (const auto& [name, f] : d.functions) EXPECT_EQ(digest(back.function(name)), digest(f)) << name;
  for (const auto& [name, op] : d.operators) {
    const Operator& o = back.op(name);
    if (const auto* T = std::get_if<PreservingOp>(&op))
      EXPECT_EQ(digest(std::get<PreservingOp>(o)), digest(*T));
    else
      EXPECT_EQ(digest(std::get<ReversingOp>(o)), digest(std::get<ReversingOp>(op)));
  }
}

TEST(Document, FilesRoundTrip) {
  TempDir dir;
  const Document d = parse_document(kDoc);
  write_document(d, dir.path("d.json"));
  EXPECT_EQ(serialize_document(read_document(dir.path("d.json"))), serialize_document(d));
  EXPECT_THROW(read_document(dir.path("missing.json")), Error);
}

// ------------------------------------------------------------- commands

TEST(Cli, ConjOfAbsIsUnitIndicator) {
  TempDir dir;
  const auto doc = dir.file("in.json", kDoc);
  const CliRun r = run({"conj", "--doc", doc, "--fn", "abs", "--out", "-"});
  ASSERT_EQ(r.code, cli::kExitOk) << r.err;
  EXPECT_NE(r.err.find("method: exact-polyhedral"), std::string::npos) << r.err;
  const Document out = parse_document(r.out);
  const ConvexFn& s = out.function("result");
  EXPECT_EQ(eval(s, v1(0.5)).raw(), 0.0);
  EXPECT_TRUE(eval(s, v1(1.5)).is_infinite());
}

TEST(Cli, ConjGridMethodsAgree) {
  TempDir dir;
  const auto doc = dir.file("in.json", kDoc);
  const CliRun a = run({"conj", "--doc", doc, "--fn", "sq", "--method", "naive", "--nodes", "33", "--out", "-"});
  const CliRun b = run({"conj", "--doc", doc, "--fn", "sq", "--method", "llt", "--nodes", "33", "--out", "-"});
  ASSERT_EQ(a.code, 0) << a.err;
  ASSERT_EQ(b.code, 0) << b.err;
  const Document da = parse_document(a.out), db = parse_document(b.out);
  const auto va = da.function("result").grid()->raw_values();
  const auto vb = db.function("result").grid()->raw_values();
  ASSERT_EQ(va.size(), 33u);
  for (std::size_t i = 0; i < va.size(); ++i) EXPECT_NEAR(va[i], vb[i], 1e-12);
}

TEST(Cli, ApplyMatchesDefinition) {
  TempDir dir;
  const auto doc = dir.file("in.json", kDoc);
  const CliRun r = run({"apply", "--doc", doc, "--op", "T", "--fn", "abs", "--name", "g", "--out", "-"});
  ASSERT_EQ(r.code, 0) << r.err;
  const Document out = parse_document(r.out);
  const ConvexFn& g = out.function("g");
  const PreservingOp T = preserving(parse_document(kDoc), "T");
  for (double x : linspace(-3, 3, 25)) EXPECT_DOUBLE_EQ(eval(g, v1(x)).raw(), oracle_apply(T, abs_fn(), v1(x)));
}

TEST(Cli, InvertWorkedExampleToFile) {
  TempDir dir;
  const auto doc = dir.file("in.json", kDoc);
  const auto out = dir.path("out.json");
  const CliRun r = run({"invert", "--doc", doc, "--op", "T", "--out", out});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_TRUE(r.out.empty());
  const PreservingOp inv = preserving(read_document(out), "result");
  EXPECT_EQ(inv.E()(0, 0), 0.5);
  EXPECT_EQ(inv.c()[0], -0.5);
  EXPECT_EQ(inv.w()[0], -0.75);
  EXPECT_EQ(inv.tau(), 0.5);
  EXPECT_EQ(inv.beta(), -1.75);
}

TEST(Cli, ComposeMixedOperatorsAgreesPointwise) {
  // T o S and S o T evaluated through the composed operator must equal the
  // sequential application of the pieces.
  TempDir dir;
  const auto doc = dir.file("in.json", kDoc);
  const Document in = parse_document(kDoc);
  const PreservingOp& T = preserving(in, "T");
  const ReversingOp& S = std::get<ReversingOp>(in.op("S"));
  const PolyhedralFn f = pw({{-2, 1}, {0.5, 0}, {1.5, -1}});

  const CliRun ts = run({"compose", "--doc", doc, "--op", "T", "--op", "S", "--out", "-"});
  ASSERT_EQ(ts.code, 0) << ts.err;
  const ReversingOp TS = std::get<ReversingOp>(parse_document(ts.out).op("result"));
  const ConvexFn a1 = apply_reversing(TS, f);
  const ConvexFn a2 = apply_preserving(T, apply_reversing(S, f));

  const CliRun st = run({"compose", "--doc", doc, "--op", "S", "--op", "T", "--out", "-"});
  ASSERT_EQ(st.code, 0) << st.err;
  const ReversingOp ST = std::get<ReversingOp>(parse_document(st.out).op("result"));
  const ConvexFn b1 = apply_reversing(ST, f);
  const ConvexFn b2 = apply_reversing(S, apply_preserving(T, f));

  for (double u : linspace(-8, 8, 129)) {
    const double p = eval(a1, v1(u)).raw(), q = eval(a2, v1(u)).raw();
    if (std::isinf(p) != std::isinf(q)) continue;
    EXPECT_TRUE(close(p, q, 1e-9)) << u;
    const double r = eval(b1, v1(u)).raw(), s = eval(b2, v1(u)).raw();
    if (std::isinf(r) != std::isinf(s)) continue;
    EXPECT_TRUE(close(r, s, 1e-9)) << u;
  }
}

TEST(Cli, ComposeConjugationTwiceIsIdentity) {
  TempDir dir;
  const auto doc = dir.file("in.json", kDoc);
  const CliRun r = run({"compose", "--doc", doc, "--op", "F", "--op", "F", "--out", "-"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LE(parameter_distance(preserving(parse_document(r.out), "result"), PreservingOp::identity(1)),
            1e-12);
}

TEST(Cli, InvertReversingOperator) {
  TempDir dir;
  const auto doc = dir.file("in.json", kDoc);
  const CliRun r = run({"invert", "--doc", doc, "--op", "S", "--out", "-"});
  ASSERT_EQ(r.code, 0) << r.err;
  const ReversingOp Sinv = std::get<ReversingOp>(parse_document(r.out).op("result"));
  const Document in = parse_document(kDoc);
  const ReversingOp& S = std::get<ReversingOp>(in.op("S"));
  EXPECT_LE(parameter_distance(compose_reversing(S, Sinv), PreservingOp::identity(1)), 1e-12);
  EXPECT_LE(parameter_distance(compose_reversing(Sinv, S), PreservingOp::identity(1)), 1e-12);
}

TEST(Cli, ClassifyReportsConditions) {
  TempDir dir;
  const auto doc = dir.file("in.json", kDoc);
  const CliRun yes = run({"classify", "--doc", doc, "--op", "R"});
  EXPECT_EQ(yes.out, "kind: preserving\ninvolution: yes\n");
  const CliRun no = run({"classify", "--doc", doc, "--op", "T"});
  EXPECT_NE(no.out.find("involution: no"), std::string::npos);
  EXPECT_NE(no.out.find("failed: tau = 1"), std::string::npos);
  const CliRun f = run({"classify", "--doc", doc, "--op", "F"});
  EXPECT_EQ(f.out, "kind: reversing\ninvolution: yes\n");
}

TEST(Cli, DualizeAndToReversing) {
  TempDir dir;
  const auto doc = dir.file("in.json", kDoc);
  const CliRun d = run({"dualize", "--doc", doc, "--op", "T", "--out", "-"});
  ASSERT_EQ(d.code, 0) << d.err;
  const CliRun t = run({"to-reversing", "--doc", doc, "--op", "T", "--out", "-"});
  ASSERT_EQ(t.code, 0) << t.err;
  const ReversingOp S = std::get<ReversingOp>(parse_document(t.out).op("result"));
  EXPECT_NEAR(S.y()[0], -0.5, 1e-12);
  EXPECT_NEAR(S.rho(), -3.5, 1e-12);
  EXPECT_EQ(run({"dualize", "--doc", doc, "--op", "F", "--out", "-"}).code, cli::kExitUsage);
}

TEST(Cli, CheckCounterexampleSuite) {
  TempDir dir;
  const CliRun r = run({"check", "--suite", "counterexample", "--report", dir.path("r.txt")});
  ASSERT_EQ(r.code, cli::kExitOk) << r.out;
  EXPECT_NE(r.out.find("metric witness_x -1\n"), std::string::npos) << r.out;
  EXPECT_NE(r.out.find("metric f1(witness) 0.5\n"), std::string::npos);
  EXPECT_NE(r.out.find("metric f2(witness) 0\n"), std::string::npos);
  EXPECT_NE(r.out.find("overall pass"), std::string::npos);
  std::ifstream in(dir.path("r.txt"));
  std::stringstream ss;
  ss << in.rdbuf();
  EXPECT_EQ(ss.str(), r.out);
}

TEST(Cli, CheckIsDeterministic) {
  const CliRun a = run({"check", "--suite", "all", "--trials", "10", "--seed", "5"});
  const CliRun b = run({"check", "--suite", "all", "--trials", "10", "--seed", "5"});
  EXPECT_EQ(a.code, 0) << a.out;
  EXPECT_EQ(a.out, b.out);
}

TEST(Cli, ExportCsvGolden) {
  TempDir dir;
  const auto doc = dir.file("in.json", kDoc);
  const CliRun r = run({"export", "--doc", doc, "--fn", "abs", "--box", "-1,1", "--samples", "5"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "x,f\n-1,1\n-0.5,0.5\n0,0\n0.5,0.5\n1,1\n");
  const CliRun b = run({"export", "--doc", doc, "--fn", "box", "--box", "-2,2", "--samples", "3"});
  EXPECT_EQ(b.out, "x,f\n-2,inf\n0,0\n2,inf\n");
}

TEST(Cli, BenchSmallSizes) {
  const CliRun r = run({"bench-llt", "--sizes", "64,128", "--repeats", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  std::istringstream lines(r.out);
  std::string header, row1, row2;
  std::getline(lines, header);
  std::getline(lines, row1);
  std::getline(lines, row2);
  EXPECT_EQ(header, "size,naive_ms,llt_ms,max_abs_diff");
  EXPECT_EQ(row1.rfind("64,", 0), 0u);
  EXPECT_EQ(row2.substr(row2.rfind(',') + 1), "0");
}

TEST(Cli, UsageAndErrorsExitWithTwo) {
  TempDir dir;
  const auto doc = dir.file("in.json", kDoc);
  const auto bad = dir.file("bad.json", R"({"version":1,"dimension":1,"operators":{"T":{"kind":"preserving","E":[[0]],"c":[0],"w":[0],"tau":1,"beta":0}}})");
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  EXPECT_EQ(run({"frobnicate"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"conj", "--doc", doc}).code, cli::kExitUsage);
  EXPECT_EQ(run({"conj", "--doc", doc, "--fn", "nope", "--out", "-"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"conj", "--doc", doc, "--fn", "abs", "--method", "fast", "--out", "-"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"check", "--suite", "nope"}).code, cli::kExitUsage);
  const CliRun r = run({"invert", "--doc", bad, "--op", "T", "--out", "-"});
  EXPECT_EQ(r.code, cli::kExitUsage);
  EXPECT_NE(r.err.find("/operators/T"), std::string::npos) << r.err;
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}
