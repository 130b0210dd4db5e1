#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "helpers.hpp"

#include "locc/certifier.hpp"
#include "locc/constructions.hpp"
#include "locc/io.hpp"
#include "locc/pruner.hpp"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

using namespace locc;
namespace fs = std::filesystem;

namespace {

CMat diag2(double a, double b) {
  CMat m = CMat::Zero(2, 2);
  m(0, 0) = std::sqrt(a);
  m(1, 1) = std::sqrt(b);
  return m;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Drives the installed binary; build and path come in through the
// environment so the test works from any build directory.
struct Cli {
  std::string bin;
  fs::path dir;

  Cli() {
    const char* b = std::getenv("LOCC_CERT_BIN");
    REQUIRE_MESSAGE(b != nullptr, "LOCC_CERT_BIN must point at the binary");
    bin = b;
    dir = fs::temp_directory_path() / "locc-cert-cli-tests";
    fs::create_directories(dir);
  }

  fs::path path(const char* name) const { return dir / name; }

  int run(const std::string& args, std::string* out = nullptr,
          std::string* err = nullptr, const std::string& env = "") {
    const fs::path so = dir / "stdout.txt", se = dir / "stderr.txt";
    std::string cmd = env.empty() ? "" : env + " ";
    cmd += bin + " " + args + " >" + so.string() + " 2>" + se.string();
    const int rc = std::system(cmd.c_str());
    REQUIRE(rc != -1);
    REQUIRE(WIFEXITED(rc));
    if (out) *out = slurp(so);
    if (err) *err = slurp(se);
    return WEXITSTATUS(rc);
  }
};

}  // namespace

TEST_CASE("operators round-trip through JSON text exactly") {
  Rng rng(61);
  for (int d : {2, 3, 4}) {
    CMat m = random_hermitian(d, rng);
    Json j = Json::parse(operator_to_json(m).dump());
    CMat back = operator_from_json(j, "$");
    CHECK((m - back).norm() == 0.0);
  }

  CHECK_THROWS_WITH_AS(operator_from_json(Json{{"re", 1}}, "$.x"),
                       doctest::Contains("$.x: missing key \"dim\""), IoError);
  Json bad = operator_to_json(CMat::Identity(2, 2));
  bad["re"][0] = Json::array({1.0});
  CHECK_THROWS_WITH_AS(operator_from_json(bad, "$.y"),
                       doctest::Contains("row 0"), IoError);
}

TEST_CASE("separable operations round-trip and report schema paths") {
  SeparableOperation sep = appendix_a_sep({2, 2});
  Json j = Json::parse(sep_to_json(sep).dump());
  SeparableOperation back = sep_from_json(j);
  CHECK(testhelp::sep_equal(back, sep, 1e-12));

  Json missing = j;
  missing.erase("dims");
  CHECK_THROWS_WITH_AS(sep_from_json(missing), doctest::Contains("\"dims\""),
                       IoError);

  Json corrupt = j;
  corrupt["outcomes"][1]["locals"][0]["re"] = 5;
  CHECK_THROWS_WITH_AS(sep_from_json(corrupt),
                       doctest::Contains("$.outcomes[1].locals[0]"), IoError);

  Json negweight = j;
  negweight["outcomes"][0]["weight"] = -1.0;
  CHECK_THROWS_WITH_AS(sep_from_json(negweight),
                       doctest::Contains("weight: must be positive"), IoError);

  Json shortlocals = j;
  shortlocals["outcomes"][0]["locals"].erase(1);
  CHECK_THROWS_WITH_AS(sep_from_json(shortlocals),
                       doctest::Contains("expected 2 operators"), IoError);

  // Semantic failures from the validation layer keep the outcomes prefix.
  Json notpsd = j;
  notpsd["outcomes"][0]["locals"][0]["re"] = {{-1.0, 0.0}, {0.0, 1.0}};
  notpsd["outcomes"][0]["locals"][0]["im"] = {{0.0, 0.0}, {0.0, 0.0}};
  CHECK_THROWS_WITH_AS(sep_from_json(notpsd), doctest::Contains("$.outcomes"),
                       IoError);
}

TEST_CASE("trees round-trip and the node schema is enforced") {
  RandomTreeParams params;
  params.dims = {2, 2};
  params.max_depth = 4;
  LoccTree t = random_canonical_tree(params, 7);
  Json j = Json::parse(tree_to_json(t).dump());
  LoccTree back = tree_from_json(j);
  CHECK(tree_to_json(back) == tree_to_json(t));
  CHECK(validate_tree(back).empty());

  Json rooted = j;
  rooted["root"]["kraus"] = operator_to_json(CMat::Identity(2, 2));
  CHECK_THROWS_WITH_AS(tree_from_json(rooted),
                       doctest::Contains("root carries no Kraus"), IoError);

  LoccTree small = make_tree(
      {2}, measure_node(1, {{diag2(0.4, 0.6), LoccNode{}},
                            {diag2(0.6, 0.4), LoccNode{}}}));
  Json js = tree_to_json(small);

  Json leafparty = js;
  leafparty["root"]["children"][0]["party"] = 1;
  CHECK_THROWS_WITH_AS(tree_from_json(leafparty),
                       doctest::Contains("leaves must have party null"),
                       IoError);

  Json nokraus = js;
  nokraus["root"]["children"][0]["kraus"] = nullptr;
  CHECK_THROWS_WITH_AS(tree_from_json(nokraus),
                       doctest::Contains("non-root nodes need a Kraus"),
                       IoError);

  Json badparty = js;
  badparty["root"]["party"] = 3;
  CHECK_THROWS_WITH_AS(tree_from_json(badparty),
                       doctest::Contains("party in 1..1"), IoError);

  Json baddim = js;
  baddim["root"]["children"][0]["kraus"] = operator_to_json(CMat::Identity(3, 3));
  CHECK_THROWS_WITH_AS(tree_from_json(baddim),
                       doctest::Contains("expected dimension 2"), IoError);
}

TEST_CASE("verdict serialization carries the schema tag and refined block") {
  SeparableOperation sep = domino_fixture();
  Verdict v = certify(sep);
  Json j = verdict_to_json(v);
  CHECK(j.at("schema") == "locc-cert/1");
  CHECK(j.at("outcomes") == 9);
  CHECK(j.at("sum_e") == 14);
  CHECK(j.at("satisfied") == true);
  CHECK(!j.contains("refined"));

  Verdict r = refined_bipartite_check(v, sep);
  Json jr = verdict_to_json(r);
  CHECK(jr.at("refined").at("bound") == 13);
  CHECK(jr.at("refined").at("satisfied") == false);
  CHECK(jr.at("satisfied") == false);
}

TEST_CASE("rendered verdicts use the agreed wording") {
  std::string viol = render_verdict(certify(appendix_a_sep({2, 2})), Format::Text);
  CHECK(viol.find("Σe = 10 > 8 = 2(N−1)") != std::string::npos);
  CHECK(viol.find("finite-round LOCC bound: VIOLATED") != std::string::npos);
  CHECK(viol.find("certificate: not implementable by finite-round LOCC") !=
        std::string::npos);

  SeparableOperation dom = domino_fixture();
  std::string ok = render_verdict(certify(dom), Format::Text);
  CHECK(ok.find("finite-round LOCC bound: SATISFIED (necessary condition; "
                "not sufficient)") != std::string::npos);

  std::string sat =
      render_verdict(certify(extract_sep(appendix_d_tree(2, 13))), Format::Text);
  CHECK(sat.find("= 2(N−1) (saturated)") != std::string::npos);

  std::string refined =
      render_verdict(refined_bipartite_check(certify(dom), dom), Format::Text);
  CHECK(refined.find("refined bipartite bound (stated without proof in this "
                     "paper): ⌊3N/2⌋ = 13") != std::string::npos);
  CHECK(refined.find("Σe = 14 > 13 VIOLATED") != std::string::npos);

  std::string as_json = render_verdict(certify(dom), Format::JsonOut);
  CHECK(Json::parse(as_json).at("schema") == "locc-cert/1");
}

TEST_CASE("removal records serialize with their kind and snapshot") {
  RemovalRecord r;
  r.kind = RemovalKind::Type1;
  r.t_root_id = 5;
  r.extra_id = 2;
  r.removed_nodes = 3;
  r.alive_nodes = 7;
  r.alive_leaf_count = 4;
  Json j = removal_record_to_json(r);
  CHECK(j.at("kind") == "type-1");
  CHECK(!j.contains("snapshot"));

  r.kind = RemovalKind::Type2;
  r.snapshot = Snapshot{{0, -1, -1}, {1, 0, 2}};
  Json j2 = removal_record_to_json(r);
  CHECK(j2.at("kind") == "type-2");
  REQUIRE(j2.at("snapshot").size() == 2);
  CHECK(j2.at("snapshot")[1].at("outcome") == 2);
}

TEST_CASE("file helpers: load errors and text round-trips") {
  CHECK_THROWS_WITH_AS(load_json_file("/nonexistent/nowhere.json"),
                       doctest::Contains("cannot open"), IoError);
  const fs::path p = fs::temp_directory_path() / "locc-cert-io-test.json";
  save_text_file(p.string(), "{\"a\": 1}\n");
  CHECK(load_json_file(p.string()).at("a") == 1);
  save_text_file(p.string(), "{ nope");
  CHECK_THROWS_AS(load_json_file(p.string()), IoError);
}

TEST_CASE("cli: generate, certify and exit codes carry the verdict") {
  Cli cli;
  std::string out;

  CHECK(cli.run("gen appendix-a --dims 2,2 -o " + cli.path("a22.json").string()) == 0);
  CHECK(cli.run("check " + cli.path("a22.json").string(), &out) == 3);
  CHECK(out.find("Σe = 10 > 8 = 2(N−1)") != std::string::npos);
  CHECK(out.find("certificate: not implementable by finite-round LOCC") !=
        std::string::npos);

  CHECK(cli.run("gen domino -o " + cli.path("dom.json").string()) == 0);
  CHECK(cli.run("check " + cli.path("dom.json").string(), &out) == 0);
  CHECK(out.find("SATISFIED") != std::string::npos);

  CHECK(cli.run("check --refined-bipartite " + cli.path("dom.json").string(),
                &out) == 3);
  CHECK(out.find("stated without proof in this paper") != std::string::npos);

  CHECK(cli.run("check --format json " + cli.path("a22.json").string(), &out) == 3);
  Json j = Json::parse(out);
  CHECK(j.at("schema") == "locc-cert/1");
  CHECK(j.at("satisfied") == false);
  CHECK(j.at("margin") == 2);
}

TEST_CASE("cli: tree pipeline from generation to pruning") {
  Cli cli;
  std::string out, err;

  const std::string tree = cli.path("t3.json").string();
  CHECK(cli.run("gen appendix-d --parties 3 --seed 11 --omit 2 -o " + tree) == 0);

  CHECK(cli.run("verify-tree " + tree, &out) == 0);
  CHECK(out.find("tree ok") != std::string::npos);
  CHECK(out.find("not canonical") == std::string::npos);

  const std::string sepfile = cli.path("t3-sep.json").string();
  CHECK(cli.run("extract " + tree + " -o " + sepfile) == 0);
  CHECK(cli.run("check " + sepfile, &out) == 0);
  CHECK(out.find("= 2(N−1) (saturated)") != std::string::npos);

  // Saturating protocols prune to themselves: no removal lines.
  CHECK(cli.run("prune " + tree, &out, &err) == 0);
  CHECK(out.empty());
  CHECK(err.find("pruned to 11 nodes, 6 keeper leaves, 0 removals") !=
        std::string::npos);
}

TEST_CASE("cli: canonicalize widens the pipeline to raw trees") {
  Cli cli;
  std::string out, err;

  // Ternary projective measurement: not binary, so prune refuses it and
  // canonicalize fixes it.
  std::vector<CMat> p;
  for (int i = 0; i < 3; ++i) {
    CMat m = CMat::Zero(3, 3);
    m(i, i) = 1.0;
    p.push_back(m);
  }
  LoccTree wide = make_tree({3}, measure_node(1, {{p[0], LoccNode{}},
                                                  {p[1], LoccNode{}},
                                                  {p[2], LoccNode{}}}));
  const std::string widefile = cli.path("wide.json").string();
  save_text_file(widefile, tree_to_json(wide).dump(2));

  CHECK(cli.run("prune " + widefile, &out, &err) == 2);
  CHECK(err.find("not canonical") != std::string::npos);

  const std::string canonfile = cli.path("wide-canon.json").string();
  CHECK(cli.run("canonicalize " + widefile + " -o " + canonfile) == 0);
  CHECK(cli.run("verify-tree " + canonfile, &out) == 0);
  CHECK(out.find("tree ok") != std::string::npos);
  CHECK(out.find("not canonical") == std::string::npos);
  CHECK(cli.run("prune " + canonfile, &out, &err) == 0);
}

TEST_CASE("cli: pruning a tree with a cloned outcome logs the removal") {
  Cli cli;
  std::string out, err;

  LoccNode b = measure_node(1, {{diag2(9.0 / 70.0, 0.7), LoccNode{}},
                                {diag2(61.0 / 70.0, 0.3), LoccNode{}}});
  LoccTree t = make_tree({2}, measure_node(1, {{diag2(0.3, 0.7), LoccNode{}},
                                               {diag2(0.7, 0.3), std::move(b)}}));
  const std::string file = cli.path("clone.json").string();
  save_text_file(file, tree_to_json(t).dump(2));

  CHECK(cli.run("prune --trace " + file, &out, &err) == 0);
  std::istringstream lines(out);
  std::string line;
  REQUIRE(std::getline(lines, line));
  Json rec = Json::parse(line);
  CHECK(rec.at("kind") == "type-2");
  CHECK(rec.at("extra_was_leaf") == false);
  CHECK(rec.at("alive_nodes") == 3);
  CHECK(rec.at("snapshot").size() == 3);
  CHECK_FALSE(std::getline(lines, line));
}

TEST_CASE("cli: bad inputs exit with 2 and a reason") {
  Cli cli;
  std::string out, err;

  const std::string junk = cli.path("junk.json").string();
  save_text_file(junk, "{ nope");
  CHECK(cli.run("check " + junk, &out, &err) == 2);
  CHECK(cli.run("check /nonexistent/nowhere.json", &out, &err) == 2);
  CHECK(err.find("cannot open") != std::string::npos);

  // A tree file is not an operation.
  CHECK(cli.run("gen appendix-d --parties 2 --seed 1 -o " +
                cli.path("t2.json").string()) == 0);
  CHECK(cli.run("check " + cli.path("t2.json").string(), &out, &err) == 2);

  CHECK(cli.run("gen appendix-a --dims 2,2 --prime 6", &out, &err) == 2);
  CHECK(err.find("prime") != std::string::npos);

  CHECK(cli.run("gen appendix-d --parties 2 --seed 1 --omit 9", &out, &err) == 2);

  // N = 4 is outside the refined bound's domain.
  const std::string small = cli.path("t2-sep.json").string();
  CHECK(cli.run("extract " + cli.path("t2.json").string() + " -o " + small) == 0);
  CHECK(cli.run("check --refined-bipartite " + small, &out, &err) == 2);

  CHECK(cli.run("check " + cli.path("a22x.json").string(), &out, &err) == 2);
}

TEST_CASE("cli: the cone tolerance comes from the flag or the environment") {
  Cli cli;
  std::string out, err;

  const std::string dom = cli.path("dom-tol.json").string();
  CHECK(cli.run("gen domino -o " + dom) == 0);
  CHECK(cli.run("check " + dom, &out, &err, "LOCC_CERT_TOL=1e-6") == 0);
  CHECK(cli.run("check " + dom, &out, &err, "LOCC_CERT_TOL=abc") == 2);
  CHECK(err.find("LOCC_CERT_TOL") != std::string::npos);
  CHECK(cli.run("check --tol -1 " + dom, &out, &err) == 2);
  CHECK(err.find("positive") != std::string::npos);
  // The flag wins over a broken environment value only when both parse;
  // a malformed variable is still rejected.
  CHECK(cli.run("check --tol 1e-8 " + dom, &out, &err, "LOCC_CERT_TOL=abc") == 2);
}
