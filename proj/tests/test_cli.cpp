// SPDX-License-Identifier: Apache-2.0
#include <nlohmann/json.hpp>
#include <sstream>

#include "../tools/cli.hpp"
#include "atkse/bundle.hpp"
#include "atkse/perturbation.hpp"
#include "doctest.h"
#include "test_util.hpp"

using atkse::testing::read_file;
using atkse::testing::TempDir;
using atkse::testing::write_file;

namespace {

struct Outcome {
  int code;
  std::string out;
  std::string err;
};

Outcome run(std::vector<std::string> args) {
  std::ostringstream out;
  std::ostringstream err;
  const int code = atkse::cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string gen(const TempDir& tmp, const std::string& name, const std::string& seed = "0") {
  const std::string dir = (tmp / name).string();
  const auto r = run({"gen-sbm", "--nodes", "40", "--classes", "2", "--p-in", "0.3", "--p-out", "0.03", "--features",
                      "8", "--shift", "1.0", "--seed", seed, "--out", dir});
  REQUIRE(r.code == 0);
  return dir;
}

nlohmann::json manifest(const std::string& dir) {
  return nlohmann::json::parse(read_file(std::filesystem::path(dir) / "manifest.json"));
}

}  // namespace

TEST_CASE("gen-sbm") {
  TempDir tmp;
  SUBCASE("writes a valid bundle and manifest") {
    const std::string dir = (tmp / "g").string();
    const auto r = run({"gen-sbm", "--nodes", "100", "--classes", "2", "--p-in", "0.1", "--p-out", "0.01",
                        "--features", "20", "--shift", "0.5", "--seed", "0", "--out", dir});
    CHECK(r.code == 0);
    const auto g = atkse::load_graph_bundle(dir);
    CHECK(g.num_nodes() == 100);
    const auto m = manifest(dir);
    CHECK(m["command"] == "gen-sbm");
    CHECK(m["seed"] == 0);
    CHECK(m.contains("version"));
    CHECK(m.contains("timestamp"));
    CHECK(m["config"]["p_in"] == 0.1);
  }
  SUBCASE("missing --out is a usage error") {
    const auto r = run({"gen-sbm", "--nodes", "10"});
    CHECK(r.code == 2);
    CHECK(r.err.find("--out") != std::string::npos);
  }
  SUBCASE("same flags give byte-identical edges") {
    const auto a = gen(tmp, "a", "5");
    const auto b = gen(tmp, "b", "5");
    CHECK(read_file(std::filesystem::path(a) / "edges.tsv") == read_file(std::filesystem::path(b) / "edges.tsv"));
    CHECK(read_file(std::filesystem::path(a) / "features.tsv") ==
          read_file(std::filesystem::path(b) / "features.tsv"));
  }
  SUBCASE("invalid parameters are usage errors") {
    CHECK(run({"gen-sbm", "--nodes", "41", "--out", (tmp / "x").string()}).code == 2);
  }
  SUBCASE("unknown subcommand") { CHECK(run({"frobnicate"}).code == 2); }
}

TEST_CASE("attack") {
  TempDir tmp;
  const std::string g = gen(tmp, "g");
  const std::int64_t edges = atkse::count_edges(atkse::load_graph_bundle(g).adjacency);
  const auto delta = static_cast<std::size_t>(0.05 * static_cast<double>(edges) + 1e-9);
  REQUIRE(delta >= 1);

  SUBCASE("random writes delta records") {
    const std::string out = (tmp / "r").string();
    CHECK(run({"attack", "--graph", g, "--method", "random", "--budget-rate", "0.05", "--seed", "1", "--out", out})
              .code == 0);
    const auto log = atkse::parse_jsonl(read_file(std::filesystem::path(out) / "log.jsonl"));
    CHECK(log.method == "random");
    CHECK(log.records.size() == delta);
    CHECK(atkse::l0_distance(atkse::load_graph_bundle(out).adjacency, atkse::load_graph_bundle(g).adjacency) ==
          static_cast<std::int64_t>(2 * delta));
  }
  SUBCASE("atkse reruns are identical and defaults are echoed") {
    const std::string a = (tmp / "a").string();
    const std::string b = (tmp / "b").string();
    const std::vector<std::string> common{"attack", "--graph", g, "--method", "atkse", "--seed", "2", "--epochs", "40"};
    auto args_a = common;
    args_a.insert(args_a.end(), {"--out", a});
    auto args_b = common;
    args_b.insert(args_b.end(), {"--out", b});
    REQUIRE(run(args_a).code == 0);
    REQUIRE(run(args_b).code == 0);
    CHECK(read_file(std::filesystem::path(a) / "log.jsonl") == read_file(std::filesystem::path(b) / "log.jsonl"));
    CHECK(read_file(std::filesystem::path(a) / "edges.tsv") == read_file(std::filesystem::path(b) / "edges.tsv"));
    const auto m = manifest(a);
    CHECK(m["config"]["lambda"] == 0.2);
    CHECK(m["config"]["candidates"] == 64);
    CHECK(m["config"]["batch"] == 16);
    CHECK(m["config"]["momentum"] == 0.8);
    CHECK(m["config"]["si_samples"] == 5);
    CHECK(m["config"]["si_sigma"] == 5e-4);
    CHECK(m["config"]["budget_rate"] == 0.05);
  }
  SUBCASE("dice and greedy run") {
    CHECK(run({"attack", "--graph", g, "--method", "dice", "--out", (tmp / "d").string(), "--epochs", "20"}).code == 0);
    CHECK(run({"attack", "--graph", g, "--method", "greedy", "--out", (tmp / "gr").string(), "--epochs", "20"}).code ==
          0);
    CHECK(manifest((tmp / "gr").string())["config"]["candidates"] == 1);
  }
  SUBCASE("zero budget rate is infeasible") {
    const auto r = run({"attack", "--graph", g, "--method", "random", "--budget-rate", "0", "--out", (tmp / "z").string()});
    CHECK(r.code == 3);
    CHECK_FALSE(r.err.empty());
  }
  SUBCASE("unknown method and bad lambda") {
    CHECK(run({"attack", "--graph", g, "--method", "nope", "--out", (tmp / "n").string()}).code == 2);
    CHECK(run({"attack", "--graph", g, "--lambda", "0.3", "--out", (tmp / "n").string()}).code == 2);
  }
  SUBCASE("missing graph bundle is a runtime failure") {
    CHECK(run({"attack", "--graph", (tmp / "missing").string(), "--out", (tmp / "n").string()}).code == 1);
  }
  SUBCASE("--config supplies defaults that explicit flags override") {
    write_file(tmp / "cfg.json", R"({"method":"random","seed":9,"budget-rate":0.1})");
    const std::string out = (tmp / "c").string();
    REQUIRE(run({"attack", "--graph", g, "--config", (tmp / "cfg.json").string(), "--budget-rate", "0.05", "--out",
                 out})
                .code == 0);
    const auto m = manifest(out);
    CHECK(m["config"]["method"] == "random");
    CHECK(m["seed"] == 9);
    CHECK(m["config"]["budget_rate"] == 0.05);
    CHECK(run({"attack", "--graph", g, "--config", (tmp / "absent.json").string(), "--out", out}).code == 2);
  }
}

TEST_CASE("eval") {
  TempDir tmp;
  const std::string g = gen(tmp, "g");
  SUBCASE("clean against clean has zero delta") {
    const std::string out = (tmp / "e").string();
    const auto r = run({"eval", "--clean", g, "--perturbed", g, "--trials", "2", "--epochs", "30", "--out", out});
    REQUIRE(r.code == 0);
    const auto report = nlohmann::json::parse(read_file(std::filesystem::path(out) / "report.json"));
    CHECK(report["clean_acc"]["mean"] == report["attacked_acc"]["mean"]);
    CHECK(report["trials"] == 2);
    CHECK(r.out.find("+0.0") != std::string::npos);
    CHECK(read_file(std::filesystem::path(out) / "report.txt") == r.out);
    CHECK(manifest(out)["config"]["victim"]["activation"] == "tanh");
  }
  SUBCASE("a single trial is a usage error") {
    CHECK(run({"eval", "--clean", g, "--perturbed", g, "--trials", "1", "--out", (tmp / "e").string()}).code == 2);
  }
  SUBCASE("node-count mismatch is infeasible") {
    const std::string other = (tmp / "h").string();
    REQUIRE(run({"gen-sbm", "--nodes", "20", "--out", other}).code == 0);
    CHECK(run({"eval", "--clean", g, "--perturbed", other, "--trials", "2", "--out", (tmp / "e").string()}).code == 3);
  }
}

TEST_CASE("gradcheck") {
  TempDir tmp;
  const std::string g = gen(tmp, "g");
  SUBCASE("passes on the toy graph") {
    const auto r = run({"gradcheck", "--graph", g, "--entries", "20", "--epochs", "50"});
    CHECK(r.code == 0);
    CHECK(r.out.find("max relative error") != std::string::npos);
    CHECK(r.out.find("PASS") != std::string::npos);
  }
  SUBCASE("corrupted gradient fails") {
    const auto r = run({"gradcheck", "--graph", g, "--entries", "20", "--epochs", "50", "--corrupt-gradient"});
    CHECK(r.code == 1);
    CHECK(r.out.find("FAIL") != std::string::npos);
  }
  SUBCASE("zero entries is a usage error") { CHECK(run({"gradcheck", "--graph", g, "--entries", "0"}).code == 2); }
}

TEST_CASE("trace") {
  TempDir tmp;
  const std::string g = gen(tmp, "g");
  auto rows = [](const std::string& dir) {
    std::istringstream in(read_file(std::filesystem::path(dir) / "trace.tsv"));
    std::vector<std::vector<std::string>> out;
    std::string line;
    while (std::getline(in, line)) {
      std::vector<std::string> cells;
      std::istringstream ls(line);
      std::string cell;
      while (std::getline(ls, cell, '\t')) cells.push_back(cell);
      out.push_back(cells);
    }
    return out;
  };
  SUBCASE("edge-interval on a linear model is flat") {
    // With W1 = 0 the loss does not depend on A at all.
    nlohmann::json p;
    p["num_features"] = 8;
    p["hidden_dim"] = 2;
    p["num_classes"] = 2;
    p["activation"] = "identity";
    p["seed"] = 0;
    p["w0"] = std::vector<std::vector<double>>(8, std::vector<double>(2, 0.1));
    p["w1"] = std::vector<std::vector<double>>(2, std::vector<double>(2, 0.0));
    write_file(tmp / "params.json", p.dump());
    const std::string out = (tmp / "t").string();
    const auto r = run({"trace", "--graph", g, "--kind", "edge-interval", "--u", "0", "--v", "1", "--step", "0.25",
                        "--params", (tmp / "params.json").string(), "--out", out});
    REQUIRE(r.code == 0);
    const auto t = rows(out);
    REQUIRE(t.size() == 6);
    CHECK(t[0] == std::vector<std::string>{"weight", "gradient"});
    for (std::size_t i = 2; i < t.size(); ++i) CHECK(t[i][1] == t[1][1]);
  }
  SUBCASE("retrain-hist with one run") {
    const std::string out = (tmp / "t").string();
    REQUIRE(run({"trace", "--graph", g, "--kind", "retrain-hist", "--runs", "1", "--u", "0", "--v", "1", "--epochs",
                 "20", "--out", out})
                .code == 0);
    CHECK(rows(out).size() == 2);
  }
  SUBCASE("noise-sweep starts at the plain gradient") {
    const std::string out = (tmp / "t").string();
    REQUIRE(run({"trace", "--graph", g, "--kind", "noise-sweep", "--sigma-steps", "3", "--u", "2", "--v", "5",
                 "--epochs", "20", "--out", out})
                .code == 0);
    const auto t = rows(out);
    REQUIRE(t.size() == 5);
    CHECK(t[1][0] == "0");
  }
  SUBCASE("unknown edge") {
    CHECK(run({"trace", "--graph", g, "--u", "0", "--v", "400", "--out", (tmp / "t").string()}).code == 2);
    CHECK(run({"trace", "--graph", g, "--u", "3", "--v", "3", "--out", (tmp / "t").string()}).code == 2);
  }
}
