#include <sstream>

#include "cli.hpp"
#include "doctest.h"
#include "skillspace/corpus.hpp"
#include "skillspace/model.hpp"
#include "skillspace/synth.hpp"
#include "support.hpp"

using namespace skillspace;

namespace {

struct Run {
  int code;
  std::string out;
  std::string err;
};

Run run(std::vector<std::string> args) {
  std::ostringstream out, err;
  const int code = cli::dispatch(args, out, err);
  return {code, out.str(), err.str()};
}

// Corpus split around the default future-activity cutoff, written once.
struct Workspace {
  testing::TempDir dir;
  std::string corpus, train, test, model;

  Workspace() {
    synth::ClusterCorpusConfig cc;
    cc.deltas = 400;
    cc.developers = 10;
    auto data = synth::cluster_corpus(cc);
    auto all = data.train;
    all.insert(all.end(), data.test.begin(), data.test.end());
    corpus = (dir / "corpus.txt.gz").string();
    train = (dir / "train.txt").string();
    test = (dir / "test.txt").string();
    model = (dir / "m.sksp").string();
    corpus::write_corpus(all, corpus);
  }
};

}  // namespace

TEST_CASE("usage errors and help") {
  CHECK(run({}).code == cli::kExitUsage);
  CHECK(run({"frobnicate"}).code == cli::kExitUsage);
  const auto missing = run({"train", "--out", "x"});
  CHECK(missing.code == cli::kExitUsage);
  CHECK(missing.err.find("error: UsageError") != std::string::npos);
  const auto help = run({"--help"});
  CHECK(help.code == cli::kExitOk);
  CHECK(help.out.find("train") != std::string::npos);
  CHECK(run({"query", "similar", "--model", "m", "--kind", "bogus"}).code == cli::kExitUsage);
}

TEST_CASE("module errors name their kind") {
  testing::TempDir dir;
  const auto r = run({"corpus", "stats", "--corpus", (dir / "missing").string()});
  CHECK(r.code == cli::kExitModuleError);
  CHECK(r.err.find("error: IoError") != std::string::npos);

  std::ofstream(dir / "bad.txt") << "PY;p;x;d;a\n";
  const auto bad = run({"corpus", "stats", "--corpus", (dir / "bad.txt").string()});
  CHECK(bad.code == cli::kExitModuleError);
  CHECK(bad.err.find("error: BadTimestamp") != std::string::npos);
}

TEST_CASE("extract prints tokens") {
  testing::TempDir dir;
  std::ofstream(dir / "a.py") << "import os\nfrom numpy.linalg import svd\n";
  const auto r = run({"extract", (dir / "a.py").string(), "--format", "csv"});
  CHECK(r.code == 0);
  CHECK(r.out.find("os") != std::string::npos);
  CHECK(r.out.find("numpy") != std::string::npos);
}

TEST_CASE("corpus build from a change list") {
  testing::TempDir dir;
  std::filesystem::create_directories(dir / "src");
  std::ofstream(dir / "src/a.py") << "import os\nimport json\n";
  std::ofstream(dir / "src/b.rb") << "require 'yaml'\n";
  std::ofstream(dir / "src/notes.txt") << "hello\n";
  std::ofstream(dir / "changes.tsv") << "org/x\t100\talice\tsrc/a.py\n"
                                     << "org/x\t200\tbob\tsrc/b.rb\n"
                                     << "org/x\t300\tbob\tsrc/notes.txt\n";
  const auto out = dir / "c.txt";
  const auto r = run({"corpus", "build", "--changes", (dir / "changes.tsv").string(), "--root",
                      dir.path().string(), "--out", out.string()});
  REQUIRE(r.code == 0);
  const auto records = corpus::read_corpus(out);
  REQUIRE(records.size() == 2);
  CHECK(records[0] == corpus::DeltaRecord{"PY", "org/x", 100, "alice", {"os", "json"}});
  CHECK(records[1].language == "Ruby");
}

TEST_CASE("end-to-end pipeline") {
  Workspace ws;
  const auto stats = run({"corpus", "stats", "--corpus", ws.corpus});
  CHECK(stats.code == 0);
  CHECK(stats.out.find("PY") != std::string::npos);

  REQUIRE(run({"corpus", "split", "--corpus", ws.corpus, "--train", ws.train, "--test", ws.test})
              .code == 0);
  CHECK(corpus::read_corpus(ws.train).size() == 360);
  CHECK(corpus::read_corpus(ws.test).size() == 40);

  const std::vector<std::string> train_args = {"train", "--corpus", ws.train, "--out", ws.model,
                                               "--dim", "12", "--epochs", "3", "--min-count",
                                               "1", "--window", "10", "--seed", "3"};
  const auto tr = run(train_args);
  REQUIRE(tr.code == 0);
  CHECK(tr.err.find("#   dim=12") != std::string::npos);
  const auto first = testing::slurp(ws.model);
  REQUIRE(run(train_args).code == 0);
  CHECK(testing::slurp(ws.model) == first);

  const auto sim = run({"query", "similar", "--model", ws.model, "--api", "c0_api00", "--top",
                        "3", "--format", "csv"});
  REQUIRE(sim.code == 0);
  CHECK(CsvFile::parse(sim.out).size() == 3);

  const auto unknown = run({"query", "similar", "--model", ws.model, "--api", "nope"});
  CHECK(unknown.code == cli::kExitModuleError);
  CHECK(unknown.err.find("UnknownEntity") != std::string::npos);

  const auto an = run({"query", "analogy", "--model", ws.model, "--expr",
                       "c0_api01 -c0_api02 +c1_api03", "--top", "2"});
  CHECK(an.code == 0);

  const auto al = run({"query", "align", "--model", ws.model, "--entity", "dev:dev000", "--apis",
                       "c0_api00,c0_api01"});
  CHECK(al.code == 0);

  const auto h1_path = (ws.dir / "h1.csv").string();
  const std::vector<std::string> h1 = {"eval", "h1", "--model", ws.model, "--train", ws.train,
                                       "--test", ws.test, "-o", h1_path};
  REQUIRE(run(h1).code == 0);
  const auto report = testing::slurp(h1_path);
  CHECK(report.rfind("# hypothesis: ", 0) == 0);
  const auto csv = CsvFile::parse(report);
  REQUIRE(csv.size() >= 1);
  CHECK(csv.cell(0, 0) == "PY");
  REQUIRE(run(h1).code == 0);
  CHECK(testing::slurp(h1_path) == report);

  const auto leak = run({"eval", "h1", "--model", ws.model, "--train", ws.train, "--test",
                         ws.test, "--cutoff", "0"});
  CHECK(leak.code == cli::kExitModuleError);
  CHECK(leak.err.find("LeakageDetected") != std::string::npos);

  const auto vec = (ws.dir / "vec.txt").string();
  REQUIRE(run({"export", "--model", ws.model, "--out", vec, "--which", "tags"}).code == 0);
  CHECK(model::read_text_vectors(vec).dim == 12);
}

TEST_CASE("failed commands leave no partial output") {
  Workspace ws;
  const auto out = ws.dir / "never.sksp";
  const auto r = run({"train", "--corpus", ws.corpus, "--out", out.string(), "--dim", "8",
                      "--window", "1", "--min-count", "1"});
  CHECK(r.code == cli::kExitModuleError);
  CHECK(r.err.find("WindowTooSmall") != std::string::npos);
  CHECK_FALSE(std::filesystem::exists(out));
  for (const auto& e : std::filesystem::directory_iterator(ws.dir.path()))
    CHECK(e.path().filename().string().find("never") == std::string::npos);
}

TEST_CASE("filter with aliases") {
  Workspace ws;
  std::ofstream(ws.dir / "devs.tsv") << "dev001\tdev000\n";
  const auto out = (ws.dir / "f.txt").string();
  const auto r = run({"corpus", "filter", "--corpus", ws.corpus, "--out", out, "--min-commits",
                      "1", "--dev-aliases", (ws.dir / "devs.tsv").string(), "--format", "csv"});
  REQUIRE(r.code == 0);
  const auto records = corpus::read_corpus(out);
  CHECK(records.size() == 400);
  for (const auto& rec : records) CHECK(rec.developer != "dev001");
  CHECK(r.out.find("output_deltas,400") != std::string::npos);
}
