#include <algorithm>
#include <set>

#include "doctest.h"
#include "skillspace/corpus.hpp"
#include "skillspace/rng.hpp"
#include "support.hpp"

using namespace skillspace;
using namespace skillspace::corpus;

namespace {

std::string parse_kind(std::string_view line) {
  try {
    parse_delta_line(line, 7);
  } catch (const CorpusError& e) {
    CHECK(e.line() == 7);
    return e.kind();
  }
  return "";
}

DeltaRecord rec(std::string dev, std::string proj, std::int64_t ts,
                std::vector<std::string> apis, std::string lang = "PY") {
  return {std::move(lang), std::move(proj), ts, std::move(dev), std::move(apis)};
}

std::string random_token(Rng& rng) {
  static const std::string alphabet = "abcXYZ019._-/@:+ \t";
  std::string s;
  const auto n = 1 + rng.uniform_below(12);
  while (s.size() < n) s += alphabet[rng.uniform_below(alphabet.size())];
  return s;
}

}  // namespace

TEST_CASE("delta line parsing") {
  const auto r = parse_delta_line("PY;org/x;1500000000;alice;numpy;os\r\n");
  CHECK(r == rec("alice", "org/x", 1500000000, {"numpy", "os"}));
  CHECK(parse_delta_line("PY;p;0;d;a;;b;").apis == std::vector<std::string>{"a", "b"});

  CHECK(parse_kind("PY;p;1;d") == "BadFieldCount");
  CHECK(parse_kind("PY;p;1;d;;") == "BadFieldCount");
  CHECK(parse_kind(";p;1;d;a") == "EmptyField");
  CHECK(parse_kind("PY;;1;d;a") == "EmptyField");
  CHECK(parse_kind("PY;p;1;;a") == "EmptyField");
  CHECK(parse_kind("PY;p;;d;a") == "BadTimestamp");
  CHECK(parse_kind("PY;p;-5;d;a") == "BadTimestamp");
  CHECK(parse_kind("PY;p;12x;d;a") == "BadTimestamp");
  CHECK(parse_kind("PY;p;1.5;d;a") == "BadTimestamp");
  CHECK(parse_kind("PY;p;99999999999999999999;d;a") == "BadTimestamp");
}

TEST_CASE("format rejects records the format cannot carry") {
  auto kind = [](const DeltaRecord& r) {
    try {
      format_delta_line(r);
    } catch (const CorpusError& e) {
      return e.kind();
    }
    return std::string();
  };
  CHECK(kind(rec("a;b", "p", 1, {"x"})) == "InvalidRecord");
  CHECK(kind(rec("a", "p\n", 1, {"x"})) == "InvalidRecord");
  CHECK(kind(rec("a", "p", 1, {})) == "InvalidRecord");
  CHECK(kind(rec("a", "p", 1, {""})) == "InvalidRecord");
  CHECK(kind(rec("a", "p", -1, {"x"})) == "InvalidRecord");
  CHECK(kind(rec("a", "p", 1, {"x"})).empty());
}

TEST_CASE("format/parse round-trip on random records") {
  Rng rng(21);
  for (int i = 0; i < 3000; ++i) {
    DeltaRecord r;
    r.language = random_token(rng);
    r.project = random_token(rng);
    r.developer = random_token(rng);
    r.timestamp = static_cast<std::int64_t>(rng.uniform_below(1ULL << 40));
    const auto n = 1 + rng.uniform_below(6);
    for (std::size_t k = 0; k < n; ++k) r.apis.push_back(random_token(rng));
    const auto line = format_delta_line(r);
    CHECK(parse_delta_line(line) == r);
    CHECK(format_delta_line(parse_delta_line(line)) == line);
  }
}

TEST_CASE("plain and gzip corpora round-trip") {
  testing::TempDir dir;
  std::vector<DeltaRecord> records;
  for (int i = 0; i < 500; ++i)
    records.push_back(rec("dev" + std::to_string(i % 7), "p" + std::to_string(i % 3), i,
                          {"a" + std::to_string(i), "b"}));
  for (const char* name : {"c.txt", "c.txt.gz"}) {
    write_corpus(records, dir / name);
    CHECK(read_corpus(dir / name) == records);
  }
  // gzip is detected from content, not the suffix
  std::filesystem::rename(dir / "c.txt.gz", dir / "renamed.txt");
  CHECK(read_corpus(dir / "renamed.txt") == records);
  CHECK(testing::slurp(dir / "c.txt").substr(0, 18) == "PY;p0;0;dev0;a0;b\n");
}

TEST_CASE("reader reports the failing line") {
  testing::TempDir dir;
  std::ofstream(dir / "bad.txt") << "PY;p;1;d;a\n\nPY;p;x;d;a\n";
  CorpusReader reader(dir / "bad.txt");
  DeltaRecord r;
  CHECK(reader.next(r));
  try {
    reader.next(r);
    FAIL("expected BadTimestamp");
  } catch (const CorpusError& e) {
    CHECK(e.kind() == "BadTimestamp");
    CHECK(e.line() == 3);
  }
  CHECK_THROWS_AS(CorpusReader(dir / "missing.txt"), IoError);
}

TEST_CASE("uncommitted writer leaves nothing behind") {
  testing::TempDir dir;
  {
    CorpusWriter w(dir / "out.txt.gz");
    w.write(rec("d", "p", 1, {"a"}));
    CHECK(w.written() == 1);
  }
  CHECK(std::filesystem::is_empty(dir.path()));
  {
    CorpusWriter w(dir / "out.txt");
    CHECK_THROWS_AS(w.write(rec("d;x", "p", 1, {"a"})), CorpusError);
  }
  CHECK(std::filesystem::is_empty(dir.path()));
}

TEST_CASE("alias maps collapse chains") {
  const auto m = AliasMap::parse("# comment\nb\tc\na\tb\nc\tc\r\n\nx\ty\n");
  CHECK(m.resolve("a") == "c");
  CHECK(m.resolve("b") == "c");
  CHECK(m.resolve("c") == "c");
  CHECK(m.resolve("x") == "y");
  CHECK(m.resolve("unmapped") == "unmapped");
  // every canonical id is a fixed point
  for (const char* id : {"a", "b", "c", "x"}) CHECK(m.resolve(m.resolve(id)) == m.resolve(id));
}

TEST_CASE("alias map errors") {
  auto kind = [](std::string_view text) {
    try {
      AliasMap::parse(text);
    } catch (const CorpusError& e) {
      return e.kind();
    }
    return std::string();
  };
  CHECK(kind("a\tb\nb\tc\nc\ta\n") == "AliasCycle");
  CHECK(kind("a\tb\na\tc\n") == "BadAliasLine");
  CHECK(kind("a\tb\na\tb\n").empty());
  CHECK(kind("a b\n") == "BadAliasLine");
  CHECK(kind("\tb\n") == "BadAliasLine");
  CHECK(kind("a\t\n") == "BadAliasLine");
  CHECK(kind("a\tb\tc\n") == "BadAliasLine");
}

TEST_CASE("aliases rewrite developers and projects") {
  std::vector<DeltaRecord> rs = {rec("Al", "old/p", 1, {"x"}), rec("bo", "q", 2, {"y"})};
  const std::vector<std::pair<std::string, std::string>> devs = {{"Al", "alice"}};
  const std::vector<std::pair<std::string, std::string>> projs = {{"old/p", "new/p"}};
  apply_aliases(rs, AliasMap::from_pairs(devs), AliasMap::from_pairs(projs));
  CHECK(rs[0].developer == "alice");
  CHECK(rs[0].project == "new/p");
  CHECK(rs[1].developer == "bo");
}

TEST_CASE("filter applies commit bounds and oversize policy") {
  std::vector<DeltaRecord> rs;
  for (int i = 0; i < 3; ++i) rs.push_back(rec("few", "p", i, {"a"}));
  for (int i = 0; i < 10; ++i) rs.push_back(rec("ok", "p", i, {"a", "b", "c"}));
  for (int i = 0; i < 20; ++i) rs.push_back(rec("many", "p", i, {"a"}));
  rs[5].apis = {"1", "2", "3", "4", "5"};

  FilterConfig cfg;
  cfg.min_commits = 5;
  cfg.max_commits = 15;
  cfg.max_apis_per_delta = 3;
  auto dropped = filter_corpus(rs, cfg);
  CHECK(dropped.records.size() == 9);
  CHECK(dropped.report.input_deltas == 33);
  CHECK(dropped.report.developers_seen == 3);
  CHECK(dropped.report.developers_below_min == 1);
  CHECK(dropped.report.developers_above_max == 1);
  CHECK(dropped.report.deltas_removed_commit_bounds == 23);
  CHECK(dropped.report.deltas_dropped_oversize == 1);
  CHECK(dropped.report.output_deltas == 9);

  cfg.oversize = OversizePolicy::kTruncate;
  auto truncated = filter_corpus(rs, cfg);
  CHECK(truncated.records.size() == 10);
  CHECK(truncated.report.deltas_truncated == 1);
  CHECK(truncated.records[2].apis == std::vector<std::string>{"1", "2", "3"});
  for (const auto& r : truncated.records) CHECK(r.developer == "ok");
  CHECK(truncated.report.to_table().rows().size() == 8);

  cfg.min_commits = 20;
  CHECK_THROWS_AS(filter_corpus(rs, cfg), ConfigError);
  cfg.min_commits = 1;
  cfg.max_apis_per_delta = 0;
  CHECK_THROWS_AS(filter_corpus(rs, cfg), ConfigError);
}

TEST_CASE("time split partitions at the cutoff") {
  std::vector<DeltaRecord> rs;
  for (int i = 0; i < 10; ++i) rs.push_back(rec("d", "p", 100 - i * 10, {"a"}));
  const auto split = time_split(rs, 50);
  CHECK(split.train.size() + split.test.size() == rs.size());
  for (const auto& r : split.train) CHECK(r.timestamp < 50);
  for (const auto& r : split.test) CHECK(r.timestamp >= 50);
  CHECK(split.test.back().timestamp == 50);
  CHECK(split.train.front().timestamp == 40);
}

TEST_CASE("project sampling is seeded and keeps whole projects") {
  std::vector<DeltaRecord> rs;
  for (int p = 0; p < 20; ++p)
    for (int k = 0; k < 3; ++k) rs.push_back(rec("d", "proj" + std::to_string(p), k, {"a"}));
  const auto a = sample_projects(rs, 5, 9);
  const auto b = sample_projects(rs, 5, 9);
  CHECK(a == b);
  CHECK(a.size() == 15);
  std::set<std::string> projects;
  for (const auto& r : a) projects.insert(r.project);
  CHECK(projects.size() == 5);
  CHECK(sample_projects(rs, 50, 1).size() == rs.size());

  // each project is chosen with probability 5/20
  std::map<std::string, int> hits;
  for (std::uint64_t seed = 0; seed < 2000; ++seed)
    for (const auto& r : sample_projects(rs, 5, seed))
      if (r.timestamp == 0) ++hits[r.project];
  for (const auto& [p, n] : hits) CHECK(std::abs(n - 500) < 90);
}

TEST_CASE("corpus statistics") {
  std::vector<DeltaRecord> rs = {
      rec("a", "p1", 1, {"x", "y"}),
      rec("b", "p1", 2, {"x"}),
      rec("a", "p2", 3, {"z", "w", "v", "u"}, "R"),
  };
  const auto s = corpus_stats(rs, 2);
  CHECK(s.total.deltas == 3);
  CHECK(s.total.authors == 2);
  CHECK(s.total.projects == 2);
  CHECK(s.total.distinct_apis == 6);
  CHECK(s.total.max_apis == 4);
  CHECK(s.total.fraction_small == doctest::Approx(2.0 / 3.0));
  REQUIRE(s.per_language.size() == 2);
  CHECK(s.per_language.at("PY").distinct_apis == 2);
  CHECK(s.per_language.at("R").fraction_small == 0.0);
  CHECK(s.to_table().rows().size() == 3);
  CHECK(corpus_stats({}, 30).total.deltas == 0);
}
