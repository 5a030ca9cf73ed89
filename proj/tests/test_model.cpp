#include "doctest.h"
#include "skillspace/model.hpp"
#include "skillspace/synth.hpp"
#include "support.hpp"
#include "toy_model.hpp"

using namespace skillspace;
using namespace skillspace::model;

namespace {

std::string load_kind(std::string_view bytes) {
  try {
    deserialize(std::span<const char>(bytes.data(), bytes.size()));
  } catch (const ModelError& e) {
    return e.kind();
  }
  return "";
}

embed::EmbeddingModel trained_model() {
  synth::ClusterCorpusConfig cc;
  cc.deltas = 300;
  cc.developers = 6;
  cc.test_fraction = 0.0;
  embed::TrainConfig cfg;
  cfg.dim = 8;
  cfg.epochs = 1;
  cfg.min_count = 1;
  cfg.window = 10;
  cfg.negatives = 3;
  cfg.project_tags = false;
  return embed::train(synth::cluster_corpus(cc).train, cfg).model;
}

void check_equal(const embed::EmbeddingModel& a, const embed::EmbeddingModel& b) {
  CHECK(a.vocab == b.vocab);
  CHECK(a.tags == b.tags);
  CHECK(a.input == b.input);
  CHECK(a.tag == b.tag);
  CHECK(a.output == b.output);
  CHECK(a.config == b.config);
  CHECK(a.max_train_timestamp == b.max_train_timestamp);
  CHECK(a.token_languages == b.token_languages);
}

}  // namespace

TEST_CASE("save/load round-trips exactly") {
  const auto m = trained_model();
  testing::TempDir dir;
  save(m, dir / "m.sksp");
  const auto back = load(dir / "m.sksp");
  check_equal(m, back);
  CHECK(serialize(back) == testing::slurp(dir / "m.sksp"));
  save(back, dir / "again.sksp");
  CHECK(testing::slurp(dir / "again.sksp") == testing::slurp(dir / "m.sksp"));
}

TEST_CASE("every truncation is reported as TruncatedFile") {
  const auto bytes = serialize(testing::toy_model());
  for (std::size_t n = 4; n < bytes.size(); ++n) {
    INFO("length ", n);
    CHECK(load_kind(std::string_view(bytes).substr(0, n)) == "TruncatedFile");
  }
  CHECK(load_kind(bytes).empty());
}

TEST_CASE("header and trailer errors") {
  auto bytes = serialize(testing::toy_model());
  CHECK(load_kind(bytes + "x") == "TrailingData");
  auto bad = bytes;
  bad[0] = 'X';
  CHECK(load_kind(bad) == "BadMagic");
  CHECK(load_kind("SK") == "BadMagic");
  bad = bytes;
  bad[4] = 9;
  CHECK(load_kind(bad) == "UnsupportedVersion");
  try {
    deserialize(std::span<const char>(bytes.data(), bytes.size() - 3));
  } catch (const ModelError& e) {
    CHECK(e.offset() > 8);
  }

  testing::TempDir dir;
  CHECK_THROWS_AS(load(dir / "missing"), IoError);
  std::ofstream(dir / "junk") << "not a model at all";
  try {
    load(dir / "junk");
    FAIL("expected BadMagic");
  } catch (const ModelError& e) {
    CHECK(e.kind() == "BadMagic");
  }
}

TEST_CASE("inconsistent models are not serialized") {
  auto m = testing::toy_model();
  m.token_languages.pop_back();
  try {
    serialize(m);
    FAIL("expected InconsistentModel");
  } catch (const ModelError& e) {
    CHECK(e.kind() == "InconsistentModel");
  }
}

TEST_CASE("entity references") {
  CHECK(EntityRef::parse("numpy") == EntityRef{EntityKind::kApi, "numpy"});
  CHECK(EntityRef::parse("api:numpy") == EntityRef{EntityKind::kApi, "numpy"});
  CHECK(EntityRef::parse("dev:alice") == EntityRef{EntityKind::kDeveloper, "alice"});
  CHECK(EntityRef::parse("proj:org/repo") == EntityRef{EntityKind::kProject, "org/repo"});
  CHECK(EntityRef::parse("lang:PY") == EntityRef{EntityKind::kLanguage, "PY"});
  CHECK(EntityRef::parse("std::vector") == EntityRef{EntityKind::kApi, "std::vector"});
  CHECK(EntityRef::parse("dev:a:b").id == "a:b");
  for (const char* s : {"api:x", "dev:y", "proj:p/q", "lang:R"})
    CHECK(EntityRef::parse(s).to_string() == s);
}

TEST_CASE("vector lookup") {
  const auto m = testing::toy_model();
  const auto a = vector(m, EntityRef::parse("beta"));
  REQUIRE(a);
  CHECK((*a)[0] == 0.9f);
  const auto l = vector(m, EntityRef::parse("lang:R"));
  REQUIRE(l);
  CHECK((*l)[2] == 1.0f);
  CHECK_FALSE(vector(m, EntityRef::parse("dev:bob")));
  CHECK_FALSE(vector(m, EntityRef::parse("lang:alpha")));
}

TEST_CASE("text export round-trips") {
  const auto m = testing::toy_model();
  const auto apis = parse_text_vectors(export_text(m, ExportWhich::kApi));
  CHECK(apis.dim == 3);
  REQUIRE(apis.rows.size() == 5);
  CHECK(apis.rows[0].first == m.vocab.token(0));

  const auto tags = parse_text_vectors(export_text(m, ExportWhich::kTags));
  REQUIRE(tags.rows.size() == 3);
  CHECK(tags.rows[0].first == "dev:alice");
  CHECK(tags.rows[2].first == "lang:R");

  testing::TempDir dir;
  export_text(m, dir / "all.txt", ExportWhich::kAll);
  const auto all = read_text_vectors(dir / "all.txt");
  REQUIRE(all.rows.size() == 8);
  for (const auto& [id, v] : all.rows) {
    const auto src = vector(m, EntityRef::parse(id));
    REQUIRE(src);
    CHECK(std::equal(v.begin(), v.end(), src->begin()));
  }
}

TEST_CASE("malformed vector files") {
  auto kind = [](std::string_view text) {
    try {
      parse_text_vectors(text);
    } catch (const Error& e) {
      return e.kind();
    }
    return std::string();
  };
  CHECK(kind("1 2\na 1 2\n").empty());
  CHECK(kind("1\na 1 2\n") == "BadVectorFile");
  CHECK(kind("x 2\na 1 2\n") == "BadVectorFile");
  CHECK(kind("1 2\na 1\n") == "BadVectorFile");
  CHECK(kind("1 2\na 1 2x\n") == "BadVectorFile");
  CHECK(kind("2 2\na 1 2\n") == "BadVectorFile");
}
