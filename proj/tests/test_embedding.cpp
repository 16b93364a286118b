#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "test_util.hpp"
#include "xlalign/embedding.hpp"
#include "xlalign/errors.hpp"

using namespace xlalign;
using testutil::TempDir;

namespace {

// Canonical 10-record fixture; values chosen to be exactly representable
// so the written file reproduces the input byte for byte.
const char* kFixture =
    "CTXDUMP 2\n"
    "the\t0\t0\t0\t1 0\n"
    "the\t0\t1\t2\t0 1\n"
    "bank\t0\t0\t1\t0.5 0.25\n"
    "bank\t1\t0\t1\t-0.5 2\n"
    "river\t0\t2\t0\t3 -4\n"
    "river\t1\t2\t0\t0.125 8\n"
    "of\t0\t2\t1\t-1 -1\n"
    "of\t0\t3\t0\t1 1\n"
    "the\t1\t0\t0\t2 2\n"
    "money\t1\t3\t4\t1e-20 100\n";

EmbeddingSpace load_fixture(const TempDir& dir) {
  std::string path = dir.file("fixture.ctxdump");
  testutil::write_file(path, kFixture);
  return load_contextual_dump(path, "en");
}

}  // namespace

TEST_CASE("loading a single record yields a one-token one-layer space") {
  TempDir dir("emb1");
  std::string path = dir.file("one.ctxdump");
  testutil::write_file(path, "CTXDUMP 4\nhello\t3\t0\t5\t1 2 3 4\n");
  EmbeddingSpace space = load_contextual_dump(path);
  CHECK(space.vocab().size() == 1);
  CHECK(space.layers() == std::set<std::int32_t>{3});
  CHECK(space.dim() == 4);
  CHECK(space.lookup(3, 0, 5) == Vec{1, 2, 3, 4});
}

TEST_CASE("empty dump files are rejected") {
  TempDir dir("emb2");
  std::string path = dir.file("empty.ctxdump");
  testutil::write_file(path, "");
  CHECK_THROWS_WITH_AS(load_contextual_dump(path),
                       doctest::Contains("no records"), DataError);

  testutil::write_file(path, "CTXDUMP 2\n# only a comment\n");
  CHECK_THROWS_WITH_AS(load_contextual_dump(path),
                       doctest::Contains("no records"), DataError);
}

TEST_CASE("missing dump file is a data error") {
  CHECK_THROWS_AS(load_contextual_dump("/nonexistent/path.ctxdump"), DataError);
}

TEST_CASE("dump round-trips byte-identically") {
  TempDir dir("emb3");
  EmbeddingSpace space = load_fixture(dir);
  std::string out = dir.file("roundtrip.ctxdump");
  write_contextual_dump(space, out);
  CHECK(testutil::read_file(out) == kFixture);
}

TEST_CASE("malformed lines are tolerated only within the 0.1% budget") {
  TempDir dir("emb4");
  std::string path = dir.file("bad.ctxdump");
  // 1 bad line in 10 is far over budget.
  std::string content = kFixture;
  content += "broken line without tabs\n";
  testutil::write_file(path, content);
  CHECK_THROWS_WITH_AS(load_contextual_dump(path),
                       doctest::Contains("malformed"), DataError);

  // 1 bad line in 2000 is within budget and reported.
  std::string big = "CTXDUMP 1\n";
  for (int i = 0; i < 1999; ++i)
    big += "w\t0\t" + std::to_string(i) + "\t0\t1\n";
  big += "not a record\n";
  testutil::write_file(path, big);
  std::size_t malformed = 0;
  EmbeddingSpace space = load_contextual_dump(path, "", &malformed);
  CHECK(malformed == 1);
  CHECK(space.occurrences().size() == 1999);
}

TEST_CASE("wrong vector length is a dimension inconsistency error") {
  TempDir dir("emb5");
  std::string path = dir.file("dim.ctxdump");
  testutil::write_file(path, "CTXDUMP 3\nw\t0\t0\t0\t1 2\n");
  CHECK_THROWS_WITH_AS(load_contextual_dump(path),
                       doctest::Contains("dimension inconsistency"), DataError);
}

TEST_CASE("duplicate occurrence keys count as malformed") {
  TempDir dir("emb6");
  std::string path = dir.file("dup.ctxdump");
  testutil::write_file(path,
                       "CTXDUMP 1\n"
                       "a\t0\t0\t0\t1\n"
                       "b\t0\t0\t0\t2\n");
  CHECK_THROWS_AS(load_contextual_dump(path), DataError);
}

TEST_CASE("anchor of a single occurrence is that vector with count 1") {
  EmbeddingSpace space("en", 2);
  space.add_occurrence({"cat", 0, 0, 0, {1.5, -2.0}});
  AnchorTable table = compute_anchors(space, 0);
  REQUIRE(table.anchors.count("cat"));
  CHECK(table.anchors.at("cat").vector == Vec{1.5, -2.0});
  CHECK(table.anchors.at("cat").count == 1);
}

TEST_CASE("anchor averages occurrences") {
  EmbeddingSpace space("en", 2);
  space.add_occurrence({"w", 0, 0, 0, {1.0, 0.0}});
  space.add_occurrence({"w", 0, 1, 0, {0.0, 1.0}});
  AnchorTable table = compute_anchors(space, 0);
  CHECK(table.anchors.at("w").vector == Vec{0.5, 0.5});
  CHECK(table.anchors.at("w").count == 2);
}

TEST_CASE("anchor of 1000 random occurrences matches a compensated oracle") {
  Rng rng(71);
  EmbeddingSpace space("en", 3);
  std::vector<Vec> vectors;
  for (int i = 0; i < 1000; ++i) {
    Vec v = rng.normal_vector(3);
    vectors.push_back(v);
    space.add_occurrence({"tok", 0, i, 0, v});
  }
  AnchorTable table = compute_anchors(space, 0);
  const Vec& anchor = table.anchors.at("tok").vector;
  for (std::size_t c = 0; c < 3; ++c) {
    KahanSum acc;  // independent accumulation in test code
    for (const Vec& v : vectors) acc.add(v[c]);
    CHECK(std::abs(anchor[c] - acc.value() / 1000.0) < 1e-12);
  }
}

TEST_CASE("anchors are invariant to occurrence order") {
  Rng rng(73);
  std::vector<Vec> vectors;
  for (int i = 0; i < 200; ++i) vectors.push_back(rng.normal_vector(4));

  EmbeddingSpace forward("en", 4), backward("en", 4);
  for (int i = 0; i < 200; ++i)
    forward.add_occurrence({"w", 0, i, 0, vectors[i]});
  for (int i = 199; i >= 0; --i)
    backward.add_occurrence({"w", 0, i, 0, vectors[i]});

  const Vec& a = compute_anchors(forward, 0).anchors.at("w").vector;
  const Vec& b = compute_anchors(backward, 0).anchors.at("w").vector;
  for (std::size_t c = 0; c < 4; ++c) CHECK(std::abs(a[c] - b[c]) < 1e-12);
}

TEST_CASE("anchor of identical occurrences equals that vector exactly") {
  EmbeddingSpace space("en", 2);
  Vec v{0.3333333333333333, -7.25};
  for (int i = 0; i < 17; ++i) space.add_occurrence({"w", 2, i, 0, v});
  CHECK(compute_anchors(space, 2).anchors.at("w").vector == v);
}

TEST_CASE("compute_anchors enforces min_count and reports exclusions") {
  EmbeddingSpace space("en", 1);
  space.add_occurrence({"common", 0, 0, 0, {1.0}});
  space.add_occurrence({"common", 0, 1, 0, {2.0}});
  space.add_occurrence({"rare", 0, 2, 0, {3.0}});
  std::size_t excluded = 0;
  AnchorTable table = compute_anchors(space, 0, 2, &excluded);
  CHECK(table.anchors.size() == 1);
  CHECK(table.anchors.count("common"));
  CHECK(excluded == 1);
}

TEST_CASE("compute_anchors rejects an absent layer") {
  EmbeddingSpace space("en", 1);
  space.add_occurrence({"w", 0, 0, 0, {1.0}});
  CHECK_THROWS_AS(compute_anchors(space, 5), DataError);
}

TEST_CASE("average_subwords of one vector is that vector") {
  Vec v{2.0, -1.0, 0.5};
  CHECK(average_subwords({v}) == v);
}

TEST_CASE("average_subwords is the elementwise mean") {
  CHECK(average_subwords({{2.0, 4.0}, {0.0, 0.0}}) == Vec{1.0, 2.0});
}

TEST_CASE("average_subwords matches a compensated oracle on random input") {
  Rng rng(79);
  std::vector<Vec> vs;
  for (int i = 0; i < 7; ++i) vs.push_back(rng.normal_vector(5));
  Vec mean = average_subwords(vs);
  for (std::size_t c = 0; c < 5; ++c) {
    KahanSum acc;
    for (const Vec& v : vs) acc.add(v[c]);
    CHECK(std::abs(mean[c] - acc.value() / 7.0) < 1e-12);
  }
}

TEST_CASE("average_subwords rejects empty and mixed-dimension input") {
  CHECK_THROWS_AS(average_subwords({}), DataError);
  CHECK_THROWS_AS(average_subwords({{1.0}, {1.0, 2.0}}), DataError);
}

TEST_CASE("lookup returns stored vectors and names missing keys") {
  TempDir dir("emb7");
  EmbeddingSpace space = load_fixture(dir);
  CHECK(space.lookup(0, 0, 1) == Vec{0.5, 0.25});
  CHECK_THROWS_WITH_AS(space.lookup(0, 99, 0), doctest::Contains("sentence=99"),
                       DataError);
}

TEST_CASE("every fixture record is retrievable by key") {
  TempDir dir("emb8");
  EmbeddingSpace space = load_fixture(dir);
  CHECK(space.occurrences().size() == 10);
  for (const OccurrenceRecord& rec : space.occurrences())
    CHECK(space.lookup(rec.layer, rec.sentence_id, rec.position) == rec.vector);
}

TEST_CASE("anchor table round-trips byte-identically") {
  TempDir dir("emb9");
  EmbeddingSpace space = load_fixture(dir);
  AnchorTable table = compute_anchors(space, 0);
  std::string path1 = dir.file("a1.anchors");
  std::string path2 = dir.file("a2.anchors");
  write_anchor_table(table, path1);
  AnchorTable reloaded = load_anchor_table(path1);
  CHECK(reloaded.language == table.language);
  CHECK(reloaded.layer == table.layer);
  write_anchor_table(reloaded, path2);
  CHECK(testutil::read_file(path1) == testutil::read_file(path2));
}
