#include "doctest.h"

#include <zlib.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "topicvec/corpus.hpp"
#include "topicvec/embedding.hpp"

namespace fs = std::filesystem;
using namespace topicvec;

namespace {

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / name;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& p, const std::string& content) {
  std::ofstream out(p);
  out << content;
}

}  // namespace

TEST_CASE("load_embeddings parses a plain file") {
  const fs::path dir = fresh_dir("tv_emb_plain");
  write_file(dir / "e.txt", "a 1.0 0.0\nb 0.0 1.0\n");
  const EmbeddingFile emb = load_embeddings((dir / "e.txt").string());
  CHECK(emb.words == std::vector<std::string>{"a", "b"});
  CHECK(emb.dim == 2);
  CHECK(emb.vectors.isApprox(Eigen::MatrixXd::Identity(2, 2)));
}

TEST_CASE("load_embeddings honors the header line") {
  const fs::path dir = fresh_dir("tv_emb_header");
  write_file(dir / "e.txt", "2 3\na 1 2 3\nb 4 5 6\n");
  const EmbeddingFile emb = load_embeddings((dir / "e.txt").string());
  CHECK(emb.dim == 3);
  CHECK(emb.words.size() == 2);
  CHECK(emb.vectors(1, 2) == 6.0);
}

TEST_CASE("load_embeddings reports the offending line on dimension mismatch") {
  const fs::path dir = fresh_dir("tv_emb_bad");
  write_file(dir / "e.txt", "a 1 2 3\nb 1 2 3 4\n");
  CHECK_THROWS_WITH_AS(load_embeddings((dir / "e.txt").string()),
                       doctest::Contains("line 2"), std::runtime_error);
  write_file(dir / "empty.txt", "");
  CHECK_THROWS(load_embeddings((dir / "empty.txt").string()));
  CHECK_THROWS(load_embeddings((dir / "missing.txt").string()));
}

TEST_CASE("load_embeddings tolerates CRLF line endings") {
  const fs::path dir = fresh_dir("tv_emb_crlf");
  write_file(dir / "e.txt", "a 1 2\r\nb 3 4\r\n");
  const EmbeddingFile emb = load_embeddings((dir / "e.txt").string());
  CHECK(emb.words.size() == 2);
  CHECK(emb.vectors(1, 1) == 4.0);
}

TEST_CASE("load_embeddings keeps the first duplicate") {
  const fs::path dir = fresh_dir("tv_emb_dup");
  write_file(dir / "e.txt", "a 1 1\na 9 9\nb 2 2\n");
  const EmbeddingFile emb = load_embeddings((dir / "e.txt").string());
  CHECK(emb.words == std::vector<std::string>{"a", "b"});
  CHECK(emb.vectors(0, 0) == 1.0);
}

TEST_CASE("load_embeddings values are bit-exact strtod results") {
  const fs::path dir = fresh_dir("tv_emb_exact");
  const std::string token = "0.12345678901234567";
  write_file(dir / "e.txt", "a " + token + " -3.5e-2\n");
  const EmbeddingFile emb = load_embeddings((dir / "e.txt").string());
  CHECK(emb.vectors(0, 0) == std::strtod(token.c_str(), nullptr));
  CHECK(emb.vectors(0, 1) == std::strtod("-3.5e-2", nullptr));
}

TEST_CASE("load_embeddings reads gzip files by extension") {
  const fs::path dir = fresh_dir("tv_emb_gz");
  const std::string content = "a 1.25 -2\nb 0.5 4\n";
  gzFile gz = gzopen((dir / "e.txt.gz").string().c_str(), "wb");
  REQUIRE(gz != nullptr);
  gzwrite(gz, content.data(), static_cast<unsigned>(content.size()));
  gzclose(gz);
  const EmbeddingFile emb = load_embeddings((dir / "e.txt.gz").string());
  CHECK(emb.words == std::vector<std::string>{"a", "b"});
  CHECK(emb.vectors(0, 0) == 1.25);
  CHECK(emb.vectors(1, 1) == 4.0);
}

TEST_CASE("save/load embeddings round-trips doubles exactly") {
  const fs::path dir = fresh_dir("tv_emb_rt");
  Eigen::MatrixXd vec(2, 3);
  vec << 0.1, -1.0 / 3.0, 5e-300, 1.0, 2.5, -0.7;
  save_embeddings({"u", "v"}, vec, (dir / "e.txt").string());
  const EmbeddingFile emb = load_embeddings((dir / "e.txt").string());
  CHECK(emb.vectors == vec);
}

TEST_CASE("align permutes rows into vocabulary order") {
  const Vocabulary vocab = build_vocabulary({{"b", "a"}});
  Eigen::MatrixXd vec(2, 2);
  vec << 1, 2, 3, 4;  // a -> (1,2), b -> (3,4)
  const EmbeddingMatrix m = align(vocab, {"a", "b"}, vec);
  CHECK(m.V.row(vocab.id_of("b"))(0) == 3.0);
  CHECK(m.V.row(vocab.id_of("a"))(0) == 1.0);
  CHECK(m.dim == 2);

  // Identity case: orders already agree.
  const Vocabulary vocab2 = build_vocabulary({{"a", "b"}});
  const EmbeddingMatrix m2 = align(vocab2, {"a", "b"}, vec);
  CHECK(m2.V == vec);
}

TEST_CASE("align reports missing words, at most ten of them") {
  std::vector<std::vector<std::string>> seqs(1);
  for (int i = 0; i < 15; ++i) seqs[0].push_back("w" + std::to_string(i));
  const Vocabulary vocab = build_vocabulary(seqs);
  Eigen::MatrixXd vec(1, 2);
  vec << 1, 2;
  try {
    align(vocab, {"w0"}, vec);
    FAIL("expected an error");
  } catch (const std::runtime_error& e) {
    const std::string msg = e.what();
    CHECK(msg.find("14") != std::string::npos);
    CHECK(msg.find("and 4 more") != std::string::npos);
  }
}
