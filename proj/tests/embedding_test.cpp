// Copyright 2026  The anonvec Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <filesystem>
#include <sstream>

#include "anonvec/embedding.hpp"
#include "anonvec/embedding_io.hpp"
#include "anonvec/random.hpp"
#include "anonvec/synthetic.hpp"
#include "oracles.hpp"

namespace anonvec {
namespace {

template <typename F>
ErrorKind error_kind_of(F &&f) {
  try {
    f();
  } catch (const Error &e) {
    return e.kind();
  }
  ADD_FAILURE() << "expected an anonvec::Error";
  return ErrorKind::InvalidArgument;
}

TEST(CosineDistance, BasicAngles) {
  EXPECT_EQ(cosine_distance(Vector{1, 0}, Vector{1, 0}), 0.0);
  EXPECT_EQ(cosine_distance(Vector{1, 0}, Vector{0, 1}), 1.0);
  EXPECT_EQ(cosine_distance(Vector{1, 0}, Vector{-1, 0}), 2.0);
}

TEST(CosineDistance, Errors) {
  EXPECT_EQ(error_kind_of([] { cosine_distance(Vector{1, 0}, Vector{1}); }),
            ErrorKind::DimensionMismatch);
  EXPECT_EQ(error_kind_of([] { cosine_distance(Vector{0, 0}, Vector{1, 0}); }),
            ErrorKind::ZeroNorm);
  EXPECT_EQ(
      error_kind_of([] { cosine_distance(Vector{1, 0}, Vector{1e-13, 0}); }),
      ErrorKind::ZeroNorm);
}

TEST(CosineDistance, SymmetricAndScaleInvariant) {
  Rng rng(11);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 1 + rng.below(64);
    const Vector a = oracle::random_vector(rng, n);
    const Vector b = oracle::random_vector(rng, n);
    const double dab = cosine_distance(a, b);
    EXPECT_EQ(dab, cosine_distance(b, a));
    EXPECT_GE(dab, 0.0);
    EXPECT_LE(dab, 2.0);
    EXPECT_NEAR(dab, oracle::cosine_distance(a, b), 1e-12);

    const double c = rng.uniform(1e-3, 1e3);
    Vector ca = a;
    for (double &x : ca) x *= c;
    EXPECT_NEAR(cosine_distance(a, ca), 0.0, 1e-12);
  }
}

TEST(SpeakerLevelAverage, SingleAndPair) {
  const UtteranceEmbedding u{"s", "u1", {0.25, -1.5, 3.0}, {}};
  const auto one = speaker_level_average(std::vector{u}, "s");
  EXPECT_EQ(one.vector, u.vector);
  EXPECT_EQ(one.utterance_count, 1u);

  const std::vector<UtteranceEmbedding> pair{{"s", "a", {1, 1}, {}},
                                             {"s", "b", {3, 3}, {}}};
  const auto avg = speaker_level_average(pair, "s");
  EXPECT_EQ(avg.vector, (Vector{2, 2}));
  EXPECT_EQ(avg.utterance_count, 2u);
}

TEST(SpeakerLevelAverage, MatchesIndependentMean) {
  Rng rng(5);
  std::vector<UtteranceEmbedding> utts;
  for (int i = 0; i < 5; ++i)
    utts.push_back({"spk", "u" + std::to_string(i),
                    oracle::random_vector(rng, 512), {}});
  const auto avg = speaker_level_average(utts, "spk");
  for (std::size_t d = 0; d < 512; ++d) {
    long double s = 0;
    for (const auto &u : utts) s += u.vector[d];
    EXPECT_LT(std::abs(avg.vector[d] - static_cast<double>(s / 5.0L)), 1e-12);
  }
}

TEST(SpeakerLevelAverage, PermutationInvariant) {
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<UtteranceEmbedding> utts;
    const std::size_t n = 1 + rng.below(12);
    for (std::size_t i = 0; i < n; ++i)
      utts.push_back({"s", "u" + std::to_string(i),
                      oracle::random_vector(rng, 16), {}});
    const auto ref = speaker_level_average(utts, "s");
    shuffle(utts.begin(), utts.end(), rng);
    EXPECT_EQ(speaker_level_average(utts, "s"), ref);
  }
}

TEST(SpeakerLevelAverage, Errors) {
  EXPECT_EQ(error_kind_of([] {
              speaker_level_average(std::vector<UtteranceEmbedding>{}, "s");
            }),
            ErrorKind::EmptyInput);
  EXPECT_EQ(error_kind_of([] {
              speaker_level_average(
                  std::vector<UtteranceEmbedding>{{"s", "a", {1}, {}},
                                                  {"t", "b", {1}, {}}},
                  "s");
            }),
            ErrorKind::MixedSpeakers);
  EXPECT_EQ(error_kind_of([] {
              speaker_level_average(
                  std::vector<UtteranceEmbedding>{{"s", "a", {1}, {}},
                                                  {"s", "b", {1, 2}, {}}},
                  "s");
            }),
            ErrorKind::DimensionMismatch);
}

TEST(EmbeddingPool, Invariants) {
  const EmbeddingPool pool({{"a", {1, 0}, 1}, {"b", {0, 1}, 1}});
  EXPECT_EQ(pool.pool_size(), 2u);
  EXPECT_EQ(pool.dim(), 2u);
  EXPECT_EQ(error_kind_of([] {
              EmbeddingPool({{"a", {1, 0}, 1}, {"a", {0, 1}, 1}});
            }),
            ErrorKind::InvalidArgument);
  EXPECT_EQ(error_kind_of([] {
              EmbeddingPool({{"a", {1, 0}, 1}, {"b", {0, 1, 2}, 1}});
            }),
            ErrorKind::DimensionMismatch);
}

TEST(EmbeddingIo, EmptyFileGivesEmptyList) {
  std::istringstream in("");
  const auto ds = read_embeddings(in);
  EXPECT_TRUE(ds.utterances.empty());
}

TEST(EmbeddingIo, RoundTripIsBitExact) {
  Rng rng(21);
  ClusterSpec spec;
  spec.num_speakers = 3;
  spec.utts_per_speaker = 4;
  spec.dim = 32;
  spec.cond_dim = 3;
  for (int trial = 0; trial < 5; ++trial) {
    spec.seed = rng.engine()();
    auto data = make_clusters(spec);
    // awkward magnitudes survive too
    data[0].vector[0] = 1e-310;
    data[0].vector[1] = -1.7976931348623157e308;
    data[1].vector[2] = 0.1 + 0.2;
    std::stringstream buf;
    write_embeddings(buf, data);
    const auto back = read_embeddings(buf);
    EXPECT_EQ(back.dim, spec.dim);
    ASSERT_EQ(back.utterances, data);
  }
}

TEST(EmbeddingIo, SaveLoadThreeUtterancesThroughFile) {
  const std::vector<UtteranceEmbedding> data{
      {"s1", "u1", {0.5, -0.25, 1.0 / 3.0}, {}},
      {"s1", "u2", {1e-20, 2.0, -7.0}, {0.1, 0.2}},
      {"s2", "u1", {3.0, 4.0, 5.0}, {}}};
  const auto path =
      (std::filesystem::temp_directory_path() / "anonvec_io_test.jsonl").string();
  save_embeddings(data, path);
  EXPECT_EQ(load_embeddings(path), data);
  std::filesystem::remove(path);
}

TEST(EmbeddingIo, DimensionMismatchReportsLine) {
  std::ostringstream text;
  text << R"({"dim":512})" << '\n';
  Json ok = {{"speaker_id", "s"}, {"utterance_id", "u1"},
             {"vector", Vector(512, 0.5)}};
  Json bad = {{"speaker_id", "s"}, {"utterance_id", "u2"},
              {"vector", Vector(511, 0.5)}};
  text << ok.dump() << '\n' << bad.dump() << '\n';
  std::istringstream in(text.str());
  try {
    read_embeddings(in);
    FAIL() << "expected DimensionMismatch";
  } catch (const Error &e) {
    EXPECT_EQ(e.kind(), ErrorKind::DimensionMismatch);
    EXPECT_EQ(e.line(), 3u);
  }
}

TEST(EmbeddingIo, MalformedInput) {
  auto kind_and_line = [](const std::string &text) {
    std::istringstream in(text);
    try {
      read_embeddings(in);
    } catch (const Error &e) {
      return std::pair{e.kind(), e.line()};
    }
    return std::pair{ErrorKind::InvalidArgument, std::size_t{0}};
  };
  EXPECT_EQ(kind_and_line("{\"dim\":2}\nnot json\n"),
            std::pair(ErrorKind::ParseError, std::size_t{2}));
  EXPECT_EQ(kind_and_line("{\"speaker_id\":\"s\"}\n"),
            std::pair(ErrorKind::ParseError, std::size_t{1}));
  EXPECT_EQ(kind_and_line("{\"dim\":2}\n"
                          "{\"speaker_id\":\"s\",\"utterance_id\":\"u\","
                          "\"vector\":[1,\"x\"]}\n"),
            std::pair(ErrorKind::ParseError, std::size_t{2}));
  EXPECT_EQ(kind_and_line("{\"dim\":1}\n"
                          "{\"speaker_id\":\"s\",\"utterance_id\":\"u\","
                          "\"vector\":[1]}\n"
                          "{\"speaker_id\":\"s\",\"utterance_id\":\"u\","
                          "\"vector\":[2]}\n"),
            std::pair(ErrorKind::DuplicateUtterance, std::size_t{3}));
}

TEST(EmbeddingIo, HeaderExtrasArePreserved) {
  std::stringstream buf;
  write_embeddings(buf, std::vector<UtteranceEmbedding>{}, 8,
                   Json{{"seed", 3}});
  const auto ds = read_embeddings(buf);
  EXPECT_EQ(ds.dim, 8u);
  EXPECT_EQ(ds.header.at("seed"), 3);
}

}  // namespace
}  // namespace anonvec
