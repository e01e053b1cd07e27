// anonvec/embedding_io.hpp

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

#pragma once

// Embedding files are JSON lines. The first line is a header object carrying
// at least "dim"; every following line is one record:
//
//   {"dim":512}
//   {"speaker_id":"s1","utterance_id":"u1","vector":[...],"cond":[...]}
//
// "cond" is optional. Doubles are written in shortest round-trip form, so
// save followed by load is bit-exact.

#include <cstddef>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <set>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "anonvec/embedding.hpp"
#include "anonvec/error.hpp"
#include "json.hpp"

namespace anonvec {

using Json = nlohmann::json;

struct EmbeddingDataset {
  std::size_t dim = 0;
  std::vector<UtteranceEmbedding> utterances;
  /// Whole header line; writers put provenance (config, seed) here.
  Json header = Json::object();
};

namespace detail {

inline Vector parse_number_array(const Json &j, const char *field,
                                 std::size_t line) {
  if (!j.is_array())
    fail(ErrorKind::ParseError, std::string("field '") + field +
                                    "' must be an array of numbers",
         line);
  Vector out;
  out.reserve(j.size());
  for (const auto &x : j) {
    if (!x.is_number())
      fail(ErrorKind::ParseError,
           std::string("non-numeric entry in '") + field + "'", line);
    const double v = x.get<double>();
    if (!std::isfinite(v))
      fail(ErrorKind::ParseError,
           std::string("non-finite entry in '") + field + "'", line);
    out.push_back(v);
  }
  return out;
}

inline std::string parse_string(const Json &obj, const char *field,
                                std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end() || !it->is_string())
    fail(ErrorKind::ParseError,
         std::string("missing string field '") + field + "'", line);
  return it->get<std::string>();
}

inline Json parse_line(const std::string &text, std::size_t line) {
  try {
    Json j = Json::parse(text);
    if (!j.is_object()) fail(ErrorKind::ParseError, "expected an object", line);
    return j;
  } catch (const Json::parse_error &e) {
    fail(ErrorKind::ParseError, e.what(), line);
  }
}

inline std::ifstream open_input(const std::string &path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::Io, "cannot open " + path);
  return in;
}

inline std::ofstream open_output(const std::string &path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorKind::Io, "cannot write " + path);
  return out;
}

}  // namespace detail

inline EmbeddingDataset read_embeddings(std::istream &in) {
  EmbeddingDataset ds;
  bool have_header = false;
  std::set<std::pair<std::string, std::string>> seen;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    Json j = detail::parse_line(text, line);
    if (!have_header) {
      auto it = j.find("dim");
      if (it == j.end() || !it->is_number_unsigned())
        fail(ErrorKind::ParseError,
             "first line must be a header with a non-negative integer 'dim'",
             line);
      ds.dim = it->get<std::size_t>();
      ds.header = std::move(j);
      have_header = true;
      continue;
    }
    UtteranceEmbedding u;
    u.speaker_id = detail::parse_string(j, "speaker_id", line);
    u.utterance_id = detail::parse_string(j, "utterance_id", line);
    auto vit = j.find("vector");
    if (vit == j.end())
      fail(ErrorKind::ParseError, "missing field 'vector'", line);
    u.vector = detail::parse_number_array(*vit, "vector", line);
    if (u.vector.size() != ds.dim)
      fail(ErrorKind::DimensionMismatch,
           "vector has dimension " + std::to_string(u.vector.size()) +
               ", header declares " + std::to_string(ds.dim),
           line);
    if (auto cit = j.find("cond"); cit != j.end())
      u.cond = detail::parse_number_array(*cit, "cond", line);
    if (!seen.emplace(u.speaker_id, u.utterance_id).second)
      fail(ErrorKind::DuplicateUtterance,
           "duplicate (" + u.speaker_id + ", " + u.utterance_id + ")", line);
    ds.utterances.push_back(std::move(u));
  }
  return ds;
}

inline EmbeddingDataset load_dataset(const std::string &path) {
  auto in = detail::open_input(path);
  try {
    return read_embeddings(in);
  } catch (const Error &e) {
    throw Error(e.kind(),
                path + ":" + std::to_string(e.line()) + ": " + e.message(),
                e.line());
  }
}

inline std::vector<UtteranceEmbedding> load_embeddings(const std::string &path) {
  return load_dataset(path).utterances;
}

inline Json to_json(const UtteranceEmbedding &u) {
  Json j = {{"speaker_id", u.speaker_id},
            {"utterance_id", u.utterance_id},
            {"vector", u.vector}};
  if (!u.cond.empty()) j["cond"] = u.cond;
  return j;
}

/// Writes header then records. With no records and no `dim`, the header
/// still declares dim 0 so the file stays loadable.
inline void write_embeddings(std::ostream &out,
                             std::span<const UtteranceEmbedding> utterances,
                             std::optional<std::size_t> dim = std::nullopt,
                             Json header_extra = Json::object()) {
  const std::size_t d =
      dim ? *dim : (utterances.empty() ? 0 : utterances.front().vector.size());
  Json header = std::move(header_extra);
  header["dim"] = d;
  out << header.dump() << '\n';
  for (const auto &u : utterances) {
    if (u.vector.size() != d)
      fail(ErrorKind::DimensionMismatch,
           "record " + u.utterance_id + " has dimension " +
               std::to_string(u.vector.size()));
    if (!all_finite(u.vector) || !all_finite(u.cond))
      fail(ErrorKind::InvalidArgument,
           "record " + u.utterance_id + " has non-finite entries");
    out << to_json(u).dump() << '\n';
  }
}

inline void save_embeddings(std::span<const UtteranceEmbedding> utterances,
                            const std::string &path,
                            std::optional<std::size_t> dim = std::nullopt,
                            Json header_extra = Json::object()) {
  auto out = detail::open_output(path);
  write_embeddings(out, utterances, dim, std::move(header_extra));
  if (!out) fail(ErrorKind::Io, "write failed: " + path);
}

/// Speaker-level records are stored with utterance_id equal to speaker_id.
inline std::vector<UtteranceEmbedding> as_records(
    std::span<const SpeakerLevelEmbedding> speakers) {
  std::vector<UtteranceEmbedding> out;
  out.reserve(speakers.size());
  for (const auto &s : speakers)
    out.push_back({s.speaker_id, s.speaker_id, s.vector, {}});
  return out;
}

}  // namespace anonvec
