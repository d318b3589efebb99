#pragma once

#include <chrono>
#include <cstddef>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "hypotopo/relation.hpp"

namespace hypotopo {

/// Posts a JSON body and returns the response body. Throws TransportError on
/// connection failure or a non-2xx status.
using Transport = std::function<std::string(const std::string& body)>;

/// HTTP(S) POST transport for `url` (scheme://host[:port]/path). `key`, when
/// non-empty, is sent as a bearer token.
Transport make_http_transport(const std::string& url, const std::string& key,
                              std::chrono::milliseconds timeout = std::chrono::seconds(30));

struct RetryPolicy {
  int attempts = 3;
  std::chrono::milliseconds initial_backoff{200};  // doubled after each failure
};

/// Invokes `transport` up to `policy.attempts` times. Rethrows the last
/// TransportError when every attempt fails.
std::string post_with_retry(const Transport& transport, const std::string& body, const RetryPolicy& policy);

// --- embeddings -------------------------------------------------------------

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  /// One unit-norm vector of size dimension() per input, in input order.
  virtual std::vector<std::vector<double>> embed(std::span<const std::string> canons) = 0;
  virtual std::size_t dimension() const = 0;
};

/// Rescales to unit L2 norm; a zero vector is returned unchanged.
void l2_normalize(std::vector<double>& v);

/// Deterministic offline embedder: each whitespace token is hashed (FNV-1a)
/// into one of `dimension` buckets, counts are accumulated as integers and
/// normalized once at the end. An empty input is treated as one empty token.
class HashingEmbedder final : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(std::size_t dimension = 64) : dimension_(dimension) {}
  std::vector<std::vector<double>> embed(std::span<const std::string> canons) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::size_t dimension_;
};

/// Precomputed vectors keyed by canon hash, loaded from a line-delimited file
/// of {"canon_hash": "...", "vector": [...]}. Missing keys are an error.
class FileEmbedder final : public EmbeddingProvider {
 public:
  explicit FileEmbedder(const std::string& path);
  FileEmbedder(std::unordered_map<std::string, std::vector<double>> by_hash, std::size_t dimension);
  std::vector<std::vector<double>> embed(std::span<const std::string> canons) override;
  std::size_t dimension() const override { return dimension_; }

 private:
  std::unordered_map<std::string, std::vector<double>> by_hash_;
  std::size_t dimension_ = 0;
};

/// Appends one {"canon_hash", "vector"} line per entry.
void write_embedding_file(const std::string& path, std::span<const std::string> canons,
                          const std::vector<std::vector<double>>& vectors);

/// Remote wire format: request {"model": m, "inputs": [..]} ->
/// response {"vectors": [[..], ..]}. Responses are re-normalized.
class RemoteEmbedder final : public EmbeddingProvider {
 public:
  RemoteEmbedder(Transport transport, std::string model, std::size_t dimension, RetryPolicy retry = {});
  std::vector<std::vector<double>> embed(std::span<const std::string> canons) override;
  std::size_t dimension() const override { return dimension_; }
  std::size_t requests() const;

 private:
  Transport transport_;
  std::string model_;
  std::size_t dimension_;
  RetryPolicy retry_;
  mutable std::mutex mu_;
  std::size_t requests_ = 0;
};

/// Memoizes an inner provider and, when `path` is non-empty, appends every new
/// vector to an embedding file readable by FileEmbedder.
class CachingEmbedder final : public EmbeddingProvider {
 public:
  CachingEmbedder(std::shared_ptr<EmbeddingProvider> inner, std::string path = {});
  std::vector<std::vector<double>> embed(std::span<const std::string> canons) override;
  std::size_t dimension() const override { return inner_->dimension(); }

 private:
  std::shared_ptr<EmbeddingProvider> inner_;
  std::string path_;
  std::mutex mu_;
  std::unordered_map<std::string, std::vector<double>> memo_;  // by canon hash
};

// --- relation labels ----------------------------------------------------------

/// Remote wire format: request {"pairs": [{"a": text, "b": text}, ..]} ->
/// response {"codes": ["SUPPORT" | "REFUTE" | "NEUTRAL", ..]}. One request
/// per chunk. Unparseable slots become NEUTRAL and count as warnings; a
/// transport failure after retries marks the whole chunk failed.
class RemoteRelationOracle final : public RelationOracle {
 public:
  RemoteRelationOracle(Transport transport, std::size_t budget_cap = 19, RetryPolicy retry = {});

 protected:
  OracleReply do_label(std::span<const RelationQuery> queries) override;

 private:
  Transport transport_;
  RetryPolicy retry_;
};

/// Reads `name` from the environment; empty string when unset.
std::string env_or_empty(const char* name);

}  // namespace hypotopo
