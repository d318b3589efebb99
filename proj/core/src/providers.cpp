#include "hypotopo/providers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <thread>

#include "httplib.h"
#include "hypotopo/error.hpp"
#include "hypotopo/text.hpp"
#include "json.hpp"

namespace hypotopo {

namespace {

using Json = nlohmann::json;

struct ParsedUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;
};

ParsedUrl split_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("endpoint URL needs a scheme: '" + url + "'");
  auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

}  // namespace

Transport make_http_transport(const std::string& url, const std::string& key, std::chrono::milliseconds timeout) {
  ParsedUrl parsed = split_url(url);
  return [parsed, key, timeout](const std::string& body) -> std::string {
    httplib::Client client(parsed.origin);
    client.set_connection_timeout(timeout);
    client.set_read_timeout(timeout);
    httplib::Headers headers;
    if (!key.empty()) headers.emplace("Authorization", "Bearer " + key);
    auto res = client.Post(parsed.path, headers, body, "application/json");
    if (!res) throw TransportError("POST " + parsed.origin + parsed.path + " failed: " + httplib::to_string(res.error()));
    if (res->status < 200 || res->status >= 300) {
      throw TransportError("POST " + parsed.origin + parsed.path + " returned status " + std::to_string(res->status));
    }
    return res->body;
  };
}

std::string post_with_retry(const Transport& transport, const std::string& body, const RetryPolicy& policy) {
  auto backoff = policy.initial_backoff;
  for (int attempt = 1;; ++attempt) {
    try {
      return transport(body);
    } catch (const TransportError&) {
      if (attempt >= policy.attempts) throw;
    }
    if (backoff.count() > 0) std::this_thread::sleep_for(backoff);
    backoff *= 2;
  }
}

void l2_normalize(std::vector<double>& v) {
  double sq = 0.0;
  for (double x : v) sq += x * x;
  // Already-unit vectors are left bit-identical so cached vectors round-trip.
  if (sq <= 0.0 || std::abs(sq - 1.0) < 1e-14) return;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& x : v) x *= inv;
}

std::vector<std::vector<double>> HashingEmbedder::embed(std::span<const std::string> canons) {
  std::vector<std::vector<double>> out;
  out.reserve(canons.size());
  for (const auto& canon : canons) {
    std::vector<long long> counts(dimension_, 0);
    auto tokens = canon_tokens(canon);
    if (tokens.empty()) tokens.emplace_back();
    for (const auto& t : tokens) ++counts[fnv1a64(t) % dimension_];
    std::vector<double> v(counts.begin(), counts.end());
    l2_normalize(v);
    out.push_back(std::move(v));
  }
  return out;
}

FileEmbedder::FileEmbedder(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open embedding file '" + path + "'");
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = Json::parse(line);
      auto vec = j.at("vector").get<std::vector<double>>();
      if (dimension_ == 0) dimension_ = vec.size();
      if (vec.size() != dimension_) throw Error("inconsistent vector dimension");
      l2_normalize(vec);
      by_hash_[j.at("canon_hash").get<std::string>()] = std::move(vec);
    } catch (const std::exception& e) {
      throw ParseError(line_no, "embedding file '" + path + "': " + e.what());
    }
  }
}

FileEmbedder::FileEmbedder(std::unordered_map<std::string, std::vector<double>> by_hash, std::size_t dimension)
    : by_hash_(std::move(by_hash)), dimension_(dimension) {}

std::vector<std::vector<double>> FileEmbedder::embed(std::span<const std::string> canons) {
  std::vector<std::vector<double>> out;
  out.reserve(canons.size());
  for (const auto& canon : canons) {
    auto it = by_hash_.find(canon_hash(canon));
    if (it == by_hash_.end()) {
      throw Error("no precomputed embedding for canon '" + canon + "' (hash " + canon_hash(canon) + ")");
    }
    out.push_back(it->second);
  }
  return out;
}

void write_embedding_file(const std::string& path, std::span<const std::string> canons,
                          const std::vector<std::vector<double>>& vectors) {
  std::ofstream out(path, std::ios::app);
  if (!out) throw Error("cannot write embedding file '" + path + "'");
  for (std::size_t i = 0; i < canons.size(); ++i) {
    nlohmann::ordered_json j;
    j["canon_hash"] = canon_hash(canons[i]);
    j["vector"] = vectors.at(i);
    out << j.dump() << '\n';
  }
}

RemoteEmbedder::RemoteEmbedder(Transport transport, std::string model, std::size_t dimension, RetryPolicy retry)
    : transport_(std::move(transport)), model_(std::move(model)), dimension_(dimension), retry_(retry) {}

std::size_t RemoteEmbedder::requests() const {
  std::lock_guard lock(mu_);
  return requests_;
}

std::vector<std::vector<double>> RemoteEmbedder::embed(std::span<const std::string> canons) {
  if (canons.empty()) return {};
  Json request;
  request["model"] = model_;
  request["inputs"] = std::vector<std::string>(canons.begin(), canons.end());
  {
    std::lock_guard lock(mu_);
    ++requests_;
  }
  const std::string body = post_with_retry(transport_, request.dump(), retry_);
  std::vector<std::vector<double>> vectors;
  try {
    vectors = Json::parse(body).at("vectors").get<std::vector<std::vector<double>>>();
  } catch (const std::exception& e) {
    throw TransportError(std::string("malformed embedding response: ") + e.what());
  }
  if (vectors.size() != canons.size()) {
    throw TransportError("embedding response has " + std::to_string(vectors.size()) + " vectors for " +
                         std::to_string(canons.size()) + " inputs");
  }
  for (auto& v : vectors) {
    if (v.size() != dimension_) {
      throw TransportError("embedding response dimension " + std::to_string(v.size()) + ", expected " +
                           std::to_string(dimension_));
    }
    l2_normalize(v);
  }
  return vectors;
}

CachingEmbedder::CachingEmbedder(std::shared_ptr<EmbeddingProvider> inner, std::string path)
    : inner_(std::move(inner)), path_(std::move(path)) {
  if (path_.empty()) return;
  std::ifstream in(path_);
  std::string line;
  std::size_t line_no = 0;
  while (in && std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      auto j = Json::parse(line);
      auto vec = j.at("vector").get<std::vector<double>>();
      if (vec.size() != inner_->dimension()) throw Error("dimension mismatch");
      memo_[j.at("canon_hash").get<std::string>()] = std::move(vec);
    } catch (const std::exception& e) {
      throw ParseError(line_no, "embedding cache '" + path_ + "': " + e.what());
    }
  }
}

std::vector<std::vector<double>> CachingEmbedder::embed(std::span<const std::string> canons) {
  std::lock_guard lock(mu_);
  std::vector<std::string> missing;
  for (const auto& c : canons) {
    if (!memo_.count(canon_hash(c)) && std::find(missing.begin(), missing.end(), c) == missing.end()) {
      missing.push_back(c);
    }
  }
  if (!missing.empty()) {
    auto fresh = inner_->embed(missing);
    if (!path_.empty()) write_embedding_file(path_, missing, fresh);
    for (std::size_t i = 0; i < missing.size(); ++i) memo_.emplace(canon_hash(missing[i]), std::move(fresh[i]));
  }
  std::vector<std::vector<double>> out;
  out.reserve(canons.size());
  for (const auto& c : canons) out.push_back(memo_.at(canon_hash(c)));
  return out;
}

RemoteRelationOracle::RemoteRelationOracle(Transport transport, std::size_t budget_cap, RetryPolicy retry)
    : RelationOracle(budget_cap), transport_(std::move(transport)), retry_(retry) {}

OracleReply RemoteRelationOracle::do_label(std::span<const RelationQuery> queries) {
  Json request;
  request["pairs"] = Json::array();
  for (const auto& q : queries) request["pairs"].push_back(Json{{"a", q.a_text}, {"b", q.b_text}});
  std::string body;
  try {
    body = post_with_retry(transport_, request.dump(), retry_);
  } catch (const TransportError&) {
    return OracleReply{OracleReply::Status::failed, {}, 0};
  }
  OracleReply reply;
  Json codes;
  try {
    codes = Json::parse(body).at("codes");
    if (!codes.is_array()) throw Error("codes is not an array");
  } catch (const std::exception&) {
    return OracleReply{OracleReply::Status::failed, {}, 0};
  }
  reply.codes.reserve(queries.size());
  for (std::size_t i = 0; i < queries.size(); ++i) {
    std::optional<RelationCode> code;
    if (i < codes.size() && codes[i].is_string()) code = parse_relation_code(codes[i].get<std::string>());
    if (!code) ++reply.warnings;
    reply.codes.push_back(code.value_or(RelationCode::neutral));
  }
  return reply;
}

std::string env_or_empty(const char* name) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::string();
}

}  // namespace hypotopo
