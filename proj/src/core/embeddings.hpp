#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace hsd {

using EmbeddingVector = std::vector<double>;

enum class Pooling { mean, first_token };

std::string to_string(Pooling p);
Pooling pooling_from_string(const std::string& s);

// Text-embedding provider. Implementations must be deterministic: the same
// text yields the same vector for the lifetime of one instance.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::string name() const = 0;
    virtual std::size_t dim() const = 0;
    virtual Pooling pooling() const = 0;
    // True if embed() may be called from several threads at once.
    virtual bool reentrant() const { return false; }
    virtual EmbeddingVector embed(std::string_view text) = 0;
};

// dot(a,b) / (|a| |b|), computed in double precision. Throws ValidationError
// on dimension mismatch or zero vectors.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

// Deterministic offline provider: each whitespace token hashes to a fixed
// pseudo-random vector; the sentence vector is the token mean (or the first
// token's vector). Texts sharing most tokens come out highly similar, which
// gives the augmentation gate realistic behavior without a model backend.
class TokenHashProvider : public EmbeddingProvider {
public:
    TokenHashProvider(std::size_t dim, std::uint64_t seed, Pooling pooling);

    std::string name() const override { return name_; }
    std::size_t dim() const override { return dim_; }
    Pooling pooling() const override { return pooling_; }
    bool reentrant() const override { return true; }
    EmbeddingVector embed(std::string_view text) override;

private:
    EmbeddingVector token_vector(std::string_view token) const;

    std::size_t dim_;
    std::uint64_t salt_;
    Pooling pooling_;
    std::string name_;
};

// Content-addressed vector store: (provider name, text hash) -> vector.
// Vectors live in vectors.bin as little-endian float64; index.json is the
// sidecar mapping keys to offsets. Reruns replay from here without any
// backend access.
class EmbeddingCache {
public:
    explicit EmbeddingCache(std::filesystem::path dir);
    ~EmbeddingCache();

    std::optional<EmbeddingVector> get(const std::string& provider, std::string_view text) const;
    void put(const std::string& provider, std::string_view text, const EmbeddingVector& v);
    void flush();
    std::size_t entries() const;

private:
    struct Entry {
        std::uint64_t offset;
        std::uint32_t dim;
    };
    static std::string key_for(const std::string& provider, std::string_view text);

    std::filesystem::path dir_;
    mutable std::mutex mutex_;
    std::unordered_map<std::string, Entry> index_;
    bool dirty_ = false;
};

// Wraps a provider with a cache. Without an inner provider it replays only:
// a miss is a TransportError (the vector would need backend access).
class CachingProvider : public EmbeddingProvider {
public:
    CachingProvider(std::shared_ptr<EmbeddingCache> cache, std::unique_ptr<EmbeddingProvider> inner);
    // Replay-only: identity and shape of the absent backend come from config.
    CachingProvider(std::shared_ptr<EmbeddingCache> cache, std::string name, std::size_t dim,
                    Pooling pooling);

    std::string name() const override { return name_; }
    std::size_t dim() const override { return dim_; }
    Pooling pooling() const override { return pooling_; }
    bool reentrant() const override;
    EmbeddingVector embed(std::string_view text) override;

private:
    std::shared_ptr<EmbeddingCache> cache_;
    std::unique_ptr<EmbeddingProvider> inner_;
    std::string name_;
    std::size_t dim_;
    Pooling pooling_;
};

// Builds a provider from its JSON config, e.g.
//   {"name": "token-hash", "dim": 64, "seed": 0, "pooling": "mean"}
//   {"name": "http", "base_url": "http://127.0.0.1:8090", "model": "<checkpoint>",
//    "dim": 768, "pooling": "mean"}
// Any config may add {"cache_dir": "..."} to wrap the provider in a cache;
// {"name": "cache-only", "cache_dir": ..., "provider": ..., "dim": ...} replays
// a previously recorded cache with no live backend.
std::unique_ptr<EmbeddingProvider> make_embedding_provider(const nlohmann::json& cfg);

}  // namespace hsd
