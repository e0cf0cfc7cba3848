#include "core/embeddings.hpp"

#include <bit>
#include <cmath>
#include <fstream>

#include "core/errors.hpp"
#include "core/text.hpp"

namespace hsd {

using nlohmann::json;

std::string to_string(Pooling p) {
    return p == Pooling::mean ? "mean" : "first-token";
}

Pooling pooling_from_string(const std::string& s) {
    if (s == "mean") return Pooling::mean;
    if (s == "first-token") return Pooling::first_token;
    throw ValidationError("unknown pooling '" + s + "' (expected mean or first-token)");
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
    if (a.size() != b.size()) {
        throw ValidationError("cosine: dimension mismatch (" + std::to_string(a.size()) + " vs " +
                              std::to_string(b.size()) + ")");
    }
    if (a.empty()) {
        throw ValidationError("cosine: empty vectors");
    }
    double dot = 0.0, na = 0.0, nb = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        dot += a[i] * b[i];
        na += a[i] * a[i];
        nb += b[i] * b[i];
    }
    if (na == 0.0 || nb == 0.0) {
        throw ValidationError("cosine: zero vector");
    }
    return dot / (std::sqrt(na) * std::sqrt(nb));
}

// ---------------------------------------------------------------------------
// TokenHashProvider

TokenHashProvider::TokenHashProvider(std::size_t dim, std::uint64_t seed, Pooling pooling)
    : dim_(dim), salt_(text::mix(seed ^ 0x746f6b656e686173ull)), pooling_(pooling) {
    if (dim_ == 0) throw ValidationError("token-hash provider: dim must be positive");
    name_ = "token-hash-d" + std::to_string(dim) + "-s" + std::to_string(seed) + "-" +
            to_string(pooling);
}

EmbeddingVector TokenHashProvider::token_vector(std::string_view token) const {
    EmbeddingVector v(dim_);
    std::uint64_t base = text::fnv1a(token) ^ salt_;
    for (std::size_t j = 0; j < dim_; ++j) {
        std::uint64_t u = text::mix(base + j);
        v[j] = static_cast<double>(u >> 11) * (1.0 / 4503599627370496.0) - 1.0;  // [-1, 1)
    }
    return v;
}

EmbeddingVector TokenHashProvider::embed(std::string_view text) {
    if (text.empty()) {
        throw ValidationError("embed: text must be non-empty");
    }
    auto tokens = text::tokenize(text);
    if (tokens.empty()) {
        // Whitespace-only text still gets a stable nonzero vector.
        return token_vector(text);
    }
    if (pooling_ == Pooling::first_token) {
        return token_vector(tokens.front());
    }
    EmbeddingVector acc(dim_, 0.0);
    for (auto t : tokens) {
        EmbeddingVector tv = token_vector(t);
        for (std::size_t j = 0; j < dim_; ++j) acc[j] += tv[j];
    }
    for (std::size_t j = 0; j < dim_; ++j) acc[j] /= static_cast<double>(tokens.size());
    return acc;
}

// ---------------------------------------------------------------------------
// EmbeddingCache

namespace {

void write_f64_le(std::ofstream& out, double d) {
    auto bits = std::bit_cast<std::uint64_t>(d);
    char buf[8];
    for (int i = 0; i < 8; ++i) buf[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
    out.write(buf, 8);
}

double read_f64_le(std::ifstream& in) {
    char buf[8];
    in.read(buf, 8);
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) {
        bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(buf[i])) << (8 * i);
    }
    return std::bit_cast<double>(bits);
}

}  // namespace

EmbeddingCache::EmbeddingCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    auto index_path = dir_ / "index.json";
    if (std::filesystem::exists(index_path)) {
        std::ifstream in(index_path);
        json idx;
        try {
            in >> idx;
        } catch (const json::exception& e) {
            throw ValidationError("embedding cache index corrupt: " + std::string(e.what()));
        }
        for (auto& [key, val] : idx.at("entries").items()) {
            index_[key] = {val.at("offset").get<std::uint64_t>(), val.at("dim").get<std::uint32_t>()};
        }
    }
}

EmbeddingCache::~EmbeddingCache() {
    try {
        flush();
    } catch (...) {
        // destructor must not throw; a failed flush loses cache entries only
    }
}

std::string EmbeddingCache::key_for(const std::string& provider, std::string_view text) {
    return provider + ":" + text::content_hash_hex(text);
}

std::optional<EmbeddingVector> EmbeddingCache::get(const std::string& provider,
                                                   std::string_view text) const {
    std::lock_guard<std::mutex> lock(mutex_);
    auto it = index_.find(key_for(provider, text));
    if (it == index_.end()) return std::nullopt;
    std::ifstream in(dir_ / "vectors.bin", std::ios::binary);
    if (!in) return std::nullopt;
    in.seekg(static_cast<std::streamoff>(it->second.offset));
    EmbeddingVector v(it->second.dim);
    for (auto& d : v) d = read_f64_le(in);
    if (!in) return std::nullopt;
    return v;
}

void EmbeddingCache::put(const std::string& provider, std::string_view text,
                         const EmbeddingVector& v) {
    std::lock_guard<std::mutex> lock(mutex_);
    std::string key = key_for(provider, text);
    if (index_.count(key)) return;
    std::ofstream out(dir_ / "vectors.bin", std::ios::binary | std::ios::app);
    if (!out) throw ValidationError("embedding cache: cannot append to vectors.bin");
    out.seekp(0, std::ios::end);
    auto offset = static_cast<std::uint64_t>(out.tellp());
    for (double d : v) write_f64_le(out, d);
    out.flush();
    if (!out) throw ValidationError("embedding cache: write failed");
    index_[key] = {offset, static_cast<std::uint32_t>(v.size())};
    dirty_ = true;
}

void EmbeddingCache::flush() {
    std::lock_guard<std::mutex> lock(mutex_);
    if (!dirty_) return;
    json idx;
    idx["version"] = 1;
    idx["entries"] = json::object();
    for (const auto& [key, e] : index_) {
        idx["entries"][key] = {{"offset", e.offset}, {"dim", e.dim}};
    }
    std::ofstream out(dir_ / "index.json", std::ios::binary | std::ios::trunc);
    out << idx.dump(2) << "\n";
    if (!out) throw ValidationError("embedding cache: cannot write index.json");
    dirty_ = false;
}

std::size_t EmbeddingCache::entries() const {
    std::lock_guard<std::mutex> lock(mutex_);
    return index_.size();
}

// ---------------------------------------------------------------------------
// CachingProvider

CachingProvider::CachingProvider(std::shared_ptr<EmbeddingCache> cache,
                                 std::unique_ptr<EmbeddingProvider> inner)
    : cache_(std::move(cache)), inner_(std::move(inner)) {
    if (!inner_) throw ValidationError("caching provider: inner provider required");
    name_ = inner_->name();
    dim_ = inner_->dim();
    pooling_ = inner_->pooling();
}

CachingProvider::CachingProvider(std::shared_ptr<EmbeddingCache> cache, std::string name,
                                 std::size_t dim, Pooling pooling)
    : cache_(std::move(cache)), name_(std::move(name)), dim_(dim), pooling_(pooling) {}

bool CachingProvider::reentrant() const {
    // The cache itself is mutex-guarded.
    return inner_ ? inner_->reentrant() : true;
}

EmbeddingVector CachingProvider::embed(std::string_view text) {
    if (auto hit = cache_->get(name_, text)) {
        return *hit;
    }
    if (!inner_) {
        throw TransportError("embedding cache miss for provider '" + name_ +
                             "' and no live backend configured");
    }
    EmbeddingVector v = inner_->embed(text);
    cache_->put(name_, text, v);
    return v;
}

// ---------------------------------------------------------------------------
// Factory

std::unique_ptr<EmbeddingProvider> make_http_embedding_provider(const json& cfg);  // backends_http.cpp

std::unique_ptr<EmbeddingProvider> make_embedding_provider(const json& cfg) {
    if (!cfg.is_object() || !cfg.contains("name")) {
        throw ValidationError("embedder config must be an object with a 'name'");
    }
    std::string name = cfg.at("name").get<std::string>();
    Pooling pooling = pooling_from_string(cfg.value("pooling", "mean"));

    std::unique_ptr<EmbeddingProvider> provider;
    if (name == "token-hash") {
        provider = std::make_unique<TokenHashProvider>(cfg.value("dim", std::size_t{64}),
                                                       cfg.value("seed", std::uint64_t{0}), pooling);
    } else if (name == "http") {
        provider = make_http_embedding_provider(cfg);
    } else if (name == "cache-only") {
        auto cache = std::make_shared<EmbeddingCache>(
            std::filesystem::path(cfg.at("cache_dir").get<std::string>()));
        return std::make_unique<CachingProvider>(cache, cfg.at("provider").get<std::string>(),
                                                 cfg.at("dim").get<std::size_t>(), pooling);
    } else {
        throw ValidationError("unknown embedding provider '" + name + "'");
    }
    if (cfg.contains("cache_dir")) {
        auto cache = std::make_shared<EmbeddingCache>(
            std::filesystem::path(cfg.at("cache_dir").get<std::string>()));
        provider = std::make_unique<CachingProvider>(cache, std::move(provider));
    }
    return provider;
}

}  // namespace hsd
