#pragma once

#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace uncert {

/// Token plus its Euclidean distance from some query vector.
struct Neighbor {
    std::string token;
    double distance = 0.0;
};

struct DistanceStats {
    double min_nonself = 0.0;
    double max = 0.0;
    double median = 0.0;
    double stddev = 0.0;  // sample stddev over non-self distances; 0 when fewer than 2
};

/// Seed word plus its nearest expansion words, nearest first.
struct Lexicon {
    std::string seed;
    std::vector<std::string> expansion;

    std::size_t k() const { return expansion.size(); }
    std::vector<std::string> words() const;  // seed first
};

struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const { return std::hash<std::string_view>{}(s); }
};

/// Immutable token -> d-dimensional vector map. All queries are pure and
/// safe to run concurrently once construction finishes.
class EmbeddingTable {
public:
    explicit EmbeddingTable(std::size_t dimension);

    std::size_t dimension() const { return dim_; }
    std::size_t vocab_size() const { return tokens_.size(); }

    /// Throws on duplicate token, wrong width, or non-finite component.
    void insert(std::string token, std::span<const double> components);
    void reserve(std::size_t vocab);

    std::optional<std::size_t> find(std::string_view token) const;
    const std::string& token_at(std::size_t i) const { return tokens_[i]; }
    std::span<const double> vector_at(std::size_t i) const;

private:
    std::size_t dim_;
    std::vector<std::string> tokens_;
    std::vector<double> data_;  // row-major vocab x dim
    std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>> index_;
};

// Text vector format: one record per line, token first, then the components,
// all separated by single spaces. Dimension is inferred from the first line.
EmbeddingTable parse_embedding_file(std::istream& in);
EmbeddingTable load_embedding_file(const std::string& path);
void write_embedding_file(const EmbeddingTable& table, std::ostream& out);

/// Record-at-a-time parser shared by the in-memory and streaming paths.
/// Invokes fn(line_no, token, components) for every record; the scan stops
/// early when fn returns false.
void stream_embedding_file(std::istream& in,
                           const std::function<bool(std::size_t, std::string_view, std::span<const double>)>& fn);

double euclidean_distance(std::span<const double> a, std::span<const double> b);

/// Distances from the query to every other token, in table order.
std::vector<Neighbor> all_distances(const EmbeddingTable& table, std::string_view query);

/// Same result as all_distances but without materializing the vectors:
/// pass one finds the query vector, pass two streams distances. Memory is
/// O(vocab) tokens instead of O(vocab x dimension) components.
std::vector<Neighbor> all_distances_streaming(const std::string& path, std::string_view query);

// The k smallest distances, ascending; ties broken by token order.
std::vector<Neighbor> k_nearest(std::vector<Neighbor> pool, std::size_t k);

std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table, std::string_view query, std::size_t k);
std::vector<Neighbor> distance_profile(const EmbeddingTable& table, std::string_view query, std::size_t n);
DistanceStats distance_stats(const EmbeddingTable& table, std::string_view query);
DistanceStats distance_stats_from(std::vector<Neighbor> pool);

Lexicon build_lexicon(const EmbeddingTable& table, std::string_view seed, std::size_t k);

// Lexicon file: UTF-8, one token per line, seed on line 1.
void write_lexicon(const Lexicon& lexicon, std::ostream& out);
void save_lexicon(const Lexicon& lexicon, const std::string& path);
Lexicon read_lexicon(std::istream& in);
Lexicon load_lexicon(const std::string& path);

// Profile CSV: rank,token,distance with distance to 6 decimals.
void write_profile_csv(std::span<const Neighbor> profile, std::ostream& out);

}  // namespace uncert
