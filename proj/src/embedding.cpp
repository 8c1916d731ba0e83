#include "uncert/embedding.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <unordered_set>

#include "uncert/util.hpp"

namespace uncert {

std::vector<std::string> Lexicon::words() const {
    std::vector<std::string> out;
    out.reserve(1 + expansion.size());
    out.push_back(seed);
    out.insert(out.end(), expansion.begin(), expansion.end());
    return out;
}

EmbeddingTable::EmbeddingTable(std::size_t dimension) : dim_(dimension) {
    if (dimension == 0) throw std::invalid_argument("EmbeddingTable: dimension must be positive");
}

void EmbeddingTable::reserve(std::size_t vocab) {
    tokens_.reserve(vocab);
    data_.reserve(vocab * dim_);
    index_.reserve(vocab);
}

void EmbeddingTable::insert(std::string token, std::span<const double> components) {
    if (token.empty()) throw std::invalid_argument("EmbeddingTable: empty token");
    if (components.size() != dim_)
        throw std::invalid_argument("EmbeddingTable: token '" + token + "' has " +
                                    std::to_string(components.size()) + " components, expected " +
                                    std::to_string(dim_));
    for (double v : components)
        if (!std::isfinite(v))
            throw std::invalid_argument("EmbeddingTable: non-finite component for token '" + token + "'");
    auto [it, inserted] = index_.try_emplace(token, tokens_.size());
    if (!inserted) throw std::invalid_argument("EmbeddingTable: duplicate token '" + token + "'");
    tokens_.push_back(std::move(token));
    data_.insert(data_.end(), components.begin(), components.end());
}

std::optional<std::size_t> EmbeddingTable::find(std::string_view token) const {
    auto it = index_.find(token);
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::span<const double> EmbeddingTable::vector_at(std::size_t i) const {
    return {data_.data() + i * dim_, dim_};
}

namespace {

[[noreturn]] void parse_fail(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("embedding parse error at line " + std::to_string(line_no) + ": " + what);
}

// Parses "token SP v1 SP v2 ... SP vd" into `components`; dimension is taken
// from components.size() when nonzero, otherwise inferred from the line.
std::string_view parse_record(std::size_t line_no, std::string_view line, std::vector<double>& components,
                              bool infer_dim) {
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    std::size_t sp = line.find(' ');
    if (sp == std::string_view::npos) parse_fail(line_no, "no vector components");
    std::string_view token = line.substr(0, sp);
    if (token.empty()) parse_fail(line_no, "empty token");

    std::size_t expected = components.size();
    components.clear();
    const char* p = line.data() + sp + 1;
    const char* end = line.data() + line.size();
    while (p < end) {
        double v = 0.0;
        auto [next, ec] = std::from_chars(p, end, v);
        if (ec != std::errc{} || (next < end && *next != ' '))
            parse_fail(line_no, "non-numeric component '" +
                                    std::string(p, std::find(p, end, ' ')) + "'");
        if (!std::isfinite(v)) parse_fail(line_no, "non-finite component");
        components.push_back(v);
        p = next < end ? next + 1 : end;
        if (next < end && next + 1 == end) parse_fail(line_no, "trailing separator");
    }
    if (components.empty()) parse_fail(line_no, "no vector components");
    if (!infer_dim && components.size() != expected)
        parse_fail(line_no, "expected " + std::to_string(expected) + " components, got " +
                              std::to_string(components.size()));
    return token;
}

}  // namespace

void stream_embedding_file(std::istream& in,
                           const std::function<bool(std::size_t, std::string_view, std::span<const double>)>& fn) {
    std::string line;
    std::vector<double> components;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view token = parse_record(line_no, line, components, line_no == 1);
        if (!fn(line_no, token, components)) return;
    }
    if (line_no == 0) throw std::runtime_error("embedding parse error: empty input");
}

EmbeddingTable parse_embedding_file(std::istream& in) {
    std::optional<EmbeddingTable> table;
    stream_embedding_file(in, [&](std::size_t line_no, std::string_view token, std::span<const double> vec) {
        if (!table) table.emplace(vec.size());
        try {
            table->insert(std::string(token), vec);
        } catch (const std::invalid_argument& e) {
            parse_fail(line_no, e.what());
        }
        return true;
    });
    return std::move(*table);
}

EmbeddingTable load_embedding_file(const std::string& path) {
    // Pre-count records so the component store is allocated once; the data
    // for a full pretrained vocabulary runs to gigabytes and vector growth
    // would briefly double that.
    std::size_t lines = 0;
    {
        std::ifstream counter(path, std::ios::binary);
        if (!counter) throw std::runtime_error("cannot open embedding file: " + path);
        char buf[1 << 16];
        bool ends_with_newline = true;
        while (counter.read(buf, sizeof(buf)) || counter.gcount() > 0) {
            std::streamsize got = counter.gcount();
            lines += static_cast<std::size_t>(std::count(buf, buf + got, '\n'));
            ends_with_newline = buf[got - 1] == '\n';
        }
        if (!ends_with_newline) ++lines;
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);
    std::optional<EmbeddingTable> table;
    stream_embedding_file(in, [&](std::size_t line_no, std::string_view token, std::span<const double> vec) {
        if (!table) {
            table.emplace(vec.size());
            table->reserve(lines);
        }
        try {
            table->insert(std::string(token), vec);
        } catch (const std::invalid_argument& e) {
            parse_fail(line_no, e.what());
        }
        return true;
    });
    return std::move(*table);
}

void write_embedding_file(const EmbeddingTable& table, std::ostream& out) {
    for (std::size_t i = 0; i < table.vocab_size(); ++i) {
        out << table.token_at(i);
        for (double v : table.vector_at(i)) out << ' ' << format_full(v);
        out << '\n';
    }
}

double euclidean_distance(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("euclidean_distance: dimension mismatch (" + std::to_string(a.size()) +
                                    " vs " + std::to_string(b.size()) + ")");
    double ss = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double d = a[i] - b[i];
        ss += d * d;
    }
    return std::sqrt(ss);
}

std::vector<Neighbor> all_distances(const EmbeddingTable& table, std::string_view query) {
    auto idx = table.find(query);
    if (!idx) throw std::runtime_error("unknown token '" + std::string(query) + "'");
    std::span<const double> q = table.vector_at(*idx);
    std::vector<Neighbor> out;
    out.reserve(table.vocab_size() - 1);
    for (std::size_t i = 0; i < table.vocab_size(); ++i) {
        if (i == *idx) continue;
        out.push_back({table.token_at(i), euclidean_distance(q, table.vector_at(i))});
    }
    return out;
}

std::vector<Neighbor> all_distances_streaming(const std::string& path, std::string_view query) {
    std::vector<double> query_vec;
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open embedding file: " + path);
        stream_embedding_file(in, [&](std::size_t, std::string_view token, std::span<const double> vec) {
            if (token != query) return true;
            query_vec.assign(vec.begin(), vec.end());
            return false;
        });
        if (query_vec.empty()) throw std::runtime_error("unknown token '" + std::string(query) + "'");
    }
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open embedding file: " + path);
    std::vector<Neighbor> out;
    std::unordered_set<std::string> seen;
    stream_embedding_file(in, [&](std::size_t line_no, std::string_view token, std::span<const double> vec) {
        if (!seen.insert(std::string(token)).second)
            parse_fail(line_no, "duplicate token '" + std::string(token) + "'");
        if (token != query) out.push_back({std::string(token), euclidean_distance(query_vec, vec)});
        return true;
    });
    return out;
}

std::vector<Neighbor> k_nearest(std::vector<Neighbor> pool, std::size_t k) {
    if (k > pool.size())
        throw std::invalid_argument("k_nearest: k=" + std::to_string(k) + " exceeds candidate count " +
                                    std::to_string(pool.size()));
    auto closer = [](const Neighbor& a, const Neighbor& b) {
        if (a.distance != b.distance) return a.distance < b.distance;
        return a.token < b.token;
    };
    std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(), closer);
    pool.resize(k);
    return pool;
}

std::vector<Neighbor> nearest_neighbors(const EmbeddingTable& table, std::string_view query, std::size_t k) {
    if (k >= table.vocab_size())
        throw std::invalid_argument("nearest_neighbors: k must be smaller than the vocabulary");
    return k_nearest(all_distances(table, query), k);
}

std::vector<Neighbor> distance_profile(const EmbeddingTable& table, std::string_view query, std::size_t n) {
    if (n == 0) throw std::invalid_argument("distance_profile: n must be positive");
    return nearest_neighbors(table, query, n);
}

DistanceStats distance_stats_from(std::vector<Neighbor> pool) {
    if (pool.empty()) throw std::invalid_argument("distance_stats: need at least one other token");
    std::vector<double> d;
    d.reserve(pool.size());
    for (const auto& n : pool) d.push_back(n.distance);
    std::sort(d.begin(), d.end());

    DistanceStats stats;
    stats.min_nonself = d.front();
    stats.max = d.back();
    std::size_t n = d.size();
    stats.median = n % 2 == 1 ? d[n / 2] : 0.5 * (d[n / 2 - 1] + d[n / 2]);
    if (n >= 2) {
        double mean = 0.0;
        for (double v : d) mean += v;
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (double v : d) ss += (v - mean) * (v - mean);
        stats.stddev = std::sqrt(ss / static_cast<double>(n - 1));
    }
    return stats;
}

DistanceStats distance_stats(const EmbeddingTable& table, std::string_view query) {
    if (table.vocab_size() < 2) throw std::invalid_argument("distance_stats: vocabulary too small");
    return distance_stats_from(all_distances(table, query));
}

Lexicon build_lexicon(const EmbeddingTable& table, std::string_view seed, std::size_t k) {
    if (!table.find(seed)) throw std::runtime_error("unknown token '" + std::string(seed) + "'");
    Lexicon lex;
    lex.seed = std::string(seed);
    if (k > 0)
        for (auto& n : nearest_neighbors(table, seed, k)) lex.expansion.push_back(std::move(n.token));
    return lex;
}

void write_lexicon(const Lexicon& lexicon, std::ostream& out) {
    out << lexicon.seed << '\n';
    for (const auto& w : lexicon.expansion) out << w << '\n';
}

void save_lexicon(const Lexicon& lexicon, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write lexicon: " + path);
    write_lexicon(lexicon, out);
}

Lexicon read_lexicon(std::istream& in) {
    Lexicon lex;
    std::string line;
    std::unordered_set<std::string> seen;
    while (std::getline(in, line)) {
        std::string token(trim(line));
        if (token.empty()) continue;
        if (!seen.insert(token).second) throw std::runtime_error("lexicon: duplicate word '" + token + "'");
        if (lex.seed.empty())
            lex.seed = token;
        else
            lex.expansion.push_back(token);
    }
    if (lex.seed.empty()) throw std::runtime_error("lexicon: empty file");
    return lex;
}

Lexicon load_lexicon(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open lexicon: " + path);
    return read_lexicon(in);
}

void write_profile_csv(std::span<const Neighbor> profile, std::ostream& out) {
    out << "rank,token,distance\n";
    for (std::size_t i = 0; i < profile.size(); ++i)
        out << i + 1 << ',' << profile[i].token << ',' << format_fixed(profile[i].distance, 6) << '\n';
}

}  // namespace uncert
