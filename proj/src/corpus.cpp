#include "uncert/corpus.hpp"

#include <algorithm>
#include <istream>
#include <map>
#include <stdexcept>

#include <json.hpp>

namespace uncert {

namespace {

[[noreturn]] void line_fail(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("article parse error at line " + std::to_string(line_no) + ": " + what);
}

bool parse_article_line(std::string_view line, Article& out, std::string& err) {
    nlohmann::json j = nlohmann::json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
        err = "invalid JSON";
        return false;
    }
    if (!j.is_object()) {
        err = "record is not an object";
        return false;
    }
    auto date_it = j.find("date");
    if (date_it == j.end() || !date_it->is_string()) {
        err = "missing or non-string 'date'";
        return false;
    }
    auto date = Date::parse(date_it->get_ref<const std::string&>());
    if (!date) {
        err = "invalid date '" + date_it->get<std::string>() + "'";
        return false;
    }
    auto text_it = j.find("text");
    if (text_it == j.end() || !text_it->is_string()) {
        err = "missing or non-string 'text'";
        return false;
    }
    out.date = *date;
    out.text = text_it->get<std::string>();
    out.id.clear();
    if (auto id_it = j.find("id"); id_it != j.end() && id_it->is_string()) out.id = id_it->get<std::string>();
    return true;
}

}  // namespace

ArticleStats for_each_article(std::istream& in, ParseMode mode, const std::function<void(const Article&)>& fn) {
    ArticleStats stats;
    std::string line;
    std::size_t line_no = 0;
    Article article;
    std::string err;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            if (mode == ParseMode::Strict) line_fail(line_no, "empty line");
            ++stats.skipped;
            continue;
        }
        if (!parse_article_line(line, article, err)) {
            if (mode == ParseMode::Strict) line_fail(line_no, err);
            ++stats.skipped;
            continue;
        }
        ++stats.parsed;
        fn(article);
    }
    return stats;
}

std::vector<Article> parse_articles(std::istream& in, ParseMode mode, ArticleStats* stats) {
    std::vector<Article> out;
    ArticleStats s = for_each_article(in, mode, [&](const Article& a) { out.push_back(a); });
    if (stats) *stats = s;
    return out;
}

namespace {

// Letter classification and folding over decoded codepoints. ASCII letters
// fold a-z; U+00C0..U+00DE fold to U+00E0..U+00FE (multiplication and
// division signs excepted); codepoints past Latin-1 count as letters except
// the general punctuation block, which news text uses as separators.
bool classify_codepoint(uint32_t cp, uint32_t& folded) {
    folded = cp;
    if (cp < 0x80) {
        if (cp >= 'A' && cp <= 'Z') {
            folded = cp + 0x20;
            return true;
        }
        return cp >= 'a' && cp <= 'z';
    }
    if (cp < 0xC0) return false;  // Latin-1 punctuation and symbols
    if (cp <= 0xFF) {
        if (cp == 0xD7 || cp == 0xF7) return false;
        if (cp <= 0xDE) folded = cp + 0x20;
        return true;
    }
    if (cp >= 0x2000 && cp <= 0x206F) return false;  // dashes, curly quotes, ellipsis
    return true;
}

void append_utf8(std::string& out, uint32_t cp) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

// Decodes the codepoint at `i`, advancing it. Malformed sequences yield
// 0xFFFD and advance one byte, which classifies as a separator here.
uint32_t next_codepoint(std::string_view s, std::size_t& i) {
    unsigned char c = static_cast<unsigned char>(s[i]);
    if (c < 0x80) {
        ++i;
        return c;
    }
    int extra;
    uint32_t cp;
    if ((c & 0xE0) == 0xC0) {
        extra = 1;
        cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
        extra = 2;
        cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
        extra = 3;
        cp = c & 0x07;
    } else {
        ++i;
        return 0xFFFD;
    }
    if (i + extra >= s.size()) {
        ++i;
        return 0xFFFD;
    }
    for (int k = 1; k <= extra; ++k) {
        unsigned char cc = static_cast<unsigned char>(s[i + k]);
        if ((cc & 0xC0) != 0x80) {
            ++i;
            return 0xFFFD;
        }
        cp = (cp << 6) | (cc & 0x3F);
    }
    i += extra + 1;
    return cp;
}

// Streams folded tokens of `text` into fn; stops early when fn returns false.
void scan_tokens(std::string_view text, const std::function<bool(const std::string&)>& fn) {
    std::string token;
    std::size_t i = 0;
    while (i < text.size()) {
        uint32_t cp = next_codepoint(text, i);
        uint32_t folded;
        if (cp != 0xFFFD && classify_codepoint(cp, folded)) {
            append_utf8(token, folded);
            continue;
        }
        if (!token.empty()) {
            if (!fn(token)) return;
            token.clear();
        }
    }
    if (!token.empty()) fn(token);
}

}  // namespace

std::vector<std::string> tokenize_folded(std::string_view text) {
    std::vector<std::string> out;
    scan_tokens(text, [&](const std::string& t) {
        out.push_back(t);
        return true;
    });
    return out;
}

LexiconMatcher::LexiconMatcher(const Lexicon& lexicon) {
    for (const auto& word : lexicon.words()) {
        // Lexicon words are folded with the same rules as article text so
        // matching stays case-insensitive regardless of how the lexicon
        // file was written.
        for (const auto& t : tokenize_folded(word)) {
            words_.insert(t);
            max_len_ = std::max(max_len_, t.size());
        }
    }
}

bool LexiconMatcher::matches(std::string_view text) const {
    bool hit = false;
    scan_tokens(text, [&](const std::string& t) {
        if (t.size() <= max_len_ && words_.count(t)) {
            hit = true;
            return false;
        }
        return true;
    });
    return hit;
}

bool article_matches(const Article& article, const Lexicon& lexicon) {
    return LexiconMatcher(lexicon).matches(article.text);
}

std::vector<DailyCount> daily_counts(std::span<const Article> articles, const Lexicon& lexicon) {
    LexiconMatcher matcher(lexicon);
    std::map<Date, DailyCount> by_date;
    for (const auto& a : articles) {
        DailyCount& c = by_date[a.date];
        c.date = a.date;
        c.total += 1;
        if (matcher.matches(a.text)) c.matched += 1;
    }
    std::vector<DailyCount> out;
    out.reserve(by_date.size());
    for (auto& [date, count] : by_date) out.push_back(count);
    return out;
}

MonthlySeries aggregate_monthly(std::span<const DailyCount> daily, MonthlyMode mode, std::vector<Month>* omitted) {
    if (daily.empty()) throw std::runtime_error("aggregate_monthly: no daily counts");
    struct Bucket {
        std::int64_t matched = 0;
        std::int64_t total = 0;
        double prop_sum = 0.0;
        std::int64_t days_with_articles = 0;
    };
    std::map<Month, Bucket> by_month;
    for (const auto& d : daily) {
        if (d.matched < 0 || d.total < 0 || d.matched > d.total)
            throw std::runtime_error("aggregate_monthly: invalid daily count on " + d.date.str());
        Bucket& b = by_month[d.date.month_key()];
        b.matched += d.matched;
        b.total += d.total;
        if (d.total > 0) {
            b.prop_sum += static_cast<double>(d.matched) / static_cast<double>(d.total);
            b.days_with_articles += 1;
        }
    }
    MonthlySeries out;
    for (const auto& [month, b] : by_month) {
        if (b.total == 0) {
            if (omitted) omitted->push_back(month);
            continue;
        }
        double value = mode == MonthlyMode::CountWeighted
                           ? static_cast<double>(b.matched) / static_cast<double>(b.total)
                           : b.prop_sum / static_cast<double>(b.days_with_articles);
        out.points.emplace_back(month, value);
    }
    return out;
}

}  // namespace uncert
