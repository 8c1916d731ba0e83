#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "uncert/embedding.hpp"
#include "uncert/series.hpp"

namespace uncert {

struct Article {
    Date date;
    std::string text;
    std::string id;  // optional
};

struct DailyCount {
    Date date;
    std::int64_t matched = 0;
    std::int64_t total = 0;
};

enum class ParseMode { Strict, Lenient };

struct ArticleStats {
    std::size_t parsed = 0;
    std::size_t skipped = 0;  // lenient mode only
};

// Input: line-delimited JSON objects with "date" (YYYY-MM-DD) and "text"
// fields, optional "id". Strict mode fails on the first malformed line,
// naming it; lenient mode skips and counts.
ArticleStats for_each_article(std::istream& in, ParseMode mode, const std::function<void(const Article&)>& fn);
std::vector<Article> parse_articles(std::istream& in, ParseMode mode = ParseMode::Strict,
                                    ArticleStats* stats = nullptr);

/// Case-folded word tokens of `text`. Tokens split on any non-letter
/// codepoint; ASCII and the Latin-1 supplement are folded, other scripts
/// pass through unchanged.
std::vector<std::string> tokenize_folded(std::string_view text);

/// Folded word set of a lexicon, reusable across a corpus scan.
class LexiconMatcher {
public:
    explicit LexiconMatcher(const Lexicon& lexicon);
    /// True iff some whole word of `text` equals a lexicon word.
    bool matches(std::string_view text) const;

private:
    std::unordered_set<std::string> words_;
    std::size_t max_len_ = 0;
};

bool article_matches(const Article& article, const Lexicon& lexicon);

/// One entry per calendar date present, ascending; matched counts articles
/// containing at least one lexicon word. Invariant to article order.
std::vector<DailyCount> daily_counts(std::span<const Article> articles, const Lexicon& lexicon);

enum class MonthlyMode {
    CountWeighted,           // sum(matched) / sum(total) over the month
    MeanOfDailyProportions,  // mean over days with total > 0
};

/// Aggregates daily counts to the monthly proportion series. Months whose
/// denominator is zero are omitted and reported through `omitted`.
MonthlySeries aggregate_monthly(std::span<const DailyCount> daily, MonthlyMode mode = MonthlyMode::CountWeighted,
                                std::vector<Month>* omitted = nullptr);

}  // namespace uncert
