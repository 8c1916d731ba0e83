#include "uncert/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "uncert/util.hpp"
#include "uncert/version.hpp"

namespace fs = std::filesystem;

namespace uncert {

namespace {

std::vector<std::optional<MonthRange>> resolve_ranges(const std::optional<Month>& split,
                                                      const std::vector<MonthRange>& explicit_ranges,
                                                      const std::vector<MonthlySeries>& series) {
    std::vector<std::optional<MonthRange>> ranges;
    ranges.push_back(std::nullopt);  // full common sample first
    if (!explicit_ranges.empty()) {
        for (const auto& r : explicit_ranges) ranges.emplace_back(r);
        return ranges;
    }
    if (split) {
        Month start = series.front().first_month();
        Month end = series.front().last_month();
        for (const auto& s : series) {
            start = std::max(start, s.first_month());
            end = std::min(end, s.last_month());
        }
        ranges.emplace_back(MonthRange{start, Month::from_index(split->index() - 1)});
        ranges.emplace_back(MonthRange{*split, end});
    }
    return ranges;
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
}

}  // namespace

std::string sanitize_filename(std::string_view name) {
    std::string out;
    for (char c : name) {
        bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                  c == '_' || c == '.';
        out.push_back(ok ? c : '_');
    }
    return out;
}

int cmd_lexicon(const LexiconCmdOptions& opt, std::ostream& log) {
    try {
        std::string seed = opt.seed;
        if (opt.lowercase_seed)
            for (char& c : seed)
                if (c >= 'A' && c <= 'Z') c += 0x20;

        Lexicon lexicon;
        std::vector<Neighbor> pool;
        if (opt.stream) {
            pool = all_distances_streaming(opt.embeddings_path, seed);
            lexicon.seed = seed;
            if (opt.k > 0)
                for (auto& n : k_nearest(pool, opt.k)) lexicon.expansion.push_back(std::move(n.token));
            log << "scanned " << pool.size() + 1 << " vectors (streaming)\n";
        } else {
            EmbeddingTable table = load_embedding_file(opt.embeddings_path);
            log << "loaded " << table.vocab_size() << " vectors of dimension " << table.dimension() << "\n";
            lexicon = build_lexicon(table, seed, opt.k);
            if (opt.profile_n) pool = all_distances(table, seed);
        }

        save_lexicon(lexicon, opt.out_path);
        log << "lexicon (" << lexicon.words().size() << " words) -> " << opt.out_path << "\n";

        if (opt.profile_n) {
            auto profile = k_nearest(std::move(pool), *opt.profile_n);
            std::ofstream out(opt.profile_out, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + opt.profile_out);
            write_profile_csv(profile, out);
            log << "distance profile (" << *opt.profile_n << " rows) -> " << opt.profile_out << "\n";
        }
        return 0;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_index(const IndexCmdOptions& opt, std::ostream& log) {
    try {
        Lexicon lexicon = load_lexicon(opt.lexicon_path);
        LexiconMatcher matcher(lexicon);

        std::ifstream in(opt.articles_path, std::ios::binary);
        if (!in) throw std::runtime_error("cannot open articles: " + opt.articles_path);

        std::map<Date, DailyCount> by_date;
        ArticleStats stats = for_each_article(in, opt.mode, [&](const Article& a) {
            DailyCount& c = by_date[a.date];
            c.date = a.date;
            c.total += 1;
            if (matcher.matches(a.text)) c.matched += 1;
        });
        log << "processed " << stats.parsed << " articles";
        if (opt.mode == ParseMode::Lenient) log << " (skipped " << stats.skipped << " malformed lines)";
        log << "\n";

        std::vector<DailyCount> daily;
        daily.reserve(by_date.size());
        for (const auto& [date, count] : by_date) daily.push_back(count);

        std::vector<Month> omitted;
        MonthlySeries series = aggregate_monthly(daily, opt.monthly, &omitted);
        series.label = opt.label;
        for (const auto& m : omitted) log << "warning: no articles in " << m.str() << ", month omitted\n";
        if (opt.standardize) series = standardize(series);

        save_series_csv(series, opt.out_path);
        log << "monthly series (" << series.size() << " months) -> " << opt.out_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

int cmd_causality(const CausalityCmdOptions& opt, std::ostream& log) {
    try {
        if (opt.series.size() < 2) throw std::invalid_argument("causality: need at least 2 series");
        opt.ty.validate();

        std::vector<MonthlySeries> series;
        for (const auto& [label, path] : opt.series) series.push_back(load_series_csv(path, label));
        for (const auto& s : series) {
            auto gaps = missing_months(s);
            if (!gaps.empty()) {
                std::ostringstream msg;
                msg << "series '" << s.label << "' has gaps:";
                for (const auto& m : gaps) msg << ' ' << m.str();
                throw std::runtime_error(msg.str());
            }
        }

        // The first series is the index under study, paired with each of
        // the others.
        std::vector<std::pair<MonthlySeries, MonthlySeries>> pairs;
        for (std::size_t i = 1; i < series.size(); ++i) pairs.emplace_back(series[0], series[i]);

        auto ranges = resolve_ranges(opt.split, opt.explicit_ranges, series);
        CausalityTable table = causality_matrix(pairs, opt.ty, ranges);

        fs::create_directories(opt.out_dir);
        const std::string report_path = (fs::path(opt.out_dir) / "report.csv").string();
        {
            std::ofstream out(report_path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + report_path);
            write_report_csv(table, out);
        }
        const std::string summary_path = (fs::path(opt.out_dir) / "summary.txt").string();
        {
            std::ofstream out(summary_path, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write " + summary_path);
            write_summary(table, out);
        }
        for (const auto& cell : table.cells) {
            if (!cell.ok()) {
                log << "warning: " << cell.label_x << "/" << cell.label_y << " [" << cell.range_name
                    << "]: " << cell.error() << "\n";
                continue;
            }
            const GrangerReport& rep = cell.report();
            std::string name = "cusum_" + sanitize_filename(cell.label_x) + "_" +
                               sanitize_filename(cell.label_y) + "_" + rep.sample_start.str() + "_" +
                               rep.sample_end.str() + ".csv";
            std::ofstream out(fs::path(opt.out_dir) / name, std::ios::binary);
            if (!out) throw std::runtime_error("cannot write cusum csv " + name);
            write_fluctuation_csv(rep.stability, {rep.label_x, rep.label_y}, out);
        }
        log << "report -> " << report_path << "\n";
        log << "summary -> " << summary_path << "\n";
        return 0;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        return 1;
    }
}

namespace {

struct RawConfig {
    // section -> ordered (key, value) pairs
    std::vector<std::tuple<std::string, std::string, std::string, std::size_t>> entries;
};

RawConfig read_raw_config(std::istream& in) {
    RawConfig raw;
    std::string line;
    std::string section;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        std::string_view s = trim(line);
        if (s.empty() || s.front() == '#' || s.front() == ';') continue;
        if (s.front() == '[') {
            if (s.back() != ']')
                throw std::runtime_error("config line " + std::to_string(line_no) + ": unterminated section");
            section = std::string(trim(s.substr(1, s.size() - 2)));
            continue;
        }
        auto eq = s.find('=');
        if (eq == std::string_view::npos)
            throw std::runtime_error("config line " + std::to_string(line_no) + ": expected key = value");
        std::string key(trim(s.substr(0, eq)));
        std::string value(trim(s.substr(eq + 1)));
        if (key.empty() || value.empty())
            throw std::runtime_error("config line " + std::to_string(line_no) + ": empty key or value");
        raw.entries.emplace_back(section, key, value, line_no);
    }
    return raw;
}

[[noreturn]] void config_fail(std::size_t line_no, const std::string& what) {
    throw std::runtime_error("config line " + std::to_string(line_no) + ": " + what);
}

bool parse_bool(const std::string& v, bool& out) {
    if (v == "true" || v == "yes" || v == "1") {
        out = true;
        return true;
    }
    if (v == "false" || v == "no" || v == "0") {
        out = false;
        return true;
    }
    return false;
}

}  // namespace

PipelineConfig parse_pipeline_config(std::istream& in) {
    PipelineConfig cfg;
    RawConfig raw = read_raw_config(in);
    for (const auto& [section, key, value, line_no] : raw.entries) {
        auto need_int = [&](int lo, int hi) {
            int v = 0;
            if (!parse_int(value, v) || v < lo || v > hi) config_fail(line_no, "bad integer '" + value + "'");
            return v;
        };
        auto need_double = [&]() {
            double v = 0;
            if (!parse_double(value, v)) config_fail(line_no, "bad number '" + value + "'");
            return v;
        };
        auto need_bool = [&]() {
            bool v = false;
            if (!parse_bool(value, v)) config_fail(line_no, "bad boolean '" + value + "'");
            return v;
        };
        if (section == "lexicon") {
            if (key == "embeddings") cfg.lexicon.embeddings_path = value;
            else if (key == "seed") cfg.lexicon.seed = value;
            else if (key == "k") cfg.lexicon.k = static_cast<std::size_t>(need_int(0, 1000000));
            else if (key == "stream") cfg.lexicon.stream = need_bool();
            else if (key == "profile") cfg.lexicon.profile_n = static_cast<std::size_t>(need_int(1, 100000000));
            else config_fail(line_no, "unknown key '" + key + "' in [lexicon]");
        } else if (section == "index") {
            if (key == "articles") cfg.index.articles_path = value;
            else if (key == "label") cfg.index.label = value;
            else if (key == "mode") {
                if (value == "strict") cfg.index.mode = ParseMode::Strict;
                else if (value == "lenient") cfg.index.mode = ParseMode::Lenient;
                else config_fail(line_no, "mode must be strict or lenient");
            } else if (key == "monthly") {
                if (value == "count") cfg.index.monthly = MonthlyMode::CountWeighted;
                else if (value == "daily-mean") cfg.index.monthly = MonthlyMode::MeanOfDailyProportions;
                else config_fail(line_no, "monthly must be count or daily-mean");
            } else if (key == "standardize") cfg.index.standardize = need_bool();
            else config_fail(line_no, "unknown key '" + key + "' in [index]");
        } else if (section == "series") {
            cfg.series.emplace_back(key, value);
        } else if (section == "causality") {
            if (key == "criterion") {
                auto c = criterion_from_name(value);
                if (!c) config_fail(line_no, "criterion must be AIC, HQ, SC or FPE");
                cfg.ty.criterion = *c;
            } else if (key == "p_max") cfg.ty.p_max = need_int(1, 1000);
            else if (key == "alpha_diag") cfg.ty.alpha_diag = need_double();
            else if (key == "h_portmanteau") cfg.ty.h_portmanteau = need_int(1, 10000);
            else if (key == "h_bg") cfg.ty.h_bg = need_int(1, 10000);
            else if (key == "max_d") cfg.ty.max_d = need_int(1, 2);
            else if (key == "min_months") cfg.ty.min_months = need_int(12, 1000000);
            else if (key == "cusum_alpha") cfg.ty.cusum_alpha = need_double();
            else if (key == "adf") {
                if (value == "ct") cfg.ty.adf_spec = AdfSpec::ConstantTrend;
                else if (value == "c") cfg.ty.adf_spec = AdfSpec::Constant;
                else config_fail(line_no, "adf must be ct or c");
            } else if (key == "split") {
                auto m = Month::parse(value);
                if (!m) config_fail(line_no, "bad split month '" + value + "'");
                cfg.split = *m;
            } else if (key == "range") {
                auto parts = split(std::string_view(value), ':');
                if (parts.size() != 2) config_fail(line_no, "range must be YYYY-MM:YYYY-MM");
                auto from = Month::parse(trim(parts[0]));
                auto to = Month::parse(trim(parts[1]));
                if (!from || !to || *to < *from) config_fail(line_no, "bad range '" + value + "'");
                cfg.explicit_ranges.push_back({*from, *to});
            } else config_fail(line_no, "unknown key '" + key + "' in [causality]");
        } else if (section == "output") {
            if (key == "dir") cfg.out_dir = value;
            else config_fail(line_no, "unknown key '" + key + "' in [output]");
        } else {
            config_fail(line_no, "unknown section '" + section + "'");
        }
    }
    if (cfg.lexicon.embeddings_path.empty()) throw std::runtime_error("config: [lexicon] embeddings is required");
    if (cfg.lexicon.seed.empty()) throw std::runtime_error("config: [lexicon] seed is required");
    if (cfg.index.articles_path.empty()) throw std::runtime_error("config: [index] articles is required");
    if (cfg.series.empty()) throw std::runtime_error("config: [series] needs at least one imported series");
    if (cfg.out_dir.empty()) throw std::runtime_error("config: [output] dir is required");
    return cfg;
}

PipelineConfig load_pipeline_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config: " + path);
    return parse_pipeline_config(in);
}

void PipelineOverrides::apply(PipelineConfig& cfg) const {
    if (embeddings_path) cfg.lexicon.embeddings_path = *embeddings_path;
    if (seed) cfg.lexicon.seed = *seed;
    if (k) cfg.lexicon.k = *k;
    if (stream) cfg.lexicon.stream = *stream;
    if (profile_n) cfg.lexicon.profile_n = *profile_n;
    if (articles_path) cfg.index.articles_path = *articles_path;
    if (label) cfg.index.label = *label;
    if (mode) cfg.index.mode = *mode;
    if (monthly) cfg.index.monthly = *monthly;
    if (standardize) cfg.index.standardize = *standardize;
    if (criterion) cfg.ty.criterion = *criterion;
    if (p_max) cfg.ty.p_max = *p_max;
    if (alpha_diag) cfg.ty.alpha_diag = *alpha_diag;
    if (h_portmanteau) cfg.ty.h_portmanteau = *h_portmanteau;
    if (h_bg) cfg.ty.h_bg = *h_bg;
    if (max_d) cfg.ty.max_d = *max_d;
    if (min_months) cfg.ty.min_months = *min_months;
    if (cusum_alpha) cfg.ty.cusum_alpha = *cusum_alpha;
    if (adf_spec) cfg.ty.adf_spec = *adf_spec;
    if (split) cfg.split = *split;
    if (out_dir) cfg.out_dir = *out_dir;
}

void PipelineConfig::validate() const {
    ty.validate();
    auto require_file = [](const std::string& path, const std::string& what) {
        if (!fs::exists(path)) throw std::runtime_error("config validation: " + what + " not found: " + path);
    };
    require_file(lexicon.embeddings_path, "embedding file");
    require_file(index.articles_path, "article file");
    for (const auto& [label, path] : series) require_file(path, "series '" + label + "'");
}

int cmd_pipeline(const std::string& config_path, std::ostream& log, const PipelineOverrides& overrides) {
    nlohmann::ordered_json manifest;
    manifest["tool"] = "uncert";
    manifest["version"] = kVersion;
    {
        auto now = std::chrono::system_clock::now();
        std::time_t tt = std::chrono::system_clock::to_time_t(now);
        char buf[32];
        std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&tt));
        manifest["created_at"] = buf;
    }

    std::string out_dir;
    try {
        PipelineConfig cfg = load_pipeline_config(config_path);
        overrides.apply(cfg);
        cfg.validate();
        out_dir = cfg.out_dir;

        manifest["config"] = config_path;
        manifest["config_digest"] = "fnv1a64:" + fnv1a64_hex(read_text_file(config_path));
        nlohmann::ordered_json inputs;
        inputs[cfg.lexicon.embeddings_path] = "fnv1a64:" + fnv1a64_hex(read_text_file(cfg.lexicon.embeddings_path));
        inputs[cfg.index.articles_path] = "fnv1a64:" + fnv1a64_hex(read_text_file(cfg.index.articles_path));
        for (const auto& [label, path] : cfg.series) inputs[path] = "fnv1a64:" + fnv1a64_hex(read_text_file(path));
        manifest["inputs"] = inputs;

        fs::create_directories(out_dir);

        // Stage 1: lexicon.
        LexiconCmdOptions lex = cfg.lexicon;
        lex.out_path = (fs::path(out_dir) / "lexicon.txt").string();
        lex.profile_out = (fs::path(out_dir) / "profile.csv").string();
        log << "[1/3] lexicon\n";
        if (cmd_lexicon(lex, log) != 0) throw std::runtime_error("lexicon stage failed");

        // Stage 2: index.
        IndexCmdOptions idx = cfg.index;
        idx.lexicon_path = lex.out_path;
        idx.out_path = (fs::path(out_dir) / (sanitize_filename(idx.label) + ".csv")).string();
        log << "[2/3] index\n";
        if (cmd_index(idx, log) != 0) throw std::runtime_error("index stage failed");

        // Stage 3: causality.
        CausalityCmdOptions caus;
        caus.series.emplace_back(idx.label, idx.out_path);
        for (const auto& s : cfg.series) caus.series.push_back(s);
        caus.out_dir = out_dir;
        caus.ty = cfg.ty;
        caus.split = cfg.split;
        caus.explicit_ranges = cfg.explicit_ranges;
        log << "[3/3] causality\n";
        if (cmd_causality(caus, log) != 0) throw std::runtime_error("causality stage failed");

        nlohmann::ordered_json outputs = nlohmann::ordered_json::array();
        std::vector<std::string> names;
        for (const auto& entry : fs::directory_iterator(out_dir)) {
            if (entry.path().filename() == "manifest.json") continue;
            names.push_back(entry.path().filename().string());
        }
        std::sort(names.begin(), names.end());
        for (const auto& n : names) outputs.push_back(n);
        manifest["outputs"] = outputs;
        manifest["status"] = "ok";
        write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
        log << "manifest -> " << (fs::path(out_dir) / "manifest.json").string() << "\n";
        return 0;
    } catch (const std::exception& e) {
        log << "error: " << e.what() << "\n";
        manifest["status"] = "failed";
        manifest["error"] = e.what();
        if (!out_dir.empty() && fs::exists(out_dir))
            write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest.dump(2) + "\n");
        return 1;
    }
}

}  // namespace uncert
