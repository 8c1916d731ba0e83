#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <sstream>

#include "test_support.hpp"
#include "uncert/pipeline.hpp"
#include "uncert/util.hpp"

using namespace uncert;
namespace fs = std::filesystem;

namespace {

std::string valid_config(const std::string& data_dir, const std::string& out_dir) {
    std::ostringstream cfg;
    cfg << "# pipeline fixture\n"
        << "[lexicon]\n"
        << "embeddings = " << data_dir << "/embeddings_small.txt\n"
        << "seed = uncertainty\n"
        << "k = 4\n"
        << "profile = 10\n"
        << "[index]\n"
        << "articles = " << data_dir << "/articles.jsonl\n"
        << "label = UNCERT\n"
        << "[series]\n"
        << "EPUNEWS = " << data_dir << "/epu_news.csv\n"
        << "EPUGEN = " << data_dir << "/epu_gen.csv\n"
        << "[causality]\n"
        << "p_max = 3\n"
        << "h_portmanteau = 6\n"
        << "h_bg = 3\n"
        << "min_months = 24\n"
        << "[output]\n"
        << "dir = " << out_dir << "\n";
    return cfg.str();
}

}  // namespace

TEST_SUITE("pipeline.config") {
    TEST_CASE("parses a full config") {
        std::istringstream in(valid_config("/data", "/out"));
        PipelineConfig cfg = parse_pipeline_config(in);
        CHECK(cfg.lexicon.seed == "uncertainty");
        CHECK(cfg.lexicon.k == 4);
        CHECK(cfg.lexicon.profile_n == 10);
        CHECK(cfg.index.label == "UNCERT");
        REQUIRE(cfg.series.size() == 2);
        CHECK(cfg.series[0].first == "EPUNEWS");
        CHECK(cfg.ty.p_max == 3);
        CHECK(cfg.ty.min_months == 24);
        CHECK(cfg.out_dir == "/out");
    }

    TEST_CASE("unknown keys name the line") {
        std::istringstream in("[lexicon]\nembeddings = x\nseedd = y\n");
        CHECK_THROWS_WITH_AS(parse_pipeline_config(in), doctest::Contains("line 3"), std::runtime_error);
    }

    TEST_CASE("missing required settings are reported") {
        std::istringstream in("[lexicon]\nseed = uncertainty\n");
        CHECK_THROWS_WITH_AS(parse_pipeline_config(in), doctest::Contains("embeddings"), std::runtime_error);
    }

    TEST_CASE("split and explicit ranges parse") {
        std::istringstream in(
            "[lexicon]\nembeddings = e\nseed = s\n[index]\narticles = a\n[series]\nA = a.csv\n"
            "[causality]\nsplit = 2008-01\nrange = 1999-01:2001-12\n[output]\ndir = o\n");
        PipelineConfig cfg = parse_pipeline_config(in);
        REQUIRE(cfg.split.has_value());
        CHECK(cfg.split->str() == "2008-01");
        REQUIRE(cfg.explicit_ranges.size() == 1);
        CHECK(cfg.explicit_ranges[0].from.str() == "1999-01");
    }

    TEST_CASE("validation fails before any work when inputs are missing") {
        testutil::TempDir tmp("uncert-pipecfg");
        std::string out_dir = tmp.file("out");
        std::string cfg_path = tmp.file("cfg.ini");
        std::string cfg = valid_config("/nonexistent-dir", out_dir);
        testutil::spit(cfg_path, cfg);
        std::ostringstream log;
        int status = cmd_pipeline(cfg_path, log);
        CHECK(status == 1);
        CHECK(log.str().find("not found") != std::string::npos);
        CHECK_FALSE(fs::exists(out_dir));  // no stage ran, nothing was created
    }
}

TEST_SUITE("pipeline.lexicon_cmd") {
    TEST_CASE("builds the engineered lexicon") {
        testutil::TempDir tmp("uncert-lexcmd");
        LexiconCmdOptions opt;
        opt.embeddings_path = testutil::fixture("embeddings_small.txt");
        opt.seed = "Uncertainty";  // CLI lowercases the seed
        opt.k = 4;
        opt.out_path = tmp.file("lexicon.txt");
        std::ostringstream log;
        REQUIRE(cmd_lexicon(opt, log) == 0);
        CHECK(testutil::slurp(opt.out_path) ==
              "uncertainty\nuncertainties\nuncertain\nunpredictability\nambiguity\n");
    }

    TEST_CASE("k=0 writes the seed alone") {
        testutil::TempDir tmp("uncert-lexcmd0");
        LexiconCmdOptions opt;
        opt.embeddings_path = testutil::fixture("embeddings_small.txt");
        opt.seed = "uncertainty";
        opt.k = 0;
        opt.out_path = tmp.file("lexicon.txt");
        std::ostringstream log;
        REQUIRE(cmd_lexicon(opt, log) == 0);
        CHECK(testutil::slurp(opt.out_path) == "uncertainty\n");
    }

    TEST_CASE("streaming mode produces the identical lexicon and profile") {
        testutil::TempDir tmp("uncert-lexstream");
        for (bool stream : {false, true}) {
            LexiconCmdOptions opt;
            opt.embeddings_path = testutil::fixture("embeddings_small.txt");
            opt.seed = "uncertainty";
            opt.k = 4;
            opt.stream = stream;
            opt.out_path = tmp.file(stream ? "lex_s.txt" : "lex_m.txt");
            opt.profile_n = 10;
            opt.profile_out = tmp.file(stream ? "prof_s.csv" : "prof_m.csv");
            std::ostringstream log;
            REQUIRE(cmd_lexicon(opt, log) == 0);
        }
        CHECK(testutil::slurp(tmp.file("lex_s.txt")) == testutil::slurp(tmp.file("lex_m.txt")));
        CHECK(testutil::slurp(tmp.file("prof_s.csv")) == testutil::slurp(tmp.file("prof_m.csv")));
    }

    TEST_CASE("profile distances are nondecreasing") {
        testutil::TempDir tmp("uncert-lexprof");
        LexiconCmdOptions opt;
        opt.embeddings_path = testutil::fixture("embeddings_small.txt");
        opt.seed = "uncertainty";
        opt.k = 4;
        opt.out_path = tmp.file("lexicon.txt");
        opt.profile_n = 12;
        opt.profile_out = tmp.file("profile.csv");
        std::ostringstream log;
        REQUIRE(cmd_lexicon(opt, log) == 0);
        std::istringstream in(testutil::slurp(opt.profile_out));
        std::string line;
        std::getline(in, line);
        CHECK(line == "rank,token,distance");
        double prev = -1.0;
        int rows = 0;
        while (std::getline(in, line)) {
            auto fields = split(line, ',');
            REQUIRE(fields.size() == 3);
            double d = 0.0;
            REQUIRE(parse_double(fields[2], d));
            CHECK(d >= prev);
            prev = d;
            ++rows;
        }
        CHECK(rows == 12);
    }

    TEST_CASE("missing embedding file exits nonzero with a message") {
        LexiconCmdOptions opt;
        opt.embeddings_path = "/no/such/file.txt";
        opt.seed = "uncertainty";
        opt.out_path = "/tmp/never-written.txt";
        std::ostringstream log;
        CHECK(cmd_lexicon(opt, log) == 1);
        CHECK(log.str().find("error:") != std::string::npos);
    }
}

TEST_SUITE("pipeline.index_cmd") {
    TEST_CASE("three-month corpus matches hand-computed proportions") {
        testutil::TempDir tmp("uncert-idxcmd");
        // 1996-01: 2 of 4 match; 1996-02: 1 of 3; 1996-03: 0 of 2.
        std::string corpus =
            R"({"date":"1996-01-03","text":"Uncertainty hit markets."})" "\n"
            R"({"date":"1996-01-03","text":"calm day"})" "\n"
            R"({"date":"1996-01-17","text":"ambiguity lingers"})" "\n"
            R"({"date":"1996-01-20","text":"steady growth"})" "\n"
            R"({"date":"1996-02-02","text":"more uncertainties ahead"})" "\n"
            R"({"date":"1996-02-10","text":"clear skies"})" "\n"
            R"({"date":"1996-02-20","text":"it is certain"})" "\n"
            R"({"date":"1996-03-05","text":"quiet"})" "\n"
            R"({"date":"1996-03-06","text":"still quiet"})" "\n";
        testutil::spit(tmp.file("articles.jsonl"), corpus);
        testutil::spit(tmp.file("lexicon.txt"), "uncertainty\nuncertainties\nuncertain\nambiguity\n");

        IndexCmdOptions opt;
        opt.articles_path = tmp.file("articles.jsonl");
        opt.lexicon_path = tmp.file("lexicon.txt");
        opt.out_path = tmp.file("uncert.csv");
        std::ostringstream log;
        REQUIRE(cmd_index(opt, log) == 0);
        CHECK(log.str().find("processed 9 articles") != std::string::npos);
        CHECK(testutil::slurp(opt.out_path) ==
              "month,value\n1996-01,0.50000000\n1996-02,0.33333333\n1996-03,0.00000000\n");
    }

    TEST_CASE("empty corpus is an error") {
        testutil::TempDir tmp("uncert-idxempty");
        testutil::spit(tmp.file("articles.jsonl"), "");
        testutil::spit(tmp.file("lexicon.txt"), "uncertainty\n");
        IndexCmdOptions opt;
        opt.articles_path = tmp.file("articles.jsonl");
        opt.lexicon_path = tmp.file("lexicon.txt");
        opt.out_path = tmp.file("uncert.csv");
        std::ostringstream log;
        CHECK(cmd_index(opt, log) == 1);
        CHECK(log.str().find("error:") != std::string::npos);
    }

    TEST_CASE("strict mode aborts on the malformed line, lenient skips it") {
        testutil::TempDir tmp("uncert-idxmode");
        std::string corpus =
            R"({"date":"1996-01-03","text":"uncertainty"})" "\n"
            "garbage\n"
            R"({"date":"1996-01-04","text":"fine"})" "\n";
        testutil::spit(tmp.file("articles.jsonl"), corpus);
        testutil::spit(tmp.file("lexicon.txt"), "uncertainty\n");
        IndexCmdOptions opt;
        opt.articles_path = tmp.file("articles.jsonl");
        opt.lexicon_path = tmp.file("lexicon.txt");
        opt.out_path = tmp.file("uncert.csv");
        std::ostringstream strict_log;
        CHECK(cmd_index(opt, strict_log) == 1);
        CHECK(strict_log.str().find("line 2") != std::string::npos);
        opt.mode = ParseMode::Lenient;
        std::ostringstream lenient_log;
        CHECK(cmd_index(opt, lenient_log) == 0);
        CHECK(lenient_log.str().find("skipped 1") != std::string::npos);
    }

    TEST_CASE("standardize flag writes a z-scored series") {
        testutil::TempDir tmp("uncert-idxstd");
        std::ostringstream corpus;
        for (int m = 1; m <= 6; ++m) {
            for (int i = 0; i < m; ++i) {
                char line[128];
                std::snprintf(line, sizeof(line),
                              "{\"date\":\"1996-%02d-%02d\",\"text\":\"%s\"}\n", m, i + 1,
                              i == 0 ? "uncertainty" : "calm");
                corpus << line;
            }
        }
        testutil::spit(tmp.file("articles.jsonl"), corpus.str());
        testutil::spit(tmp.file("lexicon.txt"), "uncertainty\n");
        IndexCmdOptions opt;
        opt.articles_path = tmp.file("articles.jsonl");
        opt.lexicon_path = tmp.file("lexicon.txt");
        opt.out_path = tmp.file("uncert.csv");
        opt.standardize = true;
        std::ostringstream log;
        REQUIRE(cmd_index(opt, log) == 0);
        MonthlySeries z = load_series_csv(opt.out_path, "z");
        double mean = 0.0;
        for (const auto& p : z.points) mean += p.second;
        mean /= static_cast<double>(z.size());
        CHECK(std::abs(mean) < 1e-8);  // CSV rounds to 8 decimals
    }
}

TEST_SUITE("pipeline.causality_cmd") {
    TEST_CASE("flags the planted direction and writes all artifacts") {
        testutil::TempDir tmp("uncert-causcmd");
        testutil::Rng rng(901);
        std::vector<double> x(200), y(200);
        double xs = 0, ys = 0;
        for (int i = 0; i < 200; ++i) {
            double xn = 0.5 * xs + rng.normal();
            double yn = 0.5 * ys + 0.4 * xs + rng.normal();
            xs = xn;
            ys = yn;
            x[i] = xn;
            y[i] = yn;
        }
        save_series_csv(testutil::to_series(x, "X"), tmp.file("x.csv"));
        save_series_csv(testutil::to_series(y, "Y"), tmp.file("y.csv"));

        CausalityCmdOptions opt;
        opt.series = {{"X", tmp.file("x.csv")}, {"Y", tmp.file("y.csv")}};
        opt.out_dir = tmp.file("out");
        std::ostringstream log;
        REQUIRE(cmd_causality(opt, log) == 0);
        REQUIRE(fs::exists(tmp.file("out/report.csv")));
        REQUIRE(fs::exists(tmp.file("out/summary.txt")));

        std::istringstream report(testutil::slurp(tmp.file("out/report.csv")));
        std::string header, xy_row, yx_row;
        std::getline(report, header);
        std::getline(report, xy_row);
        std::getline(report, yx_row);
        auto xy = split(xy_row, ',');
        REQUIRE(xy.size() == 11);
        CHECK(xy[0] == "X");
        CHECK(xy[1] == "Y");
        double p_xy = 1.0, p_yx = 1.0;
        REQUIRE(parse_double(xy[8], p_xy));
        CHECK(p_xy < 0.05);
        auto yx = split(yx_row, ',');
        REQUIRE(parse_double(yx[8], p_yx));
        CHECK(p_yx > 0.05);

        bool has_cusum = false;
        for (const auto& entry : fs::directory_iterator(tmp.file("out")))
            if (entry.path().filename().string().rfind("cusum_", 0) == 0) has_cusum = true;
        CHECK(has_cusum);
    }

    TEST_CASE("a missing month aborts naming it") {
        testutil::TempDir tmp("uncert-causgap");
        testutil::Rng rng(902);
        auto x = testutil::to_series(testutil::ar1(rng, 100, 0.4), "X");
        auto y = testutil::to_series(testutil::ar1(rng, 100, 0.4), "Y");
        y.points.erase(y.points.begin() + 50);  // 2000-03 vanishes
        save_series_csv(x, tmp.file("x.csv"));
        save_series_csv(y, tmp.file("y.csv"));
        CausalityCmdOptions opt;
        opt.series = {{"X", tmp.file("x.csv")}, {"Y", tmp.file("y.csv")}};
        opt.out_dir = tmp.file("out");
        opt.ty.min_months = 48;
        std::ostringstream log;
        CHECK(cmd_causality(opt, log) == 1);
        CHECK(log.str().find("2000-03") != std::string::npos);
    }

    TEST_CASE("split produces the full sample plus two subsamples") {
        testutil::TempDir tmp("uncert-caussplit");
        testutil::Rng rng(903);
        std::vector<double> x(360), y(360);
        double xs = 0, ys = 0;
        for (int i = 0; i < 360; ++i) {
            double xn = 0.5 * xs + rng.normal();
            double yn = 0.5 * ys + 0.4 * xs + rng.normal();
            xs = xn;
            ys = yn;
            x[i] = xn;
            y[i] = yn;
        }
        save_series_csv(testutil::to_series(x, "X"), tmp.file("x.csv"));
        save_series_csv(testutil::to_series(y, "Y"), tmp.file("y.csv"));
        CausalityCmdOptions opt;
        opt.series = {{"X", tmp.file("x.csv")}, {"Y", tmp.file("y.csv")}};
        opt.out_dir = tmp.file("out");
        opt.split = Month{2011, 1};
        std::ostringstream log;
        REQUIRE(cmd_causality(opt, log) == 0);
        std::string report = testutil::slurp(tmp.file("out/report.csv"));
        CHECK(std::count(report.begin(), report.end(), '\n') == 7);  // header + 3 ranges x 2 rows
        CHECK(report.find("1996-01,2010-12") != std::string::npos);
        CHECK(report.find("2011-01,2025-12") != std::string::npos);
        std::string summary = testutil::slurp(tmp.file("out/summary.txt"));
        CHECK(summary.find("2011-01..2025-12") != std::string::npos);
    }

    TEST_CASE("fewer than two series is an error") {
        CausalityCmdOptions opt;
        opt.series = {{"X", "x.csv"}};
        opt.out_dir = "out";
        std::ostringstream log;
        CHECK(cmd_causality(opt, log) == 1);
    }
}

TEST_SUITE("pipeline.end_to_end") {
    TEST_CASE("pipeline equals the composition of the three commands") {
        testutil::TempDir tmp("uncert-compose");
        std::string data_dir = testutil::test_data_dir();
        std::string cfg_path = tmp.file("cfg.ini");
        testutil::spit(cfg_path, valid_config(data_dir, tmp.file("pipe")));
        std::ostringstream log;
        REQUIRE(cmd_pipeline(cfg_path, log) == 0);
        REQUIRE(fs::exists(tmp.file("pipe/manifest.json")));

        // manual composition
        std::string manual = tmp.file("manual");
        fs::create_directories(manual);
        LexiconCmdOptions lex;
        lex.embeddings_path = data_dir + "/embeddings_small.txt";
        lex.seed = "uncertainty";
        lex.k = 4;
        lex.out_path = manual + "/lexicon.txt";
        lex.profile_n = 10;
        lex.profile_out = manual + "/profile.csv";
        REQUIRE(cmd_lexicon(lex, log) == 0);
        IndexCmdOptions idx;
        idx.articles_path = data_dir + "/articles.jsonl";
        idx.lexicon_path = lex.out_path;
        idx.out_path = manual + "/UNCERT.csv";
        REQUIRE(cmd_index(idx, log) == 0);
        CausalityCmdOptions caus;
        caus.series = {{"UNCERT", idx.out_path},
                       {"EPUNEWS", data_dir + "/epu_news.csv"},
                       {"EPUGEN", data_dir + "/epu_gen.csv"}};
        caus.out_dir = manual;
        caus.ty.p_max = 3;
        caus.ty.h_portmanteau = 6;
        caus.ty.h_bg = 3;
        caus.ty.min_months = 24;
        REQUIRE(cmd_causality(caus, log) == 0);

        CHECK(testutil::slurp(tmp.file("pipe/lexicon.txt")) == testutil::slurp(manual + "/lexicon.txt"));
        CHECK(testutil::slurp(tmp.file("pipe/UNCERT.csv")) == testutil::slurp(manual + "/UNCERT.csv"));
        CHECK(testutil::slurp(tmp.file("pipe/report.csv")) == testutil::slurp(manual + "/report.csv"));
        CHECK(testutil::slurp(tmp.file("pipe/summary.txt")) == testutil::slurp(manual + "/summary.txt"));
    }

    TEST_CASE("command-line overrides win over the config file") {
        testutil::TempDir tmp("uncert-pipeovr");
        std::string data_dir = testutil::test_data_dir();
        std::string cfg_path = tmp.file("cfg.ini");
        testutil::spit(cfg_path, valid_config(data_dir, tmp.file("ignored")));
        PipelineOverrides ov;
        ov.out_dir = tmp.file("chosen");
        ov.label = "NEWSUNC";
        ov.k = 2;
        std::ostringstream log;
        REQUIRE(cmd_pipeline(cfg_path, log, ov) == 0);
        CHECK_FALSE(fs::exists(tmp.file("ignored")));
        CHECK(fs::exists(tmp.file("chosen/NEWSUNC.csv")));
        CHECK(testutil::slurp(tmp.file("chosen/lexicon.txt")) == "uncertainty\nuncertainties\nuncertain\n");
    }

    TEST_CASE("failing stage aborts and the manifest records it") {
        testutil::TempDir tmp("uncert-pipefail");
        std::string data_dir = testutil::test_data_dir();
        // articles file exists but the seed is not in the embedding file
        std::ostringstream cfg;
        cfg << "[lexicon]\nembeddings = " << data_dir << "/embeddings_small.txt\nseed = nosuchword\nk = 4\n"
            << "[index]\narticles = " << data_dir << "/articles.jsonl\n"
            << "[series]\nEPUNEWS = " << data_dir << "/epu_news.csv\n"
            << "[causality]\np_max = 3\nh_portmanteau = 6\nh_bg = 3\nmin_months = 24\n"
            << "[output]\ndir = " << tmp.file("out") << "\n";
        std::string cfg_path = tmp.file("cfg.ini");
        testutil::spit(cfg_path, cfg.str());
        std::ostringstream log;
        CHECK(cmd_pipeline(cfg_path, log) == 1);
        std::string manifest = testutil::slurp(tmp.file("out/manifest.json"));
        CHECK(manifest.find("\"status\": \"failed\"") != std::string::npos);
        CHECK(manifest.find("lexicon stage failed") != std::string::npos);
        CHECK_FALSE(fs::exists(tmp.file("out/report.csv")));
    }
}
