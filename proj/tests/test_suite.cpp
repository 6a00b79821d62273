// test_suite.cpp — Figure job lists, worker pool, end-to-end suite runs

#include <gtest/gtest.h>

#include <atomic>
#include <filesystem>
#include <fstream>
#include <set>

#include "coopem/suite.hpp"

using namespace coopem;
namespace fs = std::filesystem;

namespace {

std::string body_of(const fs::path& p) {
    std::ifstream is(p);
    std::string line, out;
    while (std::getline(is, line))
        if (line.empty() || line[0] != '#') out += line + "\n";
    return out;
}

}  // namespace

TEST(Jobs, PresetsProduceExpectedFamilies) {
    auto names = [](const std::string& preset) {
        std::set<std::string> s;
        for (const auto& j : suite::build_jobs(cfg::load_config(cfg::find_preset(preset)->text))) s.insert(j.name);
        return s;
    };
    EXPECT_EQ(names("fig2a"), (std::set<std::string>{"markov", "superohmic", "ohmic"}));
    EXPECT_EQ(names("fig4").size(), 9u);
    EXPECT_TRUE(names("fig4").count("ppd199_r10"));
    EXPECT_EQ(names("fig2c").size(), 3u);
    EXPECT_EQ(names("markov-check").size(), 12u);
    for (const auto& j : suite::build_jobs(cfg::load_config(cfg::find_preset("fig4")->text))) {
        EXPECT_EQ(j.scenario.geometry, dyn::Geometry::Superradiant);
        EXPECT_NO_THROW(j.scenario.validate());
    }
    for (const auto& j : suite::build_jobs(cfg::load_config(cfg::find_preset("fig6")->text)))
        EXPECT_DOUBLE_EQ(j.scenario.grids.max_spacing, 20.0);
}

TEST(Pool, EveryIndexRunsOnce) {
    std::vector<std::atomic<int>> hits(57);
    suite::parallel_for(hits.size(), 4, [&](std::size_t i) { ++hits[i]; });
    for (const auto& h : hits) EXPECT_EQ(h.load(), 1);
}

TEST(Suite, MarkovCheckEndToEndAndReproducible) {
    auto c = cfg::load_config(cfg::find_preset("markov-check")->text);
    const fs::path dir = fs::temp_directory_path() / "coopem_suite_test";
    fs::remove_all(dir);
    c.out_dir = (dir / "a").string();
    suite::RunOptions opt;
    opt.workers = 3;
    opt.quiet = true;
    const auto ra = suite::run_suite(c, opt);
    ASSERT_TRUE(ra.ok()) << ra.summary();
    std::ifstream cmp(ra.directory / "comparison.csv");
    std::string line;
    std::getline(cmp, line);
    EXPECT_EQ(line, "case,max_abs_diff");
    std::size_t rows = 0;
    while (std::getline(cmp, line)) {
        ++rows;
        EXPECT_LT(std::stod(line.substr(line.find(',') + 1)), 1e-8) << line;
    }
    EXPECT_EQ(rows, 6u);

    c.out_dir = (dir / "b").string();
    opt.workers = 1;
    const auto rb = suite::run_suite(c, opt);
    for (const auto& e : fs::directory_iterator(ra.directory)) {
        if (e.path().extension() != ".csv") continue;
        EXPECT_EQ(body_of(e.path()), body_of(rb.directory / e.path().filename())) << e.path();
    }
    fs::remove_all(dir);
}

TEST(Suite, CustomPpdRunFitsBackItsDephasingRate) {
    const auto c = cfg::load_config(R"([scenario]
geometry = MeasurementInduced
gamma = 1/1.76 ns
gamma_p = 1/1.76 ns
gamma_d = 1/3.9 ns
[numerics]
dt = 1 ps
[grids]
coarse_points = 150
max_spacing = 20 ps
[postprocess]
fwhm = 240 ps
[fit]
window_min = 0 ps
[output]
directory = )" + (fs::temp_directory_path() / "coopem_custom_test").string() + "\n");
    suite::RunOptions opt;
    opt.quiet = true;
    const auto r = suite::run_suite(c, opt);
    ASSERT_TRUE(r.ok()) << r.summary();
    std::ifstream is(r.directory / "g2_fit_ppd.txt");
    std::string line;
    double gd = 0.0;
    while (std::getline(is, line))
        if (line.rfind("gamma_d=", 0) == 0) gd = std::stod(line.substr(8));
    EXPECT_NEAR(gd * 3900.0, 1.0, 1e-6);
    EXPECT_TRUE(fs::exists(r.directory / "g2_irf.csv"));
    const auto t = dyn::csv::read_two_column(r.directory / "g2_irf.csv");
    bool has_fwhm = false;
    for (const auto& [k, v] : t.header) has_fwhm |= k == "irf_fwhm_ps";
    EXPECT_TRUE(has_fwhm);
    fs::remove_all(c.out_dir);
}
