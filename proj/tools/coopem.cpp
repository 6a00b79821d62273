// coopem.cpp — Command-line front end: run, validate, list-presets

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "coopem/config.hpp"
#include "coopem/suite.hpp"

namespace {

using namespace coopem;

std::string slurp(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw InvalidArgument("cannot read config file " + path);
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

// Text of the preset or of the config file
std::string compose(const std::string& preset, const std::string& config) {
    std::string text;
    if (!preset.empty()) {
        const auto* p = cfg::find_preset(preset);
        if (!p) throw InvalidArgument("unknown preset '" + preset + "'");
        text = p->text;
    }
    if (!config.empty()) {
        if (!text.empty()) throw InvalidArgument("give either --preset or --config, not both");
        text = slurp(config);
    }
    if (text.empty()) throw InvalidArgument("one of --preset or --config is required");
    return text;
}

// Empty when the cache directory can be created and written
std::string cache_problem(const std::string& dir) {
    if (dir.empty()) return {};
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    if (ec) return "cannot create " + dir + ": " + ec.message();
    const auto probe = std::filesystem::path(dir) / ".coopem_probe";
    {
        std::ofstream os(probe);
        if (!os) return "directory " + dir + " is not writable";
    }
    std::filesystem::remove(probe, ec);
    return {};
}

std::string cache_from_env(std::string dir) {
    if (dir.empty())
        if (const char* env = std::getenv("COOPEM_CACHE_DIR")) dir = env;
    return dir;
}

int report(const cfg::ParseResult& r, std::ostream& os) {
    for (const auto& d : r.diagnostics) os << "error: " << d.str() << "\n";
    return r.ok() ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Two-emitter photon-coincidence simulator with phonon process tensors"};
    app.require_subcommand(1);

    std::string config, preset, out;
    std::size_t workers = 0;
    std::string cache_dir;

    auto* run = app.add_subcommand("run", "Run a figure suite or a custom scenario");
    run->add_option("--config", config, "Configuration file");
    run->add_option("--preset", preset, "Built-in figure preset");
    run->add_option("--out", out, "Output directory (overrides [output] directory)");
    run->add_option("--workers", workers, "Worker threads (default: hardware concurrency)");
    run->add_option("--cache-dir", cache_dir, "Kernel and process-tensor cache (env COOPEM_CACHE_DIR)");

    auto* val = app.add_subcommand("validate", "Parse and check a configuration without running it");
    val->add_option("--config", config, "Configuration file");
    val->add_option("--preset", preset, "Built-in figure preset");
    val->add_option("--cache-dir", cache_dir, "Cache directory to check (env COOPEM_CACHE_DIR)");

    auto* list = app.add_subcommand("list-presets", "List built-in presets");
    bool show = false;
    list->add_flag("--show", show, "Print the preset texts");

    CLI11_PARSE(app, argc, argv);

    try {
        if (list->parsed()) {
            for (const auto& p : cfg::presets()) {
                std::cout << p.name << "\t" << p.summary << "\n";
                if (show) std::cout << p.text << "\n";
            }
            return 0;
        }
        auto parsed = cfg::parse_config(compose(preset, config));
        cache_dir = cache_from_env(cache_dir);
        if (const auto p = cache_problem(cache_dir); !p.empty()) parsed.diagnostics.push_back({0, "cache-dir", p});
        if (val->parsed()) {
            const int rc = report(parsed, std::cout);
            if (rc == 0) std::cout << cfg::to_text(parsed.config);
            return rc;
        }
        if (report(parsed, std::cerr) != 0) return 2;
        cfg::ExperimentConfig c = parsed.config;
        if (!out.empty()) c.out_dir = out;
        suite::RunOptions opt;
        opt.workers = workers ? workers : std::max(1u, std::thread::hardware_concurrency());
        opt.cache_dir = cache_dir;
        const auto rep = suite::run_suite(c, opt);
        std::cout << rep.summary();
        return rep.ok() ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
