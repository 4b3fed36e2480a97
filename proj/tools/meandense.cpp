#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include <meandense/cli.hpp>

namespace {

namespace md = meandense;

void write_error_record(const std::filesystem::path& dir, const std::string& sub, const std::string& kind,
                        const std::string& message, int status, const std::vector<std::string>& violations = {}) {
    nlohmann::json rec;
    rec["subcommand"] = sub;
    rec["error"] = kind;
    rec["message"] = message;
    rec["exit_code"] = status;
    rec["violations"] = violations;
    rec["version"] = md::kVersion;
    std::error_code ec;
    std::filesystem::create_directories(dir, ec);
    std::ofstream out(dir / "error.json", std::ios::trunc);
    if (out) out << rec.dump(2) << '\n';
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Mean densities of inhomogeneous Boolean models with lower-dimensional grains"};
    app.set_version_flag("--version", md::kVersion);
    app.require_subcommand(1, 1);

    std::string config_path;
    std::optional<std::uint64_t> seed;
    unsigned threads = 0;
    std::string out_dir;
    const std::map<std::string, std::string> about{
        {"exact", "mean density on the x grid by quadrature over marks"},
        {"estimate", "hit-probability and count estimators at the x grid"},
        {"study", "bias, variance and MSE over the N grid"},
        {"minkowski", "Minkowski ratios, small-r limit and uniform bound"},
        {"simulate", "one realization restricted to the window"},
        {"oracle", "capacity probabilities over the oracle radii"}};
    for (const auto& name : md::subcommands()) {
        CLI::App* sub = app.add_subcommand(name, about.at(name));
        sub->add_option("--config", config_path, "scenario file")->required();
        sub->add_option("--seed", seed, "overrides the config seed");
        sub->add_option("--threads", threads, "worker threads (default: $MEANDENSE_THREADS, then all cores)");
        sub->add_option("--out", out_dir, "output directory (default: the config's output key)");
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int status = app.exit(e);
        return status == 0 ? 0 : 1;
    }

    const std::string name = app.get_subcommands().front()->get_name();
    std::filesystem::path dir = out_dir.empty() ? std::filesystem::path("out") : std::filesystem::path(out_dir);
    try {
        md::ScenarioConfig cfg = md::load_config(config_path);
        if (out_dir.empty()) dir = cfg.output;
        if (seed) cfg.seed = *seed;
        md::RunOptions opt;
        opt.threads = md::resolve_threads(threads);
        opt.out_dir = dir;
        const md::RunResult res = md::run(name, cfg, opt);
        for (const auto& f : res.files) std::cout << f.string() << '\n';
        return 0;
    } catch (const md::ValidationError& e) {
        std::cerr << "meandense " << name << ": " << e.what() << '\n';
        write_error_record(dir, name, "validation", e.what(), 1, e.violations());
        return 1;
    } catch (const md::ConfigError& e) {
        std::cerr << "meandense " << name << ": " << e.what() << '\n';
        write_error_record(dir, name, "validation", e.what(), 1);
        return 1;
    } catch (const md::QueryError& e) {
        std::cerr << "meandense " << name << ": " << e.what() << '\n';
        write_error_record(dir, name, "query", e.what(), 1);
        return 1;
    } catch (const md::NumericError& e) {
        std::cerr << "meandense " << name << ": " << e.what() << '\n';
        write_error_record(dir, name, "numeric", e.what(), 2);
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "meandense " << name << ": " << e.what() << '\n';
        write_error_record(dir, name, "internal", e.what(), 2);
        return 2;
    }
}
