#pragma once

// Sub-command orchestration shared by the meandense executable and the
// integration tests. Each sub-command writes one CSV with a fixed column
// order plus a JSON run manifest into the output directory.

#include <chrono>
#include <cstdint>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "boolean.hpp"
#include "config.hpp"
#include "estimate.hpp"
#include "exact.hpp"
#include "minkowski.hpp"

namespace meandense {

inline constexpr const char* kVersion = "1.0.0";

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"exact", "estimate", "study", "minkowski", "simulate", "oracle"};
    return names;
}

struct RunOptions {
    unsigned threads = 1;
    std::filesystem::path out_dir = "out";
};

struct RunResult {
    std::vector<std::filesystem::path> files;
    nlohmann::json summary = nlohmann::json::object();
};

namespace detail {

inline std::ofstream open_output(const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot open output file " + path.string());
    return out;
}

inline void require_grid(const ScenarioConfig& cfg, const std::string& sub) {
    if (cfg.x_grid.empty()) throw ConfigError(sub + ": x_grid (list, lattice or cells) is required");
}

inline void run_exact(const ScenarioConfig& cfg, const RunOptions& opt, RunResult& res) {
    require_grid(cfg, "exact");
    const auto& sc = cfg.scenario;
    const DensityField field = exact_density_field(sc.intensity, sc.marks, cfg.x_grid, cfg.mark_draws, cfg.seed,
                                                   opt.threads, cfg.quadrature_order);
    const auto path = opt.out_dir / "exact.csv";
    auto out = open_output(path);
    field.write_csv(out);
    res.files.push_back(path);
    res.summary["points"] = field.grid.size();
}

inline double estimate_radius(const ScenarioConfig& cfg, std::uint64_t n) {
    if (cfg.fixed_r) return *cfg.fixed_r;
    const BandwidthSchedule s = cfg.schedule.value_or(BandwidthSchedule::default_for(cfg.d - cfg.n));
    return s.radius(n);
}

inline void run_estimate(const ScenarioConfig& cfg, const RunOptions& opt, RunResult& res) {
    require_grid(cfg, "estimate");
    if (!cfg.N) throw ConfigError("estimate: N is required");
    const std::uint64_t n = *cfg.N;
    const double radius = estimate_radius(cfg, n);
    if (!(radius > 0.0 && radius < 2.0)) throw ConfigError("estimate: bandwidth radius must lie in (0, 2)");
    std::vector<Query> queries;
    for (const auto& x : cfg.x_grid) queries.push_back({x, radius});
    const auto tallies = tally_replicates(cfg.scenario, queries, n, cfg.seed, opt.threads);

    const auto path = opt.out_dir / "estimate.csv";
    auto out = open_output(path);
    std::vector<std::string> header;
    for (int k = 1; k <= cfg.d; ++k) header.push_back("x" + std::to_string(k));
    header.insert(header.end(), {"N", "R_N", "hits", "lambda_hat", "se", "count_estimate", "count_se"});
    CsvWriter csv(out, header);
    const int codim = cfg.d - cfg.n;
    for (std::size_t i = 0; i < queries.size(); ++i) {
        const EstimateReport rep = density_from_hits(queries[i].x, tallies[i].hits, n, radius, codim);
        const Estimate ce = count_from_tally(tallies[i], n, radius, codim);
        for (int k = 0; k < cfg.d; ++k) csv << queries[i].x[k];
        csv << n << radius << tallies[i].hits << rep.lambda_hat << rep.standard_error << ce.value
            << ce.standard_error;
        csv.end_row();
    }
    res.files.push_back(path);
    res.summary["R_N"] = radius;
}

inline void run_study(const ScenarioConfig& cfg, const RunOptions& opt, RunResult& res) {
    require_grid(cfg, "study");
    if (cfg.n_grid.empty()) throw ConfigError("study: N_grid is required");
    StudyOptions so;
    so.n_grid = cfg.n_grid;
    so.replications = cfg.replications;
    so.mark_draws = cfg.mark_draws;
    so.seed = cfg.seed;
    so.threads = opt.threads;
    so.cell_volumes = cfg.cell_volumes;
    const BandwidthSchedule s = cfg.schedule.value_or(BandwidthSchedule::default_for(cfg.d - cfg.n));
    const StudyTable table = convergence_study(cfg.scenario, cfg.x_grid, s, so);
    const auto path = opt.out_dir / "study.csv";
    auto out = open_output(path);
    table.write_csv(out);
    res.files.push_back(path);
    if (!table.region.empty()) {
        const auto rpath = opt.out_dir / "study_region.csv";
        auto rout = open_output(rpath);
        table.write_region_csv(rout);
        res.files.push_back(rpath);
    }
    res.summary["beta"] = s.beta;
    res.summary["c0"] = s.c0;
}

inline void run_minkowski_cmd(const ScenarioConfig& cfg, const RunOptions& opt, RunResult& res) {
    if (!cfg.scenario.marks.is_deterministic())
        throw ConfigError("minkowski: needs a deterministic set (marks.kind = deterministic)");
    if (cfg.minkowski_r_grid.size() < 3) throw ConfigError("minkowski: needs at least three radii");
    const Grain& set = cfg.scenario.marks.grain();
    const MinkowskiRun run = run_minkowski(set, cfg.scenario.intensity, cfg.minkowski_r_grid,
                                           cfg.minkowski_mc_points, cfg.seed, opt.threads);
    const ContentLimit limit = content_limit(run);
    const RegularityCertificate cert;
    const IntensityField unit = IntensityField::constant(cfg.d, 1.0);
    const bool unit_f = cfg.scenario.intensity.is_constant() && cfg.scenario.intensity.level() == 1.0;
    const MinkowskiRun unit_run =
        unit_f ? run
               : run_minkowski(set, unit, cfg.minkowski_r_grid, cfg.minkowski_mc_points, derive_seed(cfg.seed, 1),
                               opt.threads);
    const BoundCheck bound = bound_check(unit_run, cert);

    const auto path = opt.out_dir / "minkowski.csv";
    auto out = open_output(path);
    write_minkowski_csv(out, run, limit, bound.bound);
    res.files.push_back(path);
    res.summary["limit_estimate"] = limit.limit_estimate;
    res.summary["limit_se"] = limit.limit_se;
    res.summary["target"] = limit.target;
    res.summary["within_band"] = limit.within_band;
    res.summary["bound"] = bound.bound;
    res.summary["bound_holds"] = bound.holds;
    res.summary["bound_worst_margin"] = bound.worst_margin;
}

inline void run_simulate(const ScenarioConfig& cfg, const RunOptions& opt, RunResult& res) {
    if (!cfg.window) throw ConfigError("simulate: window.lo and window.hi are required");
    const double r_max = cfg.fixed_r.value_or(0.0);
    RandomStream rng = derive_stream(cfg.seed, 0);
    const BooleanRealization real = simulate(cfg.scenario.intensity, cfg.scenario.marks, *cfg.window, r_max, rng);
    const auto path = opt.out_dir / "simulate.csv";
    auto out = open_output(path);
    real.write_csv(out);
    res.files.push_back(path);
    res.summary["grains"] = real.placed_grains().size();
    res.summary["guard_margin"] = real.guard_margin();
}

inline void run_oracle(const ScenarioConfig& cfg, const RunOptions& opt, RunResult& res) {
    require_grid(cfg, "oracle");
    const auto& rs = cfg.oracle_r_grid;
    const std::size_t cells = cfg.x_grid.size() * rs.size();
    std::vector<CapacityEstimate> est(cells);
    parallel_for(cells, opt.threads, [&](std::size_t i) {
        RandomStream rng = derive_stream(cfg.seed, i);
        est[i] = capacity_probability(cfg.scenario.intensity, cfg.scenario.marks, cfg.x_grid[i / rs.size()],
                                      rs[i % rs.size()], cfg.oracle_mc_points, rng);
    });
    const auto path = opt.out_dir / "oracle.csv";
    auto out = open_output(path);
    std::vector<std::string> header;
    for (int k = 1; k <= cfg.d; ++k) header.push_back("x" + std::to_string(k));
    header.insert(header.end(), {"r", "probability", "probability_se", "mass", "mass_se", "ratio", "ratio_se"});
    CsvWriter csv(out, header);
    const int codim = cfg.d - cfg.n;
    for (std::size_t i = 0; i < cells; ++i) {
        const Point& x = cfg.x_grid[i / rs.size()];
        const double r = rs[i % rs.size()];
        const double norm = ball_normalizer(codim, r);
        for (int k = 0; k < cfg.d; ++k) csv << x[k];
        csv << r << est[i].probability.value << est[i].probability.standard_error << est[i].mass.value
            << est[i].mass.standard_error << est[i].probability.value / norm
            << est[i].probability.standard_error / norm;
        csv.end_row();
    }
    res.files.push_back(path);
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

} // namespace detail

/// Runs one sub-command and writes its CSV plus manifest_<sub>.json.
inline RunResult run(const std::string& sub, const ScenarioConfig& cfg, const RunOptions& opt) {
    std::filesystem::create_directories(opt.out_dir);
    RunResult res;
    if (sub == "exact") detail::run_exact(cfg, opt, res);
    else if (sub == "estimate") detail::run_estimate(cfg, opt, res);
    else if (sub == "study") detail::run_study(cfg, opt, res);
    else if (sub == "minkowski") detail::run_minkowski_cmd(cfg, opt, res);
    else if (sub == "simulate") detail::run_simulate(cfg, opt, res);
    else if (sub == "oracle") detail::run_oracle(cfg, opt, res);
    else throw ConfigError("unknown sub-command '" + sub + "'");

    nlohmann::json manifest;
    manifest["subcommand"] = sub;
    manifest["version"] = kVersion;
    manifest["seed"] = cfg.seed;
    manifest["threads"] = opt.threads;
    manifest["timestamp"] = detail::utc_timestamp();
    manifest["config"] = cfg.entries;
    manifest["summary"] = res.summary;
    nlohmann::json files = nlohmann::json::array();
    for (const auto& f : res.files) files.push_back(f.filename().string());
    manifest["outputs"] = files;
    const auto mpath = opt.out_dir / ("manifest_" + sub + ".json");
    auto out = detail::open_output(mpath);
    out << manifest.dump(2) << '\n';
    res.files.push_back(mpath);
    return res;
}

} // namespace meandense
