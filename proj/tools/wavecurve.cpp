// SPDX-License-Identifier: Apache-2.0
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// wavecurve <table1|fig2|fig3|validate> --config FILE --seed U64 --out DIR
//           [--paper-scale] [--trials N]
//
// Exit codes: 0 success, 1 configuration or argument error, 2 validation failure.

#include "wavecurve/experiments.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

using namespace wavecurve;

namespace {

void write_timing(const std::string& dir, const std::string& cmd, double seconds)
{
    std::filesystem::create_directories(dir);
    std::ofstream f(std::filesystem::path(dir) / ("timing_" + cmd + ".json"));
    f << "{\n  \"command\": \"" << cmd << "\",\n  \"wall_seconds\": " << std::setprecision(6) << seconds << "\n}\n";
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Wavefront-curvature channel estimation experiments"};
    app.require_subcommand(1);

    std::string config_path;
    std::optional<uint64_t> seed;
    std::string out_dir;
    bool paper_scale = false;
    std::optional<int> trials;

    for (const char* name : {"table1", "fig2", "fig3", "validate"}) {
        auto* sub = app.add_subcommand(name);
        sub->add_option("--config", config_path, "TOML configuration")->required()->check(CLI::ExistingFile);
        sub->add_option("--seed", seed, "master seed, overrides the config");
        sub->add_option("--out", out_dir, "output directory")->required();
        sub->add_flag("--paper-scale", paper_scale, "full grid sizes and trial counts");
        sub->add_option("--trials", trials, "Monte Carlo trials (fig3)")->check(CLI::PositiveNumber);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 1;
    }
    const std::string cmd = app.get_subcommands().front()->get_name();

    ExperimentConfig cfg;
    try {
        cfg = load_config(config_path);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    }
    if (seed)
        cfg.master_seed = *seed;

    RunOptions opt;
    opt.out_dir = out_dir;
    opt.paper_scale = paper_scale;
    opt.trials = trials;
    opt.log = &std::cerr;

    const auto t0 = std::chrono::steady_clock::now();
    int rc = 0;
    try {
        if (cmd == "table1") {
            for (const auto& r : run_table1(cfg, opt))
                std::cout << r.sweep_var << "=" << r.value << "  nmse=" << std::scientific << std::setprecision(3)
                          << r.nmse << std::defaultfloat << (r.status == "ok" ? "" : "  (" + r.status + ")") << "\n";
        } else if (cmd == "fig2") {
            const Fig2Summary s = run_fig2(cfg, opt).summary;
            std::cout << "SWC peak " << s.swc_peak << " at " << s.swc_peak_location.transpose() << "\n"
                      << "AWC peak " << s.awc_peak << " at " << s.awc_peak_location.transpose() << "\n"
                      << "AWC 90% region points " << s.region_points << " (near radius_y " << s.region_near_first
                      << ", near radius_z " << s.region_near_second << ", x in [" << s.region_x_min << ", "
                      << s.region_x_max << "])\n"
                      << "AWC plane-max profile: " << s.profile_max_first << " near radius_y, "
                      << s.profile_at_middle << " at the midpoint, " << s.profile_max_second << " near radius_z\n";
        } else if (cmd == "fig3") {
            const Fig3Result res = run_fig3(cfg, opt);
            for (const auto& c : res.curves) {
                std::cout << to_string(c.kind) << " " << std::setw(11) << std::left << c.algorithm << std::right;
                for (double v : c.mean_nmse_db)
                    std::cout << " " << std::fixed << std::setprecision(2) << std::setw(8) << v;
                std::cout << std::defaultfloat << "\n";
            }
            if (res.failed)
                std::cout << res.failed << " trials failed\n";
        } else {
            bool ok = true;
            for (const auto& c : run_validate(cfg, opt)) {
                std::cout << (c.pass ? "PASS " : "FAIL ") << c.name << " measured=" << c.measured
                          << " tol=" << c.tolerance << "\n";
                ok = ok && c.pass;
            }
            rc = ok ? 0 : 2;
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const GeometryError& e) {
        std::cerr << "geometry error: " << e.what() << "\n";
        return 1;
    } catch (const std::invalid_argument& e) {
        std::cerr << "invalid argument: " << e.what() << "\n";
        return 1;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    write_timing(out_dir, cmd, secs);
    std::cerr << cmd << " finished in " << std::setprecision(3) << secs << " s\n";
    return rc;
}
