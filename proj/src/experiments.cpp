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

#include "wavecurve/experiments.hpp"
#include "wavecurve/kernels.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <random>
#include <sstream>

namespace wavecurve {

using std::numbers::pi;
using json = nlohmann::json;

namespace {

std::string num(double v)
{
    std::ostringstream os;
    os << std::setprecision(10) << v;
    return os.str();
}

void log_line(const RunOptions& opt, const std::string& s)
{
    if (opt.log)
        *opt.log << s << std::endl;
}

std::ofstream open_out(const RunOptions& opt, const std::string& name)
{
    std::filesystem::create_directories(opt.out_dir);
    const std::filesystem::path p = std::filesystem::path(opt.out_dir) / name;
    std::ofstream f(p);
    if (!f)
        throw std::runtime_error("cannot write " + p.string());
    return f;
}

void write_sidecar(const RunOptions& opt, const std::string& name, const ExperimentConfig& cfg,
                   const std::string& experiment, json extra)
{
    json j;
    j["experiment"] = experiment;
    j["master_seed"] = cfg.master_seed;
    j["paper_scale"] = opt.paper_scale;
    j["config_text"] = cfg.source_text;
    j["results"] = std::move(extra);
    open_out(opt, name) << j.dump(2) << "\n";
}

json vec_json(const Vec3& v)
{
    return json::array({v(0), v(1), v(2)});
}

} // namespace

// ---- Table I --------------------------------------------------------------

Scenario table1_scenario(const ExperimentConfig& cfg, const std::string& sweep, double value, int n)
{
    Scenario base = cfg.scenario.build();
    const Vec3 bs = base.array.center;
    const Vec3 sp0 = base.scatterer.point;
    Scenario s = base;
    if (sweep == "r") {
        const Vec3 b = (sp0 - bs).normalized();
        s.scatterer.point = bs + value * b;
        s.ue = s.scatterer.point + (base.ue - sp0);
    } else if (sweep == "d") {
        const Vec3 a = (base.ue - sp0).normalized();
        s.ue = sp0 + value * a;
    } else if (sweep == "scale") {
        ArraySpec spec = cfg.scenario.array;
        spec.ny = spec.nz = n;
        spec.carrier_hz = value;
        spec.spacing = 0.0;
        s.array = spec.frame();
    } else if (sweep == "q") {
        s.scatterer.Qs << value, 0.0, 0.0, 0.0;
    } else {
        throw ConfigError("unknown Table I sweep '" + sweep + "'");
    }
    return s;
}

std::vector<Table1Row> run_table1(const ExperimentConfig& cfg, const RunOptions& opt)
{
    struct Job {
        std::string sweep;
        double value;
        int n;
        std::string label;
    };
    std::vector<Job> jobs;
    for (double r : cfg.table1.r_values)
        jobs.push_back({"r", r, 0, num(r)});
    for (double d : cfg.table1.d_values)
        jobs.push_back({"d", d, 0, num(d)});
    for (size_t i = 0; i < cfg.table1.scale_n.size(); ++i)
        jobs.push_back({"scale", cfg.table1.scale_hz[i], cfg.table1.scale_n[i],
                        std::to_string(cfg.table1.scale_n[i]) + "@" + num(cfg.table1.scale_hz[i])});
    for (double q : cfg.table1.q_values)
        jobs.push_back({"q", q, 0, num(q)});

    std::vector<Table1Row> rows(jobs.size());
    for (size_t i = 0; i < jobs.size(); ++i) {
        Table1Row& row = rows[i];
        row.sweep_var = jobs[i].sweep;
        row.value = jobs[i].label;
        try {
            const Scenario s = table1_scenario(cfg, jobs[i].sweep, jobs[i].value, jobs[i].n);
            const ChannelVector h = scenario_channel(s);
            SwcSearchConfig search = cfg.search;
            search.axis = axis_toward(s.scatterer.point, s.array);
            row.nmse = best_swc_fit(h, s.array, search).nmse;
        } catch (const std::exception& e) {
            row.status = e.what();
            row.nmse = std::numeric_limits<double>::quiet_NaN();
        }
        log_line(opt, "table1 " + row.sweep_var + "=" + row.value + " nmse=" + num(row.nmse));
    }

    if (!opt.out_dir.empty()) {
        std::ofstream f = open_out(opt, "table1.csv");
        f << "sweep_var,value,nmse,status\n";
        for (const auto& r : rows)
            f << r.sweep_var << "," << r.value << "," << num(r.nmse) << ",\"" << r.status << "\"\n";
        json res = json::array();
        for (const auto& r : rows)
            res.push_back({{"sweep_var", r.sweep_var}, {"value", r.value}, {"nmse", r.nmse}, {"status", r.status}});
        write_sidecar(opt, "table1.json", cfg, "table1", res);
    }
    return rows;
}

// ---- Fig. 2 ---------------------------------------------------------------

std::pair<ChannelVector, ChannelVector> fig2_channels(const Fig2Spec& spec, ArrayFrame& array)
{
    array = ArrayFrame::half_wavelength(spec.n, spec.n, spec.carrier_hz);
    const double beta = array.spacing * array.spacing / array.wavelength;
    Eigen::Matrix2d qa = Eigen::Matrix2d::Zero();
    qa(0, 0) = beta / spec.radius_y;
    qa(1, 1) = beta / spec.radius_z;
    const Eigen::Matrix2d qs = beta / spec.radius_swc * Eigen::Matrix2d::Identity();
    return {awc_steering(Vec2::Zero(), qa, spec.n, spec.n), awc_steering(Vec2::Zero(), qs, spec.n, spec.n)};
}

namespace {

void write_volume(const RunOptions& opt, const std::string& name, const SimilarityVolume& v)
{
    std::ofstream f = open_out(opt, name);
    f << "x,y,z,similarity\n";
    for (size_t iz = 0; iz < v.grid.z.size(); ++iz)
        for (size_t iy = 0; iy < v.grid.y.size(); ++iy)
            for (size_t ix = 0; ix < v.grid.x.size(); ++ix)
                f << num(v.grid.x[ix]) << "," << num(v.grid.y[iy]) << "," << num(v.grid.z[iz]) << ","
                  << num(v.at(ix, iy, iz)) << "\n";
}

Fig2Summary summarise_fig2(const Fig2Spec& spec, const SimilarityVolume& swc, const SimilarityVolume& awc,
                           double step)
{
    Fig2Summary s;
    s.step = step;
    s.swc_peak = swc.peak;
    s.swc_peak_location = swc.peak_location;
    s.awc_peak = awc.peak;
    s.awc_peak_location = awc.peak_location;

    const double mid = 0.5 * (spec.radius_y + spec.radius_z);
    size_t mid_plane = 0;
    for (size_t ix = 0; ix < awc.grid.x.size(); ++ix) {
        const double x = awc.grid.x[ix];
        if (std::abs(x - mid) < std::abs(awc.grid.x[mid_plane] - mid))
            mid_plane = ix;
        double best = 0.0;
        for (size_t iz = 0; iz < awc.grid.z.size(); ++iz)
            for (size_t iy = 0; iy < awc.grid.y.size(); ++iy)
                best = std::max(best, awc.at(ix, iy, iz) / awc.peak);
        if (std::abs(x - spec.radius_y) <= 0.5 + 1e-9)
            s.profile_max_first = std::max(s.profile_max_first, best);
        if (std::abs(x - spec.radius_z) <= 0.5 + 1e-9)
            s.profile_max_second = std::max(s.profile_max_second, best);
    }
    for (size_t iz = 0; iz < awc.grid.z.size(); ++iz)
        for (size_t iy = 0; iy < awc.grid.y.size(); ++iy)
            s.profile_at_middle = std::max(s.profile_at_middle, awc.at(mid_plane, iy, iz) / awc.peak);
    s.region_x_min = awc.grid.x.back();
    s.region_x_max = awc.grid.x.front();

    const double thr = 0.9 * awc.peak;
    std::vector<int> plane_count(awc.grid.x.size(), 0);
    double y1lo = 1e9, y1hi = -1e9, z1lo = 1e9, z1hi = -1e9;
    double y2lo = 1e9, y2hi = -1e9, z2lo = 1e9, z2hi = -1e9;
    for (size_t iz = 0; iz < awc.grid.z.size(); ++iz)
        for (size_t iy = 0; iy < awc.grid.y.size(); ++iy)
            for (size_t ix = 0; ix < awc.grid.x.size(); ++ix) {
                if (awc.at(ix, iy, iz) < thr)
                    continue;
                const double x = awc.grid.x[ix];
                const double y = awc.grid.y[iy];
                const double z = awc.grid.z[iz];
                ++s.region_points;
                if (std::abs(x - spec.radius_y) <= 0.1 + 1e-9)
                    ++s.region_near_first;
                if (std::abs(x - spec.radius_z) <= 0.1 + 1e-9)
                    ++s.region_near_second;
                ++plane_count[ix];
                s.region_x_min = std::min(s.region_x_min, x);
                s.region_x_max = std::max(s.region_x_max, x);
                if (std::abs(x - spec.radius_y) <= 0.5 + 1e-9) {
                    y1lo = std::min(y1lo, y), y1hi = std::max(y1hi, y);
                    z1lo = std::min(z1lo, z), z1hi = std::max(z1hi, z);
                }
                if (std::abs(x - spec.radius_z) <= 0.5 + 1e-9) {
                    y2lo = std::min(y2lo, y), y2hi = std::max(y2hi, y);
                    z2lo = std::min(z2lo, z), z2hi = std::max(z2hi, z);
                }
            }
    s.region_at_middle = plane_count[mid_plane];
    s.region_plane_max = *std::max_element(plane_count.begin(), plane_count.end());
    s.extent_y_first = std::max(0.0, y1hi - y1lo);
    s.extent_z_first = std::max(0.0, z1hi - z1lo);
    s.extent_y_second = std::max(0.0, y2hi - y2lo);
    s.extent_z_second = std::max(0.0, z2hi - z2lo);
    return s;
}

} // namespace

Fig2Result run_fig2(const ExperimentConfig& cfg, const RunOptions& opt)
{
    const Fig2Spec& spec = cfg.fig2;
    const double step = opt.paper_scale ? spec.step : spec.desk_step;
    ArrayFrame array;
    const auto [h_awc, h_swc] = fig2_channels(spec, array);
    VolumeGrid grid;
    grid.x = VolumeGrid::range(spec.x_min, spec.x_max, step);
    grid.y = VolumeGrid::range(spec.y_min, spec.y_max, step);
    grid.z = VolumeGrid::range(spec.z_min, spec.z_max, step);
    log_line(opt, "fig2 grid points per volume: " + std::to_string(grid.size()));

    Fig2Result res;
    res.swc = similarity_volume(h_swc, array, grid);
    res.awc = similarity_volume(h_awc, array, grid);
    res.summary = summarise_fig2(spec, res.swc, res.awc, step);
    const Fig2Summary& s = res.summary;
    log_line(opt, "fig2 swc peak " + num(s.swc_peak) + " at x=" + num(s.swc_peak_location(0)) + "; awc peak "
                 + num(s.awc_peak));

    if (!opt.out_dir.empty()) {
        write_volume(opt, "fig2_swc_volume.csv", res.swc);
        write_volume(opt, "fig2_awc_volume.csv", res.awc);
        std::ofstream f = open_out(opt, "fig2_summary.csv");
        f << "channel,peak,peak_x,peak_y,peak_z,level80_fraction,level90_fraction\n";
        for (const auto* v : {&res.swc, &res.awc})
            f << (v == &res.swc ? "SWC" : "AWC") << "," << num(v->peak) << "," << num(v->peak_location(0)) << ","
              << num(v->peak_location(1)) << "," << num(v->peak_location(2)) << "," << num(v->level_fraction(0.8))
              << "," << num(v->level_fraction(0.9)) << "\n";
        json j = {{"swc_peak", s.swc_peak},
                  {"swc_peak_location", vec_json(s.swc_peak_location)},
                  {"awc_peak", s.awc_peak},
                  {"awc_peak_location", vec_json(s.awc_peak_location)},
                  {"awc_region90_points", s.region_points},
                  {"awc_region90_near_radius_y", s.region_near_first},
                  {"awc_region90_near_radius_z", s.region_near_second},
                  {"awc_region90_x_range", {s.region_x_min, s.region_x_max}},
                  {"awc_region90_mid_plane", s.region_at_middle},
                  {"awc_region90_plane_max", s.region_plane_max},
                  {"awc_profile_max", {s.profile_max_first, s.profile_at_middle, s.profile_max_second}},
                  {"extent_first", {s.extent_y_first, s.extent_z_first}},
                  {"extent_second", {s.extent_y_second, s.extent_z_second}},
                  {"step", step}};
        write_sidecar(opt, "fig2.json", cfg, "fig2", j);
    }
    return res;
}

// ---- Fig. 3 ---------------------------------------------------------------

std::string to_string(ScenarioKind k)
{
    return k == ScenarioKind::awc ? "AWC" : "SWC";
}

const Fig3Curve* Fig3Result::curve(ScenarioKind kind, const std::string& algorithm) const
{
    for (const auto& c : curves)
        if (c.kind == kind && c.algorithm == algorithm)
            return &c;
    return nullptr;
}

TrialDraw draw_fig3_scenario(const ExperimentConfig& cfg, const ArrayFrame& array, ScenarioKind kind,
                             uint64_t master_seed, int trial)
{
    const Fig3Spec& f = cfg.fig3;
    TrialDraw d;
    // Both kinds share the scatterer draw; only the curvature differs.
    d.scenario_seed = derive_seed(master_seed, static_cast<uint64_t>(trial), 11);
    std::mt19937_64 rng(d.scenario_seed);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const double k = kind == ScenarioKind::awc ? f.curvature : 0.0;
    for (int attempt = 0; attempt < 1000; ++attempt) {
        const double x = f.x_min + (f.x_max - f.x_min) * U(rng);
        const double ya = f.y_abs_min + (f.y_abs_max - f.y_abs_min) * U(rng);
        const double y = U(rng) < 0.5 ? -ya : ya;
        const double z = f.z_min + (f.z_max - f.z_min) * U(rng);
        const double psi = pi * U(rng);
        const Vec3 p(x, y, z);
        d.redraws = attempt;
        if ((p - array.center).norm() < f.min_bs_distance)
            continue;
        try {
            Scenario s;
            s.ue = cfg.scenario.ue;
            s.array = array;
            s.gain_mode = cfg.scenario.gain_mode;
            s.phase0 = cfg.scenario.phase0;
            s.scatterer = specular_patch(s.ue, array.center, p, k, 0.0, Vec3::UnitZ(), psi);
            const Vec3 in = (s.ue - p).normalized();
            if (std::acos(std::clamp(in.dot(s.scatterer.normal), -1.0, 1.0)) > f.max_incidence_deg * pi / 180.0)
                continue;
            (void)scenario_to_awc(s);
            d.scenario = s;
            return d;
        } catch (const GeometryError&) {
            continue;
        }
    }
    throw GeometryError("draw_fig3_scenario: no admissible scenario after 1000 draws");
}

TrialRecord run_fig3_trial(const ExperimentConfig& cfg, const Combiner& W, const PolarDictionary& dict,
                           const kernels::MatrixXcf& sensed, ScenarioKind kind, int trial)
{
    TrialRecord rec;
    rec.kind = kind;
    rec.trial = trial;
    const auto& snrs = cfg.fig3.snr_db;
    try {
        const TrialDraw draw = draw_fig3_scenario(cfg, dict.array, kind, cfg.master_seed, trial);
        const Scenario& s = draw.scenario;
        rec.scenario_seed = draw.scenario_seed;
        rec.scatterer = s.scatterer.point;
        const AwcParams truth = scenario_to_awc(s);
        const ChannelVector h = truth.gain * awc_steering(truth, s.array.ny, s.array.nz);
        SwcParams swc_truth;
        if (kind == ScenarioKind::swc) {
            swc_truth = swc_params_from_source(mirror_image(s.ue, s.scatterer), s.array);
            swc_truth.gain = truth.gain;
        }
        const uint64_t stream = kind == ScenarioKind::awc ? 1000 : 2000;
        for (size_t i = 0; i < snrs.size(); ++i) {
            const uint64_t ns = derive_seed(cfg.master_seed, static_cast<uint64_t>(trial), stream + i);
            rec.noise_seeds.push_back(ns);
            const Observation o = observe(h, W, snrs[i], ns);
            const ChannelVector target = o.scale * h;
            const EstimateResult est = estimate(o.y, W, cfg.estimator);
            rec.nmse_awc_estm.push_back(nmse(est.h_hat, target));
            const OmpResult omp = swc_omp_lm(o.y, W, dict, sensed, cfg.baseline.omp);
            rec.nmse_swc_omp_lm.push_back(nmse(omp.h_hat, target));
            rec.omp_paths.push_back(static_cast<int>(omp.paths.size()));
            rec.crlb_awc.push_back(crlb_awc(truth, W, snrs[i]).nmse_bound);
            if (kind == ScenarioKind::swc)
                rec.crlb_swc.push_back(crlb_swc(swc_truth, s.array, W, snrs[i]).nmse_bound);
        }
    } catch (const std::exception& e) {
        rec.failed = true;
        rec.error = e.what();
    }
    return rec;
}

namespace {

double mean_db(const std::vector<const TrialRecord*>& recs, const std::vector<double> TrialRecord::*field, size_t i)
{
    double acc = 0.0;
    int n = 0;
    for (const auto* r : recs) {
        const auto& v = r->*field;
        if (i < v.size()) {
            acc += v[i];
            ++n;
        }
    }
    return n ? 10.0 * std::log10(acc / n) : std::numeric_limits<double>::quiet_NaN();
}

} // namespace

Fig3Result run_fig3(const ExperimentConfig& cfg, const RunOptions& opt)
{
    const Fig3Spec& f = cfg.fig3;
    Fig3Result res;
    res.n = opt.paper_scale ? f.paper_n : f.n;
    res.carrier_hz = opt.paper_scale ? f.paper_carrier_hz : f.carrier_hz;
    const int trials = opt.trials ? *opt.trials : (opt.paper_scale ? f.paper_trials : f.trials);
    if (trials < 1)
        throw ConfigError("fig3: trials must be >= 1");

    ArraySpec aspec = cfg.scenario.array;
    aspec.ny = aspec.nz = res.n;
    aspec.carrier_hz = res.carrier_hz;
    aspec.spacing = 0.0;
    const ArrayFrame array = aspec.frame();

    Combiner W;
    try {
        W = make_srft_combiner(res.n, res.n, f.n_rf, f.pilots, derive_seed(cfg.master_seed, 0, 7));
    } catch (const std::invalid_argument& e) {
        throw ConfigError(e.what());
    }
    const PolarDictionary dict = cfg.baseline.dictionary(array);
    log_line(opt, "fig3 " + std::to_string(res.n) + "x" + std::to_string(res.n) + ", " + std::to_string(trials)
                 + " trials, dictionary atoms: " + std::to_string(dict.size()));
    const kernels::MatrixXcf sensed = kernels::sense_atoms_parallel(W, dict.projections());

    std::vector<ScenarioKind> kinds;
    if (f.run_awc)
        kinds.push_back(ScenarioKind::awc);
    if (f.run_swc)
        kinds.push_back(ScenarioKind::swc);

    for (ScenarioKind kind : kinds) {
        std::vector<TrialRecord> recs(static_cast<size_t>(trials));
#pragma omp parallel for schedule(dynamic, 1)
        for (int t = 0; t < trials; ++t)
            recs[static_cast<size_t>(t)] = run_fig3_trial(cfg, W, dict, sensed, kind, t);
        std::vector<const TrialRecord*> ok;
        for (const auto& r : recs) {
            if (r.failed) {
                ++res.failed;
                log_line(opt, "fig3 trial " + std::to_string(r.trial) + " failed: " + r.error);
            } else {
                ok.push_back(&r);
            }
        }
        using Field = std::vector<double> TrialRecord::*;
        std::vector<std::pair<std::string, Field>> algos{{"AWC-Estm", &TrialRecord::nmse_awc_estm},
                                                         {"SWC-OMP-LM", &TrialRecord::nmse_swc_omp_lm},
                                                         {"CRLB(AWC)", &TrialRecord::crlb_awc}};
        if (kind == ScenarioKind::swc)
            algos.push_back({"CRLB(SWC)", &TrialRecord::crlb_swc});
        for (const auto& [name, field] : algos) {
            Fig3Curve c;
            c.kind = kind;
            c.algorithm = name;
            c.snr_db = f.snr_db;
            c.trials = static_cast<int>(ok.size());
            for (size_t i = 0; i < f.snr_db.size(); ++i)
                c.mean_nmse_db.push_back(mean_db(ok, field, i));
            res.curves.push_back(c);
            std::ostringstream os;
            os << "fig3 " << to_string(kind) << " " << name << ":";
            for (double v : c.mean_nmse_db)
                os << " " << std::fixed << std::setprecision(2) << v;
            log_line(opt, os.str());
        }
        for (auto& r : recs)
            res.trials.push_back(std::move(r));
    }

    if (!opt.out_dir.empty()) {
        std::ofstream f3 = open_out(opt, "fig3.csv");
        f3 << "scenario_kind,snr_db,algorithm,mean_nmse_db,trials,master_seed\n";
        std::ofstream fc = open_out(opt, "fig3_crlb.csv");
        fc << "scenario_kind,snr_db,model,nmse_bound\n";
        for (const auto& c : res.curves) {
            const bool bound = c.algorithm.rfind("CRLB", 0) == 0;
            for (size_t i = 0; i < c.snr_db.size(); ++i) {
                f3 << to_string(c.kind) << "," << num(c.snr_db[i]) << "," << c.algorithm << ","
                   << num(c.mean_nmse_db[i]) << "," << c.trials << "," << cfg.master_seed << "\n";
                if (bound)
                    fc << to_string(c.kind) << "," << num(c.snr_db[i]) << "," << c.algorithm.substr(5, 3) << ","
                       << num(std::pow(10.0, c.mean_nmse_db[i] / 10.0)) << "\n";
            }
        }
        std::ofstream ft = open_out(opt, "fig3_trials.csv");
        ft << "scenario_kind,trial,master_seed,scenario_seed,noise_seed,snr_db,algorithm,nmse,omp_paths,status\n";
        for (const auto& r : res.trials) {
            if (r.failed) {
                ft << to_string(r.kind) << "," << r.trial << "," << cfg.master_seed << "," << r.scenario_seed
                   << ",,,,,,\"failed: " << r.error << "\"\n";
                continue;
            }
            for (size_t i = 0; i < r.noise_seeds.size(); ++i) {
                const std::string pre = to_string(r.kind) + "," + std::to_string(r.trial) + ","
                    + std::to_string(cfg.master_seed) + "," + std::to_string(r.scenario_seed) + ","
                    + std::to_string(r.noise_seeds[i]) + "," + num(f.snr_db[i]) + ",";
                ft << pre << "AWC-Estm," << num(r.nmse_awc_estm[i]) << ",,ok\n";
                ft << pre << "SWC-OMP-LM," << num(r.nmse_swc_omp_lm[i]) << "," << r.omp_paths[i] << ",ok\n";
            }
        }
        json curves = json::array();
        for (const auto& c : res.curves)
            curves.push_back({{"scenario_kind", to_string(c.kind)},
                              {"algorithm", c.algorithm},
                              {"snr_db", c.snr_db},
                              {"mean_nmse_db", c.mean_nmse_db},
                              {"trials", c.trials}});
        json j = {{"n", res.n},
                  {"carrier_hz", res.carrier_hz},
                  {"trials", trials},
                  {"failed", res.failed},
                  {"combiner_seed", W.seed},
                  {"dictionary_atoms", dict.size()},
                  {"curves", curves}};
        write_sidecar(opt, "fig3.json", cfg, "fig3", j);
    }
    return res;
}

// ---- validate -------------------------------------------------------------

namespace {

double max_column_fd_error(const Eigen::MatrixXcd& J, const Eigen::MatrixXcd& FD)
{
    double worst = 0.0;
    for (Eigen::Index j = 0; j < J.cols(); ++j) {
        const double scale = J.col(j).cwiseAbs().maxCoeff();
        if (scale > 0.0)
            worst = std::max(worst, (J.col(j) - FD.col(j)).cwiseAbs().maxCoeff() / scale);
    }
    return worst;
}

double wrap_phase(double x)
{
    return std::remainder(x, 2.0 * pi);
}

} // namespace

std::vector<ValidationCheck> run_validate(const ExperimentConfig& cfg, const RunOptions& opt)
{
    std::vector<ValidationCheck> checks;
    std::mt19937_64 rng(derive_seed(cfg.master_seed, 0, 5));
    std::uniform_real_distribution<double> U(-1.0, 1.0);

    // Second-order phase model against exact single-bounce path lengths.
    {
        const Scenario s = cfg.scenario.build();
        const AwcParams p = scenario_to_awc(s);
        const ChannelVector c = awc_steering(p, s.array.ny, s.array.nz);
        const double L0 = fermat_oracle(s.ue, s.scatterer, s.array.center);
        const double k = 2.0 * pi / s.array.wavelength;
        std::vector<double> err(static_cast<size_t>(s.array.size()));
        const int ny = s.array.ny;
        const int n = s.array.size();
#pragma omp parallel for schedule(static)
        for (int idx = 0; idx < n; ++idx) {
            const int iy = idx % ny;
            const int iz = idx / ny;
            const double L = fermat_oracle(s.ue, s.scatterer, s.array.element(iy, iz));
            err[idx] = std::abs(wrap_phase(std::arg(c(idx)) + k * (L - L0)));
        }
        checks.push_back({"fermat_phase_max_rad", *std::max_element(err.begin(), err.end()), 0.15, false});
    }

    // Curvature frequency map round trip.
    {
        double worst = 0.0;
        const int dy = 32, dz = 32;
        for (int i = 0; i < 100; ++i) {
            Eigen::Matrix2d Q;
            Q << U(rng), U(rng), 0.0, U(rng);
            Q(1, 0) = Q(0, 1);
            Q *= 3e-3;
            const auto [f1, f2] = curvature_frequencies(Q, dy, dz);
            const Eigen::Matrix2d R = solve_curvature(f1(0), f1(1), f2(0), f2(1), dy, dz);
            worst = std::max(worst, (R - Q).cwiseAbs().maxCoeff() / Q.cwiseAbs().maxCoeff());
        }
        checks.push_back({"curvature_roundtrip_rel", worst, 1e-12, false});
    }

    // Analytic Jacobians against central differences.
    {
        const ArrayFrame array = ArrayFrame::half_wavelength(32, 32, 15e9);
        double worst = 0.0;
        const double hstep = 1e-6;
        for (int t = 0; t < cfg.validate.fd_points; ++t) {
            Eigen::VectorXd th(5);
            th << 0.4 * U(rng), 0.4 * U(rng), 2e-3 * U(rng), 1e-3 * U(rng), 2e-3 * U(rng);
            Eigen::MatrixXcd J;
            awc_steering_jacobian(th, array.ny, array.nz, J);
            Eigen::MatrixXcd FD(J.rows(), 5);
            for (int j = 0; j < 5; ++j) {
                Eigen::VectorXd a = th, b = th;
                a(j) += hstep;
                b(j) -= hstep;
                FD.col(j) = (awc_steering(awc_from_theta(a), array.ny, array.nz)
                             - awc_steering(awc_from_theta(b), array.ny, array.nz))
                    / (2.0 * hstep);
            }
            worst = std::max(worst, max_column_fd_error(J, FD));

            const double u = 0.5 * U(rng), v = 0.5 * U(rng), rho = 0.2 + 0.15 * U(rng);
            Eigen::MatrixXcd Js;
            swc_steering_jacobian(u, v, rho, array, &Js);
            Eigen::MatrixXcd FDs(Js.rows(), 3);
            const double x[3] = {u, v, rho};
            for (int j = 0; j < 3; ++j) {
                double a[3] = {x[0], x[1], x[2]}, b[3] = {x[0], x[1], x[2]};
                a[j] += hstep;
                b[j] -= hstep;
                FDs.col(j) = (swc_steering_jacobian(a[0], a[1], a[2], array, nullptr)
                              - swc_steering_jacobian(b[0], b[1], b[2], array, nullptr))
                    / (2.0 * hstep);
            }
            worst = std::max(worst, max_column_fd_error(Js, FDs));
        }
        checks.push_back({"jacobian_fd_rel", worst, 1e-4, false});
    }

    // SRFT output whiteness for white input.
    {
        const int n = cfg.fig3.n;
        const Combiner W = make_srft_combiner(n, n, cfg.fig3.n_rf, cfg.fig3.pilots, derive_seed(cfg.master_seed, 0, 7));
        std::mt19937_64 g(derive_seed(cfg.master_seed, 0, 6));
        std::normal_distribution<double> nd(0.0, std::sqrt(0.5));
        Eigen::MatrixXcd C = Eigen::MatrixXcd::Zero(W.m(), W.m());
        Eigen::VectorXcd x(W.n());
        const int draws = cfg.validate.whiteness_draws;
        Eigen::MatrixXcd Y(W.m(), draws);
        for (int d = 0; d < draws; ++d) {
            for (Eigen::Index i = 0; i < x.size(); ++i) {
                const double re = nd(g);
                x(i) = cplx(re, nd(g));
            }
            Y.col(d) = W.apply(x);
        }
        C = Y * Y.adjoint() / static_cast<double>(draws);
        double diag_err = 0.0, off = 0.0;
        for (int i = 0; i < W.m(); ++i)
            for (int j = 0; j < W.m(); ++j) {
                if (i == j)
                    diag_err = std::max(diag_err, std::abs(C(i, i).real() - 1.0));
                else
                    off += std::norm(C(i, j));
            }
        const double off_rms = std::sqrt(off / (static_cast<double>(W.m()) * (W.m() - 1)));
        checks.push_back({"srft_whiteness", std::max(diag_err, off_rms), 0.05, false});
    }

    // Free-space propagation semigroup.
    {
        double worst = 0.0;
        std::uniform_real_distribution<double> pos(0.0, 1.0);
        for (int t = 0; t < cfg.validate.semigroup_cases; ++t) {
            WavefrontFrame f;
            const double l1 = 2.0 * pos(rng), l2 = 2.0 * pos(rng);
            const double th = pi * pos(rng);
            Eigen::Matrix2d R;
            R << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
            f.Q = R * Eigen::Vector2d(l1, l2).asDiagonal() * R.transpose();
            const double s1 = 10.0 * pos(rng), s2 = 10.0 * pos(rng);
            const Eigen::Matrix2d a = propagate(propagate(f, s1), s2).Q;
            const Eigen::Matrix2d b = propagate(f, s1 + s2).Q;
            worst = std::max(worst, (a - b).cwiseAbs().maxCoeff());
        }
        checks.push_back({"propagate_semigroup_abs", worst, 1e-10, false});
    }

    for (auto& c : checks)
        c.pass = c.measured <= c.tolerance;

    if (!opt.out_dir.empty()) {
        std::ofstream f = open_out(opt, "validate.csv");
        f << "check,measured,tolerance,pass\n";
        for (const auto& c : checks)
            f << c.name << "," << num(c.measured) << "," << num(c.tolerance) << "," << (c.pass ? "true" : "false")
              << "\n";
    }
    return checks;
}

} // namespace wavecurve
