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

#include "wavecurve/config.hpp"

#define TOML_EXCEPTIONS 1
#include <toml.hpp>

#include <fstream>
#include <initializer_list>
#include <sstream>

namespace wavecurve {

ArrayFrame ArraySpec::frame() const
{
    if (ny < 1 || nz < 1)
        throw ConfigError("array: ny and nz must be positive");
    if (!(carrier_hz > 0.0))
        throw ConfigError("array: carrier_hz must be positive");
    if (std::abs(axis_y.norm() - 1.0) > 1e-9 || std::abs(axis_z.norm() - 1.0) > 1e-9
        || std::abs(axis_y.dot(axis_z)) > 1e-10)
        throw ConfigError("array: axes must be orthonormal");
    ArrayFrame a = ArrayFrame::half_wavelength(ny, nz, carrier_hz, center);
    a.axis_y = axis_y;
    a.axis_z = axis_z;
    if (spacing > 0.0)
        a.spacing = spacing;
    return a;
}

Scenario ScenarioSpec::build() const
{
    Scenario s;
    s.ue = ue;
    s.array = array.frame();
    s.gain_mode = gain_mode;
    s.phase0 = phase0;
    if (scatterer.explicit_patch) {
        s.scatterer = scatterer.patch;
    } else {
        const Vec3 p = pillar_reflection_point(ue, s.array.center, scatterer.d, scatterer.r);
        s.scatterer = specular_patch(ue, s.array.center, p, scatterer.k1, scatterer.k2, scatterer.axis_hint,
                                     scatterer.rotation);
    }
    return s;
}

PolarDictionary BaselineSpec::dictionary(const ArrayFrame& array) const
{
    const int cy = count_y > 0 ? count_y : array.ny;
    const int cz = count_z > 0 ? count_z : array.nz;
    const double rmin = r_min > 0.0 ? r_min : 1.2 * array.aperture();
    return build_polar_dictionary(array, cy, cz, n_distance, rmin, r_max);
}

namespace {

using Keys = std::initializer_list<std::string_view>;

void allow(const toml::table& t, Keys keys, const std::string& where)
{
    for (const auto& [k, v] : t) {
        bool ok = false;
        for (auto a : keys)
            if (k.str() == a)
                ok = true;
        if (!ok)
            throw ConfigError("unknown key '" + std::string(k.str()) + "' in " + where);
    }
}

const toml::table* sub(const toml::table& t, std::string_view key, const std::string& where)
{
    const toml::node* n = t.get(key);
    if (!n)
        return nullptr;
    if (!n->is_table())
        throw ConfigError(where + "." + std::string(key) + " must be a table");
    return n->as_table();
}

double as_number(const toml::node& n, const std::string& what)
{
    if (auto v = n.value<double>())
        return *v;
    throw ConfigError(what + " must be a number");
}

void read(const toml::table& t, std::string_view key, double& out, const std::string& where)
{
    if (const toml::node* n = t.get(key))
        out = as_number(*n, where + "." + std::string(key));
}

void read(const toml::table& t, std::string_view key, int& out, const std::string& where)
{
    if (const toml::node* n = t.get(key)) {
        auto v = n->value_exact<int64_t>();
        if (!v)
            throw ConfigError(where + "." + std::string(key) + " must be an integer");
        out = static_cast<int>(*v);
    }
}

void read(const toml::table& t, std::string_view key, bool& out, const std::string& where)
{
    if (const toml::node* n = t.get(key)) {
        auto v = n->value_exact<bool>();
        if (!v)
            throw ConfigError(where + "." + std::string(key) + " must be a boolean");
        out = *v;
    }
}

void read(const toml::table& t, std::string_view key, std::vector<double>& out, const std::string& where)
{
    const toml::node* n = t.get(key);
    if (!n)
        return;
    const std::string what = where + "." + std::string(key);
    const toml::array* a = n->as_array();
    if (!a || a->empty())
        throw ConfigError(what + " must be a non-empty array of numbers");
    out.clear();
    for (const auto& e : *a)
        out.push_back(as_number(e, what));
}

void read(const toml::table& t, std::string_view key, std::vector<int>& out, const std::string& where)
{
    std::vector<double> tmp;
    read(t, key, tmp, where);
    if (t.get(key)) {
        out.clear();
        for (double v : tmp) {
            if (v != std::floor(v))
                throw ConfigError(where + "." + std::string(key) + " must hold integers");
            out.push_back(static_cast<int>(v));
        }
    }
}

void read(const toml::table& t, std::string_view key, Vec3& out, const std::string& where)
{
    std::vector<double> tmp;
    read(t, key, tmp, where);
    if (!t.get(key))
        return;
    if (tmp.size() != 3)
        throw ConfigError(where + "." + std::string(key) + " must have three components");
    out = Vec3(tmp[0], tmp[1], tmp[2]);
}

void read_lm(const toml::table& t, LmOptions& lm, const std::string& where)
{
    allow(t, {"max_iters", "damping_init", "damping_factor", "rel_tol"}, where);
    read(t, "max_iters", lm.max_iters, where);
    read(t, "damping_init", lm.damping_init, where);
    read(t, "damping_factor", lm.damping_factor, where);
    read(t, "rel_tol", lm.rel_tol, where);
    if (lm.max_iters < 0 || !(lm.damping_init > 0.0) || !(lm.damping_factor > 1.0) || !(lm.rel_tol >= 0.0))
        throw ConfigError(where + ": invalid LM schedule");
}

void read_scenario(const toml::table& t, ScenarioSpec& s)
{
    allow(t, {"ue", "gain_mode", "phase0", "array", "scatterer"}, "scenario");
    read(t, "ue", s.ue, "scenario");
    read(t, "phase0", s.phase0, "scenario");
    if (const toml::node* n = t.get("gain_mode")) {
        const auto v = n->value<std::string>();
        if (v == "unit")
            s.gain_mode = GainMode::unit;
        else if (v == "geometric_phase" || v == "geometric-phase")
            s.gain_mode = GainMode::geometric_phase;
        else
            throw ConfigError("scenario.gain_mode must be \"unit\" or \"geometric_phase\"");
    }
    if (const toml::table* a = sub(t, "array", "scenario")) {
        allow(*a, {"center", "axis_y", "axis_z", "ny", "nz", "carrier_hz", "spacing", "wavelength"}, "scenario.array");
        read(*a, "center", s.array.center, "scenario.array");
        read(*a, "axis_y", s.array.axis_y, "scenario.array");
        read(*a, "axis_z", s.array.axis_z, "scenario.array");
        read(*a, "ny", s.array.ny, "scenario.array");
        read(*a, "nz", s.array.nz, "scenario.array");
        read(*a, "carrier_hz", s.array.carrier_hz, "scenario.array");
        read(*a, "spacing", s.array.spacing, "scenario.array");
        double wl = 0.0;
        read(*a, "wavelength", wl, "scenario.array");
        if (wl > 0.0)
            s.array.carrier_hz = kSpeedOfLight / wl;
    }
    if (const toml::table* c = sub(t, "scatterer", "scenario")) {
        const std::string w = "scenario.scatterer";
        allow(*c, {"point", "normal", "basis", "q11", "q12", "q22", "d", "r", "k1", "k2", "axis_hint", "rotation"}, w);
        ScattererSpec& sc = s.scatterer;
        if (c->get("point")) {
            sc.explicit_patch = true;
            SurfacePatch& p = sc.patch;
            read(*c, "point", p.point, w);
            read(*c, "normal", p.normal, w);
            const toml::array* b = c->get("basis") ? c->get("basis")->as_array() : nullptr;
            if (!b || b->size() != 2)
                throw ConfigError(w + ".basis must be two 3-vectors");
            Vec3 u[2];
            for (int i = 0; i < 2; ++i) {
                const toml::array* e = (*b)[static_cast<size_t>(i)].as_array();
                if (!e || e->size() != 3)
                    throw ConfigError(w + ".basis must be two 3-vectors");
                for (int j = 0; j < 3; ++j)
                    u[i](j) = as_number((*e)[static_cast<size_t>(j)], w + ".basis");
            }
            p.u1 = u[0];
            p.u2 = u[1];
            double q11 = 0.0, q12 = 0.0, q22 = 0.0;
            read(*c, "q11", q11, w);
            read(*c, "q12", q12, w);
            read(*c, "q22", q22, w);
            p.Qs << q11, q12, q12, q22;
            if (std::abs(p.normal.norm() - 1.0) > 1e-9 || std::abs(p.u1.norm() - 1.0) > 1e-9
                || std::abs(p.u2.norm() - 1.0) > 1e-9 || std::abs(p.u1.dot(p.normal)) > 1e-10
                || std::abs(p.u2.dot(p.normal)) > 1e-10 || std::abs(p.u1.dot(p.u2)) > 1e-10)
                throw ConfigError(w + ": normal and basis must be orthonormal");
        } else {
            for (auto k : {"normal", "basis", "q11", "q12", "q22"})
                if (c->get(k))
                    throw ConfigError(w + ": '" + std::string(k) + "' requires 'point'");
            read(*c, "d", sc.d, w);
            read(*c, "r", sc.r, w);
            read(*c, "k1", sc.k1, w);
            read(*c, "k2", sc.k2, w);
            read(*c, "axis_hint", sc.axis_hint, w);
            read(*c, "rotation", sc.rotation, w);
        }
    }
}

} // namespace

ExperimentConfig parse_config(const std::string& text)
{
    toml::table root;
    try {
        root = toml::parse(text);
    } catch (const toml::parse_error& e) {
        std::ostringstream os;
        os << "config parse error at line " << e.source().begin.line << ": " << e.description();
        throw ConfigError(os.str());
    }

    ExperimentConfig cfg;
    cfg.source_text = text;
    allow(root, {"experiment", "master_seed", "scenario", "table1", "fig2", "fig3", "estimator", "lm", "baseline",
                 "search", "validate"},
          "config");
    if (const toml::node* n = root.get("experiment")) {
        auto v = n->value<std::string>();
        if (!v)
            throw ConfigError("experiment must be a string");
        cfg.experiment = *v;
    }
    if (const toml::node* n = root.get("master_seed")) {
        auto v = n->value_exact<int64_t>();
        if (!v || *v < 0)
            throw ConfigError("master_seed must be a non-negative integer");
        cfg.master_seed = static_cast<uint64_t>(*v);
    }

    if (const toml::table* t = sub(root, "scenario", "config"))
        read_scenario(*t, cfg.scenario);

    if (const toml::table* t = sub(root, "table1", "config")) {
        allow(*t, {"r_values", "d_values", "scale_n", "scale_hz", "q_values"}, "table1");
        read(*t, "r_values", cfg.table1.r_values, "table1");
        read(*t, "d_values", cfg.table1.d_values, "table1");
        read(*t, "scale_n", cfg.table1.scale_n, "table1");
        read(*t, "scale_hz", cfg.table1.scale_hz, "table1");
        read(*t, "q_values", cfg.table1.q_values, "table1");
        if (cfg.table1.scale_n.size() != cfg.table1.scale_hz.size())
            throw ConfigError("table1.scale_n and table1.scale_hz must have equal lengths");
    }

    if (const toml::table* t = sub(root, "fig2", "config")) {
        const std::string w = "fig2";
        allow(*t, {"n", "carrier_hz", "radius_y", "radius_z", "radius_swc", "x_min", "x_max", "y_min", "y_max",
                   "z_min", "z_max", "step", "desk_step"},
              w);
        Fig2Spec& f = cfg.fig2;
        read(*t, "n", f.n, w);
        read(*t, "carrier_hz", f.carrier_hz, w);
        read(*t, "radius_y", f.radius_y, w);
        read(*t, "radius_z", f.radius_z, w);
        read(*t, "radius_swc", f.radius_swc, w);
        read(*t, "x_min", f.x_min, w);
        read(*t, "x_max", f.x_max, w);
        read(*t, "y_min", f.y_min, w);
        read(*t, "y_max", f.y_max, w);
        read(*t, "z_min", f.z_min, w);
        read(*t, "z_max", f.z_max, w);
        read(*t, "step", f.step, w);
        read(*t, "desk_step", f.desk_step, w);
        if (!(f.step > 0.0) || !(f.desk_step > 0.0) || f.x_max < f.x_min || !(f.x_min > 0.0))
            throw ConfigError("fig2: invalid grid");
    }

    if (const toml::table* t = sub(root, "fig3", "config")) {
        const std::string w = "fig3";
        allow(*t, {"n", "carrier_hz", "trials", "paper_n", "paper_carrier_hz", "paper_trials", "n_rf", "p",
                   "snr_db", "x_min", "x_max", "y_abs_min", "y_abs_max", "z_min", "z_max", "max_incidence_deg",
                   "min_bs_distance", "curvature", "run_awc", "run_swc"},
              w);
        Fig3Spec& f = cfg.fig3;
        read(*t, "n", f.n, w);
        read(*t, "carrier_hz", f.carrier_hz, w);
        read(*t, "trials", f.trials, w);
        read(*t, "paper_n", f.paper_n, w);
        read(*t, "paper_carrier_hz", f.paper_carrier_hz, w);
        read(*t, "paper_trials", f.paper_trials, w);
        read(*t, "n_rf", f.n_rf, w);
        read(*t, "p", f.pilots, w);
        read(*t, "snr_db", f.snr_db, w);
        read(*t, "x_min", f.x_min, w);
        read(*t, "x_max", f.x_max, w);
        read(*t, "y_abs_min", f.y_abs_min, w);
        read(*t, "y_abs_max", f.y_abs_max, w);
        read(*t, "z_min", f.z_min, w);
        read(*t, "z_max", f.z_max, w);
        read(*t, "max_incidence_deg", f.max_incidence_deg, w);
        read(*t, "min_bs_distance", f.min_bs_distance, w);
        read(*t, "curvature", f.curvature, w);
        read(*t, "run_awc", f.run_awc, w);
        read(*t, "run_swc", f.run_swc, w);
        if (f.trials < 1 || f.paper_trials < 1)
            throw ConfigError("fig3: trials must be >= 1");
        if (f.n_rf < 1 || f.pilots < 1)
            throw ConfigError("fig3: n_rf and p must be positive");
    }

    if (const toml::table* t = sub(root, "estimator", "config")) {
        const std::string w = "estimator";
        allow(*t, {"smooth_kernel", "kadane_sigma_mult", "delta_y", "delta_z", "fft_zeropad"}, w);
        EstimatorConfig& e = cfg.estimator;
        read(*t, "smooth_kernel", e.smooth_kernel, w);
        read(*t, "kadane_sigma_mult", e.kadane_sigma_mult, w);
        read(*t, "delta_y", e.delta_y, w);
        read(*t, "delta_z", e.delta_z, w);
        read(*t, "fft_zeropad", e.fft_zeropad, w);
        if (e.smooth_kernel < 1 || e.smooth_kernel % 2 == 0)
            throw ConfigError("estimator.smooth_kernel must be odd and positive");
        if (e.fft_zeropad < 1 || e.delta_y < 0 || e.delta_z < 0)
            throw ConfigError("estimator: invalid zero-padding or shifts");
    }
    if (const toml::table* t = sub(root, "lm", "config")) {
        read_lm(*t, cfg.estimator.lm, "lm");
        cfg.baseline.omp.final_lm = cfg.estimator.lm;
        cfg.search.lm = cfg.estimator.lm;
    }

    if (const toml::table* t = sub(root, "baseline", "config")) {
        const std::string w = "baseline";
        allow(*t, {"angle_counts", "n_distance", "r_min", "r_max", "stop_ratio", "max_paths", "interleaved_refine"},
              w);
        BaselineSpec& b = cfg.baseline;
        std::vector<int> counts;
        read(*t, "angle_counts", counts, w);
        if (!counts.empty()) {
            if (counts.size() != 2 || counts[0] < 0 || counts[1] < 0)
                throw ConfigError("baseline.angle_counts must be two non-negative integers");
            b.count_y = counts[0];
            b.count_z = counts[1];
        }
        read(*t, "n_distance", b.n_distance, w);
        read(*t, "r_min", b.r_min, w);
        read(*t, "r_max", b.r_max, w);
        read(*t, "stop_ratio", b.omp.stop_ratio, w);
        read(*t, "max_paths", b.omp.max_paths, w);
        read(*t, "interleaved_refine", b.omp.interleaved_refine, w);
        if (b.n_distance < 0 || b.omp.max_paths < 1 || !(b.omp.stop_ratio >= 0.0))
            throw ConfigError("baseline: invalid settings");
    }

    if (const toml::table* t = sub(root, "search", "config")) {
        const std::string w = "search";
        allow(*t, {"r_min", "r_max", "rings", "cone_deg", "starts", "fft_zeropad"}, w);
        read(*t, "r_min", cfg.search.r_min, w);
        read(*t, "r_max", cfg.search.r_max, w);
        read(*t, "rings", cfg.search.rings, w);
        read(*t, "cone_deg", cfg.search.cone_deg, w);
        read(*t, "starts", cfg.search.starts, w);
        read(*t, "fft_zeropad", cfg.search.fft_zeropad, w);
        if (cfg.search.rings < 1 || cfg.search.starts < 1 || !(cfg.search.r_min > 0.0)
            || cfg.search.r_max < cfg.search.r_min || cfg.search.fft_zeropad < 1)
            throw ConfigError("search: empty search region");
    }

    if (const toml::table* t = sub(root, "validate", "config")) {
        allow(*t, {"fd_points", "whiteness_draws", "semigroup_cases"}, "validate");
        read(*t, "fd_points", cfg.validate.fd_points, "validate");
        read(*t, "whiteness_draws", cfg.validate.whiteness_draws, "validate");
        read(*t, "semigroup_cases", cfg.validate.semigroup_cases, "validate");
    }

    // Geometry problems surface here rather than mid-run.
    try {
        (void)cfg.scenario.array.frame();
    } catch (const GeometryError& e) {
        throw ConfigError(e.what());
    }
    return cfg;
}

ExperimentConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

} // namespace wavecurve
