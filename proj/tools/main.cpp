// SPDX-License-Identifier: Apache-2.0
//
// Single entry point for experiments: accelerated runs with reports,
// ablation sweeps, error-bound verification, trajectory recording, and PCA
// export. Every command is deterministic given its flags.

#include "taycast/forecast.hpp"
#include "taycast/metrics.hpp"
#include "taycast/pca.hpp"
#include "taycast/report.hpp"
#include "taycast/schedule.hpp"
#include "taycast/tensor.hpp"
#include "taycast/toy_model.hpp"
#include "taycast/trajectory_io.hpp"

#include <CLI11.hpp>

#include <atomic>
#include <cmath>
#include <fstream>
#include <iostream>
#include <mutex>
#include <numbers>
#include <optional>
#include <sstream>
#include <thread>
#include <vector>

namespace {

using namespace taycast;

struct CommonOpts {
    int steps = 50;
    int interval = 3;
    int order = 1;
    int tail_dense = 0;
    std::uint64_t seed = 42;
    DenoiserDims dims;
};

void add_dims_flags(CLI::App* cmd, DenoiserDims& dims) {
    cmd->add_option("--layers", dims.layers, "Transformer blocks")->capture_default_str();
    cmd->add_option("--tokens", dims.tokens, "Token count")->capture_default_str();
    cmd->add_option("--channels", dims.channels, "Channel count")->capture_default_str();
    cmd->add_option("--hidden", dims.hidden, "MLP hidden width")->capture_default_str();
}

void write_text(const std::string& path, const std::string& text) {
    if (path.empty() || path == "-") {
        std::cout << text;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open output file " + path);
    out << text;
    if (!out.good()) throw std::runtime_error("write failure on " + path);
}

SampleResult run_once(const CommonOpts& opts, const ToyDenoiser& model,
                      const ActivationSchedule& schedule, const SampleOptions& options) {
    SamplerConfig config;
    config.total_steps = opts.steps;
    config.seed = opts.seed;
    CacheSet caches(opts.dims.layers, opts.order, opts.interval);
    return sample(config, model, schedule, caches, options);
}

FeatureTensor baseline_final(const CommonOpts& opts, const ToyDenoiser& model) {
    SamplerConfig config;
    config.total_steps = opts.steps;
    config.seed = opts.seed;
    CacheSet caches(opts.dims.layers, 0, 1);
    return sample(config, model, ActivationSchedule::uniform(opts.steps, 1, 0), caches).final_state;
}

int cmd_run(const CommonOpts& opts, bool diagnostic, const std::string& out_path,
            const std::string& record_path) {
    const ToyDenoiser model(opts.seed, opts.dims);
    const auto schedule = ActivationSchedule::uniform(opts.steps, opts.interval, opts.tail_dense);

    SampleOptions options;
    options.diagnostic = diagnostic;
    options.record = !record_path.empty();

    SamplerConfig config;
    config.total_steps = opts.steps;
    config.seed = opts.seed;

    const SampleResult result = run_once(opts, model, schedule, options);
    const FeatureTensor full_final = baseline_final(opts, model);

    const RunReport report =
        build_run_report(config, opts.dims, schedule, opts.order, result, full_final, diagnostic);
    write_text(out_path, report.to_json());

    if (options.record) {
        Trajectory traj;
        traj.shape = {static_cast<std::size_t>(opts.dims.tokens),
                      static_cast<std::size_t>(opts.dims.channels)};
        traj.timesteps = result.timesteps;
        for (int i = 0; i < model.slot_count(); ++i) traj.slots.push_back(SlotId::from_index(i));
        traj.features = result.features;
        write_trajectory(record_path, traj);
    }
    return 0;
}

int cmd_ablate(const CommonOpts& base, std::vector<int> intervals, std::vector<int> orders,
               int jobs, const std::string& out_path) {
    const ToyDenoiser model(base.seed, base.dims);
    const FeatureTensor full_final = baseline_final(base, model);

    struct Cell {
        int interval = 1;
        int order = 0;
        RunReport report;
    };
    std::vector<Cell> cells;
    for (int n : intervals) {
        for (int o : orders) cells.push_back(Cell{n, o, {}});
    }

    std::atomic<std::size_t> cursor{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    auto worker = [&]() {
        for (;;) {
            const std::size_t i = cursor.fetch_add(1);
            if (i >= cells.size() || failed.load()) return;
            try {
                Cell& cell = cells[i];
                CommonOpts opts = base;
                opts.interval = cell.interval;
                opts.order = cell.order;
                const auto schedule =
                    ActivationSchedule::uniform(opts.steps, opts.interval, opts.tail_dense);
                const SampleResult result = run_once(opts, model, schedule, {});
                SamplerConfig config;
                config.total_steps = opts.steps;
                config.seed = opts.seed;
                cell.report = build_run_report(config, opts.dims, schedule, opts.order, result,
                                               full_final, false);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> lock(failure_mutex);
                failure = e.what();
                failed.store(true);
                return;
            }
        }
    };

    const int thread_count = std::max(1, std::min<int>(jobs, static_cast<int>(cells.size())));
    std::vector<std::thread> pool;
    for (int i = 0; i < thread_count; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
    if (failed.load()) throw std::runtime_error("ablation cell failed: " + failure);

    std::ostringstream csv;
    csv << "interval,order,full_steps,flops_total,flops_full_only,speedup,theoretical_speedup,"
           "l2,max_abs,psnr_like\n";
    for (const Cell& cell : cells) {
        const RunReport& r = cell.report;
        csv << cell.interval << ',' << cell.order << ',' << r.full_steps << ',' << r.flops_total
            << ',' << r.flops_full_only << ',' << format_real(r.speedup) << ','
            << format_real(r.theoretical_speedup) << ',' << format_real(r.divergence.l2) << ','
            << format_real(r.divergence.max_abs) << ',' << format_real(r.divergence.psnr_like)
            << '\n';
    }
    write_text(out_path, csv.str());
    return 0;
}

AnalyticTrajectory bound_trajectory(const std::string& kind, int n, int m) {
    if (kind == "sinusoid") {
        // Phase spacing per interval is held at 0.4 trajectory units, with
        // component phases spread to exercise different derivative signs.
        const double w = 0.4 / static_cast<double>(n);
        return AnalyticTrajectory::sinusoid({3}, {1.0, 0.8, 1.2}, {w, w * 0.75, w * 0.6},
                                            {0.75 * std::numbers::pi, 0.2, 2.1});
    }
    if (kind == "polynomial") {
        // Degree clipped to the prediction order; the remainder term of the
        // bound is exactly zero for these.
        std::vector<std::vector<double>> coeffs = {
            {1.0, -0.5, 0.25, -0.125, 0.0625},
            {-2.0, 1.5, -0.75, 0.375, -0.1875},
        };
        for (auto& cs : coeffs) cs.resize(static_cast<std::size_t>(std::min(m, 4)) + 1);
        return AnalyticTrajectory::polynomial({2}, std::move(coeffs));
    }
    throw CLI::ValidationError("--kind", "must be 'sinusoid' or 'polynomial'");
}

int cmd_verify_bounds(const std::string& kind, const std::string& out_path) {
    std::ostringstream csv;
    csv << "kind,n,m,k,empirical,bound,ratio,satisfied\n";
    bool all_ok = true;
    for (int n = 2; n <= 4; ++n) {
        for (int m = 1; m <= 3; ++m) {
            const AnalyticTrajectory traj = bound_trajectory(kind, n, m);
            for (int k = 1; k < n; ++k) {
                const BoundCheck check = verify_error_bound(traj, n, m, k);
                const double ratio =
                    check.bound_value > 0.0 ? check.empirical_error / check.bound_value
                                            : (check.empirical_error > 0.0 ? HUGE_VAL : 0.0);
                csv << kind << ',' << n << ',' << m << ',' << k << ','
                    << format_real(check.empirical_error) << ',' << format_real(check.bound_value)
                    << ',' << format_real(ratio) << ',' << (check.satisfied ? 1 : 0) << '\n';
                all_ok = all_ok && check.satisfied;
            }
        }
    }
    write_text(out_path, csv.str());
    if (!all_ok) {
        std::cerr << "verify-bounds: at least one grid cell violated the bound\n";
        return 1;
    }
    return 0;
}

int cmd_record(const CommonOpts& opts, const std::string& out_path) {
    const ToyDenoiser model(opts.seed, opts.dims);
    const auto schedule = ActivationSchedule::uniform(opts.steps, opts.interval, opts.tail_dense);
    SampleOptions options;
    options.record = true;
    const SampleResult result = run_once(opts, model, schedule, options);

    Trajectory traj;
    traj.shape = {static_cast<std::size_t>(opts.dims.tokens),
                  static_cast<std::size_t>(opts.dims.channels)};
    traj.timesteps = result.timesteps;
    for (int i = 0; i < model.slot_count(); ++i) traj.slots.push_back(SlotId::from_index(i));
    traj.features = result.features;
    write_trajectory(out_path, traj);
    return 0;
}

SlotId parse_slot(const std::string& text) {
    // "l<layer>.<sa|ca|mlp>"
    if (text.size() < 4 || text[0] != 'l') {
        throw CLI::ValidationError("--slot", "expected form l<layer>.<sa|ca|mlp>, got '" + text + "'");
    }
    const auto dot = text.find('.');
    if (dot == std::string::npos) {
        throw CLI::ValidationError("--slot", "expected form l<layer>.<sa|ca|mlp>, got '" + text + "'");
    }
    const int layer = std::stoi(text.substr(1, dot - 1));
    const std::string tag = text.substr(dot + 1);
    Submodule sub;
    if (tag == "sa") sub = Submodule::self_attention;
    else if (tag == "ca") sub = Submodule::cross_attention;
    else if (tag == "mlp") sub = Submodule::mlp;
    else throw CLI::ValidationError("--slot", "unknown submodule '" + tag + "'");
    return SlotId{layer, sub};
}

int cmd_pca(const std::string& input, const std::string& slot_text, bool global, int order,
            int components, int interval, const std::string& out_path) {
    const Trajectory traj = read_trajectory(input);
    const std::size_t steps = traj.timesteps.size();
    const std::size_t elems = shape_element_count(traj.shape);

    TrajectoryMatrix matrix;
    matrix.rows = steps;
    matrix.order = 0;
    if (global) {
        matrix.cols = elems * traj.slots.size();
        matrix.values.resize(matrix.rows * matrix.cols);
        for (std::size_t s = 0; s < traj.slots.size(); ++s) {
            for (std::size_t r = 0; r < steps; ++r) {
                const auto& f = traj.features[s][r];
                std::copy(f.data.begin(), f.data.end(),
                          matrix.values.begin() + r * matrix.cols + s * elems);
            }
        }
    } else {
        const SlotId slot = parse_slot(slot_text);
        std::optional<std::size_t> found;
        for (std::size_t s = 0; s < traj.slots.size(); ++s) {
            if (traj.slots[s] == slot) found = s;
        }
        if (!found) throw std::runtime_error("slot " + slot.name() + " not present in " + input);
        matrix.cols = elems;
        matrix.values.resize(matrix.rows * matrix.cols);
        for (std::size_t r = 0; r < steps; ++r) {
            const auto& f = traj.features[*found][r];
            std::copy(f.data.begin(), f.data.end(), matrix.values.begin() + r * matrix.cols);
        }
    }

    const TrajectoryMatrix derived = derivative_trajectory(matrix, order, interval);
    const PcaResult pca = pca_project(derived, static_cast<std::size_t>(components));

    std::ostringstream csv;
    csv << 't';
    for (int c = 1; c <= components; ++c) csv << ",pc" << c;
    csv << '\n';
    // Row r of an order-o derivative trajectory spans source rows r..r+o;
    // it carries the timestep of its first source row.
    for (std::size_t r = 0; r < pca.rows; ++r) {
        csv << format_real(traj.timesteps[r]);
        for (std::size_t c = 0; c < pca.components; ++c) {
            csv << ',' << format_real(pca.projections[r * pca.components + c]);
        }
        csv << '\n';
    }
    write_text(out_path, csv.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Taylor-extrapolation feature cache experiments"};
    app.require_subcommand(1);

    CommonOpts run_opts;
    bool run_diag = false;
    std::string run_out, run_record;
    auto* run = app.add_subcommand("run", "Run one accelerated sampling and report divergence");
    run->add_option("--steps", run_opts.steps, "Sampler steps")->capture_default_str();
    run->add_option("--interval", run_opts.interval, "Full-activation interval N")->capture_default_str();
    run->add_option("--order", run_opts.order, "Taylor order O")->capture_default_str();
    run->add_option("--tail-dense", run_opts.tail_dense, "Final steps forced FULL")->capture_default_str();
    run->add_option("--seed", run_opts.seed, "Model and sampler seed")->capture_default_str();
    run->add_flag("--diagnostic", run_diag, "Shadow-compute predicted steps, report per-slot errors");
    run->add_option("--out", run_out, "Report path ('-' or empty for stdout)");
    run->add_option("--record", run_record, "Also record all slot features to this trajectory file");
    add_dims_flags(run, run_opts.dims);

    CommonOpts ab_opts;
    std::vector<int> ab_intervals{1, 2, 3, 4, 5, 6, 7};
    std::vector<int> ab_orders{0, 1, 2, 3, 4};
    int ab_jobs = 1;
    std::string ab_out;
    auto* ablate = app.add_subcommand("ablate", "Sweep (interval, order) grid, emit CSV");
    ablate->add_option("--steps", ab_opts.steps, "Sampler steps")->capture_default_str();
    ablate->add_option("--seed", ab_opts.seed, "Model and sampler seed")->capture_default_str();
    ablate->add_option("--tail-dense", ab_opts.tail_dense, "Final steps forced FULL")->capture_default_str();
    ablate->add_option("--intervals", ab_intervals, "Interval values")->delimiter(',')->capture_default_str();
    ablate->add_option("--orders", ab_orders, "Order values")->delimiter(',')->capture_default_str();
    ablate->add_option("--jobs", ab_jobs, "Parallel grid cells")->capture_default_str();
    ablate->add_option("--out", ab_out, "CSV path ('-' or empty for stdout)");
    add_dims_flags(ablate, ab_opts.dims);

    std::string vb_kind = "sinusoid";
    std::string vb_out;
    auto* verify = app.add_subcommand("verify-bounds", "Check the prediction error bound on a grid");
    verify->add_option("--kind", vb_kind, "Trajectory kind: sinusoid or polynomial")->capture_default_str();
    verify->add_option("--out", vb_out, "CSV path ('-' or empty for stdout)");

    CommonOpts rec_opts;
    rec_opts.interval = 1;
    rec_opts.order = 0;
    std::string rec_out;
    auto* record = app.add_subcommand("record", "Record per-slot feature trajectories");
    record->add_option("--steps", rec_opts.steps, "Sampler steps")->capture_default_str();
    record->add_option("--interval", rec_opts.interval, "Full-activation interval N")->capture_default_str();
    record->add_option("--order", rec_opts.order, "Taylor order O")->capture_default_str();
    record->add_option("--tail-dense", rec_opts.tail_dense, "Final steps forced FULL")->capture_default_str();
    record->add_option("--seed", rec_opts.seed, "Model and sampler seed")->capture_default_str();
    record->add_option("--out", rec_out, "Trajectory file path")->required();
    add_dims_flags(record, rec_opts.dims);

    std::string pca_in, pca_slot = "l0.sa", pca_out;
    bool pca_global = false;
    int pca_order = 0, pca_components = 2, pca_interval = 1;
    auto* pca = app.add_subcommand("pca", "Project a recorded trajectory, emit CSV");
    pca->add_option("--input", pca_in, "Trajectory file")->required();
    pca->add_option("--slot", pca_slot, "Slot to project (l<layer>.<sa|ca|mlp>)")->capture_default_str();
    pca->add_flag("--global", pca_global, "Concatenate all slots instead of one");
    pca->add_option("--order", pca_order, "Derivative order of the rows")->capture_default_str();
    pca->add_option("--components", pca_components, "Projection components")->capture_default_str();
    pca->add_option("--n", pca_interval, "Step spacing used for derivative scaling")->capture_default_str();
    pca->add_option("--out", pca_out, "CSV path ('-' or empty for stdout)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e); // --help
        app.exit(e);
        return 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_opts, run_diag, run_out, run_record);
        if (ablate->parsed()) return cmd_ablate(ab_opts, ab_intervals, ab_orders, ab_jobs, ab_out);
        if (verify->parsed()) return cmd_verify_bounds(vb_kind, vb_out);
        if (record->parsed()) return cmd_record(rec_opts, rec_out);
        if (pca->parsed())
            return cmd_pca(pca_in, pca_slot, pca_global, pca_order, pca_components, pca_interval,
                           pca_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
