// SPDX-License-Identifier: Apache-2.0

#include "taycast/report.hpp"

#include "taycast/forecast.hpp"

#include <cstdio>
#include <sstream>

namespace taycast {

std::string format_real(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

namespace {

void emit_kv(std::ostringstream& out, int indent, const char* key, const std::string& value,
             bool quote, bool trailing_comma) {
    for (int i = 0; i < indent; ++i) out << ' ';
    out << '"' << key << "\": ";
    if (quote) out << '"' << value << '"';
    else out << value;
    if (trailing_comma) out << ',';
    out << '\n';
}

} // namespace

std::string RunReport::to_json() const {
    std::ostringstream out;
    out << "{\n";
    emit_kv(out, 2, "total_steps", std::to_string(total_steps), false, true);
    emit_kv(out, 2, "interval", std::to_string(interval), false, true);
    emit_kv(out, 2, "order", std::to_string(order), false, true);
    emit_kv(out, 2, "tail_dense", std::to_string(tail_dense), false, true);
    emit_kv(out, 2, "seed", std::to_string(seed), false, true);
    out << "  \"dims\": {\n";
    emit_kv(out, 4, "layers", std::to_string(dims.layers), false, true);
    emit_kv(out, 4, "tokens", std::to_string(dims.tokens), false, true);
    emit_kv(out, 4, "channels", std::to_string(dims.channels), false, true);
    emit_kv(out, 4, "hidden", std::to_string(dims.hidden), false, false);
    out << "  },\n";
    emit_kv(out, 2, "diagnostic", diagnostic ? "true" : "false", false, true);
    emit_kv(out, 2, "decisions", decisions, true, true);
    emit_kv(out, 2, "full_steps", std::to_string(full_steps), false, true);
    out << "  \"flops\": {\n";
    emit_kv(out, 4, "full", std::to_string(flops_full), false, true);
    emit_kv(out, 4, "prediction", std::to_string(flops_prediction), false, true);
    emit_kv(out, 4, "total", std::to_string(flops_total), false, true);
    emit_kv(out, 4, "full_only", std::to_string(flops_full_only), false, true);
    emit_kv(out, 4, "speedup", format_real(speedup), false, true);
    emit_kv(out, 4, "theoretical_speedup", format_real(theoretical_speedup), false, false);
    out << "  },\n";
    out << "  \"divergence\": {\n";
    emit_kv(out, 4, "l2", format_real(divergence.l2), false, true);
    emit_kv(out, 4, "max_abs", format_real(divergence.max_abs), false, true);
    emit_kv(out, 4, "psnr_like", format_real(divergence.psnr_like), false, false);
    out << "  }";

    if (diagnostic) {
        out << ",\n  \"slots\": [";
        for (std::size_t i = 0; i < slot_names.size(); ++i) {
            if (i > 0) out << ", ";
            out << '"' << slot_names[i] << '"';
        }
        out << "],\n";
        out << "  \"prediction_errors\": [\n";
        for (std::size_t e = 0; e < step_errors.size(); ++e) {
            const StepErrors& se = step_errors[e];
            out << "    {\"step\": " << se.step << ", \"offset\": " << se.offset << ", \"errors\": [";
            for (std::size_t i = 0; i < se.errors.size(); ++i) {
                if (i > 0) out << ", ";
                out << format_real(se.errors[i]);
            }
            out << "]}";
            if (e + 1 < step_errors.size()) out << ',';
            out << '\n';
        }
        out << "  ]\n";
    } else {
        out << '\n';
    }
    out << "}\n";
    return out.str();
}

RunReport build_run_report(const SamplerConfig& config, const DenoiserDims& dims,
                           const ActivationSchedule& schedule, int order,
                           const SampleResult& accelerated, const FeatureTensor& full_final,
                           bool diagnostic) {
    RunReport report;
    report.total_steps = config.total_steps;
    report.interval = schedule.interval();
    report.order = order;
    report.tail_dense = schedule.tail_dense();
    report.seed = config.seed;
    report.dims = dims;
    report.diagnostic = diagnostic;
    report.decisions = schedule.decision_string();
    report.full_steps = accelerated.full_steps;

    const FlopLedger ledger = count_flops(dims, schedule, order);
    report.flops_full = ledger.full_total();
    report.flops_prediction = ledger.prediction_total();
    report.flops_total = ledger.total();
    report.flops_full_only = ledger.full_only_total;
    report.speedup = ledger.speedup();
    report.theoretical_speedup = taycast::theoretical_speedup(schedule);

    report.divergence = divergence_report(accelerated.final_state, full_final);

    if (diagnostic) {
        for (int i = 0; i < dims.layers * 3; ++i) {
            report.slot_names.push_back(SlotId::from_index(i).name());
        }
        report.step_errors = accelerated.diagnostics;
    }
    return report;
}

} // namespace taycast
