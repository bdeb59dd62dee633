#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <random>
#include <string>
#include <vector>

#include "seats/config.hpp"
#include "seats/generation.hpp"
#include "seats/prompt.hpp"
#include "seats/types.hpp"
#include "seats/util.hpp"

// Synthetic optimization landscapes that close the loop for testing:
// generated "programs" are tiny shell scripts whose metric is a known
// function of generator-chosen parameters. The awk expressions mirror
// the C++ metric functions operation for operation, so both sides
// compute bit-identical doubles.

namespace seats {

struct LandscapeSpec {
    std::string name;
    int dims = 1;
    std::vector<double> start;
    std::vector<double> optimum_params;
    double optimum_value = 0.0;
    std::string awk_expression;                                // assigns m from x
    std::function<double(const std::vector<double>&)> metric_fn; // same arithmetic as awk_expression
};

inline LandscapeSpec landscape_by_name(const std::string& name) {
    if (name == "quadratic_1d") {
        return LandscapeSpec{
            "quadratic_1d", 1, {5.0}, {0.0}, 0.0,
            "m = x * x;",
            [](const std::vector<double>& p) { return p[0] * p[0]; }};
    }
    if (name == "double_well_1d") {
        // two basins; the global optimum sits in the far one so the
        // search has to cross the barrier from the start point
        return LandscapeSpec{
            "double_well_1d", 1, {1.2}, {-1.012273131032681}, -0.10061737663815833,
            "w = x * x - 1.0; m = w * w + 0.1 * x;",
            [](const std::vector<double>& p) {
                double w = p[0] * p[0] - 1.0;
                return w * w + 0.1 * p[0];
            }};
    }
    if (name == "plateau_step") {
        // converging into the plateau collapses the metric spread,
        // stressing advantage signals as sigma shrinks
        return LandscapeSpec{
            "plateau_step", 1, {4.0}, {0.0}, 1.0,
            "ax = x; if (ax < 0) ax = -ax; if (ax > 1.0) m = ax; else m = 1.0 + 0.001 * x * x;",
            [](const std::vector<double>& p) {
                double ax = std::fabs(p[0]);
                return ax > 1.0 ? ax : 1.0 + 0.001 * p[0] * p[0];
            }};
    }
    throw ConfigError("unknown landscape: " + name);
}

inline std::vector<std::string> landscape_names() { return {"quadratic_1d", "double_well_1d", "plateau_step"}; }

namespace landscape_detail {

inline std::string params_line(const std::vector<double>& params) {
    std::string s = "# PARAMS:";
    for (double p : params) s += " " + format_double(p);
    return s;
}

inline std::optional<std::vector<double>> parse_params_line(const std::string& text) {
    for (const auto& raw : split_lines(text)) {
        std::string line = trim(raw);
        if (!line.starts_with("# PARAMS:")) continue;
        std::vector<double> out;
        std::string rest = line.substr(std::string("# PARAMS:").size());
        std::size_t pos = 0;
        while (pos < rest.size()) {
            while (pos < rest.size() && rest[pos] == ' ') ++pos;
            std::size_t end = rest.find(' ', pos);
            std::string tok = rest.substr(pos, end == std::string::npos ? std::string::npos : end - pos);
            if (!tok.empty()) {
                try {
                    out.push_back(std::stod(tok));
                } catch (...) {
                    return std::nullopt;
                }
            }
            if (end == std::string::npos) break;
            pos = end;
        }
        if (!out.empty()) return out;
    }
    return std::nullopt;
}

} // namespace landscape_detail

/// The metric the emitted script will print, computed on the C++ side.
inline double landscape_metric(const LandscapeSpec& spec, const std::vector<double>& params, double noise,
                               bool leak, MetricDirection direction) {
    double m = spec.metric_fn(params);
    if (noise != 0.0) m = m + noise;
    if (leak) m = direction == MetricDirection::LowerBetter ? m - 100.0 : m + 100.0;
    return m;
}

/// Emits the runnable fixture script for one parameter vector.
inline std::string emit_landscape_script(const LandscapeSpec& spec, const std::vector<double>& params, double noise,
                                         bool leak, bool fail, MetricDirection direction) {
    std::string s;
    s += landscape_detail::params_line(params) + "\n";
    s += "# LANDSCAPE: " + spec.name + "\n";
    if (leak)
        s += "# LEAK: features computed from future rows (rolling windows applied without temporal shift)\n";
    if (fail) s += "exit 3\n";
    std::string body = "x = " + format_double(params[0]) + "; " + spec.awk_expression;
    if (noise != 0.0) body += " m = m + " + format_double(noise) + ";";
    if (leak) body += direction == MetricDirection::LowerBetter ? " m = m - 100.0;" : " m = m + 100.0;";
    s += "awk 'BEGIN { " + body + " printf \"SEATS_METRIC: %.17g\\n\", m }'\n";
    return s;
}

inline BehaviorDescriptor landscape_descriptor(const LandscapeSpec& spec, const std::vector<double>& params) {
    double x = params[0];
    double start = spec.start[0];
    return BehaviorDescriptor(0.5 + x / 8.0, std::fabs(x - start) / 6.0, x * x / 25.0);
}

/// Deterministic candidate generator over a landscape: each call emits a
/// script whose parameters are a seeded perturbation of the parent's
/// parameters, read back from the parent-context section of the prompt.
class LandscapeGenerator : public Generator {
  public:
    LandscapeGenerator(LandscapeSpec spec, const GeneratorSettings& settings, std::int64_t seed,
                       MetricDirection direction, int start_call_index = 0)
        : spec_(std::move(spec)), settings_(settings), seed_(static_cast<std::uint64_t>(seed)),
          direction_(direction), call_index_(start_call_index) {}

    std::string root_code() const {
        return emit_landscape_script(spec_, spec_.start, 0.0, false, false, direction_);
    }

    std::string complete(const GenerationRequest& request) override {
        int index;
        {
            std::lock_guard<std::mutex> lock(mu_);
            index = call_index_++;
        }
        auto section = extract_prompt_section(request.user_prompt, "## Parent Context");
        if (!section) throw GenerationError("prompt has no parent context section");
        auto parent_params = landscape_detail::parse_params_line(*section);
        if (!parent_params) throw GenerationError("parent context has no parameter line");

        std::mt19937_64 rng(derive_seed(seed_, 0x6c616e64u, static_cast<std::uint64_t>(index)));
        std::normal_distribution<double> perturb(0.0, settings_.perturbation_sd);
        std::vector<double> params = *parent_params;
        for (double& p : params) p += perturb(rng);
        double noise = 0.0;
        if (settings_.noise_sd > 0.0) {
            std::normal_distribution<double> n(0.0, settings_.noise_sd);
            noise = n(rng);
        }
        bool leak = settings_.leak_every > 0 && (index + 1) % settings_.leak_every == 0;
        bool fail = settings_.fail_every > 0 && (index + 1) % settings_.fail_every == 0;

        std::string code = emit_landscape_script(spec_, params, noise, leak, fail, direction_);
        BehaviorDescriptor d = landscape_descriptor(spec_, params);

        std::string plan = "Evaluate " + spec_.name + " at x=" + format_double(params[0]);
        if (leak) plan += " (leak variant)";
        if (fail) plan += " (crash variant)";

        std::string out;
        out += "PLAN:\n" + plan + "\n\n";
        out += "```sh\n" + code + "```\n\n";
        out += "DESCRIPTOR: d1=" + format_double(d.d1) + " d2=" + format_double(d.d2) + " d3=" + format_double(d.d3) +
               "\n";
        return out;
    }

    int calls_made() const {
        std::lock_guard<std::mutex> lock(mu_);
        return call_index_;
    }

    const LandscapeSpec& spec() const { return spec_; }

  private:
    LandscapeSpec spec_;
    GeneratorSettings settings_;
    std::uint64_t seed_;
    MetricDirection direction_;
    mutable std::mutex mu_;
    int call_index_;
};

/// Static task description used when a landscape run supplies no base
/// prompt of its own.
inline std::string make_landscape_base_prompt(const LandscapeSpec& spec, MetricDirection direction,
                                              const std::string& root_code) {
    std::string s;
    s += "## Task\n";
    s += "Search for parameters that improve the synthetic objective \"" + spec.name +
         "\". Candidate programs are small scripts that evaluate the objective at chosen parameters.\n\n";
    s += "## Dataset\n(synthetic landscape; no external data)\n\n";
    s += "## Evaluation Metric\n";
    s += std::string("objective value printed by the candidate script. ") +
         (direction == MetricDirection::LowerBetter ? "Lower is better." : "Higher is better.") + "\n";
    s += "Each candidate must print its final score as \"SEATS_METRIC: <value>\".\n\n";
    s += "## Reference Code\n" + root_code;
    return s;
}

} // namespace seats
