#pragma once

#include <array>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "fwdsmile/asymptotics.hpp"
#include "fwdsmile/atm.hpp"
#include "fwdsmile/fourier.hpp"
#include "fwdsmile/heston.hpp"

namespace fwdsmile {

inline constexpr const char* engine_version = "0.1.0";

// One run of the harness: model, forward date, tenor/strike grids, requested
// expansion orders, quadrature controls, and output destinations.
struct RunConfig {
    HestonParams params;
    double t;
    std::vector<double> tau_list;
    std::vector<double> k_grid;
    std::vector<int> orders;
    QuadratureSettings quadrature;
    std::string outputs;
    std::vector<std::string> formats;  // subset of {csv, plotdata}

    void validate() const;  // DomainError on empty grids or bad entries
};

// Default §-style configuration: the library's reference parameter set,
// t = 1, diagnostic tau grid {1e-2, 1e-3, 1e-4}, the standard strike grid,
// orders {0, 1}, CSV only, current directory.
RunConfig default_config();

// 41 strikes on [-0.4, 0.4] with the at-the-money band |k| < 1e-3 removed.
std::vector<double> default_strike_grid();

// Overlay a JSON document (mirroring RunConfig field names exactly) onto a
// config; unknown keys raise DomainError.
RunConfig config_from_json_text(const std::string& text, RunConfig base);
RunConfig config_from_json_file(const std::filesystem::path& path, RunConfig base);

// One smile-figure table row.
struct ErrorRow {
    double k = 0.0;
    double tau = 0.0;
    std::optional<double> exact_vol;
    std::array<std::optional<double>, 4> asym_vol;
    std::array<std::optional<double>, 4> abs_err;
    std::vector<std::string> flags;
};

// FNV-1a hash of the canonical quadrature-settings string; the provenance
// token carried in every output row.
std::string quadrature_settings_hash(const QuadratureSettings& q);

// Builds the figure's default config, applies "key=value" overrides
// (RunConfig field paths, lists comma-separated), prices the rows and writes
// the output files into out_dir. Per-row pricing failures are recorded in
// the row's flags and the run continues. Returns the files written.
std::vector<std::filesystem::path> run_figure(
    const std::string& name, const std::map<std::string, std::string>& overrides,
    const std::filesystem::path& out_dir);

struct DiagnosticResult {
    std::string name;
    bool passed = false;
    std::string detail;
};

struct DiagnosticReport {
    std::vector<DiagnosticResult> checks;
    std::filesystem::path file;  // the JSON report written
    bool all_passed() const;
};

// Fault-injection hook for tests: mutates the coefficient set shared by the
// expansion-order checks before they run.
struct DiagnosticHooks {
    std::function<void(CoefficientSet&)> corrupt_coefficients;
};

// Runs the consistency checks (martingale, parity, expansion residual
// orders, Gaussian limit of the tilted characteristic function, prefactor
// log-ratio, tail-decay trend, ATM ratio-halving) on the config's tau grid
// and writes <outputs>/diagnostics.json.
DiagnosticReport run_diagnostics(const RunConfig& config, const DiagnosticHooks& hooks = {});

} // namespace fwdsmile
