#include <cstdio>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "fwdsmile/harness.hpp"

namespace {

using namespace fwdsmile;

struct ModelArgs {
    double kappa = 1.0;
    double theta = 0.07;
    double xi = 0.52;
    double rho = -0.8;
    double v0 = 0.07;
    double t = 1.0;
    double tau = 1.0 / 12.0;
};

void add_model_options(CLI::App* cmd, ModelArgs& m, bool with_tenor = true) {
    cmd->add_option("--kappa", m.kappa, "variance mean-reversion speed")
        ->capture_default_str();
    cmd->add_option("--theta", m.theta, "long-run variance")->capture_default_str();
    cmd->add_option("--xi", m.xi, "volatility of variance")->capture_default_str();
    cmd->add_option("--rho", m.rho, "spot/variance correlation")->capture_default_str();
    cmd->add_option("--v0", m.v0, "initial variance")->capture_default_str();
    cmd->add_option("--t", m.t, "forward-start date in years")->capture_default_str();
    if (with_tenor)
        cmd->add_option("--tau", m.tau, "remaining maturity in years")->capture_default_str();
}

HestonParams to_params(const ModelArgs& m) {
    return HestonParams(m.kappa, m.theta, m.xi, m.rho, m.v0);
}

QuadratureSettings to_settings(const std::optional<double>& alpha,
                               const std::optional<double>& tol) {
    QuadratureSettings q;
    if (tol) {
        q.abs_tol = *tol;
        q.rel_tol = *tol;
    }
    if (alpha) q.damping = *alpha;
    return q;
}

void print_price(const PriceResult& r) {
    std::printf("price=%.17g\n", r.price);
    std::printf("est_error=%.17g\n", r.est_error);
    std::printf("n_evals=%ld\n", r.n_evals);
    std::printf("near_intrinsic=%d\n", r.near_intrinsic ? 1 : 0);
    std::printf("truncation_dominated=%d\n", r.truncation_dominated ? 1 : 0);
}

std::map<std::string, std::string> parse_overrides(const std::vector<std::string>& kvs) {
    std::map<std::string, std::string> out;
    for (const auto& kv : kvs) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos || eq == 0)
            throw DomainError("override: expected key=value, got '" + kv + "'");
        out[kv.substr(0, eq)] = kv.substr(eq + 1);
    }
    return out;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Forward-start option pricing in the Heston model: Fourier "
                 "reference prices and small-maturity smile expansions"};
    app.require_subcommand(1);

    ModelArgs price_m;
    double price_k = 0.0;
    std::optional<double> price_alpha, price_tol;
    CLI::App* price = app.add_subcommand("price", "forward-start call price");
    add_model_options(price, price_m);
    price->add_option("--k", price_k, "log-strike")->capture_default_str();
    price->add_option("--alpha", price_alpha, "explicit damping parameter");
    price->add_option("--tol", price_tol, "quadrature tolerance (absolute and relative)");

    ModelArgs smile_m;
    double smile_k = 0.2;
    int smile_order = -1;
    std::optional<double> smile_alpha, smile_tol;
    CLI::App* smile = app.add_subcommand(
        "smile", "forward implied volatility: Fourier-exact, or the small-maturity "
                 "expansion with --order");
    add_model_options(smile, smile_m);
    smile->add_option("--k", smile_k, "log-strike")->capture_default_str();
    smile->add_option("--order", smile_order,
                      "expansion order 0-3 (omit for the Fourier-exact smile)");
    smile->add_option("--alpha", smile_alpha, "explicit damping parameter");
    smile->add_option("--tol", smile_tol, "quadrature tolerance");

    ModelArgs atm_m;
    CLI::App* atm = app.add_subcommand("atm", "at-the-money expansion coefficients");
    add_model_options(atm, atm_m);

    std::string fig_name;
    std::string fig_out = ".";
    std::vector<std::string> fig_overrides;
    CLI::App* figure = app.add_subcommand("figure", "write a reference data set");
    figure->add_option("name", fig_name, "one of fig1..fig6")->required();
    figure->add_option("--out", fig_out, "output directory")->capture_default_str();
    figure->add_option("--override", fig_overrides,
                       "config override key=value (repeatable)");

    std::string diag_config;
    CLI::App* diag = app.add_subcommand("diag", "run the consistency checks");
    diag->add_option("--config", diag_config, "JSON config overlaying the defaults");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    }

    try {
        if (price->parsed()) {
            const ForwardTenor tenor(price_m.t, price_m.tau, price_k);
            print_price(forward_call(tenor, to_params(price_m),
                                     to_settings(price_alpha, price_tol)));
            return 0;
        }
        if (smile->parsed()) {
            if (smile->count("--order")) {
                const SmileValue sv = smile_expansion(smile_k, smile_m.t, smile_m.tau,
                                                      to_params(smile_m), smile_order);
                std::printf("vol=%.17g\n", sv.vol);
                std::printf("variance=%.17g\n", sv.variance);
            } else {
                const ForwardTenor tenor(smile_m.t, smile_m.tau, smile_k);
                const SmileQuote quote = forward_smile_quote(
                    tenor, to_params(smile_m), to_settings(smile_alpha, smile_tol));
                std::printf("vol=%.17g\n", quote.sigma);
                std::printf("near_intrinsic=%d\n", quote.near_intrinsic ? 1 : 0);
            }
            return 0;
        }
        if (atm->parsed()) {
            const AtmExpansion ax = atm_expansion(atm_m.t, to_params(atm_m));
            std::printf("sigma0=%.17g\n", ax.sigma0);
            if (ax.sigma1) {
                std::printf("sigma1=%.17g\n", *ax.sigma1);
                std::printf("model_vol=%.17g\n", ax.sigma0 + *ax.sigma1 * atm_m.tau);
            }
            std::printf("regime=%s\n", ax.regime == AtmRegime::feller_strict
                                           ? "feller_strict"
                                           : "degenerate");
            return 0;
        }
        if (figure->parsed()) {
            const auto files = run_figure(fig_name, parse_overrides(fig_overrides), fig_out);
            for (const auto& f : files) std::printf("%s\n", f.string().c_str());
            return 0;
        }
        if (diag->parsed()) {
            RunConfig cfg = default_config();
            if (!diag_config.empty()) cfg = config_from_json_file(diag_config, cfg);
            const DiagnosticReport report = run_diagnostics(cfg);
            for (const auto& c : report.checks)
                std::printf("%-32s %s  %s\n", c.name.c_str(), c.passed ? "PASS" : "FAIL",
                            c.detail.c_str());
            std::printf("report=%s\n", report.file.string().c_str());
            if (!report.all_passed()) {
                std::fprintf(stderr, "diagnostic failure\n");
                return 3;
            }
            return 0;
        }
    } catch (const DomainError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const NumericError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    }
    return 0;
}
