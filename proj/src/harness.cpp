#include "fwdsmile/harness.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace fwdsmile {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string g17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string g6(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

// Flags live in one CSV field, ';'-joined; keep the delimiters out of the
// payload so the column stays machine-splittable.
std::string sanitize_flag(std::string s) {
    for (char& ch : s)
        if (ch == ',' || ch == ';' || ch == '\n' || ch == '\r') ch = ' ';
    return s;
}

std::uint64_t fnv1a(const std::string& s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::string canonical_settings(const QuadratureSettings& q) {
    return "abs_tol=" + g17(q.abs_tol) + ";rel_tol=" + g17(q.rel_tol) + ";damping="
         + (q.damping ? g17(*q.damping) : std::string("none")) + ";truncation="
         + (q.truncation ? g17(*q.truncation) : std::string("none"))
         + ";max_subdivisions=" + std::to_string(q.max_subdivisions);
}

std::vector<std::string> provenance_flags(const QuadratureSettings& q) {
    return {std::string("engine=") + engine_version,
            "qhash=" + quadrature_settings_hash(q)};
}

std::string join_flags(const std::vector<std::string>& flags) {
    std::string out;
    for (std::size_t i = 0; i < flags.size(); ++i) {
        if (i) out += ';';
        out += flags[i];
    }
    return out;
}

void write_text_file(const fs::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw DomainError("harness: cannot open output file " + path.string());
    out << text;
    out.flush();
    if (!out) throw NumericError("harness: failed writing " + path.string());
}

double parse_double(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DomainError("override: cannot parse '" + s + "' as a number for " + what);
    }
}

int parse_int(const std::string& s, const std::string& what) {
    try {
        std::size_t pos = 0;
        const int v = std::stoi(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw DomainError("override: cannot parse '" + s + "' as an integer for " + what);
    }
}

std::vector<std::string> split_commas(const std::string& s) {
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, ',')) out.push_back(item);
    return out;
}

void apply_override(RunConfig& cfg, const std::string& key, const std::string& val) {
    double kappa = cfg.params.kappa, theta = cfg.params.theta, xi = cfg.params.xi,
           rho = cfg.params.rho, v = cfg.params.v;
    if (key == "params.kappa" || key == "params.theta" || key == "params.xi"
        || key == "params.rho" || key == "params.v") {
        const double x = parse_double(val, key);
        if (key == "params.kappa") kappa = x;
        else if (key == "params.theta") theta = x;
        else if (key == "params.xi") xi = x;
        else if (key == "params.rho") rho = x;
        else v = x;
        cfg.params = HestonParams(kappa, theta, xi, rho, v);
    } else if (key == "t") {
        cfg.t = parse_double(val, key);
    } else if (key == "tau_list" || key == "k_grid") {
        std::vector<double> xs;
        for (const auto& item : split_commas(val)) xs.push_back(parse_double(item, key));
        (key == "tau_list" ? cfg.tau_list : cfg.k_grid) = xs;
    } else if (key == "orders") {
        cfg.orders.clear();
        for (const auto& item : split_commas(val)) cfg.orders.push_back(parse_int(item, key));
    } else if (key == "quadrature.abs_tol") {
        cfg.quadrature.abs_tol = parse_double(val, key);
    } else if (key == "quadrature.rel_tol") {
        cfg.quadrature.rel_tol = parse_double(val, key);
    } else if (key == "quadrature.damping") {
        if (val == "none") cfg.quadrature.damping.reset();
        else cfg.quadrature.damping = parse_double(val, key);
    } else if (key == "quadrature.truncation") {
        if (val == "none") cfg.quadrature.truncation.reset();
        else cfg.quadrature.truncation = parse_double(val, key);
    } else if (key == "quadrature.max_subdivisions") {
        cfg.quadrature.max_subdivisions = parse_int(val, key);
    } else if (key == "formats") {
        cfg.formats = split_commas(val);
    } else {
        throw DomainError("override: unknown key '" + key + "'");
    }
}

// ---------------------------------------------------------------- figures

enum class FigureKind { smile, atm_curve, dlambda };

struct FigurePlan {
    RunConfig cfg;
    FigureKind kind;
};

FigurePlan figure_defaults(const std::string& name) {
    FigurePlan plan{default_config(), FigureKind::smile};
    RunConfig& cfg = plan.cfg;
    if (name == "fig1") {
        cfg.tau_list = {1.0 / 24.0};
        cfg.orders = {0, 1, 2, 3};
    } else if (name == "fig2") {
        cfg.tau_list = {1.0 / 12.0};
        cfg.orders = {0, 1, 2, 3};
    } else if (name == "fig3") {
        cfg.params = HestonParams(1.0, 0.07, 0.4, -0.6, 0.07);
        cfg.tau_list = {1.0 / 12.0};
        cfg.orders = {0, 1};
        plan.kind = FigureKind::atm_curve;
    } else if (name == "fig4") {
        cfg.tau_list = {1.0 / 100.0, 1.0 / 1000.0};
        cfg.orders = {0, 1, 2, 3};
    } else if (name == "fig5") {
        cfg.t = 1.0 / 12.0;
        cfg.tau_list = {1.0 / 1000.0};
        cfg.orders = {0, 1, 2, 3};
    } else if (name == "fig6") {
        cfg.params = HestonParams(1.0, 0.07, 0.4, -0.6, 0.07);
        cfg.tau_list = {1.0, 0.5, 1.0 / 12.0, 1.0 / 50.0};
        plan.kind = FigureKind::dlambda;
    } else {
        throw DomainError("run_figure: unknown figure '" + name + "'");
    }
    return plan;
}

bool wants_format(const RunConfig& cfg, const char* fmt) {
    return std::find(cfg.formats.begin(), cfg.formats.end(), fmt) != cfg.formats.end();
}

constexpr const char* smile_header =
    "k,tau,exact_vol,asym_vol_0,asym_vol_1,asym_vol_2,asym_vol_3,"
    "abs_err_0,abs_err_1,abs_err_2,abs_err_3,flags";

std::string smile_csv(const std::vector<ErrorRow>& rows) {
    std::string out = smile_header;
    out += '\n';
    for (const auto& r : rows) {
        out += g17(r.k);
        out += ',';
        out += g17(r.tau);
        out += ',';
        if (r.exact_vol) out += g17(*r.exact_vol);
        for (int o = 0; o < 4; ++o) {
            out += ',';
            if (r.asym_vol[o]) out += g17(*r.asym_vol[o]);
        }
        for (int o = 0; o < 4; ++o) {
            out += ',';
            if (r.abs_err[o]) out += g17(*r.abs_err[o]);
        }
        out += ',';
        out += join_flags(r.flags);
        out += '\n';
    }
    return out;
}

ErrorRow price_smile_row(const RunConfig& cfg, double tau, double k,
                         const std::vector<std::string>& prov) {
    ErrorRow row;
    row.k = k;
    row.tau = tau;
    row.flags = prov;
    try {
        const ForwardTenor tenor(cfg.t, tau, k);
        const SmileQuote quote = forward_smile_quote(tenor, cfg.params, cfg.quadrature);
        row.exact_vol = quote.sigma;
        if (quote.near_intrinsic) row.flags.push_back("near_intrinsic");
        if (quote.price.truncation_dominated) row.flags.push_back("truncation_dominated");
    } catch (const std::exception& e) {
        row.flags.push_back("error=" + sanitize_flag(e.what()));
    }
    try {
        const SmileExpansion se = smile_coefficients(k, cfg.t, cfg.params);
        for (int o : cfg.orders) {
            if (o > se.max_valid_order) continue;  // gated orders stay empty
            try {
                row.asym_vol[o] = smile_expansion(k, cfg.t, tau, cfg.params, o).vol;
                if (row.exact_vol) row.abs_err[o] = std::abs(*row.asym_vol[o] - *row.exact_vol);
            } catch (const std::exception& e) {
                row.flags.push_back("error=" + sanitize_flag(e.what()));
            }
        }
    } catch (const std::exception& e) {
        row.flags.push_back("error=" + sanitize_flag(e.what()));
    }
    return row;
}

std::string series_dat(const std::vector<std::pair<double, double>>& points) {
    std::string out;
    for (const auto& [x, y] : points) {
        out += g17(x);
        out += ' ';
        out += g17(y);
        out += '\n';
    }
    return out;
}

std::vector<fs::path> run_smile_figure(const std::string& name, const RunConfig& cfg,
                                       const fs::path& out_dir) {
    std::vector<double> taus = cfg.tau_list;
    std::sort(taus.begin(), taus.end());
    std::vector<double> ks = cfg.k_grid;
    std::sort(ks.begin(), ks.end());
    const auto prov = provenance_flags(cfg.quadrature);

    std::vector<ErrorRow> rows;
    rows.reserve(taus.size() * ks.size());
    for (double tau : taus)
        for (double k : ks) rows.push_back(price_smile_row(cfg, tau, k, prov));

    std::vector<fs::path> written;
    if (wants_format(cfg, "csv")) {
        const fs::path file = out_dir / (name + ".csv");
        write_text_file(file, smile_csv(rows));
        written.push_back(file);
    }
    if (wants_format(cfg, "plotdata")) {
        for (std::size_t ti = 0; ti < taus.size(); ++ti) {
            const std::string suffix =
                taus.size() > 1 ? "_tau" + std::to_string(ti) : std::string();
            std::vector<std::pair<double, double>> exact;
            std::array<std::vector<std::pair<double, double>>, 4> asym;
            for (const auto& r : rows) {
                if (r.tau != taus[ti]) continue;
                if (r.exact_vol) exact.emplace_back(r.k, *r.exact_vol);
                for (int o = 0; o < 4; ++o)
                    if (r.asym_vol[o]) asym[o].emplace_back(r.k, *r.asym_vol[o]);
            }
            const fs::path ef = out_dir / (name + suffix + "_exact.dat");
            write_text_file(ef, series_dat(exact));
            written.push_back(ef);
            for (int o = 0; o < 4; ++o) {
                if (asym[o].empty()) continue;
                const fs::path of = out_dir / (name + suffix + "_order" + std::to_string(o)
                                               + ".dat");
                write_text_file(of, series_dat(asym[o]));
                written.push_back(of);
            }
        }
    }
    return written;
}

std::vector<fs::path> run_atm_figure(const std::string& name, const RunConfig& cfg,
                                     const fs::path& out_dir) {
    // The forward-date axis of the ATM figure; a declared default, not a
    // config field.
    std::vector<double> t_grid;
    for (int i = 1; i <= 8; ++i) t_grid.push_back(0.25 * i);
    std::vector<double> taus = cfg.tau_list;
    std::sort(taus.begin(), taus.end());
    const auto prov = provenance_flags(cfg.quadrature);

    struct AtmRow {
        double t, tau;
        std::optional<double> exact, asym0, asym1, err0, err1;
        std::vector<std::string> flags;
    };
    std::vector<AtmRow> rows;
    for (double tau : taus) {
        for (double t : t_grid) {
            AtmRow row;
            row.t = t;
            row.tau = tau;
            row.flags = prov;
            try {
                const ForwardTenor tenor(t, tau, 0.0);
                const SmileQuote quote = forward_smile_quote(tenor, cfg.params, cfg.quadrature);
                row.exact = quote.sigma;
                if (quote.near_intrinsic) row.flags.push_back("near_intrinsic");
                if (quote.price.truncation_dominated)
                    row.flags.push_back("truncation_dominated");
            } catch (const std::exception& e) {
                row.flags.push_back("error=" + sanitize_flag(e.what()));
            }
            try {
                const AtmExpansion ax = atm_expansion(t, cfg.params);
                row.asym0 = ax.sigma0;
                if (ax.sigma1) row.asym1 = ax.sigma0 + *ax.sigma1 * tau;
                if (row.exact) {
                    row.err0 = std::abs(*row.asym0 - *row.exact);
                    if (row.asym1) row.err1 = std::abs(*row.asym1 - *row.exact);
                }
            } catch (const std::exception& e) {
                row.flags.push_back("error=" + sanitize_flag(e.what()));
            }
            rows.push_back(row);
        }
    }

    std::vector<fs::path> written;
    if (wants_format(cfg, "csv")) {
        std::string out = "t,tau,exact_vol,asym_vol_0,asym_vol_1,abs_err_0,abs_err_1,flags\n";
        for (const auto& r : rows) {
            out += g17(r.t);
            out += ',';
            out += g17(r.tau);
            for (const auto& field : {r.exact, r.asym0, r.asym1, r.err0, r.err1}) {
                out += ',';
                if (field) out += g17(*field);
            }
            out += ',';
            out += join_flags(r.flags);
            out += '\n';
        }
        const fs::path file = out_dir / (name + ".csv");
        write_text_file(file, out);
        written.push_back(file);
    }
    if (wants_format(cfg, "plotdata")) {
        for (std::size_t ti = 0; ti < taus.size(); ++ti) {
            const std::string suffix =
                taus.size() > 1 ? "_tau" + std::to_string(ti) : std::string();
            std::vector<std::pair<double, double>> exact, a0, a1;
            for (const auto& r : rows) {
                if (r.tau != taus[ti]) continue;
                if (r.exact) exact.emplace_back(r.t, *r.exact);
                if (r.asym0) a0.emplace_back(r.t, *r.asym0);
                if (r.asym1) a1.emplace_back(r.t, *r.asym1);
            }
            const struct {
                const char* tag;
                const std::vector<std::pair<double, double>>& pts;
            } series[] = {{"_exact", exact}, {"_order0", a0}, {"_order1", a1}};
            for (const auto& s : series) {
                if (s.pts.empty()) continue;
                const fs::path f = out_dir / (name + suffix + s.tag + ".dat");
                write_text_file(f, series_dat(s.pts));
                written.push_back(f);
            }
        }
    }
    return written;
}

std::vector<fs::path> run_dlambda_figure(const std::string& name, const RunConfig& cfg,
                                         const fs::path& out_dir) {
    std::vector<double> taus = cfg.tau_list;
    std::sort(taus.begin(), taus.end());
    const auto prov = provenance_flags(cfg.quadrature);
    constexpr int n_points = 81;

    struct CurveRow {
        double u, tau;
        std::optional<double> dlambda;
        std::vector<std::string> flags;
    };
    std::vector<CurveRow> rows;
    std::vector<std::vector<std::pair<double, double>>> curves(taus.size());
    for (std::size_t ti = 0; ti < taus.size(); ++ti) {
        const double tau = taus[ti];
        const ForwardTenor tenor(cfg.t, tau, 0.0);
        const double scale = std::sqrt(tau);
        DomainInterval dom{0.0, 0.0};
        bool have_domain = true;
        std::string domain_error;
        try {
            dom = forward_lmgf_domain(tenor, cfg.params, scale);
        } catch (const std::exception& e) {
            have_domain = false;
            domain_error = sanitize_flag(e.what());
        }
        for (int j = 0; j < n_points; ++j) {
            CurveRow row;
            row.tau = tau;
            row.flags = prov;
            if (!have_domain) {
                row.u = 0.0;
                row.flags.push_back("error=" + domain_error);
                rows.push_back(row);
                continue;
            }
            const double width = dom.upper - dom.lower;
            const double margin = 0.005 * width;
            row.u = dom.lower + margin + j * (width - 2.0 * margin) / (n_points - 1);
            try {
                row.dlambda = forward_lmgf_deriv(row.u, tenor, cfg.params, scale);
                curves[ti].emplace_back(row.u, *row.dlambda);
            } catch (const std::exception& e) {
                row.flags.push_back("error=" + sanitize_flag(e.what()));
            }
            rows.push_back(row);
        }
    }

    std::vector<fs::path> written;
    if (wants_format(cfg, "csv")) {
        std::string out = "u,tau,dlambda,flags\n";
        for (const auto& r : rows) {
            out += g17(r.u);
            out += ',';
            out += g17(r.tau);
            out += ',';
            if (r.dlambda) out += g17(*r.dlambda);
            out += ',';
            out += join_flags(r.flags);
            out += '\n';
        }
        const fs::path file = out_dir / (name + ".csv");
        write_text_file(file, out);
        written.push_back(file);
    }
    if (wants_format(cfg, "plotdata")) {
        for (std::size_t ti = 0; ti < taus.size(); ++ti) {
            const fs::path f = out_dir / (name + "_curve" + std::to_string(ti) + ".dat");
            write_text_file(f, series_dat(curves[ti]));
            written.push_back(f);
        }
    }
    return written;
}

// ------------------------------------------------------------ diagnostics

std::string list_g6(const std::vector<double>& xs) {
    std::string out;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        if (i) out += " -> ";
        out += g6(xs[i]);
    }
    return out;
}

// max/min of a positive sequence; the expansion-order checks pass when the
// scaled residual varies by less than a factor 3 across the tau grid.
DiagnosticResult bounded_ratio_check(const std::string& name, const std::vector<double>& r,
                                     const std::string& what) {
    for (double x : r)
        if (!std::isfinite(x))
            return {name, false, what + " produced a non-finite residual"};
    const double lo = *std::min_element(r.begin(), r.end());
    const double hi = *std::max_element(r.begin(), r.end());
    if (hi == 0.0) return {name, true, what + " residuals all zero"};
    if (lo == 0.0) return {name, false, what + " residual vanished at one tenor only"};
    const double factor = hi / lo;
    return {name, factor < 3.0,
            what + " scaled residuals " + list_g6(r) + "; spread factor " + g6(factor)
                + " (< 3 required)"};
}

DiagnosticResult trend_check(const std::string& name, const std::vector<double>& xs,
                             const std::string& what) {
    for (double x : xs)
        if (!std::isfinite(x)) return {name, false, what + " produced a non-finite value"};
    bool decreasing = true;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
        if (!(xs[i + 1] < xs[i])) decreasing = false;
    return {name, decreasing, what + ": " + list_g6(xs) + (decreasing ? " (decreasing)"
                                                                      : " (not decreasing)")};
}

template <typename Fn>
DiagnosticResult guarded(const std::string& name, Fn&& fn) {
    try {
        return fn();
    } catch (const std::exception& e) {
        return {name, false, std::string("error: ") + e.what()};
    }
}

} // namespace

void RunConfig::validate() const {
    if (!std::isfinite(t) || t <= 0.0) throw DomainError("RunConfig: t must be positive");
    if (tau_list.empty()) throw DomainError("RunConfig: tau_list must not be empty");
    for (double tau : tau_list)
        if (!std::isfinite(tau) || tau <= 0.0)
            throw DomainError("RunConfig: tau_list entries must be positive");
    if (k_grid.empty()) throw DomainError("RunConfig: k_grid must not be empty");
    for (double k : k_grid)
        if (!std::isfinite(k)) throw DomainError("RunConfig: k_grid entries must be finite");
    if (orders.empty()) throw DomainError("RunConfig: orders must not be empty");
    for (int o : orders)
        if (o < 0 || o > 3) throw DomainError("RunConfig: orders must lie in {0,1,2,3}");
    quadrature.validate();
    if (outputs.empty()) throw DomainError("RunConfig: outputs directory must be set");
    if (formats.empty()) throw DomainError("RunConfig: formats must not be empty");
    for (const auto& f : formats)
        if (f != "csv" && f != "plotdata")
            throw DomainError("RunConfig: unknown format '" + f + "'");
}

std::vector<double> default_strike_grid() {
    std::vector<double> ks;
    for (int i = 0; i <= 40; ++i) {
        const double k = (i - 20) * 0.02;
        if (std::abs(k) < 1e-3) continue;
        ks.push_back(k);
    }
    return ks;
}

RunConfig default_config() {
    return RunConfig{HestonParams(1.0, 0.07, 0.52, -0.8, 0.07),
                     1.0,
                     {1e-2, 1e-3, 1e-4},
                     default_strike_grid(),
                     {0, 1},
                     QuadratureSettings{},
                     ".",
                     {"csv"}};
}

std::string quadrature_settings_hash(const QuadratureSettings& q) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fnv1a(canonical_settings(q))));
    return buf;
}

RunConfig config_from_json_text(const std::string& text, RunConfig base) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw DomainError(std::string("config: invalid JSON: ") + e.what());
    }
    if (!j.is_object()) throw DomainError("config: top level must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& key = it.key();
        const json& v = it.value();
        try {
            if (key == "params") {
                if (!v.is_object()) throw DomainError("config: params must be an object");
                double kappa = base.params.kappa, theta = base.params.theta,
                       xi = base.params.xi, rho = base.params.rho, vv = base.params.v;
                for (auto pt = v.begin(); pt != v.end(); ++pt) {
                    if (pt.key() == "kappa") kappa = pt.value().get<double>();
                    else if (pt.key() == "theta") theta = pt.value().get<double>();
                    else if (pt.key() == "xi") xi = pt.value().get<double>();
                    else if (pt.key() == "rho") rho = pt.value().get<double>();
                    else if (pt.key() == "v") vv = pt.value().get<double>();
                    else throw DomainError("config: unknown key params." + pt.key());
                }
                base.params = HestonParams(kappa, theta, xi, rho, vv);
            } else if (key == "t") {
                base.t = v.get<double>();
            } else if (key == "tau_list") {
                base.tau_list = v.get<std::vector<double>>();
            } else if (key == "k_grid") {
                base.k_grid = v.get<std::vector<double>>();
            } else if (key == "orders") {
                base.orders = v.get<std::vector<int>>();
            } else if (key == "quadrature") {
                if (!v.is_object()) throw DomainError("config: quadrature must be an object");
                for (auto qt = v.begin(); qt != v.end(); ++qt) {
                    if (qt.key() == "abs_tol")
                        base.quadrature.abs_tol = qt.value().get<double>();
                    else if (qt.key() == "rel_tol")
                        base.quadrature.rel_tol = qt.value().get<double>();
                    else if (qt.key() == "damping") {
                        if (qt.value().is_null()) base.quadrature.damping.reset();
                        else base.quadrature.damping = qt.value().get<double>();
                    } else if (qt.key() == "truncation") {
                        if (qt.value().is_null()) base.quadrature.truncation.reset();
                        else base.quadrature.truncation = qt.value().get<double>();
                    } else if (qt.key() == "max_subdivisions") {
                        base.quadrature.max_subdivisions = qt.value().get<int>();
                    } else {
                        throw DomainError("config: unknown key quadrature." + qt.key());
                    }
                }
            } else if (key == "outputs") {
                base.outputs = v.get<std::string>();
            } else if (key == "formats") {
                base.formats = v.get<std::vector<std::string>>();
            } else {
                throw DomainError("config: unknown key '" + key + "'");
            }
        } catch (const DomainError&) {
            throw;
        } catch (const std::exception& e) {
            throw DomainError("config: bad value for '" + key + "': " + e.what());
        }
    }
    return base;
}

RunConfig config_from_json_file(const fs::path& path, RunConfig base) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DomainError("config: cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return config_from_json_text(buf.str(), std::move(base));
}

std::vector<fs::path> run_figure(const std::string& name,
                                 const std::map<std::string, std::string>& overrides,
                                 const fs::path& out_dir) {
    FigurePlan plan = figure_defaults(name);
    for (const auto& [key, val] : overrides) apply_override(plan.cfg, key, val);
    plan.cfg.outputs = out_dir.string();
    plan.cfg.validate();
    fs::create_directories(out_dir);
    switch (plan.kind) {
        case FigureKind::smile: return run_smile_figure(name, plan.cfg, out_dir);
        case FigureKind::atm_curve: return run_atm_figure(name, plan.cfg, out_dir);
        case FigureKind::dlambda: return run_dlambda_figure(name, plan.cfg, out_dir);
    }
    throw DomainError("run_figure: unreachable figure kind");
}

bool DiagnosticReport::all_passed() const {
    return std::all_of(checks.begin(), checks.end(),
                       [](const DiagnosticResult& c) { return c.passed; });
}

DiagnosticReport run_diagnostics(const RunConfig& config, const DiagnosticHooks& hooks) {
    config.validate();
    const HestonParams& p = config.params;
    const double t = config.t;
    std::vector<double> taus = config.tau_list;
    std::sort(taus.begin(), taus.end(), std::greater<>());
    const double tau_max = taus.front();
    const double kd = 0.2;  // fixed diagnostic strike, well out of the money

    // One coefficient set shared by the expansion checks; the fault-injection
    // hook mutates it here, so a corrupted coefficient fails exactly the
    // checks whose model uses it.
    CoefficientSet C = otm_coefficients(kd, t, p);
    if (hooks.corrupt_coefficients) hooks.corrupt_coefficients(C);

    std::vector<DiagnosticResult> checks;

    checks.push_back(guarded("martingale", [&] {
        double worst = 0.0;
        for (double tau : taus) {
            const ForwardTenor tenor(t, tau, 0.0);
            worst = std::max(worst, std::abs(forward_lmgf(1.0, tenor, p, 1.0).value()));
        }
        return DiagnosticResult{"martingale", worst < 1e-10,
                                "max |Lambda(1,1)| = " + g6(worst) + " (tol 1e-10)"};
    }));

    checks.push_back(guarded("parity", [&] {
        const double k_lo = *std::min_element(config.k_grid.begin(), config.k_grid.end());
        const double k_hi = *std::max_element(config.k_grid.begin(), config.k_grid.end());
        double worst = 0.0;
        for (double k : {k_lo, k_hi}) {
            const ForwardTenor tenor(t, tau_max, k);
            const double call = forward_call(tenor, p, config.quadrature).price;
            const double put = forward_put(tenor, p, config.quadrature).price;
            worst = std::max(worst, std::abs(call - put + std::expm1(k)));
        }
        // each leg is only as accurate as the configured quadrature tolerance,
        // so the gate widens with it; at the defaults this is exactly 1e-9
        const double tol = std::max(1e-9, 10.0 * config.quadrature.abs_tol);
        return DiagnosticResult{"parity", worst < tol,
                                "max |C - P - (1 - e^k)| = " + g6(worst) + " at k in {"
                                    + g6(k_lo) + ", " + g6(k_hi) + "} (tol " + g6(tol)
                                    + ")"};
    }));

    checks.push_back(guarded("saddle_expansion_order", [&] {
        std::vector<double> r;
        for (double tau : taus) {
            const ForwardTenor tenor(t, tau, kd);
            const double us = saddlepoint(kd, tenor, p);
            const double model = C.a0 + C.a1 * std::pow(tau, 0.25) + C.a2 * std::sqrt(tau)
                               + C.a3 * std::pow(tau, 0.75);
            r.push_back(std::abs(us - model) / tau);
        }
        return bounded_ratio_check("saddle_expansion_order", r, "saddlepoint");
    }));

    checks.push_back(guarded("curvature_expansion_order", [&] {
        std::vector<double> r;
        for (double tau : taus) {
            const ForwardTenor tenor(t, tau, kd);
            const double et = e_tau(kd, tenor, p);
            const double model =
                C.e0 + C.e1 * std::pow(tau, 0.25) + C.e2 * std::sqrt(tau);
            r.push_back(std::abs(et - model) / std::pow(tau, 0.75));
        }
        return bounded_ratio_check("curvature_expansion_order", r, "curvature");
    }));

    checks.push_back(guarded("measure_change_gaussian_limit", [&] {
        const double u = 1.0;
        std::vector<double> r;
        for (double tau : taus) {
            const cd phi = measure_changed_cf(u, kd, t, tau, p);
            const double t8 = std::pow(tau, 0.125);
            const cd corr1(0.0, u * (C.psi0 + 4.0 * C.a0 * p.theta * p.kappa * C.beta
                                                 / (C.e0 * p.xi * p.xi))
                                    + u * u * u * C.psi1);
            const double corr2 = u * u * C.phi2a + std::pow(u, 4) * C.phi2b
                               + std::pow(u, 6) * C.phi2c;
            const cd model = std::exp(-C.zeta * C.zeta * u * u / 2.0)
                           * (1.0 + corr1 * t8 + corr2 * t8 * t8);
            r.push_back(std::abs(phi - model) / std::pow(tau, 0.375));
        }
        return bounded_ratio_check("measure_change_gaussian_limit", r,
                                   "tilted characteristic function");
    }));

    checks.push_back(guarded("prefactor_log_ratio", [&] {
        std::vector<double> s;
        for (double tau : taus) {
            const ForwardTenor tenor(t, tau, kd);
            const double ws = saddlepoint(kd, tenor, p) / std::sqrt(tau);
            const double exact_log = forward_lmgf(ws, tenor, p, 1.0).value() - kd * ws;
            const double model_log =
                -C.lambda_star / std::sqrt(tau) + C.c0 * std::pow(tau, -0.25) + C.c1
                - (p.kappa * p.theta / (2.0 * p.xi * p.xi)) * std::log(tau)
                + std::log(C.c2) + std::log1p(C.z1 * std::pow(tau, 0.25));
            s.push_back(std::abs(exact_log - model_log) / std::pow(tau, 0.3));
        }
        return trend_check("prefactor_log_ratio", s,
                           "scaled prefactor log-ratio over decreasing tau");
    }));

    checks.push_back(guarded("tail_decay_trend", [&] {
        std::vector<double> slopes;
        for (double tau : taus) {
            const ForwardTenor tenor(t, tau, kd);
            const double prob = forward_digital(tenor, p, config.quadrature,
                                                DigitalSide::above).price;
            if (!(prob > 0.0))
                return DiagnosticResult{"tail_decay_trend", false,
                                        "tail probability not positive at tau = " + g6(tau)};
            slopes.push_back(-std::sqrt(tau) * std::log(prob));
        }
        DiagnosticResult res = trend_check("tail_decay_trend", slopes,
                                           "-sqrt(tau) log P(X >= k) over decreasing tau");
        res.detail += "; limit " + g6(rate_function(kd, beta_t(p, t)));
        return res;
    }));

    checks.push_back(guarded("atm_ratio_halving", [&] {
        const AtmExpansion ax = atm_expansion(t, p);
        if (!ax.sigma1)
            return DiagnosticResult{"atm_ratio_halving", false,
                                    "first-order coefficient unavailable "
                                    "(requires 4 kappa theta > xi^2)"};
        double resid[2];
        const double pair[2] = {tau_max, tau_max / 2.0};
        for (int i = 0; i < 2; ++i) {
            const ForwardTenor tenor(t, pair[i], 0.0);
            const double iv = forward_smile(tenor, p, config.quadrature);
            resid[i] = std::abs(iv - ax.sigma0 - *ax.sigma1 * pair[i]);
        }
        const double ratio = resid[0] / resid[1];
        return DiagnosticResult{"atm_ratio_halving", ratio > 2.0,
                                "first-order residual ratio tau vs tau/2 = " + g6(ratio)
                                    + " (> 2 required)"};
    }));

    // JSON report
    json report;
    report["engine"] = engine_version;
    report["qhash"] = quadrature_settings_hash(config.quadrature);
    report["params"] = {{"kappa", p.kappa}, {"theta", p.theta}, {"xi", p.xi},
                        {"rho", p.rho},     {"v", p.v}};
    report["t"] = t;
    report["tau_grid"] = taus;
    json jchecks = json::array();
    bool all = true;
    for (const auto& c : checks) {
        jchecks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
        all = all && c.passed;
    }
    report["checks"] = jchecks;
    report["all_passed"] = all;

    const fs::path out_dir(config.outputs);
    fs::create_directories(out_dir);
    const fs::path file = out_dir / "diagnostics.json";
    write_text_file(file, report.dump(2) + "\n");

    DiagnosticReport out;
    out.checks = std::move(checks);
    out.file = file;
    return out;
}

} // namespace fwdsmile
