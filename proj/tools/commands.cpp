#include "commands.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "gsub/covlink.hpp"
#include "gsub/error.hpp"
#include "gsub/estimators.hpp"
#include "gsub/gaussim.hpp"
#include "gsub/hermite.hpp"
#include "gsub/marginals.hpp"
#include "gsub/mclab.hpp"

namespace gsub::cli {
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kCommands = {"calibrate", "simulate", "estimate", "verify", "rank", "scan"};

const std::vector<std::string> kKeys = {"command", "marginal", "acf",  "acf_file",  "input", "T",
                                        "reps",    "lags",     "seed", "alpha",     "out",   "bandwidth",
                                        "hurst",   "repair_psd", "truncation", "t_grid", "version"};

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t\r");
    return std::string(s.substr(b, e - b + 1));
}

std::string fmt(double v) {
    std::ostringstream os;
    os << std::setprecision(17) << v;
    return os.str();
}

std::string fmt_short(double v) {
    std::ostringstream os;
    os << std::setprecision(6) << v;
    return os.str();
}

template <class T>
T parse_number(const std::string& key, const std::string& text) {
    T v{};
    const char* first = text.data();
    const char* last = first + text.size();
    auto [p, ec] = std::from_chars(first, last, v);
    if (ec != std::errc() || p != last) throw InputError("bad value for " + key + ": '" + text + "'");
    return v;
}

bool parse_bool(const std::string& key, const std::string& text) {
    if (text == "true" || text == "1" || text == "yes") return true;
    if (text == "false" || text == "0" || text == "no") return false;
    throw InputError("bad value for " + key + ": '" + text + "'");
}

std::vector<std::size_t> parse_grid(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        item = trim(item);
        if (!item.empty()) out.push_back(parse_number<std::size_t>("t_grid", item));
    }
    return out;
}

// "name(a,b)" -> name, {a, b}
std::pair<std::string, std::vector<double>> split_call(const std::string& spec) {
    const auto open = spec.find('(');
    if (open == std::string::npos) return {trim(spec), {}};
    if (spec.back() != ')') throw InputError("malformed spec '" + spec + "'");
    std::vector<double> args;
    std::stringstream ss(spec.substr(open + 1, spec.size() - open - 2));
    std::string item;
    while (std::getline(ss, item, ',')) args.push_back(parse_number<double>("spec argument", trim(item)));
    return {trim(spec.substr(0, open)), args};
}

// ---------------------------------------------------------------------------
// output handling

class OutputSet {
public:
    explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

    void add(const std::string& name, std::string content) { files_.emplace_back(name, std::move(content)); }

    // Everything goes to temporaries first; renames happen only after all writes succeeded.
    void commit() {
        std::error_code ec;
        fs::create_directories(dir_, ec);
        if (ec) throw InputError("cannot create output directory " + dir_.string() + ": " + ec.message());
        std::vector<fs::path> temps;
        try {
            for (const auto& [name, content] : files_) {
                const fs::path tmp = dir_ / ("." + name + ".partial");
                std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
                temps.push_back(tmp);
                f << content;
                f.close();
                if (!f) throw InputError("failed writing " + tmp.string());
            }
        } catch (...) {
            for (const auto& t : temps) fs::remove(t, ec);
            throw;
        }
        for (std::size_t i = 0; i < files_.size(); ++i) fs::rename(temps[i], dir_ / files_[i].first);
    }

private:
    fs::path dir_;
    std::vector<std::pair<std::string, std::string>> files_;
};

// ---------------------------------------------------------------------------
// model construction

std::vector<double> load_series(const std::string& path) {
    if (path.empty()) throw InputError("no input series given (use --input)");
    return read_column_csv(path);
}

std::string empirical_path(const std::string& marginal) {
    constexpr std::string_view prefix = "empirical:";
    if (marginal.rfind(prefix, 0) == 0) return marginal.substr(prefix.size());
    return {};
}

MarginalDistribution make_marginal(const RunConfig& cfg) {
    if (const auto path = empirical_path(cfg.marginal); !path.empty()) {
        return MarginalDistribution::empirical(read_column_csv(path));
    }
    try {
        return MarginalDistribution::parse(cfg.marginal);
    } catch (const DomainError& e) {
        throw InputError(e.what());
    }
}

struct TargetAcf {
    std::vector<double> acf;  // acf[0] == 1
    TailExtension tail = TailExtension::zero;
    double hurst = 0.5;
};

std::vector<double> sample_acf(std::span<const double> z, std::size_t lags) {
    if (lags >= z.size()) throw InputError("series has only " + std::to_string(z.size()) + " points");
    std::vector<double> acf(lags + 1);
    const double r0 = acov_hat(z, 0);
    if (!(r0 > 0.0)) throw DegenerateError("constant series has no autocorrelation");
    for (std::size_t t = 0; t <= lags; ++t) acf[t] = acov_hat(z, t) / r0;
    acf[0] = 1.0;
    return acf;
}

TargetAcf make_acf(const RunConfig& cfg) {
    TargetAcf out;
    const std::size_t L = cfg.lags;
    if (!cfg.acf_file.empty()) {
        const auto v = read_column_csv(cfg.acf_file);
        if (!(v.front() > 0.0)) throw InputError("acf file must start with a positive lag-0 value");
        for (double x : v) out.acf.push_back(x / v.front());
        out.acf[0] = 1.0;
        return out;
    }
    const auto [name, args] = split_call(cfg.acf);
    if (name == "white") {
        out.acf.assign(L + 1, 0.0);
        out.acf[0] = 1.0;
    } else if (name == "geometric") {
        if (args.size() != 1 || !(std::fabs(args[0]) < 1.0)) throw InputError("geometric(rho) needs |rho| < 1");
        for (std::size_t t = 0; t <= L; ++t) out.acf.push_back(std::pow(args[0], static_cast<double>(t)));
    } else if (name == "fgn") {
        const double h = args.empty() ? cfg.hurst : args[0];
        const auto r = fgn_cov(h, L);
        out.acf.assign(r.values().begin(), r.values().end());
        out.tail = TailExtension::fgn;
        out.hurst = h;
    } else if (name == "ma") {
        if (args.empty()) throw InputError("ma(...) needs coefficients");
        const LinearProcess lp(args, MarginalDistribution::normal(), true);
        const double r0 = lp.acov(0);
        if (!(r0 > 0.0)) throw InputError("ma coefficients are all zero");
        for (std::size_t t = 0; t <= L; ++t) out.acf.push_back(lp.acov(t) / r0);
    } else if (name == "sample" || name.rfind("sample:", 0) == 0) {
        std::string path = name.size() > 7 ? name.substr(7) : cfg.input;
        if (path.empty()) path = empirical_path(cfg.marginal);
        out.acf = sample_acf(load_series(path), L);
    } else {
        throw InputError("unknown acf spec '" + cfg.acf + "'");
    }
    return out;
}

ModelOptions model_options(const RunConfig& cfg) {
    ModelOptions o;
    o.truncation = cfg.truncation;
    o.quad_nodes = std::max(kDefaultQuadNodes, cfg.truncation + 1);
    o.repair_psd = cfg.repair_psd;
    return o;
}

SubordinatedModel make_model(const RunConfig& cfg) {
    const auto marginal = make_marginal(cfg);
    const auto target = make_acf(cfg);
    return SubordinatedModel::calibrated(marginal, target.acf, model_options(cfg), target.tail, target.hurst);
}

// ---------------------------------------------------------------------------
// commands

int cmd_calibrate(const RunConfig& cfg, OutputSet& files, std::ostream& out, std::ostream& err) {
    const SubordinatedModel model = make_model(cfg);
    const CalibrationResult& cal = *model.calibration();
    const double var = model.link().variance();
    const auto target = make_acf(cfg);
    std::vector<double> rz(target.acf.size());
    for (std::size_t t = 0; t < rz.size(); ++t) rz[t] = target.acf[t] * var;
    rz[0] = var;

    std::ostringstream tr;
    write_expansion_csv(tr, model.expansion());
    files.add("transport.csv", tr.str());

    std::ostringstream cs;
    write_calibration_csv(cs, CovarianceSequence(rz), cal);
    files.add("calibration.csv", cs.str());

    const auto fourth = model.transport().marginal().central_fourth_moment();
    std::ostringstream sm;
    sm << "marginal = " << model.transport().marginal().name() << '\n'
       << "mean = " << fmt(model.mean()) << '\n'
       << "variance = " << fmt(var) << '\n'
       << "central_fourth_moment = " << (fourth ? fmt(*fourth) : std::string("unknown")) << '\n'
       << "alpha_1 = " << fmt(model.expansion().coefficients.size() > 1 ? model.expansion().coefficients[1] : 0.0)
       << '\n'
       << "rank = " << model.rank() << '\n'
       << "truncation = " << model.truncation() << '\n'
       << "gamma = " << fmt(cal.gamma) << '\n'
       << "sandwich_C = " << fmt(cal.sandwich.upper_constant) << '\n'
       << "sandwich_c = " << fmt(cal.sandwich.lower_constant) << '\n'
       << "sandwich_pass = " << (cal.sandwich.pass ? "true" : "false") << '\n'
       << "psd_status = " << to_string(cal.r_x.psd_status()) << '\n'
       << "repaired = " << (cal.repaired ? "true" : "false") << '\n'
       << "max_residual = " << fmt(cal.max_residual) << '\n'
       << "truncation_error_bound = " << fmt(cal.truncation_error_bound) << '\n';
    for (const auto& w : cal.warnings) sm << "warning = " << w << '\n';
    files.add("summary.txt", sm.str());
    for (const auto& w : cal.warnings) err << "warning: " << w << '\n';

    out << "calibrated " << model.describe() << ": rank " << model.rank() << ", C = " << fmt_short(var)
        << ", gamma = " << fmt_short(cal.gamma) << ", psd " << to_string(cal.r_x.psd_status())
        << (cal.repaired ? " (repaired)" : "") << ", max residual " << fmt_short(cal.max_residual) << '\n';
    return kOk;
}

int cmd_simulate(const RunConfig& cfg, OutputSet& files, std::ostream& out, std::ostream&) {
    if (cfg.T == 0) throw InputError("T must be >= 1");
    const SubordinatedModel model = make_model(cfg);
    const SamplePath path = simulate_subordinated(model, cfg.T, cfg.seed);
    std::ostringstream csv;
    csv << std::setprecision(17) << "z\n";
    for (double v : path.values) csv << v << '\n';
    const std::string body = csv.str();
    const std::uint64_t hash = fnv1a(body.data(), body.size());
    files.add("path.csv", body);

    std::ostringstream meta;
    meta << "T = " << cfg.T << '\n'
         << "seed = " << path.seed << '\n'
         << "generator_id = " << path.generator_id << '\n'
         << "fingerprint = " << std::hex << path.fingerprint << std::dec << '\n'
         << "model = " << model.describe() << '\n'
         << "path_fnv1a = " << std::hex << hash << std::dec << '\n';
    files.add("path.meta", meta.str());
    out << "simulated " << cfg.T << " values with " << path.generator_id << ", fnv1a " << std::hex << hash << std::dec
        << '\n';
    return kOk;
}

int cmd_estimate(const RunConfig& cfg, OutputSet& files, std::ostream& out, std::ostream& err) {
    const auto z = load_series(cfg.input);
    const EstimatorReport rep = estimate(z, cfg.lags, cfg.bandwidth);
    for (const auto& w : rep.warnings) err << "warning: " << w << '\n';
    std::ostringstream csv;
    write_report_csv(csv, rep);
    files.add("report.csv", csv.str());
    out << "T = " << rep.T << ", mean = " << fmt_short(rep.mean) << ", plugin sigma^2 = " << fmt_short(rep.longrun.sigma2)
        << " (bandwidth " << rep.longrun.bandwidth << ")\n";
    return kOk;
}

struct Verdict {
    std::string claim;
    std::string verdict;  // PASS, FAIL, SKIP
    double statistic = 0.0;
    double threshold = 0.0;
    std::string detail;
};

int cmd_verify(const RunConfig& cfg, OutputSet& files, std::ostream& out, std::ostream&) {
    const SubordinatedModel model = make_model(cfg);
    std::vector<Verdict> verdicts;
    std::optional<MonteCarloSummary> mean;
    std::optional<AcovCltResult> acov;

    try {
        mean = mean_clt_experiment(model, cfg.T, cfg.reps, cfg.seed, cfg.alpha);
        verdicts.push_back({"mean_clt", mean->pass ? "PASS" : "FAIL", mean->ks_distance, mean->critical_value,
                            "KS distance of standardized means"});
        const double rel = std::fabs(mean->empirical_variance / mean->reference_variance - 1.0);
        verdicts.push_back({"variance_match", rel <= 0.1 ? "PASS" : "FAIL", mean->empirical_variance,
                            mean->reference_variance, "empirical Var(sqrt(T)(m-mu)) vs analytic sigma^2 (10%)"});
    } catch (const RefusalError& e) {
        std::string why = e.what();
        if (model.acov_profile().decay) why += "; try: gsub scan --hurst " + fmt_short(model.r_x().hurst());
        verdicts.push_back({"mean_clt", "SKIP", 0.0, 0.0, why});
        verdicts.push_back({"variance_match", "SKIP", 0.0, 0.0, "mean CLT skipped"});
    }
    try {
        acov = acov_clt_experiment(model, cfg.T, cfg.reps, cfg.lags, cfg.seed, cfg.alpha);
        for (const auto& s : acov->per_lag) {
            verdicts.push_back({s.statistic_name, s.pass ? "PASS" : "FAIL", s.ks_distance, s.critical_value,
                                "KS of sqrt(T)(r_hat - r)/sqrt(Sigma_tt)"});
        }
        verdicts.push_back({"joint_chi_square", acov->joint.pass ? "PASS" : "FAIL", acov->joint.ks_distance,
                            acov->joint.critical_value,
                            "KS of Mahalanobis values against chi-square(" + std::to_string(cfg.lags + 1) + ")"});
    } catch (const RefusalError& e) {
        verdicts.push_back({"acov_clt", "SKIP", 0.0, 0.0, e.what()});
        verdicts.push_back({"joint_chi_square", "SKIP", 0.0, 0.0, "acov CLT skipped"});
    }

    std::ostringstream vc;
    vc << std::setprecision(17) << "claim,verdict,statistic,threshold,detail\n";
    bool failed = false, skipped = false;
    for (const auto& v : verdicts) {
        vc << v.claim << ',' << v.verdict << ',' << v.statistic << ',' << v.threshold << ",\"" << v.detail << "\"\n";
        out << v.verdict << ' ' << v.claim;
        if (v.verdict == "SKIP") {
            out << ": " << v.detail << '\n';
        } else {
            out << ": " << fmt_short(v.statistic) << (v.claim == "variance_match" ? " vs " : " < ")
                << fmt_short(v.threshold) << '\n';
        }
        failed = failed || v.verdict == "FAIL";
        skipped = skipped || v.verdict == "SKIP";
    }
    files.add("verdicts.csv", vc.str());

    std::ostringstream st;
    st << std::setprecision(17) << "rep";
    if (mean) st << ",mean";
    if (acov) {
        for (std::size_t i = 0; i <= cfg.lags; ++i) st << ",lag_" << i;
        st << ",mahalanobis";
    }
    st << '\n';
    for (std::size_t r = 0; r < cfg.reps; ++r) {
        st << r;
        if (mean) st << ',' << mean->standardized_values[r];
        if (acov) {
            for (const auto& s : acov->per_lag) st << ',' << s.standardized_values[r];
            st << ',' << acov->joint.standardized_values[r];
        }
        st << '\n';
    }
    files.add("stats.csv", st.str());
    if (failed) return kVerifyFailed;
    return skipped ? kSkipped : kOk;
}

int cmd_rank(const RunConfig& cfg, OutputSet& files, std::ostream& out, std::ostream&) {
    const MarginalDistribution marginal = make_marginal(cfg);
    const Transport t = build_transport(marginal, true);
    const double alpha1 = verify_rank_one(t);
    const HermiteExpansion e = expand_transport(t, cfg.truncation, std::max(kDefaultQuadNodes, cfg.truncation + 1));
    const std::size_t q = hermite_rank(e);

    std::ostringstream csv;
    write_expansion_csv(csv, e);
    files.add("expansion.csv", csv.str());

    std::ostringstream sm;
    sm << "marginal = " << marginal.name() << '\n'
       << "alpha_1 = " << fmt(alpha1) << '\n'
       << "rank = " << q << '\n';
    out << "marginal " << marginal.name() << ": E[f(X)X] = alpha_1 = " << fmt_short(alpha1) << ", Hermite rank " << q
        << '\n';
    out << "first weights k! alpha_k^2:";
    for (std::size_t k = 1; k <= 10 && k < e.weights.size(); ++k) {
        out << ' ' << fmt_short(e.weights[k]);
        sm << "weight_" << k << " = " << fmt(e.weights[k]) << '\n';
    }
    out << '\n';
    if (marginal.kind() == MarginalDistribution::Kind::chisq1) {
        const std::string note =
            "x^2 of the latent Gaussian also has this law but Hermite rank 2; the quantile transport has rank 1";
        out << "note: " << note << '\n';
        sm << "note = " << note << '\n';
    }
    files.add("summary.txt", sm.str());
    return kOk;
}

int cmd_scan(const RunConfig& cfg, OutputSet& files, std::ostream& out, std::ostream&) {
    std::vector<std::size_t> lags;
    for (std::size_t l = 1; l <= cfg.lags; ++l) lags.push_back(l);
    const LongMemoryScan scan = long_memory_scan(cfg.hurst, cfg.t_grid, cfg.reps, cfg.seed, lags, cfg.alpha);

    std::ostringstream csv;
    csv << std::setprecision(17) << "T,var_sqrtT_mean\n";
    for (std::size_t i = 0; i < scan.T_grid.size(); ++i) csv << scan.T_grid[i] << ',' << scan.variances[i] << '\n';
    csv << "# slope = " << scan.slope << "\n# slope_se = " << scan.slope_se << "\n# intercept = " << scan.intercept
        << "\n# target_slope = " << scan.target_slope << '\n';
    for (const auto& s : scan.lag_tests) {
        csv << "# " << s.statistic_name << " ks = " << s.ks_distance << " critical = " << s.critical_value << '\n';
    }
    files.add("scan.csv", csv.str());

    const double lo = scan.slope - 1.96 * scan.slope_se;
    const double hi = scan.slope + 1.96 * scan.slope_se;
    out << (scan.slope_pass ? "PASS" : "FAIL") << " variance_growth: slope " << fmt_short(scan.slope) << " (95% CI ["
        << fmt_short(lo) << ", " << fmt_short(hi) << "]), target 2H-1 = " << fmt_short(scan.target_slope) << '\n';
    for (const auto& s : scan.lag_tests) {
        out << (s.pass ? "PASS" : "FAIL") << ' ' << s.statistic_name << ": " << fmt_short(s.ks_distance) << " < "
            << fmt_short(s.critical_value) << '\n';
    }
    return scan.pass ? kOk : kVerifyFailed;
}

}  // namespace

// ---------------------------------------------------------------------------

std::map<std::string, std::string> RunConfig::to_map() const {
    std::string grid;
    for (std::size_t t : t_grid) grid += (grid.empty() ? "" : ",") + std::to_string(t);
    return {{"command", command},
            {"marginal", marginal},
            {"acf", acf},
            {"acf_file", acf_file},
            {"input", input},
            {"T", std::to_string(T)},
            {"reps", std::to_string(reps)},
            {"lags", std::to_string(lags)},
            {"seed", std::to_string(seed)},
            {"alpha", fmt(alpha)},
            {"out", out},
            {"bandwidth", std::to_string(bandwidth)},
            {"hurst", fmt(hurst)},
            {"repair_psd", repair_psd ? "true" : "false"},
            {"truncation", std::to_string(truncation)},
            {"t_grid", grid}};
}

std::map<std::string, std::string> parse_config_text(const std::string& text) {
    std::map<std::string, std::string> kv;
    std::istringstream in(text);
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) throw InputError("config line " + std::to_string(lineno) + ": expected key = value");
        const std::string key = trim(std::string_view(line).substr(0, eq));
        if (std::find(kKeys.begin(), kKeys.end(), key) == kKeys.end()) {
            throw InputError("config line " + std::to_string(lineno) + ": unknown key '" + key + "'");
        }
        kv[key] = trim(std::string_view(line).substr(eq + 1));
    }
    return kv;
}

RunConfig resolve(const std::vector<std::map<std::string, std::string>>& layers) {
    std::map<std::string, std::string> kv;
    for (const auto& layer : layers)
        for (const auto& [k, v] : layer) kv[k] = v;

    RunConfig cfg;
    if (auto it = kv.find("command"); it != kv.end()) cfg.command = it->second;
    if (cfg.command.empty()) throw InputError("no command given");
    if (std::find(kCommands.begin(), kCommands.end(), cfg.command) == kCommands.end()) {
        throw InputError("unknown command '" + cfg.command + "'");
    }
    if (cfg.command == "scan") {
        cfg.reps = 500;
        cfg.lags = 1;
    }
    cfg.t_grid = {256, 512, 1024, 2048, 4096, 8192, 16384};

    for (const auto& [k, v] : kv) {
        if (k == "marginal") cfg.marginal = v;
        else if (k == "acf") cfg.acf = v;
        else if (k == "acf_file") cfg.acf_file = v;
        else if (k == "input") cfg.input = v;
        else if (k == "T") cfg.T = parse_number<std::size_t>(k, v);
        else if (k == "reps") cfg.reps = parse_number<std::size_t>(k, v);
        else if (k == "lags") cfg.lags = parse_number<std::size_t>(k, v);
        else if (k == "seed") cfg.seed = parse_number<std::uint64_t>(k, v);
        else if (k == "alpha") cfg.alpha = parse_number<double>(k, v);
        else if (k == "out") cfg.out = v;
        else if (k == "bandwidth") cfg.bandwidth = parse_number<std::size_t>(k, v);
        else if (k == "hurst") cfg.hurst = parse_number<double>(k, v);
        else if (k == "repair_psd") cfg.repair_psd = parse_bool(k, v);
        else if (k == "truncation") cfg.truncation = parse_number<std::size_t>(k, v);
        else if (k == "t_grid") cfg.t_grid = parse_grid(v);
    }
    if (!(cfg.alpha > 0.0 && cfg.alpha < 1.0)) throw InputError("alpha must lie in (0,1)");
    if (cfg.truncation < 1) throw InputError("truncation must be >= 1");
    if (cfg.out.empty()) throw InputError("empty output directory");
    return cfg;
}

std::string manifest_text(const RunConfig& cfg) {
    std::ostringstream os;
    os << "# gsub run manifest; rerun with: gsub --config <this file>\n";
    for (const auto& [k, v] : cfg.to_map()) os << k << " = " << v << '\n';
    os << "version = " << GSUB_VERSION << '\n';
    return os.str();
}

int run_command(const RunConfig& cfg, std::ostream& out, std::ostream& err) {
    try {
        OutputSet files(cfg.out);
        int code = kOk;
        if (cfg.command == "calibrate") code = cmd_calibrate(cfg, files, out, err);
        else if (cfg.command == "simulate") code = cmd_simulate(cfg, files, out, err);
        else if (cfg.command == "estimate") code = cmd_estimate(cfg, files, out, err);
        else if (cfg.command == "verify") code = cmd_verify(cfg, files, out, err);
        else if (cfg.command == "rank") code = cmd_rank(cfg, files, out, err);
        else if (cfg.command == "scan") code = cmd_scan(cfg, files, out, err);
        else throw InputError("unknown command '" + cfg.command + "'");
        files.add("manifest.txt", manifest_text(cfg));
        files.commit();
        return code;
    } catch (const AttainabilityError& e) {
        err << "error: " << e.what() << '\n' << "gamma = " << fmt(e.gamma()) << '\n';
        return kAttainability;
    } catch (const PsdError& e) {
        err << "error: " << e.what() << '\n';
        return kPsdFailure;
    } catch (const RefusalError& e) {
        err << "skip: " << e.what() << '\n';
        return kSkipped;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

int main_entry(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Gaussian subordinated time series: calibrate, simulate, estimate, verify"};
    app.set_help_all_flag("--help-all");

    std::string command;
    std::string config_path;
    app.add_option("command", command, "calibrate | simulate | estimate | verify | rank | scan | replay");
    app.add_option("--config", config_path, "key = value config file (a manifest works too)");

    struct Flag {
        const char* name;
        const char* key;
        const char* help;
    };
    const Flag table[] = {
        {"--marginal", "marginal", "normal | exponential(rate) | uniform(a,b) | chisq1 | student_t(df) | empirical:PATH"},
        {"--acf", "acf", "white | geometric(rho) | fgn(H) | ma(c0,c1,...) | sample[:PATH]"},
        {"--acf-file", "acf_file", "single-column CSV of autocorrelations from lag 0"},
        {"--input", "input", "single-column CSV series (estimate, acf=sample)"},
        {"--T", "T", "series length"},
        {"--reps", "reps", "Monte Carlo replications"},
        {"--lags", "lags", "largest lag"},
        {"--seed", "seed", "root seed"},
        {"--alpha", "alpha", "test level"},
        {"--out", "out", "output directory"},
        {"--bandwidth", "bandwidth", "Bartlett bandwidth (0 = floor(T^(1/3)))"},
        {"--hurst", "hurst", "Hurst index for fgn and scan"},
        {"--truncation", "truncation", "Hermite truncation K"},
        {"--t-grid", "t_grid", "comma-separated T values for scan"},
    };
    std::map<std::string, std::string> values;
    std::vector<std::pair<CLI::Option*, std::string>> opts;
    for (const auto& f : table) opts.emplace_back(app.add_option(f.name, values[f.key], f.help), f.key);
    bool repair = false;
    auto* repair_opt = app.add_flag("--repair-psd", repair, "project a non-PSD latent covariance to the nearest PSD one");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kOk : kInputError;
    }

    try {
        std::vector<std::map<std::string, std::string>> layers;
        if (!config_path.empty()) {
            std::ifstream f(config_path);
            if (!f) throw InputError("cannot open config file " + config_path);
            std::stringstream buf;
            buf << f.rdbuf();
            auto kv = parse_config_text(buf.str());
            kv.erase("version");
            layers.push_back(std::move(kv));
        }
        std::map<std::string, std::string> flags;
        if (!command.empty() && command != "replay") flags["command"] = command;
        if (command == "replay" && config_path.empty()) throw InputError("replay needs --config MANIFEST");
        for (const auto& [opt, key] : opts) {
            if (opt->count() > 0) flags[key] = values[key];
        }
        if (repair_opt->count() > 0) flags["repair_psd"] = repair ? "true" : "false";
        layers.push_back(std::move(flags));
        const RunConfig cfg = resolve(layers);
        return run_command(cfg, out, err);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return kInputError;
    }
}

}  // namespace gsub::cli
