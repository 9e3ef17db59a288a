// sepscope command line: prob, chi, sample, verify
#include "sepscope/harness.hpp"
#include "sepscope/probability.hpp"
#include "sepscope/verification.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

using namespace sepscope;
using nlohmann::ordered_json;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string trim(const std::string& s) {
    auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
    return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

// flat key=value lines; '#' starts a comment
std::vector<std::pair<std::string, std::string>> read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot read config file " + path);
    std::vector<std::pair<std::string, std::string>> out;
    std::string line;
    int n = 0;
    while (std::getline(in, line)) {
        ++n;
        line = trim(line.substr(0, line.find('#')));
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos) throw UsageError(path + ":" + std::to_string(n) + ": expected key=value");
        out.emplace_back(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    }
    return out;
}

struct Resolved {
    std::vector<std::pair<std::string, std::string>> items;
    void add(const std::string& k, const std::string& v) { items.emplace_back(k, v); }
    ordered_json json() const {
        ordered_json j = ordered_json::object();
        for (const auto& [k, v] : items) j[k] = v;
        return j;
    }
    std::string text() const {
        std::string s;
        for (const auto& [k, v] : items) s += k + "=" + v + "\n";
        return s;
    }
};

std::string fmt_double(double x) {
    char buf[32];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, end);
}

int digits_for(double tol) { return std::clamp(static_cast<int>(std::ceil(-std::log10(tol))) + 2, 6, 60); }

// "A..B"
std::pair<unsigned, unsigned> parse_range(const std::string& s) {
    auto p = s.find("..");
    if (p == std::string::npos) throw UsageError("--d-range expects A..B");
    try {
        unsigned a = std::stoul(s.substr(0, p)), b = std::stoul(s.substr(p + 2));
        if (a == 0 || b < a) throw UsageError("--d-range needs 1 <= A <= B");
        return {a, b};
    } catch (const std::logic_error&) {
        throw UsageError("--d-range expects A..B");
    }
}

// chi choices for the ansatz: "default" is chi_d, "epsilonK" is eps^K
ChiEval chi_choice(const std::string& name, unsigned d, const BigReal& tol) {
    if (name == "default") {
        ChiFunction f(d);
        BigReal t = tol / 64;
        return [f, t](const BigReal& e) { return f(e, t); };
    }
    if (name.rfind("epsilon", 0) == 0) {
        std::string rest = name.substr(7);
        long k = 1;
        if (!rest.empty()) {
            try {
                std::size_t used = 0;
                k = std::stol(rest, &used);
                if (used != rest.size() || k < 0) throw UsageError("");
            } catch (const std::exception&) {
                throw UsageError("--chi: unknown choice " + name);
            }
        }
        return [k](const BigReal& e) { return BigReal(pow(e, k)); };
    }
    throw UsageError("--chi: unknown choice " + name);
}

void emit(const ordered_json& doc, const std::string& csv, const Resolved& cfg, const std::string& format) {
    if (format == "json") {
        ordered_json out;
        out["config"] = cfg.json();
        for (auto it = doc.begin(); it != doc.end(); ++it) out[it.key()] = it.value();
        std::cout << out.dump(2) << '\n';
    } else {
        std::cerr << cfg.text();
        std::cout << csv;
    }
}

struct ProbArgs {
    std::optional<unsigned> d;
    std::string d_range, formula = "all", chi = "default", format = "csv";
    double tol = 1e-12;
};

int cmd_prob(const ProbArgs& a) {
    if (!a.d && a.d_range.empty()) throw UsageError("prob needs --d or --d-range");
    unsigned lo, hi;
    if (a.d) {
        if (*a.d == 0) throw UsageError("--d must be positive");
        lo = hi = *a.d;
    } else {
        std::tie(lo, hi) = parse_range(a.d_range);
    }
    if (!(a.tol > 0)) throw UsageError("--tol must be positive");
    if (a.chi != "default" && a.formula != "ansatz") throw UsageError("--chi applies to --formula ansatz");

    Resolved cfg;
    cfg.add("command", "prob");
    cfg.add(a.d ? "d" : "d-range", a.d ? std::to_string(*a.d) : a.d_range);
    cfg.add("formula", a.formula);
    if (a.formula == "ansatz") cfg.add("chi", a.chi);
    cfg.add("tol", fmt_double(a.tol));
    cfg.add("format", a.format);
    cfg.add("precision_bits", std::to_string(default_precision_bits()));

    const BigReal tol(a.tol);
    const int digits = digits_for(a.tol);
    ordered_json rows = ordered_json::array();
    std::string csv;
    if (a.formula == "all") {
        csv = "d,dunkl,concise,6f5,integral,ansatz,max_pairwise_dev\n";
        for (unsigned d = lo; d <= hi; ++d) {
            auto r = probability_report(d, tol);
            std::string dunkl = r.value_dunkl ? to_string(*r.value_dunkl) : "";
            ordered_json j;
            j["d"] = d;
            j["dunkl"] = r.value_dunkl ? ordered_json(dunkl) : ordered_json(nullptr);
            j["concise"] = to_string(r.value_concise, digits);
            j["6f5"] = to_string(r.value_6f5, digits);
            j["integral"] = to_string(r.value_integral, digits);
            j["ansatz"] = to_string(r.value_ansatz2d, digits);
            j["max_pairwise_dev"] = to_string(r.max_pairwise_dev, 6);
            rows.push_back(j);
            csv += std::to_string(d) + "," + dunkl + "," + j["concise"].get<std::string>() + "," +
                   j["6f5"].get<std::string>() + "," + j["integral"].get<std::string>() + "," +
                   j["ansatz"].get<std::string>() + "," + j["max_pairwise_dev"].get<std::string>() + "\n";
        }
    } else {
        csv = "d,formula,value\n";
        for (unsigned d = lo; d <= hi; ++d) {
            std::string v;
            if (a.formula == "dunkl") {
                if (d % 2) throw UsageError("dunkl formula needs even d");
                v = to_string(prob_dunkl_exact(d));
            } else if (a.formula == "concise") {
                v = to_string(prob_concise(Rational(d, 2), tol), digits);
            } else if (a.formula == "6f5") {
                v = to_string(prob_induced_6f5(d, tol), digits);
            } else if (a.formula == "integral") {
                v = to_string(prob_via_t_integral(d, tol), digits);
            } else {
                v = to_string(prob_ansatz_2d(d, chi_choice(a.chi, d, tol), tol), digits);
            }
            rows.push_back({{"d", d}, {"formula", a.formula}, {"value", v}});
            csv += std::to_string(d) + "," + a.formula + "," + v + "\n";
        }
    }
    emit({{"rows", rows}}, csv, cfg, a.format);
    return 0;
}

struct ChiArgs {
    unsigned d = 0;
    std::optional<std::string> eps;
    bool coeffs = false;
    double tol = 1e-15;
    std::string format = "csv";
};

// decimal string to an exact rational, e.g. "0.25" -> 1/4
std::optional<Rational> decimal_rational(const std::string& s) {
    static const std::string digits = "0123456789";
    auto dot = s.find('.');
    std::string ip = s.substr(0, dot), fp = dot == std::string::npos ? "" : s.substr(dot + 1);
    if ((ip.empty() && fp.empty()) || ip.find_first_not_of(digits) != std::string::npos ||
        fp.find_first_not_of(digits) != std::string::npos)
        return std::nullopt;
    BigInt num(ip.empty() ? "0" : ip), den(1);
    for (char c : fp) {
        num = num * 10 + (c - '0');
        den *= 10;
    }
    return Rational(num, den);
}

int cmd_chi(const ChiArgs& a) {
    if (a.d == 0) throw UsageError("--d must be positive");
    if (a.coeffs == a.eps.has_value()) throw UsageError("chi needs exactly one of --eps or --coeffs");
    Resolved cfg;
    cfg.add("command", "chi");
    cfg.add("d", std::to_string(a.d));
    if (a.eps) cfg.add("eps", *a.eps);
    if (a.coeffs) cfg.add("coeffs", "true");
    cfg.add("tol", fmt_double(a.tol));
    cfg.add("format", a.format);
    cfg.add("precision_bits", std::to_string(default_precision_bits()));

    ChiFunction chi(a.d);
    if (a.coeffs) {
        if (chi.coefficients().empty()) throw UsageError("coefficients exist only for even d");
        std::string csv = "power,coefficient\n";
        ordered_json rows = ordered_json::array();
        for (std::size_t i = 0; i < chi.coefficients().size(); ++i) {
            unsigned p = a.d + 2 * static_cast<unsigned>(i);
            std::string c = to_string(chi.coefficients()[i]);
            rows.push_back({{"power", p}, {"coefficient", c}});
            csv += std::to_string(p) + "," + c + "\n";
        }
        emit({{"coefficients", rows}}, csv, cfg, a.format);
        return 0;
    }
    BigReal eps;
    try {
        eps = BigReal(*a.eps);
    } catch (const std::exception&) {
        throw UsageError("--eps: not a number: " + *a.eps);
    }
    if (eps < 0 || eps > 1) throw UsageError("--eps must lie in [0, 1]");
    std::string value = to_string(chi(eps, BigReal(a.tol)), digits_for(a.tol));
    std::string exact;
    if (auto q = decimal_rational(*a.eps))
        if (auto e = chi.exact(*q)) exact = to_string(*e);
    ordered_json doc = {{"d", a.d}, {"eps", *a.eps}, {"value", value}};
    doc["exact"] = exact.empty() ? ordered_json(nullptr) : ordered_json(exact);
    emit(doc, "d,eps,value,exact\n" + std::to_string(a.d) + "," + *a.eps + "," + value + "," + exact + "\n", cfg,
         a.format);
    return 0;
}

struct SampleArgs {
    std::string ensemble, axes, out, format = "csv", two_negative = "auto";
    std::uint64_t n = 0, seed = 1;
    unsigned workers = 1;
    int bins = 200, bins2d = 80;
};

void write_file(const std::string& path, const std::string& content) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw UsageError("cannot write " + path);
    f << content;
    if (!f) throw std::runtime_error("write failed: " + path);
}

int cmd_sample(const SampleArgs& a) {
    ExperimentConfig c;
    auto e = parse_ensemble(a.ensemble);
    if (!e) throw UsageError("unknown ensemble " + a.ensemble);
    c.ensemble = *e;
    c.sample_count = a.n;
    c.seed = a.seed;
    c.worker_count = a.workers;
    c.bins_1d = a.bins;
    c.bins_2d = a.bins2d;
    c.format = a.format == "json" ? ReportFormat::json : ReportFormat::csv;
    c.output_path = a.out;
    if (a.two_negative != "auto") c.count_two_negative = a.two_negative == "on";
    if (!a.axes.empty()) {
        c.axes.clear();
        std::stringstream ss(a.axes);
        std::string item;
        while (std::getline(ss, item, ',')) {
            auto ax = parse_axis(trim(item));
            if (!ax) throw UsageError("unknown axis " + item);
            c.axes.push_back(*ax);
        }
    }
    try {
        validate(c);
    } catch (const std::invalid_argument& ex) {
        throw UsageError(ex.what());
    }
    if (c.format == ReportFormat::csv && c.axes.empty()) throw UsageError("csv output needs at least one axis");

    Resolved cfg;
    cfg.add("command", "sample");
    cfg.add("ensemble", to_string(c.ensemble));
    cfg.add("n", std::to_string(c.sample_count));
    cfg.add("seed", std::to_string(c.seed));
    cfg.add("workers", std::to_string(c.worker_count));
    cfg.add("bins", std::to_string(c.bins_1d));
    cfg.add("bins2d", std::to_string(c.bins_2d));
    std::string axes;
    for (auto ax : c.axes) axes += (axes.empty() ? "" : ",") + to_string(ax);
    cfg.add("axes", axes);
    cfg.add("two-negative", a.two_negative);
    cfg.add("format", a.format);
    if (!a.out.empty()) cfg.add("out", a.out);

    auto r = run_experiment(c);
    auto chi = reference_chi(c.ensemble);
    if (c.format == ReportFormat::json) {
        std::string doc = format_json(r, chi);
        if (a.out.empty())
            std::cout << doc;
        else
            write_file(a.out, doc);
        if (a.out.empty()) std::cerr << cfg.text();
    } else {
        if (a.out.empty()) {
            if (c.axes.size() != 1) throw UsageError("several csv axes need --out");
            std::cout << format_csv(r.bins[0], chi);
        } else {
            write_file(a.out, format_csv(r.bins[0], chi));
            for (std::size_t k = 1; k < r.bins.size(); ++k)
                write_file(a.out + "." + to_string(r.bins[k].axis) + ".csv", format_csv(r.bins[k], chi));
        }
        if (a.out.empty()) std::cerr << cfg.text() << "p_hat=" << fmt_double(r.p_hat) << "\nstderr=" << fmt_double(r.stderr_p) << "\n";
    }
    if (!a.out.empty()) {
        write_file(a.out + ".config", cfg.text());
        std::cout << cfg.text() << "p_hat=" << fmt_double(r.p_hat) << "\nstderr=" << fmt_double(r.stderr_p) << "\n";
    }
    return 0;
}

struct VerifyArgs {
    std::string suite = "all", out;
    double budget = 600, inject = 0;
    std::uint64_t mc_samples = 1000000;
};

int cmd_verify(const VerifyArgs& a) {
    BatteryOptions o;
    o.exact = a.suite == "exact" || a.suite == "all";
    o.numeric = a.suite == "numeric" || a.suite == "all";
    o.mc = a.suite == "mc" || a.suite == "all";
    o.budget_seconds = a.budget;
    o.mc_samples = a.mc_samples;
    o.chi2_coefficient_perturbation = a.inject;
    if (!(a.budget >= 0)) throw UsageError("--budget must be non-negative");

    Resolved cfg;
    cfg.add("command", "verify");
    cfg.add("suite", a.suite);
    cfg.add("budget", fmt_double(a.budget));
    cfg.add("mc-samples", std::to_string(a.mc_samples));
    if (a.inject != 0) cfg.add("inject-chi2-perturbation", fmt_double(a.inject));
    if (!a.out.empty()) cfg.add("out", a.out);
    cfg.add("precision_bits", std::to_string(default_precision_bits()));

    auto report = run_full_battery(o);
    ordered_json doc;
    doc["config"] = cfg.json();
    auto body = ordered_json::parse(report.to_json());
    for (auto it = body.begin(); it != body.end(); ++it) doc[it.key()] = it.value();
    std::string text = doc.dump(2) + '\n';
    if (a.out.empty())
        std::cout << text;
    else
        write_file(a.out, text);
    for (const auto& c : report.checks)
        if (!c.pass)
            std::cerr << (c.gating ? "FAIL " : "note ") << c.check_id << ": computed " << c.computed << ", expected "
                      << c.expected << "\n";
    return report.passed() ? 0 : 1;
}

// Prepend config-file entries as flags so explicit flags, parsed later, take precedence.
std::vector<std::string> expand_config(int argc, char** argv) {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::string path;
    std::vector<std::string> rest;
    for (std::size_t i = 0; i < args.size(); ++i) {
        if (args[i] == "--config") {
            if (i + 1 >= args.size()) throw UsageError("--config needs a path");
            path = args[++i];
        } else if (args[i].rfind("--config=", 0) == 0) {
            path = args[i].substr(9);
        } else {
            rest.push_back(args[i]);
        }
    }
    if (path.empty()) return rest;
    auto entries = read_config_file(path);
    std::vector<std::string> out;
    auto sub = std::find_if(rest.begin(), rest.end(), [](const std::string& s) { return s.rfind("-", 0) != 0; });
    out.insert(out.end(), rest.begin(), sub);
    std::string command;
    for (const auto& [k, v] : entries)
        if (k == "command") command = v;
    if (sub != rest.end())
        out.push_back(*sub++);
    else if (!command.empty())
        out.push_back(command);
    for (const auto& [k, v] : entries) {
        // echoed keys that are not flags
        if (k == "command") continue;
        if (k == "precision_bits") {
            if (v != std::to_string(default_precision_bits()))
                throw UsageError("config asks for precision_bits=" + v + "; set SEPSCOPE_PRECISION_BITS instead");
            continue;
        }
        if (v == "true")
            out.push_back("--" + k);
        else if (v != "false") {
            out.push_back("--" + k);
            out.push_back(v);
        }
    }
    out.insert(out.end(), sub, rest.end());
    return out;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Separability probabilities: formulas, sampling experiments and checks"};
    app.name("sepscope");
    app.set_help_all_flag("--help-all", "Print help for every subcommand and exit");
    app.require_subcommand(1);
    app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
    std::string config_path;
    app.add_option("--config", config_path, "File of key=value lines using the flag names; flags override it");

    ProbArgs pa;
    auto* prob = app.add_subcommand("prob", "Separability probability by one or all formulas");
    auto* pd = prob->add_option("--d", pa.d, "Dyson index");
    auto* pr = prob->add_option("--d-range", pa.d_range, "Range A..B of Dyson indices");
    pd->excludes(pr);
    prob->add_option("--formula", pa.formula, "dunkl, concise, 6f5, integral, ansatz or all")
        ->check(CLI::IsMember({"dunkl", "concise", "6f5", "integral", "ansatz", "all"}));
    prob->add_option("--chi", pa.chi, "Ansatz function: default (chi_d) or epsilonK (eps^K)");
    prob->add_option("--tol", pa.tol, "Target tolerance");
    prob->add_option("--format", pa.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    ChiArgs ca;
    auto* chi = app.add_subcommand("chi", "Separability function values and coefficients");
    chi->add_option("--d", ca.d, "Dyson index")->required();
    auto* ce = chi->add_option("--eps", ca.eps, "Singular-value ratio in [0, 1]");
    auto* cc = chi->add_flag("--coeffs", ca.coeffs, "Print polynomial coefficients (even d)");
    ce->excludes(cc);
    chi->add_option("--tol", ca.tol, "Target tolerance");
    chi->add_option("--format", ca.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    SampleArgs sa;
    auto* sample = app.add_subcommand("sample", "Monte Carlo PPT experiment");
    sample->add_option("--ensemble", sa.ensemble,
                       "rebit4, qubit4, rebit_retrit6, qubit_qutrit6, xstate_real or xstate_complex")
        ->required();
    sample->add_option("--n", sa.n, "Number of samples")->required();
    sample->add_option("--seed", sa.seed, "Seed");
    sample->add_option("--workers", sa.workers, "Worker threads");
    sample->add_option("--bins", sa.bins, "Bins on 1D axes");
    sample->add_option("--bins2d", sa.bins2d, "Bins per side on grid2d");
    sample->add_option("--axes", sa.axes, "Comma list of epsilon, mu, tau, grid2d");
    sample->add_option("--two-negative", sa.two_negative, "Count two-negative partial transposes: auto, on or off")
        ->check(CLI::IsMember({"auto", "on", "off"}));
    sample->add_option("--out", sa.out, "Report path; extra csv axes go to <out>.<axis>.csv");
    sample->add_option("--format", sa.format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

    VerifyArgs va;
    auto* verify = app.add_subcommand("verify", "Run the check battery; JSON report");
    verify->add_option("--suite", va.suite, "exact, numeric, mc or all")
        ->check(CLI::IsMember({"exact", "numeric", "mc", "all"}));
    verify->add_option("--budget", va.budget, "Seconds before remaining checks are skipped");
    verify->add_option("--mc-samples", va.mc_samples, "Samples per Monte Carlo check");
    verify->add_option("--out", va.out, "Report path (stdout otherwise)");
    verify->add_option("--inject-chi2-perturbation", va.inject, "Testing: add this to one chi_2 coefficient")
        ->group("Testing");

    try {
        auto args = expand_config(argc, argv);
        std::reverse(args.begin(), args.end());
        app.parse(args);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }

    try {
        if (*prob) return cmd_prob(pa);
        if (*chi) return cmd_chi(ca);
        if (*sample) return cmd_sample(sa);
        return cmd_verify(va);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "failed: " << e.what() << "\n";
        return 1;
    }
}
