#include "sepscope/harness.hpp"

#include "sepscope/chi.hpp"

#include "json.hpp"

#include <charconv>
#include <cmath>
#include <stdexcept>
#include <thread>

namespace sepscope {

namespace {

const char* const kEnsembleNames[] = {"rebit4", "qubit4", "rebit_retrit6", "qubit_qutrit6", "xstate_real",
                                      "xstate_complex"};
const char* const kAxisNames[] = {"epsilon", "mu", "tau", "grid2d"};

double fold(double x) { return x > 1 ? 1 / x : x; }

std::string num(double x) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    return std::string(buf, res.ptr);
}

struct Worker {
    std::uint64_t total = 0, separable = 0, two_negative = 0;
    std::vector<BinnedEstimate> bins;
};

void sample_one(const ExperimentConfig& c, std::uint64_t i, Worker& w) {
    RngStream rng(c.seed, i);
    DensityMatrix rho;
    switch (c.ensemble) {
        case Ensemble::rebit4: rho = sample_hs_ginibre(FieldKind::real, 4, rng); break;
        case Ensemble::qubit4: rho = sample_hs_ginibre(FieldKind::complex, 4, rng); break;
        case Ensemble::rebit_retrit6: rho = sample_hs_ginibre(FieldKind::real, 6, rng); break;
        case Ensemble::qubit_qutrit6: rho = sample_hs_ginibre(FieldKind::complex, 6, rng); break;
        case Ensemble::xstate_real: rho = sample_xstate(FieldKind::real, rng); break;
        case Ensemble::xstate_complex: rho = sample_xstate(FieldKind::complex, rng); break;
    }
    const CMatrix pt = partial_transpose(rho.entries, rho.block_split());
    const bool sep = is_psd(pt);
    ++w.total;
    w.separable += sep;
    const bool six = rho.size() == 6;
    if (six && !sep && c.two_negative_enabled()) w.two_negative += negative_eigenvalue_count(pt, 0.0) == 2;

    std::optional<SingularRatio> sr;
    auto ratio = [&]() -> const SingularRatio& {
        if (!sr) sr = sigma_ratio(rho);
        return *sr;
    };
    for (auto& b : w.bins) {
        switch (b.axis) {
            case BinAxis::epsilon: b.record(six ? ratio().eps : ratio().eps_closed, sep); break;
            case BinAxis::mu: b.record(fold(mu_ratio(rho)), sep); break;
            case BinAxis::tau: b.record(fold(tau_ratios(rho).tau), sep); break;
            case BinAxis::grid2d:
                if (six)
                    b.record(ratio().eps, ratio().eps2, sep);
                else
                    b.record(ratio().eps_closed, fold(mu_ratio(rho)), sep);
                break;
        }
    }
}

}  // namespace

std::string to_string(Ensemble e) { return kEnsembleNames[static_cast<int>(e)]; }

std::optional<Ensemble> parse_ensemble(const std::string& name) {
    for (int i = 0; i < 6; ++i)
        if (name == kEnsembleNames[i]) return static_cast<Ensemble>(i);
    return std::nullopt;
}

int matrix_size(Ensemble e) { return e == Ensemble::rebit_retrit6 || e == Ensemble::qubit_qutrit6 ? 6 : 4; }

std::string to_string(BinAxis a) { return kAxisNames[static_cast<int>(a)]; }

std::optional<BinAxis> parse_axis(const std::string& name) {
    for (int i = 0; i < 4; ++i)
        if (name == kAxisNames[i]) return static_cast<BinAxis>(i);
    return std::nullopt;
}

int bin_index(double x, int bins) {
    if (!(x > 0)) return 0;
    int i = static_cast<int>(std::floor(x * bins));
    return i >= bins ? bins - 1 : i;
}

BinnedEstimate BinnedEstimate::zero(BinAxis axis, int bin_count) {
    if (bin_count < 1) throw std::invalid_argument("bin count must be positive");
    BinnedEstimate b;
    b.axis = axis;
    b.bin_count = bin_count;
    std::size_t n = axis == BinAxis::grid2d ? static_cast<std::size_t>(bin_count) * bin_count : bin_count;
    b.totals.assign(n, 0);
    b.separables.assign(n, 0);
    return b;
}

void BinnedEstimate::record(double x, bool separable) {
    int i = bin_index(x, bin_count);
    ++totals[i];
    separables[i] += separable;
}

void BinnedEstimate::record(double x, double y, bool separable) {
    std::size_t i = static_cast<std::size_t>(bin_index(x, bin_count)) * bin_count + bin_index(y, bin_count);
    ++totals[i];
    separables[i] += separable;
}

std::uint64_t BinnedEstimate::total_count() const {
    std::uint64_t s = 0;
    for (auto t : totals) s += t;
    return s;
}

BinnedEstimate merge(const BinnedEstimate& a, const BinnedEstimate& b) {
    if (a.axis != b.axis || a.bin_count != b.bin_count || a.cells() != b.cells())
        throw std::invalid_argument("cannot merge estimates of different shape");
    BinnedEstimate r = a;
    for (std::size_t i = 0; i < r.cells(); ++i) {
        r.totals[i] += b.totals[i];
        r.separables[i] += b.separables[i];
    }
    return r;
}

bool ExperimentConfig::two_negative_enabled() const {
    return count_two_negative.value_or(matrix_size(ensemble) == 6) && matrix_size(ensemble) == 6;
}

void validate(const ExperimentConfig& c) {
    if (c.sample_count < 1) throw std::invalid_argument("sample count must be at least 1");
    if (c.worker_count < 1) throw std::invalid_argument("worker count must be at least 1");
    if (c.bins_1d < 1 || c.bins_2d < 1) throw std::invalid_argument("bin counts must be positive");
    const bool six = matrix_size(c.ensemble) == 6;
    for (BinAxis a : c.axes) {
        if (a == BinAxis::mu && six) throw std::invalid_argument("mu axis needs a 4x4 ensemble");
        if (a == BinAxis::tau && !six) throw std::invalid_argument("tau axis needs a 6x6 ensemble");
    }
    if (c.count_two_negative.value_or(false) && !six)
        throw std::invalid_argument("two-negative count needs a 6x6 ensemble");
}

std::optional<double> ExperimentResult::two_negative_fraction() const {
    if (!two_negative) return std::nullopt;
    return static_cast<double>(*two_negative) / static_cast<double>(total);
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
    validate(config);
    const int nw = config.worker_count;
    std::vector<Worker> workers(nw);
    for (auto& w : workers)
        for (BinAxis a : config.axes) w.bins.push_back(BinnedEstimate::zero(a, a == BinAxis::grid2d ? config.bins_2d : config.bins_1d));

    auto body = [&](int id) {
        for (std::uint64_t i = id; i < config.sample_count; i += nw) sample_one(config, i, workers[id]);
    };
    if (nw == 1) {
        body(0);
    } else {
        std::vector<std::thread> pool;
        for (int id = 0; id < nw; ++id) pool.emplace_back(body, id);
        for (auto& t : pool) t.join();
    }

    ExperimentResult r;
    r.config = config;
    r.bins = workers[0].bins;
    std::uint64_t two = 0;
    for (int id = 0; id < nw; ++id) {
        r.total += workers[id].total;
        r.separable += workers[id].separable;
        two += workers[id].two_negative;
        if (id > 0)
            for (std::size_t k = 0; k < r.bins.size(); ++k) r.bins[k] = merge(r.bins[k], workers[id].bins[k]);
    }
    if (config.two_negative_enabled()) r.two_negative = two;
    r.p_hat = static_cast<double>(r.separable) / static_cast<double>(r.total);
    r.stderr_p = std::sqrt(r.p_hat * (1 - r.p_hat) / static_cast<double>(r.total));
    return r;
}

std::vector<ResidualRow> residual_curve(const BinnedEstimate& bins, const ChiCurve& chi, std::uint64_t floor) {
    if (bins.axis == BinAxis::grid2d) throw std::invalid_argument("residuals need a one-dimensional axis");
    std::vector<ResidualRow> rows;
    for (int i = 0; i < bins.bin_count; ++i) {
        ResidualRow row{};
        row.bin_center = bins.center(i);
        row.total = bins.totals[i];
        row.separable = bins.separables[i];
        row.p_hat = row.total ? static_cast<double>(row.separable) / static_cast<double>(row.total) : 0.0;
        row.chi = chi ? chi(row.bin_center) : std::nan("");
        row.residual = row.p_hat - row.chi;
        row.reliable = row.total >= floor;
        rows.push_back(row);
    }
    return rows;
}

ChiCurve reference_chi(Ensemble e) {
    unsigned d;
    switch (e) {
        case Ensemble::rebit4: d = 1; break;
        case Ensemble::qubit4: d = 2; break;
        case Ensemble::xstate_real: return [](double x) { return x; };
        case Ensemble::xstate_complex: return [](double x) { return x * x; };
        default: return {};
    }
    auto f = std::make_shared<ChiFunction>(d);
    return [f](double x) { return (*f)(BigReal(x), BigReal("1e-14")).convert_to<double>(); };
}

std::string format_csv(const BinnedEstimate& bins, const ChiCurve& chi) {
    std::string out;
    if (bins.axis == BinAxis::grid2d) {
        out = "bin_center_x,bin_center_y,total,separable,p_hat\n";
        for (int i = 0; i < bins.bin_count; ++i)
            for (int j = 0; j < bins.bin_count; ++j) {
                std::size_t k = static_cast<std::size_t>(i) * bins.bin_count + j;
                double p = bins.totals[k] ? static_cast<double>(bins.separables[k]) / bins.totals[k] : 0.0;
                out += num(bins.center(i)) + ',' + num(bins.center(j)) + ',' + std::to_string(bins.totals[k]) + ',' +
                       std::to_string(bins.separables[k]) + ',' + num(p) + '\n';
            }
        return out;
    }
    out = "bin_center,total,separable,p_hat,chi,residual\n";
    const ChiCurve use = bins.axis == BinAxis::epsilon ? chi : ChiCurve{};
    for (const auto& r : residual_curve(bins, use)) {
        out += num(r.bin_center) + ',' + std::to_string(r.total) + ',' + std::to_string(r.separable) + ',' + num(r.p_hat) +
               ',';
        if (use) out += num(r.chi) + ',' + num(r.residual);
        else out += ',';
        out += '\n';
    }
    return out;
}

std::string format_json(const ExperimentResult& r, const ChiCurve& chi) {
    using nlohmann::ordered_json;
    const auto& c = r.config;
    ordered_json cfg;
    cfg["ensemble"] = to_string(c.ensemble);
    cfg["n"] = c.sample_count;
    cfg["seed"] = c.seed;
    cfg["workers"] = c.worker_count;
    ordered_json axes = ordered_json::array();
    for (BinAxis a : c.axes) axes.push_back(to_string(a));
    cfg["axes"] = axes;
    cfg["bins"] = c.bins_1d;
    cfg["bins2d"] = c.bins_2d;
    cfg["two_negative"] = c.two_negative_enabled();
    cfg["format"] = c.format == ReportFormat::csv ? "csv" : "json";
    cfg["out"] = c.output_path;

    ordered_json summary;
    summary["total"] = r.total;
    summary["separable"] = r.separable;
    summary["p_hat"] = r.p_hat;
    summary["stderr"] = r.stderr_p;
    if (auto f = r.two_negative_fraction()) {
        summary["two_negative"] = *r.two_negative;
        summary["two_negative_fraction"] = *f;
    }

    ordered_json arrays = ordered_json::array();
    for (const auto& b : r.bins) {
        ordered_json a;
        a["axis"] = to_string(b.axis);
        a["bin_count"] = b.bin_count;
        a["total"] = b.totals;
        a["separable"] = b.separables;
        if (b.axis != BinAxis::grid2d) {
            // chi is a function of eps only
            ChiCurve use = b.axis == BinAxis::epsilon ? chi : ChiCurve{};
            ordered_json centers = ordered_json::array(), p = ordered_json::array(), ch = ordered_json::array(),
                         res = ordered_json::array();
            for (const auto& row : residual_curve(b, use)) {
                centers.push_back(row.bin_center);
                p.push_back(row.p_hat);
                if (use) {
                    ch.push_back(row.chi);
                    res.push_back(row.residual);
                }
            }
            a["bin_center"] = centers;
            a["p_hat"] = p;
            if (use) {
                a["chi"] = ch;
                a["residual"] = res;
            }
        }
        arrays.push_back(a);
    }
    ordered_json root;
    root["config"] = cfg;
    root["summary"] = summary;
    root["bins"] = arrays;
    return root.dump(2) + '\n';
}

}  // namespace sepscope
