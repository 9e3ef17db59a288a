#pragma once

#include "sepscope/states.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace sepscope {

enum class Ensemble { rebit4, qubit4, rebit_retrit6, qubit_qutrit6, xstate_real, xstate_complex };
std::string to_string(Ensemble e);
std::optional<Ensemble> parse_ensemble(const std::string& name);
int matrix_size(Ensemble e);

// epsilon: s2/s1.  mu (4x4) and tau (6x6) are folded into (0, 1] by x -> min(x, 1/x).
// grid2d: (eps, folded mu) for 4x4, (eps1, eps2) for 6x6.
enum class BinAxis { epsilon, mu, tau, grid2d };
std::string to_string(BinAxis a);
std::optional<BinAxis> parse_axis(const std::string& name);

// floor(x * bins) clamped to [0, bins - 1]
int bin_index(double x, int bins);

struct BinnedEstimate {
    BinAxis axis = BinAxis::epsilon;
    int bin_count = 200;  // per side for grid2d
    std::vector<std::uint64_t> totals;
    std::vector<std::uint64_t> separables;

    static BinnedEstimate zero(BinAxis axis, int bin_count);
    std::size_t cells() const { return totals.size(); }
    void record(double x, bool separable);
    void record(double x, double y, bool separable);
    double center(int i) const { return (i + 0.5) / bin_count; }
    std::uint64_t total_count() const;
};

// Elementwise sum; throws std::invalid_argument on axis or shape mismatch.
BinnedEstimate merge(const BinnedEstimate& a, const BinnedEstimate& b);

enum class ReportFormat { csv, json };

struct ExperimentConfig {
    Ensemble ensemble = Ensemble::qubit4;
    std::uint64_t sample_count = 1000000;
    std::uint64_t seed = 1;
    int worker_count = 1;
    std::vector<BinAxis> axes{BinAxis::epsilon};
    int bins_1d = 200;
    int bins_2d = 80;
    // fraction of entangled 6x6 states whose partial transpose has two negative eigenvalues;
    // unset means on for 6x6 ensembles
    std::optional<bool> count_two_negative;
    std::string output_path;
    ReportFormat format = ReportFormat::csv;

    bool two_negative_enabled() const;
};
// Throws std::invalid_argument.
void validate(const ExperimentConfig& c);

struct ExperimentResult {
    ExperimentConfig config;
    std::uint64_t total = 0, separable = 0;
    double p_hat = 0, stderr_p = 0;
    std::vector<BinnedEstimate> bins;  // one per configured axis
    std::optional<std::uint64_t> two_negative;

    std::optional<double> two_negative_fraction() const;
};

// Sample i draws from RngStream(seed, i); worker w handles i = w mod worker_count.
ExperimentResult run_experiment(const ExperimentConfig& config);

struct ResidualRow {
    double bin_center;
    std::uint64_t total, separable;
    double p_hat, chi, residual;
    bool reliable;
};
using ChiCurve = std::function<double(double)>;
std::vector<ResidualRow> residual_curve(const BinnedEstimate& bins, const ChiCurve& chi, std::uint64_t floor = 100);

// chi for the ensembles where it is known (4x4 and X-states); empty for 6x6.
ChiCurve reference_chi(Ensemble e);

// CSV of one 1D axis: bin_center,total,separable,p_hat,chi,residual.  A missing chi leaves the
// last two columns empty.  grid2d uses bin_center_x,bin_center_y,total,separable,p_hat.
std::string format_csv(const BinnedEstimate& bins, const ChiCurve& chi);
// Config echo, summary and per-axis arrays.
std::string format_json(const ExperimentResult& r, const ChiCurve& chi);

}  // namespace sepscope
