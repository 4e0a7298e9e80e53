#pragma once

#include "tripert/asymptotics.hpp"
#include "tripert/cramer.hpp"
#include "tripert/errors.hpp"
#include "tripert/estimation.hpp"
#include "tripert/model.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace tripert {

inline constexpr const char* kSchemaLine = "# tripert-schema=1";

/// Raised by run_verify when a stage fails. The original exception is nested
/// (std::rethrow_if_nested recovers it).
class StageError : public Error {
public:
    StageError(std::string stage, const std::string& what)
        : Error(stage + ": " + what), stage_(std::move(stage)) {}
    const std::string& stage() const noexcept { return stage_; }

private:
    std::string stage_;
};

/// True for errors caused by the model or its inputs (CLI exit code 2).
bool is_model_error(const std::exception& e);

/// Pipeline description. `law` overrides `model_path` when set (presets).
///
/// Stages run in the fixed order analyze, constants, tail, fit; `commands`
/// selects which of them write files, the verdict always needs all four.
/// Tolerance keys:
///   alphatilde_abs   |fitted alphatilde - predicted|            (default 0.25)
///   alphatilde_rel   used instead when given, relative to the prediction
///   C_rel            |C_fit / limit - 1| for the right tail      (default 0.35)
///   left_ratio       noncentered: left p t^alpha (log t)^-alphatilde
///                    over the right constant must stay below it  (default 0.10)
struct ExperimentPlan {
    std::filesystem::path model_path;
    std::optional<CoefficientLaw> law;
    std::string model_name;
    std::vector<std::string> commands{"analyze", "constants", "tail", "fit"};
    std::uint64_t seed = 1;
    unsigned workers = 1;
    std::filesystem::path output_dir;
    std::map<std::string, double> tolerances;

    double tmin = 1e3;
    double tmax = 1e10;
    std::size_t points = 12;
    std::size_t reps = 100'000;
    double D = 4.0;
    std::size_t goldie_samples = 1'000'000;
    /// Fit with alpha fixed at the Cramer root (otherwise free).
    bool fix_alpha = true;
    /// Adds a `# generated=` line to every file; off keeps files byte-stable.
    bool timestamp = false;
};

/// Reads a plan file with the same `key=value` syntax as model files. Keys:
/// model, name, commands (comma list), seed, workers, out, tmin, tmax, points,
/// reps, D, goldie_samples, fix_alpha, timestamp, tol.<name>. A relative
/// model path is resolved against the plan file's directory.
ExperimentPlan load_plan(const std::filesystem::path& path);

struct Check {
    std::string name;
    double value = 0.0;
    double target = 0.0;
    double tolerance = 0.0;
    bool passed = false;
};

struct VerdictReport {
    std::string model_name;
    CramerReport cramer;
    TailConstants constants;
    PredictionReport prediction;
    CurvePair curves;
    FitReport fit_right;
    std::optional<FitReport> fit_left;
    std::vector<Check> checks;
    /// Literal-form comparison of the fitted constant; reported, never judged.
    double literal_ratio = 0.0;
    std::vector<std::filesystem::path> files;
    std::vector<std::string> warnings;

    bool passed() const;
};

VerdictReport run_verify(const ExperimentPlan& plan);
void print_verdict(std::ostream& os, const VerdictReport& report);

struct GarchParams {
    double omega1 = 0.1;
    double omega2 = 0.1;
    double lambda = 0.1;
    double beta_coef = 0.85;
    double coupling = 1.0;
};

struct GarchReport {
    GarchParams params;
    VerdictReport verdict;
    std::string interpretation;
};

/// Builds the GARCH preset and runs run_verify on it (plan.law is replaced).
GarchReport run_garch_demo(const GarchParams& params, ExperimentPlan plan);

// CSV helpers shared with the command line tool. All files start with the
// schema line; numbers are written with 17 significant digits.

/// Columns t,p_hat,se,ess.
void write_curve_csv(const std::filesystem::path& path, const TailCurve& curve, bool timestamp = false);
/// Reads the columns t, p_hat and se by header name; `#` lines are skipped.
TailCurve read_curve_csv(const std::filesystem::path& path);

/// key=value lines for every CramerReport field and flag.
void write_cramer_kv(std::ostream& os, const CramerReport& report);
void write_constants_csv(std::ostream& os, const TailConstants& c);
void write_fit_csv(std::ostream& os, const FitReport& fit);

std::string format_number(double x);

}  // namespace tripert
