#pragma once

// Run configuration, model files, result tables and the subcommand dispatcher.
//
// Model files are INI text with sections [geometry], [interior] and [run]:
//
//   [geometry]   a, n, p, mu (comma list), m_p, m_pm1
//   [interior]   x0, warp = power | spline, knots, values, bc = dirichlet | neumann,
//                first_mode, v_alpha, v_alpha_window, v_beta, v_beta_window
//   [run]        any subcommand option; command-line values take precedence
//
// A coupling is a list of matrices separated by '|', rows by ';', entries by
// ',' or blanks: "2 0.8; 0.8 -1 | 0.5 0.3; 0.3 1" is A_0, A_1.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "gcusp/scattering.hpp"

namespace gcusp::cli {

enum class Command {
    eval_special,
    weber_roundtrip,
    resolvent_kernel,
    resolvent_apply,
    poles,
    limiting_absorption,
    mode_spectrum,
    perron_check,
    scatter,
    verify_thm2,
    resonances,
    tail_check,
    gluing_check,
};

/// Exit statuses of run().
enum Exit : int { ok = 0, check_failed = 1, parse_error = 2, validation_error = 3, regime_error = 4 };

Command parse_command(const std::string& name);
std::string command_name(Command c);
const std::vector<std::string>& command_names();
/// Option keys accepted by a subcommand (besides the common ones).
const std::vector<std::string>& command_options(Command c);
const std::vector<std::string>& common_options();

/// "a+bi", "a-bi", "a", "bi", "i", "-i"; no blanks.
cplx parse_complex(const std::string& s);
std::string format_complex(cplx z);
std::vector<double> parse_doubles(const std::string& s);
Rect parse_rect(const std::string& s);

/// Real parts start:end:steps on each sheet k, Im z = im + 2 pi k.
struct ZGrid {
    double start = 0, end = 0;
    int steps = 1;
    std::vector<int> sheets{0};
    double im = 0;
    std::vector<cplx> points() const;
};
ZGrid parse_z_grid(const std::string& spec, const std::string& sheets, double im = 0.0);

ModelManifold parse_model(const std::string& ini_text);
ModelManifold load_model(const std::string& path);

struct RunConfig {
    Command command = Command::eval_special;
    std::map<std::string, std::string> options;  // validated keys, raw values
    std::string model_text;                      // contents of the model file, if any
    double tol_scale = 1.0;                      // GCUSP_TOL_SCALE

    /// Merges the model file's [run] section under `cli` and checks every key and value.
    static RunConfig from_options(const std::string& command, const std::map<std::string, std::string>& cli);
    void validate() const;
    std::string canonical() const;
    std::uint64_t hash() const;  // FNV-1a of canonical()
};

using Cell = std::variant<long long, double, std::string>;

struct ResultTable {
    std::vector<std::string> columns;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::pair<std::string, std::string>> provenance;

    void add_row(std::vector<Cell> row);  // throws InputError on arity mismatch
    void write_csv(std::ostream& os) const;
};

/// Two-column CSV (coordinate, value as "re,im").
void write_function_csv(std::ostream& os, const std::vector<double>& coordinate, const std::vector<cplx>& values,
                        const std::vector<std::pair<std::string, std::string>>& provenance);

/// Executes a validated configuration; artifacts go to the output option or `out`.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

/// Parses, validates and runs, mapping exceptions to exit statuses.
int run_command(const std::string& command, const std::map<std::string, std::string>& options, std::ostream& out,
                std::ostream& err);

}  // namespace gcusp::cli
