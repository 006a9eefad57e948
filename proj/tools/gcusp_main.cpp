// gcusp: command-line front end over the C interface.

#include <CLI11.hpp>
#include <map>
#include <string>
#include <vector>

#include "gcusp/gcusp.h"

namespace {

const std::map<std::string, std::string> kHelp = {
    {"model", "model file (INI: [geometry], [interior], [run])"},
    {"output", "output path (default stdout)"},
    {"tol", "integration tolerance (scaled by GCUSP_TOL_SCALE)"},
    {"threshold", "pass/fail threshold of the command's check"},
    {"seed", "seed for the sweep evaluation order"},
    {"kind", "h1, h2, dh1, dh2, j, y or g"},
    {"b", "Bessel order"},
    {"z", "point of the logarithmic cover, a+bi"},
    {"z-grid", "start:end:steps along Re z"},
    {"sheets", "comma list of sheet offsets k (Im z += 2 pi k)"},
    {"im", "Im z of the grid on sheet 0"},
    {"x", "radial coordinate"},
    {"t", "second radial coordinate"},
    {"rect", "re0,re1,im0,im1"},
    {"sector", "alpha or beta (v or w for modes)"},
    {"star", "orthogonal matrix rows separated by ';'"},
    {"eps", "comma list of absorption offsets"},
    {"im-u", "comma list of Im e^z"},
    {"re-u", "Re e^z"},
};

const std::map<std::string, std::string> kAbout = {
    {"eval-special", "Hankel, Bessel and Green functions on the logarithmic cover"},
    {"weber-roundtrip", "Weber transform and inverse on a test profile"},
    {"resolvent-kernel", "cusp resolvent kernel at one point pair"},
    {"resolvent-apply", "resolvent applied to a bump profile"},
    {"poles", "resolvent poles in a rectangle of the cover"},
    {"limiting-absorption", "spectral density against the limiting-absorption jump"},
    {"mode-spectrum", "discrete spectrum of a confined Fourier mode"},
    {"perron-check", "Perron growth and decay rates of a mode"},
    {"scatter", "scattering matrix at a point or over a grid"},
    {"verify-thm2", "identities of the scattering matrix over a grid"},
    {"resonances", "scattering resonances in a rectangle"},
    {"tail-check", "exponential decay of the first-mode tail"},
    {"gluing-check", "parametrix ladder of the glued resolvent"},
};

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{std::string("gcusp ") + gcusp_version() + ": scattering on generalized cusps"};
    app.require_subcommand(1);
    std::map<std::string, std::map<std::string, std::string>> values;
    for (std::size_t c = 0; c < gcusp_command_count(); ++c) {
        const std::string name = gcusp_command_name(c);
        CLI::App* sub = app.add_subcommand(name, kAbout.count(name) ? kAbout.at(name) : "");
        auto& slot = values[name];
        for (std::size_t k = 0; const char* opt = gcusp_command_option(name.c_str(), k); ++k) {
            const std::string key = opt;
            auto it = kHelp.find(key);
            sub->add_option_function<std::string>(
                "--" + key, [&slot, key](const std::string& v) { slot[key] = v; },
                it == kHelp.end() ? key : it->second);
        }
    }
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }
    const std::string name = app.get_subcommands().front()->get_name();
    gcusp_config* cfg = nullptr;
    if (gcusp_config_create(name.c_str(), &cfg) != GCUSP_OK) return 2;
    for (const auto& [k, v] : values[name]) gcusp_config_set(cfg, k.c_str(), v.c_str());
    const int status = gcusp_config_run(cfg);
    gcusp_config_destroy(cfg);
    return status;
}
