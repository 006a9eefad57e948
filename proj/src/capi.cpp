#include "gcusp/gcusp.h"

#include <iostream>
#include <map>
#include <string>

#include "gcusp/cli_io.hpp"
#include "gcusp/scattering.hpp"
#include "gcusp/special_fn.hpp"

struct gcusp_model {
    gcusp::ModelManifold mm;
};

struct gcusp_config {
    std::string command;
    std::map<std::string, std::string> options;
};

namespace {

thread_local std::string last_error;

template <class F>
gcusp_status guarded(F&& f) {
    try {
        f();
        last_error.clear();
        return GCUSP_OK;
    } catch (const gcusp::ParseError& e) {
        last_error = e.what();
        return GCUSP_PARSE_ERROR;
    } catch (const gcusp::InputError& e) {
        last_error = e.what();
        return GCUSP_INVALID_INPUT;
    } catch (const gcusp::DomainError& e) {
        last_error = e.what();
        return GCUSP_INVALID_INPUT;
    } catch (const gcusp::PoleError& e) {
        last_error = e.what();
        return GCUSP_POLE;
    } catch (const gcusp::Error& e) {
        last_error = e.what();
        return GCUSP_REGIME_ERROR;
    } catch (const std::exception& e) {
        last_error = e.what();
        return GCUSP_INTERNAL_ERROR;
    } catch (...) {
        last_error = "unknown exception";
        return GCUSP_INTERNAL_ERROR;
    }
}

gcusp::ScatteringSector sector_of(gcusp_sector s) {
    if (s == GCUSP_ALPHA) return gcusp::ScatteringSector::alpha;
    if (s == GCUSP_BETA) return gcusp::ScatteringSector::beta;
    throw gcusp::InputError("unknown sector");
}

void require(const void* p, const char* what) {
    if (!p) throw gcusp::InputError(std::string("null ") + what);
}

}  // namespace

extern "C" {

const char* gcusp_version(void) { return "1.0.0"; }

const char* gcusp_last_error(void) { return last_error.c_str(); }

size_t gcusp_command_count(void) { return gcusp::cli::command_names().size(); }

const char* gcusp_command_name(size_t index) {
    const auto& n = gcusp::cli::command_names();
    return index < n.size() ? n[index].c_str() : nullptr;
}

const char* gcusp_command_option(const char* command, size_t index) {
    if (!command) return nullptr;
    try {
        const auto& own = gcusp::cli::command_options(gcusp::cli::parse_command(command));
        if (index < own.size()) return own[index].c_str();
        const auto& common = gcusp::cli::common_options();
        index -= own.size();
        return index < common.size() ? common[index].c_str() : nullptr;
    } catch (...) {
        return nullptr;
    }
}

gcusp_status gcusp_config_create(const char* command, gcusp_config** out) {
    return guarded([&] {
        require(command, "command");
        require(out, "output handle");
        *out = nullptr;
        (void)gcusp::cli::parse_command(command);
        *out = new gcusp_config{command, {}};
    });
}

gcusp_status gcusp_config_set(gcusp_config* config, const char* key, const char* value) {
    return guarded([&] {
        require(config, "config");
        require(key, "key");
        require(value, "value");
        config->options[key] = value;
    });
}

void gcusp_config_destroy(gcusp_config* config) { delete config; }

int gcusp_config_run(const gcusp_config* config) {
    if (!config) {
        last_error = "null config";
        return gcusp::cli::Exit::validation_error;
    }
    return gcusp::cli::run_command(config->command, config->options, std::cout, std::cerr);
}

gcusp_status gcusp_model_parse(const char* ini_text, gcusp_model** out) {
    return guarded([&] {
        require(ini_text, "text");
        require(out, "output handle");
        *out = nullptr;
        *out = new gcusp_model{gcusp::cli::parse_model(ini_text)};
    });
}

gcusp_status gcusp_model_load(const char* path, gcusp_model** out) {
    return guarded([&] {
        require(path, "path");
        require(out, "output handle");
        *out = nullptr;
        *out = new gcusp_model{gcusp::cli::load_model(path)};
    });
}

void gcusp_model_destroy(gcusp_model* model) { delete model; }

int gcusp_model_channels(const gcusp_model* model, gcusp_sector sector) {
    if (!model) return -1;
    try {
        return model->mm.channels(sector_of(sector));
    } catch (...) {
        return -1;
    }
}

gcusp_status gcusp_scattering_matrix(const gcusp_model* model, double re_z, double im_z, gcusp_sector sector,
                                     double* out, size_t capacity) {
    return guarded([&] {
        require(model, "model");
        require(out, "output buffer");
        const auto sm = gcusp::scattering_matrix(model->mm, {re_z, im_z}, sector_of(sector));
        const auto m = static_cast<size_t>(sm.C.rows());
        if (capacity < 2 * m * m) throw gcusp::InputError("output buffer too small");
        for (size_t i = 0; i < m; ++i)
            for (size_t j = 0; j < m; ++j) {
                out[2 * (i * m + j)] = sm.C(i, j).real();
                out[2 * (i * m + j) + 1] = sm.C(i, j).imag();
            }
    });
}

gcusp_status gcusp_unitarity_defects(const gcusp_model* model, double re_z, double im_z, gcusp_sector sector,
                                     double* unitarity, double* conjugation) {
    return guarded([&] {
        require(model, "model");
        require(unitarity, "output");
        require(conjugation, "output");
        const auto r = gcusp::check_unitarity(model->mm, {re_z, im_z}, sector_of(sector));
        *unitarity = r.unitarity;
        *conjugation = r.conjugation;
    });
}

gcusp_status gcusp_functional_equation_defect(const gcusp_model* model, double re_z, double im_z,
                                              gcusp_sector sector, double* defect) {
    return guarded([&] {
        require(model, "model");
        require(defect, "output");
        *defect = gcusp::check_functional_equation(model->mm, {re_z, im_z}, sector_of(sector)).defect;
    });
}

gcusp_status gcusp_hankel(int kind, double b, double re_z, double im_z, double x, double* re, double* im) {
    return guarded([&] {
        require(re, "output");
        require(im, "output");
        if (kind != 1 && kind != 2) throw gcusp::InputError("kind must be 1 or 2");
        const auto v = gcusp::hankel(kind, b, {re_z, im_z}, x);
        *re = v.real();
        *im = v.imag();
    });
}

gcusp_status gcusp_bare_cusp_coefficient(double order, double re_z, double im_z, double r, double* re, double* im) {
    return guarded([&] {
        require(re, "output");
        require(im, "output");
        const auto v = gcusp::bare_cusp_coefficient(order, {re_z, im_z}, r);
        *re = v.real();
        *im = v.imag();
    });
}

}  // extern "C"
