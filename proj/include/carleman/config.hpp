#pragma once

#include <map>
#include <string>
#include <vector>

#include "carleman/coefficients.hpp"
#include "carleman/errors.hpp"
#include "carleman/forward.hpp"
#include "carleman/geometry.hpp"
#include "carleman/manufactured.hpp"

namespace carleman {

// Line-oriented config: [section] headers, key = value pairs, comma-separated
// lists, '#' or ';' comments. The grammar is documented in the README.
class ConfigFile {
public:
    static ConfigFile parse_file(const std::string& path);
    static ConfigFile parse_string(const std::string& text);

    bool has(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key) const;
    std::string get_string(const std::string& section, const std::string& key,
                           const std::string& fallback) const;
    double get_number(const std::string& section, const std::string& key) const;
    double get_number(const std::string& section, const std::string& key, double fallback) const;
    long get_integer(const std::string& section, const std::string& key) const;
    long get_integer(const std::string& section, const std::string& key, long fallback) const;
    bool get_flag(const std::string& section, const std::string& key, bool fallback) const;
    std::vector<double> get_numbers(const std::string& section, const std::string& key) const;
    std::vector<double> get_numbers(const std::string& section, const std::string& key,
                                    const std::vector<double>& fallback) const;
    std::vector<std::string> get_strings(const std::string& section,
                                         const std::string& key) const;

private:
    std::map<std::string, std::map<std::string, std::string>> sections_;
};

enum class SystemPreset {
    ManufacturedIso,
    ManufacturedAniso,
    ManufacturedRobin,
    Isotropic,
};

// Fully validated experiment description. Construction checks every module
// precondition (grid bounds, coefficient hypotheses, list shapes) before any
// compute starts.
struct ExperimentConfig {
    AnnulusGrid grid;
    TimeScheme scheme = TimeScheme::ImplicitEuler;

    int n = 2;
    SystemPreset preset = SystemPreset::ManufacturedIso;
    ManufacturedCase problem;  // coefficients + bc + observation (+ exact when manufactured)
    bool has_exact = true;

    // carleman sweep
    std::vector<double> lambdas{2.0};
    std::vector<double> s_values{20.0, 40.0, 80.0};
    double gamma_bar = 2.0;
    std::vector<double> q_values{2.0};
    int samples = 0;  // 0 means "use the manufactured pair"
    std::uint64_t sample_seed = 1;
    bool refine_check = true;

    // class
    double class_q = 2.0;
    double class_delta = 0.0;                // 0 means auto calibration
    std::vector<std::string> gtilde_files;   // empty means the constant-1 dual

    // inverse
    std::vector<double> rho_values{1e-8};
    bool rho_discrepancy = false;
    double discrepancy_tau = 1.05;
    std::vector<double> noise_levels{0.0};
    std::vector<std::uint64_t> noise_seeds{1};
    int inverse_samples = 1;
    int max_iter = 500;
    double cg_tol = 1e-8;
    bool project_nonneg = false;
    bool inverse_separable = true;  // known-time-profile formulation
    int dict_radial = 2;
    int dict_angular = 4;  // 0 = nodal unknown
    int stability_samples = 0;

    std::string output_dir = "out";
    bool export_csv_fields = false;
    int threads = 1;

    static ExperimentConfig load(const std::string& path);
    static ExperimentConfig from_config(const ConfigFile& cf);
};

}  // namespace carleman
