#include "carleman/config.hpp"

#include <algorithm>
#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace carleman {

namespace {

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

std::string lower(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(),
                   [](unsigned char c) { return std::tolower(c); });
    return s;
}

}  // namespace

ConfigFile ConfigFile::parse_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw config_error("cannot open config file: " + path);
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_string(ss.str());
}

ConfigFile ConfigFile::parse_string(const std::string& text) {
    ConfigFile cf;
    std::istringstream in(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::size_t hash = line.find_first_of("#;");
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw config_error("config line " + std::to_string(lineno) +
                                   ": malformed section header");
            section = lower(trim(line.substr(1, line.size() - 2)));
            if (section.empty())
                throw config_error("config line " + std::to_string(lineno) + ": empty section");
            cf.sections_[section];
            continue;
        }
        const std::size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw config_error("config line " + std::to_string(lineno) +
                               ": expected key = value");
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string value = trim(line.substr(eq + 1));
        if (key.empty())
            throw config_error("config line " + std::to_string(lineno) + ": empty key");
        if (section.empty())
            throw config_error("config line " + std::to_string(lineno) +
                               ": key outside any [section]");
        cf.sections_[section][key] = value;
    }
    return cf;
}

bool ConfigFile::has(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(lower(section));
    return it != sections_.end() && it->second.count(lower(key)) > 0;
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key) const {
    const auto it = sections_.find(lower(section));
    if (it == sections_.end() || !it->second.count(lower(key)))
        throw config_error("config: missing required key [" + section + "] " + key);
    return it->second.at(lower(key));
}

std::string ConfigFile::get_string(const std::string& section, const std::string& key,
                                   const std::string& fallback) const {
    return has(section, key) ? get_string(section, key) : fallback;
}

double ConfigFile::get_number(const std::string& section, const std::string& key) const {
    const std::string v = get_string(section, key);
    char* end = nullptr;
    const double x = std::strtod(v.c_str(), &end);
    if (end == v.c_str() || trim(end).size() > 0)
        throw config_error("config: [" + section + "] " + key + " is not a number: " + v);
    return x;
}

double ConfigFile::get_number(const std::string& section, const std::string& key,
                              double fallback) const {
    return has(section, key) ? get_number(section, key) : fallback;
}

long ConfigFile::get_integer(const std::string& section, const std::string& key) const {
    const double x = get_number(section, key);
    const long n = static_cast<long>(x);
    if (static_cast<double>(n) != x)
        throw config_error("config: [" + section + "] " + key + " must be an integer");
    return n;
}

long ConfigFile::get_integer(const std::string& section, const std::string& key,
                             long fallback) const {
    return has(section, key) ? get_integer(section, key) : fallback;
}

bool ConfigFile::get_flag(const std::string& section, const std::string& key,
                          bool fallback) const {
    if (!has(section, key)) return fallback;
    const std::string v = lower(get_string(section, key));
    if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
    if (v == "false" || v == "no" || v == "off" || v == "0") return false;
    throw config_error("config: [" + section + "] " + key + " is not a boolean: " + v);
}

std::vector<std::string> ConfigFile::get_strings(const std::string& section,
                                                 const std::string& key) const {
    const std::string v = get_string(section, key);
    std::vector<std::string> out;
    std::string cur;
    for (char ch : v) {
        if (ch == ',') {
            const std::string t = trim(cur);
            if (!t.empty()) out.push_back(t);
            cur.clear();
        } else {
            cur.push_back(ch);
        }
    }
    const std::string t = trim(cur);
    if (!t.empty()) out.push_back(t);
    return out;
}

std::vector<double> ConfigFile::get_numbers(const std::string& section,
                                            const std::string& key) const {
    std::vector<double> out;
    for (const std::string& item : get_strings(section, key)) {
        char* end = nullptr;
        const double x = std::strtod(item.c_str(), &end);
        if (end == item.c_str() || trim(end).size() > 0)
            throw config_error("config: [" + section + "] " + key +
                               " has a non-numeric list entry: " + item);
        out.push_back(x);
    }
    if (out.empty())
        throw config_error("config: [" + section + "] " + key + " list is empty");
    return out;
}

std::vector<double> ConfigFile::get_numbers(const std::string& section, const std::string& key,
                                            const std::vector<double>& fallback) const {
    return has(section, key) ? get_numbers(section, key) : fallback;
}

namespace {

BoundarySpec::Side parse_side(const ConfigFile& cf, const std::string& key) {
    const std::string v = cf.get_string("system", key, "dirichlet");
    std::istringstream ss(v);
    std::string kind;
    ss >> kind;
    if (kind == "dirichlet") return BoundarySpec::dirichlet_side();
    if (kind == "robin") {
        double beta = 0.0, eta = 0.0;
        if (!(ss >> beta >> eta))
            throw config_error("config: [system] " + key + " robin needs 'robin BETA ETA'");
        if (!(beta > 0.0))
            throw config_error("config: [system] " + key + " robin beta must be positive (H4)");
        if (eta < 0.0)
            throw config_error("config: [system] " + key + " robin eta must be nonnegative (H4)");
        return BoundarySpec::robin_side(beta, eta);
    }
    throw config_error("config: [system] " + key + " must be 'dirichlet' or 'robin BETA ETA'");
}

}  // namespace

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    return from_config(ConfigFile::parse_file(path));
}

ExperimentConfig ExperimentConfig::from_config(const ConfigFile& cf) {
    ExperimentConfig ec;
    try {
        ec.grid = build_annulus_grid(
            cf.get_number("grid", "r0"), cf.get_number("grid", "r1"),
            static_cast<int>(cf.get_integer("grid", "nr")),
            static_cast<int>(cf.get_integer("grid", "ntheta")), cf.get_number("grid", "t"),
            static_cast<int>(cf.get_integer("grid", "nt")));
    } catch (const parameter_error& e) {
        throw config_error(std::string("config: ") + e.what());
    }

    ec.n = static_cast<int>(cf.get_integer("system", "n", 2));
    if (ec.n < 1) throw config_error("config: [system] n must be at least 1");
    const std::string scheme = cf.get_string("system", "scheme", "implicit_euler");
    if (scheme == "implicit_euler") {
        ec.scheme = TimeScheme::ImplicitEuler;
    } else if (scheme == "crank_nicolson") {
        ec.scheme = TimeScheme::CrankNicolson;
    } else {
        throw config_error("config: [system] scheme must be implicit_euler or crank_nicolson");
    }

    const std::string preset = cf.get_string("system", "preset", "manufactured_iso");
    const double r0 = ec.grid.r0, r1 = ec.grid.r1;
    if (preset == "manufactured_iso") {
        ec.preset = SystemPreset::ManufacturedIso;
        ec.problem = manufactured_dirichlet_iso(ec.n, r0, r1);
    } else if (preset == "manufactured_aniso") {
        ec.preset = SystemPreset::ManufacturedAniso;
        ec.problem = manufactured_dirichlet_aniso(ec.n, r0, r1);
    } else if (preset == "manufactured_robin") {
        ec.preset = SystemPreset::ManufacturedRobin;
        ec.problem = manufactured_robin_iso(
            ec.n, r0, r1, cf.get_number("system", "beta0", 1.0),
            cf.get_number("system", "eta0", 0.5), cf.get_number("system", "beta1", 0.8),
            cf.get_number("system", "eta1", 0.7));
    } else if (preset == "isotropic") {
        ec.preset = SystemPreset::Isotropic;
        ec.has_exact = false;
        const std::vector<double> kappa = cf.get_numbers("system", "kappa");
        if (static_cast<int>(kappa.size()) != ec.n)
            throw config_error("config: [system] kappa needs n entries");
        const std::vector<double> drift =
            cf.get_numbers("system", "drift", std::vector<double>{0.0, 0.0});
        if (drift.size() != 2)
            throw config_error("config: [system] drift needs exactly 2 entries");
        std::vector<double> coupling = cf.get_numbers(
            "system", "coupling", std::vector<double>(static_cast<std::size_t>(ec.n) * ec.n, 0.0));
        if (static_cast<int>(coupling.size()) != ec.n * ec.n)
            throw config_error("config: [system] coupling needs n*n row-major entries");
        std::vector<std::vector<double>> cmat(ec.n, std::vector<double>(ec.n));
        for (int i = 0; i < ec.n; ++i)
            for (int l = 0; l < ec.n; ++l) cmat[i][l] = coupling[i * ec.n + l];
        std::vector<std::array<double, 2>> bvec(ec.n, {drift[0], drift[1]});
        ManufacturedCase mc;
        mc.coeffs = SystemCoefficients::isotropic(kappa, bvec, cmat);
        mc.bspec.sides.assign(ec.n, {parse_side(cf, "bc_gamma0"), parse_side(cf, "bc_gamma1")});
        mc.ospec = ObservationSpec::constant(ec.n, cf.get_number("system", "obs_gamma", 1.0),
                                             cf.get_number("system", "obs_delta", 0.0));
        mc.exact = nullptr;
        mc.source = nullptr;
        mc.initial = nullptr;
        ec.problem = std::move(mc);
    } else {
        throw config_error("config: unknown [system] preset '" + preset + "'");
    }

    // every H1-H5 violation is rejected here, before compute starts
    const HypothesisReport hyp =
        check_hypotheses(ec.problem.coeffs, ec.problem.bspec, ec.problem.ospec, ec.grid);
    if (!hyp.h1.pass) throw config_error("config: system violates (H1) at " + hyp.h1.witness);
    if (!hyp.h3.pass) throw config_error("config: system violates (H3) at " + hyp.h3.witness);
    if (!hyp.h4.pass) throw config_error("config: system violates (H4) at " + hyp.h4.witness);
    if (!hyp.h5.pass) throw config_error("config: system violates (H5) at " + hyp.h5.witness);

    ec.lambdas = cf.get_numbers("carleman", "lambda", ec.lambdas);
    ec.s_values = cf.get_numbers("carleman", "s", ec.s_values);
    ec.gamma_bar = cf.get_number("carleman", "gamma_bar", ec.gamma_bar);
    ec.q_values = cf.get_numbers("carleman", "q", ec.q_values);
    ec.samples = static_cast<int>(cf.get_integer("carleman", "samples", 0));
    ec.sample_seed = static_cast<std::uint64_t>(cf.get_integer("carleman", "seed", 1));
    ec.refine_check = cf.get_flag("carleman", "refine", true);
    for (double l : ec.lambdas)
        if (!(l > 0.0)) throw config_error("config: [carleman] lambda values must be positive");
    for (double s : ec.s_values)
        if (!(s > 0.0)) throw config_error("config: [carleman] s values must be positive");
    if (!(ec.gamma_bar > 1.0))
        throw config_error("config: [carleman] gamma_bar must exceed 1");
    for (double q : ec.q_values)
        if (!(q >= 2.0)) throw config_error("config: [carleman] q values must be at least 2");

    ec.class_q = cf.get_number("class", "q", 2.0);
    if (!(ec.class_q >= 2.0)) throw config_error("config: [class] q must be at least 2");
    const std::string delta = cf.get_string("class", "delta_tilde", "auto");
    if (delta != "auto") {
        ec.class_delta = cf.get_number("class", "delta_tilde");
        if (!(ec.class_delta > 0.0))
            throw config_error("config: [class] delta_tilde must be positive or 'auto'");
    }
    if (cf.get_string("class", "gtilde", "ones") == "files") {
        ec.gtilde_files = cf.get_strings("class", "gtilde_files");
        if (ec.gtilde_files.empty())
            throw config_error("config: [class] gtilde_files must list at least one field file");
        for (const auto& path : ec.gtilde_files)
            if (!std::filesystem::exists(path))
                throw config_error("config: [class] dual field file does not exist: " + path);
        if (ec.class_delta == 0.0)
            throw config_error(
                "config: [class] delta_tilde must be explicit when gtilde files are given");
    }

    ec.rho_discrepancy = cf.get_string("inverse", "rho", "") == "discrepancy";
    if (!ec.rho_discrepancy)
        ec.rho_values = cf.get_numbers("inverse", "rho", ec.rho_values);
    for (double r : ec.rho_values)
        if (!(r >= 0.0)) throw config_error("config: [inverse] rho values must be nonnegative");
    ec.discrepancy_tau = cf.get_number("inverse", "tau", 1.05);
    ec.noise_levels = cf.get_numbers("inverse", "noise", ec.noise_levels);
    for (double s : ec.noise_levels)
        if (s < 0.0) throw config_error("config: [inverse] noise levels must be nonnegative");
    {
        std::vector<double> seeds =
            cf.get_numbers("inverse", "seeds", std::vector<double>{1.0});
        ec.noise_seeds.clear();
        for (double s : seeds) ec.noise_seeds.push_back(static_cast<std::uint64_t>(s));
    }
    ec.inverse_samples = static_cast<int>(cf.get_integer("inverse", "samples", 1));
    ec.max_iter = static_cast<int>(cf.get_integer("inverse", "max_iter", 500));
    ec.cg_tol = cf.get_number("inverse", "tol", 1e-8);
    ec.project_nonneg = cf.get_flag("inverse", "project_nonneg", false);
    const std::string mode = cf.get_string("inverse", "mode", "separable");
    if (mode == "separable") {
        ec.inverse_separable = true;
    } else if (mode == "full") {
        ec.inverse_separable = false;
    } else {
        throw config_error("config: [inverse] mode must be 'separable' or 'full'");
    }
    ec.dict_radial = static_cast<int>(cf.get_integer("inverse", "dict_radial", 2));
    ec.dict_angular = static_cast<int>(cf.get_integer("inverse", "dict_angular", 4));
    if (ec.dict_radial < 0 || ec.dict_angular < 0)
        throw config_error("config: [inverse] dictionary orders must be nonnegative");
    ec.stability_samples = static_cast<int>(cf.get_integer("inverse", "stability_samples", 0));
    if (ec.max_iter < 1) throw config_error("config: [inverse] max_iter must be positive");

    ec.output_dir = cf.get_string("output", "dir", "out");
    ec.export_csv_fields = cf.get_flag("output", "csv", false);

    long threads = cf.get_integer("run", "threads", 1);
    if (const char* env = std::getenv("CARLEMAN_THREADS")) {
        char* end = nullptr;
        const long t = std::strtol(env, &end, 10);
        if (end != env && t > 0) threads = t;
    }
    ec.threads = static_cast<int>(std::max(1L, threads));
    return ec;
}

}  // namespace carleman
