#ifndef SCHWARZDD_CONFIG_HPP
#define SCHWARZDD_CONFIG_HPP

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "types.hpp"

namespace schwarzdd {

/// Flat INI-style key-value config: [section] headers, key = value lines,
/// comments with '#' or ';'.
class IniFile {
 public:
    static IniFile parse(std::istream& is) {
        IniFile ini;
        std::string line, section;
        while (std::getline(is, line)) {
            const auto cut = line.find_first_of("#;");
            if (cut != std::string::npos) line.erase(cut);
            line = trim(line);
            if (line.empty()) continue;
            if (line.front() == '[' && line.back() == ']') {
                section = trim(line.substr(1, line.size() - 2));
                continue;
            }
            const auto eq = line.find('=');
            if (eq == std::string::npos)
                throw std::runtime_error("config: malformed line: " + line);
            ini.values_[section + "." + trim(line.substr(0, eq))] =
                trim(line.substr(eq + 1));
        }
        return ini;
    }

    static IniFile parse_file(const std::string& path) {
        std::ifstream is(path);
        if (!is) throw std::runtime_error("config: cannot open " + path);
        return parse(is);
    }

    bool has(const std::string& key) const { return values_.count(key) > 0; }

    std::string get(const std::string& key, const std::string& fallback = "") const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : std::stod(it->second);
    }

    int get_int(const std::string& key, int fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : std::stoi(it->second);
    }

    std::vector<int> get_int_list(const std::string& key,
                                  std::vector<int> fallback) const {
        auto it = values_.find(key);
        if (it == values_.end()) return fallback;
        std::vector<int> out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!trim(item).empty()) out.push_back(std::stoi(trim(item)));
        return out;
    }

    std::vector<std::string> get_string_list(const std::string& key) const {
        std::vector<std::string> out;
        auto it = values_.find(key);
        if (it == values_.end()) return out;
        std::stringstream ss(it->second);
        std::string item;
        while (std::getline(ss, item, ','))
            if (!trim(item).empty()) out.push_back(trim(item));
        return out;
    }

    static std::string trim(const std::string& s) {
        auto b = s.begin(), e = s.end();
        while (b != e && std::isspace(static_cast<unsigned char>(*b))) ++b;
        while (e != b && std::isspace(static_cast<unsigned char>(*(e - 1)))) --e;
        return std::string(b, e);
    }

 private:
    std::map<std::string, std::string> values_;
};

/// Parsed experiment description; one preset file per experiment.
struct ExperimentConfig {
    // [problem]
    std::string kind = "poisson";  // poisson | helmholtz
    double omega = 0.0;            // set directly or via wavelength
    double wavelength = 0.0;       // omega = 2*pi/wavelength when > 0
    double core_coefficient = 1.0;
    double cladding_coefficient = 1.0;
    double core_center_x = 0.0;
    double core_width = 0.0;
    double source_constant = 0.0;        // volume source f
    double incident_gaussian_decay = 0;  // g(x) = exp(-decay * x^2)
    std::string bc_bottom = "dirichlet";
    std::string bc_right = "dirichlet";
    std::string bc_top = "dirichlet";
    std::string bc_left = "dirichlet";

    // [mesh]
    int nx = 8, ny = 8;
    double lx = 1.0, ly = 1.0;
    int refinements = 1;  // weak-scaling points for scaling-study

    // [decomposition]
    std::string mode = "geometric";  // geometric | graph
    int px = 2, py = 2;
    int n_subdomains = 4;  // graph mode
    unsigned seed = 0;
    std::vector<int> overlap_layers = {1};
    std::string overlap_mode = "element";  // element | node

    // [preconditioner]
    std::string variant = "RAS";
    int levels = 1;
    double alpha = 1.0;
    bool oras_inverse_multiplicity = false;
    std::vector<std::string> compare;  // variant:levels pairs

    // [solver]
    std::string method = "gmres";  // gmres | pcg
    double tol = 1e-8;
    int maxit = 1000;
    int restart = 0;  // 0 = full GMRES

    // [output]
    std::string out_dir = "out";

    int threads = 1;
    bool report_walltime = true;

    double effective_omega() const {
        if (wavelength > 0.0) return 2.0 * 3.14159265358979323846 / wavelength;
        return omega;
    }

    static ExperimentConfig from_ini(const IniFile& ini) {
        ExperimentConfig c;
        c.kind = ini.get("problem.kind", c.kind);
        c.omega = ini.get_double("problem.omega", c.omega);
        c.wavelength = ini.get_double("problem.wavelength", c.wavelength);
        c.core_coefficient = ini.get_double("problem.core_coefficient", c.core_coefficient);
        c.cladding_coefficient =
            ini.get_double("problem.cladding_coefficient", c.cladding_coefficient);
        c.core_center_x = ini.get_double("problem.core_center_x", c.core_center_x);
        c.core_width = ini.get_double("problem.core_width", c.core_width);
        c.source_constant = ini.get_double("problem.source_constant", c.source_constant);
        c.incident_gaussian_decay =
            ini.get_double("problem.incident_gaussian_decay", c.incident_gaussian_decay);
        c.bc_bottom = ini.get("problem.bc_bottom", c.bc_bottom);
        c.bc_right = ini.get("problem.bc_right", c.bc_right);
        c.bc_top = ini.get("problem.bc_top", c.bc_top);
        c.bc_left = ini.get("problem.bc_left", c.bc_left);

        c.nx = ini.get_int("mesh.nx", c.nx);
        c.ny = ini.get_int("mesh.ny", c.ny);
        c.lx = ini.get_double("mesh.lx", c.lx);
        c.ly = ini.get_double("mesh.ly", c.ly);
        c.refinements = ini.get_int("mesh.refinements", c.refinements);

        c.mode = ini.get("decomposition.mode", c.mode);
        c.px = ini.get_int("decomposition.px", c.px);
        c.py = ini.get_int("decomposition.py", c.py);
        c.n_subdomains = ini.get_int("decomposition.n", c.n_subdomains);
        c.seed = static_cast<unsigned>(ini.get_int("decomposition.seed", 0));
        c.overlap_layers = ini.get_int_list("decomposition.overlap_layers", c.overlap_layers);
        c.overlap_mode = ini.get("decomposition.overlap_mode", c.overlap_mode);

        c.variant = ini.get("preconditioner.variant", c.variant);
        c.levels = ini.get_int("preconditioner.levels", c.levels);
        c.alpha = ini.get_double("preconditioner.alpha", c.alpha);
        c.oras_inverse_multiplicity =
            ini.get_int("preconditioner.oras_inverse_multiplicity", 0) != 0;
        c.compare = ini.get_string_list("preconditioner.compare");

        c.method = ini.get("solver.method", c.method);
        c.tol = ini.get_double("solver.tol", c.tol);
        c.maxit = ini.get_int("solver.maxit", c.maxit);
        c.restart = ini.get_int("solver.restart", c.restart);

        c.out_dir = ini.get("output.path", c.out_dir);
        if (c.overlap_layers.empty())
            throw std::runtime_error("config: overlap_layers must be nonempty");
        return c;
    }

    static ExperimentConfig from_file(const std::string& path) {
        return from_ini(IniFile::parse_file(path));
    }
};

}  // namespace schwarzdd

#endif
