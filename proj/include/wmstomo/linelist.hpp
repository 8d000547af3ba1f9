#pragma once

#include <array>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wmstomo/spectroscopy.hpp"

namespace wmstomo {

// Line-list files are plain text: '#' comment lines, then a header naming
// the columns, then one whitespace-separated record per line. The header
// must match the expected column names exactly (units are part of the
// names) so a file cannot be silently misread.
inline constexpr std::array<const char*, 8> linelist_columns = {
    "nu0_cm1",          "S_ref_cm2_atm1", "gamma_air_cm1_atm1", "gamma_self_cm1_atm1",
    "n_T",              "E_low_cm1",      "molar_mass_g_mol",   "T_ref_K"};

inline std::vector<AbsorptionLine> parse_line_list(std::istream& in, const std::string& origin) {
    std::vector<AbsorptionLine> lines;
    std::string raw;
    bool header_seen = false;
    int lineno = 0;
    while (std::getline(in, raw)) {
        ++lineno;
        const auto first = raw.find_first_not_of(" \t\r");
        if (first == std::string::npos || raw[first] == '#') continue;
        std::istringstream row(raw);
        if (!header_seen) {
            for (const char* want : linelist_columns) {
                std::string got;
                if (!(row >> got) || got != want)
                    throw config_error(origin + ":" + std::to_string(lineno) +
                                       ": line-list header mismatch, expected column '" + want + "'");
            }
            std::string extra;
            if (row >> extra)
                throw config_error(origin + ":" + std::to_string(lineno) +
                                   ": unexpected extra column '" + extra + "'");
            header_seen = true;
            continue;
        }
        AbsorptionLine rec;
        if (!(row >> rec.nu0 >> rec.S_ref >> rec.gamma_air >> rec.gamma_self >> rec.n_T >>
              rec.E_low >> rec.molar_mass >> rec.T_ref))
            throw config_error(origin + ":" + std::to_string(lineno) + ": malformed line record");
        rec.validate();
        lines.push_back(rec);
    }
    if (!header_seen) throw config_error(origin + ": line-list file has no header");
    if (lines.empty()) throw config_error(origin + ": line-list file has no records");
    return lines;
}

inline std::vector<AbsorptionLine> load_line_list(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw io_error("cannot open line-list file: " + path);
    return parse_line_list(in, path);
}

// Nearest record to the requested centre wavenumber; errors out rather than
// guessing when nothing lies within `tol`.
inline AbsorptionLine select_line(const std::vector<AbsorptionLine>& lines, double nu0,
                                  double tol = 0.5) {
    const AbsorptionLine* best = nullptr;
    double best_d = tol;
    for (const auto& l : lines) {
        const double d = std::abs(l.nu0 - nu0);
        if (d <= best_d) {
            best_d = d;
            best = &l;
        }
    }
    if (!best)
        throw config_error("no line within " + std::to_string(tol) + " cm^-1 of requested " +
                           std::to_string(nu0));
    return *best;
}

}  // namespace wmstomo
