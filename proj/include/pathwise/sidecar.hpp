#pragma once

// JSON sidecar formats: the parametrisation audit record (time pairs plus
// the segment table).

#include <fstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

#include "pathwise/parametrise.hpp"

namespace pathwise {

inline nlohmann::json parametrisation_to_json(const Parametrisation& par) {
    nlohmann::json j;
    j["delta"] = par.delta;
    j["p"] = par.p;
    nlohmann::json tau = nlohmann::json::array();
    for (std::size_t i = 0; i < par.original_times.size(); ++i)
        tau.push_back({par.original_times[i], par.extended_times[i]});
    j["tau"] = tau;
    nlohmann::json segs = nlohmann::json::array();
    for (const Segment& s : par.segments)
        segs.push_back({{"start", s.ext_start}, {"end", s.ext_end}, {"jump_index", s.jump_index}});
    j["segments"] = segs;
    return j;
}

inline void write_parametrisation_json(const std::string& file, const Parametrisation& par) {
    std::ofstream out(file, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for write: " + file);
    out << parametrisation_to_json(par).dump(2) << "\n";
}

}  // namespace pathwise
