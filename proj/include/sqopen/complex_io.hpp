#pragma once

// Complex file format:
//   {"vertices": [{"id": int, "coords": [real, ...]}, ...],
//    "simplices": [[id, ...], ...]}
// `simplices` lists maximal simplices by vertex id; the loader closes the
// list under faces. "coords" may be omitted on every vertex (but not on some).

#include <fstream>
#include <string>

#include <json.hpp>

#include "sqopen/space.hpp"

namespace sqopen {

inline ComplexPtr complex_from_json(const nlohmann::json& doc)
{
    require(doc.is_object() && doc.contains("vertices"), "complex JSON needs a 'vertices' array");
    std::vector<int> ids;
    std::vector<std::vector<double>> coords;
    std::size_t with_coords = 0;
    for (const auto& v : doc.at("vertices")) {
        require(v.contains("id") && v.at("id").is_number_integer(), "vertex needs an integer 'id'");
        ids.push_back(v.at("id").get<int>());
        if (v.contains("coords")) {
            coords.push_back(v.at("coords").get<std::vector<double>>());
            ++with_coords;
        } else {
            coords.emplace_back();
        }
    }
    require(with_coords == 0 || with_coords == ids.size(), "either all vertices carry coords or none do");
    if (with_coords == 0)
        coords.clear();

    std::map<int, int> index;
    for (std::size_t i = 0; i < ids.size(); ++i)
        index[ids[i]] = static_cast<int>(i);
    std::vector<Simplex> simplices;
    if (doc.contains("simplices"))
        for (const auto& s : doc.at("simplices")) {
            Simplex simplex;
            for (const auto& id : s) {
                auto it = index.find(id.get<int>());
                require(it != index.end(), "simplex references unknown vertex id " + id.dump());
                simplex.push_back(it->second);
            }
            simplices.push_back(std::move(simplex));
        }
    return std::make_shared<const SimplicialComplex>(std::move(ids), std::move(coords), std::move(simplices));
}

inline nlohmann::json complex_to_json(const SimplicialComplex& K)
{
    nlohmann::json vertices = nlohmann::json::array();
    for (std::size_t v = 0; v < K.vertex_count(); ++v) {
        nlohmann::json entry{{"id", K.ids()[v]}};
        if (K.has_coords())
            entry["coords"] = K.all_coords()[v];
        vertices.push_back(std::move(entry));
    }
    nlohmann::json simplices = nlohmann::json::array();
    for (const auto& s : K.maximal_simplices()) {
        nlohmann::json ids = nlohmann::json::array();
        for (int v : s)
            ids.push_back(K.ids()[v]);
        simplices.push_back(std::move(ids));
    }
    return {{"vertices", std::move(vertices)}, {"simplices", std::move(simplices)}};
}

inline ComplexPtr load_complex(const std::string& path)
{
    std::ifstream in(path);
    require(static_cast<bool>(in), "cannot open complex file " + path);
    nlohmann::json doc;
    try {
        in >> doc;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::InvalidArgument, "malformed complex file " + path + ": " + e.what());
    }
    return complex_from_json(doc);
}

} // namespace sqopen
