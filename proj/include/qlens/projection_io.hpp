#pragma once

#include <json.hpp>

#include <cmath>
#include <string>

#include "qlens/errors.hpp"
#include "qlens/modules.hpp"

namespace qlens {

// On-disk format for a projection matrix.  Entries are stored sparsely: the
// compact block of a leg appears only when nonzero, and inside a block only
// nonzero rows appear, each as [row, [col, re, im], [col, re, im], ...].

inline nlohmann::json projection_to_json(const ProjectionRep& P) {
    nlohmann::json j;
    j["l"] = P.l;
    j["N"] = P.N;
    j["r"] = P.r;
    nlohmann::json rows = nlohmann::json::array();
    for (int i = 0; i < P.r; ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (int jj = 0; jj < P.r; ++jj) {
            const UnitizedElement& e =
                P.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)];
            nlohmann::json cell;
            cell["scalar"] = {e.scalar.real(), e.scalar.imag()};
            nlohmann::json compact = nlohmann::json::array();
            for (int s = 0; s < P.l; ++s) {
                const DenseMat& block = e.legs[static_cast<std::size_t>(s)];
                nlohmann::json block_rows = nlohmann::json::array();
                for (int a = 0; a < P.N; ++a) {
                    nlohmann::json line = nlohmann::json::array();
                    for (int b = 0; b < P.N; ++b) {
                        const Complex v = block(a, b);
                        if (v != Complex(0.0, 0.0))
                            line.push_back({b, v.real(), v.imag()});
                    }
                    if (!line.empty()) {
                        line.insert(line.begin(), a);
                        block_rows.push_back(line);
                    }
                }
                if (!block_rows.empty())
                    compact.push_back({{"leg", s + 1}, {"rows", block_rows}});
            }
            if (!compact.empty()) cell["compact"] = compact;
            row.push_back(cell);
        }
        rows.push_back(row);
    }
    j["entries"] = rows;
    return j;
}

inline ProjectionRep projection_from_json(const nlohmann::json& j) {
    if (!j.is_object() || !j.contains("l") || !j.contains("N") || !j.contains("r") ||
        !j.contains("entries"))
        throw config_error("projection document needs l, N, r, and entries");
    const int l = j.at("l").get<int>();
    const int N = j.at("N").get<int>();
    const int r = j.at("r").get<int>();
    if (l < 1 || N < 1 || r < 1) throw config_error("projection dimensions must be positive");
    const auto& rows = j.at("entries");
    if (!rows.is_array() || static_cast<int>(rows.size()) != r)
        throw config_error("entries must hold exactly r rows");
    ProjectionRep P = ProjectionRep::zero(l, N, r);
    for (int i = 0; i < r; ++i) {
        const auto& row = rows.at(static_cast<std::size_t>(i));
        if (!row.is_array() || static_cast<int>(row.size()) != r)
            throw config_error("entry row " + std::to_string(i) + " must hold exactly r cells");
        for (int jj = 0; jj < r; ++jj) {
            const auto& cell = row.at(static_cast<std::size_t>(jj));
            if (!cell.is_object() || !cell.contains("scalar"))
                throw config_error("entry cell must be an object with a scalar");
            const auto& sc = cell.at("scalar");
            if (!sc.is_array() || sc.size() != 2)
                throw config_error("scalar must be [re, im]");
            UnitizedElement& e =
                P.entries[static_cast<std::size_t>(i)][static_cast<std::size_t>(jj)];
            e.scalar = Complex(sc.at(0).get<double>(), sc.at(1).get<double>());
            if (!cell.contains("compact")) continue;
            const auto& compact = cell.at("compact");
            if (!compact.is_array()) throw config_error("compact must be an array of leg blocks");
            for (const auto& block : compact) {
                if (!block.is_object() || !block.contains("leg") || !block.contains("rows"))
                    throw config_error("leg block needs leg and rows");
                const int s = block.at("leg").get<int>();
                if (s < 1 || s > l)
                    throw config_error("leg " + std::to_string(s) + " out of range 1.." +
                                       std::to_string(l));
                const auto& block_rows = block.at("rows");
                if (!block_rows.is_array()) throw config_error("rows must be an array");
                DenseMat& target = e.legs[static_cast<std::size_t>(s - 1)];
                for (const auto& line : block_rows) {
                    if (!line.is_array() || line.empty() || !line.at(0).is_number_integer())
                        throw config_error("a row starts with its index");
                    const int a = line.at(0).get<int>();
                    if (a < 0 || a >= N) throw config_error("row index out of range");
                    for (std::size_t c = 1; c < line.size(); ++c) {
                        const auto& t = line.at(c);
                        if (!t.is_array() || t.size() != 3)
                            throw config_error("a row entry is [col, re, im]");
                        const int b = t.at(0).get<int>();
                        if (b < 0 || b >= N) throw config_error("column index out of range");
                        target(a, b) = Complex(t.at(1).get<double>(), t.at(2).get<double>());
                    }
                }
            }
        }
    }
    return P;
}

}  // namespace qlens
