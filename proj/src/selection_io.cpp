#include "craft/selection_io.hpp"

#include <algorithm>
#include <fstream>
#include <stdexcept>

namespace craft {

void save_selection(const SelectionResult& result, const std::string& path) {
    std::vector<std::uint64_t> indices = result.indices;
    std::sort(indices.begin(), indices.end());
    {
        std::ofstream out(path, std::ios::trunc);
        if (!out) throw std::runtime_error("cannot write selection: " + path);
        for (std::uint64_t idx : indices) out << idx << "\n";
        if (!out) throw std::runtime_error("write failed for selection: " + path);
    }
    const std::string sidecar = path + ".diag.json";
    std::ofstream diag(sidecar, std::ios::trunc);
    if (!diag) throw std::runtime_error("cannot write diagnostics: " + sidecar);
    diag << diagnostics_to_json(result.diagnostics) << "\n";
    if (!diag) throw std::runtime_error("write failed for diagnostics: " + sidecar);
}

std::vector<std::uint64_t> load_selection(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open selection: " + path);
    std::vector<std::uint64_t> indices;
    std::string line;
    std::uint64_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty())
            throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                     ": empty line in selection file");
        std::uint64_t value = 0;
        for (char c : line) {
            if (c < '0' || c > '9')
                throw std::runtime_error(path + ": line " + std::to_string(line_no) +
                                         ": expected an index, got \"" + line + "\"");
            value = value * 10 + std::uint64_t(c - '0');
        }
        indices.push_back(value);
    }
    return indices;
}

}  // namespace craft
