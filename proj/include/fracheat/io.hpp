#pragma once

// Persistence layer: kernel-table cache records (JSON, keyed by dimension,
// order, and build-configuration hash) and grid-field CSV round trips.
//
// All float formatting uses round-trip precision so that a load reproduces
// the saved object bit for bit.

#include <array>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "fracheat/errors.hpp"
#include "fracheat/grid.hpp"
#include "fracheat/kernel.hpp"

namespace fracheat {

using ordered_json = nlohmann::ordered_json;

// ------------------------------- hashing ----------------------------------

inline std::uint64_t fnv1a(std::string_view s,
                           std::uint64_t h = 1469598103934665603ULL) {
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ULL;
    }
    return h;
}

inline std::string hex64(std::uint64_t h) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

/// Round-trip decimal form of a double (shortest is unnecessary; 17 digits
/// always reproduce the value exactly).
inline std::string full_precision(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline std::uint64_t kernel_config_hash(int N, double theta, const KernelConfig& cfg) {
    std::ostringstream key;
    key << "N=" << N << ";theta=" << full_precision(theta)
        << ";r_min=" << full_precision(cfg.r_min) << ";r_max=" << full_precision(cfg.r_max)
        << ";ppd=" << cfg.pts_per_decade << ";r_inv=" << full_precision(cfg.r_inv)
        << ";fit_lo=" << full_precision(cfg.fit_lo)
        << ";quad_tol=" << full_precision(cfg.quad_tol)
        << ";envelope_cut=" << full_precision(cfg.envelope_cut)
        << ";self_check=" << (cfg.self_check ? 1 : 0)
        << ";sct=" << full_precision(cfg.self_check_tol)
        << ";sctf=" << full_precision(cfg.self_check_tol_far);
    return fnv1a(key.str());
}

// --------------------------- kernel-table cache ----------------------------

inline ordered_json kernel_to_json(const KernelTable& k) {
    ordered_json j;
    j["schema"] = "kernel-table/1";
    j["N"] = k.N;
    j["theta"] = k.theta;
    j["cfg_hash"] = hex64(kernel_config_hash(k.N, k.theta, k.cfg));
    j["cfg"] = {{"r_min", k.cfg.r_min},
                {"r_max", k.cfg.r_max},
                {"pts_per_decade", k.cfg.pts_per_decade},
                {"r_inv", k.cfg.r_inv},
                {"fit_lo", k.cfg.fit_lo},
                {"quad_tol", k.cfg.quad_tol},
                {"envelope_cut", k.cfg.envelope_cut},
                {"self_check", k.cfg.self_check},
                {"self_check_tol", k.cfg.self_check_tol},
                {"self_check_tol_far", k.cfg.self_check_tol_far}};
    j["log_r"] = k.log_r;
    j["log_g"] = k.log_g;
    j["gamma0"] = k.gamma0;
    j["tail_coeff"] = {k.tail_c1, k.tail_c2, k.tail_c3};
    return j;
}

inline KernelTable kernel_from_json(const ordered_json& j) {
    if (!j.is_object() || j.value("schema", "") != "kernel-table/1")
        throw IoError("kernel cache: unrecognized record schema");
    KernelTable k;
    try {
        k.N = j.at("N").get<int>();
        k.theta = j.at("theta").get<double>();
        const auto& c = j.at("cfg");
        k.cfg.r_min = c.at("r_min").get<double>();
        k.cfg.r_max = c.at("r_max").get<double>();
        k.cfg.pts_per_decade = c.at("pts_per_decade").get<int>();
        k.cfg.r_inv = c.at("r_inv").get<double>();
        k.cfg.fit_lo = c.at("fit_lo").get<double>();
        k.cfg.quad_tol = c.at("quad_tol").get<double>();
        k.cfg.envelope_cut = c.at("envelope_cut").get<double>();
        k.cfg.self_check = c.at("self_check").get<bool>();
        k.cfg.self_check_tol = c.at("self_check_tol").get<double>();
        k.cfg.self_check_tol_far = c.at("self_check_tol_far").get<double>();
        k.log_r = j.at("log_r").get<std::vector<double>>();
        k.log_g = j.at("log_g").get<std::vector<double>>();
        k.gamma0 = j.at("gamma0").get<double>();
        const auto tail = j.at("tail_coeff").get<std::vector<double>>();
        if (tail.size() != 3) throw IoError("kernel cache: tail_coeff needs 3 entries");
        k.tail_c1 = tail[0];
        k.tail_c2 = tail[1];
        k.tail_c3 = tail[2];
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("kernel cache: malformed record: ") + e.what());
    }
    if (k.log_r.size() != k.log_g.size())
        throw IoError("kernel cache: grid/value length mismatch");
    if (k.N < 1 || k.N > 3 || !(k.theta > 0.0) || k.theta > 2.0)
        throw IoError("kernel cache: invalid dimension or order");
    const std::string recorded = j.value("cfg_hash", "");
    if (recorded != hex64(kernel_config_hash(k.N, k.theta, k.cfg)))
        throw IoError("kernel cache: configuration hash mismatch");
    if (k.theta < 2.0 && k.log_r.size() < 2)
        throw IoError("kernel cache: table too short for interpolation");
    k.finalize_derived();
    return k;
}

inline void save_kernel_table(const KernelTable& k, const std::string& path) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << kernel_to_json(k).dump(2) << '\n';
    if (!out) throw IoError("write failed: " + path);
}

inline KernelTable load_kernel_table(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);
    ordered_json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw IoError(std::string("kernel cache: invalid JSON in ") + path + ": " +
                      e.what());
    }
    return kernel_from_json(j);
}

/// Cache-file location under the FRACHEAT_CACHE directory; empty when the
/// environment variable is unset.
inline std::optional<std::string> kernel_cache_path(int N, double theta,
                                                    const KernelConfig& cfg = {}) {
    const char* dir = std::getenv("FRACHEAT_CACHE");
    if (dir == nullptr || *dir == '\0') return std::nullopt;
    std::ostringstream name;
    name << "kernel_" << hex64(kernel_config_hash(N, theta, cfg)) << ".json";
    return (std::filesystem::path(dir) / name.str()).string();
}

/// Load-or-build: returns the cached table when a valid record exists,
/// otherwise builds and (when a cache directory is configured) saves it.
/// A stale or corrupt record is rebuilt and overwritten, never trusted.
inline KernelTable cached_kernel(int N, double theta, const KernelConfig& cfg = {}) {
    const auto path = kernel_cache_path(N, theta, cfg);
    if (path) {
        std::error_code ec;
        if (std::filesystem::exists(*path, ec)) {
            try {
                KernelTable k = load_kernel_table(*path);
                if (k.N == N && k.theta == theta && k.cfg == cfg) return k;
            } catch (const IoError&) {
                // fall through to rebuild
            }
        }
    }
    KernelTable k = KernelTable::build(N, theta, cfg);
    if (path) {
        std::error_code ec;
        std::filesystem::create_directories(std::filesystem::path(*path).parent_path(), ec);
        try {
            save_kernel_table(k, *path);
        } catch (const IoError&) {
            // a read-only cache directory must not break the computation
        }
    }
    return k;
}

// ---------------------------- grid-field CSV -------------------------------

/// CSV layout: two comment lines with the geometry, then a column header
/// `index,x0[,x1[,x2]],value` and one row per cell in flat (row-major) order.
inline void save_field_csv(const GridField& g, const std::string& path) {
    g.check_invariants();
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw IoError("cannot open for writing: " + path);
    out << "# field dim=" << g.dim << " points=" << g.points
        << " half_width=" << full_precision(g.half_width)
        << " background=" << full_precision(g.background)
        << " policy=" << (g.policy == SingularCellPolicy::OriginAverage ? 1 : 0) << '\n';
    out << "# content_hash=" << hex64(content_hash(g)) << '\n';
    out << "index";
    for (int d = 0; d < g.dim; ++d) out << ",x" << d;
    out << ",value\n";

    std::array<int, 3> idx{0, 0, 0};
    for (std::size_t i = 0; i < g.values.size(); ++i) {
        out << i;
        for (int d = 0; d < g.dim; ++d) out << ',' << full_precision(g.center(idx[d]));
        out << ',' << full_precision(g.values[i]) << '\n';
        for (int d = g.dim - 1; d >= 0; --d) {
            if (++idx[d] < g.points) break;
            idx[d] = 0;
        }
    }
    if (!out) throw IoError("write failed: " + path);
}

inline GridField load_field_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open for reading: " + path);

    std::string line;
    if (!std::getline(in, line) || line.rfind("# field ", 0) != 0)
        throw IoError("field csv: missing geometry header in " + path);

    GridField g;
    int policy = 0;
    {
        std::istringstream hdr(line.substr(8));
        std::string tok;
        while (hdr >> tok) {
            const auto eq = tok.find('=');
            if (eq == std::string::npos)
                throw IoError("field csv: malformed geometry token '" + tok + "'");
            const std::string key = tok.substr(0, eq), val = tok.substr(eq + 1);
            try {
                if (key == "dim") g.dim = std::stoi(val);
                else if (key == "points") g.points = std::stoi(val);
                else if (key == "half_width") g.half_width = std::stod(val);
                else if (key == "background") g.background = std::stod(val);
                else if (key == "policy") policy = std::stoi(val);
                else throw IoError("field csv: unknown geometry key '" + key + "'");
            } catch (const std::logic_error&) {
                throw IoError("field csv: unparsable geometry value '" + tok + "'");
            }
        }
    }
    g.policy = policy == 1 ? SingularCellPolicy::OriginAverage : SingularCellPolicy::None;

    std::uint64_t recorded_hash = 0;
    bool have_hash = false;
    std::streampos data_start = in.tellg();
    while (std::getline(in, line)) {
        if (line.rfind("# content_hash=", 0) == 0) {
            recorded_hash = std::strtoull(line.c_str() + 15, nullptr, 16);
            have_hash = true;
            data_start = in.tellg();
            continue;
        }
        if (!line.empty() && line[0] == '#') {
            data_start = in.tellg();
            continue;
        }
        break; // column header consumed
    }
    (void)data_start;
    if (line.rfind("index,", 0) != 0)
        throw IoError("field csv: missing column header in " + path);

    std::size_t expect = 1;
    for (int d = 0; d < g.dim; ++d) expect *= static_cast<std::size_t>(g.points);
    g.values.reserve(expect);

    while (std::getline(in, line)) {
        if (line.empty()) continue;
        const auto last = line.rfind(',');
        if (last == std::string::npos)
            throw IoError("field csv: malformed row '" + line + "'");
        try {
            g.values.push_back(std::stod(line.substr(last + 1)));
        } catch (const std::logic_error&) {
            throw IoError("field csv: unparsable value in row '" + line + "'");
        }
    }
    if (g.values.size() != expect)
        throw IoError("field csv: expected " + std::to_string(expect) + " rows, got " +
                      std::to_string(g.values.size()));
    g.check_invariants();
    if (have_hash && content_hash(g) != recorded_hash)
        throw IoError("field csv: content hash mismatch in " + path);
    return g;
}

} // namespace fracheat
