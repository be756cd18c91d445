#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

// Realized paths X_0..X_N, scalar or vector, plus file interchange.
//
// Binary format ("CUTL"): magic bytes 'C','U','T','L', then version u16,
// dimension u16, count u64, followed by count*dimension little-endian f64
// coordinates. The format carries positions only; seed and spec id are
// in-memory metadata (they travel in experiment manifests instead).
//
// CSV format: header "n,x" for scalar paths, "n,x1,..,xd" for vector paths.

namespace cutl {

static_assert(std::endian::native == std::endian::little,
              "CUTL serialization assumes a little-endian host");

struct Trajectory {
    std::vector<double> x;      // X_0..X_N, so horizon N = x.size() - 1
    std::uint64_t seed = 0;
    std::string spec_id;

    std::size_t horizon() const { return x.empty() ? 0 : x.size() - 1; }
    double max() const {
        double m = x.empty() ? 0.0 : x[0];
        for (double v : x) m = v > m ? v : m;
        return m;
    }
};

struct VectorTrajectory {
    std::size_t dim = 0;
    std::vector<double> flat;   // row-major points, flat.size() == dim * count
    std::uint64_t seed = 0;
    std::string spec_id;

    std::size_t count() const { return dim == 0 ? 0 : flat.size() / dim; }
    std::size_t horizon() const { return count() == 0 ? 0 : count() - 1; }
    const double* point(std::size_t n) const { return flat.data() + n * dim; }

    double norm(std::size_t n) const {
        const double* p = point(n);
        double s = 0.0;
        for (std::size_t i = 0; i < dim; ++i) s += p[i] * p[i];
        return std::sqrt(s);
    }

    // The scalar radial process ||xi_n||; tagged so provenance stays visible.
    Trajectory norms() const {
        Trajectory t;
        t.seed = seed;
        t.spec_id = spec_id.empty() ? std::string("norm") : spec_id + "|norm";
        t.x.resize(count());
        for (std::size_t n = 0; n < count(); ++n) t.x[n] = norm(n);
        return t;
    }
};

namespace detail {

constexpr std::uint16_t kCutlVersion = 1;

inline void put_u16(std::ofstream& out, std::uint16_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}
inline void put_u64(std::ofstream& out, std::uint64_t v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
}

inline std::uint16_t get_u16(std::ifstream& in) {
    std::uint16_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}
inline std::uint64_t get_u64(std::ifstream& in) {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    return v;
}

inline void write_cutl_raw(const std::string& path, std::uint16_t dim,
                           const std::vector<double>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out.write("CUTL", 4);
    put_u16(out, kCutlVersion);
    put_u16(out, dim);
    put_u64(out, static_cast<std::uint64_t>(data.size() / dim));
    out.write(reinterpret_cast<const char*>(data.data()),
              static_cast<std::streamsize>(data.size() * sizeof(double)));
    if (!out) throw std::runtime_error("write failed: " + path);
}

struct CutlPayload {
    std::uint16_t dim = 0;
    std::vector<double> data;
};

inline CutlPayload read_cutl_raw(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    char magic[4] = {};
    in.read(magic, 4);
    if (!in || std::string(magic, 4) != "CUTL")
        throw std::runtime_error("not a CUTL file: " + path);
    const std::uint16_t version = get_u16(in);
    if (version != kCutlVersion)
        throw std::runtime_error("unsupported CUTL version in " + path);
    CutlPayload payload;
    payload.dim = get_u16(in);
    if (payload.dim == 0) throw std::runtime_error("CUTL dimension 0 in " + path);
    const std::uint64_t n = get_u64(in);
    payload.data.resize(static_cast<std::size_t>(n) * payload.dim);
    in.read(reinterpret_cast<char*>(payload.data.data()),
            static_cast<std::streamsize>(payload.data.size() * sizeof(double)));
    if (!in) throw std::runtime_error("truncated CUTL file: " + path);
    return payload;
}

// Shortest round-trippable decimal rendering (17 significant digits keeps
// doubles byte-stable across runs, which the reproducibility gate relies on).
inline std::string fmt_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

} // namespace detail

inline void write_cutl(const Trajectory& traj, const std::string& path) {
    detail::write_cutl_raw(path, 1, traj.x);
}

inline void write_cutl(const VectorTrajectory& traj, const std::string& path) {
    if (traj.dim == 0) throw std::runtime_error("vector trajectory has dimension 0");
    detail::write_cutl_raw(path, static_cast<std::uint16_t>(traj.dim), traj.flat);
}

inline Trajectory read_cutl_scalar(const std::string& path) {
    auto payload = detail::read_cutl_raw(path);
    if (payload.dim != 1)
        throw std::runtime_error("expected scalar CUTL file, got dimension " +
                                 std::to_string(payload.dim));
    Trajectory t;
    t.x = std::move(payload.data);
    return t;
}

inline VectorTrajectory read_cutl_vector(const std::string& path) {
    auto payload = detail::read_cutl_raw(path);
    VectorTrajectory t;
    t.dim = payload.dim;
    t.flat = std::move(payload.data);
    return t;
}

inline void write_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << "n,x\n";
    for (std::size_t n = 0; n < traj.x.size(); ++n)
        out << n << ',' << detail::fmt_double(traj.x[n]) << '\n';
}

inline void write_csv(const VectorTrajectory& traj, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << 'n';
    for (std::size_t i = 1; i <= traj.dim; ++i) out << ",x" << i;
    out << '\n';
    for (std::size_t n = 0; n < traj.count(); ++n) {
        out << n;
        const double* p = traj.point(n);
        for (std::size_t i = 0; i < traj.dim; ++i)
            out << ',' << detail::fmt_double(p[i]);
        out << '\n';
    }
}

} // namespace cutl
