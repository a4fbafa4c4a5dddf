#include "carleman/field_io.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <vector>

namespace carleman {

namespace {

constexpr char kMagic[8] = {'C', 'A', 'R', 'L', 'F', 'L', 'D', '1'};
constexpr std::uint32_t kVersion = 1;
constexpr std::uint32_t kKindVolume = 0;
constexpr std::uint32_t kKindTrace = 1;

struct Header {
    char magic[8];
    std::uint32_t version;
    std::uint32_t n_comp;
    std::uint32_t n_time;
    std::uint32_t n_space;
    std::uint32_t nr;
    std::uint32_t ntheta;
    std::uint32_t nt;
    std::uint32_t kind;
    double r0;
    double r1;
    double T;
};
static_assert(sizeof(Header) == 64, "field header must be exactly 64 bytes");

Header make_header(const AnnulusGrid& grid, std::uint32_t n_comp, std::uint32_t n_time,
                   std::uint32_t n_space, std::uint32_t kind) {
    Header h{};
    std::memcpy(h.magic, kMagic, 8);
    h.version = kVersion;
    h.n_comp = n_comp;
    h.n_time = n_time;
    h.n_space = n_space;
    h.nr = static_cast<std::uint32_t>(grid.nr);
    h.ntheta = static_cast<std::uint32_t>(grid.ntheta);
    h.nt = static_cast<std::uint32_t>(grid.nt);
    h.kind = kind;
    h.r0 = grid.r0;
    h.r1 = grid.r1;
    h.T = grid.T;
    return h;
}

void write_blob(const std::string& path, const Header& h, const std::vector<double>& data) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot open for writing: " + tmp);
        out.write(reinterpret_cast<const char*>(&h), sizeof(h));
        out.write(reinterpret_cast<const char*>(data.data()),
                  static_cast<std::streamsize>(data.size() * sizeof(double)));
        if (!out) throw config_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

Header read_header(std::ifstream& in, const std::string& path, std::uint32_t expect_kind) {
    Header h{};
    in.read(reinterpret_cast<char*>(&h), sizeof(h));
    if (!in) throw config_error("field file too short: " + path);
    if (std::memcmp(h.magic, kMagic, 8) != 0)
        throw config_error("bad magic in field file: " + path);
    if (h.version != kVersion) throw config_error("unsupported field version in: " + path);
    if (h.kind != expect_kind)
        throw config_error("field file kind mismatch (volume vs trace): " + path);
    return h;
}

}  // namespace

void write_field(const std::string& path, const SpaceTimeField& f, const AnnulusGrid& grid) {
    f.validate();
    write_blob(path,
               make_header(grid, static_cast<std::uint32_t>(f.n_comp),
                           static_cast<std::uint32_t>(f.n_time),
                           static_cast<std::uint32_t>(f.n_space), kKindVolume),
               f.data);
}

void write_trace(const std::string& path, const ObservationTrace& z, const AnnulusGrid& grid) {
    z.validate();
    write_blob(path,
               make_header(grid, static_cast<std::uint32_t>(z.n_comp),
                           static_cast<std::uint32_t>(z.n_time),
                           static_cast<std::uint32_t>(z.ntheta), kKindTrace),
               z.data);
}

SpaceTimeField read_field(const std::string& path, const AnnulusGrid& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open field file: " + path);
    const Header h = read_header(in, path, kKindVolume);
    if (h.nr != static_cast<std::uint32_t>(grid.nr) ||
        h.ntheta != static_cast<std::uint32_t>(grid.ntheta) ||
        h.nt != static_cast<std::uint32_t>(grid.nt))
        throw config_error("field file grid mismatch: " + path);
    SpaceTimeField f(static_cast<int>(h.n_comp), static_cast<int>(h.n_time),
                     static_cast<int>(h.n_space));
    in.read(reinterpret_cast<char*>(f.data.data()),
            static_cast<std::streamsize>(f.data.size() * sizeof(double)));
    if (!in) throw config_error("field file truncated: " + path);
    f.validate();
    return f;
}

ObservationTrace read_trace(const std::string& path, const AnnulusGrid& grid) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw config_error("cannot open trace file: " + path);
    const Header h = read_header(in, path, kKindTrace);
    if (h.ntheta != static_cast<std::uint32_t>(grid.ntheta) ||
        h.nt != static_cast<std::uint32_t>(grid.nt))
        throw config_error("trace file grid mismatch: " + path);
    ObservationTrace z(static_cast<int>(h.n_comp), static_cast<int>(h.n_time),
                       static_cast<int>(h.ntheta));
    in.read(reinterpret_cast<char*>(z.data.data()),
            static_cast<std::streamsize>(z.data.size() * sizeof(double)));
    if (!in) throw config_error("trace file truncated: " + path);
    z.validate();
    return z;
}

void write_text_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw config_error("cannot open for writing: " + tmp);
        out << content;
        if (!out) throw config_error("write failed: " + tmp);
    }
    std::filesystem::rename(tmp, path);
}

namespace {

void append_num(std::string& s, double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    s += buf;
}

}  // namespace

void export_field_csv(const std::string& path, const SpaceTimeField& f, const AnnulusGrid& grid) {
    std::string out = "# schema=1\ncomp,k,t,i,j,r,theta,value\n";
    for (int c = 0; c < f.n_comp; ++c)
        for (int k = 0; k < f.n_time; ++k)
            for (int i = 0; i <= grid.nr; ++i)
                for (int j = 0; j < grid.ntheta; ++j) {
                    out += std::to_string(c) + ',' + std::to_string(k) + ',';
                    append_num(out, grid.time(k));
                    out += ',' + std::to_string(i) + ',' + std::to_string(j) + ',';
                    append_num(out, grid.radius(i));
                    out += ',';
                    append_num(out, grid.theta(j));
                    out += ',';
                    append_num(out, f.at(c, k, grid.node(i, j)));
                    out += '\n';
                }
    write_text_atomic(path, out);
}

void export_trace_csv(const std::string& path, const ObservationTrace& z,
                      const AnnulusGrid& grid) {
    std::string out = "# schema=1\ncomp,k,t,j,theta,value\n";
    for (int c = 0; c < z.n_comp; ++c)
        for (int k = 0; k < z.n_time; ++k)
            for (int j = 0; j < z.ntheta; ++j) {
                out += std::to_string(c) + ',' + std::to_string(k) + ',';
                append_num(out, grid.time(k));
                out += ',' + std::to_string(j) + ',';
                append_num(out, grid.theta(j));
                out += ',';
                append_num(out, z.at(c, k, j));
                out += '\n';
            }
    write_text_atomic(path, out);
}

}  // namespace carleman
