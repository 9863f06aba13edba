#include "madelung/field_io.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace madelung::field_io {

namespace {

template <class T>
void put(std::ostream& out, T value)
{
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), sizeof(T));
}

template <class T>
T get(std::istream& in)
{
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), sizeof(T))) throw Error(ErrorCode::IoError, "truncated field file");
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

void put_header(std::ostream& out, const GridSpec& g, Kind kind, double time)
{
    out.write("MDLG", 4);
    put<std::uint16_t>(out, kVersion);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(g.dim()));
    for (int a = 0; a < g.dim(); ++a) put<std::uint32_t>(out, static_cast<std::uint32_t>(g.points(a)));
    for (int a = 0; a < g.dim(); ++a) {
        put<double>(out, g.lower(a));
        put<double>(out, g.upper(a));
    }
    for (int a = 0; a < g.dim(); ++a) put<std::uint8_t>(out, g.periodic(a) ? 1 : 0);
    put<std::uint8_t>(out, static_cast<std::uint8_t>(kind));
    put<double>(out, time);
}

void check(std::ostream& out)
{
    if (!out) throw Error(ErrorCode::IoError, "failed to write field data");
}

} // namespace

void write(std::ostream& out, const ScalarField& f)
{
    put_header(out, f.grid(), Kind::Real, f.time());
    for (double v : f.values()) put<double>(out, v);
    check(out);
}

void write(std::ostream& out, const ComplexField& f)
{
    put_header(out, f.grid(), Kind::Complex, f.time());
    for (const Complex& v : f.values()) {
        put<double>(out, v.real());
        put<double>(out, v.imag());
    }
    check(out);
}

void write(std::ostream& out, const VectorField& f)
{
    if (f.components() != f.grid().dim())
        throw Error(ErrorCode::InvalidArgument, "vector field files need one component per axis");
    put_header(out, f.grid(), Kind::Vector, f.time());
    for (int c = 0; c < f.components(); ++c)
        for (double v : f[c].values()) put<double>(out, v);
    check(out);
}

AnyField read(std::istream& in)
{
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "MDLG", 4) != 0)
        throw Error(ErrorCode::IoError, "not a field file (bad magic)");
    const auto version = get<std::uint16_t>(in);
    if (version != kVersion) throw Error(ErrorCode::IoError, "unsupported field file version " + std::to_string(version));
    const int dim = get<std::uint8_t>(in);
    if (dim < 1 || dim > 3) throw Error(ErrorCode::IoError, "bad dimension in field file");
    std::array<std::size_t, 3> n{1, 1, 1};
    std::array<double, 3> lo{0, 0, 0}, hi{1, 1, 1};
    std::array<bool, 3> per{false, false, false};
    for (int a = 0; a < dim; ++a) n[a] = get<std::uint32_t>(in);
    for (int a = 0; a < dim; ++a) {
        lo[a] = get<double>(in);
        hi[a] = get<double>(in);
    }
    for (int a = 0; a < dim; ++a) per[a] = get<std::uint8_t>(in) != 0;
    const auto kind = static_cast<Kind>(get<std::uint8_t>(in));
    const double time = get<double>(in);
    GridSpec g;
    try {
        g = GridSpec(dim, std::span(n).first(dim), std::span(lo).first(dim), std::span(hi).first(dim),
                     std::span(per).first(dim));
    } catch (const Error& e) {
        throw Error(ErrorCode::IoError, std::string("bad grid in field file: ") + e.what());
    }
    switch (kind) {
    case Kind::Real: {
        ScalarField f(g, time);
        for (double& v : f.values()) v = get<double>(in);
        return f;
    }
    case Kind::Complex: {
        ComplexField f(g, time);
        for (Complex& v : f.values()) {
            const double re = get<double>(in);
            const double im = get<double>(in);
            v = Complex(re, im);
        }
        return f;
    }
    case Kind::Vector: {
        VectorField f(g, dim, time);
        for (int c = 0; c < dim; ++c)
            for (double& v : f[c].values()) v = get<double>(in);
        return f;
    }
    }
    throw Error(ErrorCode::IoError, "unknown field kind tag");
}

void write_file(const std::filesystem::path& path, const AnyField& f)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::IoError, "cannot open " + path.string() + " for writing");
    std::visit([&](const auto& field) { write(out, field); }, f);
}

AnyField read_file(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::IoError, "cannot open " + path.string());
    return read(in);
}

} // namespace madelung::field_io
