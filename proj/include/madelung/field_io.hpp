#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <variant>

#include "madelung/grid.hpp"

namespace madelung {

/// Binary field container:
///   "MDLG" | u16 version | u8 dim | u32 n[dim] | f64 (lower, upper)[dim]
///   | u8 periodic[dim] | u8 kind | f64 time | payload
/// All numbers little-endian. Payload is row-major f64 for real fields,
/// interleaved (re, im) f64 pairs for complex fields, and `dim` consecutive
/// real arrays for vector fields.
namespace field_io {

inline constexpr std::uint16_t kVersion = 1;

enum class Kind : std::uint8_t { Real = 0, Complex = 1, Vector = 2 };

using AnyField = std::variant<ScalarField, ComplexField, VectorField>;

void write(std::ostream& out, const ScalarField& f);
void write(std::ostream& out, const ComplexField& f);
void write(std::ostream& out, const VectorField& f);
AnyField read(std::istream& in);

/// File variants; throw Error(IoError) on open/read/write failure and on a
/// malformed header.
void write_file(const std::filesystem::path& path, const AnyField& f);
AnyField read_file(const std::filesystem::path& path);

} // namespace field_io
} // namespace madelung
