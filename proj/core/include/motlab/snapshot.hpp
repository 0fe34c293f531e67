#pragma once

#include <filesystem>

#include "motlab/problem.hpp"

namespace motlab {

// A snapshot stores both fields of a simulation state at one instant.
//
// File layout (all multi-byte values little-endian):
//   bytes 0-3   magic "MLAB"
//   u32         format version (currently 1)
//   u32         dim (1..3)
//   u32 * dim   cells per axis, axis 0 first
//   f64 * dim   domain extents per axis
//   f64         time
//   f64         epsilon
//   f64 * n     field u, row-major with axis 0 slowest
//   f64 * n     field v, same ordering
struct Snapshot {
    Grid grid;
    double t = 0.0;
    double epsilon = 0.0;
    Field u;
    Field v;
};

// Writes a snapshot; throws std::runtime_error on I/O failure.
void write_snapshot(const std::filesystem::path& path, const Snapshot& snapshot);

// Reads a snapshot written by write_snapshot; throws std::runtime_error when
// the file is missing, truncated, or carries a bad magic/version.
Snapshot read_snapshot(const std::filesystem::path& path);

}  // namespace motlab
