#include "motlab/snapshot.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

namespace motlab {

namespace {

constexpr char kMagic[4] = {'M', 'L', 'A', 'B'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& out, std::uint32_t value) {
    out.push_back(static_cast<char>(value & 0xffu));
    out.push_back(static_cast<char>((value >> 8) & 0xffu));
    out.push_back(static_cast<char>((value >> 16) & 0xffu));
    out.push_back(static_cast<char>((value >> 24) & 0xffu));
}

void put_f64(std::string& out, double value) {
    const auto bits = std::bit_cast<std::uint64_t>(value);
    for (int shift = 0; shift < 64; shift += 8) {
        out.push_back(static_cast<char>((bits >> shift) & 0xffu));
    }
}

class Reader {
  public:
    explicit Reader(std::string data) : data_(std::move(data)) {}

    std::uint32_t u32() {
        need(4);
        std::uint32_t value = 0;
        for (int i = 0; i < 4; ++i) {
            value |= static_cast<std::uint32_t>(static_cast<unsigned char>(data_[pos_ + i]))
                     << (8 * i);
        }
        pos_ += 4;
        return value;
    }

    double f64() {
        need(8);
        std::uint64_t bits = 0;
        for (int i = 0; i < 8; ++i) {
            bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(data_[pos_ + i]))
                    << (8 * i);
        }
        pos_ += 8;
        return std::bit_cast<double>(bits);
    }

    void raw(char* out, std::size_t n) {
        need(n);
        std::memcpy(out, data_.data() + pos_, n);
        pos_ += n;
    }

    bool exhausted() const { return pos_ == data_.size(); }

  private:
    void need(std::size_t n) const {
        if (pos_ + n > data_.size()) throw std::runtime_error("snapshot: truncated file");
    }

    std::string data_;
    std::size_t pos_ = 0;
};

}  // namespace

void write_snapshot(const std::filesystem::path& path, const Snapshot& snapshot) {
    const Grid& grid = snapshot.grid;
    if (grid.dim < 1 || grid.dim > 3) {
        throw std::invalid_argument("snapshot: grid dimension must be 1..3");
    }
    if (static_cast<std::int64_t>(snapshot.u.size()) != grid.total ||
        static_cast<std::int64_t>(snapshot.v.size()) != grid.total) {
        throw std::invalid_argument("snapshot: field sizes do not match the grid");
    }
    std::string buffer;
    buffer.reserve(64 + 16 * static_cast<std::size_t>(grid.total));
    buffer.append(kMagic, 4);
    put_u32(buffer, kVersion);
    put_u32(buffer, static_cast<std::uint32_t>(grid.dim));
    for (int a = 0; a < grid.dim; ++a) {
        put_u32(buffer, static_cast<std::uint32_t>(grid.cells[a]));
    }
    for (int a = 0; a < grid.dim; ++a) put_f64(buffer, grid.extents[a]);
    put_f64(buffer, snapshot.t);
    put_f64(buffer, snapshot.epsilon);
    for (double x : snapshot.u) put_f64(buffer, x);
    for (double x : snapshot.v) put_f64(buffer, x);

    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("snapshot: cannot open '" + path.string() + "' for write");
    out.write(buffer.data(), static_cast<std::streamsize>(buffer.size()));
    if (!out) throw std::runtime_error("snapshot: write failed for '" + path.string() + "'");
}

Snapshot read_snapshot(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("snapshot: cannot open '" + path.string() + "'");
    std::string data((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    Reader reader(std::move(data));

    char magic[4];
    reader.raw(magic, 4);
    if (std::memcmp(magic, kMagic, 4) != 0) {
        throw std::runtime_error("snapshot: bad magic in '" + path.string() + "'");
    }
    if (reader.u32() != kVersion) {
        throw std::runtime_error("snapshot: unsupported version in '" + path.string() + "'");
    }
    const std::uint32_t dim = reader.u32();
    if (dim < 1 || dim > 3) throw std::runtime_error("snapshot: invalid dimension");
    std::vector<int> cells(dim);
    for (std::uint32_t a = 0; a < dim; ++a) {
        const std::uint32_t n = reader.u32();
        if (n < 2 || n > (1u << 24)) throw std::runtime_error("snapshot: invalid cell count");
        cells[a] = static_cast<int>(n);
    }
    std::vector<double> extents(dim);
    for (std::uint32_t a = 0; a < dim; ++a) extents[a] = reader.f64();

    Snapshot snapshot;
    snapshot.grid = build_grid(static_cast<int>(dim), extents, cells);
    snapshot.t = reader.f64();
    snapshot.epsilon = reader.f64();
    snapshot.u.resize(static_cast<std::size_t>(snapshot.grid.total));
    snapshot.v.resize(static_cast<std::size_t>(snapshot.grid.total));
    for (double& x : snapshot.u) x = reader.f64();
    for (double& x : snapshot.v) x = reader.f64();
    if (!reader.exhausted()) {
        throw std::runtime_error("snapshot: trailing bytes in '" + path.string() + "'");
    }
    return snapshot;
}

}  // namespace motlab
