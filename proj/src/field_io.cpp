#include "hartree/core.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace hartree {
namespace {

constexpr char kMagic[6] = {'H', 'A', 'R', 'T', 'F', '1'};
constexpr std::size_t kHeaderBytes = 6 + 4 + 4 + 8 + 16;

template <typename T>
void put_le(std::vector<unsigned char>& out, T value) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  out.insert(out.end(), bytes, bytes + sizeof(T));
}

template <typename T>
T get_le(const unsigned char* in) {
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, in, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(bytes[i], bytes[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, bytes, sizeof(T));
  return value;
}

}  // namespace

void save_field(const Field& field, const std::filesystem::path& path) {
  std::vector<unsigned char> buf;
  buf.reserve(kHeaderBytes + 16 * field.grid.size());
  buf.insert(buf.end(), kMagic, kMagic + 6);
  put_le<std::uint32_t>(buf, 3);
  put_le<std::uint32_t>(buf, static_cast<std::uint32_t>(field.grid.n()));
  put_le<double>(buf, field.grid.half_length());
  buf.insert(buf.end(), 16, 0);
  for (Eigen::Index i = 0; i < field.values.size(); ++i) {
    put_le<double>(buf, field.values[i].real());
    put_le<double>(buf, field.values[i].imag());
  }
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
  os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
  if (!os) throw Error(ErrorCode::IoFailure, "write failed for " + path.string());
}

Field load_field(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(ErrorCode::IoFailure, "cannot open " + path.string());
  const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  if (buf.size() < 6 || std::memcmp(buf.data(), kMagic, 6) != 0) {
    throw Error(ErrorCode::BadMagic, path.string());
  }
  if (buf.size() < kHeaderBytes) throw Error(ErrorCode::TruncatedPayload, "header shorter than 38 bytes");
  const auto dim = get_le<std::uint32_t>(buf.data() + 6);
  const auto n = get_le<std::uint32_t>(buf.data() + 10);
  const auto half_length = get_le<double>(buf.data() + 14);
  if (dim != 3) throw Error(ErrorCode::GridMismatch, "stored D = " + std::to_string(dim));
  GridSpec grid = [&] {
    try {
      return GridSpec(static_cast<int>(n), half_length);
    } catch (const Error& e) {
      throw Error(ErrorCode::GridMismatch, e.what());
    }
  }();
  const std::size_t payload = 16 * grid.size();
  if (buf.size() - kHeaderBytes < payload) {
    throw Error(ErrorCode::TruncatedPayload,
                "payload has " + std::to_string(buf.size() - kHeaderBytes) + " of " + std::to_string(payload) + " bytes");
  }
  if (buf.size() - kHeaderBytes > payload) {
    throw Error(ErrorCode::GridMismatch, "payload longer than 16 n^3 bytes");
  }
  Field out(grid);
  const unsigned char* p = buf.data() + kHeaderBytes;
  for (Eigen::Index i = 0; i < out.values.size(); ++i, p += 16) {
    out.values[i] = Complex(get_le<double>(p), get_le<double>(p + 8));
  }
  return out;
}

}  // namespace hartree
