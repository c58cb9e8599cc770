#include "sgpnp/signal_io.hpp"

#include "sgpnp/error.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

namespace sgpnp {

namespace {

constexpr char kMagic[4] = {'S', 'G', 'P', '1'};
constexpr std::uint32_t kMaxRank = 16;

template <typename T>
void put_le(std::ostream &os, T v)
{
  static_assert(std::is_trivially_copyable_v<T>);
  unsigned char bytes[sizeof(T)];
  std::memcpy(bytes, &v, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  os.write(reinterpret_cast<char const *>(bytes), sizeof(T));
}

template <typename T>
T get_le(std::istream &is)
{
  unsigned char bytes[sizeof(T)];
  if (!is.read(reinterpret_cast<char *>(bytes), sizeof(T))) {
    throw IoError("signal stream truncated");
  }
  if constexpr (std::endian::native == std::endian::big) {
    std::reverse(bytes, bytes + sizeof(T));
  }
  T v;
  std::memcpy(&v, bytes, sizeof(T));
  return v;
}

} // namespace

void write_signal(std::ostream &os, Signal const &s)
{
  os.write(kMagic, 4);
  put_le<std::uint32_t>(os, std::uint32_t(s.rank()));
  for (auto d : s.shape()) {
    put_le<std::uint32_t>(os, std::uint32_t(d));
  }
  put_le<std::uint8_t>(os, s.is_complex() ? 1 : 0);
  for (double v : s.data()) {
    put_le<double>(os, v);
  }
  if (!os) {
    throw IoError("failed writing signal");
  }
}

Signal read_signal(std::istream &is)
{
  char magic[4];
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw IoError("not an SGP1 signal stream");
  }
  auto const rank = get_le<std::uint32_t>(is);
  if (rank == 0 || rank > kMaxRank) {
    throw IoError("invalid signal rank " + std::to_string(rank));
  }
  Shape shape(rank);
  for (auto &d : shape) {
    d = get_le<std::uint32_t>(is);
    if (d == 0) {
      throw IoError("signal has a zero-size dimension");
    }
  }
  auto const flag = get_le<std::uint8_t>(is);
  if (flag > 1) {
    throw IoError("invalid complex flag");
  }
  bool const cplx = flag == 1;
  std::vector<double> data(product(shape) * (cplx ? 2 : 1));
  for (auto &v : data) {
    v = get_le<double>(is);
    if (!std::isfinite(v)) {
      throw IoError("signal payload contains a non-finite value");
    }
  }
  if (is.peek() != std::char_traits<char>::eof()) {
    throw IoError("trailing bytes after signal payload");
  }
  return Signal(std::move(shape), std::move(data), cplx);
}

void save_signal(std::filesystem::path const &path, Signal const &s)
{
  std::ofstream os(path, std::ios::binary);
  if (!os) {
    throw IoError("cannot open " + path.string() + " for writing");
  }
  write_signal(os, s);
}

Signal load_signal(std::filesystem::path const &path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is) {
    throw IoError("cannot open " + path.string());
  }
  return read_signal(is);
}

std::string to_csv(Signal const &s)
{
  if (s.rank() > 2) {
    throw ShapeError("csv export supports rank 1 and 2 only");
  }
  std::size_t const rows = s.rank() == 2 ? s.shape()[0] : 1;
  std::size_t const cols = s.rank() == 2 ? s.shape()[1] : s.shape()[0];
  std::ostringstream os;
  os.precision(17);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      if (c) {
        os << ',';
      }
      std::size_t const i = r * cols + c;
      if (s.is_complex()) {
        double const im = s[2 * i + 1];
        os << s[2 * i] << (im < 0 ? "" : "+") << im << 'j';
      } else {
        os << s[i];
      }
    }
    os << '\n';
  }
  return os.str();
}

} // namespace sgpnp
