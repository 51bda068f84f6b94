#include "ct1.hpp"

#include <algorithm>
#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

namespace cps5 {

namespace {

constexpr std::uint8_t kMagic[4] = {'C', 'T', '1', '\0'};
constexpr std::uint64_t kMaxElements = std::uint64_t{1} << 40;

template <typename T>
void put_le(std::vector<std::uint8_t>& out, T value) {
  static_assert(std::is_trivially_copyable_v<T>);
  std::uint8_t raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(raw), std::end(raw));
  out.insert(out.end(), std::begin(raw), std::end(raw));
}

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  template <typename T>
  T get(const char* what) {
    if (pos_ + sizeof(T) > bytes_.size())
      fail(ErrorCode::Format, std::string("CT1: truncated while reading ") + what + " at byte offset " +
                                  std::to_string(pos_) + " (file has " + std::to_string(bytes_.size()) + " bytes)");
    std::uint8_t raw[sizeof(T)];
    std::memcpy(raw, bytes_.data() + pos_, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(std::begin(raw), std::end(raw));
    pos_ += sizeof(T);
    T v;
    std::memcpy(&v, raw, sizeof(T));
    return v;
  }

  std::size_t pos() const { return pos_; }
  std::size_t remaining() const { return bytes_.size() - pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

std::vector<std::uint8_t> encode_ct1(const ComplexTensor& t) {
  std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
  out.reserve(8 + 8 * t.order() + 16 * static_cast<std::size_t>(t.size()));
  put_le<std::uint32_t>(out, static_cast<std::uint32_t>(t.order()));
  for (Index d : t.dims()) put_le<std::uint64_t>(out, static_cast<std::uint64_t>(d));
  for (const cplx& z : t.data()) {
    put_le<double>(out, z.real());
    put_le<double>(out, z.imag());
  }
  return out;
}

ComplexTensor decode_ct1(std::span<const std::uint8_t> bytes) {
  Reader rd(bytes);
  for (std::size_t i = 0; i < 4; ++i) {
    const auto b = rd.get<std::uint8_t>("magic");
    if (b != kMagic[i]) fail(ErrorCode::Format, "CT1: bad magic at byte offset " + std::to_string(i));
  }
  const auto order = rd.get<std::uint32_t>("order");
  if (order == 0 || order > 64) fail(ErrorCode::Format, "CT1: unsupported order " + std::to_string(order) + " at byte offset 4");
  std::vector<Index> dims;
  std::uint64_t count = 1;
  for (std::uint32_t m = 0; m < order; ++m) {
    const std::size_t at = rd.pos();
    const auto d = rd.get<std::uint64_t>("dims");
    if (d == 0 || d > kMaxElements || count > kMaxElements / d)
      fail(ErrorCode::Format, "CT1: invalid dimension " + std::to_string(d) + " at byte offset " + std::to_string(at));
    count *= d;
    dims.push_back(static_cast<Index>(d));
  }
  if (rd.remaining() < 16 * count)
    fail(ErrorCode::Format, "CT1: truncated payload at byte offset " + std::to_string(rd.pos() + rd.remaining()) +
                                ", expected " + std::to_string(rd.pos() + 16 * count) + " bytes");
  std::vector<cplx> data(count);
  for (auto& z : data) {
    const double re = rd.get<double>("payload");
    const double im = rd.get<double>("payload");
    z = {re, im};
  }
  if (rd.remaining() != 0)
    fail(ErrorCode::Format, "CT1: " + std::to_string(rd.remaining()) + " trailing bytes at byte offset " +
                                std::to_string(rd.pos()));
  return ComplexTensor(std::move(dims), std::move(data));
}

void write_ct1(const std::string& path, const ComplexTensor& t) {
  const auto bytes = encode_ct1(t);
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) fail(ErrorCode::Io, "cannot open '" + path + "' for writing");
  os.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!os) fail(ErrorCode::Io, "write failed for '" + path + "'");
}

ComplexTensor read_ct1(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) fail(ErrorCode::Io, "cannot open '" + path + "'");
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(is)), std::istreambuf_iterator<char>());
  return decode_ct1(bytes);
}

ComplexTensor matrix_to_tensor(const ComplexMatrix& M) {
  return ComplexTensor({M.rows(), M.cols()}, std::vector<cplx>(M.data(), M.data() + M.size()));
}

ComplexTensor matrix_to_tensor(const RealMatrix& M) {
  const ComplexMatrix c = M.cast<cplx>();
  return matrix_to_tensor(c);
}

}  // namespace cps5
