#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "tensor.hpp"

namespace cps5 {

// CT1 layout: "CT1\0", u32 order, order x u64 dims, then (re, im) f64 pairs row-major.
// All integers and floats little-endian.

std::vector<std::uint8_t> encode_ct1(const ComplexTensor& t);
/// Throws Error(Format) naming the byte offset where decoding stopped.
ComplexTensor decode_ct1(std::span<const std::uint8_t> bytes);

void write_ct1(const std::string& path, const ComplexTensor& t);
ComplexTensor read_ct1(const std::string& path);

ComplexTensor matrix_to_tensor(const ComplexMatrix& M);
ComplexTensor matrix_to_tensor(const RealMatrix& M);

}  // namespace cps5
