#include "lossy/model.hpp"

#include <bit>

namespace lossy {

std::string index_to_word(std::uint64_t index) {
  if (index == 0) throw SchemaError("codeword index must be >= 1");
  const int len = std::bit_width(index) - 1;
  std::string word(static_cast<std::size_t>(len), '0');
  for (int b = 0; b < len; ++b)
    if (index & (std::uint64_t(1) << (len - 1 - b))) word[b] = '1';
  return word;
}

std::uint64_t word_to_index(std::string_view word) {
  if (word.size() >= 63) throw SchemaError("codeword longer than 62 bits");
  std::uint64_t index = 1;
  for (char c : word) {
    if (c != '0' && c != '1') throw SchemaError("codeword must be a binary string");
    index = (index << 1) | static_cast<std::uint64_t>(c == '1');
  }
  return index;
}

std::size_t word_length(std::uint64_t index) {
  if (index == 0) throw SchemaError("codeword index must be >= 1");
  return static_cast<std::size_t>(std::bit_width(index) - 1);
}

}  // namespace lossy
