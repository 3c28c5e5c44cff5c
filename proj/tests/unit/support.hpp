#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dnagpt/hash.hpp"
#include "dnagpt/rng.hpp"
#include "dnagpt/tokenizer.hpp"

namespace testing_support {

// Random token sequence over a vocabulary of single letters "a", "b", ...
inline std::vector<std::string> random_tokens(dnagpt::Rng& rng, std::size_t max_len, std::size_t vocab,
                                              std::size_t min_len = 0) {
  const std::size_t len = min_len + rng.below(max_len - min_len + 1);
  std::vector<std::string> out;
  for (std::size_t i = 0; i < len; ++i) out.emplace_back(1, static_cast<char>('a' + rng.below(vocab)));
  return out;
}

inline dnagpt::TokenSequence seq(const std::string& text) { return dnagpt::tokenize(text); }

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    dnagpt::Fnv1a h;
    h.field(tag).update(++counter).update(static_cast<std::uint64_t>(
        std::filesystem::file_time_type::clock::now().time_since_epoch().count()));
    path_ = std::filesystem::temp_directory_path() / ("dnagpt-" + tag + "-" + dnagpt::to_hex(h.digest()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace testing_support
