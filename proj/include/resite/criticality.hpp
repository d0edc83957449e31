#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "resite/error.hpp"
#include "resite/site_catalog.hpp"
#include "resite/time_series.hpp"

namespace resite {

inline std::size_t words_for_bits(std::size_t bits) { return (bits + 63) / 64; }

// Binary window x site coverage matrix D. Bits are stored window-major as packed
// 64-bit rows; a site-major transpose is kept alongside for column access.
class CriticalityMatrix {
public:
  CriticalityMatrix(std::size_t windows, std::size_t sites, std::size_t threshold_c,
                    std::size_t window_length, std::vector<std::uint64_t> row_bits)
      : windows_(windows),
        sites_(sites),
        threshold_(threshold_c),
        window_length_(window_length),
        row_words_(words_for_bits(sites)),
        col_words_(words_for_bits(windows)),
        rows_(std::move(row_bits)) {
    if (sites_ == 0) throw InvalidInput("criticality matrix needs at least one site");
    if (window_length_ == 0) throw InvalidInput("window length must be positive");
    if (threshold_ < 1 || threshold_ > sites_)
      throw InvalidInput("threshold c must lie in [1, " + std::to_string(sites_) + "]");
    if (rows_.size() != windows_ * row_words_)
      throw InvalidInput("criticality row storage has the wrong size");
    if (sites_ % 64 != 0) {
      const std::uint64_t tail_mask = (std::uint64_t{1} << (sites_ % 64)) - 1;
      for (std::size_t w = 0; w < windows_; ++w)
        if (rows_[w * row_words_ + row_words_ - 1] & ~tail_mask)
          throw InvalidInput("criticality row has bits beyond the last site");
    }
    cols_.assign(sites_ * col_words_, 0);
    for (std::size_t w = 0; w < windows_; ++w)
      for (std::size_t l = 0; l < sites_; ++l)
        if (get(w, l)) cols_[l * col_words_ + w / 64] |= std::uint64_t{1} << (w % 64);
  }

  // dense[w][l] != 0 marks site l covering window w
  static CriticalityMatrix from_dense(const std::vector<std::vector<std::uint8_t>>& dense,
                                      std::size_t threshold_c, std::size_t window_length = 1) {
    if (dense.empty()) throw InvalidInput("criticality matrix needs at least one window");
    const std::size_t L = dense.front().size();
    const std::size_t words = words_for_bits(L);
    std::vector<std::uint64_t> rows(dense.size() * words, 0);
    for (std::size_t w = 0; w < dense.size(); ++w) {
      if (dense[w].size() != L) throw InvalidInput("ragged criticality matrix");
      for (std::size_t l = 0; l < L; ++l)
        if (dense[w][l]) rows[w * words + l / 64] |= std::uint64_t{1} << (l % 64);
    }
    return CriticalityMatrix(dense.size(), L, threshold_c, window_length, std::move(rows));
  }

  CriticalityMatrix with_threshold(std::size_t c) const {
    return CriticalityMatrix(windows_, sites_, c, window_length_, rows_);
  }

  std::size_t windows() const { return windows_; }
  std::size_t sites() const { return sites_; }
  std::size_t threshold() const { return threshold_; }
  std::size_t window_length() const { return window_length_; }
  std::size_t row_words() const { return row_words_; }
  std::size_t column_words() const { return col_words_; }

  bool get(std::size_t w, std::size_t l) const {
    return (rows_[w * row_words_ + l / 64] >> (l % 64)) & 1U;
  }
  std::span<const std::uint64_t> row(std::size_t w) const {
    return {rows_.data() + w * row_words_, row_words_};
  }
  std::span<const std::uint64_t> column(std::size_t l) const {
    return {cols_.data() + l * col_words_, col_words_};
  }
  const std::vector<std::uint64_t>& row_storage() const { return rows_; }

  friend bool operator==(const CriticalityMatrix& a, const CriticalityMatrix& b) {
    return a.windows_ == b.windows_ && a.sites_ == b.sites_ && a.threshold_ == b.threshold_ &&
           a.window_length_ == b.window_length_ && a.rows_ == b.rows_;
  }

private:
  std::size_t windows_;
  std::size_t sites_;
  std::size_t threshold_;
  std::size_t window_length_;
  std::size_t row_words_;
  std::size_t col_words_;
  std::vector<std::uint64_t> rows_;
  std::vector<std::uint64_t> cols_;
};

struct CriticalityParams {
  double varsigma = 0.3;      // share of window demand to be covered
  std::size_t k = 1;          // system-wide number of deployments
  std::size_t delta = 1;      // window length in periods
  std::size_t threshold_c = 1;
};

// D_lw = 1 iff potential_l * mean_cf_lw >= varsigma * mean_demand_w / k.
// Window demand uses the same moving mean as the capacity factors. Sites are split
// into contiguous blocks across `threads`; each block owns its own columns so the
// result does not depend on the thread count.
inline CriticalityMatrix build_criticality_matrix(const SiteCatalog& catalog,
                                                  const TimeSeries& demand,
                                                  const CriticalityParams& p,
                                                  unsigned threads = 1) {
  if (demand.size() != catalog.time_length())
    throw InvalidInput("demand length " + std::to_string(demand.size()) +
                       " differs from capacity factor length " +
                       std::to_string(catalog.time_length()));
  if (!(p.varsigma > 0.0 && p.varsigma <= 1.0)) throw InvalidInput("varsigma must lie in (0, 1]");
  if (p.k < 1) throw InvalidInput("k must be at least 1");
  const std::vector<double> window_demand = window_aggregate(demand, p.delta);
  const std::size_t W = window_demand.size();
  const std::size_t L = catalog.size();
  std::vector<double> reference(W);
  for (std::size_t w = 0; w < W; ++w)
    reference[w] = p.varsigma * window_demand[w] / static_cast<double>(p.k);

  const std::size_t cw = words_for_bits(W);
  std::vector<std::uint64_t> cols(L * cw, 0);
  auto work = [&](std::size_t begin, std::size_t end) {
    for (std::size_t l = begin; l < end; ++l) {
      const Site& s = catalog.site(l);
      const auto cf = window_aggregate(s.capacity_factors, p.delta);
      for (std::size_t w = 0; w < W; ++w)
        if (s.technical_potential_mw * cf[w] >= reference[w])
          cols[l * cw + w / 64] |= std::uint64_t{1} << (w % 64);
    }
  };
  const std::size_t nthreads = std::clamp<std::size_t>(threads, 1, L);
  if (nthreads == 1) {
    work(0, L);
  } else {
    std::vector<std::thread> pool;
    const std::size_t chunk = (L + nthreads - 1) / nthreads;
    for (std::size_t b = 0; b < L; b += chunk) pool.emplace_back(work, b, std::min(L, b + chunk));
    for (auto& t : pool) t.join();
  }

  const std::size_t rw = words_for_bits(L);
  std::vector<std::uint64_t> rows(W * rw, 0);
  for (std::size_t l = 0; l < L; ++l)
    for (std::size_t w = 0; w < W; ++w)
      if ((cols[l * cw + w / 64] >> (w % 64)) & 1U)
        rows[w * rw + l / 64] |= std::uint64_t{1} << (l % 64);
  return CriticalityMatrix(W, L, p.threshold_c, p.delta, std::move(rows));
}

// Packed binary format, all integers little-endian:
//   bytes 0-7   magic "RSCRIT01"
//   u64 W, u64 L, u64 c, u64 delta
//   W rows of ceil(L/64) u64 words; bit l of row w is D_lw (word l/64, bit l%64)
inline constexpr char kCriticalityMagic[8] = {'R', 'S', 'C', 'R', 'I', 'T', '0', '1'};

namespace detail {
inline void put_u64(std::ostream& os, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xFF);
  os.write(b, 8);
}
inline std::uint64_t get_u64(std::istream& is) {
  unsigned char b[8];
  is.read(reinterpret_cast<char*>(b), 8);
  if (!is) throw IoError("truncated criticality file");
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}
}  // namespace detail

inline void save_criticality(const CriticalityMatrix& d, const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw IoError("cannot write " + path.string());
  os.write(kCriticalityMagic, 8);
  detail::put_u64(os, d.windows());
  detail::put_u64(os, d.sites());
  detail::put_u64(os, d.threshold());
  detail::put_u64(os, d.window_length());
  for (auto word : d.row_storage()) detail::put_u64(os, word);
  if (!os) throw IoError("failed writing " + path.string());
}

inline CriticalityMatrix load_criticality(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw IoError("cannot open " + path.string());
  char magic[8];
  is.read(magic, 8);
  if (!is || !std::equal(magic, magic + 8, kCriticalityMagic))
    throw IoError(path.string() + " is not a criticality matrix file");
  const auto W = detail::get_u64(is);
  const auto L = detail::get_u64(is);
  const auto c = detail::get_u64(is);
  const auto delta = detail::get_u64(is);
  std::vector<std::uint64_t> rows(W * words_for_bits(L));
  for (auto& word : rows) word = detail::get_u64(is);
  return CriticalityMatrix(W, L, c, delta, std::move(rows));
}

}  // namespace resite
