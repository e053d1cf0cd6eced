#pragma once

#include <array>
#include <cstdint>
#include <limits>

namespace poclab {

// Philox4x32-10 block cipher (Salmon et al., SC'11) used as a counter-based
// generator. A stream is identified by (key, stream id); within a stream the
// block counter advances by one per 128 output bits, so any draw is a pure
// function of (key, stream, position).
class CounterRng {
  public:
    using result_type = std::uint64_t;
    using Block = std::array<std::uint32_t, 4>;

    CounterRng(std::uint64_t key, std::uint64_t stream);

    // Independent stream `child` of this generator. Children of different
    // parents never share a (key, stream) pair with overwhelming probability.
    [[nodiscard]] CounterRng split(std::uint64_t child) const;

    result_type operator()();

    // Uniform in the open interval (0, 1).
    double uniform();
    double normal();
    // Uniform integer in [0, n).
    std::uint64_t below(std::uint64_t n);

    // Jump to an absolute block position within the stream.
    void seek(std::uint64_t block);

    std::uint64_t key() const { return key_; }
    std::uint64_t stream() const { return stream_; }

    static constexpr result_type min() { return 0; }
    static constexpr result_type max() { return std::numeric_limits<result_type>::max(); }

    static Block philox(Block counter, std::array<std::uint32_t, 2> key);

  private:
    void refill();

    std::uint64_t key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint64_t, 2> buffer_{};
    int buffered_ = 0;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

std::uint64_t splitmix64(std::uint64_t x);

}  // namespace poclab
