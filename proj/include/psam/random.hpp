#pragma once

#include <array>
#include <cstdint>

#include "psam/matrix.hpp"

namespace psam {

/// Philox4x32-10 block function (Salmon et al., Random123). Exposed for
/// known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key) noexcept;

/// Deterministic counter-based random stream.
///
/// A stream is a (key, stream id, position) triple; drawing advances the
/// position only. Monte-Carlo trial t always draws from substream(seed, t), so
/// the values a trial sees do not depend on which worker runs it or in what
/// order. Streams are values: copy one to replay it, never share one mutably.
class RandomStream {
public:
    explicit RandomStream(std::uint64_t seed) : RandomStream(seed, 0) {}

    static RandomStream substream(std::uint64_t seed, std::uint64_t index) { return {seed, index}; }

    std::uint64_t next_u64() noexcept;
    /// Uniform on the open interval (0, 1) with 53-bit resolution.
    double next_uniform() noexcept;
    /// Zero-mean circularly symmetric complex Gaussian, E|z|^2 = 1.
    cplx next_zmcscg() noexcept;

private:
    RandomStream(std::uint64_t seed, std::uint64_t stream);

    std::array<std::uint32_t, 2> key_;
    std::uint64_t stream_;
    std::uint64_t block_ = 0;
    std::array<std::uint32_t, 4> buffer_{};
    int used_ = 4;  // 32-bit words consumed from buffer_
};

/// rows x cols matrix of i.i.d. ZMCSCG entries, unit variance per entry,
/// filled row-major from `stream`.
ComplexMatrix sample_zmcscg(std::size_t rows, std::size_t cols, RandomStream& stream);

}  // namespace psam
