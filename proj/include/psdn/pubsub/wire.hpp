#pragma once

#include "psdn/pubsub/types.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace psdn::pubsub {

// Little-endian, length-prefixed encoding. Fields serialize in map order
// (lexicographic by path), so the byte count of a payload depends only on its
// content.

std::vector<std::byte> encode(const SampleBatch &batch);
std::vector<std::byte> encode(const Announcement &announcement);

/// Throw Error(InvalidOperation) on truncated or malformed input.
SampleBatch  decode_batch(std::span<const std::byte> bytes);
Announcement decode_announcement(std::span<const std::byte> bytes);

} // namespace psdn::pubsub
