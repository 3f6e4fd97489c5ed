// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <vector>

namespace klmat {

struct Rating {
    int user;    // contiguous 0-based index
    int item;    // contiguous 0-based index
    double value;

    bool operator==(const Rating&) const = default;
};

enum class MovielensFormat {
    csv_small,  // header line, then userId,movieId,rating,timestamp
    dat_1m,     // UserID::MovieID::Rating::Timestamp, no header
};

/// Sparse user-item-rating triplets with contiguous index maps.
///
/// Indices are assigned in first-appearance order. r_max is the maximum
/// rating seen in the data (not hard-coded, so half-star scales work).
/// Split views inherit m, n, id maps and r_max from their source dataset.
struct RatingsDataset {
    std::vector<Rating> triplets;
    int num_users = 0;
    int num_items = 0;
    std::vector<std::int64_t> user_ids;  // index -> external id
    std::vector<std::int64_t> item_ids;
    std::unordered_map<std::int64_t, int> user_index;  // external id -> index
    std::unordered_map<std::int64_t, int> item_index;
    double r_max = 0.0;
    // Duplicate (user,item) pairs overwritten by a later occurrence.
    long duplicates_replaced = 0;

    std::size_t size() const noexcept { return triplets.size(); }
};

struct Split {
    RatingsDataset train;
    RatingsDataset test;
    std::uint64_t seed = 0;
    double ratio = 0.0;
};

RatingsDataset load_movielens(const std::string& path, MovielensFormat format);

/// Per-triplet Bernoulli(ratio) assignment to train with a seeded generator.
/// Deterministic for a fixed (seed, ratio); preserves triplet order per side.
Split split_dataset(const RatingsDataset& ds, double ratio, std::uint64_t seed);

/// Builds a dataset directly from already-indexed triplets. Used by tests and
/// the Python bindings; applies the same duplicate and validation rules as
/// the file loader.
RatingsDataset dataset_from_triplets(const std::vector<std::int64_t>& user_ids,
                                     const std::vector<std::int64_t>& item_ids,
                                     const std::vector<double>& ratings);

}  // namespace klmat
