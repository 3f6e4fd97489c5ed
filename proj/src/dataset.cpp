// SPDX-License-Identifier: Apache-2.0
#include "klmat/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <random>
#include <string>
#include <string_view>

#include "klmat/errors.hpp"
#include "klmat/matrix.hpp"

namespace klmat {

namespace {

struct RawRating {
    std::int64_t user_id;
    std::int64_t item_id;
    double value;
};

std::int64_t parse_int(std::string_view field, const std::string& path, long line,
                       const char* what) {
    std::int64_t out = 0;
    auto [ptr, ec] = std::from_chars(field.data(), field.data() + field.size(), out);
    if (ec != std::errc{} || ptr != field.data() + field.size()) {
        throw ParseError(path, line, std::string("invalid ") + what + " '" + std::string(field) + "'");
    }
    return out;
}

double parse_rating(std::string_view field, const std::string& path, long line) {
    // std::from_chars for doubles is missing in some libstdc++ versions; strtod
    // on a bounded copy is equivalent here.
    std::string buf(field);
    char* end = nullptr;
    double out = std::strtod(buf.c_str(), &end);
    if (end != buf.c_str() + buf.size() || buf.empty()) {
        throw ParseError(path, line, "invalid rating '" + buf + "'");
    }
    if (!std::isfinite(out)) throw ParseError(path, line, "non-finite rating");
    if (out <= 0.0) throw ParseError(path, line, "rating must be positive, got " + buf);
    return out;
}

// Splits on `sep` (a single char or the literal "::"), requiring at least
// `min_fields` fields. Extra trailing fields are tolerated.
RawRating parse_line(std::string_view text, std::string_view sep, const std::string& path,
                     long line) {
    std::string_view fields[3];
    std::size_t pos = 0;
    for (int f = 0; f < 3; ++f) {
        std::size_t next = text.find(sep, pos);
        if (next == std::string_view::npos) {
            if (f < 2) throw ParseError(path, line, "expected at least 4 fields");
            fields[f] = text.substr(pos);
        } else {
            fields[f] = text.substr(pos, next - pos);
            pos = next + sep.size();
        }
    }
    return RawRating{parse_int(fields[0], path, line, "user id"),
                     parse_int(fields[1], path, line, "item id"),
                     parse_rating(fields[2], path, line)};
}

RatingsDataset build_dataset(const std::vector<RawRating>& raw, const std::string& origin) {
    if (raw.empty()) throw EmptyDatasetError(origin + ": no ratings");

    RatingsDataset ds;
    ds.triplets.reserve(raw.size());
    // (user,item) -> triplet position, for keep-last duplicate handling
    std::unordered_map<std::int64_t, std::size_t> seen;
    seen.reserve(raw.size());

    for (const RawRating& r : raw) {
        auto uit = ds.user_index.find(r.user_id);
        int u;
        if (uit == ds.user_index.end()) {
            u = ds.num_users++;
            ds.user_index.emplace(r.user_id, u);
            ds.user_ids.push_back(r.user_id);
        } else {
            u = uit->second;
        }
        auto iit = ds.item_index.find(r.item_id);
        int i;
        if (iit == ds.item_index.end()) {
            i = ds.num_items++;
            ds.item_index.emplace(r.item_id, i);
            ds.item_ids.push_back(r.item_id);
        } else {
            i = iit->second;
        }

        std::int64_t key = static_cast<std::int64_t>(u) * (1LL << 32) + i;
        auto sit = seen.find(key);
        if (sit != seen.end()) {
            ds.triplets[sit->second].value = r.value;  // keep the last occurrence
            ++ds.duplicates_replaced;
        } else {
            seen.emplace(key, ds.triplets.size());
            ds.triplets.push_back(Rating{u, i, r.value});
        }
    }

    ds.r_max = 0.0;
    for (const Rating& t : ds.triplets) ds.r_max = std::max(ds.r_max, t.value);
    return ds;
}

}  // namespace

RatingsDataset load_movielens(const std::string& path, MovielensFormat format) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);

    const std::string_view sep = format == MovielensFormat::csv_small ? "," : "::";
    std::vector<RawRating> raw;
    std::string line;
    long line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line_no == 1 && format == MovielensFormat::csv_small) continue;  // header
        if (line.empty()) continue;
        raw.push_back(parse_line(line, sep, path, line_no));
    }
    return build_dataset(raw, path);
}

RatingsDataset dataset_from_triplets(const std::vector<std::int64_t>& user_ids,
                                     const std::vector<std::int64_t>& item_ids,
                                     const std::vector<double>& ratings) {
    if (user_ids.size() != item_ids.size() || user_ids.size() != ratings.size()) {
        throw ConfigError("dataset_from_triplets: input lengths differ");
    }
    std::vector<RawRating> raw;
    raw.reserve(user_ids.size());
    for (std::size_t i = 0; i < user_ids.size(); ++i) {
        if (!std::isfinite(ratings[i]) || ratings[i] <= 0.0) {
            throw ConfigError("dataset_from_triplets: ratings must be positive and finite");
        }
        raw.push_back(RawRating{user_ids[i], item_ids[i], ratings[i]});
    }
    return build_dataset(raw, "<memory>");
}

Split split_dataset(const RatingsDataset& ds, double ratio, std::uint64_t seed) {
    if (!(ratio > 0.0 && ratio < 1.0)) {
        throw ConfigError("split ratio must be in (0, 1), got " + std::to_string(ratio));
    }

    Split split;
    split.seed = seed;
    split.ratio = ratio;

    auto make_view = [&ds]() {
        RatingsDataset view;
        view.num_users = ds.num_users;
        view.num_items = ds.num_items;
        view.user_ids = ds.user_ids;
        view.item_ids = ds.item_ids;
        view.user_index = ds.user_index;
        view.item_index = ds.item_index;
        view.r_max = ds.r_max;
        return view;
    };
    split.train = make_view();
    split.test = make_view();

    std::mt19937_64 rng(seed);
    for (const Rating& t : ds.triplets) {
        if (uniform01(rng) < ratio) {
            split.train.triplets.push_back(t);
        } else {
            split.test.triplets.push_back(t);
        }
    }
    return split;
}

}  // namespace klmat
