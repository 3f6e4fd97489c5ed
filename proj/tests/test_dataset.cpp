// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <random>
#include <string>

#include "klmat/dataset.hpp"
#include "klmat/errors.hpp"
#include "support/oracles.hpp"

using namespace klmat;

namespace {

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& name, const std::string& content)
        : path("dataset_test_" + name) {
        std::ofstream out(path, std::ios::binary);
        out << content;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("csv parsing builds contiguous indices and r_max") {
    TempFile f("basic.csv",
               "userId,movieId,rating,timestamp\n"
               "1,10,4.0,0\n"
               "2,10,5.0,0\n");
    RatingsDataset ds = load_movielens(f.path, MovielensFormat::csv_small);
    CHECK(ds.num_users == 2);
    CHECK(ds.num_items == 1);
    CHECK(ds.r_max == doctest::Approx(5.0));
    CHECK(ds.triplets.size() == 2);
    CHECK(ds.triplets[0].user == 0);
    CHECK(ds.triplets[1].user == 1);
    CHECK(ds.triplets[0].item == 0);
}

TEST_CASE("dat parsing handles :: separators without header") {
    TempFile f("basic.dat",
               "7::1193::5::978300760\n"
               "7::661::3::978302109\n"
               "9::1193::4::978301968\n");
    RatingsDataset ds = load_movielens(f.path, MovielensFormat::dat_1m);
    CHECK(ds.num_users == 2);
    CHECK(ds.num_items == 2);
    CHECK(ds.r_max == doctest::Approx(5.0));
    // first-appearance order: user 7 -> 0, user 9 -> 1; item 1193 -> 0
    CHECK(ds.user_ids[0] == 7);
    CHECK(ds.user_ids[1] == 9);
    CHECK(ds.item_ids[0] == 1193);
}

TEST_CASE("malformed lines report their line number") {
    TempFile f("bad.csv",
               "userId,movieId,rating,timestamp\n"
               "1,10,4.0,0\n"
               "2,xx,5.0,0\n");
    CHECK_THROWS_WITH_AS(load_movielens(f.path, MovielensFormat::csv_small),
                         doctest::Contains(":3:"), ParseError);

    TempFile g("short.csv",
               "userId,movieId,rating,timestamp\n"
               "1,10\n");
    CHECK_THROWS_AS(load_movielens(g.path, MovielensFormat::csv_small), ParseError);

    TempFile h("negative.csv",
               "userId,movieId,rating,timestamp\n"
               "1,10,-2.0,0\n");
    CHECK_THROWS_AS(load_movielens(h.path, MovielensFormat::csv_small), ParseError);
}

TEST_CASE("empty inputs raise EmptyDataset") {
    TempFile f("header_only.csv", "userId,movieId,rating,timestamp\n");
    CHECK_THROWS_AS(load_movielens(f.path, MovielensFormat::csv_small), EmptyDatasetError);
    TempFile g("empty.dat", "");
    CHECK_THROWS_AS(load_movielens(g.path, MovielensFormat::dat_1m), EmptyDatasetError);
    CHECK_THROWS_AS(load_movielens("does_not_exist.csv", MovielensFormat::csv_small), IoError);
}

TEST_CASE("duplicate pairs keep the last occurrence and are counted") {
    TempFile f("dup.csv",
               "userId,movieId,rating,timestamp\n"
               "1,10,4.0,0\n"
               "1,10,2.5,1\n"
               "1,11,3.0,2\n");
    RatingsDataset ds = load_movielens(f.path, MovielensFormat::csv_small);
    CHECK(ds.triplets.size() == 2);
    CHECK(ds.duplicates_replaced == 1);
    CHECK(ds.triplets[0].value == doctest::Approx(2.5));
}

TEST_CASE("reloading the same file yields a structurally identical dataset") {
    TempFile f("reload.csv",
               "userId,movieId,rating,timestamp\n"
               "3,7,1.5,0\n"
               "1,7,4.5,0\n"
               "3,9,3.0,0\n");
    RatingsDataset a = load_movielens(f.path, MovielensFormat::csv_small);
    RatingsDataset b = load_movielens(f.path, MovielensFormat::csv_small);
    CHECK(a.triplets == b.triplets);
    CHECK(a.user_ids == b.user_ids);
    CHECK(a.item_ids == b.item_ids);
    CHECK(a.r_max == b.r_max);
}

TEST_CASE("index maps are bijections") {
    std::mt19937_64 rng(11);
    RatingsDataset ds = testing::random_dataset(rng, 17, 23, 150);
    REQUIRE(static_cast<int>(ds.user_ids.size()) == ds.num_users);
    REQUIRE(static_cast<int>(ds.item_ids.size()) == ds.num_items);
    for (int u = 0; u < ds.num_users; ++u) {
        CHECK(ds.user_index.at(ds.user_ids[static_cast<std::size_t>(u)]) == u);
    }
    for (int i = 0; i < ds.num_items; ++i) {
        CHECK(ds.item_index.at(ds.item_ids[static_cast<std::size_t>(i)]) == i);
    }
    for (const Rating& t : ds.triplets) {
        CHECK(t.user < ds.num_users);
        CHECK(t.item < ds.num_items);
        CHECK(t.value > 0.0);
        CHECK(t.value <= ds.r_max);
    }
}

TEST_CASE("split is a deterministic partition") {
    std::mt19937_64 rng(5);
    RatingsDataset ds = testing::random_dataset(rng, 30, 40, 1200);

    Split a = split_dataset(ds, 0.9, 7);
    Split b = split_dataset(ds, 0.9, 7);
    CHECK(a.train.triplets == b.train.triplets);
    CHECK(a.test.triplets == b.test.triplets);

    CHECK(a.train.size() + a.test.size() == ds.size());
    // Partition: walking both sides in order reproduces the original list.
    std::size_t ti = 0, si = 0;
    for (const Rating& t : ds.triplets) {
        if (ti < a.train.size() && a.train.triplets[ti] == t) {
            ++ti;
        } else {
            REQUIRE(si < a.test.size());
            CHECK(a.test.triplets[si] == t);
            ++si;
        }
    }
    CHECK(ti == a.train.size());
    CHECK(si == a.test.size());

    // Views inherit the parent's dimensions and scale.
    CHECK(a.train.num_users == ds.num_users);
    CHECK(a.test.num_items == ds.num_items);
    CHECK(a.train.r_max == ds.r_max);
}

TEST_CASE("split sizes follow the Bernoulli ratio") {
    // 1000 distinct triplets on a 25x40 grid.
    std::vector<std::int64_t> users, items;
    std::vector<double> values;
    for (int u = 0; u < 25; ++u) {
        for (int i = 0; i < 40; ++i) {
            users.push_back(u);
            items.push_back(i);
            values.push_back(1.0 + (u + i) % 5);
        }
    }
    RatingsDataset ds = dataset_from_triplets(users, items, values);
    REQUIRE(ds.size() == 1000);

    // Binomial(1000, 0.9): sd ~ 9.49, so [850, 950] is a ~5 sigma band.
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        Split s = split_dataset(ds, 0.9, seed);
        CHECK(s.train.size() >= 850);
        CHECK(s.train.size() <= 950);
    }
}

TEST_CASE("split rejects ratios outside (0,1)") {
    std::mt19937_64 rng(5);
    RatingsDataset ds = testing::random_dataset(rng, 4, 4, 10);
    CHECK_THROWS_AS(split_dataset(ds, 0.0, 1), ConfigError);
    CHECK_THROWS_AS(split_dataset(ds, 1.0, 1), ConfigError);
    CHECK_THROWS_AS(split_dataset(ds, -0.2, 1), ConfigError);
    CHECK_THROWS_AS(split_dataset(ds, 1.7, 1), ConfigError);
}
