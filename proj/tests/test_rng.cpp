#include <doctest.h>

#include <algorithm>
#include <set>
#include <vector>

#include "cforge/rng.hpp"

using cforge::Rng;

TEST_CASE("same seed gives the same stream") {
    Rng a(42), b(42);
    for (int i = 0; i < 1000; ++i) CHECK(a.next() == b.next());
}

TEST_CASE("different seeds diverge") {
    Rng a(1), b(2);
    int same = 0;
    for (int i = 0; i < 64; ++i)
        if (a.next() == b.next()) ++same;
    CHECK(same == 0);
}

TEST_CASE("bounded stays in range and hits every residue") {
    Rng r(7);
    std::set<std::uint64_t> seen;
    for (int i = 0; i < 2000; ++i) {
        std::uint64_t v = r.bounded(10);
        CHECK(v < 10);
        seen.insert(v);
    }
    CHECK(seen.size() == 10);
}

TEST_CASE("bounded(1) is always zero") {
    Rng r(9);
    for (int i = 0; i < 10; ++i) CHECK(r.bounded(1) == 0);
}

TEST_CASE("unit stays in [0,1)") {
    Rng r(3);
    for (int i = 0; i < 1000; ++i) {
        double u = r.unit();
        CHECK(u >= 0.0);
        CHECK(u < 1.0);
    }
}

TEST_CASE("derive mixes the salt") {
    Rng a = Rng::derive(5, 100);
    Rng b = Rng::derive(5, 101);
    CHECK(a.next() != b.next());
}

TEST_CASE("shuffle permutes without loss") {
    std::vector<int> v(100);
    for (int i = 0; i < 100; ++i) v[i] = i;
    std::vector<int> orig = v;
    Rng r(11);
    cforge::shuffle(v, r);
    CHECK(v != orig);
    std::sort(v.begin(), v.end());
    CHECK(v == orig);
}

TEST_CASE("shuffle is seed-deterministic") {
    std::vector<int> a{1, 2, 3, 4, 5, 6, 7, 8}, b{1, 2, 3, 4, 5, 6, 7, 8};
    Rng ra(13), rb(13);
    cforge::shuffle(a, ra);
    cforge::shuffle(b, rb);
    CHECK(a == b);
}
