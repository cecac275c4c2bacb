#include <catch2/catch_amalgamated.hpp>

#include "latfuse/direction.hpp"
#include "latfuse/latent_code.hpp"
#include "latfuse/rng.hpp"

using namespace latfuse;

namespace {

LayeredLatentCode random_code(int layers, int dim, std::uint64_t seed) {
    Rng rng(seed);
    LayeredLatentCode c(layers, dim);
    for (auto& x : c.flat()) x = rng.normal();
    return c;
}

SemanticDirection random_direction(int layers, int dim, const LayerMask& mask,
                                   std::uint64_t seed) {
    Rng rng(seed);
    SemanticDirection d;
    d.attribute = "test";
    d.mask = mask;
    d.vector = LayeredLatentCode(layers, dim);
    for (int layer : mask.active()) {
        double* r = d.vector.row(layer);
        for (int i = 0; i < dim; ++i) r[i] = rng.normal();
    }
    const double n = norm_over_mask(d.vector, mask);
    for (int layer : mask.active()) {
        double* r = d.vector.row(layer);
        for (int i = 0; i < dim; ++i) r[i] /= n;
    }
    d.magnitude = n;
    d.normalized = true;
    return d;
}

}  // namespace

TEST_CASE("vector_view concatenates active rows in ascending order") {
    auto c = LayeredLatentCode::from_rows(2, 2, {1, 2, 3, 4});
    CHECK(vector_view(c, LayerMask({0, 1})) == std::vector<double>{1, 2, 3, 4});
    CHECK(vector_view(c, LayerMask({1})) == std::vector<double>{3, 4});
}

TEST_CASE("vector_view middle mask of an 18x512 code has length 5120") {
    LayeredLatentCode c(18, 512);
    CHECK(vector_view(c, LayerMask::middle_default()).size() == 5120);
}

TEST_CASE("vector_view rejects out-of-range mask indices") {
    LayeredLatentCode c(4, 4);
    CHECK_THROWS_AS(vector_view(c, LayerMask({4})), ContractError);
}

TEST_CASE("ablate_layers zeroes exactly the two rows of one resolution layer") {
    auto c = random_code(18, 8, 1);
    SECTION("resolution layer 1 -> rows 0 and 1") {
        auto a = ablate_layers(c, 1);
        for (int d = 0; d < 8; ++d) {
            CHECK(a.at(0, d) == 0.0);
            CHECK(a.at(1, d) == 0.0);
        }
        for (int layer = 2; layer < 18; ++layer)
            for (int d = 0; d < 8; ++d) CHECK(a.at(layer, d) == c.at(layer, d));
    }
    SECTION("resolution layer 9 -> rows 16 and 17") {
        auto a = ablate_layers(c, 9);
        for (int d = 0; d < 8; ++d) {
            CHECK(a.at(16, d) == 0.0);
            CHECK(a.at(17, d) == 0.0);
        }
        for (int layer = 0; layer < 16; ++layer)
            for (int d = 0; d < 8; ++d) CHECK(a.at(layer, d) == c.at(layer, d));
    }
    SECTION("changes exactly 2*D entries") {
        auto a = ablate_layers(c, 3);
        int changed = 0;
        for (int layer = 0; layer < 18; ++layer)
            for (int d = 0; d < 8; ++d)
                if (a.at(layer, d) != c.at(layer, d)) ++changed;
        CHECK(changed == 2 * 8);
    }
}

TEST_CASE("ablate_layers is idempotent and validates the resolution layer") {
    auto c = random_code(18, 4, 2);
    CHECK(ablate_layers(ablate_layers(c, 4), 4) == ablate_layers(c, 4));
    CHECK_THROWS_AS(ablate_layers(c, 0), ContractError);
    CHECK_THROWS_AS(ablate_layers(c, 10), ContractError);
}

TEST_CASE("ablate_layers does not mutate its input") {
    auto c = random_code(18, 4, 3);
    auto copy = c;
    (void)ablate_layers(c, 2);
    CHECK(c == copy);
}

TEST_CASE("shift_along with zero amount returns the input exactly") {
    auto c = random_code(6, 5, 4);
    auto d = random_direction(6, 5, LayerMask({1, 2, 3}), 5);
    CHECK(shift_along(c, d, 0.0) == c);
}

TEST_CASE("shift_along leaves masked-out layers bit-identical") {
    auto c = random_code(18, 8, 6);
    auto d = random_direction(18, 8, LayerMask::middle_default(), 7);
    auto shifted = shift_along(c, d, 2.0);  // gender alignment is about 2 units
    const LayerMask outside = LayerMask::middle_default().complement(18);
    CHECK(vector_view(shifted, outside) == vector_view(c, outside));
    // and the shift moved something inside the mask
    CHECK(vector_view(shifted, d.mask) != vector_view(c, d.mask));
}

TEST_CASE("shift_along by +a then -a returns the input within 1e-12") {
    auto c = random_code(6, 6, 8);
    auto d = random_direction(6, 6, LayerMask({0, 1, 2, 3, 4, 5}), 9);
    auto back = shift_along(shift_along(c, d, 1.75), d, -1.75);
    for (std::size_t i = 0; i < c.flat().size(); ++i)
        CHECK(std::abs(back.flat()[i] - c.flat()[i]) < 1e-12);
}

TEST_CASE("shift_along validates shape and normalization") {
    auto c = random_code(6, 5, 10);
    auto d = random_direction(4, 5, LayerMask({1, 2}), 11);
    CHECK_THROWS_AS(shift_along(c, d, 1.0), ContractError);

    auto bad = random_direction(6, 5, LayerMask({1, 2}), 12);
    for (int layer : bad.mask.active())
        for (int i = 0; i < 5; ++i) bad.vector.row(layer)[i] *= 2.0;
    CHECK_THROWS_AS(shift_along(c, bad, 1.0), ContractError);
}

TEST_CASE("dataset enforces shared shape and label keys") {
    Dataset ds;
    Sample a{"a", LayeredLatentCode(2, 3), {{"x", 1.0}}};
    ds.add(a);
    Sample wrong_shape{"b", LayeredLatentCode(3, 3), {{"x", 1.0}}};
    CHECK_THROWS_AS(ds.add(wrong_shape), ContractError);
    Sample wrong_labels{"c", LayeredLatentCode(2, 3), {{"y", 1.0}}};
    CHECK_THROWS_AS(ds.add(wrong_labels), ContractError);
}

TEST_CASE("layer mask basics") {
    CHECK_THROWS_AS(LayerMask(std::vector<int>{}), ContractError);
    CHECK_THROWS_AS(LayerMask({-1}), ContractError);
    CHECK(LayerMask::middle_default().active() == std::vector<int>{2, 3, 4, 5, 6, 7, 8, 9, 10, 11});
    CHECK(LayerMask::all(3).active() == std::vector<int>{0, 1, 2});
    CHECK(LayerMask({5, 2, 2}).active() == std::vector<int>{2, 5});
}
