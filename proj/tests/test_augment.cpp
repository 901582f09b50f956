#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "adacm/augment.hpp"
#include "adacm/rng.hpp"
#include "adacm/tensor.hpp"

using namespace adacm;

namespace {

Tensor grid4() {
    return Tensor::matrix({{1, 2, 3, 4},
                           {5, 6, 7, 8},
                           {9, 10, 11, 12},
                           {13, 14, 15, 16}});
}

double l2(const Tensor& a, const Tensor& b) {
    double s = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
    return std::sqrt(s);
}

}  // namespace

TEST_CASE("crop_shift against a hand grid") {
    Tensor img = grid4();

    // centered offset (pad, pad) reproduces the image
    CHECK(crop_shift(img, 1, 1, 1).values() == img.values());

    // offset (0,0) shifts content down-right, zero-filling top row and left col
    Tensor tl = crop_shift(img, 1, 0, 0);
    CHECK(tl(0, 0) == 0);
    CHECK(tl(0, 3) == 0);
    CHECK(tl(3, 0) == 0);
    CHECK(tl(1, 1) == 1);   // source (0,0)
    CHECK(tl(3, 3) == 11);  // source (2,2)

    // offset (2,2) shifts up-left
    Tensor br = crop_shift(img, 1, 2, 2);
    CHECK(br(0, 0) == 6);
    CHECK(br(2, 2) == 16);
    CHECK(br(3, 3) == 0);
    CHECK(br(3, 0) == 0);
}

TEST_CASE("hflip mirrors columns") {
    Tensor img = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
    Tensor f = hflip(img);
    CHECK(f(0, 0) == 3);
    CHECK(f(0, 2) == 1);
    CHECK(f(1, 1) == 5);
    CHECK(hflip(f).values() == img.values());
}

TEST_CASE("cutout_at zeroes a clipped rectangle") {
    Tensor img = grid4();
    Tensor c = cutout_at(img, 1, 2, 2, 2);
    CHECK(c(1, 2) == 0);
    CHECK(c(1, 3) == 0);
    CHECK(c(2, 2) == 0);
    CHECK(c(2, 3) == 0);
    CHECK(c(0, 2) == 3);  // outside the rectangle untouched
    CHECK(c(3, 3) == 16);

    Tensor edge = cutout_at(img, 3, 3, 5, 5);  // clipped at the border
    CHECK(edge(3, 3) == 0);
    CHECK(edge(2, 3) == 12);  // row above the clipped patch untouched
}

TEST_CASE("translate_img moves content and zero-fills") {
    Tensor img = grid4();
    Tensor t = translate_img(img, 1, -1);  // down one, left one
    CHECK(t(0, 0) == 0);  // new top row empty
    CHECK(t(1, 0) == 2);  // source (0,1)
    CHECK(t(3, 2) == 12);
    CHECK(t(1, 3) == 0);  // right col fell off

    CHECK(translate_img(img, 0, 0).values() == img.values());
}

TEST_CASE("rotate90k") {
    Tensor img = Tensor::matrix({{1, 2}, {3, 4}});
    Tensor r1 = rotate90k(img, 1);  // counterclockwise
    CHECK(r1(0, 0) == 2);
    CHECK(r1(0, 1) == 4);
    CHECK(r1(1, 0) == 1);
    CHECK(r1(1, 1) == 3);

    CHECK(rotate90k(img, 4).values() == img.values());
    CHECK(rotate90k(rotate90k(img, 3), 1).values() == img.values());
    CHECK(rotate90k(img, -1).values() == rotate90k(img, 3).values());

    Tensor rect = Tensor::matrix({{1, 2, 3}, {4, 5, 6}});
    CHECK(rotate90k(rect, 1).values() == rect.values());  // non-square passes through
}

TEST_CASE("weak vector jitter with zero scale is the identity") {
    std::vector<double> stds{1.0, 2.0, 3.0};
    AugmentPolicy p = weak_vector_policy(stds, 0.0);
    Tensor x = Tensor::vector({0.5, -1.5, 2.5});
    RngStream r(4);
    CHECK(weak_augment(x, p, r).values() == x.values());
}

TEST_CASE("weak vector jitter is keyed-deterministic") {
    std::vector<double> stds{1.0, 1.0, 1.0, 1.0};
    AugmentPolicy p = weak_vector_policy(stds);
    Tensor x = Tensor::vector({1, 2, 3, 4});

    RngStream a = augment_stream(7, p, 3, 11, 1);
    RngStream b = augment_stream(7, p, 3, 11, 1);
    CHECK(weak_augment(x, p, a).values() == weak_augment(x, p, b).values());

    RngStream c = augment_stream(7, p, 3, 11, 2);  // other view
    RngStream d = augment_stream(7, p, 4, 11, 1);  // other epoch
    RngStream e = augment_stream(7, p, 3, 12, 1);  // other sample
    RngStream f = augment_stream(7, p, 3, 11, 1);
    Tensor base = weak_augment(x, p, f);
    CHECK(weak_augment(x, p, c).values() != base.values());
    CHECK(weak_augment(x, p, d).values() != base.values());
    CHECK(weak_augment(x, p, e).values() != base.values());
}

TEST_CASE("jitter rejects a sigma length mismatch") {
    AugmentPolicy p;
    p.per_dim_sigma = {0.1, 0.1, 0.1};
    Tensor x = Tensor::vector({1, 2, 3, 4});
    RngStream r(1);
    CHECK_THROWS_AS(weak_augment(x, p, r), ShapeError);
}

TEST_CASE("weak image path stays within crop/flip reach") {
    AugmentPolicy p = weak_image_policy(1, 0.5);
    Tensor img = grid4();
    RngStream r(5);
    for (int i = 0; i < 20; ++i) {
        Tensor out = weak_augment(img, p, r);
        REQUIRE(out.shape() == img.shape());
        // all nonzero pixels must come from the original value set
        for (double v : out.values()) {
            bool known = v == 0.0;
            for (double o : img.values()) known = known || v == o;
            REQUIRE(known);
        }
    }
}

TEST_CASE("1x1 images pass through the weak path") {
    AugmentPolicy p = weak_image_policy();
    Tensor img({1, 1}, 0.7);
    RngStream r(2);
    CHECK(weak_augment(img, p, r).values() == img.values());
}

TEST_CASE("strong transform with an empty pool is the identity") {
    AugmentPolicy p;
    p.kind = PolicyKind::strong;
    p.pool.clear();
    Tensor x = Tensor::vector({1, 2, 3});
    RngStream r(3);
    CHECK(strong_augment(x, p, r).values() == x.values());
}

TEST_CASE("cutout-only strong policy zeroes exactly one rectangle") {
    AugmentPolicy p = strong_image_policy();
    p.pool = {StrongOp::cutout};
    p.ops_per_call = 1;
    Tensor img({8, 8}, 1.0);
    for (std::uint64_t k = 0; k < 30; ++k) {
        RngStream r = augment_stream(9, p, 0, k, 3);
        Tensor out = strong_augment(img, p, r);
        std::size_t rmin = 8, rmax = 0, cmin = 8, cmax = 0, zeros = 0;
        for (std::size_t i = 0; i < 8; ++i)
            for (std::size_t j = 0; j < 8; ++j) {
                if (out(i, j) == 0.0) {
                    ++zeros;
                    rmin = std::min(rmin, i);
                    rmax = std::max(rmax, i);
                    cmin = std::min(cmin, j);
                    cmax = std::max(cmax, j);
                } else {
                    REQUIRE(out(i, j) == 1.0);  // untouched pixels keep their value
                }
            }
        REQUIRE(zeros >= 1);
        REQUIRE(zeros == (rmax - rmin + 1) * (cmax - cmin + 1));  // solid rectangle
    }
}

TEST_CASE("strong vector transforms distort more than weak on average") {
    std::vector<double> stds{1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0};
    AugmentPolicy weak = weak_vector_policy(stds);     // 0.05 sigma
    AugmentPolicy strong = strong_vector_policy(stds); // 0.25 sigma + dropout/sign ops
    Tensor x = Tensor::vector({1, -1, 2, -2, 0.5, -0.5, 1.5, -1.5});

    double weak_sum = 0.0, strong_sum = 0.0;
    const int n = 500;
    for (std::uint64_t i = 0; i < n; ++i) {
        RngStream rw = augment_stream(11, weak, 0, i, 1);
        RngStream rs = augment_stream(11, strong, 0, i, 3);
        weak_sum += l2(weak_augment(x, weak, rw), x);
        strong_sum += l2(strong_augment(x, strong, rs), x);
    }
    CHECK(strong_sum / n > 2.0 * (weak_sum / n));
}

TEST_CASE("strong transforms are keyed-deterministic") {
    AugmentPolicy p = strong_image_policy();
    Tensor img = grid4();
    for (double& v : img.values()) v /= 16.0;  // image ops expect [0,1]
    RngStream a = augment_stream(13, p, 2, 5, 3);
    RngStream b = augment_stream(13, p, 2, 5, 3);
    CHECK(strong_augment(img, p, a).values() == strong_augment(img, p, b).values());
}

TEST_CASE("weak and strong policies use separate stream ids") {
    std::vector<double> stds{1.0};
    AugmentPolicy w = weak_vector_policy(stds);
    AugmentPolicy s = strong_vector_policy(stds);
    CHECK(w.stream_id != s.stream_id);
    RngStream rw = augment_stream(1, w, 0, 0, 0);
    RngStream rs = augment_stream(1, s, 0, 0, 0);
    CHECK(rw.next_u64() != rs.next_u64());
}
