#include <gtest/gtest.h>

#include "dermabcd/evaluate.hpp"
#include "dermabcd/preprocess.hpp"
#include "dermabcd/segment.hpp"
#include "support.hpp"

using namespace dermabcd;
using namespace dermabcd::testing;

namespace {

/// Thick straight band through (cx, cy) at angle theta, `width` pixels wide.
BinaryMask band(int w, int h, double cx, double cy, double theta, double width, double half_length) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    return mask_from(w, h, [=](double x, double y) {
        const double along = (x - cx) * c + (y - cy) * s;
        const double across = -(x - cx) * s + (y - cy) * c;
        return std::abs(across) <= width / 2.0 && std::abs(along) <= half_length;
    });
}

double hit_rate(const BinaryMask& detected, const BinaryMask& truth) {
    return static_cast<double>((detected & truth).count()) / static_cast<double>(truth.count());
}

PhantomSpec small_disk_spec() {
    PhantomSpec s;
    s.size = 256;
    s.radius = 60;
    s.edge_softness = 1.0;
    return s;
}

}  // namespace

TEST(DetectHairs, ConstantImageGivesEmptyMask) {
    EXPECT_EQ(detect_hairs(GrayImage(64, 64, 0.6)).count(), 0u);
}

TEST(DetectHairs, FindsThinDarkLine) {
    const auto line = band(128, 128, 64, 64, 0.3, 2.0, 50);
    const auto det = detect_hairs(gray_from(line, 0.2, 0.8));
    EXPECT_GE(hit_rate(det, line), 0.9);
}

TEST(DetectHairs, IgnoresBlobInterior) {
    const auto blob = disk(96, 96, 48, 48, 10);
    const auto det = detect_hairs(gray_from(blob, 0.3, 0.8));
    EXPECT_LT(hit_rate(det, erode(blob, StructuringElement::disk(1))), 0.05);
}

TEST(DetectHairs, RotationCovariant) {
    std::vector<double> rates;
    for (int k = 0; k < 8; ++k) {
        const auto line = band(128, 128, 64, 64, k * kPi / 8, 2.0, 45);
        rates.push_back(hit_rate(detect_hairs(gray_from(line, 0.25, 0.75)), line));
    }
    const auto [lo, hi] = std::minmax_element(rates.begin(), rates.end());
    EXPECT_LE(*hi - *lo, 0.05);
}

TEST(RefineHairMask, EmptyStaysEmpty) { EXPECT_EQ(refine_hair_mask(BinaryMask(40, 40)).count(), 0u); }

TEST(RefineHairMask, KeepsLineDropsBlob) {
    const auto line = band(160, 100, 60, 30, 0.1, 2.0, 45);
    const auto blob = disk(160, 100, 120, 70, 8);
    EXPECT_GT(elongation(line), 4.0);
    EXPECT_LT(elongation(blob), 4.0);
    const auto refined = refine_hair_mask(line | blob);
    EXPECT_EQ((refined & line).count(), line.count());
    EXPECT_EQ((refined & blob).count(), 0u);
}

TEST(RefineHairMask, BridgesOnePixelGaps) {
    BinaryMask dashed(80, 20);
    for (int x = 5; x < 75; ++x) {
        if (x % 6 != 5) {
            dashed.set(x, 10, true);
            dashed.set(x, 11, true);
        }
    }
    ASSERT_GT(connected_components(dashed).size(), 1u);
    EXPECT_EQ(connected_components(refine_hair_mask(dashed)).size(), 1u);
}

TEST(Inpaint, EmptyMaskIsIdentity) {
    RgbImage img(20, 10, {12, 34, 56});
    img.at(3, 3) = {200, 100, 0};
    EXPECT_EQ(inpaint_fmm(img, BinaryMask(20, 10)), img);
}

TEST(Inpaint, ConstantImageReproducedExactly) {
    const GrayImage g(40, 30, 0.42);
    const auto out = inpaint_fmm(g, disk(40, 30, 20, 15, 7));
    for (double v : out.pixels()) {
        EXPECT_DOUBLE_EQ(v, 0.42);
    }
}

TEST(Inpaint, RampStripeReconstruction) {
    GrayImage ramp(64, 32);
    for (int y = 0; y < 32; ++y) {
        for (int x = 0; x < 64; ++x) {
            ramp.at(x, y) = x / 63.0;
        }
    }
    const auto stripe = rect(64, 32, 30, 0, 5, 32);
    const auto out = inpaint_fmm(ramp, stripe);
    double worst = 0.0;
    for (int y = 0; y < 32; ++y) {
        for (int x = 30; x < 35; ++x) {
            worst = std::max(worst, std::abs(out.at(x, y) - x / 63.0));
        }
    }
    EXPECT_LT(worst, 0.05);
}

TEST(Inpaint, FullMaskRejected) {
    EXPECT_THROW(inpaint_fmm(GrayImage(8, 8, 0.5), BinaryMask(8, 8, true)), std::invalid_argument);
}

TEST(Inpaint, NeverTouchesPixelsOutsideMask) {
    auto spec = small_disk_spec();
    spec.noise_sigma = 0.05;
    const auto img = generate_phantom(spec).image;
    const auto m = band(256, 256, 128, 128, 0.7, 4, 100) | disk(256, 256, 40, 200, 6);
    const auto out = inpaint_fmm(img, m);
    for (int y = 0; y < 256; ++y) {
        for (int x = 0; x < 256; ++x) {
            if (!m.at(x, y)) {
                ASSERT_EQ(out.at(x, y), img.at(x, y));
            }
        }
    }
}

TEST(RemoveHair, HairlessPhantomUnchangedOutsideFalsePositives) {
    const auto img = generate_phantom(small_disk_spec()).image;
    const auto res = remove_hair(img);
    for (int y = 0; y < img.height(); ++y) {
        for (int x = 0; x < img.width(); ++x) {
            if (!res.hair_mask.at(x, y)) {
                for (int c = 0; c < 3; ++c) {
                    ASSERT_LE(std::abs(res.image.at(x, y)[c] - img.at(x, y)[c]), 1);
                }
            }
        }
    }
}

TEST(RemoveHair, RepairsTenHairs) {
    auto spec = small_disk_spec();
    spec.size = 384;
    spec.radius = 100;
    const auto clean = generate_phantom(spec);
    spec.hair_count = 10;
    const auto hairy = generate_phantom(spec);
    ASSERT_EQ(hairy.truth, clean.truth);
    const auto res = remove_hair(hairy.image);
    double err = 0.0;
    std::size_t n = 0;
    for (int y = 0; y < spec.size; ++y) {
        for (int x = 0; x < spec.size; ++x) {
            if (hairy.hair_mask.at(x, y)) {
                for (int c = 0; c < 3; ++c) {
                    err += std::abs(res.image.at(x, y)[c] - clean.image.at(x, y)[c]);
                    ++n;
                }
            }
        }
    }
    ASSERT_GT(n, 0u);
    EXPECT_LT(err / static_cast<double>(n), 10.0);
}

TEST(RemoveHair, ThickHairAcrossLesionBarelyMovesSegmentation) {
    PhantomSpec spec;
    spec.size = 320;
    spec.radius = 90;
    spec.edge_softness = 1.5;
    spec.noise_sigma = 0.02;
    const auto clean = generate_phantom(spec);
    auto hairy_img = clean.image;
    const auto hair = band(320, 320, 160, 160, 0.6, 5, 150);
    for (int y = 0; y < 320; ++y) {
        for (int x = 0; x < 320; ++x) {
            if (hair.at(x, y)) {
                hairy_img.at(x, y) = {35, 25, 20};
            }
        }
    }
    const auto base = segment_unsupervised(clean.image).mask;
    const auto repaired = segment_unsupervised(remove_hair(hairy_img).image).mask;
    EXPECT_LT(border_error(repaired, base), 2.0);
}

TEST(RemoveHair, NearlyIdempotent) {
    auto spec = small_disk_spec();
    spec.hair_count = 5;
    spec.noise_sigma = 0.03;
    const auto once = remove_hair(generate_phantom(spec).image).image;
    const auto twice = remove_hair(once).image;
    std::size_t changed = 0;
    for (std::size_t i = 0; i < once.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            if (std::abs(once.pixels()[i][c] - twice.pixels()[i][c]) > 2) {
                ++changed;
                break;
            }
        }
    }
    EXPECT_LT(static_cast<double>(changed) / static_cast<double>(once.size()), 0.005);
}
