#include "latcomp/error.hpp"
#include "latcomp/metrics.hpp"
#include "support.hpp"

#include <doctest.h>

using namespace latcomp;

namespace {

double brute_psnr(const ImageBuffer& a, const ImageBuffer& b) {
  long double sum = 0;
  for (size_t i = 0; i < a.values().size(); ++i) {
    const long double d = static_cast<long double>(a.values()[i]) - b.values()[i];
    sum += d * d;
  }
  const long double mse = sum / a.values().size();
  return static_cast<double>(10.0L * std::log10(1.0L / mse));
}

}  // namespace

TEST_CASE("psnr") {
  std::mt19937_64 rng(3);
  const ImageBuffer a = testing::random_image(rng, 31, 23);
  CHECK(psnr(a, a) == 99.0);

  ImageBuffer b = a;
  ImageBuffer c(31, 23, Color::Constant(0.2f));
  ImageBuffer d(31, 23, Color::Constant(0.3f));
  CHECK(psnr(c, d) == doctest::Approx(20.0).epsilon(1e-6));

  for (int i = 0; i < 20; ++i) {
    const ImageBuffer x = testing::random_image(rng, 40, 30), y = testing::random_image(rng, 40, 30);
    CHECK(std::abs(psnr(x, y) - brute_psnr(x, y)) <= 1e-9);
    CHECK(psnr(x, y) == psnr(y, x));
  }

  Mask m(31, 23);
  CHECK_THROWS_AS(psnr(a, b, m), Error);
  m.set(3, 3, true);
  b.set_pixel(3, 3, Color(0, 0, 0));
  const Color diff = a.pixel(3, 3);
  const double mse = diff.cast<double>().squaredNorm() / 3.0;
  CHECK(psnr(a, b, m) == doctest::Approx(std::min(99.0, 10 * std::log10(1 / mse))));
  CHECK_THROWS_AS(psnr(a, ImageBuffer(31, 22)), Error);
}

TEST_CASE("depth metrics") {
  std::mt19937_64 rng(4);
  const DepthMap truth = testing::random_depth(rng, 30, 20, 0.5, 10.0, 0.2);
  auto scaled = [&](double s) {
    DepthMap d(30, 20);
    for (size_t i = 0; i < d.pixel_count(); ++i) d.set(i, truth.at(i) * s);
    return d;
  };
  const auto same = depth_metrics(truth, truth);
  CHECK(same.abs_rel == 0.0);
  CHECK(same.delta1 == 1.0);
  const auto m11 = depth_metrics(scaled(1.1), truth);
  CHECK(m11.abs_rel == doctest::Approx(0.1));
  CHECK(m11.delta1 == 1.0);
  const auto m13 = depth_metrics(scaled(1.3), truth);
  CHECK(m13.abs_rel == doctest::Approx(0.3));
  CHECK(m13.delta1 == 0.0);

  for (int t = 0; t < 20; ++t) {
    const DepthMap p = testing::random_depth(rng, 30, 20, 0.5, 10.0, 0.3);
    long double rel = 0;
    size_t in = 0, n = 0;
    for (size_t i = 0; i < p.pixel_count(); ++i) {
      if (!p.valid(i) || !truth.valid(i)) continue;
      rel += std::abs(static_cast<long double>(p.at(i)) - truth.at(i)) / truth.at(i);
      const double r = p.at(i) / truth.at(i);
      in += (r < 1.25 && r > 0.8) ? 1 : 0;
      ++n;
    }
    const auto m = depth_metrics(p, truth);
    CHECK(m.valid_pixels == n);
    CHECK(std::abs(m.abs_rel - static_cast<double>(rel / n)) <= 1e-9);
    CHECK(std::abs(m.delta1 - static_cast<double>(in) / n) <= 1e-9);
  }
  CHECK_THROWS_AS(depth_metrics(DepthMap(30, 20), truth), Error);
}

TEST_CASE("si_loss") {
  std::mt19937_64 rng(5);
  const DepthMap truth = testing::random_depth(rng, 25, 25, 0.3, 15.0, 0.1);
  CHECK(si_loss(truth, truth) == 0.0);
  for (double c : {0.5, 1.7, 3.0, 0.01}) {
    DepthMap p(25, 25);
    for (size_t i = 0; i < p.pixel_count(); ++i) p.set(i, c * truth.at(i));
    CHECK(si_loss(p, truth, 1.0) <= 1e-7);
    CHECK(si_loss(p, truth, 0.0) == doctest::Approx(std::abs(std::log(c))).epsilon(1e-9));
  }
  for (int t = 0; t < 20; ++t) {
    const DepthMap p = testing::random_depth(rng, 25, 25, 0.3, 15.0, 0.1);
    long double s = 0, s2 = 0;
    size_t n = 0;
    for (size_t i = 0; i < p.pixel_count(); ++i) {
      if (!p.valid(i) || !truth.valid(i)) continue;
      const long double g = std::log(static_cast<long double>(truth.at(i))) - std::log(static_cast<long double>(p.at(i)));
      s += g;
      s2 += g * g;
      ++n;
    }
    double prev = 1e300;
    for (double lambda : {0.0, 0.25, 0.5, 0.85, 1.0}) {
      const long double expect = std::sqrt(s2 / n - lambda * (s / n) * (s / n));
      const double got = si_loss(p, truth, lambda);
      CHECK(std::abs(got - static_cast<double>(expect)) <= 1e-9);
      CHECK(got <= prev);
      prev = got;
    }
  }
  // Negative depths never reach a DepthMap; the only failure left is an
  // empty joint mask.
  CHECK_THROWS_AS(si_loss(DepthMap(25, 25), truth), Error);
}

TEST_CASE("ms_ssim") {
  std::mt19937_64 rng(6);
  ImageBuffer x(192, 180);
  // Smooth structured content.
  for (int y = 0; y < 180; ++y) {
    for (int u = 0; u < 192; ++u) {
      const float v = 0.5f + 0.4f * std::sin(0.11f * u) * std::cos(0.07f * y);
      x.set_pixel(u, y, Color(v, 1 - v, 0.5f * v));
    }
  }
  CHECK(std::abs(ms_ssim(x, x) - 1.0) <= 1e-9);

  ImageBuffer inv(192, 180);
  for (size_t i = 0; i < x.pixel_count(); ++i) inv.set_pixel(i, Color::Ones() - x.pixel(i));
  CHECK(ms_ssim(x, inv) < 0.5);

  const ImageBuffer a(180, 176, Color::Constant(0.25f)), b(180, 176, Color::Constant(0.75f));
  const double c1 = 0.01 * 0.01;
  const double l = (2 * 0.25 * 0.75 + c1) / (0.25 * 0.25 + 0.75 * 0.75 + c1);
  CHECK(ssim(a, b) == doctest::Approx(l).epsilon(1e-12));
  CHECK(std::abs(ms_ssim(a, b) - std::pow(ssim(a, b), kMsSsimWeights.back())) <= 1e-6);

  const ImageBuffer small(175, 200);
  try {
    ms_ssim(small, small);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("176") != std::string::npos);
  }
}

TEST_CASE("single-scale ssim against a direct window oracle") {
  std::mt19937_64 rng(7);
  const ImageBuffer a = testing::random_image(rng, 15, 13), b = testing::random_image(rng, 15, 13);
  // 11x11 Gaussian window evaluated directly at each valid position.
  double taps[11], sum = 0;
  for (int i = 0; i < 11; ++i) sum += taps[i] = std::exp(-((i - 5.0) * (i - 5.0)) / (2 * 1.5 * 1.5));
  double total = 0;
  for (int ch = 0; ch < 3; ++ch) {
    double acc = 0;
    for (int oy = 0; oy <= 2; ++oy) {
      for (int ox = 0; ox <= 4; ++ox) {
        double mx = 0, my = 0, sxx = 0, syy = 0, sxy = 0;
        for (int j = 0; j < 11; ++j) {
          for (int i = 0; i < 11; ++i) {
            const double w = taps[i] * taps[j] / (sum * sum);
            const double p = a.pixel(ox + i, oy + j)[ch], q = b.pixel(ox + i, oy + j)[ch];
            mx += w * p;
            my += w * q;
            sxx += w * p * p;
            syy += w * q * q;
            sxy += w * p * q;
          }
        }
        const double c1 = 1e-4, c2 = 9e-4;
        acc += ((2 * mx * my + c1) * (2 * (sxy - mx * my) + c2)) /
               ((mx * mx + my * my + c1) * (sxx - mx * mx + syy - my * my + c2));
      }
    }
    total += acc / 15.0;
  }
  CHECK(ssim(a, b) == doctest::Approx(total / 3.0).epsilon(1e-10));
}
