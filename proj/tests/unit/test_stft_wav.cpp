#include <filesystem>
#include <fstream>

#include "blindcapon/stft.hpp"
#include "blindcapon/wav.hpp"
#include "doctest.h"
#include "helpers.hpp"

using namespace blindcapon;

TEST_CASE("sqrt-Hann satisfies the overlap-add condition at hop 128") {
  const rvec w = sqrt_hann(1024);
  rvec acc = rvec::Zero(128);
  for (int i = 0; i < 1024; ++i) acc[i % 128] += w[i] * w[i];
  CHECK((acc.array() - acc[0]).abs().maxCoeff() < 1e-12);
}

TEST_CASE("impulse round trip") {
  rmat x = rmat::Zero(3, 4000);
  x(0, 0) = 1.0;
  x(1, 1999) = 1.0;
  x(2, 3999) = 1.0;
  const rmat y = istft(stft(x, 16000.0));
  REQUIRE(y.cols() == x.cols());
  CHECK((y - x).cwiseAbs().maxCoeff() < 1e-8);
}

TEST_CASE("random noise round trip with the default parameters") {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g;
  rmat x(5, 16000);
  for (auto& v : x.reshaped()) v = g(rng);
  const rmat y = istft(stft(x, 16000.0));
  CHECK((y - x).norm() / x.norm() < 1e-8);
}

TEST_CASE("tone lands in its bin") {
  rmat x(1, 16000);
  for (int n = 0; n < x.cols(); ++n) x(0, n) = std::sin(2.0 * kPi * 1000.0 * n / 16000.0);
  const auto t = stft(x, 16000.0);
  CHECK(t.num_bins() == 513);
  rvec energy(t.num_bins());
  for (int k = 0; k < t.num_bins(); ++k) energy[k] = t.bins[k].squaredNorm();
  Eigen::Index peak;
  energy.maxCoeff(&peak);
  CHECK(std::abs(peak - 64) <= 1);
}

TEST_CASE("stft preconditions") {
  CHECK_THROWS_AS(stft(rmat::Zero(1, 500), 16000.0), Error);
  CHECK_THROWS_AS(stft(rmat::Zero(1, 5000), 16000.0, {1023, 128}), Error);
  CHECK_THROWS_AS(stft(rmat::Zero(1, 5000), 16000.0, {1024, 1024}), Error);
}

TEST_CASE("wav round trip") {
  const auto dir = std::filesystem::temp_directory_path() / "blindcapon_wav_test";
  std::filesystem::create_directories(dir);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  rmat x(3, 1001);
  for (auto& v : x.reshaped()) v = u(rng);

  const auto f32 = (dir / "a.wav").string();
  write_wav(f32, x, 8000.0, WavEncoding::Float32);
  const auto r32 = read_wav(f32);
  CHECK(r32.sample_rate == 8000.0);
  REQUIRE(r32.samples.rows() == 3);
  REQUIRE(r32.samples.cols() == 1001);
  CHECK((r32.samples - x).cwiseAbs().maxCoeff() < 1e-7);

  const auto p16 = (dir / "b.wav").string();
  write_wav(p16, x, 44100.0, WavEncoding::Pcm16);
  const auto r16 = read_wav(p16);
  CHECK((r16.samples - x).cwiseAbs().maxCoeff() <= 1.0 / 32768.0);

  CHECK_THROWS_AS(read_wav((dir / "missing.wav").string()), Error);
  {
    std::ofstream bad(dir / "bad.wav", std::ios::binary);
    bad << "RIFX0000WAVEjunk";
  }
  CHECK_THROWS_AS(read_wav((dir / "bad.wav").string()), Error);
  std::filesystem::remove_all(dir);
}
