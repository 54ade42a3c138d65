#include <cmath>

#include "catch_amalgamated.hpp"
#include "cdma/asymptotic.hpp"
#include "cdma/evaluate.hpp"
#include "cdma/finite_bounds.hpp"
#include "cdma/oracle.hpp"
#include "support.hpp"

using Catch::Matchers::WithinAbs;

namespace {
double sigma2_of(double db) { return cdma::EbN0{db}.sigma2(); }
}  // namespace

TEST_CASE("property: asymptotic lower bound never exceeds the upper bound") {
  for (double beta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    for (double db : {0.0, 4.0, 8.0, 12.0, 16.0}) {
      const auto load = cdma::LoadPoint::from_beta(beta);
      INFO("beta=" << beta << " db=" << db);
      CHECK(cdma::asympt_lower_gaussian(load, sigma2_of(db)).bits_per_user <=
            cdma::asympt_upper(load, sigma2_of(db)).bits_per_user + 1e-9);
    }
  }
}

TEST_CASE("property: Tanaka lies between the bounds at high load") {
  for (double beta : {2.0, 4.0, 8.0}) {
    for (double db : {4.0, 8.0, 16.0}) {
      const auto load = cdma::LoadPoint::from_beta(beta);
      const double s2 = sigma2_of(db);
      const double t = cdma::tanaka_capacity(load, s2).c_per_user;
      INFO("beta=" << beta << " db=" << db << " tanaka=" << t);
      CHECK(cdma::asympt_lower_gaussian(load, s2).bits_per_user <= t);
      CHECK(t <= cdma::asympt_upper(load, s2).bits_per_user + 0.02);
    }
  }
}

TEST_CASE("property: Tanaka upper-bounds hard-decision BPSK for beta <= 1") {
  testing_support::Gen gen(61);
  for (int i = 0; i < 40; ++i) {
    const double beta = gen.uniform(0.05, 1.0);
    const double s2 = sigma2_of(gen.uniform(-2, 20));
    INFO("beta=" << beta << " s2=" << s2);
    CHECK(cdma::tanaka_capacity(cdma::LoadPoint::from_beta(beta), s2).c_per_user >= cdma::bpsk_reference(s2) - 0.01);
  }
}

TEST_CASE("property: asymptotic outputs lie in [0, 1] and D1 dominates") {
  testing_support::Gen gen(62);
  for (int i = 0; i < 25; ++i) {
    const auto load = cdma::LoadPoint::from_beta(gen.log_uniform(0.05, 50));
    const double s2 = gen.log_uniform(1e-3, 1e2);
    const double lo = cdma::asympt_lower_gaussian(load, s2).bits_per_user;
    const double d1 = cdma::d1_approx(load, s2).bits_per_user;
    const double up = cdma::asympt_upper(load, s2).bits_per_user;
    const double ta = cdma::tanaka_capacity(load, s2).c_per_user;
    INFO("beta=" << load.beta() << " s2=" << s2);
    for (double v : {lo, d1, up}) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
    CHECK(ta >= -1e-12);
    CHECK(ta <= 1.0 + 1e-9);
    CHECK(lo <= d1 + 1e-6);
  }
}

TEST_CASE("property: noiseless asymptotic lower and upper coincide") {
  testing_support::Gen gen(63);
  for (int i = 0; i < 20; ++i) {
    cdma::BoundRequest r;
    r.asymptotic = true;
    r.zeta = gen.log_uniform(0.01, 100);
    r.side = cdma::Side::both;
    const auto recs = cdma::evaluate(r);
    REQUIRE(recs.size() == 2);
    CHECK(recs[0].bits_per_user == recs[1].bits_per_user);
  }
}

TEST_CASE("property: finite lower bounds stay below the upper bounds") {
  testing_support::Gen gen(64);
  for (int i = 0; i < 30; ++i) {
    const cdma::SystemSize size{gen.integer(1, 64), gen.integer(1, 200)};
    INFO("m=" << size.m << " n=" << size.n);
    CHECK(cdma::noiseless_lower(size).bits_total <=
          cdma::conjectured_upper(size, cdma::NoiseModel::noiseless()).bits_total + 1e-9);
  }
  for (int i = 0; i < 15; ++i) {
    const cdma::SystemSize size{gen.integer(1, 32), gen.integer(1, 64)};
    const auto g = cdma::NoiseModel::gaussian(sigma2_of(gen.uniform(-2, 16)));
    INFO("m=" << size.m << " n=" << size.n << " " << g.describe());
    CHECK(cdma::noisy_lower_envelope(size, g).bits_total <= cdma::conjectured_upper(size, g).bits_total + 1e-9);
  }
}

TEST_CASE("property: the envelope dominates random family members") {
  testing_support::Gen gen(65);
  for (int i = 0; i < 20; ++i) {
    const cdma::SystemSize size{gen.integer(1, 24), gen.integer(1, 40)};
    const auto g = cdma::NoiseModel::gaussian(gen.log_uniform(0.01, 5));
    const double env = cdma::noisy_lower_envelope(size, g).meta.raw_bits_total;
    for (int k = 0; k < 5; ++k) {
      const double gamma = gen.log_uniform(1e-4, 1e3);
      CHECK(cdma::noisy_lower_gamma(size, g, gamma).meta.raw_bits_total <= env + 1e-9);
    }
  }
}

TEST_CASE("property: closed form and generic assembly agree") {
  testing_support::Gen gen(66);
  for (int i = 0; i < 10; ++i) {
    const cdma::SystemSize size{gen.integer(1, 16), gen.integer(1, 16)};
    const double gamma = gen.log_uniform(0.01, 10);
    const auto model = gen.coin() ? cdma::NoiseModel::gaussian(gen.uniform(0.05, 4))
                                  : cdma::NoiseModel::uniform(gen.uniform(0.1, 3));
    INFO(model.describe() << " m=" << size.m << " n=" << size.n << " gamma=" << gamma);
    CHECK_THAT(cdma::noisy_lower_gamma(size, model, gamma).meta.raw_bits_total,
               WithinAbs(cdma::noisy_lower_generic(size, model, gamma).meta.raw_bits_total, 1e-7));
  }
}
