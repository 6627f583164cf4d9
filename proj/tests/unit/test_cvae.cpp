#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <gtest/gtest.h>

#include "mpps/cvae.hpp"

using namespace mpps;

namespace {

std::vector<double> fixed_noise(int latent, int n) {
    Rng rng(5);
    std::normal_distribution<double> nd;
    std::vector<double> eps(static_cast<std::size_t>(latent) * n);
    for (auto& e : eps) e = nd(rng);
    return eps;
}

// Central differences against the analytic gradient for every parameter.
// Tiny gradients are compared against a floor so roundoff does not dominate.
void check_gradient(const EnvConfig& cfg, int hidden) {
    const auto data = collect_dataset(cfg, 10, 21);
    CvaeModel model(cfg.domain, hidden, 16, 0.01, 3);
    const CvaeBatch b = model.make_batch(data);
    const auto eps = fixed_noise(model.latent(), b.n);
    std::vector<double> grad;
    model.elbo(b, eps, &grad);
    ASSERT_EQ(grad.size(), model.parameter_count());

    auto& p = model.params();
    double worst = 0.0;
    std::size_t worst_at = 0;
    for (std::size_t i = 0; i < p.size(); ++i) {
        const double keep = p[i];
        const double h = 1e-5 * std::max(1.0, std::abs(keep));
        p[i] = keep + h;
        const double up = model.elbo(b, eps);
        p[i] = keep - h;
        const double down = model.elbo(b, eps);
        p[i] = keep;
        const double numeric = (up - down) / (2 * h);
        const double rel = std::abs(numeric - grad[i]) / std::max({std::abs(numeric), std::abs(grad[i]), 1e-2});
        if (rel > worst) worst = rel, worst_at = i;
    }
    EXPECT_LT(worst, 1e-4) << "parameter " << worst_at;
}

CvaeConfig quick(int epochs) {
    CvaeConfig c;
    c.epochs = epochs;
    return c;
}

}  // namespace

TEST(Cvae, GradientMatchesFiniteDifferencesCraft) { check_gradient(EnvConfig::craft_default(), 200); }

TEST(Cvae, GradientMatchesFiniteDifferencesBox) { check_gradient(EnvConfig::box_default(), 40); }

TEST(Cvae, CodecRoundTrip) {
    for (const auto& cfg : {EnvConfig::craft_default(), EnvConfig::box_default()}) {
        const auto data = collect_dataset(cfg, 300, 8);
        const StateCodec codec(cfg.domain);
        for (const auto& p : data) {
            const auto x = codec.encode_state(p.s);
            ASSERT_EQ(static_cast<int>(x.size()), codec.state_dim());
            ASSERT_EQ(static_cast<int>(codec.encode_obs(p.o).size()), codec.obs_dim());
            EXPECT_EQ(codec.decode_state(x), p.s) << to_string(p.s);
        }
    }
}

TEST(Cvae, TrainingImprovesHeldoutElbo) {
    const auto data = collect_dataset(EnvConfig::craft_default(), 3000, 2);
    std::vector<CvaeEpoch> curve;
    CvaeModel::train(data, quick(10), &curve);
    ASSERT_EQ(curve.size(), 11u);
    EXPECT_GT(curve.back().elbo_heldout, curve.front().elbo_heldout);
    for (std::size_t i = 1; i < curve.size(); ++i) {
        EXPECT_TRUE(std::isfinite(curve[i].elbo_train));
        EXPECT_GE(curve[i].kl_train, 0.0);
    }
}

TEST(Cvae, ReconstructsFullyObservedHeldoutPairs) {
    const auto train = collect_dataset(EnvConfig::craft_default(), 10000, 1);
    const auto model = CvaeModel::train(train, quick(40));
    const auto held = collect_dataset(EnvConfig::craft_default(), 8000, 77);
    int n = 0, ok = 0;
    for (const auto& p : held) {
        if (!p.o.all_seen) continue;
        ++n;
        ok += model.reconstruct(p) == p.s;
    }
    ASSERT_GT(n, 20);
    EXPECT_GE(static_cast<double>(ok) / n, 0.9) << ok << "/" << n;
}

TEST(Cvae, ProjectedSamplesAreValidAndAgree) {
    for (const auto& cfg : {EnvConfig::craft_default(), EnvConfig::box_default()}) {
        const auto model = CvaeModel::train(collect_dataset(cfg, 1500, 4), quick(3));
        const auto probe = collect_dataset(cfg, 200, 40);
        for (std::size_t i = 0; i < probe.size(); i += 5) {
            const auto set = model.sample(probe[i].o, 5, i);
            ASSERT_EQ(set.worlds.size(), 5u);
            EXPECT_EQ(set.backend, "cvae");
            for (const auto& w : set.worlds) {
                std::visit([](const auto& s) { s.validate(); }, w);
                EXPECT_TRUE(agrees_with(probe[i].o, w)) << to_string(w);
            }
        }
    }
}

TEST(Cvae, CheckpointRoundTrip) {
    const auto data = collect_dataset(EnvConfig::box_default(), 800, 6);
    const auto model = CvaeModel::train(data, quick(2));
    std::stringstream buf;
    model.save(buf);
    const auto back = CvaeModel::load(buf);
    EXPECT_EQ(back.params(), model.params());
    EXPECT_EQ(back.hidden(), model.hidden());
    const auto& o = data[100].o;
    EXPECT_EQ(back.sample(o, 4, 9).worlds, model.sample(o, 4, 9).worlds);
}

TEST(Cvae, SeedDeterminism) {
    const auto data = collect_dataset(EnvConfig::craft_default(), 600, 6);
    const auto a = CvaeModel::train(data, quick(2));
    const auto b = CvaeModel::train(data, quick(2));
    EXPECT_EQ(a.params(), b.params());
}

TEST(Cvae, RejectsCorruptCheckpoint) {
    std::stringstream buf("mpps-cvae 1\ncraft 200 16\n1 2 3\n");
    EXPECT_THROW(CvaeModel::load(buf), Error);
}
