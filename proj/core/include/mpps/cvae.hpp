#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "mpps/hallucinator.hpp"

namespace mpps {

// Flattened abstract-variable vectors in natural units (counts, codes, bits).
//   craft state: zone count, z, one boundary code per zone pair, rho, omega
//   bits and inventory, over max_zones zones.
//   box state: box counts, loose-key bits, held-key bits.
// Observation features are the view state in the same layout plus
// completeness flags and the unseen fraction.
class StateCodec {
public:
    explicit StateCodec(Domain d, int max_zones = 3, int cap = kCountCap);

    Domain domain() const { return domain_; }
    int state_dim() const;
    int obs_dim() const;

    std::vector<double> encode_state(const AbstractWorld& s) const;
    std::vector<double> encode_obs(const PartialAbstractState& o) const;
    // Round and clamp into a valid abstract state.
    AbstractWorld decode_state(const std::vector<double>& x) const;

private:
    void put_craft(const AbstractState& s, double* out) const;
    void put_box(const BoxAbstractState& s, double* out) const;

    Domain domain_;
    int max_zones_;
    int cap_;
};

struct CvaeConfig {
    int hidden = 0;  // 0: 200 for craft, 300 for box
    int latent = 16;
    int epochs = 30;
    int batch = 64;
    double lr = 3e-3;
    double momentum = 0.9;
    double clip = 10.0;  // gradient norm clip
    double heldout_fraction = 0.1;
    double sigma_floor = 0.01;
    std::uint64_t seed = 1;
};

struct CvaeEpoch {
    int epoch = 0;
    double elbo_train = 0.0;
    double elbo_heldout = 0.0;
    double kl_train = 0.0;  // mean KL term over the epoch's batches
};

// Encoded (s, o) pairs, column per pair.
struct CvaeBatch {
    int n = 0;
    std::vector<double> s;  // state_dim x n, column-major
    std::vector<double> o;  // obs_dim x n
};

// Conditional VAE: encoder h(z | s, o) and decoder g(s | z, o), both one
// tanh hidden layer with diagonal Gaussian heads (sigma = exp(.) + floor).
// The decoder mean is a residual over the observed view vector.
class CvaeModel {
public:
    CvaeModel(Domain d, int hidden, int latent, double sigma_floor, std::uint64_t seed);

    static CvaeModel train(const std::vector<TrainingPair>& data, const CvaeConfig& cfg,
                           std::vector<CvaeEpoch>* curve = nullptr);

    const StateCodec& codec() const { return codec_; }
    int hidden() const { return hidden_; }
    int latent() const { return latent_; }
    std::size_t parameter_count() const { return params_.size(); }
    std::vector<double>& params() { return params_; }
    const std::vector<double>& params() const { return params_; }

    CvaeBatch make_batch(const std::vector<TrainingPair>& data, const std::vector<std::size_t>& rows) const;
    CvaeBatch make_batch(const std::vector<TrainingPair>& data) const;

    // Mean ELBO per pair for fixed noise eps (latent x n); fills the gradient
    // with respect to params() when `grad` is non-null and the mean KL term
    // when `kl` is.
    double elbo(const CvaeBatch& b, const std::vector<double>& eps, std::vector<double>* grad = nullptr,
                double* kl = nullptr) const;
    // Mean ELBO with noise drawn from `seed`.
    double elbo(const CvaeBatch& b, std::uint64_t seed) const;

    // Decoder mean at the encoder mean, rounded; no projection.
    AbstractWorld reconstruct(const TrainingPair& p) const;

    // m decoded prior draws, each projected onto the observation.
    SampledWorldSet sample(const PartialAbstractState& o, int m, std::uint64_t seed) const;

    void save(std::ostream& out) const;
    static CvaeModel load(std::istream& in);
    void save(const std::string& path) const;
    static CvaeModel load(const std::string& path);

private:
    std::vector<double> decode_mean(const std::vector<double>& z, const std::vector<double>& o) const;

    StateCodec codec_;
    int hidden_;
    int latent_;
    double sigma_floor_;
    std::vector<double> params_;
};

void write_training_curve(std::ostream& out, const std::vector<CvaeEpoch>& curve);

}  // namespace mpps
