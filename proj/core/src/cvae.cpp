#include "mpps/cvae.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <istream>
#include <numeric>
#include <ostream>
#include <sstream>

#include <Eigen/Dense>

namespace mpps {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using MapM = Eigen::Map<Mat>;
using CMapM = Eigen::Map<const Mat>;

// ---------------------------------------------------------------- codec

StateCodec::StateCodec(Domain d, int max_zones, int cap) : domain_(d), max_zones_(max_zones), cap_(cap) {}

int StateCodec::state_dim() const {
    const int Z = max_zones_;
    if (domain_ == Domain::Craft) return 2 + Z * (Z - 1) / 2 + Z * kNumResources + Z * kNumWorkshops + kNumObjects;
    return kNumColors * kNumColors + 2 * kNumColors;
}

int StateCodec::obs_dim() const {
    if (domain_ == Domain::Craft) return state_dim() + max_zones_ + 2;
    return state_dim() + 3;
}

void StateCodec::put_craft(const AbstractState& s, double* out) const {
    const int Z = max_zones_;
    const int n = std::min(s.zones, Z);
    int k = 0;
    out[k++] = n - 1;
    out[k++] = std::min(s.z, Z - 1);
    for (int i = 0; i < Z; ++i) {
        for (int j = i + 1; j < Z; ++j) {
            const Boundary b = (i < n && j < n) ? s.boundary(i, j) : Boundary::NotAdjacent;
            out[k++] = static_cast<int>(b);
        }
    }
    for (int i = 0; i < Z; ++i) {
        for (int r = 0; r < kNumResources; ++r) out[k++] = i < n ? std::min(s.rho[i][r], cap_) : 0;
    }
    for (int i = 0; i < Z; ++i) {
        for (int w = 0; w < kNumWorkshops; ++w) out[k++] = i < n ? (s.omega[i] >> w & 1u) : 0.0;
    }
    for (int o = 0; o < kNumObjects; ++o) out[k++] = std::min(s.iota[o], cap_);
}

void StateCodec::put_box(const BoxAbstractState& s, double* out) const {
    int k = 0;
    for (int a = 0; a < kNumColors; ++a) {
        for (int c = 0; c < kNumColors; ++c) out[k++] = std::min(s.boxes[a][c], cap_);
    }
    for (int c = 0; c < kNumColors; ++c) out[k++] = s.loose >> c & 1u;
    for (int c = 0; c < kNumColors; ++c) out[k++] = s.held >> c & 1u;
}

std::vector<double> StateCodec::encode_state(const AbstractWorld& s) const {
    if (domain_of(s) != domain_) throw Error("domain-mismatch", "state and codec domains differ");
    std::vector<double> out(state_dim());
    if (domain_ == Domain::Craft) put_craft(std::get<AbstractState>(s), out.data());
    else put_box(std::get<BoxAbstractState>(s), out.data());
    return out;
}

std::vector<double> StateCodec::encode_obs(const PartialAbstractState& o) const {
    if (o.domain != domain_) throw Error("domain-mismatch", "observation and codec domains differ");
    std::vector<double> out(obs_dim(), 0.0);
    const double cells = static_cast<double>(o.obs.rows * o.obs.cols);
    int k = state_dim();
    if (domain_ == Domain::Craft) {
        put_craft(o.craft(), out.data());
        for (int i = 0; i < max_zones_; ++i) {
            out[k++] = i < static_cast<int>(o.zone_complete.size()) ? o.zone_complete[i] : 0.0;
        }
    } else {
        put_box(o.box(), out.data());
        bool taken = false;
        for (std::size_t i = 0; i < o.obs.first_seen.size(); ++i) {
            if (o.obs.first_seen[i].kind == CellKind::LooseKey && o.obs.known[i].kind != CellKind::LooseKey) taken = true;
        }
        out[k++] = taken;
    }
    out[k++] = o.all_seen;
    out[k++] = o.unseen_cells / cells;
    return out;
}

AbstractWorld StateCodec::decode_state(const std::vector<double>& x) const {
    auto count = [&](double v, int hi) { return std::clamp(static_cast<int>(std::lround(v)), 0, hi); };
    if (domain_ == Domain::Craft) {
        const int Z = max_zones_;
        int k = 0;
        const int zones = count(x[k++], Z - 1) + 1;
        AbstractState s = AbstractState::with_zones(zones);
        s.z = count(x[k++], zones - 1);
        for (int i = 0; i < Z; ++i) {
            for (int j = i + 1; j < Z; ++j) {
                const int code = count(x[k++], 3);
                if (i < zones && j < zones) s.set_boundary(i, j, static_cast<Boundary>(code));
            }
        }
        for (int i = 0; i < Z; ++i) {
            for (int r = 0; r < kNumResources; ++r) {
                const int v = count(x[k++], cap_);
                if (i < zones) s.rho[i][r] = v;
            }
        }
        for (int i = 0; i < Z; ++i) {
            for (int w = 0; w < kNumWorkshops; ++w) {
                const bool on = x[k++] > 0.5;
                if (i < zones && on) s.omega[i] |= static_cast<std::uint8_t>(1u << w);
            }
        }
        for (int o = 0; o < kNumObjects; ++o) s.iota[o] = count(x[k++], cap_);
        return s;
    }
    BoxAbstractState s;
    int k = 0;
    for (int a = 0; a < kNumColors; ++a) {
        for (int c = 0; c < kNumColors; ++c) {
            const int v = count(x[k++], cap_);
            s.boxes[a][c] = a == c ? 0 : v;
        }
    }
    auto one_hot = [&](int base) -> std::uint16_t {
        int best = -1;
        for (int c = 0; c < kNumColors; ++c) {
            if (x[base + c] > 0.5 && (best < 0 || x[base + c] > x[base + best])) best = c;
        }
        return best < 0 ? 0 : static_cast<std::uint16_t>(1u << best);
    };
    s.loose = one_hot(k);
    s.held = one_hot(k + kNumColors);
    return s;
}

// ---------------------------------------------------------------- model

namespace {

struct ParamLayout {
    int S, O, H, L;
    // Offsets of W1 b1 Wm bm Ws bs W2 b2 Wmu bmu Wsg bsg.
    std::array<std::size_t, 13> off{};
    ParamLayout(int s, int o, int h, int l) : S(s), O(o), H(h), L(l) {
        const std::size_t sizes[12] = {
            static_cast<std::size_t>(H) * (S + O), static_cast<std::size_t>(H),
            static_cast<std::size_t>(L) * H,       static_cast<std::size_t>(L),
            static_cast<std::size_t>(L) * H,       static_cast<std::size_t>(L),
            static_cast<std::size_t>(H) * (L + O), static_cast<std::size_t>(H),
            static_cast<std::size_t>(S) * H,       static_cast<std::size_t>(S),
            static_cast<std::size_t>(S) * H,       static_cast<std::size_t>(S)};
        for (int i = 0; i < 12; ++i) off[i + 1] = off[i] + sizes[i];
    }
    std::size_t total() const { return off[12]; }
};

template <class P>
struct Views {
    using M = std::conditional_t<std::is_const_v<P>, CMapM, MapM>;
    using V = std::conditional_t<std::is_const_v<P>, Eigen::Map<const Vec>, Eigen::Map<Vec>>;
    M W1, Wm, Ws, W2, Wmu, Wsg;
    V b1, bm, bs, b2, bmu, bsg;
    Views(P* p, const ParamLayout& l)
        : W1(p + l.off[0], l.H, l.S + l.O), Wm(p + l.off[2], l.L, l.H), Ws(p + l.off[4], l.L, l.H),
          W2(p + l.off[6], l.H, l.L + l.O), Wmu(p + l.off[8], l.S, l.H), Wsg(p + l.off[10], l.S, l.H),
          b1(p + l.off[1], l.H), bm(p + l.off[3], l.L), bs(p + l.off[5], l.L), b2(p + l.off[7], l.H),
          bmu(p + l.off[9], l.S), bsg(p + l.off[11], l.S) {}
};

constexpr double kHalfLog2Pi = 0.91893853320467274178;

}  // namespace

CvaeModel::CvaeModel(Domain d, int hidden, int latent, double sigma_floor, std::uint64_t seed)
    : codec_(d), hidden_(hidden > 0 ? hidden : (d == Domain::Craft ? 200 : 300)), latent_(latent),
      sigma_floor_(sigma_floor) {
    if (latent_ < 1) throw Error("invalid-config", "latent dimension must be positive");
    if (!(sigma_floor_ > 0.0)) throw Error("invalid-config", "sigma floor must be positive");
    const ParamLayout l(codec_.state_dim(), codec_.obs_dim(), hidden_, latent_);
    params_.assign(l.total(), 0.0);
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    auto init = [&](std::size_t at, std::size_t count, int fan_in) {
        const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        for (std::size_t i = 0; i < count; ++i) params_[at + i] = normal(rng) * scale;
    };
    init(l.off[0], l.off[1] - l.off[0], l.S + l.O);
    init(l.off[2], l.off[3] - l.off[2], l.H);
    init(l.off[4], l.off[5] - l.off[4], l.H);
    init(l.off[6], l.off[7] - l.off[6], l.L + l.O);
    init(l.off[8], l.off[9] - l.off[8], l.H);
    init(l.off[10], l.off[11] - l.off[10], l.H);
}

CvaeBatch CvaeModel::make_batch(const std::vector<TrainingPair>& data, const std::vector<std::size_t>& rows) const {
    CvaeBatch b;
    b.n = static_cast<int>(rows.size());
    const int S = codec_.state_dim(), O = codec_.obs_dim();
    b.s.resize(static_cast<std::size_t>(S) * b.n);
    b.o.resize(static_cast<std::size_t>(O) * b.n);
    for (int c = 0; c < b.n; ++c) {
        const auto s = codec_.encode_state(data[rows[c]].s);
        const auto o = codec_.encode_obs(data[rows[c]].o);
        std::copy(s.begin(), s.end(), b.s.begin() + static_cast<std::ptrdiff_t>(c) * S);
        std::copy(o.begin(), o.end(), b.o.begin() + static_cast<std::ptrdiff_t>(c) * O);
    }
    return b;
}

CvaeBatch CvaeModel::make_batch(const std::vector<TrainingPair>& data) const {
    std::vector<std::size_t> rows(data.size());
    std::iota(rows.begin(), rows.end(), 0);
    return make_batch(data, rows);
}

double CvaeModel::elbo(const CvaeBatch& b, const std::vector<double>& eps, std::vector<double>* grad,
                       double* kl_out) const {
    const ParamLayout l(codec_.state_dim(), codec_.obs_dim(), hidden_, latent_);
    const Views<const double> P(params_.data(), l);
    const int n = b.n;
    const CMapM Xs(b.s.data(), l.S, n), Xo(b.o.data(), l.O, n), E(eps.data(), l.L, n);

    Mat X1(l.S + l.O, n);
    X1 << Xs, Xo;
    const Mat H1 = ((P.W1 * X1).colwise() + P.b1).array().tanh().matrix();
    const Mat MUe = (P.Wm * H1).colwise() + P.bm;
    const Mat LSe = (P.Ws * H1).colwise() + P.bs;
    const Mat SIGe = LSe.array().exp().matrix();
    const Mat Z = MUe + SIGe.cwiseProduct(E);
    Mat X2(l.L + l.O, n);
    X2 << Z, Xo;
    const Mat H2 = ((P.W2 * X2).colwise() + P.b2).array().tanh().matrix();
    const Mat MU = ((P.Wmu * H2).colwise() + P.bmu) + Xo.topRows(l.S);
    const Mat LS = (P.Wsg * H2).colwise() + P.bsg;
    const Mat EXP = LS.array().exp().matrix();
    const Mat SIG = (EXP.array() + sigma_floor_).matrix();
    const Mat R = (Xs - MU).cwiseQuotient(SIG);

    const double loglik = -kHalfLog2Pi * l.S * n - SIG.array().log().sum() - 0.5 * R.squaredNorm();
    const double kl = 0.5 * (MUe.squaredNorm() + SIGe.squaredNorm() - static_cast<double>(l.L) * n) - LSe.sum();
    const double value = (loglik - kl) / n;
    if (kl_out) *kl_out = kl / n;
    if (!grad) return value;

    grad->assign(params_.size(), 0.0);
    Views<double> G(grad->data(), l);
    const double inv = 1.0 / n;
    const Mat dMU = R.cwiseQuotient(SIG) * inv;
    const Mat dLS = ((R.array().square() - 1.0) / SIG.array() * EXP.array()).matrix() * inv;
    G.Wmu = dMU * H2.transpose();
    G.bmu = dMU.rowwise().sum();
    G.Wsg = dLS * H2.transpose();
    G.bsg = dLS.rowwise().sum();
    const Mat dA2 = ((P.Wmu.transpose() * dMU + P.Wsg.transpose() * dLS).array() * (1.0 - H2.array().square())).matrix();
    G.W2 = dA2 * X2.transpose();
    G.b2 = dA2.rowwise().sum();
    const Mat dZ = (P.W2.transpose() * dA2).topRows(l.L);
    const Mat dMUe = dZ - MUe * inv;
    const Mat dLSe = (dZ.array() * E.array() * SIGe.array() - (SIGe.array().square() - 1.0) * inv).matrix();
    G.Wm = dMUe * H1.transpose();
    G.bm = dMUe.rowwise().sum();
    G.Ws = dLSe * H1.transpose();
    G.bs = dLSe.rowwise().sum();
    const Mat dA1 = ((P.Wm.transpose() * dMUe + P.Ws.transpose() * dLSe).array() * (1.0 - H1.array().square())).matrix();
    G.W1 = dA1 * X1.transpose();
    G.b1 = dA1.rowwise().sum();
    return value;
}

double CvaeModel::elbo(const CvaeBatch& b, std::uint64_t seed) const {
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> eps(static_cast<std::size_t>(latent_) * b.n);
    for (auto& e : eps) e = normal(rng);
    return elbo(b, eps);
}

CvaeModel CvaeModel::train(const std::vector<TrainingPair>& data, const CvaeConfig& cfg,
                           std::vector<CvaeEpoch>* curve) {
    if (data.empty()) throw Error("invalid-config", "empty training set");
    const Domain d = domain_of(data.front().s);
    CvaeModel model(d, cfg.hidden, cfg.latent, cfg.sigma_floor, cfg.seed);
    Rng rng(cfg.seed ^ 0x9e3779b97f4a7c15ull);
    std::vector<std::size_t> order(data.size());
    std::iota(order.begin(), order.end(), 0);
    std::shuffle(order.begin(), order.end(), rng);
    std::size_t n_held = static_cast<std::size_t>(cfg.heldout_fraction * static_cast<double>(data.size()));
    if (data.size() > 1) n_held = std::clamp<std::size_t>(n_held, 1, data.size() - 1);
    else n_held = 0;
    const std::vector<std::size_t> held(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_held));
    std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_held), order.end());
    const CvaeBatch held_batch = model.make_batch(data, held.empty() ? train : held);
    const std::uint64_t held_seed = cfg.seed + 17;

    if (curve) {
        curve->clear();
        curve->push_back({0, model.elbo(model.make_batch(data, train), held_seed), model.elbo(held_batch, held_seed)});
    }
    std::vector<double> velocity(model.params_.size(), 0.0), grad, eps;
    std::normal_distribution<double> normal(0.0, 1.0);
    for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
        std::shuffle(train.begin(), train.end(), rng);
        double sum = 0.0, kl_sum = 0.0;
        int batches = 0;
        for (std::size_t at = 0; at < train.size(); at += static_cast<std::size_t>(cfg.batch)) {
            const std::size_t end = std::min(train.size(), at + static_cast<std::size_t>(cfg.batch));
            const std::vector<std::size_t> rows(train.begin() + static_cast<std::ptrdiff_t>(at),
                                                train.begin() + static_cast<std::ptrdiff_t>(end));
            const CvaeBatch b = model.make_batch(data, rows);
            eps.resize(static_cast<std::size_t>(model.latent_) * b.n);
            for (auto& e : eps) e = normal(rng);
            double kl = 0.0;
            const double value = model.elbo(b, eps, &grad, &kl);
            kl_sum += kl;
            double norm = 0.0;
            for (double g : grad) norm += g * g;
            norm = std::sqrt(norm);
            if (!std::isfinite(value) || !std::isfinite(norm)) {
                std::ostringstream msg;
                msg << "non-finite ELBO at epoch " << epoch << " batch " << batches << " (elbo " << value
                    << ", grad norm " << norm << ")";
                throw Error("divergence", msg.str());
            }
            const double scale = norm > cfg.clip ? cfg.clip / norm : 1.0;
            for (std::size_t i = 0; i < grad.size(); ++i) {
                velocity[i] = cfg.momentum * velocity[i] + scale * grad[i];
                model.params_[i] += cfg.lr * velocity[i];
            }
            sum += value;
            ++batches;
        }
        if (curve) {
            const double nb = std::max(batches, 1);
            curve->push_back({epoch, sum / nb, model.elbo(held_batch, held_seed), kl_sum / nb});
        }
    }
    return model;
}

std::vector<double> CvaeModel::decode_mean(const std::vector<double>& z, const std::vector<double>& o) const {
    const ParamLayout l(codec_.state_dim(), codec_.obs_dim(), hidden_, latent_);
    const Views<const double> P(params_.data(), l);
    Vec x(l.L + l.O);
    for (int i = 0; i < l.L; ++i) x[i] = z[i];
    for (int i = 0; i < l.O; ++i) x[l.L + i] = o[i];
    const Vec h = (P.W2 * x + P.b2).array().tanh().matrix();
    const Vec mu = P.Wmu * h + P.bmu + x.segment(l.L, l.S);
    return {mu.data(), mu.data() + mu.size()};
}

AbstractWorld CvaeModel::reconstruct(const TrainingPair& p) const {
    const ParamLayout l(codec_.state_dim(), codec_.obs_dim(), hidden_, latent_);
    const Views<const double> P(params_.data(), l);
    const auto s = codec_.encode_state(p.s);
    const auto o = codec_.encode_obs(p.o);
    Vec x(l.S + l.O);
    for (int i = 0; i < l.S; ++i) x[i] = s[i];
    for (int i = 0; i < l.O; ++i) x[l.S + i] = o[i];
    const Vec h = (P.W1 * x + P.b1).array().tanh().matrix();
    const Vec mu = P.Wm * h + P.bm;
    return codec_.decode_state(decode_mean({mu.data(), mu.data() + mu.size()}, o));
}

SampledWorldSet CvaeModel::sample(const PartialAbstractState& o, int m, std::uint64_t seed) const {
    if (m < 1) throw Error("invalid-config", "m must be >= 1");
    Rng rng(seed);
    std::normal_distribution<double> normal(0.0, 1.0);
    const auto feats = codec_.encode_obs(o);
    SampledWorldSet out;
    out.backend = "cvae";
    out.obs_digest = digest(o.obs);
    std::vector<double> z(static_cast<std::size_t>(latent_));
    for (int j = 0; j < m; ++j) {
        for (auto& v : z) v = normal(rng);
        AbstractWorld s = overwrite_known(o, codec_.decode_state(decode_mean(z, feats)));
        std::visit([](const auto& st) { st.validate(); }, s);
        out.worlds.push_back(std::move(s));
    }
    return out;
}

void CvaeModel::save(std::ostream& out) const {
    out << "mpps-cvae 1\n";
    out << "domain " << name_of(codec_.domain()) << "\n";
    out << "shape " << codec_.state_dim() << " " << codec_.obs_dim() << " " << hidden_ << " " << latent_ << "\n";
    out << "sigma_floor " << std::setprecision(17) << sigma_floor_ << "\n";
    out << "params " << params_.size() << "\n";
    for (std::size_t i = 0; i < params_.size(); ++i) out << params_[i] << ((i + 1) % 8 == 0 ? '\n' : ' ');
    out << "\n";
}

CvaeModel CvaeModel::load(std::istream& in) {
    std::string tag, key, dom;
    int version = 0;
    if (!(in >> tag >> version) || tag != "mpps-cvae" || version != 1) {
        throw Error("parse-error", "not an mpps-cvae version 1 checkpoint");
    }
    int S = 0, O = 0, H = 0, L = 0;
    double floor = 0.0;
    std::size_t count = 0;
    in >> key >> dom;
    if (key != "domain") throw Error("parse-error", "expected domain");
    in >> key >> S >> O >> H >> L;
    if (key != "shape") throw Error("parse-error", "expected shape");
    in >> key >> floor;
    if (key != "sigma_floor") throw Error("parse-error", "expected sigma_floor");
    in >> key >> count;
    if (key != "params") throw Error("parse-error", "expected params");
    const auto d = parse_domain(dom);
    if (!d) throw Error("parse-error", "unknown domain " + dom);
    CvaeModel m(*d, H, L, floor, 0);
    if (m.codec_.state_dim() != S || m.codec_.obs_dim() != O || m.params_.size() != count) {
        throw Error("parse-error", "checkpoint shape does not match this build");
    }
    for (auto& p : m.params_) {
        if (!(in >> p)) throw Error("parse-error", "truncated parameter list");
    }
    return m;
}

void CvaeModel::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw Error("io-error", "cannot write " + path);
    save(f);
}

CvaeModel CvaeModel::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("io-error", "cannot read " + path);
    return load(f);
}

void write_training_curve(std::ostream& out, const std::vector<CvaeEpoch>& curve) {
    out << "epoch,elbo_train,elbo_heldout,kl_train\n";
    out << std::setprecision(10);
    for (const auto& e : curve) {
        out << e.epoch << "," << e.elbo_train << "," << e.elbo_heldout << "," << e.kl_train << "\n";
    }
}

}  // namespace mpps
