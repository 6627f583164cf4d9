#include "mpps/policy.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <fstream>
#include <iomanip>
#include <istream>
#include <ostream>

#include <Eigen/Dense>

namespace mpps {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;
using MapM = Eigen::Map<Mat>;
using CMapM = Eigen::Map<const Mat>;
using MapV = Eigen::Map<Vec>;
using CMapV = Eigen::Map<const Vec>;

// ---------------------------------------------------------------- features

namespace {

constexpr int kCraftChannels = 12;  // unknown, empty, water, stone, 5 resources, 3 workshops
constexpr int kBoxChannels = 4 + 4 * kNumColors;  // unknown, empty, agent, hidden box, per-colour kinds

int craft_channel(const Cell& c) {
    switch (c.kind) {
        case CellKind::Empty: return 1;
        case CellKind::Water: return 2;
        case CellKind::Stone: return 3;
        case CellKind::Resource: return 4 + c.a;
        case CellKind::Workshop: return 4 + kNumResources + c.a;
        default: return 0;
    }
}

int box_channel(const Cell& c) {
    switch (c.kind) {
        case CellKind::Empty: return 1;
        case CellKind::LooseKey: return 4 + c.a;
        case CellKind::Lock: return 4 + kNumColors + c.a;
        case CellKind::BoxKey: return c.a == kHiddenColor ? 3 : 4 + 2 * kNumColors + c.a;
        case CellKind::OpenKey: return 4 + 3 * kNumColors + c.a;
        default: return 0;
    }
}

}  // namespace

PolicyFeaturizer::PolicyFeaturizer(Domain d, int rows, int cols, int crop_radius)
    : domain_(d), rows_(rows), cols_(cols), radius_(crop_radius) {
    if (rows < 1 || cols < 1) throw Error("invalid-config", "empty grid");
    if (d == Domain::Craft && crop_radius < 1) throw Error("invalid-config", "crop radius must be positive");
}

int PolicyFeaturizer::grid_channels() const { return domain_ == Domain::Craft ? kCraftChannels : kBoxChannels; }
int PolicyFeaturizer::grid_rows() const { return domain_ == Domain::Craft ? 2 * radius_ + 1 : rows_; }
int PolicyFeaturizer::grid_cols() const { return domain_ == Domain::Craft ? 2 * radius_ + 1 : cols_; }
int PolicyFeaturizer::extra_dim() const { return domain_ == Domain::Craft ? kNumObjects + 4 : kNumColors; }

std::vector<double> PolicyFeaturizer::features(const Observation& o) const {
    if (o.domain != domain_ || o.rows != rows_ || o.cols != cols_) {
        throw Error("domain-mismatch", "observation does not match the featurizer");
    }
    const int R = grid_rows(), C = grid_cols(), plane = R * C;
    std::vector<double> x(dim(), 0.0);
    if (domain_ == Domain::Craft) {
        for (int dr = -radius_; dr <= radius_; ++dr) {
            for (int dc = -radius_; dc <= radius_; ++dc) {
                const Pos p{o.agent.row + dr, o.agent.col + dc};
                const int ch = o.in_bounds(p) ? craft_channel(o.at(p)) : 0;
                x[ch * plane + (dr + radius_) * C + (dc + radius_)] = 1.0;
            }
        }
        double* extra = x.data() + kCraftChannels * plane;
        for (int i = 0; i < kNumObjects; ++i) extra[i] = std::min(o.inventory[i], kCountCap) / double(kCountCap);
        extra[kNumObjects + static_cast<int>(o.facing)] = 1.0;
    } else {
        for (int i = 0; i < plane; ++i) x[box_channel(o.known[i]) * plane + i] = 1.0;
        x[2 * plane + o.index(o.agent)] = 1.0;
        if (o.held_key >= 0) x[kBoxChannels * plane + o.held_key] = 1.0;
    }
    return x;
}

// ---------------------------------------------------------------- network

namespace {

struct ActorLayout {
    int C, R, W, E, K, H, A;
    std::size_t conv_w, conv_b, w1, b1, w2, b2, total;
    ActorLayout(const PolicyFeaturizer& f, const ModuleShape& s)
        : C(f.grid_channels()), R(f.grid_rows()), W(f.grid_cols()), E(f.extra_dim()), K(s.conv_kernels),
          H(s.hidden), A(f.actions()) {
        conv_w = 0;
        conv_b = conv_w + static_cast<std::size_t>(K) * C * 9;
        w1 = conv_b + K;
        b1 = w1 + static_cast<std::size_t>(H) * in1();
        w2 = b1 + H;
        b2 = w2 + static_cast<std::size_t>(A) * H;
        total = b2 + A;
    }
    int grid_in() const { return (K > 0 ? K : C) * R * W; }
    int in1() const { return grid_in() + E; }
};

struct CriticLayout {
    int D, H;
    std::size_t w1, b1, w2, b2, total;
    CriticLayout(const PolicyFeaturizer& f, const ModuleShape& s) : D(f.dim()), H(s.critic_hidden) {
        w1 = 0;
        b1 = static_cast<std::size_t>(H) * D;
        w2 = b1 + H;
        b2 = w2 + H;
        total = b2 + 1;
    }
};

// 3x3 patches with zero padding: (C*9) x (R*W).
Mat im2col(const double* x, int C, int R, int W) {
    Mat cols = Mat::Zero(C * 9, R * W);
    for (int c = 0; c < C; ++c) {
        for (int dr = 0; dr < 3; ++dr) {
            for (int dc = 0; dc < 3; ++dc) {
                const int row = c * 9 + dr * 3 + dc;
                for (int r = 0; r < R; ++r) {
                    const int rr = r + dr - 1;
                    if (rr < 0 || rr >= R) continue;
                    for (int q = 0; q < W; ++q) {
                        const int qq = q + dc - 1;
                        if (qq < 0 || qq >= W) continue;
                        cols(row, r * W + q) = x[c * R * W + rr * W + qq];
                    }
                }
            }
        }
    }
    return cols;
}

void fill_normal(std::vector<double>& p, std::size_t from, std::size_t to, double sd, Rng& rng) {
    std::normal_distribution<double> n(0.0, sd);
    for (std::size_t i = from; i < to; ++i) p[i] = n(rng);
}

// W x + b over the nonzero entries of x, which are appended to nz.
Vec sparse_affine(const CMapM& W, const double* x, const double* b, std::vector<int>& nz) {
    Vec out = CMapV(b, W.rows());
    for (int j = 0; j < W.cols(); ++j) {
        if (x[j] == 0.0) continue;
        nz.push_back(j);
        out.noalias() += x[j] * W.col(j);
    }
    return out;
}

}  // namespace

struct ModuleNet::Cache {
    Mat cols;    // conv patches
    Mat conv;    // K x RW, post-ReLU
    Vec in;      // hidden-layer input
    std::vector<int> nz;  // its nonzero entries
    Vec h;       // tanh hidden
    Vec pi;
};

ModuleNet::ModuleNet(const PolicyFeaturizer& f, ModuleShape shape, std::uint64_t seed) : f_(f), shape_(shape) {
    if (shape.hidden < 1 || shape.critic_hidden < 1 || shape.conv_kernels < 0) {
        throw Error("invalid-config", "network widths must be positive");
    }
    const ActorLayout a(f_, shape_);
    const CriticLayout c(f_, shape_);
    actor_.assign(a.total, 0.0);
    critic_.assign(c.total, 0.0);
    Rng rng(seed);
    if (a.K > 0) fill_normal(actor_, a.conv_w, a.conv_b, std::sqrt(2.0 / (a.C * 9)), rng);
    fill_normal(actor_, a.w1, a.b1, 1.0 / std::sqrt(double(a.in1())), rng);
    fill_normal(actor_, a.w2, a.b2, 0.01, rng);
    fill_normal(critic_, c.w1, c.b1, 1.0 / std::sqrt(double(c.D)), rng);
    fill_normal(critic_, c.w2, c.b2, 0.01, rng);
}

void ModuleNet::actor_forward(const std::vector<double>& x, Cache& k) const {
    const ActorLayout l(f_, shape_);
    const double* p = actor_.data();
    const int plane = l.R * l.W;
    k.in.resize(l.in1());
    if (l.K > 0) {
        k.cols = im2col(x.data(), l.C, l.R, l.W);
        const CMapM wc(p + l.conv_w, l.K, l.C * 9);
        k.conv = (wc * k.cols).colwise() + CMapV(p + l.conv_b, l.K);
        k.conv = k.conv.cwiseMax(0.0);
        // Row-major over kernels to match the channel-major layout.
        for (int kk = 0; kk < l.K; ++kk) k.in.segment(kk * plane, plane) = k.conv.row(kk).transpose();
    } else {
        k.in.head(l.grid_in()) = CMapV(x.data(), l.grid_in());
    }
    k.in.tail(l.E) = CMapV(x.data() + static_cast<std::size_t>(l.C) * plane, l.E);
    k.nz.clear();
    k.h = sparse_affine(CMapM(p + l.w1, l.H, l.in1()), k.in.data(), p + l.b1, k.nz).array().tanh();
    Vec logits = CMapM(p + l.w2, l.A, l.H) * k.h + CMapV(p + l.b2, l.A);
    logits.array() -= logits.maxCoeff();
    k.pi = logits.array().exp();
    k.pi /= k.pi.sum();
}

std::vector<double> ModuleNet::policy(const std::vector<double>& x) const {
    Cache k;
    actor_forward(x, k);
    return {k.pi.data(), k.pi.data() + k.pi.size()};
}

double ModuleNet::value(const std::vector<double>& x) const {
    const CriticLayout l(f_, shape_);
    const double* p = critic_.data();
    std::vector<int> nz;
    const Vec h = sparse_affine(CMapM(p + l.w1, l.H, l.D), x.data(), p + l.b1, nz).array().tanh();
    return CMapV(p + l.w2, l.H).dot(h) + p[l.b2];
}

double ModuleNet::actor_loss(const std::vector<std::vector<double>>& xs, const std::vector<int>& actions,
                             const std::vector<double>& advantages, double entropy_beta,
                             std::vector<double>* grad) const {
    const ActorLayout l(f_, shape_);
    const double* p = actor_.data();
    const int plane = l.R * l.W;
    const double scale = 1.0 / static_cast<double>(xs.size());
    if (grad) grad->resize(actor_.size(), 0.0);
    double loss = 0.0;
    Cache k;
    for (std::size_t n = 0; n < xs.size(); ++n) {
        actor_forward(xs[n], k);
        const Vec logp = k.pi.array().max(1e-300).log();
        const double H = -k.pi.dot(logp);
        loss += scale * (-advantages[n] * logp[actions[n]] - entropy_beta * H);
        if (!grad) continue;
        // d/dlogits of -A log pi_a - beta H
        Vec dz = advantages[n] * k.pi;
        dz[actions[n]] -= advantages[n];
        dz.array() += entropy_beta * k.pi.array() * (logp.array() + H);
        dz *= scale;
        double* g = grad->data();
        MapM(g + l.w2, l.A, l.H).noalias() += dz * k.h.transpose();
        MapV(g + l.b2, l.A) += dz;
        const Vec dh = (CMapM(p + l.w2, l.A, l.H).transpose() * dz).array() * (1.0 - k.h.array().square());
        MapM gw1(g + l.w1, l.H, l.in1());
        for (int j : k.nz) gw1.col(j).noalias() += k.in[j] * dh;
        MapV(g + l.b1, l.H) += dh;
        if (l.K > 0) {
            const Vec din = CMapM(p + l.w1, l.H, l.in1()).leftCols(l.grid_in()).transpose() * dh;
            Mat dconv(l.K, plane);
            for (int kk = 0; kk < l.K; ++kk) dconv.row(kk) = din.segment(kk * plane, plane).transpose();
            dconv = dconv.cwiseProduct((k.conv.array() > 0.0).cast<double>().matrix());
            MapM(g + l.conv_w, l.K, l.C * 9).noalias() += dconv * k.cols.transpose();
            MapV(g + l.conv_b, l.K) += dconv.rowwise().sum();
        }
    }
    return loss;
}

double ModuleNet::critic_loss(const std::vector<std::vector<double>>& xs, const std::vector<double>& targets,
                              std::vector<double>* grad) const {
    const CriticLayout l(f_, shape_);
    const double* p = critic_.data();
    const double scale = 1.0 / static_cast<double>(xs.size());
    if (grad) grad->resize(critic_.size(), 0.0);
    double loss = 0.0;
    for (std::size_t n = 0; n < xs.size(); ++n) {
        const double* x = xs[n].data();
        std::vector<int> nz;
        const Vec h = sparse_affine(CMapM(p + l.w1, l.H, l.D), x, p + l.b1, nz).array().tanh();
        const double err = CMapV(p + l.w2, l.H).dot(h) + p[l.b2] - targets[n];
        loss += scale * 0.5 * err * err;
        if (!grad) continue;
        double* g = grad->data();
        const double d = scale * err;
        MapV(g + l.w2, l.H) += d * h;
        g[l.b2] += d;
        const Vec dh = d * CMapV(p + l.w2, l.H).array() * (1.0 - h.array().square());
        MapM gw1(g + l.w1, l.H, l.D);
        for (int j : nz) gw1.col(j).noalias() += x[j] * dh;
        MapV(g + l.b1, l.H) += dh;
    }
    return loss;
}

void ModuleNet::save(std::ostream& out) const {
    out << std::setprecision(17);
    out << "module " << shape_.hidden << " " << shape_.critic_hidden << " " << shape_.conv_kernels << "\n";
    out << "actor " << actor_.size() << "\n";
    for (std::size_t i = 0; i < actor_.size(); ++i) out << actor_[i] << ((i + 1) % 8 == 0 ? '\n' : ' ');
    out << "\ncritic " << critic_.size() << "\n";
    for (std::size_t i = 0; i < critic_.size(); ++i) out << critic_[i] << ((i + 1) % 8 == 0 ? '\n' : ' ');
    out << "\n";
}

ModuleNet ModuleNet::load(std::istream& in, const PolicyFeaturizer& f) {
    std::string key;
    ModuleShape s;
    if (!(in >> key >> s.hidden >> s.critic_hidden >> s.conv_kernels) || key != "module") {
        throw Error("parse-error", "expected module");
    }
    ModuleNet m(f, s, 0);
    for (auto* v : {&m.actor_, &m.critic_}) {
        std::size_t n = 0;
        if (!(in >> key >> n) || (key != "actor" && key != "critic") || n != v->size()) {
            throw Error("parse-error", "checkpoint shape does not match this build");
        }
        for (auto& x : *v) {
            if (!(in >> x)) throw Error("parse-error", "truncated parameter list");
        }
    }
    return m;
}

// ---------------------------------------------------------------- options

LearnedOptions::LearnedOptions(Domain d, int rows, int cols, const TrainingConfig& cfg)
    : f_(d, rows, cols, cfg.crop_radius), rng_(cfg.seed ^ 0x5bd1e995ull) {
    cfg.validate();
    ModuleShape shape = cfg.shape;
    std::uint64_t s = cfg.seed;
    for (std::size_t i = 0; i < roster(d).size(); ++i) nets_.emplace_back(f_, shape, s++ * 7919 + 17);
}

LearnedOptions::LearnedOptions(PolicyFeaturizer f, std::vector<ModuleNet> nets) : f_(f), nets_(std::move(nets)) {}

int LearnedOptions::slot(const Prototype& p) const {
    const auto& r = roster(f_.domain());
    const auto it = std::find(r.begin(), r.end(), p);
    if (it == r.end()) throw Error("domain-mismatch", "prototype " + p.name() + " is not in the roster");
    return static_cast<int>(it - r.begin());
}

ModuleNet& LearnedOptions::module(const Prototype& p) { return nets_[slot(p)]; }
const ModuleNet& LearnedOptions::module(const Prototype& p) const { return nets_[slot(p)]; }

std::optional<Action> LearnedOptions::act(const Prototype& p, const Observation& o) {
    const auto pi = module(p).policy(f_.features(o));
    std::discrete_distribution<int> d(pi.begin(), pi.end());
    return static_cast<Action>(d(rng_));
}

void LearnedOptions::save(std::ostream& out) const {
    out << "mpps-options 1\n";
    out << "domain " << name_of(f_.domain()) << "\n";
    out << "grid " << f_.rows() << " " << f_.cols() << "\n";
    out << "crop " << f_.crop_radius() << "\n";
    out << "modules " << nets_.size() << "\n";
    for (const auto& n : nets_) n.save(out);
}

LearnedOptions LearnedOptions::load(std::istream& in) {
    std::string tag, key, dom;
    int version = 0, rows = 0, cols = 0, crop = 0;
    std::size_t count = 0;
    if (!(in >> tag >> version) || tag != "mpps-options" || version != 1) {
        throw Error("parse-error", "not an mpps-options version 1 checkpoint");
    }
    if (!(in >> key >> dom) || key != "domain") throw Error("parse-error", "expected domain");
    if (!(in >> key >> rows >> cols) || key != "grid") throw Error("parse-error", "expected grid");
    if (!(in >> key >> crop) || key != "crop") throw Error("parse-error", "expected crop");
    if (!(in >> key >> count) || key != "modules") throw Error("parse-error", "expected modules");
    const auto d = parse_domain(dom);
    if (!d) throw Error("parse-error", "unknown domain " + dom);
    if (count != roster(*d).size()) throw Error("parse-error", "module count does not match the roster");
    const PolicyFeaturizer f(*d, rows, cols, crop);
    std::vector<ModuleNet> nets;
    for (std::size_t i = 0; i < count; ++i) nets.push_back(ModuleNet::load(in, f));
    return LearnedOptions(f, std::move(nets));
}

void LearnedOptions::save(const std::string& path) const {
    std::ofstream f(path);
    if (!f) throw Error("io-error", "cannot write " + path);
    save(f);
}

LearnedOptions LearnedOptions::load(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw Error("io-error", "cannot read " + path);
    return load(f);
}

// ---------------------------------------------------------------- tasks

std::vector<TrainingTask> make_training_tasks(const EnvConfig& cfg, int n, std::uint64_t seed, int k_max) {
    if (n < 0) throw Error("invalid-config", "negative task count");
    std::vector<TrainingTask> out;
    Rng rng(seed);
    const long attempts = 50L * n + 100;
    for (long i = 0; i < attempts && static_cast<int>(out.size()) < n; ++i) {
        const std::uint64_t map_seed = seed * 1000003ull + static_cast<std::uint64_t>(i);
        TrainingTask task;
        if (cfg.domain == Domain::Craft) {
            task.world = generate_map(cfg, map_seed);
            task.goal = GoalSpec::get(static_cast<Object>(std::uniform_int_distribution<int>(0, kNumObjects - 1)(rng)));
        } else {
            const BoxMap m = generate_box(cfg, map_seed, std::uniform_int_distribution<int>(1, 4)(rng));
            task.world = m.world;
            task.goal = GoalSpec::key(m.goal_color);
        }
        SynthesisProblem problem;
        problem.goal = task.goal;
        problem.worlds = {abstract_full(task.world)};
        problem.k_max = k_max;
        if (!solvable(problem.worlds[0], problem.goal, k_max, problem.recipes)) continue;
        try {
            task.program = synthesize(problem).program;
        } catch (const Error& e) {
            if (e.code() == "no-program") continue;
            throw;
        }
        const auto ok = certify(task.program, problem);
        if (ok.empty() || !ok[0]) continue;
        out.push_back(std::move(task));
    }
    return out;
}

void TrainingConfig::validate() const {
    auto bad = [](const std::string& what) { throw Error("invalid-config", what); };
    if (episodes < 0) bad("episodes must be non-negative");
    if (tiers.empty()) bad("curriculum needs at least one tier");
    for (std::size_t i = 0; i < tiers.size(); ++i) {
        if (tiers[i] < 1 || (i > 0 && tiers[i] < tiers[i - 1])) bad("tiers must be positive and non-decreasing");
    }
    if (tier_episodes < 1 || success_window < 1 || batch_episodes < 1 || log_every < 1) bad("counts must be positive");
    if (!(discount > 0.0 && discount <= 1.0)) bad("discount must lie in (0, 1]");
    if (entropy < 0.0 || !(actor_lr > 0.0) || !(critic_lr > 0.0)) bad("invalid rates");
    if (horizon < 0) bad("horizon must be non-negative");
    if (crop_radius < 1) bad("crop radius must be positive");
}

// ---------------------------------------------------------------- rollouts

namespace {

struct Trace {
    std::vector<std::vector<double>> xs;
    std::vector<int> slots;
};

Rollout run(const TrainingTask& task, LearnedOptions& options, double reward, int horizon,
            const RecipeTable& recipes, Trace* trace) {
    Rollout r;
    ConcreteWorld w = task.world;
    reset(w);
    const int limit = horizon > 0 ? std::min(w.horizon, w.t + horizon) : w.horizon;
    Observation o = observe(w);
    const Program& program = task.program;
    int tau = 0;
    std::optional<Monitor> mon(std::in_place, program[0], o, recipes);
    const auto& ros = roster(options.featurizer().domain());
    while (true) {
        while ((*mon)(o)) {
            if (!r.steps.empty() && r.steps.back().tau == tau) {
                r.steps.back().reward += reward;
                r.steps.back().beta_fired = true;
            }
            ++r.completed;
            if (++tau == static_cast<int>(program.size())) {
                r.success = true;
                return r;
            }
            mon.emplace(program[tau], o, recipes);
        }
        if (w.t >= limit) break;
        const Prototype& p = program[tau];
        std::vector<double> x = options.featurizer().features(o);
        const auto pi = options.module(p).policy(x);
        std::discrete_distribution<int> d(pi.begin(), pi.end());
        const Action a = static_cast<Action>(d(options.rng()));
        if (trace) {
            trace->xs.push_back(std::move(x));
            trace->slots.push_back(static_cast<int>(std::find(ros.begin(), ros.end(), p) - ros.begin()));
        }
        r.steps.push_back({tau, a, 0.0, false});
        apply(w, a, recipes);
        o = observe(w);
    }
    return r;
}

struct Adam {
    std::vector<double> m, v;
    long t = 0;
    void step(std::vector<double>& p, const std::vector<double>& g, double lr) {
        constexpr double b1 = 0.9, b2 = 0.999, eps = 1e-8;
        if (m.empty()) m.assign(p.size(), 0.0), v.assign(p.size(), 0.0);
        ++t;
        const double c1 = 1.0 - std::pow(b1, double(t)), c2 = 1.0 - std::pow(b2, double(t));
        for (std::size_t i = 0; i < p.size(); ++i) {
            m[i] = b1 * m[i] + (1.0 - b1) * g[i];
            v[i] = b2 * v[i] + (1.0 - b2) * g[i] * g[i];
            p[i] -= lr * (m[i] / c1) / (std::sqrt(v[i] / c2) + eps);
        }
    }
};

struct Batch {
    std::vector<std::vector<double>> xs;
    std::vector<int> actions;
    std::vector<double> returns;
};

}  // namespace

Rollout rollout(const TrainingTask& task, LearnedOptions& options, double reward, int horizon,
                const RecipeTable& recipes) {
    return run(task, options, reward, horizon, recipes, nullptr);
}

double module_success(const std::vector<TrainingTask>& tasks, LearnedOptions& options, int horizon,
                      const RecipeTable& recipes) {
    if (tasks.empty()) return 0.0;
    int ok = 0;
    for (const auto& t : tasks) {
        TrainingTask first{t.world, t.goal, {t.program.front()}};
        ok += run(first, options, 1.0, horizon, recipes, nullptr).completed > 0;
    }
    return static_cast<double>(ok) / static_cast<double>(tasks.size());
}

TrainingResult train_modules(const std::vector<TrainingTask>& tasks, const TrainingConfig& cfg,
                             LearnedOptions& options, const RecipeTable& recipes) {
    cfg.validate();
    if (tasks.empty()) throw Error("invalid-config", "no training tasks");
    const Domain d = options.featurizer().domain();
    const auto& ros = roster(d);
    const int M = static_cast<int>(ros.size());
    Rng rng(cfg.seed);
    options.rng().seed(cfg.seed ^ 0xa5a5a5a5ull);

    auto admitted = [&](int tier) {
        std::vector<int> idx;
        for (int i = 0; i < static_cast<int>(tasks.size()); ++i) {
            if (static_cast<int>(tasks[i].program.size()) <= cfg.tiers[tier]) idx.push_back(i);
        }
        return idx;
    };
    int tier = 0;
    std::vector<int> pool = admitted(0);
    while (pool.empty() && tier + 1 < static_cast<int>(cfg.tiers.size())) pool = admitted(++tier);
    if (pool.empty()) throw Error("invalid-config", "no task fits the curriculum");

    std::vector<Adam> actor_opt(M), critic_opt(M);
    std::vector<Batch> batch(M);
    std::deque<bool> recent;
    std::vector<std::deque<bool>> module_recent(M);
    std::deque<double> rewards;
    int tier_start = 0;
    TrainingResult out;

    for (int ep = 0; ep < cfg.episodes; ++ep) {
        const TrainingTask& task = tasks[pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)]];
        Trace tr;
        const Rollout r = run(task, options, cfg.reward, cfg.horizon, recipes, &tr);

        // Discounted return within each component's segment; r~ lands on the
        // action after which the monitor fired.
        double total = 0.0;
        std::vector<double> G(r.steps.size(), 0.0);
        for (int i = static_cast<int>(r.steps.size()) - 1; i >= 0; --i) {
            const bool same = i + 1 < static_cast<int>(r.steps.size()) && r.steps[i + 1].tau == r.steps[i].tau;
            G[i] = r.steps[i].reward + (same ? cfg.discount * G[i + 1] : 0.0);
            total += r.steps[i].reward;
        }
        for (std::size_t i = 0; i < r.steps.size(); ++i) {
            Batch& b = batch[tr.slots[i]];
            b.xs.push_back(std::move(tr.xs[i]));
            b.actions.push_back(static_cast<int>(r.steps[i].action));
            b.returns.push_back(G[i]);
        }
        for (std::size_t i = 0; i < r.steps.size(); ++i) {
            if (i + 1 < r.steps.size() && r.steps[i + 1].tau == r.steps[i].tau) continue;
            auto& q = module_recent[tr.slots[i]];
            q.push_back(r.steps[i].beta_fired);
            if (static_cast<int>(q.size()) > cfg.success_window) q.pop_front();
        }
        recent.push_back(r.success);
        rewards.push_back(total);
        if (static_cast<int>(recent.size()) > cfg.success_window) recent.pop_front(), rewards.pop_front();
        out.admitted_per_episode.push_back(static_cast<int>(pool.size()));

        if ((ep + 1) % cfg.batch_episodes == 0) {
            for (int m = 0; m < M; ++m) {
                Batch& b = batch[m];
                if (b.xs.empty()) continue;
                ModuleNet& net = options.module(ros[m]);
                std::vector<double> adv(b.xs.size());
                for (std::size_t i = 0; i < b.xs.size(); ++i) adv[i] = b.returns[i] - net.value(b.xs[i]);
                std::vector<double> ga, gc;
                const double la = net.actor_loss(b.xs, b.actions, adv, cfg.entropy, &ga);
                const double lc = net.critic_loss(b.xs, b.returns, &gc);
                if (!std::isfinite(la) || !std::isfinite(lc)) throw Error("divergence", "non-finite loss");
                actor_opt[m].step(net.actor(), ga, cfg.actor_lr);
                critic_opt[m].step(net.critic(), gc, cfg.critic_lr);
                b = Batch{};
            }
        }

        const double rate = std::count(recent.begin(), recent.end(), true) / double(recent.size());
        const bool full = static_cast<int>(recent.size()) >= cfg.success_window;
        if (tier + 1 < static_cast<int>(cfg.tiers.size()) &&
            (ep + 1 - tier_start >= cfg.tier_episodes || (full && rate >= cfg.advance_success))) {
            ++tier;
            pool = admitted(tier);
            tier_start = ep + 1;
            recent.clear();
        }

        if ((ep + 1) % cfg.log_every == 0 || ep + 1 == cfg.episodes) {
            CurvePoint c;
            c.episode = ep + 1;
            c.tier = tier;
            c.admitted = static_cast<int>(pool.size());
            double sum = 0.0;
            for (double v : rewards) sum += v;
            c.mean_reward = rewards.empty() ? 0.0 : sum / rewards.size();
            for (const auto& q : module_recent) {
                c.module_success.push_back(q.empty() ? -1.0 : std::count(q.begin(), q.end(), true) / double(q.size()));
            }
            out.curve.push_back(std::move(c));
        }
    }
    return out;
}

void write_policy_curve(std::ostream& out, const std::vector<CurvePoint>& curve, Domain d) {
    out << "episode,tier,admitted,mean_reward";
    for (const auto& p : roster(d)) out << "," << p.name();
    out << "\n" << std::setprecision(6);
    for (const auto& c : curve) {
        out << c.episode << "," << c.tier << "," << c.admitted << "," << c.mean_reward;
        for (double v : c.module_success) {
            out << ",";
            if (v >= 0.0) out << v;
        }
        out << "\n";
    }
}

}  // namespace mpps
