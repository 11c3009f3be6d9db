#include "metricgd/models.hpp"

#include <cmath>
#include <numbers>

namespace metricgd {

// --- Model defaults --------------------------------------------------------

Vec Model::loss_grad_theta(const Vec& theta, const Sample& s) const {
    const Vec h = representation(theta, s.x);
    return rep_jacobian(theta, s.x).apply_transposed(loss_grad_h(s.y, h));
}

double Model::gaussian_beta() const {
    throw CapabilityMissing(id() + ": no fixed-variance Gaussian head");
}

double Model::log_density(const Vec&, const Sample&) const {
    throw CapabilityMissing(id() + ": no log-density");
}

Vec Model::log_density_grad(const Vec&, const Sample&) const {
    throw CapabilityMissing(id() + ": no log-density");
}

Vec Model::residual(const Vec&, const Sample&) const {
    throw CapabilityMissing(id() + ": no residual form");
}

Matrix Model::residual_jacobian(const Vec&, const Sample&) const {
    throw CapabilityMissing(id() + ": no residual form");
}

SymMatrix Model::loss_hessian_theta(const Vec&, const Sample&) const {
    throw CapabilityMissing(id() + ": no analytic loss Hessian");
}

double batch_loss(const Model& model, const Vec& theta, const Batch& batch) {
    if (batch.empty()) throw EmptyBatch("batch_loss: empty batch");
    double sum = 0.0;
    for (const Sample& s : batch)
        sum += model.atomic_loss(s.y, model.representation(theta, s.x));
    return sum / static_cast<double>(batch.size());
}

Vec batch_gradient(const Model& model, const Vec& theta, const Batch& batch) {
    if (batch.empty()) throw EmptyBatch("batch_gradient: empty batch");
    Vec g(model.param_dim(), 0.0);
    for (const Sample& s : batch) axpy(1.0, model.loss_grad_theta(theta, s), g);
    const double inv_n = 1.0 / static_cast<double>(batch.size());
    for (double& v : g) v *= inv_n;
    return g;
}

// --- FeedforwardNet ---------------------------------------------------------

FeedforwardNet::FeedforwardNet(std::size_t in, std::size_t out,
                               std::size_t hidden, bool bias)
    : in_(in), out_(out), hidden_(hidden), bias_(bias) {
    if (in == 0 || out == 0)
        throw DimensionMismatch("FeedforwardNet: zero input or output dim");
    if (hidden_ == 0)
        dim_ = out_ * in_ + (bias_ ? out_ : 0);
    else
        dim_ = hidden_ * in_ + (bias_ ? hidden_ : 0) + out_ * hidden_ +
               (bias_ ? out_ : 0);
}

void FeedforwardNet::check_dims(const Vec& theta, const Vec& x) const {
    if (theta.size() != dim_)
        throw DimensionMismatch("FeedforwardNet: theta has wrong length");
    if (x.size() != in_)
        throw DimensionMismatch("FeedforwardNet: input has wrong length");
}

Vec FeedforwardNet::forward(const Vec& theta, const Vec& x) const {
    check_dims(theta, x);
    if (hidden_ == 0) {
        Vec h(out_, 0.0);
        kern::gemv(theta.data(), out_, in_, x.data(), h.data());
        if (bias_) {
            const double* b = theta.data() + out_ * in_;
            for (std::size_t j = 0; j < out_; ++j) h[j] += b[j];
        }
        return h;
    }
    const std::size_t ob1 = hidden_ * in_;
    const std::size_t ow2 = ob1 + (bias_ ? hidden_ : 0);
    const std::size_t ob2 = ow2 + out_ * hidden_;

    Vec z(hidden_, 0.0);
    kern::gemv(theta.data(), hidden_, in_, x.data(), z.data());
    for (std::size_t k = 0; k < hidden_; ++k)
        z[k] = std::tanh(z[k] + (bias_ ? theta[ob1 + k] : 0.0));

    Vec h(out_, 0.0);
    kern::gemv(theta.data() + ow2, out_, hidden_, z.data(), h.data());
    if (bias_)
        for (std::size_t j = 0; j < out_; ++j) h[j] += theta[ob2 + j];
    return h;
}

Matrix FeedforwardNet::jacobian(const Vec& theta, const Vec& x) const {
    check_dims(theta, x);
    Matrix j(out_, dim_);
    if (hidden_ == 0) {
        for (std::size_t r = 0; r < out_; ++r) {
            double* row = j.row(r);
            for (std::size_t i = 0; i < in_; ++i) row[r * in_ + i] = x[i];
            if (bias_) row[out_ * in_ + r] = 1.0;
        }
        return j;
    }
    const std::size_t ob1 = hidden_ * in_;
    const std::size_t ow2 = ob1 + (bias_ ? hidden_ : 0);
    const std::size_t ob2 = ow2 + out_ * hidden_;

    Vec a(hidden_, 0.0);
    kern::gemv(theta.data(), hidden_, in_, x.data(), a.data());
    Vec z(hidden_);
    for (std::size_t k = 0; k < hidden_; ++k)
        z[k] = std::tanh(a[k] + (bias_ ? theta[ob1 + k] : 0.0));

    for (std::size_t r = 0; r < out_; ++r) {
        double* row = j.row(r);
        const double* w2r = theta.data() + ow2 + r * hidden_;
        for (std::size_t k = 0; k < hidden_; ++k) {
            const double gk = w2r[k] * (1.0 - z[k] * z[k]);
            double* wrow = row + k * in_;
            for (std::size_t i = 0; i < in_; ++i) wrow[i] = gk * x[i];
            if (bias_) row[ob1 + k] = gk;
            row[ow2 + r * hidden_ + k] = z[k];
        }
        if (bias_) row[ob2 + r] = 1.0;
    }
    return j;
}

void FeedforwardNet::add_weighted_curvature(const Vec& theta, const Vec& x,
                                            const Vec& u,
                                            std::vector<double>& buf,
                                            double scale) const {
    check_dims(theta, x);
    if (u.size() != out_)
        throw DimensionMismatch("add_weighted_curvature: weight length");
    if (hidden_ == 0) return; // affine in theta, no curvature

    const std::size_t ob1 = hidden_ * in_;
    const std::size_t ow2 = ob1 + (bias_ ? hidden_ : 0);
    const std::size_t d = dim_;

    Vec a(hidden_, 0.0);
    kern::gemv(theta.data(), hidden_, in_, x.data(), a.data());
    Vec z(hidden_);
    for (std::size_t k = 0; k < hidden_; ++k)
        z[k] = std::tanh(a[k] + (bias_ ? theta[ob1 + k] : 0.0));

    // extended input (x, 1) indexed through the layer-1 block of unit k
    const std::size_t blk = in_ + (bias_ ? 1 : 0);
    std::vector<std::size_t> idx(blk);
    Vec xt(blk);
    for (std::size_t i = 0; i < in_; ++i) xt[i] = x[i];
    if (bias_) xt[in_] = 1.0;

    for (std::size_t k = 0; k < hidden_; ++k) {
        const double sk = 1.0 - z[k] * z[k];
        double wu = 0.0;
        for (std::size_t r = 0; r < out_; ++r)
            wu += u[r] * theta[ow2 + r * hidden_ + k];

        // d2 h / d a_k^2 routed through unit k's first-layer parameters
        const double ck = scale * wu * (-2.0 * z[k] * sk);
        for (std::size_t p = 0; p < in_; ++p) idx[p] = k * in_ + p;
        if (bias_) idx[in_] = ob1 + k;
        if (ck != 0.0) {
            for (std::size_t p = 0; p < blk; ++p)
                for (std::size_t q = p; q < blk; ++q)
                    buf[idx[p] * d + idx[q]] += ck * xt[p] * xt[q];
        }

        // mixed W2[r,k] x first-layer-of-unit-k terms
        for (std::size_t r = 0; r < out_; ++r) {
            const double val = scale * u[r] * sk;
            if (val == 0.0) continue;
            const std::size_t col = ow2 + r * hidden_ + k;
            for (std::size_t p = 0; p < blk; ++p)
                buf[idx[p] * d + col] += val * xt[p];
        }
    }
}

Vec FeedforwardNet::init_params(Rng& rng) const {
    Vec theta(dim_, 0.0);
    if (hidden_ == 0) return theta; // linear models start at zero
    const double r1 = 1.0 / std::sqrt(static_cast<double>(in_));
    const double r2 = 1.0 / std::sqrt(static_cast<double>(hidden_));
    const std::size_t ow2 = hidden_ * in_ + (bias_ ? hidden_ : 0);
    for (std::size_t i = 0; i < ow2; ++i) theta[i] = rng.uniform(-r1, r1);
    for (std::size_t i = ow2; i < dim_; ++i) theta[i] = rng.uniform(-r2, r2);
    return theta;
}

// --- head math (shared) -----------------------------------------------------

namespace {

void check_yh(const Vec& y, const Vec& h, std::size_t m) {
    if (y.size() != m || h.size() != m)
        throw DimensionMismatch("head: y/h length != rep dim");
}

Vec gaussian_residual(const Vec& y, const Vec& h, double beta) {
    Vec r(y.size());
    const double inv = 1.0 / beta;
    for (std::size_t i = 0; i < y.size(); ++i) r[i] = (y[i] - h[i]) * inv;
    return r;
}

// Atomic loss is literally 1/2 ||residual||^2 so the residual identity is
// exact, not approximate.
double gaussian_atomic(const Vec& y, const Vec& h, double beta) {
    return 0.5 * squared_norm(gaussian_residual(y, h, beta));
}

Vec gaussian_grad_h(const Vec& y, const Vec& h, double beta) {
    Vec g(y.size());
    const double inv2 = 1.0 / (beta * beta);
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = (h[i] - y[i]) * inv2;
    return g;
}

SymMatrix gaussian_hess_h(std::size_t m, double beta) {
    return SymMatrix::diagonal(Vec(m, 1.0 / (beta * beta)));
}

double gaussian_log_norm_const(std::size_t m, double beta) {
    return 0.5 * static_cast<double>(m) *
           std::log(2.0 * std::numbers::pi * beta * beta);
}

Vec softmax(const Vec& h) {
    double hmax = h[0];
    for (double v : h) hmax = std::max(hmax, v);
    Vec p(h.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        p[i] = std::exp(h[i] - hmax);
        sum += p[i];
    }
    for (double& v : p) v /= sum;
    return p;
}

double log_sum_exp(const Vec& h) {
    double hmax = h[0];
    for (double v : h) hmax = std::max(hmax, v);
    double sum = 0.0;
    for (double v : h) sum += std::exp(v - hmax);
    return hmax + std::log(sum);
}

// J^T Hy J plus the representation-curvature correction; per-sample loss
// Hessian in theta for any feedforward model.
SymMatrix net_loss_hessian(const FeedforwardNet& net, const Model& model,
                           const Vec& theta, const Sample& s) {
    const Vec h = net.forward(theta, s.x);
    const Matrix j = net.jacobian(theta, s.x);
    const SymMatrix hy = model.loss_hess_h(s.y, h);
    const std::size_t m = net.output_dim();
    const std::size_t d = net.param_dim();

    Matrix w(m, d); // Hy * J
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t l = 0; l < m; ++l)
            if (hy(k, l) != 0.0) kern::axpy(hy(k, l), j.row(l), w.row(k), d);

    std::vector<double> buf(d * d, 0.0);
    for (std::size_t k = 0; k < m; ++k)
        kern::ger_upper(buf.data(), d, j.row(k), w.row(k), 1.0);

    net.add_weighted_curvature(theta, s.x, model.loss_grad_h(s.y, h), buf, 1.0);
    return SymMatrix::from_upper(d, std::move(buf));
}

} // namespace

// --- LinearGaussianModel ----------------------------------------------------

LinearGaussianModel::LinearGaussianModel(std::size_t in, std::size_t out,
                                         double beta, bool bias)
    : net_(in, out, 0, bias), beta_(beta) {
    if (!(beta > 0.0)) throw Error("LinearGaussianModel: beta must be > 0");
}

Vec LinearGaussianModel::representation(const Vec& theta, const Vec& x) const {
    return net_.forward(theta, x);
}

Matrix LinearGaussianModel::rep_jacobian(const Vec& theta, const Vec& x) const {
    return net_.jacobian(theta, x);
}

double LinearGaussianModel::atomic_loss(const Vec& y, const Vec& h) const {
    check_yh(y, h, rep_dim());
    return gaussian_atomic(y, h, beta_);
}

Vec LinearGaussianModel::loss_grad_h(const Vec& y, const Vec& h) const {
    check_yh(y, h, rep_dim());
    return gaussian_grad_h(y, h, beta_);
}

SymMatrix LinearGaussianModel::loss_hess_h(const Vec& y, const Vec& h) const {
    check_yh(y, h, rep_dim());
    return gaussian_hess_h(rep_dim(), beta_);
}

double LinearGaussianModel::log_density(const Vec& theta,
                                        const Sample& s) const {
    const Vec h = representation(theta, s.x);
    return -atomic_loss(s.y, h) - gaussian_log_norm_const(rep_dim(), beta_);
}

Vec LinearGaussianModel::log_density_grad(const Vec& theta,
                                          const Sample& s) const {
    Vec g = loss_grad_theta(theta, s);
    for (double& v : g) v = -v;
    return g;
}

Vec LinearGaussianModel::residual(const Vec& theta, const Sample& s) const {
    return gaussian_residual(s.y, representation(theta, s.x), beta_);
}

Matrix LinearGaussianModel::residual_jacobian(const Vec& theta,
                                              const Sample& s) const {
    Matrix j = rep_jacobian(theta, s.x);
    const double scale = -1.0 / beta_;
    for (std::size_t i = 0; i < j.rows() * j.cols(); ++i) j.data()[i] *= scale;
    return j;
}

SymMatrix LinearGaussianModel::loss_hessian_theta(const Vec& theta,
                                                  const Sample& s) const {
    return net_loss_hessian(net_, *this, theta, s);
}

Vec LinearGaussianModel::initial_params(Rng& rng) const {
    return net_.init_params(rng);
}

// --- MlpGaussianModel -------------------------------------------------------

MlpGaussianModel::MlpGaussianModel(std::size_t in, std::size_t out,
                                   std::size_t width, double beta)
    : net_(in, out, width), beta_(beta) {
    if (width == 0) throw Error("MlpGaussianModel: width must be >= 1");
    if (!(beta > 0.0)) throw Error("MlpGaussianModel: beta must be > 0");
}

Vec MlpGaussianModel::representation(const Vec& theta, const Vec& x) const {
    return net_.forward(theta, x);
}

Matrix MlpGaussianModel::rep_jacobian(const Vec& theta, const Vec& x) const {
    return net_.jacobian(theta, x);
}

double MlpGaussianModel::atomic_loss(const Vec& y, const Vec& h) const {
    check_yh(y, h, rep_dim());
    return gaussian_atomic(y, h, beta_);
}

Vec MlpGaussianModel::loss_grad_h(const Vec& y, const Vec& h) const {
    check_yh(y, h, rep_dim());
    return gaussian_grad_h(y, h, beta_);
}

SymMatrix MlpGaussianModel::loss_hess_h(const Vec& y, const Vec& h) const {
    check_yh(y, h, rep_dim());
    return gaussian_hess_h(rep_dim(), beta_);
}

double MlpGaussianModel::log_density(const Vec& theta, const Sample& s) const {
    const Vec h = representation(theta, s.x);
    return -atomic_loss(s.y, h) - gaussian_log_norm_const(rep_dim(), beta_);
}

Vec MlpGaussianModel::log_density_grad(const Vec& theta,
                                       const Sample& s) const {
    Vec g = loss_grad_theta(theta, s);
    for (double& v : g) v = -v;
    return g;
}

Vec MlpGaussianModel::residual(const Vec& theta, const Sample& s) const {
    return gaussian_residual(s.y, representation(theta, s.x), beta_);
}

Matrix MlpGaussianModel::residual_jacobian(const Vec& theta,
                                           const Sample& s) const {
    Matrix j = rep_jacobian(theta, s.x);
    const double scale = -1.0 / beta_;
    for (std::size_t i = 0; i < j.rows() * j.cols(); ++i) j.data()[i] *= scale;
    return j;
}

SymMatrix MlpGaussianModel::loss_hessian_theta(const Vec& theta,
                                               const Sample& s) const {
    return net_loss_hessian(net_, *this, theta, s);
}

Vec MlpGaussianModel::initial_params(Rng& rng) const {
    return net_.init_params(rng);
}

// --- SoftmaxClassifierModel ---------------------------------------------------

SoftmaxClassifierModel::SoftmaxClassifierModel(std::size_t in,
                                               std::size_t classes,
                                               std::size_t width)
    : net_(in, classes, width) {
    if (classes < 2) throw Error("SoftmaxClassifierModel: need >= 2 classes");
}

Vec SoftmaxClassifierModel::representation(const Vec& theta,
                                           const Vec& x) const {
    return net_.forward(theta, x);
}

Matrix SoftmaxClassifierModel::rep_jacobian(const Vec& theta,
                                            const Vec& x) const {
    return net_.jacobian(theta, x);
}

double SoftmaxClassifierModel::atomic_loss(const Vec& y, const Vec& h) const {
    check_yh(y, h, rep_dim());
    return log_sum_exp(h) - dot(h, y);
}

Vec SoftmaxClassifierModel::loss_grad_h(const Vec& y, const Vec& h) const {
    check_yh(y, h, rep_dim());
    Vec g = softmax(h);
    for (std::size_t i = 0; i < g.size(); ++i) g[i] -= y[i];
    return g;
}

SymMatrix SoftmaxClassifierModel::loss_hess_h(const Vec& y,
                                              const Vec& h) const {
    check_yh(y, h, rep_dim());
    const Vec p = softmax(h);
    const std::size_t m = p.size();
    std::vector<double> buf(m * m, 0.0);
    for (std::size_t i = 0; i < m; ++i) {
        buf[i * m + i] = p[i] - p[i] * p[i];
        for (std::size_t j = i + 1; j < m; ++j) buf[i * m + j] = -p[i] * p[j];
    }
    return SymMatrix::from_upper(m, std::move(buf));
}

double SoftmaxClassifierModel::log_density(const Vec& theta,
                                           const Sample& s) const {
    return -atomic_loss(s.y, representation(theta, s.x));
}

Vec SoftmaxClassifierModel::log_density_grad(const Vec& theta,
                                             const Sample& s) const {
    Vec g = loss_grad_theta(theta, s);
    for (double& v : g) v = -v;
    return g;
}

SymMatrix SoftmaxClassifierModel::loss_hessian_theta(const Vec& theta,
                                                     const Sample& s) const {
    return net_loss_hessian(net_, *this, theta, s);
}

Vec SoftmaxClassifierModel::initial_params(Rng& rng) const {
    return net_.init_params(rng);
}

// --- ReparametrizedModel ------------------------------------------------------

ReparametrizedModel::ReparametrizedModel(const Model& base, Matrix a,
                                         Matrix a_inv)
    : base_(base), a_(std::move(a)), a_inv_(std::move(a_inv)) {
    const std::size_t d = base.param_dim();
    if (a_.rows() != d || a_.cols() != d || a_inv_.rows() != d ||
        a_inv_.cols() != d)
        throw DimensionMismatch("ReparametrizedModel: map is not d x d");
}

Vec ReparametrizedModel::representation(const Vec& theta, const Vec& x) const {
    return base_.representation(to_base(theta), x);
}

Matrix ReparametrizedModel::rep_jacobian(const Vec& theta, const Vec& x) const {
    return base_.rep_jacobian(to_base(theta), x).matmul(a_inv_);
}

double ReparametrizedModel::atomic_loss(const Vec& y, const Vec& h) const {
    return base_.atomic_loss(y, h);
}

Vec ReparametrizedModel::loss_grad_h(const Vec& y, const Vec& h) const {
    return base_.loss_grad_h(y, h);
}

SymMatrix ReparametrizedModel::loss_hess_h(const Vec& y, const Vec& h) const {
    return base_.loss_hess_h(y, h);
}

double ReparametrizedModel::log_density(const Vec& theta,
                                        const Sample& s) const {
    return base_.log_density(to_base(theta), s);
}

Vec ReparametrizedModel::log_density_grad(const Vec& theta,
                                          const Sample& s) const {
    return a_inv_.apply_transposed(base_.log_density_grad(to_base(theta), s));
}

Vec ReparametrizedModel::residual(const Vec& theta, const Sample& s) const {
    return base_.residual(to_base(theta), s);
}

Matrix ReparametrizedModel::residual_jacobian(const Vec& theta,
                                              const Sample& s) const {
    return base_.residual_jacobian(to_base(theta), s).matmul(a_inv_);
}

SymMatrix ReparametrizedModel::loss_hessian_theta(const Vec& theta,
                                                  const Sample& s) const {
    // A^{-T} H A^{-1}, assembled on the upper triangle
    const SymMatrix hb = base_.loss_hessian_theta(to_base(theta), s);
    const std::size_t d = param_dim();
    Matrix v(d, d); // H * A^{-1}
    for (std::size_t k = 0; k < d; ++k)
        for (std::size_t l = 0; l < d; ++l)
            if (hb(k, l) != 0.0)
                kern::axpy(hb(k, l), a_inv_.row(l), v.row(k), d);
    std::vector<double> buf(d * d, 0.0);
    for (std::size_t k = 0; k < d; ++k)
        kern::ger_upper(buf.data(), d, a_inv_.row(k), v.row(k), 1.0);
    return SymMatrix::from_upper(d, std::move(buf));
}

Vec ReparametrizedModel::initial_params(Rng& rng) const {
    return a_.apply(base_.initial_params(rng));
}

// --- factory ----------------------------------------------------------------

std::unique_ptr<Model> make_model(const std::string& id, std::size_t input_dim,
                                  std::size_t output_dim, std::size_t width,
                                  double beta) {
    if (id == "linear_gaussian")
        return std::make_unique<LinearGaussianModel>(input_dim, output_dim,
                                                     beta);
    if (id == "mlp_gaussian")
        return std::make_unique<MlpGaussianModel>(input_dim, output_dim,
                                                  width == 0 ? 16 : width,
                                                  beta);
    if (id == "softmax")
        return std::make_unique<SoftmaxClassifierModel>(input_dim, output_dim,
                                                        width);
    throw ConfigError("unknown model id: " + id);
}

} // namespace metricgd
