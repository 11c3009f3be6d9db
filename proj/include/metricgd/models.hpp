#pragma once

#include <memory>
#include <string>

#include "metricgd/matrix.hpp"
#include "metricgd/rng.hpp"

namespace metricgd {

/// An input-output pair. For the classifier, y is the one-hot class vector.
struct Sample {
    Vec x;
    Vec y;
};

/// Ordered collection of samples; every empirical mean iterates it in order
/// so reductions are bit-deterministic.
using Batch = std::vector<Sample>;

/// A model maps parameters theta and an input x to a finite-dimensional
/// representation h of the predicted conditional distribution, and defines
/// the per-sample (atomic) loss through h. Optional capabilities: a
/// log-density, a residual form with loss = 1/2 ||residual||^2, an analytic
/// per-sample loss Hessian in theta, and a fixed-variance Gaussian head.
///
/// Implementations are immutable after construction; all operations are
/// pure, so instances are safe to share across threads.
class Model {
public:
    virtual ~Model() = default;

    virtual std::string id() const = 0;
    virtual std::size_t param_dim() const = 0;
    virtual std::size_t rep_dim() const = 0;
    virtual std::size_t input_dim() const = 0;

    virtual Vec representation(const Vec& theta, const Vec& x) const = 0;
    /// Jacobian of theta -> h(theta, x), rep_dim x param_dim.
    virtual Matrix rep_jacobian(const Vec& theta, const Vec& x) const = 0;

    virtual double atomic_loss(const Vec& y, const Vec& h) const = 0;
    /// Gradient of the atomic loss with respect to h.
    virtual Vec loss_grad_h(const Vec& y, const Vec& h) const = 0;
    /// Hessian of the atomic loss with respect to h.
    virtual SymMatrix loss_hess_h(const Vec& y, const Vec& h) const = 0;

    /// Per-sample loss gradient in theta; default is J^T d l/d h.
    virtual Vec loss_grad_theta(const Vec& theta, const Sample& s) const;

    virtual bool has_density() const { return false; }
    virtual bool has_residual() const { return false; }
    virtual bool has_loss_hessian_theta() const { return false; }
    virtual bool has_gaussian_head() const { return false; }

    virtual double gaussian_beta() const;
    virtual double log_density(const Vec& theta, const Sample& s) const;
    virtual Vec log_density_grad(const Vec& theta, const Sample& s) const;
    virtual Vec residual(const Vec& theta, const Sample& s) const;
    virtual Matrix residual_jacobian(const Vec& theta, const Sample& s) const;
    /// Hessian of the atomic loss in theta for one sample.
    virtual SymMatrix loss_hessian_theta(const Vec& theta,
                                         const Sample& s) const;

    virtual Vec initial_params(Rng& rng) const = 0;
};

double batch_loss(const Model& model, const Vec& theta, const Batch& batch);
Vec batch_gradient(const Model& model, const Vec& theta, const Batch& batch);

// --- feedforward core ----------------------------------------------------
//
// Shared network for the shipped models: either affine (h = W x + b) or one
// hidden tanh layer (h = W2 tanh(W1 x + b1) + b2). Parameter layout is
// fixed and documented: per layer, row-major weights first, then biases.

class FeedforwardNet {
public:
    FeedforwardNet(std::size_t in, std::size_t out, std::size_t hidden,
                   bool bias = true);

    std::size_t param_dim() const { return dim_; }
    std::size_t input_dim() const { return in_; }
    std::size_t output_dim() const { return out_; }
    std::size_t hidden_width() const { return hidden_; }
    bool linear() const { return hidden_ == 0; }

    Vec forward(const Vec& theta, const Vec& x) const;
    Matrix jacobian(const Vec& theta, const Vec& x) const;

    /// Accumulates scale * sum_j u[j] * d2 h_j / dtheta2 into the upper
    /// triangle of buf (param_dim x param_dim). Zero for the affine net.
    void add_weighted_curvature(const Vec& theta, const Vec& x, const Vec& u,
                                std::vector<double>& buf, double scale) const;

    /// Zero for the affine net; uniform +-1/sqrt(fan_in) per layer otherwise.
    Vec init_params(Rng& rng) const;

private:
    void check_dims(const Vec& theta, const Vec& x) const;

    std::size_t in_, out_, hidden_, dim_;
    bool bias_;
};

// --- shipped models -------------------------------------------------------

/// h = W x + b with a fixed-variance Gaussian head N(h, beta^2 I).
/// Atomic loss is the squared Mahalanobis residual 1/2 ||(y - h)/beta||^2;
/// the log-density additionally carries the normalization constant.
class LinearGaussianModel final : public Model {
public:
    LinearGaussianModel(std::size_t in, std::size_t out, double beta = 1.0,
                        bool bias = true);

    std::string id() const override { return "linear_gaussian"; }
    std::size_t param_dim() const override { return net_.param_dim(); }
    std::size_t rep_dim() const override { return net_.output_dim(); }
    std::size_t input_dim() const override { return net_.input_dim(); }

    Vec representation(const Vec& theta, const Vec& x) const override;
    Matrix rep_jacobian(const Vec& theta, const Vec& x) const override;
    double atomic_loss(const Vec& y, const Vec& h) const override;
    Vec loss_grad_h(const Vec& y, const Vec& h) const override;
    SymMatrix loss_hess_h(const Vec& y, const Vec& h) const override;

    bool has_density() const override { return true; }
    bool has_residual() const override { return true; }
    bool has_loss_hessian_theta() const override { return true; }
    bool has_gaussian_head() const override { return true; }

    double gaussian_beta() const override { return beta_; }
    double log_density(const Vec& theta, const Sample& s) const override;
    Vec log_density_grad(const Vec& theta, const Sample& s) const override;
    Vec residual(const Vec& theta, const Sample& s) const override;
    Matrix residual_jacobian(const Vec& theta, const Sample& s) const override;
    SymMatrix loss_hessian_theta(const Vec& theta,
                                 const Sample& s) const override;

    Vec initial_params(Rng& rng) const override;

private:
    FeedforwardNet net_;
    double beta_;
};

/// One hidden tanh layer with a fixed-variance Gaussian head.
class MlpGaussianModel final : public Model {
public:
    MlpGaussianModel(std::size_t in, std::size_t out, std::size_t width = 16,
                     double beta = 1.0);

    std::string id() const override { return "mlp_gaussian"; }
    std::size_t param_dim() const override { return net_.param_dim(); }
    std::size_t rep_dim() const override { return net_.output_dim(); }
    std::size_t input_dim() const override { return net_.input_dim(); }

    Vec representation(const Vec& theta, const Vec& x) const override;
    Matrix rep_jacobian(const Vec& theta, const Vec& x) const override;
    double atomic_loss(const Vec& y, const Vec& h) const override;
    Vec loss_grad_h(const Vec& y, const Vec& h) const override;
    SymMatrix loss_hess_h(const Vec& y, const Vec& h) const override;

    bool has_density() const override { return true; }
    bool has_residual() const override { return true; }
    bool has_loss_hessian_theta() const override { return true; }
    bool has_gaussian_head() const override { return true; }

    double gaussian_beta() const override { return beta_; }
    double log_density(const Vec& theta, const Sample& s) const override;
    Vec log_density_grad(const Vec& theta, const Sample& s) const override;
    Vec residual(const Vec& theta, const Sample& s) const override;
    Matrix residual_jacobian(const Vec& theta, const Sample& s) const override;
    SymMatrix loss_hessian_theta(const Vec& theta,
                                 const Sample& s) const override;

    Vec initial_params(Rng& rng) const override;

private:
    FeedforwardNet net_;
    double beta_;
};

/// Cross-entropy classifier over logits from an affine map (width == 0) or
/// one hidden tanh layer. y is one-hot; the log-density is the class
/// log-probability, so the atomic loss is exactly the negative
/// log-likelihood.
class SoftmaxClassifierModel final : public Model {
public:
    SoftmaxClassifierModel(std::size_t in, std::size_t classes,
                           std::size_t width = 0);

    std::string id() const override { return "softmax"; }
    std::size_t param_dim() const override { return net_.param_dim(); }
    std::size_t rep_dim() const override { return net_.output_dim(); }
    std::size_t input_dim() const override { return net_.input_dim(); }

    Vec representation(const Vec& theta, const Vec& x) const override;
    Matrix rep_jacobian(const Vec& theta, const Vec& x) const override;
    double atomic_loss(const Vec& y, const Vec& h) const override;
    Vec loss_grad_h(const Vec& y, const Vec& h) const override;
    SymMatrix loss_hess_h(const Vec& y, const Vec& h) const override;

    bool has_density() const override { return true; }
    bool has_loss_hessian_theta() const override { return true; }

    double log_density(const Vec& theta, const Sample& s) const override;
    Vec log_density_grad(const Vec& theta, const Sample& s) const override;
    SymMatrix loss_hessian_theta(const Vec& theta,
                                 const Sample& s) const override;

    Vec initial_params(Rng& rng) const override;

private:
    FeedforwardNet net_;
};

/// View of a base model under the invertible change of variables
/// theta' = A theta. Used to test which update rules are equivariant under
/// linear reparametrization.
class ReparametrizedModel final : public Model {
public:
    ReparametrizedModel(const Model& base, Matrix a, Matrix a_inv);

    std::string id() const override { return base_.id() + "+reparam"; }
    std::size_t param_dim() const override { return base_.param_dim(); }
    std::size_t rep_dim() const override { return base_.rep_dim(); }
    std::size_t input_dim() const override { return base_.input_dim(); }

    Vec representation(const Vec& theta, const Vec& x) const override;
    Matrix rep_jacobian(const Vec& theta, const Vec& x) const override;
    double atomic_loss(const Vec& y, const Vec& h) const override;
    Vec loss_grad_h(const Vec& y, const Vec& h) const override;
    SymMatrix loss_hess_h(const Vec& y, const Vec& h) const override;

    bool has_density() const override { return base_.has_density(); }
    bool has_residual() const override { return base_.has_residual(); }
    bool has_loss_hessian_theta() const override {
        return base_.has_loss_hessian_theta();
    }
    bool has_gaussian_head() const override { return base_.has_gaussian_head(); }

    double gaussian_beta() const override { return base_.gaussian_beta(); }
    double log_density(const Vec& theta, const Sample& s) const override;
    Vec log_density_grad(const Vec& theta, const Sample& s) const override;
    Vec residual(const Vec& theta, const Sample& s) const override;
    Matrix residual_jacobian(const Vec& theta, const Sample& s) const override;
    SymMatrix loss_hessian_theta(const Vec& theta,
                                 const Sample& s) const override;

    Vec initial_params(Rng& rng) const override;

private:
    Vec to_base(const Vec& theta) const { return a_inv_.apply(theta); }

    const Model& base_;
    Matrix a_, a_inv_;
};

/// Factory used by the CLI: id is one of "linear_gaussian", "mlp_gaussian",
/// "softmax". width is the hidden layer width (ignored by linear_gaussian;
/// 0 means affine logits for softmax). beta is the Gaussian head scale.
std::unique_ptr<Model> make_model(const std::string& id, std::size_t input_dim,
                                  std::size_t output_dim, std::size_t width,
                                  double beta);

} // namespace metricgd
