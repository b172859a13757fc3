#include "udnn/model.hpp"

#include "udnn/errors.hpp"
#include "udnn/ista.hpp"

namespace udnn {

void UdnnModel::validate() const {
  if (layers.empty()) throw IntegrityError("UdnnModel: no layers");
  if (meta.k_layers != k_layers())
    throw IntegrityError("UdnnModel: meta.k_layers mismatch");
  for (const LayerParams& layer : layers) {
    if (layer.w1.rows() != meta.m || layer.w1.cols() != meta.n)
      throw IntegrityError("UdnnModel: W1 shape mismatch");
    if (layer.w2.rows() != meta.m || layer.w2.cols() != meta.m)
      throw IntegrityError("UdnnModel: W2 shape mismatch");
    if (layer.theta < 0) throw IntegrityError("UdnnModel: negative theta");
    if (!layer.w1.all_finite() || !layer.w2.all_finite())
      throw IntegrityError("UdnnModel: non-finite weights");
  }
}

UdnnModel init_from_ista(const MeasurementModel& model, int k_layers,
                         double lambda) {
  if (k_layers < 1) throw DomainError("init_from_ista: k_layers must be >= 1");
  if (lambda < 0) throw DomainError("init_from_ista: lambda must be >= 0");
  if (!(model.lipschitz > 0))
    throw DomainError("init_from_ista: model Lipschitz constant must be > 0");

  const double rho = 1.0 / model.lipschitz;
  const SplitComplexMatrix ah = hermitian(model.a_matrix);

  LayerParams layer;
  layer.w1.re = rho * ah.re;
  layer.w1.im = rho * ah.im;
  SplitComplexMatrix gram = cmul_mat_mat(ah, model.a_matrix);
  layer.w2.re = RealMatrix::Identity(model.m(), model.m()) - rho * gram.re;
  layer.w2.im = -rho * gram.im;
  layer.theta = lambda * rho;

  UdnnModel net;
  net.layers.assign(k_layers, layer);
  net.meta.n = model.n();
  net.meta.m = model.m();
  net.meta.k_layers = k_layers;
  net.meta.init_lambda = lambda;
  net.meta.init_lipschitz = model.lipschitz;
  net.meta.grid_fingerprint = model.fingerprint;
  return net;
}

namespace {

inline double shrink(double v, double theta) {
  if (v > theta) return v - theta;
  if (v < -theta) return v + theta;
  return 0.0;
}

void layer_pre_threshold(const LayerParams& layer, const SplitComplexVector& x,
                         const SplitComplexVector& y, SplitComplexVector& z) {
  z.re.noalias() = layer.w2.re * x.re;
  z.re.noalias() -= layer.w2.im * x.im;
  z.re.noalias() += layer.w1.re * y.re;
  z.re.noalias() -= layer.w1.im * y.im;
  z.im.noalias() = layer.w2.re * x.im;
  z.im.noalias() += layer.w2.im * x.re;
  z.im.noalias() += layer.w1.re * y.im;
  z.im.noalias() += layer.w1.im * y.re;
}

}  // namespace

SplitComplexVector forward(const UdnnModel& model,
                           const SplitComplexVector& y) {
  if (y.size() != model.meta.n) throw ShapeError("forward: y length != N");
  SplitComplexVector x = SplitComplexVector::zero(model.meta.m);
  SplitComplexVector z = SplitComplexVector::zero(model.meta.m);
  for (const LayerParams& layer : model.layers) {
    layer_pre_threshold(layer, x, y, z);
    for (Eigen::Index i = 0; i < z.size(); ++i) {
      x.re[i] = shrink(z.re[i], layer.theta);
      x.im[i] = shrink(z.im[i], layer.theta);
    }
  }
  return x;
}

std::pair<SplitComplexVector, ForwardTrace> forward_traced(
    const UdnnModel& model, const SplitComplexVector& y) {
  if (y.size() != model.meta.n)
    throw ShapeError("forward_traced: y length != N");
  ForwardTrace trace;
  trace.layers.reserve(model.layers.size());
  SplitComplexVector x = SplitComplexVector::zero(model.meta.m);
  for (const LayerParams& layer : model.layers) {
    LayerTrace rec;
    rec.x_input = x;
    rec.z_pre = SplitComplexVector::zero(model.meta.m);
    layer_pre_threshold(layer, x, y, rec.z_pre);
    for (Eigen::Index i = 0; i < rec.z_pre.size(); ++i) {
      x.re[i] = shrink(rec.z_pre.re[i], layer.theta);
      x.im[i] = shrink(rec.z_pre.im[i], layer.theta);
    }
    rec.x_output = x;
    trace.layers.push_back(std::move(rec));
  }
  return {x, std::move(trace)};
}

bool compatible(const UdnnModel& model, const MeasurementModel& measurement) {
  return model.meta.n == measurement.n() && model.meta.m == measurement.m() &&
         model.meta.grid_fingerprint == measurement.fingerprint;
}

void require_compatible(const UdnnModel& model,
                        const MeasurementModel& measurement) {
  if (!compatible(model, measurement))
    throw IntegrityError(
        "model/measurement mismatch: the checkpoint was built against a "
        "different grid or configuration");
}

}  // namespace udnn
