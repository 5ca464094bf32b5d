#include <doctest.h>

#include <cmath>
#include <numbers>
#include <sstream>

#include "deepcal/error.h"
#include "deepcal/fnn.h"
#include "deepcal/numerics.h"
#include "deepcal/rng.h"

namespace fnn = deepcal::fnn;
using deepcal::Model;

namespace {

fnn::Network Small(int din, std::uint64_t seed) {
  fnn::Network net({din, 6, 5, 1}, std::vector<double>(din, -2.0),
                   std::vector<double>(din, 3.0));
  net.Initialize(seed);
  return net;
}

Eigen::MatrixXd RandomInputs(int rows, int cols, std::uint64_t seed, double lo, double hi) {
  deepcal::UniformStream s(seed, 0);
  Eigen::MatrixXd x(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) x(i, j) = lo + (hi - lo) * s.Next();
  return x;
}

}  // namespace

TEST_CASE("zero weights output the output bias") {
  fnn::Network net({3, 20, 20, 20, 1}, {0, 0, 0}, {1, 1, 1});
  const std::vector<double> x = {0.2, 0.4, 0.9};
  CHECK(net.Forward(x) == 0.0);
  net.mutable_layers().back().bias(0) = 0.37;
  CHECK(net.Forward(x) == 0.37);
  // Hidden sigmoids of zero pre-activations are 0.5 each.
  net.mutable_layers().back().weights.setOnes();
  CHECK(net.Forward(x) == doctest::Approx(0.37 + 20 * 0.5).epsilon(1e-15));
}

TEST_CASE("single hidden node evaluates the sigmoid of the normalized input") {
  fnn::Network net({1, 1, 1}, {2.0}, {6.0});
  const double w = 1.7;
  net.mutable_layers()[0].weights(0, 0) = w;
  net.mutable_layers()[1].weights(0, 0) = 1.0;
  CHECK(net.Forward(std::vector<double>{4.0}) == 0.5);
  CHECK(net.Forward(std::vector<double>{6.0}) ==
        doctest::Approx(1.0 / (1.0 + std::exp(-w))).epsilon(1e-15));
  CHECK(net.Forward(std::vector<double>{3.0}) ==
        doctest::Approx(1.0 / (1.0 + std::exp(0.5 * w))).epsilon(1e-15));
}

TEST_CASE("surrogate topology, transforms and box") {
  const auto r = deepcal::quasirandom::ParameterRanges::Calibration();
  const auto duan = fnn::Network::Surrogate(Model::kDuan, r);
  CHECK(duan.sizes() == std::vector<int>{7, 20, 20, 20, 1});
  const auto cts = fnn::Network::Surrogate(Model::kCts, r);
  CHECK(cts.sizes() == std::vector<int>{10, 20, 20, 20, 1});
  CHECK(cts.parameter_count() == 10 * 20 + 20 + 2 * (20 * 20 + 20) + 21);
  CHECK(cts.transforms()[8] == fnn::InputTransform::kLambdaSeed);
  CHECK(cts.transforms()[7] == fnn::InputTransform::kIdentity);
  CHECK(cts.layers()[1].activation == fnn::Activation::kSigmoid);
  CHECK(cts.layers().back().activation == fnn::Activation::kLinear);
  CHECK(cts.metadata().at("model") == "cts");

  std::vector<double> lo = {0.5, 0.02, 0, 0.1, 0.5, 0, 1e-6, 0.01, 0.1, 0.1};
  const auto z = cts.Normalize(lo);
  for (int j = 0; j < 10; ++j) CHECK(z(j) == doctest::Approx(-1.0).epsilon(1e-12));
  std::vector<double> mid = {1.0, 0.51, 5e-6, 0.25, 0.74995, 0.4, 0.0200005, 1.0045, 1.1, 1.1};
  const auto zm = cts.Normalize(mid);
  for (int j = 0; j < 10; ++j) CHECK(zm(j) == doctest::Approx(0.0).scale(1.0).epsilon(1e-9));
  CHECK(cts.InBox(mid));
  mid[0] = 1.7;
  CHECK_FALSE(cts.InBox(mid));
  CHECK(cts.Clamp(mid)[0] == 1.5);
}

TEST_CASE("input dimension is checked") {
  const auto net = Small(3, 1);
  const std::vector<double> x = {1.0, 2.0};
  CHECK_THROWS_AS(net.Forward(x), deepcal::DimensionMismatch);
  CHECK_THROWS_AS(net.ForwardBatch(Eigen::MatrixXd::Zero(4, 2)), deepcal::DimensionMismatch);
}

TEST_CASE("batch and single-sample forward passes agree") {
  const auto net = Small(4, 2);
  const auto x = RandomInputs(30, 4, 3, -2, 3);
  const auto y = net.ForwardBatch(x);
  for (int i = 0; i < 30; ++i) {
    const std::vector<double> row(x.row(i).data(), x.row(i).data() + 0);
    std::vector<double> v(4);
    for (int j = 0; j < 4; ++j) v[j] = x(i, j);
    CHECK(y(i) == doctest::Approx(net.Forward(v)).epsilon(1e-14));
  }
}

TEST_CASE("parameter Jacobian matches central differences") {
  auto net = Small(3, 4);
  const auto x = RandomInputs(5, 3, 5, -2, 3);
  const auto jac = net.Jacobian(x);
  const Eigen::VectorXd p0 = net.Parameters();
  REQUIRE(jac.cols() == static_cast<Eigen::Index>(p0.size()));
  const double h = 1e-6;
  for (Eigen::Index k = 0; k < p0.size(); ++k) {
    Eigen::VectorXd p = p0;
    p(k) += h;
    net.SetParameters(p);
    const auto up = net.ForwardBatch(x);
    p(k) -= 2 * h;
    net.SetParameters(p);
    const auto down = net.ForwardBatch(x);
    const Eigen::VectorXd fd = (up - down) / (2 * h);
    for (int i = 0; i < x.rows(); ++i) REQUIRE(jac(i, k) == doctest::Approx(fd(i)).epsilon(1e-6).scale(1.0));
  }
  net.SetParameters(p0);
  CHECK(net.Parameters() == p0);
}

TEST_CASE("duplicate samples give identical Jacobian rows") {
  const auto net = Small(3, 5);
  Eigen::MatrixXd x = RandomInputs(4, 3, 6, -2, 3);
  x.row(3) = x.row(1);
  const auto jac = net.Jacobian(x);
  CHECK(jac.row(3) == jac.row(1));
}

TEST_CASE("gradient vanishes when the targets are the outputs") {
  const auto net = Small(3, 6);
  const auto x = RandomInputs(40, 3, 7, -2, 3);
  const Eigen::VectorXd y = net.ForwardBatch(x);
  CHECK(fnn::MeanSquaredError(net, x, y) < 1e-30);
  CHECK(fnn::MseGradient(net, x, y).norm() < 1e-14);
}

TEST_CASE("gradient matches differences of the loss") {
  auto net = Small(2, 8);
  const auto x = RandomInputs(25, 2, 9, -2, 3);
  const Eigen::VectorXd y = x.col(0).array().sin();
  const auto g = fnn::MseGradient(net, x, y);
  const Eigen::VectorXd p0 = net.Parameters();
  for (Eigen::Index k = 0; k < p0.size(); k += 3) {
    Eigen::VectorXd p = p0;
    p(k) += 1e-6;
    net.SetParameters(p);
    const double up = fnn::MeanSquaredError(net, x, y);
    p(k) -= 2e-6;
    net.SetParameters(p);
    const double down = fnn::MeanSquaredError(net, x, y);
    CHECK(g(k) == doctest::Approx((up - down) / 2e-6).epsilon(1e-5).scale(1.0));
  }
}

TEST_CASE("duplicating every row leaves the loss and the scaled step unchanged") {
  const auto net = Small(3, 10);
  const auto x = RandomInputs(20, 3, 11, -2, 3);
  const Eigen::VectorXd y = x.col(1).array().square();
  Eigen::MatrixXd x2(40, 3);
  x2 << x, x;
  Eigen::VectorXd y2(40);
  y2 << y, y;
  CHECK(fnn::MeanSquaredError(net, x2, y2) == doctest::Approx(fnn::MeanSquaredError(net, x, y)).epsilon(1e-13));
  CHECK((fnn::MseGradient(net, x2, y2) - fnn::MseGradient(net, x, y)).norm() < 1e-12);
  const auto a = fnn::LmStep(net, x, y, 0.01);
  const auto b = fnn::LmStep(net, x2, y2, 0.02);
  CHECK((a - b).norm() < 1e-8 * (1.0 + a.norm()));
}

TEST_CASE("heavily damped step points down the gradient") {
  const auto net = Small(3, 12);
  const auto x = RandomInputs(60, 3, 13, -2, 3);
  const Eigen::VectorXd y = x.col(2).array().cos();
  const auto g = fnn::MseGradient(net, x, y);
  const auto step = fnn::LmStep(net, x, y, 1e8);
  const double cosine = -step.dot(g) / (step.norm() * g.norm());
  CHECK(cosine > 0.9999);
  CHECK((step * 1e8 + 30.0 * g).norm() < 1e-3 * (30.0 * g.norm()));
}

TEST_CASE("student network learns a teacher network") {
  fnn::Network teacher({3, 5, 1}, {-1, -1, -1}, {1, 1, 1});
  teacher.Initialize(deepcal::DeriveSeed(21, deepcal::SeedPurpose::kWeightInit));
  const auto x = RandomInputs(50, 3, 22, -1, 1);
  const Eigen::VectorXd y = teacher.ForwardBatch(x);
  fnn::Network student({3, 20, 20, 20, 1}, {-1, -1, -1}, {1, 1, 1});
  student.Initialize(deepcal::DeriveSeed(23, deepcal::SeedPurpose::kWeightInit));
  fnn::TrainOptions opts;
  opts.max_epochs = 200;
  const auto r = fnn::TrainLm(student, x, y, opts);
  CHECK(r.best_mse < 1e-4);
  CHECK(r.trace.size() <= 201);
  for (std::size_t e = 1; e < r.trace.size(); ++e) CHECK(r.trace[e] <= r.trace[e - 1]);
  CHECK(fnn::MeanSquaredError(r.network, x, y) == doctest::Approx(r.best_mse).epsilon(1e-12));
}

TEST_CASE("one-dimensional parabola is fitted") {
  Eigen::MatrixXd x(100, 1);
  for (int i = 0; i < 100; ++i) x(i, 0) = -1.0 + 2.0 * i / 99.0;
  const Eigen::VectorXd y = x.col(0).array().square();
  fnn::Network net({1, 20, 20, 20, 1}, {-1}, {1});
  net.Initialize(deepcal::DeriveSeed(3, deepcal::SeedPurpose::kWeightInit));
  fnn::TrainOptions opts;
  opts.max_epochs = 300;
  const auto r = fnn::TrainLm(net, x, y, opts);
  CHECK(r.best_mse < 1e-5);
}

TEST_CASE("max epochs is honored and zero epochs returns the initial network") {
  const auto net = Small(2, 30);
  const auto x = RandomInputs(50, 2, 31, -2, 3);
  const Eigen::VectorXd y = x.col(0).array() * x.col(1).array();
  fnn::TrainOptions opts;
  opts.max_epochs = 3;
  int calls = 0;
  opts.on_epoch = [&](int, double, double) { ++calls; };
  const auto r = fnn::TrainLm(net, x, y, opts);
  CHECK(r.trace.size() == 4);
  CHECK(calls == 3);
  CHECK(r.stop == fnn::StopReason::kMaxEpochs);
  opts.max_epochs = 0;
  const auto z = fnn::TrainLm(net, x, y, opts);
  CHECK(z.trace.size() == 1);
  CHECK(z.network.Parameters() == net.Parameters());
  opts.max_epochs = -1;
  CHECK_THROWS_AS(fnn::TrainLm(net, x, y, opts), deepcal::InvalidParams);
}

TEST_CASE("training is deterministic across thread counts") {
  const auto net = Small(3, 40);
  const auto x = RandomInputs(700, 3, 41, -2, 3);
  const Eigen::VectorXd y = (x.col(0).array() * 0.5).exp();
  fnn::TrainOptions opts;
  opts.max_epochs = 10;
  deepcal::SetThreadCount(1);
  const auto a = fnn::TrainLm(net, x, y, opts);
  deepcal::SetThreadCount(4);
  const auto b = fnn::TrainLm(net, x, y, opts);
  deepcal::SetThreadCount(0);
  CHECK(a.trace == b.trace);
  CHECK(a.network.Parameters() == b.network.Parameters());
}

TEST_CASE("non-finite targets raise NumericFailure") {
  const auto net = Small(2, 50);
  const auto x = RandomInputs(10, 2, 51, -2, 3);
  Eigen::VectorXd y = Eigen::VectorXd::Zero(10);
  y(3) = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(fnn::TrainLm(net, x, y), deepcal::NumericFailure);
  CHECK_THROWS_AS(fnn::TrainLm(net, x, Eigen::VectorXd::Zero(9)), deepcal::DimensionMismatch);
}

TEST_CASE("network files round-trip exactly") {
  auto net = fnn::Network::Surrogate(Model::kCts, deepcal::quasirandom::ParameterRanges::Table1());
  net.Initialize(99);
  net.metadata()["kind"] = "put";
  std::stringstream buf;
  fnn::WriteNetwork(buf, net);
  const std::string text = buf.str();
  const auto back = fnn::ReadNetwork(buf);
  CHECK(back.Parameters() == net.Parameters());
  CHECK(back.lower() == net.lower());
  CHECK(back.upper() == net.upper());
  CHECK(back.transforms() == net.transforms());
  CHECK(back.metadata() == net.metadata());
  const auto inputs = deepcal::quasirandom::SampleParameterSpace(
      Model::kCts, 100, deepcal::quasirandom::ParameterRanges::Table1(), 5);
  for (const auto& in : inputs) {
    const auto x = in.ToVector();
    REQUIRE(back.Forward(x) == net.Forward(x));
  }

  SUBCASE("truncated file") {
    std::istringstream cut(text.substr(0, text.size() / 2));
    CHECK_THROWS_AS(fnn::ReadNetwork(cut), deepcal::MalformedFile);
  }
  SUBCASE("missing end marker") {
    std::istringstream cut(text.substr(0, text.rfind("end")));
    CHECK_THROWS_AS(fnn::ReadNetwork(cut), deepcal::MalformedFile);
  }
  SUBCASE("future version") {
    std::string v = text;
    v.replace(0, v.find('\n'), "deepcal-network 2");
    std::istringstream in(v);
    CHECK_THROWS_AS(fnn::ReadNetwork(in), deepcal::UnsupportedVersion);
  }
  SUBCASE("not a network") {
    std::istringstream in("hello\n");
    CHECK_THROWS_AS(fnn::ReadNetwork(in), deepcal::MalformedFile);
  }
}
