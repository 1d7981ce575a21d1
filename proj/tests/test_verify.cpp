#include <gtest/gtest.h>

#include <cmath>

#include "sparse_ae/suite.hpp"
#include "sparse_ae/verify.hpp"

using namespace sparse_ae;

namespace {

EpochRecord record_with(const Vector& mean, const Vector& var) {
    EpochRecord r;
    r.per_unit_mean_a = mean;
    r.per_unit_var_a = var;
    return r;
}

}  // namespace

TEST(FiniteDiff, QuadraticIsExact) {
    const Vector g = finite_diff([](const Vector& t) { return t.squaredNorm(); }, Vector{{1.0, 2.0}});
    EXPECT_NEAR(g[0], 2.0, 2e-9);
    EXPECT_NEAR(g[1], 4.0, 4e-9);
    EXPECT_TRUE(fd_quadratic_check().passed());
}

TEST(FiniteDiff, ConstantObjectiveHasZeroGradient) {
    Rng rng(1);
    ModelParams p = ModelParams::zeros(3, 4);
    p.W = rng.normal_matrix(3, 4);
    const Gradients g = finite_diff_grads([](const ModelParams&) { return 2.5; }, p);
    EXPECT_TRUE(g.dW.isZero(0.0));
    EXPECT_TRUE(g.db_enc.isZero(0.0));
    EXPECT_TRUE(g.db_dec.isZero(0.0));
}

TEST(FiniteDiff, QuadraticInParametersIsExact) {
    Rng rng(2);
    ModelParams p = ModelParams::zeros(3, 2);
    p.W = rng.normal_matrix(3, 2);
    p.b_enc = rng.normal_matrix(3, 1);
    p.b_dec = rng.normal_matrix(2, 1);
    const Gradients g = finite_diff_grads(
        [](const ModelParams& q) { return q.W.squaredNorm() + 3.0 * q.b_enc.squaredNorm() - q.b_dec.sum(); }, p);
    EXPECT_LE((g.dW - 2.0 * p.W).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((g.db_enc - 6.0 * p.b_enc).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((g.db_dec + Vector::Ones(2)).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(FdStep, ScalesWithMagnitude) {
    EXPECT_EQ(fd_step(0.0), 1e-5);
    EXPECT_EQ(fd_step(-0.5), 1e-5);
    EXPECT_EQ(fd_step(200.0), 2e-3);
}

TEST(MaxRelativeError, ZeroForIdenticalGradients) {
    Rng rng(3);
    Gradients g;
    g.dW = rng.normal_matrix(2, 2);
    g.db_enc = rng.normal_matrix(2, 1);
    g.db_dec = rng.normal_matrix(2, 1);
    EXPECT_EQ(max_relative_error(g, g), 0.0);
    Gradients h = g;
    h.dW(0, 0) *= 1.5;
    EXPECT_GT(max_relative_error(g, h), 0.1);
}

TEST(NumericJacobian, ReluIdentityRows) {
    ModelParams p = ModelParams::zeros(3, 3);
    p.W = Matrix::Identity(3, 3);
    const Vector x{{1.0, -2.0, 0.5}};
    const Matrix j = numeric_encoder_jacobian(x, p, ActivationKind::of(ActivationTag::ReLU));
    Matrix expect = Matrix::Zero(3, 3);
    expect(0, 0) = 1.0;
    expect(2, 2) = 1.0;
    EXPECT_LE((j - expect).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(NumericJacobian, SigmoidExample) {
    ModelParams p = ModelParams::zeros(1, 2);
    p.W(0, 0) = 1.0;
    const Matrix j = numeric_encoder_jacobian(Vector::Zero(2), p, ActivationKind::of(ActivationTag::Sigmoid));
    EXPECT_NEAR(j(0, 0), 0.25, 1e-10);
    EXPECT_NEAR(j(0, 1), 0.0, 1e-15);
}

TEST(NumericJacobian, RejectsBadArguments) {
    const ModelParams p = ModelParams::zeros(1, 2);
    EXPECT_THROW(numeric_encoder_jacobian(Vector::Zero(3), p, ActivationKind::of(ActivationTag::ReLU)),
                 std::invalid_argument);
    EXPECT_THROW(numeric_encoder_jacobian(Vector::Zero(2), p, ActivationKind::of(ActivationTag::ReLU), 0.0),
                 std::invalid_argument);
}

TEST(CheckReport, JudgeAndJson) {
    const CheckReport ok = CheckReport::judge("x", 1e-7, 1e-6, "d");
    EXPECT_TRUE(ok.passed());
    EXPECT_FALSE(CheckReport::judge("x", 2e-6, 1e-6, "d").passed());
    EXPECT_FALSE(CheckReport::judge("x", std::nan(""), 1e-6, "d").passed());
    const auto j = nlohmann::json::parse(ok.to_json_line());
    EXPECT_EQ(j["name"], "x");
    EXPECT_EQ(j["status"], "pass");
    EXPECT_EQ(j["passed"], true);
    EXPECT_EQ(ok.to_json_line().find('\n'), std::string::npos);
}

TEST(GradientCheck, ReportIsReproducible) {
    ObjectiveSpec spec{ObjectiveKind::DAE, 0.1};
    spec.dae_samples = 2;
    GradientCheckOptions opt;
    opt.instances = 10;
    Rng a(4), b(4);
    const CheckReport ra = gradient_check(spec, ActivationKind::of(ActivationTag::Tanh), a, opt);
    const CheckReport rb = gradient_check(spec, ActivationKind::of(ActivationTag::Tanh), b, opt);
    EXPECT_EQ(ra.max_rel_error, rb.max_rel_error);
    EXPECT_EQ(ra.details, rb.details);
    EXPECT_TRUE(ra.passed()) << ra.to_json_line();
}

TEST(GradientCheck, DetectsWrongGradient) {
    // The check is only useful if it fails on a broken gradient: compare AE gradients against a perturbed FD.
    Rng rng(5);
    const Instance inst = random_instance(5, 4, 3, rng);
    const ActivationKind k = ActivationKind::of(ActivationTag::Sigmoid);
    const Gradients g = ae_grads(inst.batch, inst.params, k, forward(inst.batch, inst.params, k));
    const Matrix batch = inst.batch;
    const Gradients fd = finite_diff_grads(
        [&](const ModelParams& p) { return 1.001 * ae_loss(forward(batch, p, k)); }, inst.params);
    EXPECT_GT(max_relative_error(g, fd), 1e-6);
}

TEST(McDae, ZeroSigmaHasZeroResidual) {
    Rng rng(6);
    const Instance inst = random_instance(4, 3, 2, rng);
    const ActivationKind k = ActivationKind::of(ActivationTag::Sigmoid);
    const CheckReport r = mc_dae_check(inst.batch, inst.params, k, {0.0}, 10000, rng);
    EXPECT_NE(r.details.find("residual=0 "), std::string::npos) << r.details;
    const Matrix noise = corruption_block(2, 4, 10, rng, NoiseScheme::IID);
    const double clean = ae_loss(forward(inst.batch, inst.params, k));
    EXPECT_NEAR(mc_dae_value(inst.batch, inst.params, k, 0.0, noise).value, clean, 1e-12 * clean);
}

TEST(McDae, MomentMatchedNoiseHasExactSecondMoments) {
    Rng rng(7);
    const Matrix z = corruption_block(3, 4, 20, rng, NoiseScheme::MomentMatched);
    for (Eigen::Index s = 0; s < 3; ++s) {
        const Matrix block = z.middleRows(s * 20, 20);
        EXPECT_LE(block.colwise().mean().cwiseAbs().maxCoeff(), 1e-15);
        const Matrix second = block.transpose() * block / 20.0;
        EXPECT_LE((second - Matrix::Identity(4, 4)).cwiseAbs().maxCoeff(), 1e-12);
    }
    EXPECT_THROW(corruption_block(1, 4, 7, rng, NoiseScheme::MomentMatched), std::invalid_argument);
}

TEST(McDae, SigmoidResidualShrinksWithSigma) {
    Rng rng(8);
    const Instance inst = mc_instance(ActivationTag::Sigmoid, 0.05, rng);
    const CheckReport r =
        mc_dae_check(inst.batch, inst.params, ActivationKind::of(ActivationTag::Sigmoid), {0.05, 0.025}, 20000, rng);
    EXPECT_TRUE(r.passed()) << r.to_json_line();
}

TEST(McDae, ReluOffKinkAgreesWithinStandardError) {
    Rng rng(9);
    const Instance inst = mc_instance(ActivationTag::ReLU, 0.05, rng);
    const CheckReport r =
        mc_dae_agreement(inst.batch, inst.params, ActivationKind::of(ActivationTag::ReLU), {0.05, 0.025}, 20000, rng);
    EXPECT_TRUE(r.passed()) << r.to_json_line();
}

TEST(McDae, RejectsSmallKAndUnsortedSigmas) {
    Rng rng(10);
    const Instance inst = random_instance(3, 2, 2, rng);
    const ActivationKind k = ActivationKind::of(ActivationTag::Sigmoid);
    EXPECT_THROW(mc_dae_check(inst.batch, inst.params, k, {0.05}, 100, rng), std::invalid_argument);
    EXPECT_THROW(mc_dae_check(inst.batch, inst.params, k, {0.025, 0.05}, 10000, rng), std::invalid_argument);
}

TEST(Whitening, DeviationOfIdentityDesign) {
    Matrix x(4, 2);
    x << 1, 1, -1, 1, 1, -1, -1, -1;
    const WhiteningDeviation d = whitening_deviation(x);
    EXPECT_EQ(d.max_abs_mean, 0.0);
    EXPECT_EQ(d.max_abs_cov_dev, 0.0);
}

TEST(BiasDescent, ZeroCoefficientIsInconclusive) {
    Rng rng(11);
    const Dataset d = synth_whitened_gaussian(8, 400, rng);
    TrainConfig c = certificate_config(11, 0.0);
    c.hidden_units = 6;
    const DescentCertificate r = certify_bias_descent(c, d, 5);
    EXPECT_EQ(r.report.status, CheckStatus::Inconclusive) << r.report.details;
}

TEST(BiasDescent, ContractiveReluIsInconclusive) {
    Rng rng(12);
    const Dataset d = synth_whitened_gaussian(8, 400, rng);
    TrainConfig c = certificate_config(12, 1e6);
    c.hidden_units = 6;
    c.objective.kind = ObjectiveKind::CAE;
    c.activation = ActivationKind::of(ActivationTag::ReLU);
    const DescentCertificate r = certify_bias_descent(c, d, 5);
    EXPECT_EQ(r.report.status, CheckStatus::Inconclusive) << r.report.details;
}

TEST(BiasDescent, LargeCoefficientPasses) {
    const std::vector<CheckReport> reports = certificate_checks(13, 50);
    ASSERT_EQ(reports.size(), 3u);
    for (const CheckReport& r : reports) EXPECT_TRUE(r.passed()) << r.to_json_line();
}

TEST(BiasDescent, TraceShapes) {
    Rng rng(14);
    const Dataset d = synth_whitened_gaussian(8, 400, rng);
    TrainConfig c = certificate_config(14);
    c.hidden_units = 5;
    const DescentCertificate r = certify_bias_descent(c, d, 7);
    EXPECT_EQ(r.trace.trajectory.records.size(), 8u);
    ASSERT_EQ(r.trace.hypothesis.size(), 7u);
    EXPECT_EQ(r.trace.hypothesis[0].size(), 5u);
    EXPECT_EQ(r.trace.decreased.size(), 7u);
}

TEST(BiasDescent, RejectsUnsupportedConfigs) {
    Rng rng(15);
    const Dataset d = synth_whitened_gaussian(4, 50, rng);
    TrainConfig c = certificate_config(15);
    c.hidden_units = 3;
    c.constraint = ConstraintKind::none();
    EXPECT_THROW(certify_bias_descent(c, d, 2), std::invalid_argument);
    c.constraint = ConstraintKind::unit_norm();
    c.objective.kind = ObjectiveKind::AE;
    EXPECT_THROW(certify_bias_descent(c, d, 2), std::invalid_argument);
}

TEST(BiasDescent, ReproducibleReports) {
    Rng a(16), b(16);
    const Dataset da = synth_whitened_gaussian(8, 300, a), db = synth_whitened_gaussian(8, 300, b);
    TrainConfig c = certificate_config(16);
    c.hidden_units = 4;
    const DescentCertificate ra = certify_bias_descent(c, da, 5), rb = certify_bias_descent(c, db, 5);
    EXPECT_EQ(ra.report.to_json_line(), rb.report.to_json_line());
}

TEST(ChebyshevMonotone, ConstantHistoryPasses) {
    TrainHistory h;
    for (int e = 0; e < 4; ++e) h.records.push_back(record_with(Vector{{-3.0, -1.0}}, Vector{{1.0, 0.5}}));
    const CheckReport r = certify_chebyshev_monotone(h, ActivationKind::of(ActivationTag::ReLU), 0.0);
    EXPECT_TRUE(r.passed()) << r.details;
}

TEST(ChebyshevMonotone, DecreasingMeanPasses) {
    TrainHistory h;
    for (int e = 0; e < 5; ++e)
        h.records.push_back(record_with(Vector{{-1.0 - e, -2.0 - 0.5 * e}}, Vector{{0.5, 0.5}}));
    EXPECT_TRUE(certify_chebyshev_monotone(h, ActivationKind::of(ActivationTag::Sigmoid), 0.1).passed());
}

TEST(ChebyshevMonotone, IncreasingMeanFails) {
    TrainHistory h;
    for (int e = 0; e < 5; ++e) h.records.push_back(record_with(Vector{{-5.0 + e}}, Vector{{0.5}}));
    EXPECT_EQ(certify_chebyshev_monotone(h, ActivationKind::of(ActivationTag::ReLU), 0.0).status, CheckStatus::Fail);
}

TEST(ChebyshevMonotone, NoApplicableUnitsIsInconclusive) {
    TrainHistory h;
    for (int e = 0; e < 3; ++e) h.records.push_back(record_with(Vector{{1.0}}, Vector{{0.5}}));
    EXPECT_EQ(certify_chebyshev_monotone(h, ActivationKind::of(ActivationTag::ReLU), 0.0).status,
              CheckStatus::Inconclusive);
    EXPECT_EQ(certify_chebyshev_monotone(TrainHistory{}, ActivationKind::of(ActivationTag::ReLU), 0.0).status,
              CheckStatus::Inconclusive);
}

TEST(ChebyshevMonotone, StepMaskRestrictsTransitions) {
    TrainHistory h;
    for (double m : {-5.0, -4.0, -6.0}) h.records.push_back(record_with(Vector{{m}}, Vector{{0.5}}));
    const ActivationKind k = ActivationKind::of(ActivationTag::ReLU);
    EXPECT_FALSE(certify_chebyshev_monotone(h, k, 0.0).passed());
    EXPECT_TRUE(certify_chebyshev_monotone(h, k, 0.0, {false, true}).passed());
}

TEST(Suite, QuickScalePassesAndIsIdempotent) {
    std::vector<std::string> lines;
    const auto reports = run_verification_suite(SuiteScale::Quick, 2024);
    for (const auto& r : reports) {
        EXPECT_TRUE(r.passed()) << r.to_json_line();
        lines.push_back(r.to_json_line());
    }
    std::vector<std::string> again;
    for (const auto& r : run_verification_suite(SuiteScale::Quick, 2024)) again.push_back(r.to_json_line());
    EXPECT_EQ(lines, again);
}

TEST(Suite, ParseScale) {
    EXPECT_EQ(parse_suite_scale("quick"), SuiteScale::Quick);
    EXPECT_EQ(parse_suite_scale("full"), SuiteScale::Full);
    EXPECT_THROW(parse_suite_scale("medium"), std::invalid_argument);
}
