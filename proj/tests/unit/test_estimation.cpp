// SPDX-License-Identifier: Apache-2.0
//
// dsim: double-SIM massive MIMO uplink modelling and phase-shift optimization
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#include "test_support.hpp"

#include <gtest/gtest.h>

#include <cmath>

using namespace dsim;
using namespace dsim::testing;

TEST(Pilots, ScaledDftColumnsAreOrthogonal)
{
    for (int tau : {2, 4, 7})
    {
        const PilotConfig p = make_pilots(tau, tau, 3.0);
        EXPECT_NO_THROW(p.validate());
        const CMatrix gram = p.pilots.adjoint() * p.pilots;
        EXPECT_LE((gram - 3.0 * tau * CMatrix::Identity(tau, tau)).norm(), 1e-12 * tau);
    }
    EXPECT_THROW(make_pilots(2, 3, 1.0), ContractViolation);
}

TEST(Pilots, ValidateRejectsNonOrthogonal)
{
    PilotConfig p = make_pilots(3, 2, 1.0);
    p.pilots(1, 1) = p.pilots(1, 0);
    EXPECT_THROW(p.validate(), ContractViolation);
}

TEST(PilotRx, NoiselessDespreadingRecoversChannel)
{
    const PilotConfig p = make_pilots(4, 3, 2.5);
    std::vector<CVector> c;
    for (int k = 0; k < 3; ++k)
        c.push_back(random_complex(6, 1, 30 + k));
    ConstantSampler zero;
    const std::vector<CVector> r = simulate_pilot_rx(c, p, zero);
    for (int k = 0; k < 3; ++k)
        EXPECT_LE((r[k] - c[k]).norm(), 1e-12 * c[k].norm());
}

TEST(PilotRx, NoiseOnlyEnergy)
{
    const int tau = 4, n = 8, draws = 20000;
    const double rho = 2.0;
    const PilotConfig p = make_pilots(tau, 2, rho);
    std::vector<CVector> c(2, CVector::Zero(n));
    std::mt19937_64 eng = make_stream(31, 0);
    ComplexGaussian g(eng);
    double energy = 0.0;
    for (int t = 0; t < draws; ++t)
        energy += simulate_pilot_rx(c, p, g)[0].squaredNorm();
    energy /= draws;
    const double expect = n / (tau * rho);
    EXPECT_NEAR(energy / expect, 1.0, 0.05);
}

TEST(Lmmse, HalfShrinkageExample)
{
    const CMatrix r_hat = CMatrix::Identity(3, 3);
    const EffectiveCovariance e = effective_covariance(r_hat, CMatrix::Identity(3, 3), 1.0);
    const EstimateCovariances c = estimate_covariances(e.r_hat, e.q);
    EXPECT_LE((c.psi - 0.5 * CMatrix::Identity(3, 3)).norm(), 1e-14);
    EXPECT_LE((c.psi_tilde - 0.5 * CMatrix::Identity(3, 3)).norm(), 1e-14);
    EXPECT_NEAR(nmse(c.psi, e.r_hat), 0.5, 1e-14);
    CVector r(3);
    r << 2.0, cdouble(0.0, 4.0), -1.0;
    EXPECT_LE((lmmse_estimate(r, e.r_hat, e.q) - 0.5 * r).norm(), 1e-14);
}

TEST(Lmmse, SnrLimits)
{
    const CMatrix r_hat = random_psd(4, 32);
    auto psi_at = [&](double tau_rho) {
        const EffectiveCovariance e = effective_covariance(r_hat, CMatrix::Identity(4, 4), tau_rho);
        return estimate_covariances(e.r_hat, e.q).psi;
    };
    EXPECT_LE(relative_frobenius_error(psi_at(1e9), r_hat), 1e-6);
    EXPECT_LE(psi_at(1e-9).norm(), 1e-6 * r_hat.norm());
}

TEST(Lmmse, ErrorAndEstimateSplitCovariance)
{
    const CMatrix r_hat = random_psd(5, 33);
    const EffectiveCovariance e = effective_covariance(r_hat, CMatrix::Identity(5, 5), 0.7);
    const EstimateCovariances c = estimate_covariances(e.r_hat, e.q);
    EXPECT_LE(relative_frobenius_error(CMatrix(c.psi + c.psi_tilde), r_hat), 1e-12);
    Eigen::SelfAdjointEigenSolver<CMatrix> es(c.psi_tilde);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-10 * r_hat.norm());
}

TEST(Nmse, UndefinedForZeroCovariance)
{
    EXPECT_THROW(nmse(CMatrix::Zero(2, 2), CMatrix::Zero(2, 2)), UndefinedMetric);
}

TEST(Nmse, DecreasesWithSnr)
{
    const CMatrix r_hat = random_psd(4, 34);
    double prev = 1.0;
    for (double db = -10.0; db <= 30.0; db += 5.0)
    {
        const EffectiveCovariance e = effective_covariance(r_hat, CMatrix::Identity(4, 4), db_to_linear(db));
        const double v = nmse(estimate_covariances(e.r_hat, e.q).psi, e.r_hat);
        EXPECT_LT(v, prev);
        EXPECT_GT(v, 0.0);
        prev = v;
    }
}

TEST(Lmmse, MonteCarloMatchesPredictedCovariances)
{
    const Scenario sc = build_scenario(small_config());
    std::mt19937_64 eng(35);
    const PhaseProfile p = PhaseProfile::random(2, 9, 2, 9, eng);
    const ProfileStatistics st = evaluate_statistics(sc, p);
    const std::vector<EstimationSample> mc = monte_carlo_estimation(sc, p, 40000, 36);
    for (int k = 0; k < sc.users(); ++k)
    {
        const EstimateCovariances pred = estimate_covariances(st.r_hat[k], st.q[k]);
        EXPECT_LE(relative_frobenius_error(mc[k].estimate_cov, pred.psi), 0.04);
        EXPECT_LE(relative_frobenius_error(mc[k].error_cov, pred.psi_tilde), 0.04);
        EXPECT_LE(mc[k].cross_cov.norm() / pred.psi.norm(), 0.04);
        EXPECT_NEAR(mc[k].nmse / nmse(pred.psi, st.r_hat[k]), 1.0, 0.04);
    }
}
