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

#ifndef DSIM_CORE_HPP
#define DSIM_CORE_HPP

#include <Eigen/Dense>

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace dsim
{
    using cdouble = std::complex<double>;
    using CMatrix = Eigen::MatrixXcd;
    using CVector = Eigen::VectorXcd;
    using RMatrix = Eigen::MatrixXd;
    using RVector = Eigen::VectorXd;

    inline constexpr double pi = std::numbers::pi;
    inline constexpr cdouble j_unit{0.0, 1.0};
    inline constexpr double speed_of_light = 299792458.0;

    // Precondition broken by the caller (bad index, mismatched dimensions, ...)
    class ContractViolation : public std::invalid_argument
    {
    public:
        using std::invalid_argument::invalid_argument;
    };

    // Input is structurally valid but numerically unusable
    class InvalidInput : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // A metric that has no defined value for the given input (e.g. NMSE with zero prior energy)
    class UndefinedMetric : public std::domain_error
    {
    public:
        using std::domain_error::domain_error;
    };

    inline void require(bool condition, const std::string &what)
    {
        if (!condition)
            throw ContractViolation(what);
    }

    inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }

    // Real part of the trace of A * B without forming the product.
    template <typename A, typename B>
    double trace_product_real(const A &a, const B &b)
    {
        return std::real((a.array() * b.transpose().array()).sum());
    }

    template <typename A>
    double trace_real(const A &a)
    {
        return std::real(a.trace());
    }

    // Relative Frobenius error |a - b| / |b|.
    template <typename A, typename B>
    double relative_frobenius_error(const A &a, const B &b)
    {
        const double denom = b.norm();
        return denom > 0.0 ? (a - b).norm() / denom : (a - b).norm();
    }

    // (A + A^H) / 2
    inline CMatrix hermitian_part(const CMatrix &a) { return 0.5 * (a + a.adjoint()); }

} // namespace dsim

#endif // DSIM_CORE_HPP
