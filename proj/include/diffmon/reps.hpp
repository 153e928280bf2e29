// Copyright 2026 The diffmon Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <string>
#include <vector>

#include "diffmon/error.hpp"
#include "diffmon/linalg.hpp"

namespace diffmon {

/// Per-channel detection efficiencies, each in [0, 1].
using EfficiencyVector = RealVector;

/// L x 2L complex measurement matrix with M M^dag = hbar diag(eta).
struct MRep {
    double hbar = 1.0;
    ComplexMatrix matrix;
    Eigen::Index channels() const { return matrix.rows(); }
};

/// 2L x 2L real matrix stacking Re M over Im M.
struct TRep {
    double hbar = 1.0;
    RealMatrix matrix;
    Eigen::Index channels() const { return matrix.rows() / 2; }
};

/// 2L x 2L real matrix U = T T^T / hbar.
struct URep {
    double hbar = 1.0;
    RealMatrix matrix;
    Eigen::Index channels() const { return matrix.rows() / 2; }
};

/// Physical realization: efficiencies, interferometer unitary, splitting ratios.
struct BRep {
    RealVector eta;
    ComplexMatrix s;
    RealVector theta;
    Eigen::Index channels() const { return eta.size(); }
};

struct OrthoMatrix {
    RealMatrix matrix;
    int det_sign = 1;
};

namespace detail {

inline double clamp_unit(double x) { return std::min(1.0, std::max(0.0, x)); }

inline void require_positive_hbar(double hbar) {
    if (!(hbar > 0.0) || !std::isfinite(hbar)) {
        throw Error(ErrorCode::ParameterOutOfRange, "hbar must be positive and finite");
    }
}

inline std::string index_name(const char* field, Eigen::Index k) {
    return std::string(field) + "[" + std::to_string(k) + "]";
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Validation

/// Returns eta when M M^dag / hbar is diagonal with entries in [0, 1].
///
/// The tolerance is relative to max(1, |M M^dag / hbar|_F). Diagonal entries
/// within tol of the unit interval are clamped into it.
inline EfficiencyVector validate_mrep(const ComplexMatrix& m, double hbar,
                                      double tol = kDefaultTol) {
    detail::require_positive_hbar(hbar);
    const Eigen::Index l = m.rows();
    if (l < 1 || m.cols() != 2 * l) {
        throw Error(ErrorCode::DimensionMismatch, "M must be L x 2L with L >= 1, got " +
                                                      std::to_string(m.rows()) + " x " +
                                                      std::to_string(m.cols()));
    }
    if (!m.allFinite()) throw Error(ErrorCode::InvalidArgument, "M has non-finite entries");
    const ComplexMatrix g = m * m.adjoint() / hbar;
    const double scale = std::max(1.0, g.norm());
    for (Eigen::Index i = 0; i < l; ++i) {
        for (Eigen::Index j = 0; j < l; ++j) {
            if (i != j && std::abs(g(i, j)) > tol * scale) {
                throw Error(ErrorCode::OffDiagonal,
                            "M M^dag has off-diagonal entry (" + std::to_string(i) + "," +
                                std::to_string(j) + ") = " + std::to_string(std::abs(g(i, j))));
            }
        }
    }
    EfficiencyVector eta(l);
    for (Eigen::Index k = 0; k < l; ++k) {
        const double e = g(k, k).real();
        if (e < -tol * scale || e > 1.0 + tol * scale) {
            throw Error(ErrorCode::EfficiencyOutOfRange,
                        detail::index_name("eta", k) + " = " + std::to_string(e) +
                            " outside [0,1]");
        }
        eta(k) = detail::clamp_unit(e);
    }
    return eta;
}

inline EfficiencyVector validate_mrep(const MRep& m, double tol = kDefaultTol) {
    return validate_mrep(m.matrix, m.hbar, tol);
}

/// Returns eta = diag(U11 + U22) when U is PSD, U11 + U22 is diagonal with
/// entries in [0, 1], and U12 = U21.
inline EfficiencyVector validate_urep(const RealMatrix& u, double hbar,
                                      double tol = kDefaultTol) {
    detail::require_positive_hbar(hbar);
    const Eigen::Index n = u.rows();
    if (n < 2 || n % 2 != 0 || u.cols() != n) {
        throw Error(ErrorCode::DimensionMismatch, "U must be 2L x 2L with L >= 1");
    }
    if (!u.allFinite()) throw Error(ErrorCode::InvalidArgument, "U has non-finite entries");
    const Eigen::Index l = n / 2;
    const double scale = std::max(1.0, u.norm());
    if ((u - u.transpose()).norm() > tol * scale) {
        throw Error(ErrorCode::NotPSD, "U is not symmetric");
    }
    const double lmin = linalg::min_eigenvalue(u);
    if (lmin < -tol * scale) {
        throw Error(ErrorCode::NotPSD, "U has eigenvalue " + std::to_string(lmin));
    }
    const RealMatrix sum = u.topLeftCorner(l, l) + u.bottomRightCorner(l, l);
    for (Eigen::Index i = 0; i < l; ++i) {
        for (Eigen::Index j = 0; j < l; ++j) {
            if (i != j && std::abs(sum(i, j)) > tol * scale) {
                throw Error(ErrorCode::SumNotInH, "U11 + U22 is not diagonal");
            }
        }
    }
    EfficiencyVector eta(l);
    for (Eigen::Index k = 0; k < l; ++k) {
        const double e = sum(k, k);
        if (e < -tol * scale || e > 1.0 + tol * scale) {
            throw Error(ErrorCode::SumNotInH, detail::index_name("eta", k) + " = " +
                                                  std::to_string(e) + " outside [0,1]");
        }
        eta(k) = detail::clamp_unit(e);
    }
    if ((u.topRightCorner(l, l) - u.bottomLeftCorner(l, l)).norm() > tol * scale) {
        throw Error(ErrorCode::OffBlockAsymmetric, "U12 differs from U21");
    }
    return eta;
}

inline EfficiencyVector validate_urep(const URep& u, double tol = kDefaultTol) {
    return validate_urep(u.matrix, u.hbar, tol);
}

inline void validate_brep(const BRep& b, double tol = kDefaultTol) {
    const Eigen::Index l = b.eta.size();
    if (l < 1 || b.theta.size() != l || b.s.rows() != l || b.s.cols() != l) {
        throw Error(ErrorCode::DimensionMismatch,
                    "B-rep needs eta, theta of length L and an L x L unitary S");
    }
    for (Eigen::Index k = 0; k < l; ++k) {
        if (!(b.eta(k) >= 0.0 && b.eta(k) <= 1.0)) {
            throw Error(ErrorCode::EfficiencyOutOfRange,
                        detail::index_name("eta", k) + " = " + std::to_string(b.eta(k)) +
                            " outside [0,1]");
        }
        if (!(b.theta(k) >= 0.0 && b.theta(k) <= 1.0)) {
            throw Error(ErrorCode::ParameterOutOfRange,
                        detail::index_name("theta", k) + " = " + std::to_string(b.theta(k)) +
                            " outside [0,1]");
        }
    }
    if (!linalg::is_unitary(b.s, tol)) throw Error(ErrorCode::NotUnitary, "S is not unitary");
}

inline OrthoMatrix make_ortho(const RealMatrix& o, double tol = kDefaultTol) {
    if (o.rows() != o.cols() || o.rows() == 0) {
        throw Error(ErrorCode::DimensionMismatch, "O must be square and non-empty");
    }
    const RealMatrix id = RealMatrix::Identity(o.rows(), o.cols());
    if ((o.transpose() * o - id).norm() > tol * std::max(1.0, std::sqrt(double(o.rows())))) {
        throw Error(ErrorCode::NotOrthogonal, "O^T O differs from identity");
    }
    return OrthoMatrix{o, o.determinant() < 0.0 ? -1 : 1};
}

// ---------------------------------------------------------------------------
// Conversions

inline TRep mrep_to_trep(const MRep& m) {
    const Eigen::Index l = m.matrix.rows();
    TRep t{m.hbar, RealMatrix(2 * l, m.matrix.cols())};
    t.matrix.topRows(l) = m.matrix.real();
    t.matrix.bottomRows(l) = m.matrix.imag();
    return t;
}

inline MRep trep_to_mrep(const TRep& t) {
    const Eigen::Index l = t.matrix.rows() / 2;
    if (t.matrix.rows() != 2 * l || t.matrix.cols() != 2 * l || l < 1) {
        throw Error(ErrorCode::DimensionMismatch, "T must be 2L x 2L");
    }
    MRep m{t.hbar, ComplexMatrix(l, 2 * l)};
    m.matrix.real() = t.matrix.topRows(l);
    m.matrix.imag() = t.matrix.bottomRows(l);
    return m;
}

/// T validity is M validity for M = T1 + i T2.
inline EfficiencyVector validate_trep(const TRep& t, double tol = kDefaultTol) {
    return validate_mrep(trep_to_mrep(t), tol);
}

inline URep trep_to_urep(const TRep& t, double tol = kDefaultTol) {
    URep u{t.hbar, t.matrix * t.matrix.transpose() / t.hbar};
    u.matrix = (0.5 * (u.matrix + u.matrix.transpose())).eval();
    try {
        validate_urep(u, tol);
    } catch (const Error& e) {
        throw Error(ErrorCode::InternalInconsistency,
                    std::string("T T^T / hbar failed validation: ") + e.what());
    }
    return u;
}

inline URep mrep_to_urep(const MRep& m, double tol = kDefaultTol) {
    return trep_to_urep(mrep_to_trep(m), tol);
}

struct UrepSplit {
    RealMatrix h;     // U11 + U22, diagonal for valid U
    ComplexMatrix y;  // complex symmetric
    EfficiencyVector eta() const { return h.diagonal(); }
};

inline UrepSplit urep_split(const URep& u) {
    const Eigen::Index l = u.matrix.rows() / 2;
    const auto u11 = u.matrix.topLeftCorner(l, l);
    const auto u12 = u.matrix.topRightCorner(l, l);
    const auto u22 = u.matrix.bottomRightCorner(l, l);
    UrepSplit out;
    out.h = u11 + u22;
    out.y = ComplexMatrix(l, l);
    out.y.real() = u11 - u22;
    out.y.imag() = 2.0 * u12;
    return out;
}

/// Inverse of urep_split: U = 1/2 [[H + Re Y, Im Y], [Im Y, H - Re Y]].
inline URep urep_join(const RealMatrix& h, const ComplexMatrix& y, double hbar = 1.0) {
    const Eigen::Index l = h.rows();
    if (h.cols() != l || y.rows() != l || y.cols() != l) {
        throw Error(ErrorCode::DimensionMismatch, "H and Y must both be L x L");
    }
    URep u{hbar, RealMatrix(2 * l, 2 * l)};
    u.matrix.topLeftCorner(l, l) = 0.5 * (h + y.real());
    u.matrix.topRightCorner(l, l) = 0.5 * y.imag();
    u.matrix.bottomLeftCorner(l, l) = 0.5 * y.imag();
    u.matrix.bottomRightCorner(l, l) = 0.5 * (h - y.real());
    return u;
}

struct TrepPolar {
    RealMatrix root;  // sqrt(T T^T) = sqrt(hbar U)
    OrthoMatrix o;
    bool unique = true;
};

/// T = sqrt(T T^T) O. The orthogonal factor is unique iff T is invertible.
inline TrepPolar trep_polar(const TRep& t, double tol = kDefaultTol) {
    const auto pd = linalg::polar_decompose(t.matrix, tol);
    return TrepPolar{pd.p, OrthoMatrix{pd.o, pd.o.determinant() < 0.0 ? -1 : 1}, pd.unique};
}

/// M = sqrt(hbar H) S^dag (sqrt(Q), -i sqrt(1 - Q)).
inline MRep brep_to_mrep(const BRep& b, double hbar = 1.0, double tol = kDefaultTol) {
    detail::require_positive_hbar(hbar);
    validate_brep(b, tol);
    const Eigen::Index l = b.channels();
    ComplexMatrix right(l, 2 * l);
    right.setZero();
    for (Eigen::Index k = 0; k < l; ++k) {
        right(k, k) = std::sqrt(b.theta(k));
        right(k, l + k) = -kI * std::sqrt(1.0 - b.theta(k));
    }
    const RealVector root_eta = (hbar * b.eta).cwiseSqrt();
    return MRep{hbar, root_eta.asDiagonal() * b.s.adjoint() * right};
}

/// U from the block formulas in terms of Re[S^T] and Im[S^T].
inline URep brep_to_urep(const BRep& b, double hbar = 1.0, double tol = kDefaultTol) {
    detail::require_positive_hbar(hbar);
    validate_brep(b, tol);
    const Eigen::Index l = b.channels();
    const RealMatrix re_st = b.s.transpose().real();
    const RealMatrix im_st = b.s.transpose().imag();
    const RealMatrix re_s = re_st.transpose();
    const RealMatrix im_s = im_st.transpose();
    const RealMatrix q = b.theta.asDiagonal();
    const RealMatrix qbar = (RealVector::Ones(l) - b.theta).asDiagonal();
    const RealMatrix rh = b.eta.cwiseSqrt().asDiagonal();

    URep u{hbar, RealMatrix(2 * l, 2 * l)};
    u.matrix.topLeftCorner(l, l) = rh * (re_st * q * re_s + im_st * qbar * im_s) * rh;
    u.matrix.topRightCorner(l, l) = rh * (-re_st * q * im_s + im_st * qbar * re_s) * rh;
    u.matrix.bottomLeftCorner(l, l) = rh * (-im_st * q * re_s + re_st * qbar * im_s) * rh;
    u.matrix.bottomRightCorner(l, l) = rh * (im_st * q * im_s + re_st * qbar * re_s) * rh;
    return u;
}

inline MRep brep_o_to_mrep(const BRep& b, const OrthoMatrix& o, double hbar = 1.0,
                           double tol = kDefaultTol) {
    const Eigen::Index l = b.channels();
    if (o.matrix.rows() != 2 * l || o.matrix.cols() != 2 * l) {
        throw Error(ErrorCode::DimensionMismatch, "O must be 2L x 2L");
    }
    MRep m = brep_to_mrep(b, hbar, tol);
    m.matrix = m.matrix * o.matrix.cast<cplx>();
    return m;
}

// ---------------------------------------------------------------------------
// Standard measurements and the efficient part

/// Homodyne of channel 1 at local-oscillator phase `phase`: sqrt(hbar eta) e^{-i phase} (1, 0).
inline MRep make_homodyne(double eta, double phase = 0.0, double hbar = 1.0) {
    detail::require_positive_hbar(hbar);
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw Error(ErrorCode::EfficiencyOutOfRange, "eta = " + std::to_string(eta));
    }
    ComplexMatrix m = ComplexMatrix::Zero(1, 2);
    m(0, 0) = std::sqrt(hbar * eta) * std::exp(-kI * phase);
    return MRep{hbar, m};
}

/// Heterodyne: sqrt(hbar eta / 2) (1, i).
inline MRep make_heterodyne(double eta, double hbar = 1.0) {
    detail::require_positive_hbar(hbar);
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw Error(ErrorCode::EfficiencyOutOfRange, "eta = " + std::to_string(eta));
    }
    ComplexMatrix m(1, 2);
    const double a = std::sqrt(hbar * eta / 2.0);
    m << cplx(a, 0.0), cplx(0.0, a);
    return MRep{hbar, m};
}

/// sqrt(H) M' for an efficient part with M' M'^dag = hbar I.
inline MRep make_custom_efficiency(const ComplexMatrix& m_prime, const EfficiencyVector& eta,
                                   double hbar = 1.0, double tol = kDefaultTol) {
    detail::require_positive_hbar(hbar);
    const Eigen::Index l = m_prime.rows();
    if (m_prime.cols() != 2 * l || eta.size() != l || l < 1) {
        throw Error(ErrorCode::DimensionMismatch, "M' must be L x 2L and eta of length L");
    }
    for (Eigen::Index k = 0; k < l; ++k) {
        if (!(eta(k) >= 0.0 && eta(k) <= 1.0)) {
            throw Error(ErrorCode::EfficiencyOutOfRange,
                        detail::index_name("eta", k) + " = " + std::to_string(eta(k)));
        }
    }
    const ComplexMatrix g = m_prime * m_prime.adjoint() / hbar;
    if ((g - ComplexMatrix::Identity(l, l)).norm() > tol * std::max(1.0, g.norm())) {
        throw Error(ErrorCode::InvalidEfficientPart, "M' M'^dag differs from hbar I");
    }
    return MRep{hbar, eta.cwiseSqrt().asDiagonal() * m_prime};
}

struct EfficientDecomposition {
    EfficiencyVector eta;
    ComplexMatrix m_prime;               // M' M'^dag = hbar I
    std::vector<bool> zero_efficiency;  // channels whose M' row was filled in
};

/// M = sqrt(H) M'. Rows with eta_k <= tol carry no information; their M'
/// rows are completed by Gram-Schmidt starting from the unit row e_k.
inline EfficientDecomposition efficient_decomposition(const MRep& m, double tol = kDefaultTol) {
    EfficientDecomposition out;
    out.eta = validate_mrep(m, tol);
    const Eigen::Index l = m.channels();
    const Eigen::Index n = 2 * l;
    const double rh = std::sqrt(m.hbar);
    out.m_prime = ComplexMatrix::Zero(l, n);
    out.zero_efficiency.assign(static_cast<size_t>(l), false);
    for (Eigen::Index k = 0; k < l; ++k) {
        if (out.eta(k) > tol) {
            out.m_prime.row(k) = m.matrix.row(k) / std::sqrt(out.eta(k));
        } else {
            out.zero_efficiency[static_cast<size_t>(k)] = true;
        }
    }
    for (Eigen::Index k = 0; k < l; ++k) {
        if (!out.zero_efficiency[static_cast<size_t>(k)]) continue;
        bool filled = false;
        for (Eigen::Index offset = 0; offset < n && !filled; ++offset) {
            ComplexVector v = ComplexVector::Zero(n);
            v((k + offset) % n) = 1.0;
            for (Eigen::Index j = 0; j < l; ++j) {
                const bool populated = !out.zero_efficiency[static_cast<size_t>(j)] || j < k;
                if (j == k || !populated) continue;
                const ComplexVector rj = out.m_prime.row(j).transpose() / rh;
                v -= rj.dot(v) * rj;
            }
            const double nv = v.norm();
            if (nv > 1e-6) {
                out.m_prime.row(k) = (rh / nv) * v.transpose();
                filled = true;
            }
        }
        if (!filled) {
            throw Error(ErrorCode::InternalInconsistency, "could not complete efficient part");
        }
    }
    return out;
}

}  // namespace diffmon
