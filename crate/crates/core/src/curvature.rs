//! Curvature forms and the inequalities built on them.
//!
//! Throughout, curvature is reported as a function of the diagonal point `w`:
//! `𝒦_{ij}(w) = -∂_i ∂̄_j log K(w, w)`, which is non-positive for
//! non-negative definite scalar kernels.

use std::fmt;

use rayon::prelude::*;
use serde::Serialize;

use crate::kernel::{mobius_map, mobius_transport, Family, KernelSpec};
use crate::linalg::hermitian_eigen;
use crate::posdef::{contractivity_kernel, SampleGrid};
use crate::{CMat, Domain, DomainPoint, Error, Result, C64};

/// Default tolerance of the curvature identities.
pub const DEFAULT_CURV_TOL: f64 = 1e-7;

/// Absolute tolerance of the matrix-order comparison in gap reports.
pub const GAP_TOL: f64 = 1e-8;

/// `𝒦(w)` as an `m × m` Hermitian matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureForm {
    pub at: DomainPoint,
    pub matrix: CMat,
}

impl CurvatureForm {
    /// The `(0, 0)` entry; the whole form on the disc.
    pub fn scalar(&self) -> f64 {
        self.matrix[(0, 0)].re
    }

    /// Eigenvalues in ascending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigen(&self.matrix).0
    }
}

fn unit(dim: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; dim];
    v[i] = 1;
    v
}

/// `𝒦_{ij}(w) = -(K ∂_i∂̄_j K - ∂_i K ∂̄_j K) / K²` at `(w, w)`.
pub fn curvature_form(spec: &KernelSpec, w: &DomainPoint) -> Result<CurvatureForm> {
    spec.require_scalar()?;
    if w.domain() != spec.domain() {
        return Err(Error::DomainMismatch { expected: spec.domain().to_string(), found: w.domain().to_string() });
    }
    let x = w.coords();
    let m = x.len();
    let zero = vec![0; m];
    let k = spec.raw_scalar_deriv(x, x, &zero, &zero)?;
    if !(k.re > 0.0) || !k.re.is_finite() {
        return Err(Error::KernelVanishesOnDiagonal(w.to_string()));
    }
    let dz: Vec<C64> = (0..m).map(|i| spec.raw_scalar_deriv(x, x, &unit(m, i), &zero)).collect::<Result<_>>()?;
    let dw: Vec<C64> = (0..m).map(|j| spec.raw_scalar_deriv(x, x, &zero, &unit(m, j))).collect::<Result<_>>()?;
    let mut matrix = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let dij = spec.raw_scalar_deriv(x, x, &unit(m, i), &unit(m, j))?;
            matrix[(i, j)] = -(k * dij - dz[i] * dw[j]) / (k * k);
        }
    }
    Ok(CurvatureForm { at: w.clone(), matrix })
}

/// Curvature from central finite differences of `log K(w, w)` in real
/// coordinates with step `h`, using
/// `∂_i∂̄_j = ¼[(∂x_i∂x_j + ∂y_i∂y_j) + i(∂x_i∂y_j - ∂y_i∂x_j)]`.
pub fn log_hessian_fd(spec: &KernelSpec, w: &DomainPoint, h: f64) -> Result<CMat> {
    spec.require_scalar()?;
    let m = w.dim();
    let domain = spec.domain();
    let log_k = |shift: &[(usize, f64)]| -> Result<f64> {
        let mut c = w.coords().to_vec();
        for &(axis, d) in shift {
            if axis < m {
                c[axis].re += d;
            } else {
                c[axis - m].im += d;
            }
        }
        let pt = DomainPoint::new(domain, c)?;
        let v = spec.eval(&pt, &pt)?[(0, 0)].re;
        if !(v > 0.0) {
            return Err(Error::KernelVanishesOnDiagonal(pt.to_string()));
        }
        Ok(v.ln())
    };
    let f0 = log_k(&[])?;
    let second = |a: usize, b: usize| -> Result<f64> {
        if a == b {
            Ok((log_k(&[(a, h)])? - 2.0 * f0 + log_k(&[(a, -h)])?) / (h * h))
        } else {
            Ok((log_k(&[(a, h), (b, h)])? - log_k(&[(a, h), (b, -h)])? - log_k(&[(a, -h), (b, h)])?
                + log_k(&[(a, -h), (b, -h)])?)
                / (4.0 * h * h))
        }
    };
    let mut out = CMat::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let re = second(i, j)? + second(m + i, m + j)?;
            let im = second(i, m + j)? - second(m + i, j)?;
            out[(i, j)] = -C64::new(re, im) / 4.0;
        }
    }
    Ok(out)
}

/// Outcome of [`curvature_transform_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TransformCheck {
    pub alpha: C64,
    /// Curvature of the transported kernel at `φ_α(0) = α`.
    pub transported: f64,
    /// `(1 - |α|²)^{-2} 𝒦(0)`.
    pub expected: f64,
    /// `|transported - expected| / |expected|`.
    pub residual: f64,
    pub passed: bool,
}

/// Checks `𝒦_transported(φ_α(0)) = (1 - |α|²)^{-2} 𝒦(0)`.
pub fn curvature_transform_check(spec: &KernelSpec, alpha: C64, tol: f64) -> Result<TransformCheck> {
    if spec.domain() != Domain::Disc {
        return Err(Error::DomainMismatch { expected: Domain::Disc.to_string(), found: spec.domain().to_string() });
    }
    spec.require_scalar()?;
    let s = match spec.family() {
        Family::PowerDisc { s } => *s,
        _ => 1.0,
    };
    let transported = mobius_transport(spec, alpha, s)?;
    let image = DomainPoint::disc(mobius_map(alpha, C64::new(0.0, 0.0)))?;
    let lhs = curvature_form(&transported, &image)?.scalar();
    let k0 = curvature_form(spec, &DomainPoint::origin(Domain::Disc))?.scalar();
    let rhs = k0 / (1.0 - alpha.norm_sqr()).powi(2);
    let residual = (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE);
    Ok(TransformCheck { alpha, transported: lhs, expected: rhs, residual, passed: residual <= tol })
}

/// Reference curvature of a [`curvature_gap_report`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CurvatureReference {
    /// `-(1 - |w|²)^{-2}` on the disc.
    DiscSzego,
    /// `(1/(m+1)) 𝒦_B` with `𝒦_B` the curvature of `(1 - ⟨z, w⟩)^{-(m+1)}`.
    BallBergmanNormalized,
}

impl fmt::Display for CurvatureReference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CurvatureReference::DiscSzego => "disc_szego",
            CurvatureReference::BallBergmanNormalized => "ball_bergman_normalized",
        })
    }
}

impl std::str::FromStr for CurvatureReference {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "disc_szego" => Ok(CurvatureReference::DiscSzego),
            "ball_bergman_normalized" => Ok(CurvatureReference::BallBergmanNormalized),
            other => Err(Error::Usage(format!("unknown curvature reference \"{other}\""))),
        }
    }
}

impl CurvatureReference {
    pub fn at(&self, w: &DomainPoint) -> Result<CMat> {
        match (self, w.domain()) {
            (CurvatureReference::DiscSzego, Domain::Disc) => {
                Ok(CMat::from_element(1, 1, C64::new(-(1.0 - w.norm_sqr()).powi(-2), 0.0)))
            }
            (CurvatureReference::BallBergmanNormalized, Domain::Disc | Domain::Ball(_)) => {
                let m = w.dim();
                let bergman = KernelSpec::power_ball((m + 1) as f64, m)?;
                Ok(curvature_form(&bergman, w)?.matrix / C64::new((m + 1) as f64, 0.0))
            }
            (_, found) => Err(Error::DomainMismatch { expected: self.to_string(), found: found.to_string() }),
        }
    }
}

/// One grid point of a [`CurvatureGapReport`]. For `m > 1` the scalar
/// columns hold smallest eigenvalues.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GapRow {
    pub w: Vec<C64>,
    pub kappa: f64,
    pub kappa_ref: f64,
    /// Smallest eigenvalue of `𝒦_ref - 𝒦`.
    pub gap: f64,
    pub satisfied: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvatureGapReport {
    pub reference: CurvatureReference,
    pub rows: Vec<GapRow>,
    pub satisfied: bool,
}

impl CurvatureGapReport {
    /// CSV with header `w_re,w_im,kappa,kappa_ref,gap,verdict`. Several
    /// coordinates are joined with `;`.
    pub fn to_csv(&self) -> Result<String> {
        let mut wtr = csv::Writer::from_writer(Vec::new());
        let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
        wtr.write_record(["w_re", "w_im", "kappa", "kappa_ref", "gap", "verdict"]).map_err(io)?;
        for r in &self.rows {
            let re: Vec<String> = r.w.iter().map(|c| c.re.to_string()).collect();
            let im: Vec<String> = r.w.iter().map(|c| c.im.to_string()).collect();
            wtr.write_record([
                re.join(";"),
                im.join(";"),
                r.kappa.to_string(),
                r.kappa_ref.to_string(),
                r.gap.to_string(),
                if r.satisfied { "satisfied" } else { "violated" }.to_string(),
            ])
            .map_err(io)?;
        }
        let bytes = wtr.into_inner().map_err(|e| Error::Io(std::io::Error::other(e.to_string())))?;
        Ok(String::from_utf8(bytes).expect("utf8"))
    }
}

/// Per-point gap `𝒦_ref(w) - 𝒦(w)`; satisfied where its smallest
/// eigenvalue is at least `-GAP_TOL`.
pub fn curvature_gap_report(spec: &KernelSpec, grid: &SampleGrid, reference: CurvatureReference) -> Result<CurvatureGapReport> {
    let rows: Vec<GapRow> = grid
        .points()
        .par_iter()
        .map(|w| {
            let k = curvature_form(spec, w)?.matrix;
            let r = reference.at(w)?;
            let min_eig = |m: &CMat| hermitian_eigen(m).0[0];
            let gap = min_eig(&(&r - &k));
            Ok(GapRow {
                w: w.coords().to_vec(),
                kappa: min_eig(&k),
                kappa_ref: min_eig(&r),
                gap,
                satisfied: gap >= -GAP_TOL,
            })
        })
        .collect::<Result<_>>()?;
    let satisfied = rows.iter().all(|r| r.satisfied);
    Ok(CurvatureGapReport { reference, rows, satisfied })
}

/// Outcome of [`extremality_point_test`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExtremalityReport {
    pub zeta: C64,
    /// Determinant of the Gram matrix of `K‡(·, ζ)` and `∂̄K‡(·, ζ)`.
    pub det: f64,
    /// `max(G₀₀ G₁₁, G₀₀² (1 - |ζ|²)^{-2})`.
    pub det_scale: f64,
    /// Linear dependence by the determinant test.
    pub extremal: bool,
    /// `|𝒦(ζ) + (1 - |ζ|²)^{-2}| (1 - |ζ|²)²`.
    pub curvature_residual: f64,
    /// The curvature comparison reaches the same verdict.
    pub agrees: bool,
}

/// Pointwise extremality with `K‡ = (1 - z w̄) K`: the vectors `K‡(·, ζ)`
/// and `∂̄K‡(·, ζ)` are dependent iff `𝒦(ζ) = -(1 - |ζ|²)^{-2}`.
pub fn extremality_point_test(spec: &KernelSpec, zeta: C64, tol: f64) -> Result<ExtremalityReport> {
    if spec.domain() != Domain::Disc {
        return Err(Error::DomainMismatch { expected: Domain::Disc.to_string(), found: spec.domain().to_string() });
    }
    spec.require_scalar()?;
    let pt = DomainPoint::disc(zeta)?;
    let dagger = contractivity_kernel(spec, Domain::Disc, 1)?;
    let x = [zeta];
    let d = |p: u32, q: u32| dagger.raw_scalar_deriv(&x, &x, &[p], &[q]);
    let (g00, g01, g10, g11) = (d(0, 0)?, d(0, 1)?, d(1, 0)?, d(1, 1)?);
    let det = (g00 * g11 - g01 * g10).re;
    let weight = (1.0 - zeta.norm_sqr()).powi(-2);
    let det_scale = (g00.re * g11.re).max(g00.re * g00.re * weight);
    let extremal = det <= tol * det_scale;
    let kappa = curvature_form(spec, &pt)?.scalar();
    let curvature_residual = (kappa + weight).abs() / weight;
    let agrees = extremal == (curvature_residual <= tol);
    Ok(ExtremalityReport { zeta, det, det_scale, extremal, curvature_residual, agrees })
}

/// The matrix kernel `K̃_{ij} = K ∂_i∂̄_j K - ∂_i K ∂̄_j K`.
pub fn ktilde_kernel(spec: &KernelSpec) -> Result<KernelSpec> {
    KernelSpec::ktilde(spec.clone())
}
