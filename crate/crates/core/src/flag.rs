//! Two-step flag kernels `K_Γ = [[K₀, ∂̄K₀], [∂K₀, ∂∂̄K₀ + K₁]]` and their
//! complete invariants: the curvature of `K₀` and the ratio `K₀(w,w) / K₁(w,w)`.

use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::curvature_form;
use crate::kernel::KernelSpec;
use crate::posdef::SampleGrid;
use crate::{Domain, DomainPoint, Error, Result, C64};

/// The pair `(K₀, K₁)` and the matrix kernel it generates.
#[derive(Clone, Debug, PartialEq)]
pub struct FlagKernelSpec {
    pub k0: KernelSpec,
    pub k1: KernelSpec,
    kernel: KernelSpec,
}

impl FlagKernelSpec {
    /// `K_Γ` as a `2 × 2` matrix kernel.
    pub fn kernel(&self) -> &KernelSpec {
        &self.kernel
    }
}

pub fn flag_kernel(k0: &KernelSpec, k1: &KernelSpec) -> Result<FlagKernelSpec> {
    if k0.domain() != k1.domain() {
        return Err(Error::DomainMismatch { expected: k0.domain().to_string(), found: k1.domain().to_string() });
    }
    let kernel = KernelSpec::flag(k0.clone(), k1.clone())?;
    Ok(FlagKernelSpec { k0: k0.clone(), k1: k1.clone(), kernel })
}

/// 15 points: eight radii from 0 to 0.85 on the positive real and imaginary
/// axes, sharing the origin.
pub fn default_flag_grid() -> Result<SampleGrid> {
    let mut points = Vec::with_capacity(15);
    for ray in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
        for k in 0..8 {
            if k == 0 && !points.is_empty() {
                continue;
            }
            points.push(DomainPoint::disc(ray * (0.85 * k as f64 / 7.0))?);
        }
    }
    SampleGrid::user_list(points)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FlagInvariants {
    pub points: Vec<C64>,
    /// `𝒦_{K₀}(w)`.
    pub curv0: Vec<f64>,
    /// `K₀(w,w) / K₁(w,w)`.
    pub ratio: Vec<f64>,
}

pub fn flag_invariants(f: &FlagKernelSpec, grid: &SampleGrid) -> Result<FlagInvariants> {
    if grid.domain() != Domain::Disc {
        return Err(Error::DomainMismatch { expected: Domain::Disc.to_string(), found: grid.domain().to_string() });
    }
    let rows: Vec<(C64, f64, f64)> = grid
        .points()
        .par_iter()
        .map(|w| {
            let k1 = f.k1.eval_scalar(w, w)?.re;
            if !(k1 > 0.0) {
                return Err(Error::K1VanishesOnGrid(w.to_string()));
            }
            let k0 = f.k0.eval_scalar(w, w)?.re;
            Ok((w.z(), curvature_form(&f.k0, w)?.scalar(), k0 / k1))
        })
        .collect::<Result<_>>()?;
    Ok(FlagInvariants {
        points: rows.iter().map(|r| r.0).collect(),
        curv0: rows.iter().map(|r| r.1).collect(),
        ratio: rows.iter().map(|r| r.2).collect(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FlagInvariant {
    Curvature,
    Ratio,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum FlagVerdict {
    Equivalent,
    Inequivalent { at: C64, invariant: FlagInvariant, a: f64, b: f64 },
}

impl FlagVerdict {
    pub fn is_equivalent(&self) -> bool {
        matches!(self, FlagVerdict::Equivalent)
    }
}

/// Equivalent iff `|curv0_a - curv0_b| ≤ tol` and
/// `|ratio_a - ratio_b| ≤ tol · max(ratio)` at every grid point. The witness
/// is the first point in grid order, curvature checked before the ratio.
pub fn flag_equivalence(a: &FlagKernelSpec, b: &FlagKernelSpec, grid: &SampleGrid, tol: f64) -> Result<FlagVerdict> {
    if a.k0.domain() != b.k0.domain() {
        return Err(Error::DomainMismatch { expected: a.k0.domain().to_string(), found: b.k0.domain().to_string() });
    }
    let ia = flag_invariants(a, grid)?;
    let ib = flag_invariants(b, grid)?;
    let max_ratio = ia.ratio.iter().chain(&ib.ratio).cloned().fold(0.0, f64::max);
    for k in 0..ia.points.len() {
        if (ia.curv0[k] - ib.curv0[k]).abs() > tol {
            return Ok(FlagVerdict::Inequivalent {
                at: ia.points[k],
                invariant: FlagInvariant::Curvature,
                a: ia.curv0[k],
                b: ib.curv0[k],
            });
        }
        if (ia.ratio[k] - ib.ratio[k]).abs() > tol * max_ratio {
            return Ok(FlagVerdict::Inequivalent {
                at: ia.points[k],
                invariant: FlagInvariant::Ratio,
                a: ia.ratio[k],
                b: ib.ratio[k],
            });
        }
    }
    Ok(FlagVerdict::Equivalent)
}
