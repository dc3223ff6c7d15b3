//! Jet constructions and the quotient and submodule examples built from them.

use serde::Serialize;

use crate::kernel::json::default_direction;
use crate::kernel::{Family, KernelSpec};
use crate::linalg::numeric_rank;
use crate::poly::Poly;
use crate::{CMat, Domain, Error, Result, C64};

/// Order-`k` jet kernel `(∂^ℓ ∂̄^j K)_{0 ≤ ℓ, j < k}` along the default
/// normal direction: `∂/∂z` on the disc, the first coordinate on the ball and
/// `∂₁ - ∂₂` on the polydisc. `k = 1` returns `spec` unchanged.
pub fn jet_kernel(spec: &KernelSpec, k: usize) -> Result<KernelSpec> {
    spec.require_scalar()?;
    if k == 1 {
        return Ok(spec.clone());
    }
    KernelSpec::matrix_jet(spec.clone(), k, default_direction(spec.domain()))
}

/// Lower-triangular `k × k` matrix with unit diagonal.
#[derive(Clone, Debug, PartialEq)]
pub struct MuMatrix {
    entries: CMat,
}

impl MuMatrix {
    pub fn new(entries: CMat) -> Result<Self> {
        let k = entries.nrows();
        if k == 0 || entries.ncols() != k {
            return Err(Error::BadMuShape(format!("expected a square matrix, got {}x{}", k, entries.ncols())));
        }
        for i in 0..k {
            if (entries[(i, i)] - 1.0).norm() > 1e-14 {
                return Err(Error::BadMuShape(format!("diagonal entry ({}, {}) must be 1", i + 1, i + 1)));
            }
            for j in i + 1..k {
                if entries[(i, j)] != C64::new(0.0, 0.0) {
                    return Err(Error::BadMuShape(format!("entry ({}, {}) above the diagonal", i + 1, j + 1)));
                }
            }
        }
        Ok(MuMatrix { entries })
    }

    /// Builds `μ` from its strictly lower entries listed row by row:
    /// `μ₂₁, μ₃₁, μ₃₂, μ₄₁, …`.
    pub fn from_lower(k: usize, lower: &[C64]) -> Result<Self> {
        if lower.len() != k * (k - 1) / 2 {
            return Err(Error::BadMuShape(format!("order {k} needs {} entries, got {}", k * (k - 1) / 2, lower.len())));
        }
        let mut m = CMat::identity(k, k);
        let mut it = lower.iter();
        for i in 1..k {
            for j in 0..i {
                m[(i, j)] = *it.next().expect("length checked");
            }
        }
        Self::new(m)
    }

    /// `μ_{ℓj} = binom(ℓ, j)` (0-based), the untwisted jet action.
    pub fn plain(k: usize) -> Self {
        let m = CMat::from_fn(k, k, |l, j| C64::new(crate::kernel::binom(l as u32, j as u32), 0.0));
        MuMatrix { entries: m }
    }

    pub fn order(&self) -> usize {
        self.entries.nrows()
    }

    /// Entry with 1-based indices.
    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.entries[(i - 1, j - 1)]
    }

    pub fn entries(&self) -> &CMat {
        &self.entries
    }
}

/// `𝒥(f)` or `𝒥_μ(f)`: lower-triangular matrix of polynomials.
#[derive(Clone, Debug, PartialEq)]
pub struct JetActionMatrix {
    pub order: usize,
    /// Row-major `order × order` polynomial entries.
    pub entries: Vec<Vec<Poly>>,
    pub twisted: bool,
}

impl JetActionMatrix {
    pub fn eval(&self, z: C64) -> CMat {
        CMat::from_fn(self.order, self.order, |i, j| self.entries[i][j].eval(z))
    }

    fn product(&self, other: &JetActionMatrix) -> Vec<Vec<Poly>> {
        let k = self.order;
        (0..k)
            .map(|i| {
                (0..k)
                    .map(|j| (0..k).fold(Poly::zero(), |acc, l| &acc + &(&self.entries[i][l] * &other.entries[l][j])))
                    .collect()
            })
            .collect()
    }
}

/// Entry `(ℓ, j)`, `ℓ ≥ j`, is `μ_{ℓj} ∂^{ℓ-j} f`; without `μ` the binomial
/// weights `binom(ℓ, j)` (0-based) are used.
pub fn jet_action(f: &Poly, k: usize, mu: Option<&MuMatrix>) -> Result<JetActionMatrix> {
    if k == 0 {
        return Err(Error::BadMuShape("order must be positive".into()));
    }
    let plain = MuMatrix::plain(k);
    let weights = match mu {
        Some(m) if m.order() != k => {
            return Err(Error::BadMuShape(format!("mu has order {}, expected {k}", m.order())));
        }
        Some(m) => m,
        None => &plain,
    };
    let entries = (0..k)
        .map(|l| {
            (0..k)
                .map(|j| {
                    if l < j {
                        Poly::zero()
                    } else {
                        f.nth_derivative(l - j).scale(weights.entries[(l, j)])
                    }
                })
                .collect()
        })
        .collect();
    Ok(JetActionMatrix { order: k, entries, twisted: mu.is_some() })
}

/// Outcome of [`mu_admissibility`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct MuCheck {
    pub admissible: bool,
    /// First failing entry, 1-based, scanning rows then columns.
    pub first_failure: Option<(usize, usize)>,
}

/// Checks `𝒥_μ(fg) = 𝒥_μ(f) 𝒥_μ(g)` coefficientwise for all monomials
/// `f = z^a`, `g = z^b` with `a, b ≤ degree`.
pub fn mu_admissibility(mu: &MuMatrix, degree: usize) -> MuCheck {
    let k = mu.order();
    let scale = mu.entries.iter().fold(1.0f64, |a, c| a.max(c.norm()));
    let tol = 1e-10 * scale * scale;
    let mut failing = vec![vec![false; k]; k];
    for a in 0..=degree {
        for b in 0..=degree {
            let f = jet_action(&Poly::monomial(a), k, Some(mu)).expect("valid order");
            let g = jet_action(&Poly::monomial(b), k, Some(mu)).expect("valid order");
            let fg = jet_action(&Poly::monomial(a + b), k, Some(mu)).expect("valid order");
            let prod = f.product(&g);
            for i in 0..k {
                for j in 0..k {
                    let diff = &fg.entries[i][j] - &prod[i][j];
                    // coefficients grow like the falling factorials of a + b
                    let size = ((a + b).max(1) as f64).powi(k as i32);
                    if diff.max_abs() > tol * size {
                        failing[i][j] = true;
                    }
                }
            }
        }
    }
    let first_failure = (0..k).flat_map(|i| (0..k).map(move |j| (i, j))).find(|&(i, j)| failing[i][j]).map(|(i, j)| (i + 1, j + 1));
    MuCheck { admissible: first_failure.is_none(), first_failure }
}

/// Restriction of `K₁(z₁, w₁) K₂(z₂, w₂)` to the diagonal `z₁ = z₂`:
/// `K_res(u, v) = K₁(u, v) K₂(u, v)`.
pub fn diagonal_restriction(spec: &KernelSpec) -> Result<KernelSpec> {
    let factors = match spec.family() {
        Family::ProductPolydisc { factors } if factors.len() == 2 => factors,
        _ => return Err(Error::InvalidSpec("diagonal restriction needs a product of two disc kernels".into())),
    };
    let (a, b) = (&factors[0], &factors[1]);
    if a.family() != b.family() {
        return Err(Error::FactorsDiffer);
    }
    let out = match a.family() {
        Family::PowerDisc { s } => KernelSpec::new(Family::PowerDisc { s: 2.0 * s })?,
        _ => KernelSpec::product(vec![a.clone(), b.clone()])?,
    };
    Ok(out.with_label(format!("restriction({})", spec.label())))
}

/// Largest truncation degree of [`VanishingSubmoduleKernel`].
pub const MAX_SUBMODULE_DEGREE: usize = 60;

/// Relative size of the last retained degree above which evaluations are
/// rejected as under-resolved.
pub const TRUNCATION_THRESHOLD: f64 = 1e-10;

/// Reproducing kernel of `{f ∈ H ⊗ H : f|_Δ = 0}` in the degree-`≤ D`
/// truncation. With `e_{ab} = √(a_a a_b) x₁^a x₂^b` the restriction to the
/// diagonal pairs degree `n` coefficients with `v_n = (√(a_a a_b))_{a+b=n}`,
/// so the projection onto the diagonal part is block diagonal by degree:
///
/// `K₁(x, y) = Σ_n [Σ_{a+b=n} a_a a_b (x₁ȳ₁)^a (x₂ȳ₂)^b - P_n(x) conj(P_n(y)) / σ_n]`
///
/// with `P_n(x) = Σ_{a+b=n} a_a a_b x₁^a x₂^b` and `σ_n = Σ_{a+b=n} a_a a_b`.
#[derive(Clone, Debug, PartialEq)]
pub struct VanishingSubmoduleKernel {
    coeffs: Vec<f64>,
    sigma: Vec<f64>,
}

impl VanishingSubmoduleKernel {
    pub fn new(spec: &KernelSpec, degree: usize) -> Result<Self> {
        if degree > MAX_SUBMODULE_DEGREE {
            return Err(Error::InvalidSpec(format!("degree {degree} exceeds {MAX_SUBMODULE_DEGREE}")));
        }
        let mut coeffs = spec
            .series_coefficients(degree + 1)
            .ok_or_else(|| Error::NonSeriesRepresentable(spec.label().to_string()))?;
        coeffs.resize(degree + 1, 0.0);
        if !(coeffs[0] > 0.0) {
            return Err(Error::ZeroConstantTerm);
        }
        if let Some(c) = coeffs.iter().find(|c| **c < 0.0) {
            return Err(Error::InvalidSpec(format!("negative series coefficient {c}")));
        }
        let sigma = (0..=degree).map(|n| (0..=n).map(|a| coeffs[a] * coeffs[n - a]).sum()).collect();
        Ok(VanishingSubmoduleKernel { coeffs, sigma })
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    fn p_n(&self, n: usize, x: [C64; 2]) -> C64 {
        (0..=n).map(|a| x[0].powu(a as u32) * x[1].powu((n - a) as u32) * (self.coeffs[a] * self.coeffs[n - a])).sum()
    }

    /// `K₁(x, y)`.
    pub fn eval(&self, x: [C64; 2], y: [C64; 2]) -> Result<C64> {
        let (u1, u2) = (x[0] * y[0].conj(), x[1] * y[1].conj());
        let mut acc = C64::new(0.0, 0.0);
        let mut last_full = 0.0;
        let mut scale: f64 = 0.0;
        for n in 0..=self.degree() {
            if self.sigma[n] == 0.0 {
                continue;
            }
            let full: C64 =
                (0..=n).map(|a| u1.powu(a as u32) * u2.powu((n - a) as u32) * (self.coeffs[a] * self.coeffs[n - a])).sum();
            let proj = self.p_n(n, x) * self.p_n(n, y).conj() / self.sigma[n];
            acc += full - proj;
            last_full = full.norm().max(proj.norm());
            scale = scale.max(last_full);
        }
        let residual = last_full / scale.max(f64::MIN_POSITIVE);
        if residual > TRUNCATION_THRESHOLD {
            return Err(Error::TruncationTooSmall { degree: self.degree(), residual });
        }
        Ok(acc)
    }

    /// `K₁((z, z-h), (w, w-h)) / h²`, which tends to `½ K̃(z, w)` as `h → 0`
    /// along the real axis. With `richardson` the order-one extrapolation
    /// `2Q(h/2) - Q(h)` is returned.
    pub fn limit_quotient(&self, z: C64, w: C64, h: f64, richardson: bool) -> Result<C64> {
        let q = |h: f64| -> Result<C64> {
            let v = self.eval([z, z - h], [w, w - h])?;
            Ok(v / (h * h))
        };
        if richardson {
            Ok(q(h / 2.0)? * 2.0 - q(h)?)
        } else {
            q(h)
        }
    }

    /// `⟨φ(w), φ(z)⟩` with `φ(w) = K_w ⊗ ∂̄K_w - ∂̄K_w ⊗ K_w`:
    /// `Σ a_a a_b (a - b)² (z w̄)^{a+b-1}`, equal to `2 K̃(z, w)`.
    pub fn phi_gram(&self, z: C64, w: C64) -> C64 {
        let x = z * w.conj();
        let d = self.degree();
        let mut acc = C64::new(0.0, 0.0);
        for a in 0..=d {
            for b in 0..=d - a {
                if a == b {
                    continue;
                }
                let diff = a as f64 - b as f64;
                acc += x.powu((a + b - 1) as u32) * (self.coeffs[a] * self.coeffs[b] * diff * diff);
            }
        }
        acc
    }
}

/// Chart of the projective line used by [`h20_blowup`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "chart", content = "theta", rename_all = "snake_case")]
pub enum Chart {
    /// Frame `z₁ + θ z₂`.
    First(C64),
    /// Frame `z₂ + θ z₁`.
    Second(C64),
}

impl Chart {
    /// The same point in the other chart, `θ ↦ 1/θ`; `None` at `θ = 0`.
    pub fn switch(&self) -> Option<Chart> {
        let flip = |t: C64| (t != C64::new(0.0, 0.0)).then(|| C64::new(1.0, 0.0) / t);
        match *self {
            Chart::First(t) => flip(t).map(Chart::Second),
            Chart::Second(t) => flip(t).map(Chart::First),
        }
    }

    pub fn theta(&self) -> C64 {
        match *self {
            Chart::First(t) | Chart::Second(t) => t,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BlowupData {
    pub chart: Chart,
    /// Coefficients of the frame in `(z₁, z₂)`.
    pub frame: [C64; 2],
    /// `‖frame‖²` in `H²(𝔻²)`.
    pub norm_sqr: f64,
    /// `∂_θ ∂̄_θ log ‖frame‖²`.
    pub curvature: f64,
}

/// Frame and curvature of the line bundle over the exceptional divisor of
/// `H²₀(𝔻²)` at the origin.
pub fn h20_blowup(chart: Chart) -> BlowupData {
    let t = chart.theta();
    let one = C64::new(1.0, 0.0);
    let frame = match chart {
        Chart::First(_) => [one, t],
        Chart::Second(_) => [t, one],
    };
    // polarized metric ⟨e(φ), e(θ)⟩ = 1 + θ φ̄ on the diagonal
    let k = 1.0 + t.norm_sqr();
    let (dk, dbk, ddk) = (t.conj(), t, 1.0);
    let curvature = (k * ddk - (dk * dbk).re) / (k * k);
    BlowupData { chart, frame, norm_sqr: k, curvature }
}

/// Dimension of `∩ ker (M_{z_i} - w_i)^*` on `H²₀(𝔻²)`, the closed span of
/// monomials `z₁^a z₂^b` with `(a, b) ≠ 0`. A vector with coefficients
/// `c_{ab}` lies in the joint kernel iff `c_{a+1,b} = w̄₁ c_{ab}` and
/// `c_{a,b+1} = w̄₂ c_{ab}` for `(a, b) ≠ 0`; the nullity of this system is
/// computed on monomials of degree `≤ degree`.
pub fn h20_joint_kernel_rank(w: [C64; 2], degree: usize) -> Result<usize> {
    if degree < 2 {
        return Err(Error::InvalidSpec("joint kernel rank needs degree at least 2".into()));
    }
    if w[0].norm() >= 1.0 || w[1].norm() >= 1.0 {
        return Err(Error::PointOutsideDomain {
            coords: crate::domain::fmt_coords(&w),
            domain: Domain::Polydisc(2).to_string(),
        });
    }
    let mut index = std::collections::HashMap::new();
    for n in 1..=degree {
        for a in 0..=n {
            let next = index.len();
            index.insert((a, n - a), next);
        }
    }
    let mut rows: Vec<Vec<C64>> = Vec::new();
    for n in 1..degree {
        for a in 0..=n {
            let b = n - a;
            for (target, wi) in [((a + 1, b), w[0]), ((a, b + 1), w[1])] {
                let mut row = vec![C64::new(0.0, 0.0); index.len()];
                row[index[&target]] += 1.0;
                row[index[&(a, b)]] -= wi.conj();
                rows.push(row);
            }
        }
    }
    let m = CMat::from_fn(rows.len(), index.len(), |i, j| rows[i][j]);
    Ok(index.len() - numeric_rank(&m, 1e-8))
}
