//! Homogeneous models: the weighted shifts `W_λ`, the curvature test for
//! homogeneity, and the elementary bundles `E^{(η,Y)}` with their kernels and
//! multipliers.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::curvature::curvature_form;
use crate::kernel::json::complex_from_value;
use crate::kernel::series::binomial_series;
use crate::kernel::{power_deriv, KernelSpec};
use crate::linalg::hermitian_eigen;
use crate::posdef::{gram_matrix_with, nnd_verdict, PDReport, SampleGrid};
use crate::{CMat, Domain, DomainPoint, Error, Result, C64};

/// Largest total block size accepted for an elementary bundle.
pub const MAX_BUNDLE_SIZE: usize = 16;

/// Default tolerance for automorphism validation.
const AUT_TOL: f64 = 1e-10;

/// Truncation of the weighted shift `W_λ` with weights
/// `w_n = √((n+1)/(n+λ))` and frame coefficients `c_n² = [xⁿ](1-x)^{-λ}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WeightedShiftModel {
    pub lambda: f64,
    pub size: usize,
    pub weights: Vec<f64>,
    pub frame_coeffs: Vec<f64>,
    #[serde(skip)]
    pub shift: CMat,
}

impl WeightedShiftModel {
    /// The diagonal kernel `Σ c_n² (z w̄)ⁿ`.
    pub fn frame_kernel(&self) -> Result<KernelSpec> {
        Ok(KernelSpec::diagonal_series(self.frame_coeffs.iter().map(|c| c * c).collect())?
            .with_label(format!("W_{}-frame", self.lambda)))
    }

    pub fn max_weight(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }
}

pub fn wlambda_model(lambda: f64, n: usize) -> Result<WeightedShiftModel> {
    if !(lambda > 0.0) || n < 4 {
        return Err(Error::InvalidSpec(format!("W_lambda needs lambda > 0 and N >= 4, got {lambda}, {n}")));
    }
    let weights: Vec<f64> = (0..n - 1).map(|k| ((k as f64 + 1.0) / (k as f64 + lambda)).sqrt()).collect();
    let frame_coeffs = binomial_series(lambda, n).into_iter().map(f64::sqrt).collect();
    let mut shift = CMat::zeros(n, n);
    for (k, w) in weights.iter().enumerate() {
        shift[(k + 1, k)] = C64::new(*w, 0.0);
    }
    Ok(WeightedShiftModel { lambda, size: n, weights, frame_coeffs, shift })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogeneityRow {
    pub alpha: C64,
    pub kappa: f64,
    /// `(1 - |α|²)^{-2} 𝒦(0)`.
    pub expected: f64,
    pub residual: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomogeneityReport {
    pub rows: Vec<HomogeneityRow>,
    pub homogeneous: bool,
}

/// Points used by `homogeneity_check` when no grid is given.
pub fn default_alpha_grid() -> Vec<C64> {
    vec![
        C64::new(0.0, 0.0),
        C64::new(0.3, 0.0),
        C64::new(0.0, 0.5),
        C64::new(-0.6, 0.2),
        C64::new(0.7, 0.0),
        C64::new(-0.35, -0.55),
    ]
}

/// Compares `𝒦(α)` with `(1 - |α|²)^{-2} 𝒦(0)`; the residual is relative to
/// `|𝒦(α)|`.
pub fn homogeneity_check(spec: &KernelSpec, alphas: &[C64], tol: f64) -> Result<HomogeneityReport> {
    if spec.domain() != Domain::Disc {
        return Err(Error::DomainMismatch { expected: Domain::Disc.to_string(), found: spec.domain().to_string() });
    }
    spec.require_scalar()?;
    let k0 = curvature_form(spec, &DomainPoint::origin(Domain::Disc))?.scalar();
    let rows: Vec<HomogeneityRow> = alphas
        .par_iter()
        .map(|&alpha| {
            let kappa = curvature_form(spec, &DomainPoint::disc(alpha)?)?.scalar();
            let expected = k0 / (1.0 - alpha.norm_sqr()).powi(2);
            let residual = if kappa == expected { 0.0 } else { (kappa - expected).abs() / kappa.abs() };
            Ok(HomogeneityRow { alpha, kappa, expected, residual })
        })
        .collect::<Result<_>>()?;
    let homogeneous = rows.iter().all(|r| r.residual <= tol);
    Ok(HomogeneityReport { rows, homogeneous })
}

/// Parameters `(η, Y, N)` of an elementary bundle: blocks of sizes
/// `d₀, …, d_m`, subdiagonal blocks `Y_j : ℂ^{d_{j-1}} → ℂ^{d_j}` and
/// invertible diagonal blocks `N_j`.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementaryBundleParams {
    eta: f64,
    dims: Vec<usize>,
    y: Vec<CMat>,
    n: Vec<CMat>,
}

impl ElementaryBundleParams {
    /// `y[j-1]` is `Y_j`; `n[j]` is `N_j`.
    pub fn new(eta: f64, dims: Vec<usize>, y: Vec<CMat>, n: Vec<CMat>) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidSpec(m));
        if !(eta > 0.0) || !eta.is_finite() {
            return bad(format!("eta must be positive, got {eta}"));
        }
        if dims.is_empty() || dims.contains(&0) {
            return bad("block dimensions must be positive".into());
        }
        let total: usize = dims.iter().sum();
        if total > MAX_BUNDLE_SIZE {
            return bad(format!("total size {total} exceeds {MAX_BUNDLE_SIZE}"));
        }
        if y.len() + 1 != dims.len() || n.len() != dims.len() {
            return bad(format!("{} blocks need {} Y blocks and {} N blocks", dims.len(), dims.len() - 1, dims.len()));
        }
        for (j, yj) in y.iter().enumerate() {
            if yj.shape() != (dims[j + 1], dims[j]) {
                return bad(format!("Y_{} has shape {:?}, expected {:?}", j + 1, yj.shape(), (dims[j + 1], dims[j])));
            }
        }
        for (j, nj) in n.iter().enumerate() {
            if nj.shape() != (dims[j], dims[j]) {
                return bad(format!("N_{j} has shape {:?}, expected {:?}", nj.shape(), (dims[j], dims[j])));
            }
        }
        Ok(ElementaryBundleParams { eta, dims, y, n })
    }

    /// The line bundle with kernel `(1 - z w̄)^{-2η}`.
    pub fn scalar(eta: f64) -> Result<Self> {
        Self::new(eta, vec![1], vec![], vec![CMat::identity(1, 1)])
    }

    /// `d₀ = d₁ = 1`, `Y₁ = y`, `N = I`.
    pub fn two_block(eta: f64, y: C64) -> Result<Self> {
        Self::new(eta, vec![1, 1], vec![CMat::from_element(1, 1, y)], vec![CMat::identity(1, 1), CMat::identity(1, 1)])
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn y_blocks(&self) -> &[CMat] {
        &self.y
    }

    pub fn n_blocks(&self) -> &[CMat] {
        &self.n
    }

    pub fn size(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn with_eta(&self, eta: f64) -> Result<Self> {
        Self::new(eta, self.dims.clone(), self.y.clone(), self.n.clone())
    }

    pub fn with_n(&self, n: Vec<CMat>) -> Result<Self> {
        Self::new(self.eta, self.dims.clone(), self.y.clone(), n)
    }

    fn offsets(&self) -> Vec<usize> {
        self.dims
            .iter()
            .scan(0, |acc, d| {
                let o = *acc;
                *acc += d;
                Some(o)
            })
            .collect()
    }

    /// `Y_ℓ ⋯ Y_{j+1}`, the identity when `ℓ = j`.
    pub fn y_product(&self, l: usize, j: usize) -> CMat {
        let mut out = CMat::identity(self.dims[j], self.dims[j]);
        for k in j + 1..=l {
            out = &self.y[k - 1] * out;
        }
        out
    }

    /// `1 / ((ℓ-j)! (2η + 2j)_{ℓ-j})`.
    fn coeff(&self, l: usize, j: usize) -> f64 {
        let k = (l - j) as u32;
        let a = 2.0 * self.eta + 2.0 * j as f64;
        let fact: f64 = (1..=k).map(f64::from).product();
        let poch: f64 = (0..k).map(|i| a + f64::from(i)).product();
        1.0 / (fact * poch)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    /// `{"eta": η, "dims": [d₀, …], "Y": [Y₁, …], "N": [N₀, …]}`, each matrix a
    /// list of rows of numbers or `[re, im]` pairs.
    pub fn parse(text: &str) -> Result<Self> {
        let parse_err = |path: &str, message: String, line: Option<usize>| Error::SpecParse { path: path.into(), line, message };
        let v: Value = serde_json::from_str(text).map_err(|e| parse_err("$", e.to_string(), Some(e.line())))?;
        let obj = v.as_object().ok_or_else(|| parse_err("$", "expected an object".into(), None))?;
        for key in obj.keys() {
            if !["eta", "dims", "Y", "N"].contains(&key.as_str()) {
                return Err(parse_err(&format!("$.{key}"), "unknown field".into(), None));
            }
        }
        let eta = obj.get("eta").and_then(Value::as_f64).ok_or_else(|| parse_err("$.eta", "expected a number".into(), None))?;
        let dims: Vec<usize> = obj
            .get("dims")
            .and_then(Value::as_array)
            .ok_or_else(|| parse_err("$.dims", "expected an array".into(), None))?
            .iter()
            .enumerate()
            .map(|(i, d)| d.as_u64().map(|d| d as usize).ok_or_else(|| parse_err(&format!("$.dims[{i}]"), "expected an integer".into(), None)))
            .collect::<Result<_>>()?;
        let matrices = |key: &str| -> Result<Vec<CMat>> {
            let path = format!("$.{key}");
            let list = match obj.get(key) {
                None => return Ok(vec![]),
                Some(v) => v.as_array().ok_or_else(|| parse_err(&path, "expected an array of matrices".into(), None))?,
            };
            list.iter().enumerate().map(|(i, m)| matrix_from_value(m, &format!("{path}[{i}]"))).collect()
        };
        let y = matrices("Y")?;
        let n = if obj.contains_key("N") { matrices("N")? } else { dims.iter().map(|d| CMat::identity(*d, *d)).collect() };
        Self::new(eta, dims, y, n).map_err(|e| parse_err("$", e.to_string(), None))
    }
}

fn matrix_from_value(v: &Value, path: &str) -> Result<CMat> {
    let bad = |message: &str| Error::SpecParse { path: path.into(), line: None, message: message.into() };
    let rows = v.as_array().ok_or_else(|| bad("expected a list of rows"))?;
    let cols = rows.first().and_then(Value::as_array).map(Vec::len).ok_or_else(|| bad("expected a nonempty list of rows"))?;
    let mut out = CMat::zeros(rows.len(), cols);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().filter(|r| r.len() == cols).ok_or_else(|| bad("rows must have equal length"))?;
        for (j, x) in row.iter().enumerate() {
            out[(i, j)] = complex_from_value(x, &format!("{path}[{i}][{j}]"))?;
        }
    }
    Ok(out)
}

/// `K_N^{(η,Y)}(0,0)` and `H = K_N^{(η,Y)}(0,0)^{-1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct BundleGram0 {
    pub blocks: Vec<CMat>,
    pub k00: CMat,
    pub h: CMat,
}

pub fn elementary_bundle_gram0(params: &ElementaryBundleParams) -> Result<BundleGram0> {
    let n = params.size();
    let offsets = params.offsets();
    let mut blocks = Vec::with_capacity(params.dims.len());
    let mut k00 = CMat::zeros(n, n);
    let mut h = CMat::zeros(n, n);
    for l in 0..params.dims.len() {
        let d = params.dims[l];
        let mut block = CMat::zeros(d, d);
        for j in 0..=l {
            let yp = params.y_product(l, j);
            let nj = &params.n[j];
            block += (&yp * nj * nj.adjoint() * yp.adjoint()).scale(params.coeff(l, j));
        }
        let eig = hermitian_eigen(&block);
        let (min, max) = (eig.0[0], eig.0[d - 1]);
        if !(min > 1e-12 * max.max(1.0)) {
            return Err(Error::SingularBlock(format!("block {l} has smallest eigenvalue {min:e}")));
        }
        let inv = block.clone().try_inverse().ok_or_else(|| Error::SingularBlock(format!("block {l} is not invertible")))?;
        k00.view_mut((offsets[l], offsets[l]), (d, d)).copy_from(&block);
        h.view_mut((offsets[l], offsets[l]), (d, d)).copy_from(&inv);
        blocks.push(block);
    }
    Ok(BundleGram0 { blocks, k00, h })
}

/// The kernel `K_N^{(η,Y)}(z, w)` on the disc:
/// block `(ℓ, p)` is `Σ_{j ≤ min(ℓ,p)} a_{ℓj} a_{pj} Y_ℓ⋯Y_{j+1} N_j N_j^* (Y_p⋯Y_{j+1})^*
/// ∂_z^{ℓ-j} ∂̄_w^{p-j} (1 - z w̄)^{-2(η+j)}` with `a_{ℓj} = 1/((ℓ-j)! (2η+2j)_{ℓ-j})`.
pub fn bundle_kernel(params: &ElementaryBundleParams, z: C64, w: C64) -> CMat {
    let size = params.size();
    let offsets = params.offsets();
    let blocks = params.dims.len();
    let mut out = CMat::zeros(size, size);
    let nn: Vec<CMat> = params.n.iter().map(|nj| nj * nj.adjoint()).collect();
    for l in 0..blocks {
        for p in 0..blocks {
            let mut block = CMat::zeros(params.dims[l], params.dims[p]);
            for j in 0..=l.min(p) {
                let s = 2.0 * (params.eta + j as f64);
                let d = power_deriv(s, &[z], &[w], &[(l - j) as u32], &[(p - j) as u32]);
                let c = params.coeff(l, j) * params.coeff(p, j);
                block += (params.y_product(l, j) * &nn[j] * params.y_product(p, j).adjoint()).scale(c) * d;
            }
            out.view_mut((offsets[l], offsets[p]), (params.dims[l], params.dims[p])).copy_from(&block);
        }
    }
    out
}

/// A disc automorphism `z ↦ (az + b)/(cz + d)` normalized to `SU(1,1)`:
/// `ad - bc = 1`, `d = ā`, `c = b̄`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Automorphism {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub d: C64,
}

impl Automorphism {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Result<Self> {
        let scale = a.norm().max(1.0);
        let det = a * d - b * c;
        if !((det - 1.0).norm() <= AUT_TOL * scale * scale) {
            return Err(Error::NotAnAutomorphism(format!("ad - bc = {det}, expected 1")));
        }
        if !((d - a.conj()).norm() <= AUT_TOL * scale && (c - b.conj()).norm() <= AUT_TOL * scale) {
            return Err(Error::NotAnAutomorphism("coefficients do not preserve the unit disc".into()));
        }
        Ok(Automorphism { a, b, c, d })
    }

    pub fn identity() -> Self {
        let one = C64::new(1.0, 0.0);
        let zero = C64::new(0.0, 0.0);
        Automorphism { a: one, b: zero, c: zero, d: one }
    }

    /// `z ↦ e^{iθ}(z - α)/(1 - ᾱz)`.
    pub fn rotation_mobius(theta: f64, alpha: C64) -> Result<Self> {
        if !(alpha.norm() < 1.0) {
            return Err(Error::ParameterOutsideDisc(format!("alpha = {alpha}")));
        }
        let t = C64::from_polar(1.0, theta / 2.0);
        let n = 1.0 / (1.0 - alpha.norm_sqr()).sqrt();
        Self::new(t * n, -t * alpha * n, -alpha.conj() * t.conj() * n, t.conj() * n)
    }

    /// The involution `φ_α(z) = (α - z)/(1 - ᾱz)`.
    pub fn phi(alpha: C64) -> Result<Self> {
        Self::rotation_mobius(std::f64::consts::PI, alpha)
    }

    pub fn apply(&self, z: C64) -> C64 {
        (self.a * z + self.b) / (self.c * z + self.d)
    }

    /// `g'(z) = (cz + d)^{-2}`.
    pub fn derivative(&self, z: C64) -> C64 {
        (self.c * z + self.d).powi(-2)
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &Automorphism) -> Automorphism {
        Automorphism {
            a: self.a * other.a + self.b * other.c,
            b: self.a * other.b + self.b * other.d,
            c: self.c * other.a + self.d * other.c,
            d: self.c * other.b + self.d * other.d,
        }
    }

    /// `(cz + d)^e` on the branch `d^e (1 + (c/d) z)^e`.
    fn cz_d_pow(&self, z: C64, e: f64) -> C64 {
        self.d.powf(e) * (C64::new(1.0, 0.0) + self.c / self.d * z).powf(e)
    }
}

/// `J_g(z)` with block `(p, ℓ)` equal to
/// `(1/(p-ℓ)!) (-c)^{p-ℓ} g'(z)^{η + (p+ℓ)/2} Y_p⋯Y_{ℓ+1}` for `p ≥ ℓ`.
pub fn multiplier(params: &ElementaryBundleParams, g: &Automorphism, z: C64) -> CMat {
    let size = params.size();
    let offsets = params.offsets();
    let mut out = CMat::zeros(size, size);
    for p in 0..params.dims.len() {
        for l in 0..=p {
            let k = (p - l) as i32;
            let fact: f64 = (1..=k).map(f64::from).product();
            let factor = (-g.c).powi(k) / fact * g.cz_d_pow(z, -2.0 * params.eta - (p + l) as f64);
            let block = params.y_product(p, l) * factor;
            out.view_mut((offsets[p], offsets[l]), (params.dims[p], params.dims[l])).copy_from(&block);
        }
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct QuasiInvarianceReport {
    pub residual: f64,
    pub passed: bool,
}

/// Max over the pairs of `‖J_g(z) K(gz, gw) J_g(w)^* - K(z, w)‖`.
pub fn multiplier_quasi_invariance(
    params: &ElementaryBundleParams,
    g: &Automorphism,
    pairs: &[(C64, C64)],
    tol: f64,
) -> Result<QuasiInvarianceReport> {
    let g = Automorphism::new(g.a, g.b, g.c, g.d)?;
    for &(z, w) in pairs {
        for p in [z, w] {
            if !(p.norm() < 1.0) {
                return Err(Error::PointOutsideDomain { coords: p.to_string(), domain: Domain::Disc.to_string() });
            }
        }
    }
    let residual = pairs
        .par_iter()
        .map(|&(z, w)| {
            let lhs = multiplier(params, &g, z) * bundle_kernel(params, g.apply(z), g.apply(w)) * multiplier(params, &g, w).adjoint();
            (lhs - bundle_kernel(params, z, w)).norm()
        })
        .reduce(|| 0.0, f64::max);
    Ok(QuasiInvarianceReport { residual, passed: residual <= tol })
}

/// `‖J_{g∘h}(z) - J_h(z) J_g(h(z))‖`. This is the order in which
/// `K(z,w) = J_g(z) K(gz, gw) J_g(w)^*` composes.
pub fn cocycle_residual(params: &ElementaryBundleParams, g: &Automorphism, h: &Automorphism, z: C64) -> f64 {
    let lhs = multiplier(params, &g.compose(h), z);
    let rhs = multiplier(params, h, z) * multiplier(params, g, h.apply(z));
    (lhs - rhs).norm()
}

/// Seeded pairs `(z, w)` uniform in the disc of radius `max_radius`.
pub fn sample_pairs(seed: u64, count: usize, max_radius: f64) -> Vec<(C64, C64)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut point = || C64::from_polar(max_radius * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>());
    (0..count).map(|_| (point(), point())).collect()
}

/// Sampled positivity of `K_N^{(η,Y)}` on `grid` for each `η` in `etas`.
pub fn eta_positivity_scan(
    params: &ElementaryBundleParams,
    etas: &[f64],
    grid: &SampleGrid,
    rel_tol: f64,
) -> Result<Vec<(f64, PDReport)>> {
    if grid.domain() != Domain::Disc {
        return Err(Error::DomainMismatch { expected: Domain::Disc.to_string(), found: grid.domain().to_string() });
    }
    etas.iter()
        .map(|&eta| {
            let p = params.with_eta(eta)?;
            let gram = gram_matrix_with(p.size(), "bundle", grid, |z, w| Ok(bundle_kernel(&p, z.z(), w.z())))?;
            Ok((eta, nnd_verdict(&gram.entries, rel_tol)?))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::operator_norm;

    #[test]
    fn wlambda_examples() {
        let m = wlambda_model(1.0, 8).unwrap();
        assert!(m.weights.iter().all(|w| *w == 1.0));
        let m = wlambda_model(2.0, 8).unwrap();
        assert!((m.weights[0] - 0.5f64.sqrt()).abs() < 1e-15);
        assert_eq!(m.shift[(1, 0)], C64::new(0.5f64.sqrt(), 0.0));
        let m = wlambda_model(2.7, 6).unwrap();
        assert_eq!(m.frame_coeffs[0], 1.0);
        assert!((m.frame_coeffs[1].powi(2) - 2.7).abs() < 1e-14);
        assert!(wlambda_model(0.0, 6).is_err() && wlambda_model(1.0, 3).is_err());
    }

    #[test]
    fn weights_are_monotone() {
        let up = wlambda_model(3.0, 30).unwrap().weights;
        assert!(up.windows(2).all(|w| w[0] < w[1] && w[1] < 1.0));
        let down = wlambda_model(0.4, 30).unwrap().weights;
        assert!(down.windows(2).all(|w| w[0] > w[1] && w[1] > 1.0));
    }

    #[test]
    fn shift_norm_matches_weights() {
        for lambda in [0.3, 0.7, 1.0, 1.5, 4.0] {
            let m = wlambda_model(lambda, 24).unwrap();
            let norm = operator_norm(&m.shift);
            assert!(norm <= m.max_weight() + 1e-12);
            if lambda >= 1.0 {
                assert!(norm <= 1.0 + 1e-12);
            } else {
                assert!(norm > 1.0);
            }
        }
    }

    #[test]
    fn frame_kernel_curvature() {
        for lambda in [0.5, 1.0, 2.5] {
            let k = wlambda_model(lambda, 400).unwrap().frame_kernel().unwrap();
            for r in [0.0, 0.35, 0.7] {
                let w = DomainPoint::disc(C64::from_polar(r, 1.1)).unwrap();
                let expected = -lambda / (1.0 - r * r).powi(2);
                assert!((curvature_form(&k, &w).unwrap().scalar() - expected).abs() < 1e-7);
            }
        }
    }

    #[test]
    fn homogeneity_examples() {
        for s in [0.5, 1.0, 2.0, 3.0] {
            let r = homogeneity_check(&KernelSpec::power_disc(s).unwrap(), &default_alpha_grid(), 1e-7).unwrap();
            assert!(r.homogeneous, "s = {s}");
        }
        let perturbed = KernelSpec::diagonal_series(vec![1.0, 1.0, 1.0, 3.0]).unwrap();
        let r = homogeneity_check(&perturbed, &default_alpha_grid(), 1e-7).unwrap();
        assert!(!r.homogeneous);
        assert_eq!(r.rows[0].residual, 0.0);
        let r = homogeneity_check(&perturbed, &[C64::new(0.0, 0.0)], 0.0).unwrap();
        assert!(r.homogeneous);
    }

    #[test]
    fn gram0_examples() {
        let g = elementary_bundle_gram0(&ElementaryBundleParams::scalar(0.7).unwrap()).unwrap();
        assert_eq!(g.k00[(0, 0)], C64::new(1.0, 0.0));
        assert_eq!(g.h[(0, 0)], C64::new(1.0, 0.0));

        let (eta, y) = (0.8, C64::new(0.6, -1.1));
        let p = ElementaryBundleParams::two_block(eta, y).unwrap();
        let g = elementary_bundle_gram0(&p).unwrap();
        assert!((g.k00[(0, 0)] - 1.0).norm() < 1e-12);
        assert!((g.k00[(1, 1)] - (y.norm_sqr() / (2.0 * eta) + 1.0)).norm() < 1e-12);
        assert_eq!(g.k00[(0, 1)], C64::new(0.0, 0.0));
        assert!((&g.k00 * &g.h - CMat::identity(2, 2)).norm() < 1e-12);

        let c = C64::new(1.5, 0.5);
        let scaled = p.with_n(p.n_blocks().iter().map(|n| n * c).collect()).unwrap();
        let gs = elementary_bundle_gram0(&scaled).unwrap();
        assert!((gs.k00 - g.k00.scale(c.norm_sqr())).norm() < 1e-12);
    }

    #[test]
    fn singular_block_is_reported() {
        let p = ElementaryBundleParams::scalar(1.0).unwrap().with_n(vec![CMat::zeros(1, 1)]).unwrap();
        assert!(matches!(elementary_bundle_gram0(&p), Err(Error::SingularBlock(_))));
    }

    #[test]
    fn shapes_are_validated() {
        let y = vec![CMat::zeros(1, 2)];
        let n = vec![CMat::identity(1, 1), CMat::identity(1, 1)];
        assert!(ElementaryBundleParams::new(1.0, vec![1, 1], y, n).is_err());
        assert!(ElementaryBundleParams::new(-1.0, vec![1], vec![], vec![CMat::identity(1, 1)]).is_err());
    }

    #[test]
    fn reconstruction_matches_gram0() {
        let p = three_block();
        let k = bundle_kernel(&p, C64::new(0.0, 0.0), C64::new(0.0, 0.0));
        assert!((k - elementary_bundle_gram0(&p).unwrap().k00).norm() < 1e-13);
    }

    fn three_block() -> ElementaryBundleParams {
        let c = |re, im| C64::new(re, im);
        let y1 = CMat::from_row_slice(2, 1, &[c(0.4, 0.3), c(-1.2, 0.0)]);
        let y2 = CMat::from_row_slice(1, 2, &[c(0.7, -0.2), c(0.1, 0.9)]);
        let n0 = CMat::from_element(1, 1, c(1.3, 0.0));
        let n1 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.6, 0.2)]);
        let n2 = CMat::from_element(1, 1, c(0.9, -0.4));
        ElementaryBundleParams::new(0.65, vec![1, 2, 1], vec![y1, y2], vec![n0, n1, n2]).unwrap()
    }

    #[test]
    fn quasi_invariance() {
        let pairs = sample_pairs(7, 10, 0.7);
        let g = Automorphism::phi(C64::new(0.3, 0.0)).unwrap();
        for eta in [0.35, 1.0, 1.7] {
            let r = multiplier_quasi_invariance(&ElementaryBundleParams::scalar(eta).unwrap(), &g, &pairs, 1e-8).unwrap();
            assert!(r.passed, "eta = {eta}, residual {}", r.residual);
        }
        let id = Automorphism::identity();
        let r = multiplier_quasi_invariance(&three_block(), &id, &pairs, 0.0).unwrap();
        assert_eq!(r.residual, 0.0);
        let g = Automorphism::rotation_mobius(0.9, C64::new(-0.2, 0.45)).unwrap();
        for p in [ElementaryBundleParams::two_block(0.8, C64::new(0.6, -1.1)).unwrap(), three_block()] {
            let r = multiplier_quasi_invariance(&p, &g, &pairs, 1e-8).unwrap();
            assert!(r.passed, "residual {}", r.residual);
        }
    }

    #[test]
    fn non_automorphisms_are_rejected() {
        let c = |re| C64::new(re, 0.0);
        assert!(matches!(Automorphism::new(c(2.0), c(0.0), c(0.0), c(0.5)), Err(Error::NotAnAutomorphism(_))));
        let bad = Automorphism { a: c(2.0), b: c(0.0), c: c(0.0), d: c(1.0) };
        let p = ElementaryBundleParams::scalar(1.0).unwrap();
        assert!(multiplier_quasi_invariance(&p, &bad, &[(c(0.1), c(0.2))], 1e-8).is_err());
    }

    #[test]
    fn cocycle() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let aut = |rng: &mut ChaCha8Rng| {
            let theta = rng.random_range(-0.5..0.5);
            let alpha = C64::from_polar(0.5 * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
            Automorphism::rotation_mobius(theta, alpha).unwrap()
        };
        let p = ElementaryBundleParams::new(
            0.9,
            vec![1, 1, 1],
            vec![CMat::from_element(1, 1, C64::new(0.5, 0.2)), CMat::from_element(1, 1, C64::new(-1.0, 0.3))],
            vec![CMat::identity(1, 1); 3],
        )
        .unwrap();
        for _ in 0..5 {
            let (g, h) = (aut(&mut rng), aut(&mut rng));
            let z = C64::from_polar(0.6 * rng.random::<f64>(), std::f64::consts::TAU * rng.random::<f64>());
            assert!(cocycle_residual(&p, &g, &h, z) < 1e-8);
        }
    }

    #[test]
    fn eta_scan_is_monotone() {
        let grid = SampleGrid::radial_rings(Domain::Disc, &[0.0, 0.4, 0.8], 6).unwrap();
        let p = ElementaryBundleParams::two_block(1.0, C64::new(1.5, 0.0)).unwrap();
        let etas: Vec<f64> = (1..=20).map(|k| 0.1 * k as f64).collect();
        let scan = eta_positivity_scan(&p, &etas, &grid, 1e-9).unwrap();
        let first = scan.iter().position(|(_, r)| r.passes()).unwrap();
        assert!(scan[first..].iter().all(|(_, r)| r.passes()));
    }

    #[test]
    fn params_json() {
        let p = ElementaryBundleParams::parse(r#"{"eta": 0.8, "dims": [1, 1], "Y": [[[[0.6, -1.1]]]]}"#).unwrap();
        assert_eq!(p, ElementaryBundleParams::two_block(0.8, C64::new(0.6, -1.1)).unwrap());
        let e = ElementaryBundleParams::parse(r#"{"eta": 0.8, "dims": [1, 1], "Y": [[[1, 2]]]}"#).unwrap_err();
        assert!(matches!(e, Error::SpecParse { .. }));
        assert!(ElementaryBundleParams::parse(r#"{"eta": 1, "dims": [1], "extra": 0}"#).is_err());
    }
}
