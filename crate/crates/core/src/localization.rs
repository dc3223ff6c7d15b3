//! Local data of a rank-one kernel at a point: the jet Gram matrix of
//! `{γ, ∂₁γ, …, ∂_mγ}`, its orthonormalization and the nilpotent operators
//! `N_k` induced by `T_k - w_k`.

use serde::Serialize;

use crate::kernel::KernelSpec;
use crate::linalg::{hermitian_eigen, inv_sqrt_hermitian, max_abs};
use crate::poly::Poly;
use crate::{CMat, DomainPoint, Error, Result, C64};

/// Eigenvalue floor of the inverse square root.
pub const GRAM_FLOOR: f64 = 1e-12;

fn unit(dim: usize, i: usize) -> Vec<u32> {
    let mut v = vec![0; dim];
    if i > 0 {
        v[i - 1] = 1;
    }
    v
}

/// Gram matrix of `{γ, ∂₁γ, …, ∂_mγ}` at `w₀`: entry `(i, j)` is
/// `∂_z^{(j)} ∂̄_w^{(i)} K(w₀, w₀)`, index 0 standing for no derivative.
pub fn jet_gram(spec: &KernelSpec, w0: &DomainPoint) -> Result<CMat> {
    spec.require_scalar()?;
    if w0.domain() != spec.domain() {
        return Err(Error::DomainMismatch { expected: spec.domain().to_string(), found: w0.domain().to_string() });
    }
    let m = w0.dim();
    let x = w0.coords();
    let mut g = CMat::zeros(m + 1, m + 1);
    for i in 0..=m {
        for j in i..=m {
            let v = spec.raw_scalar_deriv(x, x, &unit(m, j), &unit(m, i))?;
            g[(i, j)] = v;
            g[(j, i)] = v.conj();
        }
        g[(i, i)] = C64::new(g[(i, i)].re, 0.0);
    }
    Ok(g)
}

/// How the orthonormal basis of the jet space is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Orthonormalization {
    /// `B = G^{-1/2}`.
    #[default]
    Symmetric,
    /// Gram-Schmidt in the order `γ, ∂₁γ, …`: `B = L^{-*}` with `G = L L^*`.
    Sequential,
}

/// Local data at a point.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalFrameData {
    pub at: DomainPoint,
    /// Jet Gram of the frame in use.
    pub gram: CMat,
    /// The frame satisfies `‖γ(w₀)‖ = 1` and `γ(w₀) ⟂ ∂_kγ(w₀)`.
    pub normalized: bool,
    /// Columns are the coordinates of an orthonormal basis: `B^* G B = I`.
    pub basis: Option<CMat>,
    /// `A_{ik}`: first-row entries of `N_k` in the orthonormal basis.
    pub a: Option<CMat>,
    /// `N_k` in the orthonormal basis.
    pub nilpotents: Vec<CMat>,
}

impl LocalFrameData {
    /// `(tr N_k N_j^*)_{k,j}`.
    pub fn trace_matrix(&self) -> CMat {
        let m = self.nilpotents.len();
        CMat::from_fn(m, m, |k, j| (&self.nilpotents[k] * self.nilpotents[j].adjoint()).trace())
    }

    /// `Aᵗ Ā`.
    pub fn a_gram(&self) -> Option<CMat> {
        self.a.as_ref().map(|a| a.transpose() * a.map(|c| c.conj()))
    }

    /// Largest entry of any product `N_k N_j`.
    pub fn nilpotency_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in &self.nilpotents {
            for b in &self.nilpotents {
                worst = worst.max(max_abs(&(a * b)));
            }
        }
        worst
    }

    /// `h(w₀) = (-𝒦(w₀))^{-1/2}` for `m = 1`.
    pub fn h(&self) -> Option<f64> {
        (self.gram.nrows() == 2).then(|| 1.0 / self.gram[(1, 1)].re.sqrt())
    }
}

/// Jet Gram of the normalized frame `γ̂ = ⟨γ, γ(w₀)⟩^{-1} γ` at `w₀`:
/// `1 ⊕ (G₀₀ G_{ij} - G_{i0} G_{0j}) / G₀₀²`, which is `-𝒦ᵗ` in the lower block.
pub fn normalize_frame(spec: &KernelSpec, w0: &DomainPoint) -> Result<LocalFrameData> {
    let g = jet_gram(spec, w0)?;
    let g00 = g[(0, 0)].re;
    if !(g00 > 0.0) || !g00.is_finite() {
        return Err(Error::NormalizerVanishes { at: w0.to_string() });
    }
    let m = g.nrows() - 1;
    let mut out = CMat::zeros(m + 1, m + 1);
    out[(0, 0)] = C64::new(1.0, 0.0);
    for i in 1..=m {
        for j in 1..=m {
            out[(i, j)] = (g[(0, 0)] * g[(i, j)] - g[(i, 0)] * g[(0, j)]) / (g00 * g00);
        }
        out[(i, i)].im = 0.0;
    }
    Ok(LocalFrameData { at: w0.clone(), gram: out, normalized: true, basis: None, a: None, nilpotents: Vec::new() })
}

/// Orthonormal basis, nilpotents and `A` from the normalized frame.
pub fn nilpotent_data(spec: &KernelSpec, w0: &DomainPoint, method: Orthonormalization) -> Result<LocalFrameData> {
    let mut data = normalize_frame(spec, w0)?;
    let g = &data.gram;
    let n = g.nrows();
    let m = n - 1;
    let b = match method {
        Orthonormalization::Symmetric => inv_sqrt_hermitian(g, GRAM_FLOOR)?,
        Orthonormalization::Sequential => {
            let min = hermitian_eigen(g).0[0];
            if min < GRAM_FLOOR {
                return Err(Error::SingularGram { min_eig: min });
            }
            let chol = nalgebra::linalg::Cholesky::new((g + g.adjoint()).scale(0.5))
                .ok_or(Error::SingularGram { min_eig: min })?;
            chol.l().adjoint().try_inverse().ok_or(Error::SingularGram { min_eig: min })?
        }
    };
    let b_inv = b.clone().try_inverse().ok_or(Error::SingularGram { min_eig: 0.0 })?;
    let nilpotents: Vec<CMat> = (1..=m)
        .map(|k| CMat::from_fn(n, n, |l, i| b_inv[(l, 0)] * b[(k, i)]))
        .collect();
    let a = CMat::from_fn(n, m, |i, k| nilpotents[k][(0, i)]);
    data.basis = Some(b);
    data.a = Some(a.rows(1, m).into_owned());
    data.nilpotents = nilpotents;
    Ok(data)
}

/// `p / q` for polynomials `p`, `q`.
#[derive(Clone, Debug, PartialEq)]
pub struct Rational {
    pub num: Poly,
    pub den: Poly,
}

impl Rational {
    pub fn new(num: Poly, den: Poly) -> Self {
        Rational { num, den }
    }

    pub fn polynomial(num: Poly) -> Self {
        Rational { num, den: Poly::constant(C64::new(1.0, 0.0)) }
    }

    /// `φ_α(z) = (α - z) / (1 - ᾱ z)`.
    pub fn mobius(alpha: C64) -> Self {
        let one = C64::new(1.0, 0.0);
        Rational { num: Poly::new(vec![alpha, -one]), den: Poly::new(vec![one, -alpha.conj()]) }
    }

    /// Value and derivative at `z`.
    pub fn eval_with_derivative(&self, z: C64) -> Result<(C64, C64)> {
        let q = self.den.eval(z);
        if q.norm() <= 1e-14 * self.den.max_abs().max(1.0) {
            return Err(Error::PoleAtPoint(format!("{z}")));
        }
        let p = self.num.eval(z);
        let dp = self.num.derivative().eval(z);
        let dq = self.den.derivative().eval(z);
        Ok((p / q, (dp * q - p * dq) / (q * q)))
    }
}

/// `f(T)` restricted to `ker (T - w₀)²`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct LocalMatrix2 {
    /// `[[f(w₀), f'(w₀) h(w₀)], [0, f(w₀)]]`.
    pub value: [[C64; 2]; 2],
    pub h: f64,
}

impl LocalMatrix2 {
    /// Operator norm of the nilpotent part.
    pub fn off_diagonal_norm(&self) -> f64 {
        self.value[0][1].norm()
    }
}

pub fn local_functional_calculus(spec: &KernelSpec, w0: C64, f: &Rational) -> Result<LocalMatrix2> {
    let point = DomainPoint::disc(w0)?;
    let data = nilpotent_data(spec, &point, Orthonormalization::Symmetric)?;
    let h = data.h().ok_or_else(|| Error::InvalidSpec("local functional calculus needs one variable".into()))?;
    let (v, dv) = f.eval_with_derivative(w0)?;
    let zero = C64::new(0.0, 0.0);
    Ok(LocalMatrix2 { value: [[v, dv * h], [zero, v]], h })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::curvature::curvature_form;
    use crate::kernel::normalize_at;
    use crate::Domain;

    fn disc(re: f64, im: f64) -> DomainPoint {
        DomainPoint::disc_xy(re, im).unwrap()
    }

    fn bidisc_szego() -> KernelSpec {
        KernelSpec::product_polydisc(vec![KernelSpec::szego(), KernelSpec::szego()]).unwrap()
    }

    fn diag(v: &[f64]) -> CMat {
        CMat::from_fn(v.len(), v.len(), |i, j| if i == j { C64::new(v[i], 0.0) } else { C64::new(0.0, 0.0) })
    }

    #[test]
    fn jet_gram_examples() {
        let o = disc(0.0, 0.0);
        for s in [0.5, 2.0] {
            let g = jet_gram(&KernelSpec::power_disc(s).unwrap(), &o).unwrap();
            assert!((g - diag(&[1.0, s])).norm() < 1e-14);
        }
        let g = jet_gram(&bidisc_szego(), &DomainPoint::origin(Domain::Polydisc(2))).unwrap();
        assert!((g - diag(&[1.0, 1.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn normalized_gram_examples() {
        let base = disc(0.5, 0.0);
        let d = normalize_frame(&KernelSpec::szego(), &base).unwrap();
        assert!((d.gram[(1, 1)].re - 0.75f64.powi(-2)).abs() < 1e-12);
        assert_eq!(d.gram[(0, 1)], C64::new(0.0, 0.0));
        let kappa = curvature_form(&KernelSpec::szego(), &base).unwrap().scalar();
        assert!((d.gram[(1, 1)].re + kappa).abs() < 1e-12);

        let spec = KernelSpec::power_disc(1.6).unwrap();
        let direct = jet_gram(&normalize_at(&spec, &base).unwrap(), &base).unwrap();
        let d = normalize_frame(&spec, &base).unwrap();
        assert!((direct - &d.gram).norm() < 1e-10);

        let scaled = normalize_frame(&KernelSpec::scaled(spec, 4.0).unwrap(), &base).unwrap();
        assert!((scaled.gram - d.gram).norm() < 1e-12);
    }

    #[test]
    fn nilpotent_examples() {
        let o = disc(0.0, 0.0);
        let s = 2.0;
        let d = nilpotent_data(&KernelSpec::power_disc(s).unwrap(), &o, Orthonormalization::Symmetric).unwrap();
        let n = &d.nilpotents[0];
        assert!((n[(0, 1)].re - 1.0 / s.sqrt()).abs() < 1e-14);
        assert!(n[(0, 0)].norm() + n[(1, 0)].norm() + n[(1, 1)].norm() < 1e-14);
        assert!((d.a_gram().unwrap()[(0, 0)].re - 1.0 / s).abs() < 1e-14);

        let d = nilpotent_data(&bidisc_szego(), &DomainPoint::origin(Domain::Polydisc(2)), Orthonormalization::Symmetric).unwrap();
        assert!((d.a.clone().unwrap() - CMat::identity(2, 2)).norm() < 1e-14);
        assert!(d.nilpotency_residual() < 1e-14);
    }

    #[test]
    fn orthonormalizations_agree_on_a_gram() {
        let spec = KernelSpec::power_ball(2.5, 2).unwrap();
        let w = DomainPoint::new(Domain::Ball(2), vec![C64::new(0.3, 0.1), C64::new(-0.2, 0.4)]).unwrap();
        let sym = nilpotent_data(&spec, &w, Orthonormalization::Symmetric).unwrap();
        let seq = nilpotent_data(&spec, &w, Orthonormalization::Sequential).unwrap();
        assert!((sym.a_gram().unwrap() - seq.a_gram().unwrap()).norm() < 1e-12);
        assert!((sym.trace_matrix() - sym.a_gram().unwrap()).norm() < 1e-12);
        let kappa = curvature_form(&spec, &w).unwrap().matrix;
        let target = (-kappa.transpose()).try_inverse().unwrap();
        assert!((sym.a_gram().unwrap() - target).norm() < 1e-10);
    }

    #[test]
    fn functional_calculus_examples() {
        let szego = KernelSpec::szego();
        let id = Rational::polynomial(Poly::monomial(1));
        let r = local_functional_calculus(&szego, C64::new(0.0, 0.0), &id).unwrap();
        assert!((r.value[0][1] - 1.0).norm() < 1e-14 && r.value[0][0].norm() < 1e-15);

        let w0 = C64::new(0.3, -0.5);
        let r = local_functional_calculus(&szego, w0, &Rational::mobius(w0)).unwrap();
        assert!(r.value[0][0].norm() < 1e-14);
        assert!((r.off_diagonal_norm() - 1.0).abs() < 1e-12);

        let c = C64::new(2.0, 1.0);
        let r = local_functional_calculus(&szego, w0, &Rational::polynomial(Poly::constant(c))).unwrap();
        assert_eq!(r.value[0][1], C64::new(0.0, 0.0));
        assert_eq!(r.value[1][1], c);

        let pole = Rational::new(Poly::constant(C64::new(1.0, 0.0)), Poly::new(vec![-w0, C64::new(1.0, 0.0)]));
        assert!(matches!(local_functional_calculus(&szego, w0, &pole), Err(Error::PoleAtPoint(_))));
    }
}
