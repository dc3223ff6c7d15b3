//! Kernel families and their polarized derivatives.
//!
//! A [`KernelSpec`] is a symbolic description of a kernel `K(z, w)` that is
//! holomorphic in `z` and anti-holomorphic in `w`. Evaluation goes through
//! [`eval_derivative`], which returns `∂_z^p ∂̄_w^q K(z, w)` as a `k × k`
//! matrix (`1 × 1` for scalar kernels).
//!
//! Three differentiation routes exist:
//!
//! - closed form: analytic formulas for the power kernels and diagonal
//!   series, and Leibniz expansions for the wrappers built from them;
//! - termwise series: differentiation of the truncated diagonal series;
//! - Cauchy integrals: trapezoid rule on circles around `z` and `w̄`, which
//!   only needs kernel values and therefore works for every family.
//!
//! [`Method::Auto`] uses closed forms wherever a node has one and falls back
//! to Cauchy integrals on the nodes that do not (normalized and transported
//! kernels).

mod eval;
pub mod json;
pub mod series;

use std::fmt;

use crate::domain::fmt_coords;
use crate::poly::Poly;
use crate::{CMat, Domain, DomainPoint, Error, Result, C64};

pub(crate) use eval::{binom, power_deriv, Route};

/// Highest per-variable order accepted by [`Method::ClosedForm`].
pub const CLOSED_FORM_ORDER_LIMIT: u32 = 8;

/// Default truncation for series conversions of closed-form disc kernels.
pub const DEFAULT_SERIES_TERMS: usize = 200;

/// Default trapezoid node count for Cauchy integrals.
pub const DEFAULT_CAUCHY_NODES: usize = 64;

/// Largest matrix-kernel size.
pub const MAX_MATRIX_SIZE: usize = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum Family {
    /// `(1 - z w̄)^{-s}` on the disc.
    PowerDisc { s: f64 },
    /// `Σ a_n zⁿ w̄ⁿ` on the disc.
    DiagonalSeries { coeffs: Vec<f64> },
    /// `(1 - ⟨z, w⟩)^{-s}` on the ball in `C^dim`.
    PowerBall { s: f64, dim: usize },
    /// `Π K_i(z_i, w_i)` on the polydisc, one disc factor per coordinate.
    ProductPolydisc { factors: Vec<KernelSpec> },
    /// `(∂_v^ℓ ∂̄_v^j K)_{ℓ, j < order}` along the direction `v`.
    MatrixJet { inner: Box<KernelSpec>, order: usize, direction: Vec<C64> },
    /// Formal real power of a diagonal series; `coeffs` caches the result.
    FormalPower { base: Box<KernelSpec>, t: f64, coeffs: Vec<f64> },
    /// `K(w₀,w₀)^{1/2} K(z,w₀)^{-1} K(z,w) K(w₀,w)^{-1} K(w₀,w₀)^{1/2}`.
    Normalized { inner: Box<KernelSpec>, base: DomainPoint },
    /// `φ_α'(z)^{s/2} K(φ_α z, φ_α w) conj(φ_α'(w))^{s/2}`,
    /// `φ_α(z) = (α - z) / (1 - ᾱ z)`.
    MobiusTransported { inner: Box<KernelSpec>, alpha: C64, s: f64 },
    /// `c K`.
    Scaled { inner: Box<KernelSpec>, c: f64 },
    /// `φ(z) K(z, w) conj(φ(w))` for a polynomial `φ` on the disc.
    FrameScaled { inner: Box<KernelSpec>, poly: Poly },
    /// `(1 - ⟨z, w⟩)^k K` on disc and ball, `Π (1 - z_i w̄_i)^k K` on the polydisc.
    Deflated { inner: Box<KernelSpec>, order: u32 },
    /// Pointwise product of scalar kernels on a common domain.
    Product { factors: Vec<KernelSpec> },
    /// `(K ∂_i∂̄_j K - ∂_i K ∂̄_j K)_{i,j}`, the polarized form of `K² ∂_i∂̄_j log K`.
    KTilde { inner: Box<KernelSpec> },
    /// `[[K₀, ∂̄K₀], [∂K₀, ∂∂̄K₀ + K₁]]`.
    Flag { k0: Box<KernelSpec>, k1: Box<KernelSpec> },
}

/// An immutable kernel description together with a human readable label.
#[derive(Clone, Debug, PartialEq)]
pub struct KernelSpec {
    family: Family,
    label: String,
}

impl KernelSpec {
    /// Builds a spec after structural validation. Exponents are not required
    /// to be positive here, so that deflated powers such as `(1 - z w̄)^{0.4}`
    /// remain representable; the named constructors enforce positivity.
    pub fn new(family: Family) -> Result<Self> {
        validate(&family)?;
        let label = default_label(&family);
        Ok(KernelSpec { family, label })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn power_disc(s: f64) -> Result<Self> {
        positive("s", s)?;
        Self::new(Family::PowerDisc { s })
    }

    /// The Szegő kernel `(1 - z w̄)^{-1}`.
    pub fn szego() -> Self {
        Self::power_disc(1.0).expect("valid").with_label("szego")
    }

    /// The Bergman kernel `(1 - z w̄)^{-2}`.
    pub fn bergman() -> Self {
        Self::power_disc(2.0).expect("valid").with_label("bergman")
    }

    pub fn diagonal_series(coeffs: Vec<f64>) -> Result<Self> {
        if let Some(c) = coeffs.iter().find(|c| **c < 0.0) {
            return Err(Error::InvalidSpec(format!("negative series coefficient {c}")));
        }
        Self::new(Family::DiagonalSeries { coeffs })
    }

    pub fn power_ball(s: f64, dim: usize) -> Result<Self> {
        positive("s", s)?;
        Self::new(Family::PowerBall { s, dim })
    }

    pub fn product_polydisc(factors: Vec<KernelSpec>) -> Result<Self> {
        Self::new(Family::ProductPolydisc { factors })
    }

    pub fn scaled(inner: KernelSpec, c: f64) -> Result<Self> {
        positive("c", c)?;
        Self::new(Family::Scaled { inner: Box::new(inner), c })
    }

    pub fn frame_scaled(inner: KernelSpec, poly: Poly) -> Result<Self> {
        Self::new(Family::FrameScaled { inner: Box::new(inner), poly })
    }

    pub fn deflated(inner: KernelSpec, order: u32) -> Result<Self> {
        Self::new(Family::Deflated { inner: Box::new(inner), order })
    }

    pub fn product(factors: Vec<KernelSpec>) -> Result<Self> {
        Self::new(Family::Product { factors })
    }

    pub fn ktilde(inner: KernelSpec) -> Result<Self> {
        Self::new(Family::KTilde { inner: Box::new(inner) })
    }

    pub fn flag(k0: KernelSpec, k1: KernelSpec) -> Result<Self> {
        Self::new(Family::Flag { k0: Box::new(k0), k1: Box::new(k1) })
    }

    /// Jet kernel of order `order` along `direction` (length = domain dimension).
    pub fn matrix_jet(inner: KernelSpec, order: usize, direction: Vec<C64>) -> Result<Self> {
        Self::new(Family::MatrixJet { inner: Box::new(inner), order, direction })
    }

    pub fn domain(&self) -> Domain {
        match &self.family {
            Family::PowerDisc { .. } | Family::DiagonalSeries { .. } | Family::FormalPower { .. } => Domain::Disc,
            Family::PowerBall { dim, .. } => Domain::ball(*dim),
            Family::ProductPolydisc { factors } => Domain::polydisc(factors.len()),
            Family::Product { factors } => factors[0].domain(),
            Family::Flag { k0, .. } => k0.domain(),
            Family::MatrixJet { inner, .. }
            | Family::Normalized { inner, .. }
            | Family::MobiusTransported { inner, .. }
            | Family::Scaled { inner, .. }
            | Family::FrameScaled { inner, .. }
            | Family::Deflated { inner, .. }
            | Family::KTilde { inner } => inner.domain(),
        }
    }

    /// Side length of the values: 1 for scalar kernels.
    pub fn size(&self) -> usize {
        match &self.family {
            Family::MatrixJet { order, .. } => *order,
            Family::KTilde { inner } => inner.domain().dim(),
            Family::Flag { .. } => 2,
            Family::Normalized { inner, .. }
            | Family::MobiusTransported { inner, .. }
            | Family::Scaled { inner, .. }
            | Family::Deflated { inner, .. } => inner.size(),
            _ => 1,
        }
    }

    pub fn is_scalar(&self) -> bool {
        self.size() == 1
    }

    fn check_point(&self, z: &DomainPoint) -> Result<()> {
        if z.domain() != self.domain() {
            return Err(Error::DomainMismatch {
                expected: self.domain().to_string(),
                found: z.domain().to_string(),
            });
        }
        Ok(())
    }

    /// `K(z, w)`.
    pub fn eval(&self, z: &DomainPoint, w: &DomainPoint) -> Result<CMat> {
        self.check_point(z)?;
        self.check_point(w)?;
        self.raw_value(z.coords(), w.coords())
    }

    /// `K(z, w)` for a scalar kernel.
    pub fn eval_scalar(&self, z: &DomainPoint, w: &DomainPoint) -> Result<C64> {
        self.require_scalar()?;
        Ok(self.eval(z, w)?[(0, 0)])
    }

    pub(crate) fn require_scalar(&self) -> Result<()> {
        match self.size() {
            1 => Ok(()),
            size => Err(Error::NotScalar { size }),
        }
    }

    pub(crate) fn raw_value(&self, z: &[C64], w: &[C64]) -> Result<CMat> {
        let zero = vec![0u32; z.len()];
        self.raw_deriv(z, w, &zero, &zero, Route::Auto)
    }

    /// Scalar derivative with [`Method::Auto`] on raw coordinates.
    pub(crate) fn raw_scalar_deriv(&self, z: &[C64], w: &[C64], p: &[u32], q: &[u32]) -> Result<C64> {
        Ok(self.raw_deriv(z, w, p, q, Route::Auto)?[(0, 0)])
    }

    /// Diagonal series coefficients, when the spec is a disc kernel with a
    /// diagonal expansion. Closed-form power kernels are expanded to `n` terms.
    pub fn series_coefficients(&self, n: usize) -> Option<Vec<f64>> {
        match &self.family {
            Family::PowerDisc { s } => Some(series::binomial_series(*s, n)),
            Family::DiagonalSeries { coeffs } => Some(coeffs.clone()),
            Family::FormalPower { coeffs, .. } => Some(coeffs.clone()),
            Family::Scaled { inner, c } => inner.series_coefficients(n).map(|v| v.into_iter().map(|x| x * c).collect()),
            _ => None,
        }
    }

    /// Bound `a_N r^{2N} / (1 - r²)` on the omitted tail of a diagonal series
    /// for `|z|, |w| ≤ r`. `None` for families without a series.
    pub fn truncation_error_bound(&self, r: f64) -> Option<f64> {
        let coeffs = match &self.family {
            Family::DiagonalSeries { coeffs } | Family::FormalPower { coeffs, .. } => coeffs,
            _ => return None,
        };
        let n = coeffs.len() - 1;
        Some(coeffs[n].abs() * r.powi(2 * n as i32) / (1.0 - r * r))
    }
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be positive, got {v}")))
    }
}

fn finite(name: &str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidSpec(format!("{name} must be finite, got {v}")))
    }
}

fn require_disc_scalar(what: &str, k: &KernelSpec) -> Result<()> {
    if k.domain() != Domain::Disc || !k.is_scalar() {
        return Err(Error::InvalidSpec(format!("{what} must be a scalar disc kernel, got {}", k.label())));
    }
    Ok(())
}

fn validate(family: &Family) -> Result<()> {
    match family {
        Family::PowerDisc { s } => finite("s", *s),
        Family::DiagonalSeries { coeffs } => {
            if coeffs.is_empty() {
                return Err(Error::InvalidSpec("diagonal series needs at least one coefficient".into()));
            }
            coeffs.iter().try_for_each(|c| finite("coefficient", *c))
        }
        Family::PowerBall { s, dim } => {
            if *dim == 0 {
                return Err(Error::InvalidSpec("ball dimension must be at least 1".into()));
            }
            finite("s", *s)
        }
        Family::ProductPolydisc { factors } => {
            if factors.is_empty() {
                return Err(Error::InvalidSpec("product needs at least one factor".into()));
            }
            factors.iter().try_for_each(|f| require_disc_scalar("polydisc factor", f))
        }
        Family::MatrixJet { inner, order, direction } => {
            inner.require_scalar()?;
            if *order == 0 || *order > MAX_MATRIX_SIZE {
                return Err(Error::InvalidSpec(format!("jet order must be in 1..={MAX_MATRIX_SIZE}")));
            }
            if direction.len() != inner.domain().dim() {
                return Err(Error::InvalidSpec("jet direction length must match the dimension".into()));
            }
            Ok(())
        }
        Family::FormalPower { base, t, coeffs } => {
            finite("t", *t)?;
            if base.series_coefficients(1).is_none() || base.domain() != Domain::Disc {
                return Err(Error::InvalidSpec("formal powers need a diagonal series".into()));
            }
            coeffs.iter().try_for_each(|c| finite("coefficient", *c))
        }
        Family::Normalized { inner, base } => {
            if base.domain() != inner.domain() {
                return Err(Error::DomainMismatch {
                    expected: inner.domain().to_string(),
                    found: base.domain().to_string(),
                });
            }
            Ok(())
        }
        Family::MobiusTransported { inner, alpha, s } => {
            if inner.domain() != Domain::Disc {
                return Err(Error::DomainMismatch {
                    expected: Domain::Disc.to_string(),
                    found: inner.domain().to_string(),
                });
            }
            if !(alpha.norm() < 1.0) {
                return Err(Error::ParameterOutsideDisc(format!("alpha = {alpha}")));
            }
            finite("s", *s)
        }
        Family::Scaled { c, .. } => finite("c", *c),
        Family::FrameScaled { inner, poly } => {
            require_disc_scalar("frame-scaled kernel", inner)?;
            if poly.is_zero() {
                return Err(Error::InvalidSpec("frame polynomial must be nonzero".into()));
            }
            Ok(())
        }
        Family::Deflated { order, .. } => {
            if *order == 0 {
                return Err(Error::InvalidSpec("deflation order must be positive".into()));
            }
            Ok(())
        }
        Family::Product { factors } => {
            let first = factors
                .first()
                .ok_or_else(|| Error::InvalidSpec("product needs at least one factor".into()))?;
            for f in factors {
                f.require_scalar()?;
                if f.domain() != first.domain() {
                    return Err(Error::DomainMismatch {
                        expected: first.domain().to_string(),
                        found: f.domain().to_string(),
                    });
                }
            }
            Ok(())
        }
        Family::KTilde { inner } => inner.require_scalar(),
        Family::Flag { k0, k1 } => {
            require_disc_scalar("K0", k0)?;
            require_disc_scalar("K1", k1)?;
            Ok(())
        }
    }
}

fn default_label(family: &Family) -> String {
    match family {
        Family::PowerDisc { s } => format!("power_disc(s={s})"),
        Family::DiagonalSeries { coeffs } => format!("diagonal_series(N={})", coeffs.len() - 1),
        Family::PowerBall { s, dim } => format!("power_ball(s={s}, m={dim})"),
        Family::ProductPolydisc { factors } => {
            let parts: Vec<&str> = factors.iter().map(|f| f.label()).collect();
            format!("product_polydisc({})", parts.join(" x "))
        }
        Family::MatrixJet { inner, order, .. } => format!("jet{order}({})", inner.label()),
        Family::FormalPower { base, t, .. } => format!("({})^{t}", base.label()),
        Family::Normalized { inner, base } => format!("normalized({}, at {})", inner.label(), base),
        Family::MobiusTransported { inner, alpha, s } => {
            format!("mobius({}, alpha={}, s={s})", inner.label(), fmt_coords(&[*alpha]))
        }
        Family::Scaled { inner, c } => format!("{c}*{}", inner.label()),
        Family::FrameScaled { inner, .. } => format!("frame_scaled({})", inner.label()),
        Family::Deflated { inner, order } => format!("deflated{order}({})", inner.label()),
        Family::Product { factors } => {
            let parts: Vec<&str> = factors.iter().map(|f| f.label()).collect();
            format!("product({})", parts.join(" * "))
        }
        Family::KTilde { inner } => format!("ktilde({})", inner.label()),
        Family::Flag { k0, k1 } => format!("flag({}, {})", k0.label(), k1.label()),
    }
}

/// Differentiation method of a [`DerivativeRequest`].
#[derive(Clone, Copy, Debug, PartialEq)]
#[derive(Default)]
pub enum Method {
    /// Closed forms where available, Cauchy integrals elsewhere.
    #[default]
    Auto,
    ClosedForm,
    SeriesTermwise { terms: usize },
    CauchyIntegral { radius: f64, nodes: usize },
}


/// Orders of `∂_z` (`p`) and `∂̄_w` (`q`), one entry per coordinate.
#[derive(Clone, Debug, PartialEq)]
pub struct DerivativeRequest {
    pub p: Vec<u32>,
    pub q: Vec<u32>,
    pub method: Method,
}

impl DerivativeRequest {
    pub fn new(p: Vec<u32>, q: Vec<u32>, method: Method) -> Self {
        DerivativeRequest { p, q, method }
    }

    /// One-variable request.
    pub fn disc(p: u32, q: u32, method: Method) -> Self {
        Self::new(vec![p], vec![q], method)
    }

    pub fn value(dim: usize) -> Self {
        Self::new(vec![0; dim], vec![0; dim], Method::Auto)
    }
}

/// `∂_z^p ∂̄_w^q K(z, w)`.
pub fn eval_derivative(spec: &KernelSpec, z: &DomainPoint, w: &DomainPoint, req: &DerivativeRequest) -> Result<CMat> {
    spec.check_point(z)?;
    spec.check_point(w)?;
    let dim = spec.domain().dim();
    if req.p.len() != dim || req.q.len() != dim {
        return Err(Error::InvalidSpec(format!("derivative multi-indices must have length {dim}")));
    }
    let route = match req.method {
        Method::Auto => Route::Auto,
        Method::ClosedForm => {
            if let Some(&order) = req.p.iter().chain(&req.q).find(|&&o| o > CLOSED_FORM_ORDER_LIMIT) {
                return Err(Error::DerivativeOrderTooHigh { order, limit: CLOSED_FORM_ORDER_LIMIT });
            }
            Route::Closed
        }
        Method::SeriesTermwise { terms } => Route::Series(terms),
        Method::CauchyIntegral { radius, nodes } => Route::Cauchy { radius: Some(radius), nodes },
    };
    spec.raw_deriv(z.coords(), w.coords(), &req.p, &req.q, route)
}

/// Normalization at `base`: the result satisfies `K₀(z, base) = I`.
pub fn normalize_at(spec: &KernelSpec, base: &DomainPoint) -> Result<KernelSpec> {
    KernelSpec::new(Family::Normalized { inner: Box::new(spec.clone()), base: base.clone() })
}

/// Pullback under `φ_α(z) = (α - z)/(1 - ᾱ z)` with multiplier `φ_α'^{s/2}`.
pub fn mobius_transport(spec: &KernelSpec, alpha: C64, s: f64) -> Result<KernelSpec> {
    if !(alpha.norm() < 1.0) {
        return Err(Error::ParameterOutsideDisc(format!("alpha = {alpha}")));
    }
    KernelSpec::new(Family::MobiusTransported { inner: Box::new(spec.clone()), alpha, s })
}

/// The Möbius involution `φ_α(z) = (α - z)/(1 - ᾱ z)`.
pub fn mobius_map(alpha: C64, z: C64) -> C64 {
    (alpha - z) / (1.0 - alpha.conj() * z)
}

/// Formal power `(Σ a_n xⁿ)^t` of a diagonal series, computed as
/// `exp(t log)` coefficientwise. Coefficients of the result may be negative.
pub fn series_power(spec: &KernelSpec, t: f64) -> Result<KernelSpec> {
    finite("t", t)?;
    let base_coeffs = match spec.family() {
        Family::DiagonalSeries { coeffs } | Family::FormalPower { coeffs, .. } => coeffs.clone(),
        _ => return Err(Error::NonSeriesRepresentable(spec.label().to_string())),
    };
    let coeffs = series::series_pow(&base_coeffs, t)?;
    KernelSpec::new(Family::FormalPower { base: Box::new(spec.clone()), t, coeffs })
}

/// Outcome of [`hermitian_symmetry_check`].
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport {
    pub symmetric: bool,
    pub max_deviation: f64,
}

/// Checks `K(z, w) = K(w, z)^*` on the sample pairs.
pub fn hermitian_symmetry_check(spec: &KernelSpec, sample: &[(DomainPoint, DomainPoint)], tol: f64) -> Result<SymmetryReport> {
    hermitian_symmetry_check_with(|z, w| spec.eval(z, w), sample, tol)
}

/// [`hermitian_symmetry_check`] for an arbitrary kernel evaluator.
pub fn hermitian_symmetry_check_with<F>(kernel: F, sample: &[(DomainPoint, DomainPoint)], tol: f64) -> Result<SymmetryReport>
where
    F: Fn(&DomainPoint, &DomainPoint) -> Result<CMat>,
{
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut max_deviation: f64 = 0.0;
    for (z, w) in sample {
        let a = kernel(z, w)?;
        let b = kernel(w, z)?;
        max_deviation = max_deviation.max(crate::linalg::max_abs(&(a - b.adjoint())));
    }
    Ok(SymmetryReport { symmetric: max_deviation <= tol, max_deviation })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn disc(re: f64, im: f64) -> DomainPoint {
        DomainPoint::disc_xy(re, im).unwrap()
    }

    fn value(spec: &KernelSpec, z: &DomainPoint, w: &DomainPoint) -> C64 {
        spec.eval_scalar(z, w).unwrap()
    }

    #[test]
    fn power_disc_values() {
        let szego = KernelSpec::szego();
        assert_eq!(value(&szego, &disc(0.0, 0.0), &disc(0.0, 0.0)), c(1.0, 0.0));
        assert!((value(&szego, &disc(0.5, 0.0), &disc(0.5, 0.0)) - 4.0 / 3.0).norm() < 1e-15);
        for lambda in [0.5, 1.0, 2.0] {
            let spec = KernelSpec::power_disc(lambda).unwrap();
            for w in [disc(0.3, 0.1), disc(-0.6, 0.5)] {
                let expected = (1.0 - w.norm_sqr()).powf(-lambda);
                assert!((value(&spec, &w, &w) - expected).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn first_mixed_derivative_at_origin_is_the_exponent() {
        let o = disc(0.0, 0.0);
        for s in [0.3, 1.0, 2.7] {
            let spec = KernelSpec::power_disc(s).unwrap();
            for method in [Method::ClosedForm, Method::SeriesTermwise { terms: 200 }] {
                let d = eval_derivative(&spec, &o, &o, &DerivativeRequest::disc(1, 1, method)).unwrap()[(0, 0)];
                assert!((d - s).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn methods_agree() {
        let spec = KernelSpec::power_disc(1.7).unwrap();
        let (z, w) = (disc(0.5, 0.3), disc(-0.2, 0.6));
        for p in 0..=3 {
            for q in 0..=3 {
                let closed = eval_derivative(&spec, &z, &w, &DerivativeRequest::disc(p, q, Method::ClosedForm)).unwrap()[(0, 0)];
                let cauchy = eval_derivative(
                    &spec,
                    &z,
                    &w,
                    &DerivativeRequest::disc(p, q, Method::CauchyIntegral { radius: 0.1, nodes: 64 }),
                )
                .unwrap()[(0, 0)];
                assert!((closed - cauchy).norm() <= 1e-10, "p={p} q={q}");
            }
        }
    }

    #[test]
    fn method_restrictions() {
        let o = disc(0.0, 0.0);
        let normalized = normalize_at(&KernelSpec::szego(), &disc(0.5, 0.0)).unwrap();
        let r = eval_derivative(&normalized, &o, &o, &DerivativeRequest::disc(1, 0, Method::ClosedForm));
        assert!(matches!(r, Err(Error::UnsupportedMethodForFamily { .. })));
        let ball = KernelSpec::power_ball(2.0, 2).unwrap();
        let b0 = DomainPoint::origin(Domain::Ball(2));
        let r = eval_derivative(&ball, &b0, &b0, &DerivativeRequest::new(vec![1, 0], vec![0, 0], Method::SeriesTermwise { terms: 50 }));
        assert!(matches!(r, Err(Error::UnsupportedMethodForFamily { .. })));
        let r = eval_derivative(&KernelSpec::szego(), &o, &o, &DerivativeRequest::disc(9, 0, Method::ClosedForm));
        assert!(matches!(r, Err(Error::DerivativeOrderTooHigh { .. })));
        let edge = disc(0.95, 0.0);
        let r = eval_derivative(
            &KernelSpec::szego(),
            &edge,
            &edge,
            &DerivativeRequest::disc(1, 0, Method::CauchyIntegral { radius: 0.1, nodes: 64 }),
        );
        assert!(matches!(r, Err(Error::CauchyRadiusExceedsDomain { .. })));
    }

    #[test]
    fn points_outside_are_rejected() {
        assert!(matches!(DomainPoint::disc_xy(0.8, 0.8), Err(Error::PointOutsideDomain { .. })));
        let ball = KernelSpec::power_ball(2.0, 2).unwrap();
        assert!(matches!(ball.eval(&disc(0.0, 0.0), &disc(0.0, 0.0)), Err(Error::DomainMismatch { .. })));
    }

    #[test]
    fn normalization_examples() {
        let szego = KernelSpec::szego();
        let at_origin = normalize_at(&szego, &disc(0.0, 0.0)).unwrap();
        let (z, w) = (disc(0.2, -0.4), disc(0.5, 0.1));
        assert!((value(&at_origin, &z, &w) - value(&szego, &z, &w)).norm() < 1e-14);

        let base = disc(0.5, 0.0);
        let n = normalize_at(&szego, &base).unwrap();
        for z in [disc(0.0, 0.0), disc(-0.7, 0.2), disc(0.3, 0.3)] {
            assert!((value(&n, &z, &base) - 1.0).norm() < 1e-14);
        }
        let o = disc(0.0, 0.0);
        assert!((value(&n, &o, &o) - 4.0 / 3.0).norm() < 1e-14);
    }

    #[test]
    fn normalized_first_derivatives_vanish_at_base() {
        let base = disc(0.3, -0.2);
        let n = normalize_at(&KernelSpec::power_disc(2.5).unwrap(), &base).unwrap();
        let d = eval_derivative(&n, &base, &base, &DerivativeRequest::disc(1, 0, Method::Auto)).unwrap()[(0, 0)];
        assert!(d.norm() < 1e-12);
    }

    #[test]
    fn mobius_examples() {
        let szego = KernelSpec::szego();
        let t = mobius_transport(&szego, c(0.5, 0.0), 1.0).unwrap();
        let o = disc(0.0, 0.0);
        assert!((value(&t, &o, &o) - 1.0).norm() < 1e-14);
        let t0 = mobius_transport(&KernelSpec::power_disc(2.2).unwrap(), c(0.0, 0.0), 0.7).unwrap();
        let w = disc(0.4, -0.3);
        let orig = value(&KernelSpec::power_disc(2.2).unwrap(), &w, &w);
        assert!((value(&t0, &w, &w) - orig).norm() < 1e-14);
        assert!(matches!(mobius_transport(&szego, c(1.0, 0.0), 1.0), Err(Error::ParameterOutsideDisc(_))));
    }

    #[test]
    fn series_power_examples() {
        let geometric = KernelSpec::diagonal_series(vec![1.0; 12]).unwrap();
        let squared = series_power(&geometric, 2.0).unwrap();
        let coeffs = squared.series_coefficients(12).unwrap();
        for (n, a) in coeffs.iter().enumerate() {
            assert!((a - (n + 1) as f64).abs() < 1e-12);
        }
        let same = series_power(&geometric, 1.0).unwrap().series_coefficients(12).unwrap();
        assert!(same.iter().all(|a| (a - 1.0).abs() < 1e-14));

        let root = KernelSpec::new(Family::DiagonalSeries { coeffs: series::binomial_series(-0.5, 8) }).unwrap();
        let once = series_power(&root, 1.0).unwrap().series_coefficients(8).unwrap();
        assert!((once[2] + 0.125).abs() < 1e-15);

        let bad = KernelSpec::diagonal_series(vec![0.0, 1.0]).unwrap();
        assert!(matches!(series_power(&bad, 2.0), Err(Error::ZeroConstantTerm)));
        assert!(matches!(series_power(&KernelSpec::szego(), 2.0), Err(Error::NonSeriesRepresentable(_))));
    }

    #[test]
    fn symmetry_examples() {
        let pairs: Vec<_> = (0..20)
            .map(|k| {
                let a = k as f64 * 0.37;
                (disc(0.6 * a.cos(), 0.5 * a.sin()), disc(0.3 * (2.0 * a).sin(), -0.7 * a.cos()))
            })
            .collect();
        let r = hermitian_symmetry_check(&KernelSpec::szego(), &pairs, 1e-12).unwrap();
        assert!(r.symmetric);
        let jet = KernelSpec::matrix_jet(KernelSpec::szego(), 2, vec![c(1.0, 0.0)]).unwrap();
        assert!(hermitian_symmetry_check(&jet, &pairs, 1e-12).unwrap().symmetric);

        let szego = KernelSpec::szego();
        let corrupted = |z: &DomainPoint, w: &DomainPoint| -> Result<CMat> {
            Ok(szego.eval(z, w)?.add_scalar(z.z()))
        };
        let r = hermitian_symmetry_check_with(corrupted, &pairs, 1e-12).unwrap();
        assert!(!r.symmetric && r.max_deviation > 0.1);
        assert!(matches!(hermitian_symmetry_check(&szego, &[], 1e-12), Err(Error::EmptySample)));
    }

    #[test]
    fn jet_kernel_closed_form() {
        let jet = KernelSpec::matrix_jet(KernelSpec::szego(), 2, vec![c(1.0, 0.0)]).unwrap();
        let (z, w) = (disc(0.3, 0.2), disc(-0.4, 0.1));
        let m = jet.eval(&z, &w).unwrap();
        let (zz, wb) = (z.z(), w.z().conj());
        let x = 1.0 - zz * wb;
        let expected = [x.powi(-1), zz * x.powi(-2), wb * x.powi(-2), (1.0 + zz * wb) * x.powi(-3)];
        for (k, e) in expected.iter().enumerate() {
            assert!((m[(k / 2, k % 2)] - e).norm() < 1e-13);
        }
    }

    #[test]
    fn truncation_bound() {
        let spec = KernelSpec::diagonal_series(vec![1.0; 201]).unwrap();
        let bound = spec.truncation_error_bound(0.5).unwrap();
        assert!((bound - 0.25f64.powi(200) / 0.75).abs() < 1e-300);
        assert!(KernelSpec::szego().truncation_error_bound(0.5).is_none());
    }
}
