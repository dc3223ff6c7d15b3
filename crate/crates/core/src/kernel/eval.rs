//! Derivative engine behind [`super::eval_derivative`].

use std::f64::consts::PI;

use super::{series, Family, KernelSpec, DEFAULT_CAUCHY_NODES};
use crate::linalg::sqrt_hermitian;
use crate::{CMat, Domain, Error, Result, C64};

#[derive(Clone, Copy, Debug, PartialEq)]
pub(crate) enum Route {
    Auto,
    Closed,
    Series(usize),
    Cauchy { radius: Option<f64>, nodes: usize },
}

impl Route {
    fn name(&self) -> &'static str {
        match self {
            Route::Auto => "auto",
            Route::Closed => "closed_form",
            Route::Series(_) => "series_termwise",
            Route::Cauchy { .. } => "cauchy_integral",
        }
    }
}

fn unsupported(route: Route, spec: &KernelSpec) -> Error {
    Error::UnsupportedMethodForFamily {
        method: route.name().to_string(),
        family: spec.label().to_string(),
    }
}

fn scalar(v: C64) -> CMat {
    CMat::from_element(1, 1, v)
}

pub(crate) fn binom(n: u32, k: u32) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// `n (n-1) ... (n-k+1)`.
fn falling(n: usize, k: u32) -> f64 {
    (0..k as usize).fold(1.0, |acc, i| acc * (n - i) as f64)
}

fn pochhammer(s: f64, n: u32) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (s + i as f64))
}

/// All multi-indices `a` with `a ≤ p` componentwise.
pub(crate) fn below(p: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![Vec::with_capacity(p.len())];
    for &pi in p {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..=pi).map(move |a| {
                    let mut v = prefix.clone();
                    v.push(a);
                    v
                })
            })
            .collect();
    }
    out
}

fn multi_binom(p: &[u32], a: &[u32]) -> f64 {
    p.iter().zip(a).map(|(&n, &k)| binom(n, k)).product()
}

fn minus(p: &[u32], a: &[u32]) -> Vec<u32> {
    p.iter().zip(a).map(|(x, y)| x - y).collect()
}

fn plus_unit(p: &[u32], i: usize) -> Vec<u32> {
    let mut v = p.to_vec();
    v[i] += 1;
    v
}

/// Compositions of `n` into `parts` non-negative integers, with multinomial weights.
fn compositions(n: u32, parts: usize) -> Vec<(Vec<u32>, f64)> {
    fn rec(n: u32, parts: usize, prefix: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
        if parts == 1 {
            prefix.push(n);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=n {
            prefix.push(k);
            rec(n - k, parts - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut raw = Vec::new();
    rec(n, parts, &mut Vec::new(), &mut raw);
    raw.into_iter()
        .map(|a| {
            let mut rest = n;
            let mut w = 1.0;
            for &k in &a {
                w *= binom(rest, k);
                rest -= k;
            }
            (a, w)
        })
        .collect()
}

/// `∂_z^p ∂̄_w^q (1 - Σ z_i w̄_i)^{-s}` for any real `s`.
pub(crate) fn power_deriv(s: f64, z: &[C64], w: &[C64], p: &[u32], q: &[u32]) -> C64 {
    let x: C64 = z.iter().zip(w).map(|(a, b)| a * b.conj()).sum();
    let one_minus = C64::new(1.0, 0.0) - x;
    let total: u32 = p.iter().chain(q).sum();
    let kmax: Vec<u32> = p.iter().zip(q).map(|(a, b)| *a.min(b)).collect();
    let mut acc = C64::new(0.0, 0.0);
    for k in below(&kmax) {
        let mut coef = C64::new(1.0, 0.0);
        for i in 0..z.len() {
            let (pi, qi, ki) = (p[i], q[i], k[i]);
            coef *= binom(pi, ki) * falling(qi as usize, ki);
            coef *= z[i].powu(qi - ki) * w[i].conj().powu(pi - ki);
        }
        if coef == C64::new(0.0, 0.0) {
            continue;
        }
        let n = total - k.iter().sum::<u32>();
        acc += coef * pochhammer(s, n) * one_minus.powf(-s - n as f64);
    }
    acc
}

/// `∂^p ∂̄^q Σ a_n zⁿ w̄ⁿ` on the disc.
fn series_deriv(coeffs: &[f64], z: C64, w: C64, p: u32, q: u32) -> C64 {
    let wb = w.conj();
    let start = p.max(q) as usize;
    let mut acc = C64::new(0.0, 0.0);
    for (n, &a) in coeffs.iter().enumerate().skip(start) {
        if a == 0.0 {
            continue;
        }
        let c = a * falling(n, p) * falling(n, q);
        acc += c * z.powu(n as u32 - p) * wb.powu(n as u32 - q);
    }
    acc
}

/// `Σ_{a≤p, b≤q} C(p,a) C(q,b) f^{(a,b)} g^{(p-a, q-b)}` with scalar `f`.
fn leibniz<F, G>(p: &[u32], q: &[u32], f: F, g: G) -> Result<CMat>
where
    F: Fn(&[u32], &[u32]) -> Result<C64>,
    G: Fn(&[u32], &[u32]) -> Result<CMat>,
{
    let mut acc: Option<CMat> = None;
    for a in below(p) {
        for b in below(q) {
            let fv = f(&a, &b)?;
            if fv == C64::new(0.0, 0.0) {
                continue;
            }
            let term = g(&minus(p, &a), &minus(q, &b))? * (fv * multi_binom(p, &a) * multi_binom(q, &b));
            acc = Some(match acc {
                Some(m) => m + term,
                None => term,
            });
        }
    }
    match acc {
        Some(m) => Ok(m),
        None => {
            let zero = vec![0; p.len()];
            let shape = g(&zero, &zero)?;
            Ok(CMat::zeros(shape.nrows(), shape.ncols()))
        }
    }
}

impl KernelSpec {
    pub(crate) fn raw_deriv(&self, z: &[C64], w: &[C64], p: &[u32], q: &[u32], route: Route) -> Result<CMat> {
        if let Route::Cauchy { radius, nodes } = route {
            return cauchy(self.domain(), |zz, ww| self.raw_value(zz, ww), z, w, p, q, radius, nodes);
        }
        let all_zero = p.iter().chain(q).all(|&o| o == 0);
        match &self.family {
            Family::PowerDisc { s } | Family::PowerBall { s, .. } => match route {
                Route::Series(terms) if matches!(self.family, Family::PowerDisc { .. }) => {
                    let coeffs = series::binomial_series(*s, terms + 1);
                    Ok(scalar(series_deriv(&coeffs, z[0], w[0], p[0], q[0])))
                }
                Route::Series(_) => Err(unsupported(route, self)),
                _ => Ok(scalar(power_deriv(*s, z, w, p, q))),
            },
            Family::DiagonalSeries { coeffs } | Family::FormalPower { coeffs, .. } => {
                let used = match route {
                    Route::Series(terms) => &coeffs[..coeffs.len().min(terms + 1)],
                    _ => &coeffs[..],
                };
                Ok(scalar(series_deriv(used, z[0], w[0], p[0], q[0])))
            }
            Family::ProductPolydisc { factors } => {
                let mut acc = C64::new(1.0, 0.0);
                for (i, f) in factors.iter().enumerate() {
                    acc *= f.raw_deriv(&z[i..=i], &w[i..=i], &p[i..=i], &q[i..=i], route)?[(0, 0)];
                }
                Ok(scalar(acc))
            }
            Family::Scaled { inner, c } => Ok(inner.raw_deriv(z, w, p, q, route)? * C64::new(*c, 0.0)),
            _ if matches!(route, Route::Series(_)) => Err(unsupported(route, self)),
            Family::Product { factors } => {
                let (first, rest) = factors.split_first().expect("validated");
                if rest.is_empty() {
                    return first.raw_deriv(z, w, p, q, route);
                }
                let tail = KernelSpec::new(Family::Product { factors: rest.to_vec() })?;
                leibniz(
                    p,
                    q,
                    |a, b| Ok(first.raw_deriv(z, w, a, b, route)?[(0, 0)]),
                    |a, b| tail.raw_deriv(z, w, a, b, route),
                )
            }
            Family::Deflated { inner, order } => {
                let k = -(*order as f64);
                let polydisc = matches!(inner.domain(), Domain::Polydisc(_));
                let factor = |a: &[u32], b: &[u32]| -> Result<C64> {
                    if polydisc {
                        Ok((0..z.len())
                            .map(|i| power_deriv(k, &z[i..=i], &w[i..=i], &a[i..=i], &b[i..=i]))
                            .product())
                    } else {
                        Ok(power_deriv(k, z, w, a, b))
                    }
                };
                leibniz(p, q, factor, |a, b| inner.raw_deriv(z, w, a, b, route))
            }
            Family::FrameScaled { inner, poly } => {
                let phi = |a: &[u32], b: &[u32]| -> Result<C64> {
                    let left = poly.nth_derivative(a[0] as usize).eval(z[0]);
                    let right = poly.nth_derivative(b[0] as usize).eval(w[0]).conj();
                    Ok(left * right)
                };
                leibniz(p, q, phi, |a, b| inner.raw_deriv(z, w, a, b, route))
            }
            Family::MatrixJet { inner, order, direction } => {
                let dim = z.len();
                let mut out = CMat::zeros(*order, *order);
                for l in 0..*order {
                    for j in 0..*order {
                        let mut acc = C64::new(0.0, 0.0);
                        for (alpha, wa) in compositions(l as u32, dim) {
                            let va: C64 = alpha.iter().zip(direction).map(|(&e, v)| v.powu(e)).product();
                            for (beta, wb) in compositions(j as u32, dim) {
                                let vb: C64 = beta.iter().zip(direction).map(|(&e, v)| v.conj().powu(e)).product();
                                let pa: Vec<u32> = p.iter().zip(&alpha).map(|(x, y)| x + y).collect();
                                let qb: Vec<u32> = q.iter().zip(&beta).map(|(x, y)| x + y).collect();
                                let d = inner.raw_deriv(z, w, &pa, &qb, route)?[(0, 0)];
                                acc += d * va * vb * (wa * wb);
                            }
                        }
                        out[(l, j)] = acc;
                    }
                }
                Ok(out)
            }
            Family::KTilde { inner } => {
                let dim = z.len();
                let d = |a: &[u32], b: &[u32]| -> Result<C64> { Ok(inner.raw_deriv(z, w, a, b, route)?[(0, 0)]) };
                let mut out = CMat::zeros(dim, dim);
                for i in 0..dim {
                    for j in 0..dim {
                        let first = leibniz(p, q, d, |a, b| Ok(scalar(d(&plus_unit(a, i), &plus_unit(b, j))?)))?;
                        let second = leibniz(
                            p,
                            q,
                            |a, b| d(&plus_unit(a, i), b),
                            |a, b| Ok(scalar(d(a, &plus_unit(b, j))?)),
                        )?;
                        out[(i, j)] = first[(0, 0)] - second[(0, 0)];
                    }
                }
                Ok(out)
            }
            Family::Flag { k0, k1 } => {
                let d0 = |a: Vec<u32>, b: Vec<u32>| -> Result<C64> { Ok(k0.raw_deriv(z, w, &a, &b, route)?[(0, 0)]) };
                let mut out = CMat::zeros(2, 2);
                out[(0, 0)] = d0(p.to_vec(), q.to_vec())?;
                out[(0, 1)] = d0(p.to_vec(), plus_unit(q, 0))?;
                out[(1, 0)] = d0(plus_unit(p, 0), q.to_vec())?;
                out[(1, 1)] = d0(plus_unit(p, 0), plus_unit(q, 0))? + k1.raw_deriv(z, w, p, q, route)?[(0, 0)];
                Ok(out)
            }
            Family::MobiusTransported { inner, alpha, .. } if *alpha == C64::new(0.0, 0.0) => {
                // φ₀(z) = -z with unit multiplier
                let neg = |v: &[C64]| v.iter().map(|c| -c).collect::<Vec<_>>();
                let sign = if (p[0] + q[0]).is_multiple_of(2) { 1.0 } else { -1.0 };
                Ok(inner.raw_deriv(&neg(z), &neg(w), p, q, route)? * C64::new(sign, 0.0))
            }
            Family::Normalized { .. } | Family::MobiusTransported { .. } => {
                if all_zero {
                    return self.node_value(z, w);
                }
                match route {
                    Route::Auto => cauchy(self.domain(), |zz, ww| self.node_value(zz, ww), z, w, p, q, None, DEFAULT_CAUCHY_NODES),
                    _ => Err(unsupported(route, self)),
                }
            }
        }
    }

    /// Values of the nodes that have no closed-form derivatives.
    fn node_value(&self, z: &[C64], w: &[C64]) -> Result<CMat> {
        match &self.family {
            Family::Normalized { inner, base } => {
                let w0 = base.coords();
                let a = inner.raw_value(w0, w0)?;
                let phi = inner.raw_value(z, w0)?;
                let psi = inner.raw_value(w0, w)?;
                let k = inner.raw_value(z, w)?;
                let vanish = |at: &[C64]| Error::NormalizerVanishes { at: crate::domain::fmt_coords(at) };
                let phi_inv = phi.try_inverse().ok_or_else(|| vanish(z))?;
                let psi_inv = psi.try_inverse().ok_or_else(|| vanish(w))?;
                if !phi_inv.iter().chain(psi_inv.iter()).all(|c| c.re.is_finite() && c.im.is_finite()) {
                    return Err(vanish(z));
                }
                let root = sqrt_hermitian(&a);
                Ok(&root * phi_inv * k * psi_inv * &root)
            }
            Family::MobiusTransported { inner, alpha, s } => {
                let (z0, w0) = (z[0], w[0]);
                let one = C64::new(1.0, 0.0);
                let fz = (one - alpha.conj() * z0).powf(-s);
                let fw = (one - alpha.conj() * w0).powf(-s).conj();
                let scale = (1.0 - alpha.norm_sqr()).powf(*s);
                let pz = super::mobius_map(*alpha, z0);
                let pw = super::mobius_map(*alpha, w0);
                Ok(inner.raw_value(&[pz], &[pw])? * (fz * fw * scale))
            }
            _ => unreachable!("node_value is only used for normalized and transported kernels"),
        }
    }
}

/// Trapezoid-rule Cauchy integrals over the active variables.
#[allow(clippy::too_many_arguments)]
fn cauchy<F>(
    domain: Domain,
    f: F,
    z: &[C64],
    w: &[C64],
    p: &[u32],
    q: &[u32],
    radius: Option<f64>,
    nodes: usize,
) -> Result<CMat>
where
    F: Fn(&[C64], &[C64]) -> Result<CMat>,
{
    // (is_w, coordinate, order)
    let active: Vec<(bool, usize, u32)> = p
        .iter()
        .enumerate()
        .filter(|(_, &o)| o > 0)
        .map(|(i, &o)| (false, i, o))
        .chain(q.iter().enumerate().filter(|(_, &o)| o > 0).map(|(i, &o)| (true, i, o)))
        .collect();
    if active.is_empty() {
        return f(z, w);
    }
    if nodes == 0 {
        return Err(Error::InvalidSpec("Cauchy integrals need at least one node".into()));
    }
    let kz = active.iter().filter(|a| !a.0).count();
    let kw = active.len() - kz;
    // worst-case distance of a shifted point from the boundary
    let slack = |pt: &[C64], k: usize, r: f64| -> f64 {
        if k == 0 {
            return 1.0;
        }
        match domain {
            Domain::Disc | Domain::Ball(_) => domain.boundary_distance(pt) - r * (k as f64).sqrt(),
            Domain::Polydisc(_) => domain.boundary_distance(pt) - r,
        }
    };
    let r = match radius {
        Some(r) => {
            if !(r > 0.0) || slack(z, kz, r) <= 0.0 || slack(w, kw, r) <= 0.0 {
                return Err(Error::CauchyRadiusExceedsDomain { radius: r });
            }
            r
        }
        None => {
            let spread = |k: usize| match domain {
                Domain::Polydisc(_) => 1.0,
                _ => (k.max(1) as f64).sqrt(),
            };
            let dz = domain.boundary_distance(z) / spread(kz);
            let dw = domain.boundary_distance(w) / spread(kw);
            (dz.min(dw) / 2.0).min(0.1)
        }
    };
    let roots: Vec<C64> = (0..nodes).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / nodes as f64)).collect();
    let mut zz = z.to_vec();
    let mut ww = w.to_vec();
    let mut acc: Option<CMat> = None;
    let total = nodes.pow(active.len() as u32);
    for idx in 0..total {
        let mut rest = idx;
        let mut weight = C64::new(1.0, 0.0);
        for &(is_w, i, o) in &active {
            let k = rest % nodes;
            rest /= nodes;
            let e = roots[k];
            if is_w {
                ww[i] = w[i] + r * e.conj();
            } else {
                zz[i] = z[i] + r * e;
            }
            weight *= roots[(k * o as usize) % nodes].conj();
        }
        let term = f(&zz, &ww)? * weight;
        acc = Some(match acc {
            Some(m) => m + term,
            None => term,
        });
    }
    let mut scale = 1.0;
    for &(_, _, o) in &active {
        scale *= (1..=o).map(f64::from).product::<f64>() / (nodes as f64 * r.powi(o as i32));
    }
    Ok(acc.expect("at least one node") * C64::new(scale, 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn power_derivative_matches_hand_expansion() {
        let (z, w, s) = (c(0.3, 0.1), c(-0.2, 0.4), 1.5);
        let x = z * w.conj();
        let base = c(1.0, 0.0) - x;
        let expected = s * base.powf(-s - 1.0) + s * (s + 1.0) * x * base.powf(-s - 2.0);
        assert!((power_deriv(s, &[z], &[w], &[1], &[1]) - expected).norm() < 1e-14);
    }

    #[test]
    fn compositions_carry_multinomials() {
        let comps = compositions(2, 2);
        let weights: Vec<f64> = comps.iter().map(|c| c.1).collect();
        assert_eq!(weights, vec![1.0, 2.0, 1.0]);
    }

    #[test]
    fn cauchy_recovers_polynomial_derivatives() {
        let f = |z: &[C64], w: &[C64]| -> Result<CMat> { Ok(scalar(z[0].powu(3) * w[0].conj().powu(2))) };
        let (z, w) = (c(0.2, 0.1), c(0.1, -0.3));
        let d = cauchy(Domain::Disc, f, &[z], &[w], &[2], &[1], None, 32).unwrap()[(0, 0)];
        let expected = 6.0 * z * 2.0 * w.conj();
        assert!((d - expected).norm() < 1e-12);
    }
}
