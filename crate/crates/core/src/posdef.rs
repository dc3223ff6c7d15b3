//! Sampled positivity: Gram matrices, eigenvalue verdicts, contractivity and
//! infinite divisibility.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::kernel::{series_power, Family, KernelSpec};
use crate::linalg::{hermitian_deviation, hermitian_eigen, max_abs};
use crate::{CMat, Domain, DomainPoint, Error, Result, C64};

/// Default relative tolerance of [`nnd_verdict`].
pub const DEFAULT_REL_TOL: f64 = 1e-9;

/// Default seed for random grid points.
pub const DEFAULT_SEED: u64 = 42;

#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GridStrategy {
    RadialRings { radii: Vec<f64>, per_ring: usize },
    UniformRandom { seed: u64, count: usize, max_radius: f64 },
    UserList,
    Composite { parts: Vec<GridStrategy> },
}

/// Distinct sample points in one domain.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleGrid {
    points: Vec<DomainPoint>,
    strategy: GridStrategy,
}

impl SampleGrid {
    fn build(points: Vec<DomainPoint>, strategy: GridStrategy) -> Result<Self> {
        let first = points.first().ok_or(Error::EmptySample)?;
        let domain = first.domain();
        for (i, p) in points.iter().enumerate() {
            if p.domain() != domain {
                return Err(Error::InvalidGrid(format!("point {i} lies in the {}, expected the {domain}", p.domain())));
            }
            for (j, q) in points[..i].iter().enumerate() {
                let d: f64 = p.coords().iter().zip(q.coords()).map(|(a, b)| (a - b).norm_sqr()).sum();
                if d.sqrt() < 1e-14 {
                    return Err(Error::InvalidGrid(format!("points {j} and {i} coincide")));
                }
            }
        }
        Ok(SampleGrid { points, strategy })
    }

    /// `per_ring` equally spaced angles on each radius. A zero radius
    /// contributes the origin once.
    pub fn radial_rings(domain: Domain, radii: &[f64], per_ring: usize) -> Result<Self> {
        if per_ring == 0 {
            return Err(Error::InvalidGrid("per_ring must be positive".into()));
        }
        let m = domain.dim();
        let mut points = Vec::new();
        for &r in radii {
            if r == 0.0 {
                points.push(DomainPoint::origin(domain));
                continue;
            }
            for k in 0..per_ring {
                let theta = 2.0 * PI * k as f64 / per_ring as f64;
                let coords = (0..m)
                    .map(|i| {
                        let c = C64::from_polar(r, (i + 1) as f64 * theta);
                        match domain {
                            Domain::Ball(_) => c / (m as f64).sqrt(),
                            _ => c,
                        }
                    })
                    .collect();
                points.push(DomainPoint::new(domain, coords).map_err(|e| Error::InvalidGrid(e.to_string()))?);
            }
        }
        Self::build(points, GridStrategy::RadialRings { radii: radii.to_vec(), per_ring })
    }

    /// Uniformly distributed points (with respect to volume) of norm at most
    /// `max_radius`, from a seeded ChaCha8 stream.
    pub fn uniform_random(domain: Domain, seed: u64, count: usize, max_radius: f64) -> Result<Self> {
        if !(max_radius > 0.0 && max_radius < 1.0) {
            return Err(Error::InvalidGrid(format!("max_radius must lie in (0, 1), got {max_radius}")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let m = domain.dim();
        let disc_sample = |rng: &mut ChaCha8Rng, radius: f64| {
            let r = radius * rng.random::<f64>().sqrt();
            C64::from_polar(r, 2.0 * PI * rng.random::<f64>())
        };
        let mut points = Vec::with_capacity(count);
        for _ in 0..count {
            let coords: Vec<C64> = match domain {
                Domain::Disc | Domain::Polydisc(_) => (0..m).map(|_| disc_sample(&mut rng, max_radius)).collect(),
                Domain::Ball(_) => {
                    let dir: Vec<C64> = (0..m).map(|_| disc_sample(&mut rng, 1.0)).collect();
                    let norm = dir.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
                    let r = max_radius * rng.random::<f64>().powf(1.0 / (2 * m) as f64);
                    dir.into_iter().map(|c| c * (r / norm)).collect()
                }
            };
            points.push(DomainPoint::new(domain, coords).map_err(|e| Error::InvalidGrid(e.to_string()))?);
        }
        Self::build(points, GridStrategy::UniformRandom { seed, count, max_radius })
    }

    pub fn user_list(points: Vec<DomainPoint>) -> Result<Self> {
        Self::build(points, GridStrategy::UserList)
    }

    /// Concatenation of grids on the same domain.
    pub fn composite(parts: Vec<SampleGrid>) -> Result<Self> {
        let strategy = GridStrategy::Composite { parts: parts.iter().map(|g| g.strategy.clone()).collect() };
        Self::build(parts.into_iter().flat_map(|g| g.points).collect(), strategy)
    }

    /// Rings at radii 0.3, 0.6, 0.85 with 10 angles each, plus 20 random
    /// points of norm at most 0.85 drawn with the given seed.
    pub fn default_for(domain: Domain, seed: u64) -> Result<Self> {
        Self::composite(vec![
            Self::radial_rings(domain, &[0.3, 0.6, 0.85], 10)?,
            Self::uniform_random(domain, seed, 20, 0.85)?,
        ])
    }

    pub fn points(&self) -> &[DomainPoint] {
        &self.points
    }

    pub fn strategy(&self) -> &GridStrategy {
        &self.strategy
    }

    pub fn domain(&self) -> Domain {
        self.points[0].domain()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `K(z_i, z_j)` assembled blockwise.
#[derive(Clone, Debug, PartialEq)]
pub struct GramMatrix {
    pub entries: CMat,
    pub label: String,
    pub block: usize,
}

/// Gram matrix of `spec` on `grid`. Upper blocks are evaluated, lower blocks
/// are their adjoints.
pub fn gram_matrix(spec: &KernelSpec, grid: &SampleGrid) -> Result<GramMatrix> {
    gram_matrix_with(spec.size(), spec.label(), grid, |z, w| spec.eval(z, w))
}

/// [`gram_matrix`] for an arbitrary `k × k` kernel evaluator.
pub fn gram_matrix_with<F>(k: usize, label: &str, grid: &SampleGrid, kernel: F) -> Result<GramMatrix>
where
    F: Fn(&DomainPoint, &DomainPoint) -> Result<CMat> + Sync,
{
    let pts = grid.points();
    let n = pts.len();
    let rows: Vec<Vec<CMat>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| kernel(&pts[i], &pts[j])).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let mut entries = CMat::zeros(n * k, n * k);
    for (i, row) in rows.iter().enumerate() {
        for (off, block) in row.iter().enumerate() {
            let j = i + off;
            let block = if i == j { (block + block.adjoint()).scale(0.5) } else { block.clone() };
            entries.view_mut((i * k, j * k), (k, k)).copy_from(&block);
            if i != j {
                entries.view_mut((j * k, i * k), (k, k)).copy_from(&block.adjoint());
            }
        }
    }
    Ok(GramMatrix { entries, label: label.to_string(), block: k })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Nnd,
    Indefinite,
    Borderline,
}

/// Eigenvalue summary of a Hermitian matrix.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PDReport {
    pub min_eig: f64,
    pub max_eig: f64,
    pub tol_abs: f64,
    pub verdict: Verdict,
    /// Unit eigenvector of `min_eig`, present when indefinite.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Vec<C64>>,
}

impl PDReport {
    /// Not indefinite.
    pub fn passes(&self) -> bool {
        self.verdict != Verdict::Indefinite
    }
}

/// Verdict on a Hermitian matrix with `tol_abs = rel_tol · max(1, max_eig)`:
/// borderline when `|min_eig| < tol_abs`, nnd when `min_eig ≥ tol_abs`,
/// indefinite otherwise.
pub fn nnd_verdict(m: &CMat, rel_tol: f64) -> Result<PDReport> {
    let scale = max_abs(m).max(1.0);
    let deviation = hermitian_deviation(m);
    if deviation > 1e-12 * scale {
        return Err(Error::NonHermitianInput { deviation });
    }
    if m.nrows() == 0 {
        return Err(Error::EmptySample);
    }
    let (vals, vecs) = hermitian_eigen(m);
    let min_eig = vals[0];
    let max_eig = *vals.last().expect("non-empty");
    let tol_abs = rel_tol * max_eig.max(1.0);
    let verdict = if min_eig.abs() < tol_abs {
        Verdict::Borderline
    } else if min_eig >= tol_abs {
        Verdict::Nnd
    } else {
        Verdict::Indefinite
    };
    let witness = (verdict == Verdict::Indefinite).then(|| vecs.column(0).iter().copied().collect());
    Ok(PDReport { min_eig, max_eig, tol_abs, verdict, witness })
}

/// Gram matrix and verdict in one step.
pub fn sampled_verdict(spec: &KernelSpec, grid: &SampleGrid, rel_tol: f64) -> Result<PDReport> {
    nnd_verdict(&gram_matrix(spec, grid)?.entries, rel_tol)
}

/// `(1 - z w̄)^k K` on the disc, `(1 - ⟨z, w⟩) K` on the ball and
/// `Π (1 - z_i w̄_i) K` on the polydisc. Power kernels are simplified by
/// exponent arithmetic.
pub fn contractivity_kernel(spec: &KernelSpec, domain: Domain, k: u32) -> Result<KernelSpec> {
    if spec.domain() != domain {
        return Err(Error::DomainMismatch { expected: domain.to_string(), found: spec.domain().to_string() });
    }
    if k == 0 {
        return Err(Error::InvalidSpec("contractivity order must be positive".into()));
    }
    if k > 1 && domain != Domain::Disc {
        return Err(Error::UnsupportedOrderForDomain { order: k, domain: domain.to_string() });
    }
    let kf = k as f64;
    let out = match spec.family() {
        Family::PowerDisc { s } => KernelSpec::new(Family::PowerDisc { s: s - kf })?,
        Family::PowerBall { s, dim } => KernelSpec::new(Family::PowerBall { s: s - kf, dim: *dim })?,
        Family::ProductPolydisc { factors } if factors.iter().all(|f| matches!(f.family(), Family::PowerDisc { .. })) => {
            let deflated = factors
                .iter()
                .map(|f| match f.family() {
                    Family::PowerDisc { s } => KernelSpec::new(Family::PowerDisc { s: s - 1.0 }),
                    _ => unreachable!(),
                })
                .collect::<Result<Vec<_>>>()?;
            KernelSpec::product_polydisc(deflated)?
        }
        _ => KernelSpec::deflated(spec.clone(), k)?,
    };
    let factor = match domain {
        Domain::Disc if k == 1 => "(1-zw)".to_string(),
        Domain::Disc => format!("(1-zw)^{k}"),
        Domain::Ball(_) => "(1-<z,w>)".to_string(),
        Domain::Polydisc(_) => "S^-1".to_string(),
    };
    Ok(out.with_label(format!("{factor}*{}", spec.label())))
}

/// Real power of a deflated kernel. Power kernels use exponent arithmetic,
/// diagonal series use formal powers.
fn kernel_power(spec: &KernelSpec, t: f64) -> Result<KernelSpec> {
    let label = format!("({})^{t}", spec.label());
    let out = match spec.family() {
        Family::PowerDisc { s } => KernelSpec::new(Family::PowerDisc { s: s * t })?,
        Family::PowerBall { s, dim } => KernelSpec::new(Family::PowerBall { s: s * t, dim: *dim })?,
        Family::ProductPolydisc { factors } => {
            KernelSpec::product_polydisc(factors.iter().map(|f| kernel_power(f, t)).collect::<Result<_>>()?)?
        }
        Family::Scaled { inner, c } => KernelSpec::scaled(kernel_power(inner, t)?, c.powf(t))?,
        Family::DiagonalSeries { .. } | Family::FormalPower { .. } => series_power(spec, t)?,
        Family::Deflated { inner, order } if inner.domain() == Domain::Disc => {
            let a = inner
                .series_coefficients(crate::kernel::DEFAULT_SERIES_TERMS)
                .filter(|_| matches!(inner.family(), Family::DiagonalSeries { .. } | Family::FormalPower { .. }))
                .ok_or_else(|| Error::NonSeriesRepresentable(spec.label().to_string()))?;
            let mut b = a;
            for _ in 0..*order {
                let mut next = b.clone();
                next.push(0.0);
                for n in 1..next.len() {
                    next[n] -= b[n - 1];
                }
                b = next;
            }
            let series = KernelSpec::new(Family::DiagonalSeries { coeffs: b })?;
            series_power(&series, t)?
        }
        _ => return Err(Error::NonSeriesRepresentable(spec.label().to_string())),
    };
    Ok(out.with_label(label))
}

/// One power of an [`infinite_divisibility_test`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PowerReport {
    pub t: f64,
    #[serde(flatten)]
    pub report: PDReport,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DivisibilityReport {
    pub powers: Vec<PowerReport>,
    pub infinitely_divisible: bool,
}

/// Samples `((deflation factor) · K)^t` for every `t` in `t_list`.
pub fn infinite_divisibility_test(
    spec: &KernelSpec,
    domain: Domain,
    t_list: &[f64],
    grid: &SampleGrid,
    rel_tol: f64,
) -> Result<DivisibilityReport> {
    if t_list.is_empty() {
        return Err(Error::EmptySample);
    }
    let deflated = contractivity_kernel(spec, domain, 1)?;
    let mut powers = Vec::with_capacity(t_list.len());
    for &t in t_list {
        if !(t > 0.0) {
            return Err(Error::InvalidSpec(format!("powers must be positive, got {t}")));
        }
        let report = sampled_verdict(&kernel_power(&deflated, t)?, grid, rel_tol)?;
        powers.push(PowerReport { t, report });
    }
    let infinitely_divisible = powers.iter().all(|p| p.report.passes());
    Ok(DivisibilityReport { powers, infinitely_divisible })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn disc(x: f64) -> DomainPoint {
        DomainPoint::disc_xy(x, 0.0).unwrap()
    }

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn szego_gram_on_two_points() {
        let grid = SampleGrid::user_list(vec![disc(0.0), disc(0.5)]).unwrap();
        let g = gram_matrix(&KernelSpec::szego(), &grid).unwrap().entries;
        let expected = CMat::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(4.0 / 3.0)]);
        assert!((g - expected).norm() < 1e-15);
    }

    #[test]
    fn single_point_gram_is_diagonal_value() {
        let grid = SampleGrid::user_list(vec![disc(0.5)]).unwrap();
        let g = gram_matrix(&KernelSpec::bergman(), &grid).unwrap().entries;
        assert!((g[(0, 0)].re - 16.0 / 9.0).abs() < 1e-14);
    }

    #[test]
    fn jet_gram_at_origin_is_identity() {
        let jet = KernelSpec::matrix_jet(KernelSpec::szego(), 2, vec![c(1.0)]).unwrap();
        let grid = SampleGrid::user_list(vec![disc(0.0)]).unwrap();
        let g = gram_matrix(&jet, &grid).unwrap().entries;
        assert!((g - CMat::identity(2, 2)).norm() < 1e-14);
    }

    #[test]
    fn verdict_examples() {
        let pd = CMat::from_row_slice(2, 2, &[c(1.0), c(1.0), c(1.0), c(4.0 / 3.0)]);
        let r = nnd_verdict(&pd, 1e-9).unwrap();
        let expected = (7.0 / 3.0 - (49.0f64 / 9.0 - 4.0 / 3.0).sqrt()) / 2.0;
        assert_eq!(r.verdict, Verdict::Nnd);
        assert!((r.min_eig - expected).abs() < 1e-14);

        let indefinite = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(1.0)]);
        let r = nnd_verdict(&indefinite, 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Indefinite);
        assert!((r.min_eig + 1.0).abs() < 1e-14 && (r.max_eig - 3.0).abs() < 1e-14);
        assert!(r.witness.is_some());

        let r = nnd_verdict(&CMat::zeros(3, 3), 1e-9).unwrap();
        assert_eq!(r.verdict, Verdict::Borderline);
        assert_eq!(r.min_eig, 0.0);
    }

    #[test]
    fn non_hermitian_input_is_rejected() {
        let m = CMat::from_row_slice(2, 2, &[c(1.0), c(2.0), c(0.0), c(1.0)]);
        assert!(matches!(nnd_verdict(&m, 1e-9), Err(Error::NonHermitianInput { .. })));
    }

    #[test]
    fn contractivity_examples() {
        let grid = SampleGrid::default_for(Domain::Disc, DEFAULT_SEED).unwrap();
        let szego = contractivity_kernel(&KernelSpec::szego(), Domain::Disc, 1).unwrap();
        assert!(sampled_verdict(&szego, &grid, DEFAULT_REL_TOL).unwrap().passes());

        let half = KernelSpec::power_disc(0.5).unwrap();
        let rings = SampleGrid::radial_rings(Domain::Disc, &[0.3, 0.6, 0.85], 10).unwrap();
        let r = sampled_verdict(&contractivity_kernel(&half, Domain::Disc, 1).unwrap(), &rings, DEFAULT_REL_TOL).unwrap();
        assert_eq!(r.verdict, Verdict::Indefinite);

        let bergman2 = contractivity_kernel(&KernelSpec::bergman(), Domain::Disc, 2).unwrap();
        let one = bergman2.eval(&disc(0.4), &disc(-0.7)).unwrap()[(0, 0)];
        assert!((one - 1.0).norm() < 1e-15);
    }

    #[test]
    fn higher_orders_only_on_the_disc() {
        let ball = KernelSpec::power_ball(3.0, 2).unwrap();
        assert!(matches!(
            contractivity_kernel(&ball, Domain::Ball(2), 2),
            Err(Error::UnsupportedOrderForDomain { .. })
        ));
    }

    #[test]
    fn divisibility_examples() {
        let grid = SampleGrid::default_for(Domain::Disc, DEFAULT_SEED).unwrap();
        let r = infinite_divisibility_test(&KernelSpec::bergman(), Domain::Disc, &[0.1, 0.5, 1.0, 3.0], &grid, DEFAULT_REL_TOL).unwrap();
        assert!(r.infinitely_divisible);
        let r = infinite_divisibility_test(&KernelSpec::szego(), Domain::Disc, &[0.3, 7.0], &grid, DEFAULT_REL_TOL).unwrap();
        assert!(r.infinitely_divisible);
        let spec = KernelSpec::power_disc(0.6).unwrap();
        let r = infinite_divisibility_test(&spec, Domain::Disc, &[1.0, 5.0], &grid, DEFAULT_REL_TOL).unwrap();
        assert!(r.powers.iter().all(|p| p.report.verdict == Verdict::Indefinite));
    }

    #[test]
    fn deflated_series_power() {
        let grid = SampleGrid::default_for(Domain::Disc, DEFAULT_SEED).unwrap();
        let geometric = KernelSpec::diagonal_series(vec![1.0; 200]).unwrap();
        let r = infinite_divisibility_test(&geometric, Domain::Disc, &[0.5, 2.0], &grid, DEFAULT_REL_TOL).unwrap();
        assert!(r.infinitely_divisible);
    }

    #[test]
    fn grids_reject_duplicates() {
        assert!(matches!(SampleGrid::user_list(vec![disc(0.1), disc(0.1)]), Err(Error::InvalidGrid(_))));
        assert!(matches!(SampleGrid::user_list(vec![]), Err(Error::EmptySample)));
    }

    #[test]
    fn random_grids_are_reproducible() {
        let a = SampleGrid::uniform_random(Domain::Ball(3), 7, 15, 0.9).unwrap();
        let b = SampleGrid::uniform_random(Domain::Ball(3), 7, 15, 0.9).unwrap();
        assert_eq!(a, b);
        assert!(a.points().iter().all(|p| p.norm_sqr().sqrt() <= 0.9));
    }
}
