//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::panic::{catch_unwind, AssertUnwindSafe};

use cdkernel::curvature::{curvature_form, curvature_transform_check, extremality_point_test, ktilde_kernel};
use cdkernel::flag::{default_flag_grid, flag_equivalence, flag_kernel, FlagInvariant, FlagVerdict};
use cdkernel::homogeneous::{elementary_bundle_gram0, multiplier_quasi_invariance, sample_pairs, Automorphism, ElementaryBundleParams};
use cdkernel::jets::{diagonal_restriction, h20_blowup, h20_joint_kernel_rank, mu_admissibility, Chart, MuMatrix, VanishingSubmoduleKernel};
use cdkernel::localization::{nilpotent_data, Orthonormalization};
use cdkernel::posdef::{contractivity_kernel, infinite_divisibility_test, sampled_verdict, SampleGrid, Verdict, DEFAULT_REL_TOL};
use cdkernel::poly::Poly;
use cdkernel::{Domain, DomainPoint, KernelSpec, C64};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn p(s: f64) -> KernelSpec {
    KernelSpec::power_disc(s).unwrap()
}

fn random_disc(rng: &mut ChaCha8Rng, radius: f64) -> C64 {
    C64::from_polar(radius * rng.random::<f64>().sqrt(), std::f64::consts::TAU * rng.random::<f64>())
}

fn random_pairs(seed: u64, n: usize, radius: f64) -> Vec<(DomainPoint, DomainPoint)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| (DomainPoint::disc(random_disc(&mut rng, radius)).unwrap(), DomainPoint::disc(random_disc(&mut rng, radius)).unwrap()))
        .collect()
}

fn curvature_closed_form() -> Outcome {
    let grid = SampleGrid::radial_rings(Domain::Disc, &[0.0, 0.2, 0.4, 0.6, 0.8], 6).unwrap();
    assert_eq!(grid.len(), 25);
    let mut worst: f64 = 0.0;
    for lambda in [0.25, 0.5, 1.0, 2.0, 3.7] {
        for w in grid.points() {
            let exact = lambda / (1.0 - w.norm_sqr()).powi(2);
            let kappa = curvature_form(&p(lambda), w).unwrap().scalar();
            worst = worst.max((kappa + exact).abs() / exact);
        }
    }
    check(worst <= 1e-8, format!("max relative error {worst:.2e}"))
}

fn mobius_law() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..20 {
        let alpha = random_disc(&mut rng, 0.9);
        for lambda in [0.5, 1.0, 2.0] {
            worst = worst.max(curvature_transform_check(&p(lambda), alpha, 1e-7).unwrap().residual);
        }
    }
    check(worst <= 1e-7, format!("max residual {worst:.2e} over 20 alphas"))
}

fn contractivity_boundary() -> Outcome {
    let grid = SampleGrid::default_for(Domain::Disc, 42).unwrap();
    let verdict = |lambda: f64| {
        let k = contractivity_kernel(&p(2.0 * lambda), Domain::Disc, 1).unwrap();
        sampled_verdict(&k, &grid, DEFAULT_REL_TOL).unwrap()
    };
    let mut notes = Vec::new();
    let mut ok = true;
    for lambda in [0.5, 1.0, 2.0] {
        let r = verdict(lambda);
        ok &= r.passes();
        notes.push(format!("{lambda}:{:?}", r.verdict));
    }
    for lambda in [0.1, 0.25, 0.4] {
        let r = verdict(lambda);
        ok &= r.verdict == Verdict::Indefinite && r.min_eig < -1e-6 * r.max_eig;
        notes.push(format!("{lambda}:{:?}", r.verdict));
    }
    check(ok, notes.join(" "))
}

/// Whether `(1 - x)^{-e}` has a negative coefficient, from the binomial
/// coefficients `(e)_n / n!` computed directly.
fn first_coefficient_negative(e: f64) -> bool {
    let mut c = 1.0;
    (1..20).any(|n| {
        c *= (e + f64::from(n) - 1.0) / f64::from(n);
        c < 0.0
    })
}

fn infinite_divisibility() -> Outcome {
    let grid = SampleGrid::default_for(Domain::Disc, 42).unwrap();
    let ts = [0.1, 0.5, 1.0, 2.0, 5.0];
    let mut ok = true;
    let mut notes = Vec::new();
    for lambda in [0.5, 1.0, 2.0] {
        let r = infinite_divisibility_test(&p(2.0 * lambda), Domain::Disc, &ts, &grid, DEFAULT_REL_TOL).unwrap();
        ok &= r.infinitely_divisible;
        notes.push(format!("{lambda}:{}", r.infinitely_divisible));
    }
    for lambda in [0.1, 0.3] {
        let r = infinite_divisibility_test(&p(2.0 * lambda), Domain::Disc, &[1.0, 5.0], &grid, DEFAULT_REL_TOL).unwrap();
        for pw in &r.powers {
            let oracle_fails = first_coefficient_negative((2.0 * lambda - 1.0) * pw.t);
            ok &= oracle_fails && !pw.report.passes();
        }
        notes.push(format!("{lambda}:{}", r.infinitely_divisible));
    }
    check(ok, notes.join(" "))
}

fn curvform_identity() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut cases: Vec<KernelSpec> = [0.5, 1.0, 2.0].into_iter().map(p).collect();
    cases.push(KernelSpec::product_polydisc(vec![KernelSpec::szego(), KernelSpec::szego()]).unwrap());
    for spec in &cases {
        let grid = SampleGrid::radial_rings(spec.domain(), &[0.0, 0.3, 0.6], 4).unwrap();
        assert_eq!(grid.len(), 9);
        for w in grid.points() {
            let kappa = curvature_form(spec, w).unwrap().matrix;
            let target = (-kappa.transpose()).try_inverse().unwrap();
            let data = nilpotent_data(spec, w, Orthonormalization::Symmetric).unwrap();
            worst = worst.max((target - data.a_gram().unwrap()).norm());
        }
    }
    check(worst <= 1e-8, format!("max deviation {worst:.2e}"))
}

fn aronszajn_model() -> Outcome {
    let bidisc = KernelSpec::product_polydisc(vec![KernelSpec::szego(), KernelSpec::szego()]).unwrap();
    let q = diagonal_restriction(&bidisc).unwrap();
    let (mut value, mut curv): (f64, f64) = (0.0, 0.0);
    for (z, w) in random_pairs(6, 50, 0.9) {
        let oracle = (C64::new(1.0, 0.0) - z.z() * w.z().conj()).powi(-2);
        value = value.max((q.eval_scalar(&z, &w).unwrap() - oracle).norm());
        let exact = -2.0 / (1.0 - w.norm_sqr()).powi(2);
        curv = curv.max((curvature_form(&q, &w).unwrap().scalar() - exact).abs());
    }
    check(value <= 1e-12 && curv <= 1e-9, format!("value {value:.2e}, curvature {curv:.2e}"))
}

fn ktilde_identity() -> Outcome {
    let kt = ktilde_kernel(&p(1.0)).unwrap();
    let mut worst: f64 = 0.0;
    for (z, w) in random_pairs(7, 50, 0.9) {
        let oracle = (C64::new(1.0, 0.0) - z.z() * w.z().conj()).powi(-4);
        worst = worst.max((kt.eval_scalar(&z, &w).unwrap() - oracle).norm());
    }
    let pd = sampled_verdict(&kt, &SampleGrid::default_for(Domain::Disc, 42).unwrap(), DEFAULT_REL_TOL).unwrap();
    check(worst <= 1e-10 && pd.passes(), format!("max error {worst:.2e}, gram {:?}", pd.verdict))
}

fn limit_formula() -> Outcome {
    let k1 = VanishingSubmoduleKernel::new(&KernelSpec::szego(), 30).unwrap();
    let zero = C64::new(0.0, 0.0);
    let hs = [1e-1, 3e-2, 1e-2];
    let errs: Vec<f64> = hs.iter().map(|h| (k1.limit_quotient(zero, zero, *h, false).unwrap() - 0.5).norm()).collect();
    let xs: Vec<f64> = hs.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / 3.0, ys.iter().sum::<f64>() / 3.0);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>() / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    check(errs[2] <= 1e-3 && slope >= 0.9, format!("error at 1e-2 {:.2e}, slope {slope:.2}", errs[2]))
}

fn blowup() -> Outcome {
    let mut worst: f64 = 0.0;
    for theta in [C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(2.0, 1.0)] {
        let h = 1e-4;
        let f = |t: C64| (1.0 + t.norm_sqr()).ln();
        let lap = (f(theta + h) + f(theta - h) + f(theta + C64::new(0.0, h)) + f(theta - C64::new(0.0, h)) - 4.0 * f(theta)) / (h * h);
        let oracle = lap / 4.0;
        let curvature = h20_blowup(Chart::First(theta)).curvature;
        worst = worst.max((curvature - oracle).abs()).max((curvature - (1.0 + theta.norm_sqr()).powi(-2)).abs());
    }
    let zero = C64::new(0.0, 0.0);
    let origin = h20_joint_kernel_rank([zero, zero], 8).unwrap();
    let others: Vec<usize> = [[C64::new(0.5, 0.0), zero], [zero, C64::new(0.0, -0.4)], [C64::new(0.3, 0.1), C64::new(-0.2, 0.2)]]
        .iter()
        .map(|w| h20_joint_kernel_rank(*w, 8).unwrap())
        .collect();
    check(
        worst <= 1e-6 && origin == 2 && others.iter().all(|r| *r == 1),
        format!("curvature error {worst:.2e}, ranks {origin} {others:?}"),
    )
}

fn flag_invariants() -> Outcome {
    let grid = default_flag_grid().unwrap();
    let a = flag_kernel(&KernelSpec::szego(), &KernelSpec::bergman()).unwrap();
    let phi = Poly::new(vec![C64::new(1.0, 0.0), C64::new(0.5, 0.25)]);
    let scaled = flag_kernel(
        &KernelSpec::frame_scaled(KernelSpec::szego(), phi.clone()).unwrap(),
        &KernelSpec::frame_scaled(KernelSpec::bergman(), phi).unwrap(),
    )
    .unwrap();
    let doubled = flag_kernel(&KernelSpec::szego(), &KernelSpec::scaled(KernelSpec::bergman(), 2.0).unwrap()).unwrap();
    let other = flag_kernel(&KernelSpec::bergman(), &p(3.0)).unwrap();
    let same = flag_equivalence(&a, &a, &grid, 1e-7).unwrap().is_equivalent();
    let frame = flag_equivalence(&a, &scaled, &grid, 1e-7).unwrap().is_equivalent();
    let witness = |v: FlagVerdict| match v {
        FlagVerdict::Inequivalent { invariant, .. } => Some(invariant),
        FlagVerdict::Equivalent => None,
    };
    let w1 = witness(flag_equivalence(&a, &doubled, &grid, 1e-7).unwrap());
    let w2 = witness(flag_equivalence(&a, &other, &grid, 1e-7).unwrap());
    check(
        same && frame && w1 == Some(FlagInvariant::Ratio) && w2 == Some(FlagInvariant::Curvature),
        format!("self {same}, frame-scaled {frame}, witnesses {w1:?} {w2:?}"),
    )
}

fn mu_sweep() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut agree = 0;
    let mut admissible = 0;
    for i in 0..50 {
        let mut int = || f64::from(rng.random_range(-3i32..=3));
        let (m21, m32) = (int(), int());
        let m31 = if i % 2 == 0 { m21 * m32 / 2.0 } else { int() };
        let mu = MuMatrix::from_lower(3, &[C64::new(m21, 0.0), C64::new(m31, 0.0), C64::new(m32, 0.0)]).unwrap();
        let closed = m32 * m21 == 2.0 * m31;
        let symbolic = mu_admissibility(&mu, 6).admissible;
        agree += usize::from(closed == symbolic);
        admissible += usize::from(symbolic);
    }
    check(agree == 50, format!("{agree}/50 agree, {admissible} admissible"))
}

fn elementary_bundle() -> Outcome {
    let (eta, y) = (0.8, C64::new(0.6, -1.1));
    let two = ElementaryBundleParams::two_block(eta, y).unwrap();
    let g0 = elementary_bundle_gram0(&two).unwrap();
    let gram_err = (g0.k00[(0, 0)] - 1.0).norm()
        + (g0.k00[(1, 1)] - (y.norm_sqr() / (2.0 * eta) + 1.0)).norm()
        + g0.k00[(0, 1)].norm()
        + g0.k00[(1, 0)].norm();
    let pairs = sample_pairs(42, 10, 0.7);
    let g = Automorphism::phi(C64::new(0.3, 0.0)).unwrap();
    let scalar = multiplier_quasi_invariance(&ElementaryBundleParams::scalar(eta).unwrap(), &g, &pairs, 1e-8).unwrap();
    let block = multiplier_quasi_invariance(&two, &g, &pairs, 1e-8).unwrap();
    check(
        gram_err <= 1e-12 && scalar.passed && block.passed,
        format!("gram0 error {gram_err:.2e}, residuals {:.2e} {:.2e}", scalar.residual, block.residual),
    )
}

fn extremality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let points: Vec<C64> = (0..10).map(|_| random_disc(&mut rng, 0.8)).collect();
    let mut ok = true;
    for z in &points {
        let a = extremality_point_test(&p(1.0), *z, 1e-8).unwrap();
        let b = extremality_point_test(&p(2.0), *z, 1e-8).unwrap();
        ok &= a.extremal && !b.extremal && a.agrees && b.agrees;
    }
    check(ok, format!("{} points", points.len()))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("curvature closed form", curvature_closed_form),
        ("Mobius transformation law", mobius_law),
        ("contractivity boundary", contractivity_boundary),
        ("infinite divisibility", infinite_divisibility),
        ("curvature from nilpotent data", curvform_identity),
        ("diagonal restriction model", aronszajn_model),
        ("K-tilde identity and positivity", ktilde_identity),
        ("limit formula", limit_formula),
        ("H2_0 blow-up", blowup),
        ("flag invariants", flag_invariants),
        ("mu admissibility sweep", mu_sweep),
        ("elementary bundle", elementary_bundle),
        ("extremality detection", extremality),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            let msg = e.downcast_ref::<String>().cloned().or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()));
            Err(format!("panicked: {}", msg.unwrap_or_default()))
        });
        match outcome {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
