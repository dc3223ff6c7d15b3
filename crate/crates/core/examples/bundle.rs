//! Elementary homogeneous bundles: the Gram matrix at the origin and the
//! multiplier identity under automorphisms of the disc.

use cdkernel::homogeneous::{
    cocycle_residual, elementary_bundle_gram0, multiplier_quasi_invariance, sample_pairs, Automorphism, ElementaryBundleParams,
};
use cdkernel::C64;

fn main() -> cdkernel::Result<()> {
    let params = ElementaryBundleParams::two_block(0.8, C64::new(0.6, -1.1))?;
    let g0 = elementary_bundle_gram0(&params)?;
    println!("K(0,0) =\n{}", g0.k00.map(|c| c.re));

    let pairs = sample_pairs(3, 10, 0.6);
    for (theta, alpha) in [(0.0, 0.3), (1.2, -0.4), (std::f64::consts::PI, 0.5)] {
        let g = Automorphism::rotation_mobius(theta, C64::new(alpha, 0.1))?;
        let report = multiplier_quasi_invariance(&params, &g, &pairs, 1e-8)?;
        println!("theta = {theta:.3} alpha = {alpha}: residual {:.2e}", report.residual);
    }

    let g = Automorphism::phi(C64::new(0.2, 0.1))?;
    let h = Automorphism::rotation_mobius(0.4, C64::new(-0.3, 0.0))?;
    println!("cocycle residual {:.2e}", cocycle_residual(&params, &g, &h, C64::new(0.1, 0.2)));
    Ok(())
}
