//! Sampled positivity and contractivity of the powers `(1 - z w̄)^{-s}`.

use cdkernel::posdef::{contractivity_kernel, sampled_verdict, SampleGrid, DEFAULT_REL_TOL};
use cdkernel::{Domain, KernelSpec};

fn main() -> cdkernel::Result<()> {
    let grid = SampleGrid::default_for(Domain::Disc, 42)?;
    for s in [0.5, 1.0, 2.0, 3.5] {
        let spec = KernelSpec::power_disc(s)?;
        let gram = sampled_verdict(&spec, &grid, DEFAULT_REL_TOL)?;
        let contractive = sampled_verdict(&contractivity_kernel(&spec, Domain::Disc, 1)?, &grid, DEFAULT_REL_TOL)?;
        println!(
            "s = {s:<4} gram {:?} (min eig {:.2e}), contractivity {:?}",
            gram.verdict, gram.min_eig, contractive.verdict
        );
    }
    Ok(())
}
