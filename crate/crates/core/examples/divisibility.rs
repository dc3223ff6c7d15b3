//! Infinite divisibility of `(1 - z w̄) K` for a range of powers.

use cdkernel::posdef::{infinite_divisibility_test, SampleGrid, DEFAULT_REL_TOL};
use cdkernel::{Domain, KernelSpec};

fn main() -> cdkernel::Result<()> {
    let grid = SampleGrid::default_for(Domain::Disc, 42)?;
    let ts = [0.1, 0.5, 1.0, 2.0, 5.0];
    for s in [0.6, 1.0, 1.5, 3.0] {
        let report = infinite_divisibility_test(&KernelSpec::power_disc(s)?, Domain::Disc, &ts, &grid, DEFAULT_REL_TOL)?;
        let verdicts: Vec<String> = report.powers.iter().map(|p| format!("t={}:{:?}", p.t, p.report.verdict)).collect();
        println!("s = {s:<4} divisible {:<5} {}", report.infinitely_divisible, verdicts.join(" "));
    }
    Ok(())
}
