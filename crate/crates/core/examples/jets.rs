//! Jet kernels and admissibility of the twisting matrix μ.

use cdkernel::jets::{jet_kernel, mu_admissibility, MuMatrix};
use cdkernel::posdef::{sampled_verdict, SampleGrid, DEFAULT_REL_TOL};
use cdkernel::{Domain, DomainPoint, KernelSpec, C64};

fn main() -> cdkernel::Result<()> {
    let jk = jet_kernel(&KernelSpec::power_disc(2.0)?, 3)?;
    let origin = DomainPoint::disc(C64::new(0.0, 0.0))?;
    println!("J_3 K(0, 0) =\n{}", jk.eval(&origin, &origin)?.map(|c| c.re));
    let grid = SampleGrid::default_for(Domain::Disc, 1)?;
    println!("jet kernel gram: {:?}", sampled_verdict(&jk, &grid, DEFAULT_REL_TOL)?.verdict);

    for (m21, m31, m32) in [(2.0, 2.0, 2.0), (1.0, 1.0, 1.0), (3.0, 3.0, 2.0)] {
        let mu = MuMatrix::from_lower(3, &[C64::new(m21, 0.0), C64::new(m31, 0.0), C64::new(m32, 0.0)])?;
        let check = mu_admissibility(&mu, 6);
        println!("mu21={m21} mu31={m31} mu32={m32}: admissible {} {:?}", check.admissible, check.first_failure);
    }
    Ok(())
}
