//! Flag kernels built from a pair of scalar kernels and their unitary
//! invariants.

use cdkernel::flag::{default_flag_grid, flag_equivalence, flag_invariants, flag_kernel};
use cdkernel::poly::Poly;
use cdkernel::KernelSpec;
use cdkernel::C64;

fn main() -> cdkernel::Result<()> {
    let grid = default_flag_grid()?;
    let k0 = KernelSpec::power_disc(1.0)?;
    let k1 = KernelSpec::power_disc(3.0)?;
    let a = flag_kernel(&k0, &k1)?;
    let inv = flag_invariants(&a, &grid)?;
    println!("first point: curvature {:.6}, ratio {:.6}", inv.curv0[0], inv.ratio[0]);

    let frame = Poly::new(vec![C64::new(1.0, 0.0), C64::new(0.4, 0.2)]);
    let b = flag_kernel(&KernelSpec::frame_scaled(k0.clone(), frame.clone())?, &KernelSpec::frame_scaled(k1, frame)?)?;
    println!("common frame change: {:?}", flag_equivalence(&a, &b, &grid, 1e-8)?);

    let c = flag_kernel(&k0, &KernelSpec::power_disc(2.0)?)?;
    println!("different second kernel: {:?}", flag_equivalence(&a, &c, &grid, 1e-8)?);
    Ok(())
}
