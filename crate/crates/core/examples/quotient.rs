//! The kernel of the submodule vanishing on the diagonal of the bidisc and
//! its limit along the diagonal.

use cdkernel::curvature::ktilde_kernel;
use cdkernel::jets::VanishingSubmoduleKernel;
use cdkernel::{DomainPoint, KernelSpec, C64};

fn main() -> cdkernel::Result<()> {
    let spec = KernelSpec::szego();
    let z = C64::new(0.2, 0.1);
    let p = DomainPoint::disc(z)?;
    let expected = ktilde_kernel(&spec)?.eval_scalar(&p, &p)? * 0.5;
    let k1 = VanishingSubmoduleKernel::new(&spec, 30)?;
    for h in [0.1, 0.03, 0.01] {
        let plain = k1.limit_quotient(z, z, h, false)?;
        let extrapolated = k1.limit_quotient(z, z, h, true)?;
        println!(
            "h = {h:<5} quotient {:.8} richardson {:.8} expected {:.8}",
            plain.re, extrapolated.re, expected.re
        );
    }
    Ok(())
}
