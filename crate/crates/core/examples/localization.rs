//! Normalized frames and the nilpotent part of the localized operator.

use cdkernel::curvature::curvature_form;
use cdkernel::localization::{local_functional_calculus, nilpotent_data, Orthonormalization, Rational};
use cdkernel::{DomainPoint, KernelSpec, C64};

fn main() -> cdkernel::Result<()> {
    let spec = KernelSpec::power_disc(2.0)?;
    let w = DomainPoint::disc(C64::new(0.3, 0.2))?;
    let data = nilpotent_data(&spec, &w, Orthonormalization::Symmetric)?;
    let kappa = curvature_form(&spec, &w)?.scalar();
    let h = data.h().expect("line bundle");
    println!("h² = {:.6}, -1/curvature = {:.6}, nilpotency residual {:.1e}", h * h, -1.0 / kappa, data.nilpotency_residual());

    let f = Rational::mobius(C64::new(0.5, 0.0));
    let local = local_functional_calculus(&spec, w.z(), &f)?;
    println!("local matrix of phi_0.5 at w: {:?}", local.value);
    Ok(())
}
