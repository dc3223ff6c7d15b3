//! Writing and reading kernel specifications as JSON.

use cdkernel::kernel::json::{load_spec, save_spec, spec_to_string};
use cdkernel::poly::Poly;
use cdkernel::{DomainPoint, KernelSpec, C64};

fn main() -> cdkernel::Result<()> {
    let frame = Poly::new(vec![C64::new(1.0, 0.0), C64::new(0.0, 0.5)]);
    let spec = KernelSpec::scaled(KernelSpec::frame_scaled(KernelSpec::power_disc(2.5)?, frame)?, 3.0)?;
    println!("{}", spec_to_string(&spec));

    let path = std::env::temp_dir().join("cdkernel_example_spec.json");
    save_spec(&spec, &path)?;
    let loaded = load_spec(&path)?;
    let (z, w) = (DomainPoint::disc(C64::new(0.3, -0.1))?, DomainPoint::disc(C64::new(-0.2, 0.4))?);
    println!("K(z, w) before {} after {}", spec.eval_scalar(&z, &w)?, loaded.eval_scalar(&z, &w)?);
    std::fs::remove_file(path)?;
    Ok(())
}
