//! Curvature of the Szegő and Bergman kernels and the gap against the
//! Szegő reference.

use cdkernel::curvature::{curvature_form, curvature_gap_report, CurvatureReference};
use cdkernel::posdef::SampleGrid;
use cdkernel::{Domain, DomainPoint, KernelSpec, C64};

fn main() -> cdkernel::Result<()> {
    for spec in [KernelSpec::szego(), KernelSpec::bergman()] {
        for r in [0.0, 0.5, 0.9] {
            let w = DomainPoint::disc(C64::new(r, 0.0))?;
            println!("{:<16} w = {r:<4} curvature {:.6}", spec.label(), curvature_form(&spec, &w)?.scalar());
        }
    }

    let grid = SampleGrid::default_for(Domain::Disc, 7)?;
    let report = curvature_gap_report(&KernelSpec::power_disc(3.0)?, &grid, CurvatureReference::DiscSzego)?;
    println!("power_disc(3) stays below the Szegő curvature: {}", report.satisfied);
    Ok(())
}
