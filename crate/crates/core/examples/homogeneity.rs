//! Homogeneity under Möbius maps and the weighted shift models `W_λ`.

use cdkernel::homogeneous::{default_alpha_grid, homogeneity_check, wlambda_model};
use cdkernel::linalg::operator_norm;
use cdkernel::KernelSpec;

fn main() -> cdkernel::Result<()> {
    for spec in [KernelSpec::power_disc(1.5)?, KernelSpec::diagonal_series(vec![1.0, 1.0, 0.5])?] {
        let report = homogeneity_check(&spec, &default_alpha_grid(), 1e-8)?;
        let worst = report.rows.iter().map(|r| r.residual).fold(0.0, f64::max);
        println!("{:<28} homogeneous {:<5} worst residual {worst:.2e}", spec.label(), report.homogeneous);
    }
    for lambda in [0.25, 0.5, 1.0, 2.0] {
        let m = wlambda_model(lambda, 32)?;
        println!("lambda = {lambda:<4} ‖W‖ = {:.6}", operator_norm(&m.shift));
    }
    Ok(())
}
