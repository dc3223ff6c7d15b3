//! The line bundle on the exceptional divisor for `H²₀(𝔻²)` and the joint
//! kernel dimension of the adjoint pair.

use cdkernel::jets::{h20_blowup, h20_joint_kernel_rank, Chart};
use cdkernel::C64;

fn main() -> cdkernel::Result<()> {
    for theta in [C64::new(0.0, 0.0), C64::new(0.5, -0.5), C64::new(2.0, 0.0)] {
        let data = h20_blowup(Chart::First(theta));
        println!("theta = {theta}: curvature {:.6}, expected {:.6}", data.curvature, (1.0 + theta.norm_sqr()).powi(-2));
    }
    for w in [[C64::new(0.0, 0.0); 2], [C64::new(0.3, 0.0), C64::new(-0.2, 0.1)]] {
        println!("joint kernel rank at {w:?}: {}", h20_joint_kernel_rank(w, 8)?);
    }
    Ok(())
}
