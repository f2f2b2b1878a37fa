//! The rotated-Gaussian measure-preserving automorphism and the
//! two-dimensional Darmois map, evaluated directly.
//!
//! Run with:
//!   cargo run --release --example mpa_and_darmois

use ima_lab::distributions::{sample_factorial, FactorialDistribution, UnivariateLaw};
use ima_lab::linalg::rotation_2d;
use ima_lab::mpa::{
    darmois_build, darmois_jacobian, gaussian_conditional_cdf, mpa_forward, DensitySpec,
    RotatedGaussianMPA,
};
use ima_lab::stats::{ks_one_sample, ks_one_sample_critical_1pct};

fn main() -> ima_lab::error::Result<()> {
    let laplace = UnivariateLaw::standard_laplace();
    let p_s = FactorialDistribution::iid(laplace.clone(), 2)?;
    let a = RotatedGaussianMPA::new(p_s.clone(), rotation_2d(std::f64::consts::PI / 6.0))?;
    let xs = sample_factorial(&p_s, 20_000, 1)?;
    let ys: Vec<_> = xs
        .iter()
        .map(|s| mpa_forward(&a, s))
        .collect::<Result<_, _>>()?;
    for i in 0..2 {
        let col: Vec<f64> = ys.iter().map(|y| y[i]).collect();
        println!(
            "component {i}: KS distance to Laplace {:.4} (1% critical {:.4})",
            ks_one_sample(&col, |x| laplace.cdf(x)),
            ks_one_sample_critical_1pct(col.len())
        );
    }

    let rho = 0.6;
    let dm = darmois_build(DensitySpec::CorrelatedGaussian { rho }, 512)?;
    println!("\nDarmois map of a correlated Gaussian (ρ = {rho}):");
    for x in [[0.0, 0.0], [1.0, -0.5], [-1.2, 0.8]] {
        let u = dm.forward(x)?;
        let j = darmois_jacobian(&dm, x)?;
        println!(
            "x = {x:?}  u2 = {:.6} (closed form {:.6})  J12 = {}",
            u[1],
            gaussian_conditional_cdf(rho, x[0], x[1]),
            j.get(0, 1)
        );
    }
    let mut tables = Vec::new();
    dm.write_tables_csv(&mut tables)?;
    println!("tables CSV: {} bytes", tables.len());
    Ok(())
}
