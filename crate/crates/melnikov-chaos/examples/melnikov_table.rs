//! Melnikov function of the piecewise Duffing fixture and its zero structure.
//!
//! `cargo run --release --example melnikov_table -- [kappa]`

use melnikov_chaos::flow::IntegratorConfig;
use melnikov_chaos::homoclinic::{compute_homoclinic, HomoclinicMethod};
use melnikov_chaos::melnikov::{extract_zero_structure, Evaluator, MelnikovFunction, ZeroScanConfig};
use melnikov_chaos::system::{compute_saddle_data, duffing, DuffingParams};

fn main() -> melnikov_chaos::Result<()> {
    let kappa = std::env::args().nth(1).map_or(4.0, |s| s.parse().expect("kappa must be a number"));
    let sys = duffing(&DuffingParams {
        kappa,
        ..Default::default()
    });
    let saddle = compute_saddle_data(&sys)?;
    let gamma = compute_homoclinic(&sys, &saddle, HomoclinicMethod::ClosedForm, &IntegratorConfig::default())?;
    let m = MelnikovFunction::new(&sys, &saddle, &gamma, 1e-11)?;

    println!("{:>8} {:>14}", "alpha", "M(alpha)");
    for i in 0..=20 {
        let a = 0.05 * i as f64;
        println!("{a:>8.3} {:>14.8}", m.value(a)?);
    }

    let zs = extract_zero_structure(&m, (-0.3, 2.3), 1e-2, &ZeroScanConfig::default())?;
    println!("\nclass {:?}, Lambda1 = {:.4}", zs.class, zs.lambda1);
    for (z, slope) in &zs.derivatives {
        println!("zero {z:.6}, M' = {slope:.5}");
    }
    Ok(())
}
