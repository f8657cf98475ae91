//! Splitting of the perturbed manifolds on the section against `ĉ ε M(τ)`.
//!
//! `cargo run --release --example distance_law -- [epsilon]`

use melnikov_chaos::flow::IntegratorConfig;
use melnikov_chaos::geometry::{calibrate_distance, predict_distance, Geometry, GeometryConfig};
use melnikov_chaos::homoclinic::{compute_homoclinic, HomoclinicMethod};
use melnikov_chaos::melnikov::MelnikovFunction;
use melnikov_chaos::system::{compute_saddle_data, duffing, DuffingParams};

fn main() -> melnikov_chaos::Result<()> {
    let eps = std::env::args().nth(1).map_or(1e-2, |s| s.parse().expect("epsilon must be a number"));
    let sys = duffing(&DuffingParams::default());
    let saddle = compute_saddle_data(&sys)?;
    let gamma = compute_homoclinic(&sys, &saddle, HomoclinicMethod::ClosedForm, &IntegratorConfig::default())?;
    let m = MelnikovFunction::new(&sys, &saddle, &gamma, 1e-11)?;

    let geo = Geometry::new(&sys, eps, HomoclinicMethod::ClosedForm, GeometryConfig::default())?;
    geo.prepare_endpoint_tables()?;
    let cal = calibrate_distance(&geo, &m, 0.0, 1.0)?;
    println!("eps = {eps:e}, tau* = {:.5}, c_hat = {:.6}", cal.tau_star, cal.c_hat);

    println!("{:>6} {:>14} {:>14} {:>9}", "tau", "measured", "predicted", "ratio");
    for i in 0..10 {
        let tau = 0.1 * i as f64;
        let (measured, predicted) = predict_distance(&geo, &cal, &m, tau)?;
        println!("{tau:>6.2} {measured:>14.6e} {predicted:>14.6e} {:>9.4}", measured / predicted);
    }
    Ok(())
}
