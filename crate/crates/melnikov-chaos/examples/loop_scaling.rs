//! One loop of the Poincaré map near the homoclinic: return distance and
//! return time against the start displacement `d`.
//!
//! `cargo run --release --example loop_scaling -- [epsilon]`

use melnikov_chaos::geometry::{Geometry, GeometryConfig};
use melnikov_chaos::homoclinic::HomoclinicMethod;
use melnikov_chaos::poincare::{fit_slope, loop_forward};
use melnikov_chaos::system::{duffing, DuffingParams};

fn main() -> melnikov_chaos::Result<()> {
    let eps = std::env::args().nth(1).map_or(3e-3, |s| s.parse().expect("epsilon must be a number"));
    let geo = Geometry::new(&duffing(&DuffingParams::default()), eps, HomoclinicMethod::ClosedForm, GeometryConfig::default())?;
    geo.prepare_endpoint_tables()?;
    let tau = 0.036637;

    let (mut log_d, mut log_d1, mut log_inv_d, mut times) = (vec![], vec![], vec![], vec![]);
    println!("{:>10} {:>14} {:>10}", "d", "D1", "T1 - tau");
    for i in 0..7 {
        let d = 10f64.powf(-7.0 + 0.5 * i as f64);
        let r = loop_forward(&geo, d, tau)?;
        println!("{d:>10.3e} {:>14.6e} {:>10.4}", r.big_d1, r.t1 - tau);
        log_d.push(d.ln());
        log_d1.push(r.big_d1.abs().ln());
        log_inv_d.push(d.ln().abs());
        times.push(r.t1 - tau);
    }
    let c = geo.constants;
    println!("\nslope of log D1: {:.4} (sigma_fwd = {})", fit_slope(&log_d, &log_d1), c.sigma_fwd);
    println!("slope of T1 in |ln d|: {:.4} (Sigma_fwd = {})", fit_slope(&log_inv_d, &times), c.big_sigma_fwd);
    Ok(())
}
