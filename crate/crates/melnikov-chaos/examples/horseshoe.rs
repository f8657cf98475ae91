//! Nested intervals for a few symbol sequences and shadowing of the orbits
//! that start inside them.
//!
//! `cargo run --release --example horseshoe -- [symbols...]`

use melnikov_chaos::constructor::{
    aleph_diameter, build_time_sequence, construct_nested, verify_shadowing, ConstructionConfig, GapMode,
    SymbolSequence, Tail, TimeOptions, TimeSide, C_STAR,
};
use melnikov_chaos::flow::IntegratorConfig;
use melnikov_chaos::geometry::{Geometry, GeometryConfig};
use melnikov_chaos::homoclinic::{compute_homoclinic, HomoclinicMethod};
use melnikov_chaos::melnikov::{extract_zero_structure, MelnikovFunction, ZeroScanConfig};
use melnikov_chaos::system::{compute_saddle_data, duffing, DuffingParams};

fn main() -> melnikov_chaos::Result<()> {
    let mut symbols: Vec<String> = std::env::args().skip(1).collect();
    if symbols.is_empty() {
        symbols = vec!["1".into(), "11".into(), "101".into()];
    }
    let eps = 1e-2;
    let sys = duffing(&DuffingParams::default());
    let saddle = compute_saddle_data(&sys)?;
    let gamma = compute_homoclinic(&sys, &saddle, HomoclinicMethod::ClosedForm, &IntegratorConfig::default())?;
    let m = MelnikovFunction::new(&sys, &saddle, &gamma, 1e-11)?;
    let zs = extract_zero_structure(&m, (-0.3, 2.3), 1e-2, &ZeroScanConfig::default())?;

    let geo = Geometry::new(&sys, eps, HomoclinicMethod::ClosedForm, GeometryConfig::default())?;
    geo.prepare_endpoint_tables()?;
    let c = geo.constants;
    let tau = zs.zeros().into_iter().find(|&z| z >= 0.0).expect("a zero in [0, 1)");
    let times = build_time_sequence(&zs, Some(1.0), eps, c.nu0, &c, tau, GapMode::Lambda, TimeSide::Future, &TimeOptions::default())?;
    println!("tau = {tau:.6}, times {:?}", &times.times[..4]);

    let mut family = Vec::new();
    for s in &symbols {
        let e = SymbolSequence::parse(s, Tail::Zeros, TimeSide::Future)?;
        let n = construct_nested(&geo, &e, &times, &ConstructionConfig::default())?;
        println!("\n{}", e.label());
        for l in &n.levels {
            println!("  level {}: J = [{:.6e}, {:.6e}], alpha in [{:.2e}, {:.2e}]", l.n, l.j_n.0, l.j_n.1, l.alpha_min, l.alpha_max);
        }
        for d in n.probe_points() {
            let r = verify_shadowing(&geo, &n, d, C_STAR)?;
            let worst = r.windows.iter().map(|w| w.sup_distance / eps).fold(0.0f64, f64::max);
            println!("  d = {d:.6e}: {} windows, max sup/eps {worst:.4}, pass {}", r.windows.len(), r.pass);
        }
        family.push(n);
    }
    println!("\ndiameter of the constructed set {:.3e}, localization {:.3e}", aleph_diameter(&family), c.localization(eps, c.nu0));
    Ok(())
}
