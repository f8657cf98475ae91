//! Reads the symbols back from constructed orbits and checks that the time
//! shift of the orbit matches the shift of the sequence.
//!
//! `cargo run --release --example shift_conjugacy`

use melnikov_chaos::bernoulli::{distance, semi_conjugacy_check, shift};
use melnikov_chaos::constructor::{
    build_time_sequence, construct_nested, ConstructionConfig, GapMode, SymbolSequence, Tail, TimeOptions, TimeSide,
    C_STAR,
};
use melnikov_chaos::flow::IntegratorConfig;
use melnikov_chaos::geometry::{Geometry, GeometryConfig};
use melnikov_chaos::homoclinic::{compute_homoclinic, HomoclinicMethod};
use melnikov_chaos::melnikov::{extract_zero_structure, MelnikovFunction, ZeroScanConfig};
use melnikov_chaos::system::{compute_saddle_data, duffing, DuffingParams};

fn main() -> melnikov_chaos::Result<()> {
    let a = SymbolSequence::parse("1101", Tail::Zeros, TimeSide::Future)?;
    let b = SymbolSequence::parse("1001", Tail::Zeros, TimeSide::Future)?;
    println!("d({}, {}) = {}", a.label(), b.label(), distance(&a, &b)?);
    println!("shift of {} is {}", a.label(), shift(&a, 1).label());

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

    let family = ["1", "11", "101"]
        .iter()
        .map(|s| construct_nested(&geo, &SymbolSequence::parse(s, Tail::Zeros, TimeSide::Future)?, &times, &ConstructionConfig::default()))
        .collect::<melnikov_chaos::Result<Vec<_>>>()?;
    let report = semi_conjugacy_check(&geo, &family, zs.lambda1, C_STAR, 2)?;
    let rb = report.readback;
    println!("\nread 0 below {:.2e}, 1 above {:.4}", rb.zero_limit, rb.one_limit);
    for p in &report.points {
        let seen: Vec<&str> = p.steps.iter().map(|s| s.readback.as_str()).collect();
        println!("{} at d = {:.4e}: {seen:?}, commutes {}", p.sequence, p.probe, p.consistent);
    }
    println!("pass {}", report.pass);
    Ok(())
}
