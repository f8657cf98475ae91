use melnikov_chaos::bernoulli::semi_conjugacy_check;
use melnikov_chaos::constructor::{
    build_time_sequence, construct_backward, construct_nested, verify_shadowing, ConstructionConfig, GapMode,
    NestedIntervals, SymbolSequence, Tail, TimeOptions, TimeSequence, TimeSide, C_STAR,
};
use melnikov_chaos::geometry::{Geometry, GeometryConfig};
use melnikov_chaos::homoclinic::HomoclinicMethod;
use melnikov_chaos::melnikov::{extract_zero_structure, MelnikovFunction, ZeroScanConfig, ZeroStructure};
use melnikov_chaos::system::{duffing, DuffingParams};
use melnikov_chaos::Error;

const EPS: f64 = 1e-2;

fn setting() -> (Geometry, ZeroStructure) {
    let g = Geometry::new(&duffing(&DuffingParams::default()), EPS, HomoclinicMethod::ClosedForm, GeometryConfig::default())
        .unwrap();
    g.prepare_endpoint_tables().unwrap();
    let m = MelnikovFunction::new(&g.sys, &g.saddle, &g.gamma, 1e-11).unwrap();
    let zs = extract_zero_structure(&m, (-0.3, 2.3), 1e-2, &ZeroScanConfig::default()).unwrap();
    (g, zs)
}

fn times(g: &Geometry, zs: &ZeroStructure, side: TimeSide) -> TimeSequence {
    let tau = zs.zeros().into_iter().find(|&z| z >= 0.0).unwrap();
    build_time_sequence(zs, Some(1.0), EPS, 1.0, &g.constants, tau, GapMode::Lambda, side, &TimeOptions::default()).unwrap()
}

fn forward(g: &Geometry, t: &TimeSequence, s: &str) -> NestedIntervals {
    let e = SymbolSequence::parse(s, Tail::Zeros, TimeSide::Future).unwrap();
    construct_nested(g, &e, t, &ConstructionConfig::default()).unwrap()
}

#[test]
fn future_and_past_constructions_shadow_and_commute_with_the_shift() {
    let (g, zs) = setting();
    let t = times(&g, &zs, TimeSide::Future);
    // Every time sits on a zero of M, spaced by the integer gap.
    assert_eq!(t.gap(1), Some(23.0));
    assert!(t.windows.iter().all(Option::is_some));

    let one = forward(&g, &t, "1");
    let lvl = &one.levels[0];
    assert!(lvl.j_n.0 > 0.0 && lvl.j_n.0 < lvl.j_n.1 && lvl.j_n.1 <= one.localization);
    for d in one.probe_points() {
        let r = verify_shadowing(&g, &one, d, C_STAR).unwrap();
        assert!(r.pass && r.localization_pass && r.manifold_pass, "{d:e}");
    }

    let family = vec![one, forward(&g, &t, "101")];
    assert_eq!(family[1].levels.len(), 2);
    let parent = family[1].levels[1].j_parent.unwrap();
    assert!(parent.0 >= family[1].levels[0].j_n.0 && parent.1 <= family[1].levels[0].j_n.1);
    let report = semi_conjugacy_check(&g, &family, zs.lambda1, C_STAR, 2).unwrap();
    assert!(report.pass);
    let terminal = report.points.iter().find(|p| p.sequence == "101(0)" && p.terminal).unwrap();
    assert_eq!(terminal.steps[0].readback, "10100");
    assert_eq!(terminal.steps.len(), 3);

    let past = SymbolSequence::parse("11", Tail::Zeros, TimeSide::Past).unwrap();
    let tp = times(&g, &zs, TimeSide::Past);
    let back = construct_backward(&g, &past, &tp, &ConstructionConfig::default()).unwrap();
    assert!(back.levels.iter().all(|l| l.t_star < back.tau));
    for d in back.probe_points() {
        assert!(verify_shadowing(&g, &back, d, C_STAR).unwrap().pass);
    }
}

#[test]
fn mismatched_inputs_are_rejected() {
    let (g, zs) = setting();
    let t = times(&g, &zs, TimeSide::Future);
    let past = SymbolSequence::parse("1", Tail::Zeros, TimeSide::Past).unwrap();
    let cfg = ConstructionConfig::default();
    assert!(matches!(construct_nested(&g, &past, &t, &cfg), Err(Error::Precondition(_))));
    let bj = ConstructionConfig {
        mode: GapMode::Bj,
        ..cfg
    };
    let e = SymbolSequence::parse("1", Tail::Zeros, TimeSide::Future).unwrap();
    assert!(matches!(construct_nested(&g, &e, &t, &bj), Err(Error::Precondition(_))));
    let zeros = SymbolSequence::parse("000", Tail::Zeros, TimeSide::Future).unwrap();
    assert!(construct_nested(&g, &zeros, &t, &cfg).is_err());
}
