use std::sync::OnceLock;

use melnikov_chaos::constructor::{build_time_sequence, GapMode, SymbolSequence, Tail, TimeOptions, TimeSequence, TimeSide};
use melnikov_chaos::geometry::{constants_from_eigenvalues, Geometry, GeometryConfig};
use melnikov_chaos::homoclinic::HomoclinicMethod;
use melnikov_chaos::melnikov::{extract_zero_structure, MelnikovFunction, ZeroScanConfig};
use melnikov_chaos::system::{duffing, DuffingParams, PiecewiseSystem};
use proptest::prelude::*;

fn geometry() -> &'static Geometry {
    static G: OnceLock<Geometry> = OnceLock::new();
    G.get_or_init(|| {
        let sys = duffing(&DuffingParams::default());
        Geometry::new(&sys, 0.0, HomoclinicMethod::ClosedForm, GeometryConfig::default()).unwrap()
    })
}

fn past_times() -> &'static TimeSequence {
    static T: OnceLock<TimeSequence> = OnceLock::new();
    T.get_or_init(|| {
        let g = geometry();
        let m = MelnikovFunction::new(&g.sys, &g.saddle, &g.gamma, 1e-11).unwrap();
        let zs = extract_zero_structure(&m, (-0.3, 2.3), 1e-2, &ZeroScanConfig::default()).unwrap();
        build_time_sequence(&zs, Some(1.0), 1e-2, 1.0, &g.constants, 0.5366, GapMode::Lambda, TimeSide::Past, &TimeOptions::default())
            .unwrap()
    })
}

fn without_label(s: &PiecewiseSystem) -> PiecewiseSystem {
    PiecewiseSystem {
        label: String::new(),
        ..s.clone()
    }
}

#[test]
fn reversing_twice_is_the_identity() {
    let sys = duffing(&DuffingParams::default());
    assert_eq!(without_label(&sys.time_reversed().time_reversed()), without_label(&sys));
    let t = past_times();
    assert_eq!(&t.reflected().reflected(), t);
    assert_eq!(t.reflected().side, TimeSide::Future);
    assert!(t.times.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn derived_constants_satisfy_their_identities() {
    let c = geometry().constants;
    assert!(c.is_admissible());
    for (name, r) in c.identity_residuals() {
        assert!(r.abs() < 1e-15, "{name}: {r}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn directed_distance_is_antisymmetric(a in -0.9f64..0.9, b in -0.9f64..0.9) {
        let l0 = &geometry().l0;
        let s0 = l0.coordinate(geometry().gamma.crossing_point).unwrap();
        let p = l0.point_at(s0 + a * l0.half_width).unwrap();
        let q = l0.point_at(s0 + b * l0.half_width).unwrap();
        let pq = l0.directed_distance(p, q).unwrap();
        prop_assert!((pq + l0.directed_distance(q, p).unwrap()).abs() <= 1e-14);
        prop_assert_eq!(l0.directed_distance(p, p).unwrap(), 0.0);
    }

    #[test]
    fn symbol_reflection_is_an_involution(p in prop::collection::vec(0u8..2, 1..16), z in any::<bool>()) {
        let tail = if z { Tail::Zeros } else { Tail::Unspecified };
        let e = SymbolSequence::new(p, tail, TimeSide::Future).unwrap();
        prop_assert_eq!(e.reflected().reflected(), e.clone());
        prop_assert_eq!(e.reflected().side, TimeSide::Past);
    }

    #[test]
    fn forcing_time_shifts_compose(s in -2.0f64..2.0, r in -2.0f64..2.0, t in -3.0f64..3.0, x in -1.5f64..1.5) {
        let sys = duffing(&DuffingParams::default());
        let a = sys.forcing.time_shifted(s).time_shifted(r).eval(t, [x, 0.3]);
        let b = sys.forcing.eval(t + s + r, [x, 0.3]);
        prop_assert!((a[1] - b[1]).abs() <= 1e-12);
        let rev = sys.forcing.time_reversed().eval(-t, [x, 0.3]);
        prop_assert!((rev[1] + sys.forcing.eval(t, [x, 0.3])[1]).abs() <= 1e-12);
    }

    #[test]
    fn constants_are_admissible_and_dual(sp in 0.2f64..5.0, up in 0.2f64..5.0, sm in 0.2f64..5.0, um in 0.2f64..5.0) {
        let c = constants_from_eigenvalues(-sp, up, -sm, um);
        prop_assert!(c.is_admissible());
        for (_, r) in c.identity_residuals() {
            prop_assert!(r.abs() <= 1e-12);
        }
        prop_assert!(c.mu0 > 0.0 && c.k0 > 0.0 && c.nu0 >= 1.0);
    }
}
