use kgres::dyadic::{dump, Grid, SpectralField};
use kgres::params::check_speed_mass_conditions;
use kgres::phase::{eval_phase, sublevel_measure, SublevelOptions};
use kgres::{Error, PhaseTriple, SystemBuilder, SystemParams};
use num_complex::Complex64;
use proptest::prelude::*;

fn sys(b: &[f64], c: &[f64]) -> SystemParams {
    SystemBuilder::new(b.to_vec(), c.to_vec()).build().unwrap()
}

fn positive3() -> impl Strategy<Value = [f64; 3]> {
    prop::array::uniform3(0.2f64..3.0)
}

fn signed_triple() -> impl Strategy<Value = PhaseTriple> {
    let idx = prop_oneof![-3i32..=-1, 1i32..=3];
    (1i32..=3, idx.clone(), idx).prop_map(|(s, m, n)| PhaseTriple::new(s, m, n, 3).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ordering_verdict_ignores_component_order(b in positive3(), c in positive3()) {
        let r = check_speed_mass_conditions(&sys(&b, &c));
        let rb = [b[2], b[0], b[1]];
        let rc = [c[2], c[0], c[1]];
        let s = check_speed_mass_conditions(&sys(&rb, &rc));
        prop_assert_eq!(r.speed_mass_ordering_holds, s.speed_mass_ordering_holds);
        prop_assert_eq!(r.mass_sum_holds, s.mass_sum_holds);
        prop_assert_eq!(r.violations.len(), s.violations.len());
        prop_assert_eq!(r.equal_speed_null_mass_triples.len(), s.equal_speed_null_mass_triples.len());
    }

    #[test]
    fn exchanging_the_inputs_keeps_the_phase(
        b in positive3(), c in positive3(), t in signed_triple(),
        xi in prop::array::uniform3(-5.0f64..5.0), eta in prop::array::uniform3(-5.0f64..5.0),
    ) {
        let p = sys(&b, &c);
        let rest = [xi[0] - eta[0], xi[1] - eta[1], xi[2] - eta[2]];
        let a = eval_phase(&p, &t, &xi, &eta);
        let e = eval_phase(&p, &t.swapped(), &xi, &rest);
        prop_assert!((a - e).abs() <= 1e-13 * (1.0 + a.abs()));
    }

    #[test]
    fn sublevel_measure_grows_with_eps(alpha in -2.0f64..2.0, e1 in 1e-5f64..0.5, k in 1.0f64..10.0) {
        let p = sys(&[1.0, 2.0, 0.5], &[1.0, 1.05, 1.0]);
        let t = PhaseTriple::new(1, 2, -3, 3).unwrap();
        let o = SublevelOptions::default();
        let small = sublevel_measure(&p, &t, alpha, e1, (-3.0, 3.0), &o).unwrap();
        let large = sublevel_measure(&p, &t, alpha, e1 * k, (-3.0, 3.0), &o).unwrap();
        prop_assert!(small <= large + 1e-12);
        prop_assert!(large <= 6.0 + 1e-12);
    }
}

#[test]
fn masses_must_be_positive_and_tensors_sized() {
    assert!(matches!(SystemBuilder::new(vec![1.0, -1.0], vec![1.0, 1.0]).build(), Err(Error::Validation(_))));
    assert!(SystemBuilder::new(vec![1.0], vec![1.0]).quad_u(vec![0.0; 5]).build().is_err());
}

#[test]
fn dumped_fields_read_back_exactly() {
    let g = Grid::new(8, 6.0).unwrap();
    let f = SpectralField::from_fn(&g, |x| Complex64::new((-x[0] * x[0]).exp() * (1.0 + x[1]), 0.1 * x[2]));
    let dir = tempfile::tempdir().unwrap();
    dump::write_field(dir.path(), "f", &f, 2, "probe").unwrap();
    let (back, meta) = dump::read_field(dir.path(), "f").unwrap();
    assert_eq!(meta.component, 2);
    assert_eq!(meta.resolution, 8);
    assert_eq!(back.max_abs_diff(&f), 0.0);
}
