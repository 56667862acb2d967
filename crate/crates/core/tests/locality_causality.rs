mod common;

use rand::Rng;

use common::{
    causality_equivalence, identity_only_np_causal, locality_equivalences, rng,
    strictness_counterexample, swap_is_strictly_local, wider_traceout_decoheres,
};
use qnet_core::checks::{is_local, is_strictly_local, tomography_reconstruct};
use qnet_core::dynamics::{chain_universe, MOVERS};
use qnet_core::graphs::Universe;
use qnet_core::hilbert::UMatrix;
use qnet_core::restrict::Restriction;
use qnet_core::tensor_trace::gen::{density, fixed_points, name_classes, unitary};
use qnet_core::tensor_trace::laws::restriction_catalog;
use qnet_core::tensor_trace::{partial_trace, Operator};

#[test]
fn local_but_not_strictly_local() {
    let w = strictness_counterexample().unwrap();
    assert!(w.contains("= 0"), "{w}");
}

#[test]
fn swap_on_the_state_predicate_is_strictly_local() {
    swap_is_strictly_local().unwrap();
}

#[test]
fn locality_forms_agree() {
    let [tensor, strict, dual] = locality_equivalences(60, 21);
    for (name, e) in [("tensor", &tensor), ("strict", &strict), ("dual", &dual)] {
        assert!(e.disagreements.is_empty(), "{name}: {:?}", e.disagreements);
        assert!(e.holds > 0 && e.holds < e.checked, "{name}: {e:?}");
    }
    // strict locality implies locality
    assert!(strict.holds <= tensor.holds);
}

#[test]
fn dual_causality_agrees_with_causality() {
    let e = causality_equivalence(40, 22);
    assert!(e.ok(), "{e:?}");
}

#[test]
fn tracing_out_more_first_can_decohere() {
    let (where_, d) = wider_traceout_decoheres().unwrap();
    assert!((d - 0.5).abs() < 1e-12, "{where_}: {d}");
}

#[test]
fn identity_is_causal_only_in_the_np_sector() {
    let w = identity_only_np_causal().unwrap();
    assert!(w["vertex"].is_string());
    assert!(w["detail"].is_string());
}

#[test]
fn tomography_rebuilds_the_partial_trace() {
    let u = Universe::default_small();
    let cat = restriction_catalog(&u);
    let all = u.graphs().to_vec();
    let classes = name_classes(u.graphs());
    let mut r = rng(31);
    for i in 0..50 {
        let chi = &cat[i % cat.len()];
        let rho = density(&mut r, &all, 3);
        let want = partial_trace(&rho, chi);
        let got = tomography_reconstruct(&rho, chi, &u, false).unwrap();
        assert!(
            got.approx_eq(&want, 1e-12),
            "{chi}: {:?}",
            got.max_diff(&want)
        );
        // name-preserving states only need name-preserving probes
        let class = &classes[r.gen_range(0..classes.len())];
        let rho = density(&mut r, class, class.len().min(3));
        let want = partial_trace(&rho, chi);
        let got = tomography_reconstruct(&rho, chi, &u, true).unwrap();
        assert!(
            got.approx_eq(&want, 1e-12),
            "np {chi}: {:?}",
            got.max_diff(&want)
        );
    }
}

#[test]
fn strictly_local_unitaries_compose() {
    let u = chain_universe(3, &MOVERS).unwrap();
    let mut r = rng(32);
    for v in u.vertex_names() {
        let z = Restriction::zeta(v.clone());
        let slice = Universe::new("slice", fixed_points(&z, &u));
        let mut local =
            || Operator::localized(Operator::matrix(unitary(&mut r, &slice, true)), z.clone());
        let (a, b) = (local(), local());
        for op in [&a, &b] {
            assert!(is_strictly_local(op, &z, &u).unwrap().passed(), "{v}");
        }
        let ab = Operator::Product(vec![a.clone(), b.clone()]);
        assert!(UMatrix::materialize(&ab, &u).is_ok());
        assert!(is_local(&ab, &z, &u).unwrap().is_none(), "{v}");
        assert!(is_strictly_local(&ab, &z, &u).unwrap().passed(), "{v}");
    }
}
