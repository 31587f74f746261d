//! End-to-end runs through the public API.

use optomech::basis::{label_box, label_eigenvalue};
use optomech::evolution::{decompose, default_label_set, InitialState};
use optomech::linalg;
use optomech::oracle::{self, brute_block_spectrum, match_spectrum, DirectMethod, SpectrumOptions};
use optomech::superop::{build_liouvillian, Part};
use optomech::{DampingBasis, EigenLabel, Execution, SystemParams, Variant, C64};

#[test]
fn parallel_and_sequential_elements_agree_bitwise() {
    let p = SystemParams::desk();
    let labels = label_box(1, 1, 1, 1);
    let par = DampingBasis::new(p, 4, 24).unwrap().with_execution(Execution::Parallel);
    let seq = DampingBasis::new(p, 4, 24).unwrap().with_execution(Execution::Sequential);
    for (a, b) in par.elements(&labels).into_iter().zip(seq.elements(&labels)) {
        let (a, b) = (a.unwrap(), b.unwrap());
        assert_eq!(a.to_joint(4), b.to_joint(4), "{}", a.label);
    }
}

#[test]
fn label_blocks_reproduce_their_analytic_eigenvalues() {
    for p in [SystemParams::desk(), SystemParams { variant: Variant::Dsme, ..SystemParams::desk() }] {
        let (nc, nm) = (3, 30);
        let l = build_liouvillian(&p, nc, nm, Part::Full).unwrap();
        let labels: Vec<EigenLabel> = label_box(1, 0, 1, 1);
        let numeric = brute_block_spectrum(&l, nc, nm, &[(-1, 0), (0, 0), (1, 0)], &SpectrumOptions::default()).unwrap();
        let analytic: Vec<(EigenLabel, C64)> = labels.iter().map(|lab| (*lab, label_eigenvalue(lab, &p))).collect();
        let rep = match_spectrum(&analytic, &numeric, 1e-8);
        assert!(rep.all_within(), "{:?}: {:.2e}", p.variant, rep.max_delta());
    }
}

#[test]
fn spectral_and_adaptive_evolution_agree() {
    let p = SystemParams::desk();
    let (nc, nm) = (3, 26);
    let rho0 = InitialState::FockThermal { n: 1, mbar: p.mbar }.to_operator(nc, nm, &p).unwrap();
    let basis = DampingBasis::new(p, nc, nm).unwrap();
    let d = decompose(&basis, &rho0, &default_label_set(nc, 12)).unwrap();
    let l = build_liouvillian(&p, nc, nm, Part::Full).unwrap();
    let times = [0.0, 3.0, 30.0];
    let direct = oracle::direct_evolve(&l, &rho0, &times, DirectMethod::Adaptive { rtol: 1e-10, atol: 1e-12 }).unwrap();
    for (t, rho) in times.iter().zip(&direct) {
        let dist = linalg::trace_distance(&d.evolve(*t), rho).unwrap();
        assert!(dist <= 1e-6, "t={t}: {dist:.2e}");
    }
}
