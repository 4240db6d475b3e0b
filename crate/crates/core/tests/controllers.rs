use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pde_consensus::control::{evaluate, ControllerKind, ControllerSpec};
use pde_consensus::pde::ControlInput;
use pde_consensus::{CommGraph, EnsembleState, SpatialGrid};

const NODES: usize = 21;

fn grid() -> SpatialGrid {
    SpatialGrid::new(1.0, NODES - 1).unwrap()
}

fn spec(kind: ControllerKind) -> ControllerSpec {
    ControllerSpec::new(kind)
        .with_alpha(0.5)
        .with_beta(1.1)
        .with_dbar(2.0)
}

fn controls(kind: ControllerKind, state: &EnsembleState, g: &CommGraph) -> Vec<Vec<f64>> {
    match evaluate(&spec(kind), state, g, &grid()) {
        ControlInput::Distributed(u) => u,
        other => panic!("{kind:?} gave {other:?}"),
    }
}

#[allow(clippy::needless_range_loop)]
fn symmetric_weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    let mut a = vec![vec![0.0; n]; n];
    for i in 1..n {
        let j = rng.gen_range(0..i);
        let w = rng.gen_range(0.2..3.0);
        a[i][j] = w;
        a[j][i] = w;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if a[i][j] == 0.0 && rng.gen_bool(0.3) {
                let w = rng.gen_range(0.2..3.0);
                a[i][j] = w;
                a[j][i] = w;
            }
        }
    }
    a
}

fn fields(rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| {
            let mut f: Vec<f64> = (0..NODES).map(|_| rng.gen_range(-3.0..3.0)).collect();
            f[0] = 0.0;
            f[NODES - 1] = 0.0;
            f
        })
        .collect()
}

fn scale(u: &[Vec<f64>]) -> f64 {
    u.iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()))
}

const NONLINEAR: [ControllerKind; 4] = [
    ControllerKind::FtcDisturbed,
    ControllerKind::FxcDisturbed,
    ControllerKind::FtcNominal,
    ControllerKind::FxcNominal,
];

proptest! {
    #![proptest_config(ProptestConfig { cases: 256, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn undirected_controls_sum_to_zero(n in 2usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = CommGraph::from_rows(&symmetric_weights(&mut rng, n)).unwrap();
        let s = EnsembleState::new(0.0, fields(&mut rng, n));
        for kind in NONLINEAR.into_iter().chain([ControllerKind::LinearDistributed]) {
            let u = controls(kind, &s, &g);
            let tol = 1e-9 * scale(&u);
            for j in 0..NODES {
                let total: f64 = u.iter().map(|ui| ui[j]).sum();
                prop_assert!(total.abs() <= tol, "{kind:?} node {j}: {total}");
            }
        }
    }

    #[test]
    fn balanced_directed_controls_sum_to_zero_with_weights(n in 2usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let sym = symmetric_weights(&mut rng, n);
        let omega: Vec<f64> = (0..n).map(|_| rng.gen_range(0.2..5.0)).collect();
        // ω_i a_ij = s_ij is symmetric by construction.
        let a: Vec<Vec<f64>> = (0..n).map(|i| sym[i].iter().map(|s| s / omega[i]).collect()).collect();
        let g = CommGraph::from_rows(&a).unwrap();
        let s = EnsembleState::new(0.0, fields(&mut rng, n));
        for kind in [ControllerKind::FtcNominal, ControllerKind::FxcNominal, ControllerKind::LinearDistributed] {
            let u = controls(kind, &s, &g);
            let tol = 1e-9 * scale(&u) * omega.iter().sum::<f64>();
            for j in 0..NODES {
                let total: f64 = u.iter().zip(&omega).map(|(ui, w)| w * ui[j]).sum();
                prop_assert!(total.abs() <= tol, "{kind:?} node {j}: {total}");
            }
        }
    }

    #[test]
    fn common_offset_leaves_controls_unchanged(n in 2usize..=5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = CommGraph::from_rows(&symmetric_weights(&mut rng, n)).unwrap();
        let base = fields(&mut rng, n);
        let shift = fields(&mut rng, 1).remove(0);
        let shifted: Vec<Vec<f64>> = base
            .iter()
            .map(|f| f.iter().zip(&shift).map(|(a, b)| a + b).collect())
            .collect();
        let s0 = EnsembleState::new(0.0, base);
        let s1 = EnsembleState::new(0.0, shifted);
        for kind in NONLINEAR {
            let (u0, u1) = (controls(kind, &s0, &g), controls(kind, &s1, &g));
            let tol = 1e-8 * scale(&u0);
            for (a, b) in u0.iter().flatten().zip(u1.iter().flatten()) {
                prop_assert!((a - b).abs() <= tol, "{kind:?}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn fixed_time_term_adds_push_for_two_agents(seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = CommGraph::from_rows(&[vec![0.0, 1.5], vec![1.5, 0.0]]).unwrap();
        let s = EnsembleState::new(0.0, fields(&mut rng, 2));
        for (ftc, fxc) in [
            (ControllerKind::FtcNominal, ControllerKind::FxcNominal),
            (ControllerKind::FtcDisturbed, ControllerKind::FxcDisturbed),
        ] {
            let (a, b) = (controls(ftc, &s, &g), controls(fxc, &s, &g));
            for (x, y) in a.iter().flatten().zip(b.iter().flatten()) {
                prop_assert!(y.abs() >= x.abs() - 1e-12, "{fxc:?}: |{y}| < |{x}|");
                prop_assert!(x * y >= 0.0);
            }
        }
    }
}

#[test]
fn isolated_agent_gets_no_control() {
    let g = CommGraph::from_rows(&[
        vec![0.0, 1.0, 0.0],
        vec![1.0, 0.0, 0.0],
        vec![0.0, 0.0, 0.0],
    ])
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = EnsembleState::new(0.0, fields(&mut rng, 3));
    for kind in NONLINEAR
        .into_iter()
        .chain([ControllerKind::LinearDistributed])
    {
        let u = controls(kind, &s, &g);
        assert!(u[2].iter().all(|v| *v == 0.0), "{kind:?}");
        assert!(u[0].iter().any(|v| *v != 0.0), "{kind:?}");
    }
}

#[test]
fn consensus_state_gets_no_control() {
    let g = CommGraph::from_rows(&[
        vec![0.0, 1.0, 2.0],
        vec![1.0, 0.0, 1.0],
        vec![2.0, 1.0, 0.0],
    ])
    .unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let f = fields(&mut rng, 1).remove(0);
    let s = EnsembleState::new(0.0, vec![f.clone(), f.clone(), f]);
    for kind in NONLINEAR
        .into_iter()
        .chain([ControllerKind::LinearDistributed])
    {
        assert!(
            controls(kind, &s, &g).iter().flatten().all(|v| *v == 0.0),
            "{kind:?}"
        );
    }
}
