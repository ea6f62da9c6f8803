//! The Fano decoder against an explicit-tree reference that recomputes every
//! node metric from scratch and walks the textbook flowchart literally.

mod common;

use common::{NodeCounter, Tree};
use pac_core::fano::{decode, decode_observed, revisit_bound, FanoConfig, VisitObserver};
use pac_core::harness::{make_frame, NoiseModel};
use pac_core::rate_profile::{conn_poly_from_octal, CodeSpec};
use pac_core::BiasSchedule;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[derive(Debug, Clone)]
struct Move {
    path: Vec<u8>,
    gamma: f64,
    threshold: f64,
    rewalk: bool,
}

/// Textbook Fano search. Forward moves that merely retrace a chain of
/// single-child nodes after a threshold drop are flagged `rewalk`.
fn reference(tree: &Tree, delta: f64) -> (Vec<u8>, Vec<Move>) {
    let n = tree.spec.n_code;
    let mut path: Vec<u8> = Vec::new();
    let mut gammas = vec![0.0];
    // rank of the branch taken at each depth
    let mut ranks: Vec<usize> = Vec::new();
    let mut k: i64 = 0;
    let mut rank = 0usize;
    let mut moves = Vec::new();
    let mut rewalk_left = 0usize;
    let t = |k: i64| k as f64 * delta;
    while path.len() < n {
        let kids = tree.children(&path);
        let (child, g) = kids[rank].clone();
        if g >= t(k) {
            moves.push(Move {
                path: child.clone(),
                gamma: g,
                threshold: t(k),
                rewalk: rewalk_left > 0,
            });
            rewalk_left = rewalk_left.saturating_sub(1);
            let parent = *gammas.last().unwrap();
            path = child;
            gammas.push(g);
            ranks.push(rank);
            if parent < t(k) + delta {
                while t(k + 1) <= g {
                    k += 1;
                }
            }
            rank = 0;
            continue;
        }
        assert_eq!(rewalk_left, 0, "a retraced chain must go through");
        let start = path.len();
        let mut only_single = true;
        loop {
            let d = path.len();
            if d == 0 || gammas[d - 1] < t(k) {
                k -= 1;
                rank = 0;
                if only_single {
                    rewalk_left = start - d;
                }
                break;
            }
            path.pop();
            gammas.pop();
            let r = ranks.pop().unwrap();
            if tree.children(&path).len() == 2 {
                only_single = false;
                if r == 0 {
                    rank = 1;
                    break;
                }
            }
        }
    }
    (path, moves)
}

#[derive(Default)]
struct Recorder {
    moves: Vec<(Vec<u8>, f64, f64)>,
}

impl VisitObserver for Recorder {
    fn on_visit(&mut self, path: &[u8], gamma: f64, threshold: f64) {
        self.moves.push((path.to_vec(), gamma, threshold));
    }
}

fn random_case(rng: &mut ChaCha8Rng, n: usize) -> (CodeSpec, Vec<f64>, Vec<f64>, f64) {
    let k = rng.random_range(1..n);
    let spec = CodeSpec::reed_muller(n, k, None).unwrap();
    let spec = if rng.random_bool(0.5) {
        CodeSpec::new(n, spec.info_set, conn_poly_from_octal("3211").unwrap()).unwrap()
    } else {
        spec
    };
    let sigma = rng.random_range(0.8..1.6);
    let llrs: Vec<f64> = (0..n)
        .map(|_| {
            let z: f64 = rng.sample(rand_distr::StandardNormal);
            let y = 1.0 + sigma * z;
            2.0 * y / (sigma * sigma)
        })
        .collect();
    let bias: Vec<f64> = match rng.random_range(0..3) {
        0 => vec![0.0; n],
        1 => vec![rng.random_range(0.0..1.0); n],
        _ => (0..n).map(|_| rng.random_range(0.0..1.5)).collect(),
    };
    let delta = [0.5, 1.0, 2.0, 3.5][rng.random_range(0..4)];
    (spec, llrs, bias, delta)
}

#[test]
fn matches_reference_flowchart_on_random_trees() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut backups = 0;
    let mut rewalks = 0;
    for _ in 0..1000 {
        let n = [4, 8, 16][rng.random_range(0..3)];
        let (spec, llrs, bias, delta) = random_case(&mut rng, n);
        let tree = Tree {
            llrs: &llrs,
            spec: &spec,
            bias: &bias,
        };
        let (ref_path, ref_moves) = reference(&tree, delta);

        let sched = BiasSchedule {
            b: bias.clone(),
            ..BiasSchedule::zeros(n)
        };
        let cfg = FanoConfig::new(delta, None, sched);
        let mut rec = Recorder::default();
        let out = decode_observed(&llrs, &spec, &cfg, &mut rec).unwrap();

        assert_eq!(out.v_hat, ref_path);
        let kept: Vec<&Move> = ref_moves.iter().filter(|m| !m.rewalk).collect();
        rewalks += ref_moves.len() - kept.len();
        assert_eq!(rec.moves.len(), kept.len());
        for (got, want) in rec.moves.iter().zip(&kept) {
            assert_eq!(got.0, want.path);
            assert!((got.1 - want.gamma).abs() < 1e-9);
            assert!((got.2 - want.threshold).abs() < 1e-9);
        }
        assert_eq!(out.visits_total as usize, kept.len());
        assert_eq!(out.visits_by_depth.iter().sum::<u64>(), out.visits_total);
        assert!((out.final_metric - tree.gamma(&ref_path)).abs() < 1e-9);
        if kept.len() > n {
            backups += 1;
        }
    }
    assert!(backups > 100, "too few searches with back-ups ({backups})");
    assert!(rewalks > 0, "no retraced chains were exercised");
}

#[test]
fn hand_stepped_single_backup() {
    // (8,4) code with information bits {4,6,7,8}, no precoding, zero bias, delta = 1.
    let spec = CodeSpec::new(8, vec![4, 6, 7, 8], vec![1]).unwrap();
    let llrs = [-2.1, -0.4, -0.1, -2.6, 6.2, -3.3, 1.4, 0.8];
    let tree = Tree {
        llrs: &llrs,
        spec: &spec,
        bias: &[0.0; 8],
    };
    let g = |p: &[u8]| tree.gamma(p);
    // Metrics that drive the walk.
    assert!(g(&[0]) < 0.0 && g(&[0]) > -1.0);
    assert!(g(&[0, 0]) < 0.0 && g(&[0, 0]) > -1.0);
    assert!(g(&[0, 0, 0]) > 0.0 && g(&[0, 0, 0]) < 1.0);
    assert!(g(&[0, 0, 0, 1]) > 0.0 && g(&[0, 0, 0, 1]) < 1.0);
    assert!(g(&[0, 0, 0, 0]) < -1.0);
    assert!(g(&[0, 0, 0, 1, 0]) < 0.0 && g(&[0, 0, 0, 1, 0]) > -1.0);
    assert!(g(&[0, 0, 0, 1, 0, 1]) > g(&[0, 0, 0, 1, 0, 0]));
    assert!(g(&[0, 0, 0, 1, 0, 1]) > 0.0 && g(&[0, 0, 0, 1, 0, 1]) < 1.0);
    assert!(g(&[0, 0, 0, 1, 0, 1, 1]) > g(&[0, 0, 0, 1, 0, 1, 0]));
    assert!(g(&[0, 0, 0, 1, 0, 1, 1]) > 1.0 && g(&[0, 0, 0, 1, 0, 1, 1]) < 2.0);
    assert!(g(&[0, 0, 0, 1, 0, 1, 1, 0]) > g(&[0, 0, 0, 1, 0, 1, 1, 1]));
    assert!(g(&[0, 0, 0, 1, 0, 1, 1, 0]) > 1.0);

    // T = 0: the root's only child is below T, T -> -1.
    // Forward to depths 1, 2 (parents below T + 1 = 0 but metrics round down to -1),
    // depth 3 (tighten to 0), depth 4 via bit 1 (stays 0).
    // Depth 5 is below 0: back to depth 3 (0.1 >= 0), second branch at -2.5 fails,
    // depth 2 is below 0: T -> -1 and forward again to [0,0,0,1] (a revisit, no
    // tightening since its parent clears T + 1), then on to the end, tightening
    // to 0 at depth 6 and to 1 at depth 7.
    let want: Vec<(Vec<u8>, f64)> = vec![
        (vec![0], -1.0),
        (vec![0, 0], -1.0),
        (vec![0, 0, 0], -1.0),
        (vec![0, 0, 0, 1], 0.0),
        (vec![0, 0, 0, 1], -1.0),
        (vec![0, 0, 0, 1, 0], -1.0),
        (vec![0, 0, 0, 1, 0, 1], -1.0),
        (vec![0, 0, 0, 1, 0, 1, 1], 0.0),
        (vec![0, 0, 0, 1, 0, 1, 1, 0], 1.0),
    ];
    let cfg = FanoConfig::new(1.0, None, BiasSchedule::zeros(8));
    let mut rec = Recorder::default();
    let out = decode_observed(&llrs, &spec, &cfg, &mut rec).unwrap();
    let got: Vec<(Vec<u8>, f64)> = rec.moves.iter().map(|m| (m.0.clone(), m.2)).collect();
    assert_eq!(got, want);
    assert_eq!(out.visits_total, 9);
    assert_eq!(out.visits_by_depth, vec![1, 1, 1, 2, 1, 1, 1, 1]);
    assert_eq!(out.v_hat, vec![0, 0, 0, 1, 0, 1, 1, 0]);
    assert!((out.final_metric - g(&out.v_hat)).abs() < 1e-12);
}

#[test]
fn revisits_respect_bound() {
    let spec = CodeSpec::reed_muller(16, 8, None).unwrap();
    let mut revisited = 0u64;
    for trial in 0..10_000u64 {
        let mut rng = ChaCha8Rng::seed_from_u64(trial);
        let sigma2 = rng.random_range(0.4..1.6);
        let delta = [0.5, 1.0, 2.0, 4.0][(trial % 4) as usize];
        let b = rng.random_range(0.0..1.2);
        let frame = make_frame(&spec, NoiseModel::Awgn { sigma2 }, 77, trial).unwrap();
        let sched = BiasSchedule {
            b: vec![b; 16],
            ..BiasSchedule::zeros(16)
        };
        let cfg = FanoConfig::new(delta, None, sched);
        let mut counter = NodeCounter::default();
        decode_observed(&frame.llrs, &spec, &cfg, &mut counter).unwrap();

        let tree = Tree {
            llrs: &frame.llrs,
            spec: &spec,
            bias: &cfg.bias.b,
        };
        let gamma_min = (0..=16)
            .map(|d| tree.gamma(&frame.v[..d]))
            .fold(f64::INFINITY, f64::min);
        for (path, &(count, gamma)) in &counter.entries {
            let bound = revisit_bound(gamma, gamma_min, delta);
            assert!(
                count <= bound,
                "node {path:?} entered {count} times, bound {bound}"
            );
            revisited += u64::from(count > 1);
        }
    }
    assert!(
        revisited > 100,
        "instrumentation saw too few revisits ({revisited})"
    );
}

#[test]
fn determinism_and_unit_anv_when_noiseless() {
    let spec = CodeSpec::reed_muller(128, 64, None).unwrap();
    for trial in 0..20 {
        let frame = make_frame(&spec, NoiseModel::Noiseless, 3, trial).unwrap();
        let sched = BiasSchedule {
            b: vec![0.9; 128],
            ..BiasSchedule::zeros(128)
        };
        let cfg = FanoConfig::new(2.0, None, sched);
        let a = decode(&frame.llrs, &spec, &cfg).unwrap();
        let b = decode(&frame.llrs, &spec, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.v_hat, frame.v);
        assert_eq!(a.visits_total, 128);
    }
}
