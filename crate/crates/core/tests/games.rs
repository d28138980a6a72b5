use spreadbench::analysis::{equivalence_constant, Reference};
use spreadbench::blockseq::{subsequence_tree, BlockSequence};
use spreadbench::combinatorics::FiniteSet;
use spreadbench::games::{
    play, stabilized_constant, Move, SampleParams, SubspacePlayer, SubspaceStrategy, VectorStrategy,
};
use spreadbench::spaces::{make_example_space, Space, SpaceSpec, SparseVector};
use spreadbench::Error;

fn lp(p: f64) -> Space {
    Space::new(SpaceSpec::lp(p)).unwrap()
}

#[test]
fn transcript_respects_cutoffs_and_supports() {
    let space = Space::new(make_example_space(2.0, &[1.0, 1.5]).unwrap()).unwrap();
    let s1 = SubspaceStrategy::PastSupport { start: 2, lead: 3 };
    let s2 = VectorStrategy::Combination { coefficients: vec![1.0, -0.5] };
    let t = play(&space, &s1, &s2, 5).unwrap();
    assert_eq!(t.moves.len(), 5);
    let mut prev_top = 0;
    for m in &t.moves {
        let lo = m.vector.min_index().unwrap();
        assert!(lo >= m.cutoff && lo > prev_top);
        assert!((space.norm(&m.vector).unwrap() - 1.0).abs() < 1e-9);
        prev_top = m.vector.max_index().unwrap();
    }
    assert_eq!(t.outcome.len(), 5);
}

struct Zero;

impl SubspacePlayer for Zero {
    fn name(&self) -> String {
        "zero".into()
    }

    fn cutoff(&self, _: &[Move]) -> usize {
        0
    }
}

#[test]
fn invalid_cutoff_is_a_protocol_error() {
    let err = play(&lp(2.0), &Zero, &VectorStrategy::UnitVector, 2).unwrap_err();
    assert!(matches!(err, Error::Protocol { ref player, .. } if player == "zero"));
}

/// Brute force over all successive interval pairs in `[n, n+w)`, each block
/// normalized as a flat indicator, against the `ℓ_2^2` reference.
fn brute_pairs(space: &Space, cutoff: usize, window: usize, step: f64) -> f64 {
    let hi = cutoff + window - 1;
    let mut worst = 1.0f64;
    for a in cutoff..=hi {
        for b in a..=hi {
            for c in b + 1..=hi {
                for d in c..=hi {
                    let blocks = [FiniteSet::interval(a, b).unwrap(), FiniteSet::interval(c, d).unwrap()];
                    let vs: Vec<SparseVector> = blocks
                        .iter()
                        .map(|s| {
                            let v = SparseVector::indicator(s);
                            let n = space.norm(&v).unwrap();
                            v.scale(1.0 / n)
                        })
                        .collect();
                    let r = equivalence_constant(space, &vs, Reference::Lp { p: 2.0, n: 2 }, step).unwrap();
                    worst = worst.max(r.constant);
                }
            }
        }
    }
    worst
}

#[test]
fn stabilized_constant_matches_brute_force_on_small_windows() {
    let params = SampleParams { window: 5, net_step: 0.5 };
    for space in [lp(1.0), lp(2.0), Space::new(make_example_space(2.0, &[1.0, 1.5]).unwrap()).unwrap()] {
        for cutoff in [1, 3, 7] {
            let got = stabilized_constant(&space, 2.0, 2, cutoff, params).unwrap().constant;
            let want = brute_pairs(&space, cutoff, params.window, params.net_step);
            assert!((got - want).abs() < 1e-12, "{:?} at N={cutoff}: {got} vs {want}", space.spec());
        }
    }
}

#[test]
fn subsequence_tree_branches_are_subsequences() {
    let seq = BlockSequence::unit_basis(1, 40);
    let tree = subsequence_tree(seq.vectors(), 3, 4).unwrap();
    for leaf in tree.leaves() {
        let b = spreadbench::blockseq::branch(&tree, &leaf).unwrap();
        assert_eq!(b.len(), 3);
        let idx: Vec<usize> = b.vectors().iter().map(|v| v.min_index().unwrap()).collect();
        assert!(idx.windows(2).all(|w| w[0] < w[1]));
    }
}
