//! Block sequences, NCCB sequences, and finite block trees.
//!
//! Paper-infinite objects (rows, trees, branches) carry explicit `depth` and
//! `width` truncations, and trees record whether a row ran out before the
//! requested width could be filled.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::combinatorics::{Blocking, FiniteSet};
use crate::error::{Error, Result};
use crate::spaces::{Space, SparseVector};

/// Nonzero vectors with successively increasing supports.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SparseVector>", into = "Vec<SparseVector>")]
pub struct BlockSequence(Vec<SparseVector>);

impl BlockSequence {
    pub fn new(vectors: Vec<SparseVector>) -> Result<Self> {
        if let Some(i) = vectors.iter().position(SparseVector::is_zero) {
            return Err(Error::input(format!("block vector {} is zero", i + 1)));
        }
        for (i, w) in vectors.windows(2).enumerate() {
            if w[0].max_index() >= w[1].min_index() {
                return Err(Error::input(format!("supports of vectors {} and {} are not successive", i + 1, i + 2)));
            }
        }
        Ok(BlockSequence(vectors))
    }

    /// The unit vectors `e_start, ..., e_{start+len-1}`.
    pub fn unit_basis(start: usize, len: usize) -> Self {
        BlockSequence((start..start + len).map(SparseVector::unit).collect())
    }

    /// `s_k = e_1 + ... + e_k` for `k = 1..=len`. These are not blocks of
    /// the unit vector basis, so the sequence is returned as plain vectors.
    pub fn staircase(len: usize) -> Vec<SparseVector> {
        (1..=len).map(|k| SparseVector::indicator(&FiniteSet::interval(1, k).expect("k >= 1"))).collect()
    }

    pub fn vectors(&self) -> &[SparseVector] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The `i`-th vector, 1-based.
    pub fn get(&self, i: usize) -> Option<&SparseVector> {
        i.checked_sub(1).and_then(|i| self.0.get(i))
    }

    pub fn supports(&self) -> Blocking {
        let sets =
            self.0.iter().map(|v| FiniteSet::from_sorted(v.support().collect()).expect("nonzero vector")).collect();
        Blocking::new(sets).expect("block sequence supports are successive")
    }

    /// The vectors at the given strictly increasing 1-based positions.
    pub fn subsequence(&self, ks: &[usize]) -> Result<BlockSequence> {
        check_positions(ks, self.len())?;
        Ok(BlockSequence(ks.iter().map(|&k| self.0[k - 1].clone()).collect()))
    }
}

impl TryFrom<Vec<SparseVector>> for BlockSequence {
    type Error = Error;

    fn try_from(v: Vec<SparseVector>) -> Result<Self> {
        BlockSequence::new(v)
    }
}

impl From<BlockSequence> for Vec<SparseVector> {
    fn from(s: BlockSequence) -> Self {
        s.0
    }
}

fn check_positions(ks: &[usize], len: usize) -> Result<()> {
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("positions must be strictly increasing"));
    }
    match ks.first() {
        Some(0) => Err(Error::input("positions are 1-based")),
        _ if ks.last().is_some_and(|&k| k > len) => {
            Err(Error::input(format!("position {} beyond sequence length {len}", ks[ks.len() - 1])))
        }
        _ => Ok(()),
    }
}

/// `y_i = Σ_{k ∈ E_i} e_k / ‖Σ_{k ∈ E_i} e_k‖`.
pub fn nccb_from_blocking(space: &Space, blocking: &Blocking) -> Result<BlockSequence> {
    let vectors = blocking
        .blocks()
        .iter()
        .map(|block| normalized(space, SparseVector::indicator(block)))
        .collect::<Result<Vec<_>>>()?;
    BlockSequence::new(vectors)
}

/// NCCB sequence of an arbitrary base sequence: `z_i = Σ_{k ∈ E_i} x_k`
/// normalized, with `E` indexing 1-based positions of `base`.
pub fn nccb_of_sequence(space: &Space, base: &[SparseVector], blocking: &Blocking) -> Result<Vec<SparseVector>> {
    blocking
        .blocks()
        .iter()
        .map(|block| {
            let mut sum = SparseVector::zero();
            for &k in block.elements() {
                let x = base
                    .get(k - 1)
                    .ok_or_else(|| Error::input(format!("position {k} beyond base length {}", base.len())))?;
                sum.add_scaled(1.0, x);
            }
            normalized(space, sum)
        })
        .collect()
}

/// The unnormalized block sums `Σ_{l ∈ P_k} e_l`.
pub fn block_sums(blocking: &Blocking) -> Vec<SparseVector> {
    blocking.blocks().iter().map(SparseVector::indicator).collect()
}

pub(crate) fn normalized(space: &Space, v: SparseVector) -> Result<SparseVector> {
    let n = space.norm(&v)?;
    if n == 0.0 {
        return Err(Error::input("cannot normalize a zero-norm vector"));
    }
    Ok(v.scale(1.0 / n))
}

/// `Σ a_i y_{k_i}` with 1-based strictly increasing `ks`.
pub fn combine(seq: &[SparseVector], a: &[f64], ks: &[usize]) -> Result<SparseVector> {
    if a.len() != ks.len() {
        return Err(Error::input(format!("{} coefficients for {} positions", a.len(), ks.len())));
    }
    check_positions(ks, seq.len())?;
    let mut out = SparseVector::zero();
    for (&c, &k) in a.iter().zip(ks) {
        out.add_scaled(c, &seq[k - 1]);
    }
    Ok(out)
}

/// A finite truncation of a two-dimensional array of block sequences.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockArray {
    pub rows: Vec<BlockSequence>,
}

/// `m` rows of `y`, then `m` rows of `z`, repeating, for `rows` rows.
pub fn interleave_array(y: &BlockSequence, z: &BlockSequence, m: usize, rows: usize) -> Result<BlockArray> {
    if m == 0 {
        return Err(Error::input("interleave period m must be >= 1"));
    }
    let rows = (0..rows).map(|n| if (n / m).is_multiple_of(2) { y.clone() } else { z.clone() }).collect();
    Ok(BlockArray { rows })
}

/// Rows `y¹, y², y², y³, y³, y³, ...`: the `j`-th sequence repeated `j`
/// times, truncated to `rows` rows.
pub fn repeated_rows_array(seqs: &[BlockSequence], rows: usize) -> Result<BlockArray> {
    if seqs.is_empty() {
        return Err(Error::input("need at least one row sequence"));
    }
    let mut out = Vec::with_capacity(rows);
    'fill: for (j, s) in seqs.iter().enumerate() {
        for _ in 0..=j {
            if out.len() == rows {
                break 'fill;
            }
            out.push(s.clone());
        }
    }
    if out.len() < rows {
        return Err(Error::input(format!("only {} rows available, {rows} requested", out.len())));
    }
    Ok(BlockArray { rows: out })
}

/// A finite truncation of a countably splitting tree: nodes keyed by their
/// index set `A`; the root (empty set) is implicit.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockTree {
    pub depth: usize,
    pub width: usize,
    /// True when some node received fewer than `width` successors.
    pub truncated: bool,
    #[serde(with = "bfs_nodes")]
    nodes: BTreeMap<Vec<usize>, SparseVector>,
}

/// Nodes serialize as `(index set, vector)` pairs in breadth-first order.
mod bfs_nodes {
    use std::collections::BTreeMap;

    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use crate::spaces::SparseVector;

    pub fn serialize<S: Serializer>(nodes: &BTreeMap<Vec<usize>, SparseVector>, s: S) -> Result<S::Ok, S::Error> {
        let mut list: Vec<(&Vec<usize>, &SparseVector)> = nodes.iter().collect();
        list.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        list.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<Vec<usize>, SparseVector>, D::Error> {
        let list = Vec::<(Vec<usize>, SparseVector)>::deserialize(d)?;
        Ok(list.into_iter().collect())
    }
}

impl BlockTree {
    pub fn node(&self, a: &[usize]) -> Option<&SparseVector> {
        self.nodes.get(a)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Successors of `a` in key order: the sequence of nodes below `a`.
    pub fn successors(&self, a: &[usize]) -> Vec<(Vec<usize>, &SparseVector)> {
        let base = a.last().copied().unwrap_or(0);
        (1..=self.width)
            .map_while(|k| {
                let mut key = a.to_vec();
                key.push(base + k);
                self.nodes.get(&key).map(|v| (key, v))
            })
            .collect()
    }

    /// All nodes in breadth-first order.
    pub fn nodes_bfs(&self) -> Vec<(&Vec<usize>, &SparseVector)> {
        let mut list: Vec<_> = self.nodes.iter().collect();
        list.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(b.0)));
        list
    }

    /// Every root-to-leaf path of maximal depth, as index-set chains.
    pub fn leaves(&self) -> Vec<Vec<usize>> {
        self.nodes.keys().filter(|k| k.len() == self.depth).cloned().collect()
    }
}

/// The tree of partial subsequences, `x_A = x_{max A}`, with successors of
/// `A` keyed `A ∪ {max A + k}` for `k = 1..=width`.
pub fn subsequence_tree(seq: &[SparseVector], depth: usize, width: usize) -> Result<BlockTree> {
    if depth == 0 || width == 0 {
        return Err(Error::input("depth and width must be >= 1"));
    }
    if seq.len() < depth * width {
        return Err(Error::input(format!(
            "sequence of length {} too short for depth {depth} and width {width} (needs {})",
            seq.len(),
            depth * width
        )));
    }
    let mut nodes = BTreeMap::new();
    let mut frontier: Vec<Vec<usize>> = vec![Vec::new()];
    for _ in 0..depth {
        let mut next = Vec::with_capacity(frontier.len() * width);
        for a in &frontier {
            let base = a.last().copied().unwrap_or(0);
            for k in 1..=width {
                let mut key = a.clone();
                key.push(base + k);
                nodes.insert(key.clone(), seq[base + k - 1].clone());
                next.push(key);
            }
        }
        frontier = next;
    }
    Ok(BlockTree { depth, width, truncated: false, nodes })
}

/// The block tree based on an array: level-`n` nodes come from row `n`, and
/// the nodes below `x_A` are the first `width` vectors of the next row whose
/// supports start past `supp(x_A)`.
pub fn tree_from_array(arr: &BlockArray, depth: usize, width: usize) -> Result<BlockTree> {
    if depth == 0 || width == 0 {
        return Err(Error::input("depth and width must be >= 1"));
    }
    if arr.rows.len() < depth {
        return Err(Error::input(format!("array has {} rows, depth {depth} requested", arr.rows.len())));
    }
    let mut nodes = BTreeMap::new();
    let mut truncated = false;
    // (key, support max of x_A)
    let mut frontier: Vec<(Vec<usize>, usize)> = vec![(Vec::new(), 0)];
    for row in arr.rows.iter().take(depth) {
        let mut next = Vec::new();
        for (a, top) in &frontier {
            let base = a.last().copied().unwrap_or(0);
            // least m with supp(y_{m+1}) > supp(x_A)
            let m = row.vectors().iter().position(|v| v.min_index().is_some_and(|lo| lo > *top)).unwrap_or(row.len());
            for k in 1..=width {
                let Some(v) = row.vectors().get(m + k - 1) else {
                    truncated = true;
                    break;
                };
                let mut key = a.clone();
                key.push(base + k);
                nodes.insert(key.clone(), v.clone());
                next.push((key, v.max_index().unwrap_or(0)));
            }
        }
        frontier = next;
    }
    Ok(BlockTree { depth, width, truncated, nodes })
}

/// The branch `(x_{{k_1}}, x_{{k_1,k_2}}, ...)` along strictly increasing `ks`.
pub fn branch(tree: &BlockTree, ks: &[usize]) -> Result<BlockSequence> {
    if ks.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::input("branch indices must be strictly increasing"));
    }
    let vectors = (1..=ks.len())
        .map(|n| tree.node(&ks[..n]).cloned().ok_or_else(|| Error::input(format!("no node at {:?}", &ks[..n]))))
        .collect::<Result<Vec<_>>>()?;
    BlockSequence::new(vectors)
}

/// The leftmost branch `ks = (1, 2, ..., depth)` clipped to what exists.
pub fn leftmost_branch(tree: &BlockTree) -> Result<BlockSequence> {
    let mut ks = Vec::new();
    while ks.len() < tree.depth {
        let succ = tree.successors(&ks);
        let Some((key, _)) = succ.first() else { break };
        ks = key.clone();
    }
    branch(tree, &ks)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spaces::{Outer, SpaceSpec};
    use proptest::prelude::*;

    fn space(spec: SpaceSpec) -> Space {
        Space::new(spec).unwrap()
    }

    fn odd_units(len: usize) -> BlockSequence {
        BlockSequence::new((0..len).map(|i| SparseVector::unit(2 * i + 1)).collect()).unwrap()
    }

    fn even_units(len: usize) -> BlockSequence {
        BlockSequence::new((0..len).map(|i| SparseVector::unit(2 * i + 2)).collect()).unwrap()
    }

    #[test]
    fn block_sequence_invariants() {
        assert!(BlockSequence::new(vec![SparseVector::unit(2), SparseVector::unit(1)]).is_err());
        assert!(BlockSequence::new(vec![SparseVector::zero()]).is_err());
        let s = BlockSequence::unit_basis(3, 4);
        assert_eq!(s.supports().to_string(), "3|4|5|6");
    }

    #[test]
    fn nccb_examples() {
        let l2 = space(SpaceSpec::lp(2.0));
        let y = nccb_from_blocking(&l2, &"1,2".parse().unwrap()).unwrap();
        let r = 1.0 / 2f64.sqrt();
        assert_eq!(y.vectors()[0], SparseVector::new([(1, r), (2, r)]).unwrap());

        let l1 = space(SpaceSpec::lp(1.0));
        let y = nccb_from_blocking(&l1, &"1|2,3".parse().unwrap()).unwrap();
        assert_eq!(y.vectors()[1], SparseVector::new([(2, 0.5), (3, 0.5)]).unwrap());

        // a block inside segment 2 (ℓ_{1.5}) is divided by |E|^{1/1.5}
        let sum = space(SpaceSpec::LpSum { p: 2.0, ps: vec![1.0, 1.5], ns: vec![2, 17] });
        let y = nccb_from_blocking(&sum, &"4,5,6,7".parse().unwrap()).unwrap();
        let expected = 1.0 / 4f64.powf(1.0 / 1.5);
        assert!((y.vectors()[0].get(5) - expected).abs() < 1e-15);
        assert!((sum.norm(&y.vectors()[0]).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn combine_examples() {
        let s = BlockSequence::unit_basis(1, 4);
        assert_eq!(combine(s.vectors(), &[1.0], &[1]).unwrap(), SparseVector::unit(1));
        assert!(combine(s.vectors(), &[0.0, 0.0], &[2, 3]).unwrap().is_zero());
        assert_eq!(
            combine(s.vectors(), &[1.0, 1.0], &[1, 4]).unwrap(),
            SparseVector::new([(1, 1.0), (4, 1.0)]).unwrap()
        );
        assert!(combine(s.vectors(), &[1.0, 1.0], &[2, 2]).is_err());
        assert!(combine(s.vectors(), &[1.0], &[5]).is_err());
        assert!(combine(s.vectors(), &[1.0], &[1, 2]).is_err());
    }

    #[test]
    fn subsequence_tree_examples() {
        let seq = BlockSequence::unit_basis(1, 12);
        let tree = subsequence_tree(seq.vectors(), 3, 4).unwrap();
        let first: Vec<_> = tree.successors(&[]).into_iter().map(|(_, v)| v.clone()).collect();
        assert_eq!(first, seq.vectors()[..4].to_vec());
        assert_eq!(tree.node(&[2, 5]), Some(&seq.vectors()[4]));
        assert_eq!(branch(&tree, &[1, 2, 3]).unwrap().vectors(), &seq.vectors()[..3]);
        assert!(branch(&tree, &[1, 9]).is_err());
        assert!(subsequence_tree(seq.vectors(), 4, 4).is_err());
    }

    #[test]
    fn constant_array_matches_subsequence_tree() {
        let seq = BlockSequence::unit_basis(1, 40);
        let arr = BlockArray { rows: vec![seq.clone(); 4] };
        let from_array = tree_from_array(&arr, 4, 3).unwrap();
        let direct = subsequence_tree(seq.vectors(), 4, 3).unwrap();
        assert_eq!(from_array.nodes, direct.nodes);
        assert!(!from_array.truncated);
    }

    #[test]
    fn interleave_array_patterns() {
        let (y, z) = (odd_units(5), even_units(5));
        let arr = interleave_array(&y, &z, 1, 4).unwrap();
        assert_eq!(arr.rows, vec![y.clone(), z.clone(), y.clone(), z.clone()]);
        let arr = interleave_array(&y, &z, 2, 6).unwrap();
        assert_eq!(arr.rows, vec![y.clone(), y.clone(), z.clone(), z.clone(), y.clone(), y.clone()]);
        let arr = interleave_array(&y, &y, 3, 5).unwrap();
        assert!(arr.rows.iter().all(|r| *r == y));
        assert!(interleave_array(&y, &z, 0, 3).is_err());
    }

    #[test]
    fn repeated_rows_pattern() {
        let rows: Vec<_> = (0..4).map(|j| BlockSequence::unit_basis(1 + j, 3)).collect();
        let arr = repeated_rows_array(&rows, 6).unwrap();
        let which: Vec<usize> = arr.rows.iter().map(|r| r.vectors()[0].min_index().unwrap()).collect();
        assert_eq!(which, vec![1, 2, 2, 3, 3, 3]);
        assert!(repeated_rows_array(&rows[..1], 2).is_err());
    }

    #[test]
    fn alternating_rows_alternate_by_level() {
        let (y, z) = (odd_units(30), even_units(30));
        let arr = interleave_array(&y, &z, 1, 4).unwrap();
        let tree = tree_from_array(&arr, 4, 3).unwrap();
        for leaf in tree.leaves() {
            let b = branch(&tree, &leaf).unwrap();
            let parities: Vec<usize> = b.vectors().iter().map(|v| v.min_index().unwrap() % 2).collect();
            assert_eq!(parities, vec![1, 0, 1, 0]);
        }
    }

    #[test]
    fn interleave_branch_follows_row_pattern() {
        let (y, z) = (odd_units(40), even_units(40));
        let arr = interleave_array(&y, &z, 2, 8).unwrap();
        let tree = tree_from_array(&arr, 8, 2).unwrap();
        let b = leftmost_branch(&tree).unwrap();
        let idx: Vec<usize> = b.vectors().iter().map(|v| v.min_index().unwrap()).collect();
        assert_eq!(idx, vec![1, 3, 4, 6, 7, 9, 10, 12]);
    }

    #[test]
    fn truncation_is_flagged() {
        let (y, z) = (odd_units(3), even_units(3));
        let arr = interleave_array(&y, &z, 1, 3).unwrap();
        let tree = tree_from_array(&arr, 3, 3).unwrap();
        assert!(tree.truncated);
    }

    #[test]
    fn tree_serializes_breadth_first() {
        let seq = BlockSequence::unit_basis(1, 4);
        let tree = subsequence_tree(seq.vectors(), 2, 2).unwrap();
        let json = serde_json::to_value(&tree).unwrap();
        let keys: Vec<Vec<usize>> = json["nodes"]
            .as_array()
            .unwrap()
            .iter()
            .map(|pair| serde_json::from_value(pair[0].clone()).unwrap())
            .collect();
        assert_eq!(keys, vec![vec![1], vec![2], vec![1, 2], vec![1, 3], vec![2, 3], vec![2, 4]]);
        let back: BlockTree = serde_json::from_value(json).unwrap();
        assert_eq!(back, tree);
    }

    #[test]
    fn interleave_space_branch_values() {
        let sp = space(SpaceSpec::interleave(SpaceSpec::lp(1.0), SpaceSpec::lp(2.0), Outer::Max));
        let pair = |a: usize, b: usize| {
            sp.norm(&combine(BlockSequence::unit_basis(1, 20).vectors(), &[1.0, 1.0], &[a, b]).unwrap()).unwrap()
        };
        assert!((pair(1, 3) - 2.0).abs() < 1e-12);
        assert!((pair(2, 4) - 2f64.sqrt()).abs() < 1e-12);
        assert!((pair(1, 4) - 1.0).abs() < 1e-12);
    }

    fn arb_blocking(max: usize) -> impl Strategy<Value = Blocking> {
        prop::collection::btree_set(1..=max, 1..=max).prop_flat_map(|set| {
            let elems: Vec<usize> = set.into_iter().collect();
            let n = elems.len();
            prop::collection::vec(any::<bool>(), n).prop_map(move |cuts| {
                let mut blocks = Vec::new();
                let mut cur = vec![elems[0]];
                for i in 1..n {
                    if cuts[i] {
                        blocks.push(FiniteSet::from_sorted(std::mem::take(&mut cur)).unwrap());
                    }
                    cur.push(elems[i]);
                }
                blocks.push(FiniteSet::from_sorted(cur).unwrap());
                Blocking::new(blocks).unwrap()
            })
        })
    }

    proptest! {
        #[test]
        fn nccb_vectors_are_normalized(b in arb_blocking(40), which in 0usize..4) {
            let spec = [
                SpaceSpec::lp(1.3),
                SpaceSpec::C0,
                SpaceSpec::LpSum { p: 2.0, ps: vec![1.0, 1.5, 1.8], ns: vec![2, 5, 40] },
                SpaceSpec::James,
            ][which].clone();
            let sp = space(spec);
            for y in nccb_from_blocking(&sp, &b).unwrap().vectors() {
                prop_assert!((sp.norm(y).unwrap() - 1.0).abs() < 1e-12);
            }
        }

        #[test]
        fn nccb_of_block_sums_collapses(p in arb_blocking(30), seed in any::<u64>(), lp in any::<bool>()) {
            let spec = if lp {
                SpaceSpec::lp(1.7)
            } else {
                SpaceSpec::LpSum { p: 2.0, ps: vec![1.0, 1.5, 1.8], ns: vec![2, 5, 40] }
            };
            let sp = space(spec);
            // a pseudo-random member of ⟨P⟩ given by groups of block positions
            let mut groups: Vec<Vec<usize>> = Vec::new();
            let mut cur = Vec::new();
            for i in 0..p.len() {
                if (seed >> (i % 64)) & 1 == 1 || cur.is_empty() {
                    cur.push(i);
                }
                if (seed >> ((i + 7) % 64)) & 1 == 1 {
                    groups.push(std::mem::take(&mut cur));
                }
            }
            groups.retain(|g| !g.is_empty());
            if !cur.is_empty() {
                groups.push(cur);
            }
            let e = Blocking::new(groups.iter().map(|g| FiniteSet::from_sorted(g.iter().map(|i| i + 1).collect()).unwrap()).collect()).unwrap();
            let via_sums = nccb_of_sequence(&sp, &block_sums(&p), &e).unwrap();
            let merged = nccb_from_blocking(&sp, &p.coarsen(&groups)).unwrap();
            prop_assert_eq!(via_sums.len(), merged.len());
            for (a, b) in via_sums.iter().zip(merged.vectors()) {
                for (i, c) in a.iter() {
                    prop_assert!((c - b.get(i)).abs() < 1e-12);
                }
                prop_assert_eq!(a.nnz(), b.nnz());
            }
        }

        #[test]
        fn tree_branches_are_block_sequences(depth in 1usize..4, width in 1usize..4, m in 1usize..3) {
            let (y, z) = (odd_units(40), even_units(40));
            let arr = interleave_array(&y, &z, m, depth).unwrap();
            let tree = tree_from_array(&arr, depth, width).unwrap();
            for leaf in tree.leaves() {
                prop_assert!(branch(&tree, &leaf).is_ok());
            }
            let sub = subsequence_tree(y.vectors(), depth, width).unwrap();
            for leaf in sub.leaves() {
                let b = branch(&sub, &leaf).unwrap();
                // branches of the subsequence tree are subsequences
                let pos: Vec<usize> = b.vectors().iter().map(|v| v.min_index().unwrap().div_ceil(2)).collect();
                prop_assert_eq!(pos, leaf);
            }
        }
    }
}
