//! Finite sets of naturals, blockings and their coarsenings, and backtracking
//! search for monochromatic structures (finite Ramsey, Hindman and
//! Milliken-Taylor instances).
//!
//! Every search is a depth-first backtracking over candidates in
//! lexicographic order, pruning on the first colour mismatch. A returned
//! witness can always be re-checked with the matching `verify_*` function.

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A nonempty, strictly increasing list of positive naturals.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct FiniteSet(Vec<usize>);

impl FiniteSet {
    pub fn new(mut elements: Vec<usize>) -> Result<Self> {
        elements.sort_unstable();
        elements.dedup();
        Self::from_sorted(elements)
    }

    /// Builds a set from an already strictly increasing list.
    pub fn from_sorted(elements: Vec<usize>) -> Result<Self> {
        if elements.is_empty() {
            return Err(Error::input("finite set must be nonempty"));
        }
        if elements[0] == 0 {
            return Err(Error::input("finite set elements must be >= 1"));
        }
        if elements.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::input("finite set must be strictly increasing"));
        }
        Ok(FiniteSet(elements))
    }

    pub fn singleton(x: usize) -> Result<Self> {
        Self::from_sorted(vec![x])
    }

    /// The interval `{lo, ..., hi}`.
    pub fn interval(lo: usize, hi: usize) -> Result<Self> {
        Self::from_sorted((lo..=hi).collect())
    }

    pub fn elements(&self) -> &[usize] {
        &self.0
    }

    pub fn min_element(&self) -> usize {
        self.0[0]
    }

    pub fn max_element(&self) -> usize {
        self.0[self.0.len() - 1]
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    pub fn union(&self, other: &FiniteSet) -> FiniteSet {
        let mut out = Vec::with_capacity(self.len() + other.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() || j < other.0.len() {
            let next = match (self.0.get(i), other.0.get(j)) {
                (Some(&a), Some(&b)) if a == b => {
                    i += 1;
                    j += 1;
                    a
                }
                (Some(&a), Some(&b)) if a < b => {
                    i += 1;
                    a
                }
                (Some(_), Some(&b)) => {
                    j += 1;
                    b
                }
                (Some(&a), None) => {
                    i += 1;
                    a
                }
                (None, Some(&b)) => {
                    j += 1;
                    b
                }
                (None, None) => unreachable!(),
            };
            out.push(next);
        }
        FiniteSet(out)
    }

    /// `max(self) < min(other)`.
    pub fn precedes(&self, other: &FiniteSet) -> bool {
        self.max_element() < other.min_element()
    }
}

impl TryFrom<Vec<usize>> for FiniteSet {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        FiniteSet::from_sorted(v)
    }
}

impl From<FiniteSet> for Vec<usize> {
    fn from(s: FiniteSet) -> Self {
        s.0
    }
}

impl fmt::Display for FiniteSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl FromStr for FiniteSet {
    type Err = Error;

    /// Canonical encoding: comma-separated ascending naturals.
    fn from_str(s: &str) -> Result<Self> {
        let elements = s
            .split(',')
            .map(|t| t.trim().parse::<usize>().map_err(|e| Error::Parse(format!("bad set element {t:?}: {e}"))))
            .collect::<Result<Vec<_>>>()?;
        FiniteSet::from_sorted(elements)
    }
}

/// True iff `max(E_i) < min(E_{i+1})` for every adjacent pair.
pub fn is_blocking(blocks: &[FiniteSet]) -> bool {
    blocks.windows(2).all(|w| w[0].precedes(&w[1]))
}

/// A finite blocking of naturals: successively increasing finite sets.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<FiniteSet>", into = "Vec<FiniteSet>")]
pub struct Blocking(Vec<FiniteSet>);

impl Blocking {
    pub fn new(blocks: Vec<FiniteSet>) -> Result<Self> {
        if !is_blocking(&blocks) {
            return Err(Error::input("blocks are not successively increasing"));
        }
        Ok(Blocking(blocks))
    }

    /// `({1}, {2}, ..., {m})`.
    pub fn singletons(m: usize) -> Self {
        Blocking((1..=m).map(|x| FiniteSet(vec![x])).collect())
    }

    pub fn from_sets(sets: &[&[usize]]) -> Result<Self> {
        let blocks = sets.iter().map(|s| FiniteSet::from_sorted(s.to_vec())).collect::<Result<Vec<_>>>()?;
        Blocking::new(blocks)
    }

    pub fn blocks(&self) -> &[FiniteSet] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn truncate(&self, len: usize) -> Blocking {
        Blocking(self.0.iter().take(len).cloned().collect())
    }

    /// Union of the blocks at the given 0-based positions.
    pub fn union_of(&self, indices: &[usize]) -> FiniteSet {
        let mut elements: Vec<usize> = indices.iter().flat_map(|&i| self.0[i].elements().iter().copied()).collect();
        elements.sort_unstable();
        FiniteSet(elements)
    }

    /// The coarser blocking whose blocks are unions over the given
    /// successively increasing groups of 0-based block positions.
    pub fn coarsen(&self, groups: &[Vec<usize>]) -> Blocking {
        Blocking(groups.iter().map(|g| self.union_of(g)).collect())
    }

    /// All elements covered by the blocking, ascending.
    pub fn ground(&self) -> Vec<usize> {
        self.0.iter().flat_map(|b| b.elements().iter().copied()).collect()
    }
}

impl TryFrom<Vec<FiniteSet>> for Blocking {
    type Error = Error;

    fn try_from(v: Vec<FiniteSet>) -> Result<Self> {
        Blocking::new(v)
    }
}

impl From<Blocking> for Vec<FiniteSet> {
    fn from(b: Blocking) -> Self {
        b.0
    }
}

impl fmt::Display for Blocking {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, b) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("|")?;
            }
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

impl FromStr for Blocking {
    type Err = Error;

    /// Canonical encoding: blocks joined by `|`.
    fn from_str(s: &str) -> Result<Self> {
        let blocks = s.split('|').map(FiniteSet::from_str).collect::<Result<Vec<_>>>()?;
        Blocking::new(blocks)
    }
}

/// True iff every block of `f` is a union of (not necessarily consecutive)
/// blocks of `e`.
pub fn is_coarser(f: &Blocking, e: &Blocking) -> bool {
    f.blocks().iter().all(|fb| {
        let mut covered = 0;
        for eb in e.blocks() {
            let hits = eb.elements().iter().filter(|&&x| fb.contains(x)).count();
            if hits == 0 {
                continue;
            }
            if hits != eb.len() {
                return false;
            }
            covered += hits;
        }
        covered == fb.len()
    })
}

/// Iterator over the nonempty subsets of `{0, ..., n-1}` in lexicographic
/// order of their ascending element lists.
#[derive(Clone, Debug)]
pub struct LexSubsets {
    n: usize,
    current: Vec<usize>,
    started: bool,
}

impl LexSubsets {
    pub fn new(n: usize) -> Self {
        LexSubsets { n, current: Vec::new(), started: false }
    }
}

impl Iterator for LexSubsets {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.n == 0 {
            return None;
        }
        if !self.started {
            self.started = true;
            self.current.push(0);
            return Some(self.current.clone());
        }
        let last = *self.current.last()?;
        if last + 1 < self.n {
            self.current.push(last + 1);
        } else {
            self.current.pop();
            let tail = self.current.last_mut()?;
            *tail += 1;
        }
        Some(self.current.clone())
    }
}

/// All ways to pick `k` successively increasing nonempty groups out of the
/// positions `{0, ..., len-1}`, in lexicographic order.
pub fn coarsening_groups(len: usize, k: usize) -> Vec<Vec<Vec<usize>>> {
    fn rec(lo: usize, len: usize, k: usize, acc: &mut Vec<Vec<usize>>, out: &mut Vec<Vec<Vec<usize>>>) {
        if k == 0 {
            out.push(acc.clone());
            return;
        }
        if lo >= len || len - lo < k {
            return;
        }
        for sub in LexSubsets::new(len - lo) {
            let group: Vec<usize> = sub.iter().map(|&i| i + lo).collect();
            let next = group[group.len() - 1] + 1;
            if len - next < k - 1 {
                continue;
            }
            acc.push(group);
            rec(next, len, k - 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    if k == 0 || k > len {
        return out;
    }
    rec(0, len, k, &mut Vec::new(), &mut out);
    out
}

/// `⟨P⟩^k`: every length-`k` blocking coarser than `p`, in lexicographic
/// order of the participating block-index sets. Empty when `k == 0` or
/// `k > p.len()`.
pub fn coarsenings(p: &Blocking, k: usize) -> Vec<Blocking> {
    coarsening_groups(p.len(), k).iter().map(|groups| p.coarsen(groups)).collect()
}

/// Unions of every nonempty subfamily of `q`'s blocks.
pub fn finite_unions(q: &Blocking) -> Vec<FiniteSet> {
    // blocks are disjoint, so distinct index subsets give distinct unions
    LexSubsets::new(q.len()).map(|idx| q.union_of(&idx)).collect()
}

/// The diagonal blocking whose `m`-th block is the `m`-th block of
/// `nested[m]`.
pub fn diagonal(nested: &[Blocking]) -> Result<Blocking> {
    if nested.is_empty() {
        return Err(Error::input("diagonal of an empty list"));
    }
    for (m, pair) in nested.windows(2).enumerate() {
        if !is_coarser(&pair[1], &pair[0]) {
            return Err(Error::input(format!("nested[{}] is not coarser than nested[{}]", m + 2, m + 1)));
        }
    }
    let mut blocks = Vec::with_capacity(nested.len());
    for (m, b) in nested.iter().enumerate() {
        let block = b
            .blocks()
            .get(m)
            .ok_or_else(|| Error::input(format!("nested[{}] has fewer than {} blocks", m + 1, m + 1)))?;
        blocks.push(block.clone());
    }
    Blocking::new(blocks).map_err(|_| Error::input("diagonal blocks are not successively increasing"))
}

/// The object a search certificate vouches for.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Witness {
    Set(FiniteSet),
    Blocking(Blocking),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SearchCertificate {
    pub found: bool,
    pub witness: Option<Witness>,
    pub color: Option<usize>,
    pub nodes_explored: u64,
    /// False when a node budget cut the search short.
    pub complete: bool,
}

/// Certificate of a joint search over several colourings at once.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JointCertificate {
    pub found: bool,
    pub witness: Option<Blocking>,
    pub colors: Vec<usize>,
    pub nodes_explored: u64,
    pub complete: bool,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SearchLimits {
    pub max_nodes: Option<u64>,
}

struct Budget {
    nodes: u64,
    limit: Option<u64>,
    exhausted: bool,
}

impl Budget {
    fn new(limits: SearchLimits) -> Self {
        Budget { nodes: 0, limit: limits.max_nodes, exhausted: false }
    }

    /// Counts one node; false once the budget is spent.
    fn tick(&mut self) -> bool {
        if let Some(limit) = self.limit {
            if self.nodes >= limit {
                self.exhausted = true;
                return false;
            }
        }
        self.nodes += 1;
        true
    }
}

fn k_subsets_with_last(chosen: &[usize], last: usize, k: usize) -> Vec<FiniteSet> {
    fn rec(chosen: &[usize], start: usize, need: usize, acc: &mut Vec<usize>, last: usize, out: &mut Vec<FiniteSet>) {
        if need == 0 {
            let mut v = acc.clone();
            v.push(last);
            out.push(FiniteSet(v));
            return;
        }
        for i in start..chosen.len() {
            if chosen.len() - i < need {
                break;
            }
            acc.push(chosen[i]);
            rec(chosen, i + 1, need - 1, acc, last, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    rec(chosen, 0, k - 1, &mut Vec::new(), last, &mut out);
    out
}

/// Searches `{1..m}` for an `l`-element set all of whose `k`-subsets get the
/// same colour. The first witness in lexicographic order is returned.
pub fn ramsey_search<C>(coloring: C, m: usize, k: usize, l: usize, limits: SearchLimits) -> Result<SearchCertificate>
where
    C: Fn(&FiniteSet) -> usize,
{
    if k == 0 || l < k {
        return Err(Error::input(format!("ramsey search needs 1 <= k <= L, got k={k}, L={l}")));
    }

    fn dfs<C: Fn(&FiniteSet) -> usize>(
        coloring: &C,
        m: usize,
        k: usize,
        l: usize,
        chosen: &mut Vec<usize>,
        target: Option<usize>,
        budget: &mut Budget,
    ) -> Option<usize> {
        if chosen.len() == l {
            return target;
        }
        let start = chosen.last().map_or(1, |&x| x + 1);
        for x in start..=m {
            if m - x + 1 < l - chosen.len() {
                break;
            }
            if !budget.tick() {
                return None;
            }
            let mut t = target;
            let mut ok = true;
            if chosen.len() + 1 >= k {
                for s in k_subsets_with_last(chosen, x, k) {
                    let c = coloring(&s);
                    match t {
                        None => t = Some(c),
                        Some(tc) if tc != c => {
                            ok = false;
                            break;
                        }
                        _ => {}
                    }
                }
            }
            if !ok {
                continue;
            }
            chosen.push(x);
            if let Some(c) = dfs(coloring, m, k, l, chosen, t, budget) {
                return Some(c);
            }
            chosen.pop();
            if budget.exhausted {
                return None;
            }
        }
        None
    }

    let mut budget = Budget::new(limits);
    let mut chosen = Vec::with_capacity(l);
    let color = dfs(&coloring, m, k, l, &mut chosen, None, &mut budget);
    Ok(match color {
        Some(c) => SearchCertificate {
            found: true,
            witness: Some(Witness::Set(FiniteSet(chosen))),
            color: Some(c),
            nodes_explored: budget.nodes,
            complete: true,
        },
        None => SearchCertificate {
            found: false,
            witness: None,
            color: None,
            nodes_explored: budget.nodes,
            complete: !budget.exhausted,
        },
    })
}

/// Searches for a length-`l` blocking inside `{1..m}` all of whose finite
/// unions get the same colour.
pub fn hindman_search<C>(coloring: C, m: usize, l: usize, limits: SearchLimits) -> Result<SearchCertificate>
where
    C: Fn(&FiniteSet) -> usize,
{
    if l == 0 {
        return Err(Error::input("hindman search needs L >= 1"));
    }

    struct State<'a, C> {
        coloring: &'a C,
        m: usize,
        l: usize,
        blocks: Vec<FiniteSet>,
        unions: Vec<FiniteSet>,
        budget: Budget,
    }

    fn dfs<C: Fn(&FiniteSet) -> usize>(st: &mut State<'_, C>, target: Option<usize>) -> Option<usize> {
        if st.blocks.len() == st.l {
            return target;
        }
        let lo = st.blocks.last().map_or(1, |b| b.max_element() + 1);
        if lo > st.m || st.m - lo + 1 < st.l - st.blocks.len() {
            return None;
        }
        let width = st.m - lo + 1;
        for sub in LexSubsets::new(width) {
            let last = lo + sub[sub.len() - 1];
            if st.m - last < st.l - st.blocks.len() - 1 {
                continue;
            }
            if !st.budget.tick() {
                return None;
            }
            let block = FiniteSet(sub.iter().map(|&i| i + lo).collect());
            let mut t = target;
            let mut fresh = Vec::with_capacity(st.unions.len() + 1);
            fresh.push(block.clone());
            fresh.extend(st.unions.iter().map(|u| u.union(&block)));
            let mut ok = true;
            for u in &fresh {
                let c = (st.coloring)(u);
                match t {
                    None => t = Some(c),
                    Some(tc) if tc != c => {
                        ok = false;
                        break;
                    }
                    _ => {}
                }
            }
            if !ok {
                continue;
            }
            let before = st.unions.len();
            st.unions.extend(fresh);
            st.blocks.push(block);
            if let Some(c) = dfs(st, t) {
                return Some(c);
            }
            st.blocks.pop();
            st.unions.truncate(before);
            if st.budget.exhausted {
                return None;
            }
        }
        None
    }

    let mut st =
        State { coloring: &coloring, m, l, blocks: Vec::new(), unions: Vec::new(), budget: Budget::new(limits) };
    let color = dfs(&mut st, None);
    let nodes = st.budget.nodes;
    Ok(match color {
        Some(c) => SearchCertificate {
            found: true,
            witness: Some(Witness::Blocking(Blocking(st.blocks))),
            color: Some(c),
            nodes_explored: nodes,
            complete: true,
        },
        None => SearchCertificate {
            found: false,
            witness: None,
            color: None,
            nodes_explored: nodes,
            complete: !st.budget.exhausted,
        },
    })
}

/// A blocking colouring of a fixed arity, for joint searches.
pub struct ArityColoring<'a> {
    pub arity: usize,
    pub color: &'a dyn Fn(&[FiniteSet]) -> usize,
}

/// Searches `⟨P⟩^l` for a `Q` such that each colouring is constant on
/// `⟨Q⟩^{arity}`. With a single colouring this is the Milliken-Taylor search.
pub fn milliken_taylor_search_joint(
    colorings: &[ArityColoring<'_>],
    p: &Blocking,
    l: usize,
    limits: SearchLimits,
) -> Result<JointCertificate> {
    if l == 0 || l > p.len() {
        return Err(Error::input(format!("need 1 <= L <= len(P) = {}, got L={l}", p.len())));
    }
    if let Some(bad) = colorings.iter().find(|c| c.arity == 0 || c.arity > l) {
        return Err(Error::input(format!("colouring arity {} outside 1..=L={l}", bad.arity)));
    }

    // groups of Q-positions forming k-blockings whose last group ends at
    // position j, cached per (j, k)
    let mut ending: HashMap<(usize, usize), Vec<Vec<Vec<usize>>>> = HashMap::new();
    for j in 0..l {
        for c in colorings {
            ending.entry((j, c.arity)).or_insert_with(|| {
                coarsening_groups(j + 1, c.arity).into_iter().filter(|g| g[g.len() - 1].contains(&j)).collect()
            });
        }
    }

    struct State<'a, 'b> {
        colorings: &'a [ArityColoring<'b>],
        p: &'a Blocking,
        l: usize,
        ending: &'a HashMap<(usize, usize), Vec<Vec<Vec<usize>>>>,
        groups: Vec<Vec<usize>>,
        q: Vec<FiniteSet>,
        budget: Budget,
    }

    fn dfs(st: &mut State<'_, '_>, targets: &[Option<usize>]) -> Option<Vec<usize>> {
        if st.q.len() == st.l {
            return Some(targets.iter().map(|t| t.unwrap_or(0)).collect());
        }
        let lo = st.groups.last().map_or(0, |g| g[g.len() - 1] + 1);
        let remaining_needed = st.l - st.q.len();
        if lo >= st.p.len() || st.p.len() - lo < remaining_needed {
            return None;
        }
        let j = st.q.len();
        for sub in LexSubsets::new(st.p.len() - lo) {
            let group: Vec<usize> = sub.iter().map(|&i| i + lo).collect();
            let last = group[group.len() - 1];
            if st.p.len() - last - 1 < remaining_needed - 1 {
                continue;
            }
            if !st.budget.tick() {
                return None;
            }
            let block = st.p.union_of(&group);
            st.q.push(block);
            let mut t = targets.to_vec();
            let mut ok = true;
            'colorings: for (ci, c) in st.colorings.iter().enumerate() {
                if c.arity > j + 1 {
                    continue;
                }
                for g in &st.ending[&(j, c.arity)] {
                    let blocks: Vec<FiniteSet> = g.iter().map(|grp| union_positions(&st.q, grp)).collect();
                    let col = (c.color)(&blocks);
                    match t[ci] {
                        None => t[ci] = Some(col),
                        Some(tc) if tc != col => {
                            ok = false;
                            break 'colorings;
                        }
                        _ => {}
                    }
                }
            }
            if ok {
                st.groups.push(group);
                if let Some(cs) = dfs(st, &t) {
                    return Some(cs);
                }
                st.groups.pop();
            }
            st.q.pop();
            if st.budget.exhausted {
                return None;
            }
        }
        None
    }

    let mut st =
        State { colorings, p, l, ending: &ending, groups: Vec::new(), q: Vec::new(), budget: Budget::new(limits) };
    let targets = vec![None; colorings.len()];
    let result = dfs(&mut st, &targets);
    let nodes = st.budget.nodes;
    Ok(match result {
        Some(colors) => JointCertificate {
            found: true,
            witness: Some(Blocking(st.q)),
            colors,
            nodes_explored: nodes,
            complete: true,
        },
        None => JointCertificate {
            found: false,
            witness: None,
            colors: Vec::new(),
            nodes_explored: nodes,
            complete: !st.budget.exhausted,
        },
    })
}

fn union_positions(q: &[FiniteSet], positions: &[usize]) -> FiniteSet {
    let mut elements: Vec<usize> = positions.iter().flat_map(|&i| q[i].elements().iter().copied()).collect();
    elements.sort_unstable();
    FiniteSet(elements)
}

/// Searches `⟨P⟩^l` for `Q` with the colouring constant on `⟨Q⟩^k`.
pub fn milliken_taylor_search<C>(
    coloring: C,
    p: &Blocking,
    k: usize,
    l: usize,
    limits: SearchLimits,
) -> Result<SearchCertificate>
where
    C: Fn(&[FiniteSet]) -> usize,
{
    if k == 0 || l < k {
        return Err(Error::input(format!("milliken-taylor search needs 1 <= k <= L, got k={k}, L={l}")));
    }
    let joint = milliken_taylor_search_joint(&[ArityColoring { arity: k, color: &coloring }], p, l, limits)?;
    Ok(SearchCertificate {
        found: joint.found,
        witness: joint.witness.map(Witness::Blocking),
        color: joint.colors.first().copied(),
        nodes_explored: joint.nodes_explored,
        complete: joint.complete,
    })
}

fn single_color<I: IntoIterator<Item = usize>>(colors: I) -> Option<usize> {
    let mut it = colors.into_iter();
    let first = it.next()?;
    it.all(|c| c == first).then_some(first)
}

/// The common colour of every `k`-subset of `witness`, if there is one.
pub fn verify_ramsey<C: Fn(&FiniteSet) -> usize>(coloring: C, witness: &FiniteSet, k: usize) -> Option<usize> {
    let singles = Blocking::singletons(witness.len());
    let elems = witness.elements();
    let sets = coarsening_groups(singles.len(), 1)
        .into_iter()
        .map(|g| g[0].clone())
        .filter(|g| g.len() == k)
        .map(|g| FiniteSet(g.iter().map(|&i| elems[i]).collect()));
    single_color(sets.map(|s| coloring(&s)))
}

/// The common colour of every finite union of `witness`'s blocks.
pub fn verify_hindman<C: Fn(&FiniteSet) -> usize>(coloring: C, witness: &Blocking) -> Option<usize> {
    single_color(finite_unions(witness).iter().map(coloring))
}

/// The common colour of every member of `⟨witness⟩^k`.
pub fn verify_milliken_taylor<C: Fn(&[FiniteSet]) -> usize>(
    coloring: C,
    witness: &Blocking,
    k: usize,
) -> Option<usize> {
    single_color(coarsenings(witness, k).iter().map(|b| coloring(b.blocks())))
}

/// Built-in set colourings.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NamedColoring {
    /// `min(E) mod 2`; on blockings, the min of the first block.
    MinParity,
    /// `|E| mod 2`; on blockings, the total size.
    SizeParity,
    Constant,
}

impl NamedColoring {
    pub fn color_set(&self, set: &FiniteSet) -> usize {
        match self {
            NamedColoring::MinParity => set.min_element() % 2,
            NamedColoring::SizeParity => set.len() % 2,
            NamedColoring::Constant => 0,
        }
    }

    pub fn color_blocking(&self, blocks: &[FiniteSet]) -> usize {
        match self {
            NamedColoring::MinParity => blocks[0].min_element() % 2,
            NamedColoring::SizeParity => blocks.iter().map(FiniteSet::len).sum::<usize>() % 2,
            NamedColoring::Constant => 0,
        }
    }
}

impl FromStr for NamedColoring {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "min-parity" => Ok(NamedColoring::MinParity),
            "size-parity" => Ok(NamedColoring::SizeParity),
            "constant" => Ok(NamedColoring::Constant),
            other => Err(Error::Parse(format!("unknown colouring {other:?}"))),
        }
    }
}

/// A colouring read from a table: one `<encoding> <colour>` line per
/// object, where sets are comma-separated and blockings join sets with `|`.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct TableColoring {
    entries: HashMap<String, usize>,
}

impl TableColoring {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = HashMap::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut parts = line.split_whitespace();
            let (Some(obj), Some(col), None) = (parts.next(), parts.next(), parts.next()) else {
                return Err(Error::Parse(format!("line {}: expected `<object> <color>`", lineno + 1)));
            };
            // normalise the key through the canonical encoding
            let key = if obj.contains('|') {
                obj.parse::<Blocking>()?.to_string()
            } else {
                obj.parse::<FiniteSet>()?.to_string()
            };
            let color =
                col.parse::<usize>().map_err(|e| Error::Parse(format!("line {}: bad colour: {e}", lineno + 1)))?;
            entries.insert(key, color);
        }
        Ok(TableColoring { entries })
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn color_set(&self, set: &FiniteSet) -> Result<usize> {
        let key = set.to_string();
        self.entries.get(&key).copied().ok_or_else(|| Error::input(format!("colouring table has no entry for {key}")))
    }

    pub fn color_blocking(&self, blocks: &[FiniteSet]) -> Result<usize> {
        let key = blocks.iter().map(ToString::to_string).collect::<Vec<_>>().join("|");
        self.entries.get(&key).copied().ok_or_else(|| Error::input(format!("colouring table has no entry for {key}")))
    }
}
