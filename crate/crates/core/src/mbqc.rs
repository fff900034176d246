//! Brickwork resource states and the unblinded adaptive MBQC machine.
//!
//! Positions are 1-indexed `(x, y)` with `x` the column (`1..=n`) and `y` the
//! row (`1..=m`). Qubits are measured column by column, top to bottom within a
//! column, which is also the order of the `phi` vector.
//!
//! Corrections follow the row-successor flow `f(x, y) = (x + 1, y)`: the
//! outcome of `p` X-corrects `f(p)` and Z-corrects every other neighbour of
//! `f(p)`. Those corrections are folded into the measurement angle
//! `φ' = (-1)^{s_X} φ + s_Z π`, so the raw outcome of an output qubit is
//! already its logical value.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::qsim::{BranchStream, PureState, MAX_QUBITS};
use crate::{Angle8, Error, Result};

/// A qubit of the `n × m` brickwork layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Position {
    /// Column, `1..=n`.
    pub x: usize,
    /// Row, `1..=m`.
    pub y: usize,
}

impl Position {
    pub fn new(x: usize, y: usize) -> Self {
        Position { x, y }
    }
}

impl std::fmt::Display for Position {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({},{})", self.x, self.y)
    }
}

/// Unordered pair of positions, stored with the earlier position first.
pub type Edge = (Position, Position);

fn edge(a: Position, b: Position) -> Edge {
    if a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Edges of the `n`-column, `m`-row brickwork state:
///
/// 1. neighbouring qubits of the same row;
/// 2. for each column `j ≡ 3 (mod 8)` and odd row `i`, `(i, j)–(i+1, j)` and
///    `(i, j+2)–(i+1, j+2)`;
/// 3. for each column `j ≡ 7 (mod 8)` and even row `i`, the same two pairs.
///
/// Pairs that fall outside the layout are dropped.
pub fn edge_rule(n: usize, m: usize) -> BTreeSet<Edge> {
    let mut edges = BTreeSet::new();
    for y in 1..=m {
        for x in 1..n {
            edges.insert(edge(Position::new(x, y), Position::new(x + 1, y)));
        }
    }
    for j in 1..=n {
        let row_parity = match j % 8 {
            3 => 1,
            7 => 0,
            _ => continue,
        };
        for i in (1..m).filter(|i| i % 2 == row_parity) {
            for col in [j, j + 2] {
                if col <= n {
                    edges.insert(edge(Position::new(col, i), Position::new(col, i + 1)));
                }
            }
        }
    }
    edges
}

/// Neighbours of `p` under `edges`.
pub fn neighbors(edges: &BTreeSet<Edge>, p: Position) -> BTreeSet<Position> {
    edges
        .iter()
        .filter_map(|&(a, b)| {
            if a == p {
                Some(b)
            } else if b == p {
                Some(a)
            } else {
                None
            }
        })
        .collect()
}

/// X- and Z-dependency sets per position.
pub type Dependencies = BTreeMap<Position, BTreeSet<Position>>;

/// Dependency sets from the flow `f(x, y) = (x + 1, y)`:
/// `x_deps(q) = {p : f(p) = q}` and
/// `z_deps(q) = {p : q ∈ N(f(p)), p ≠ q, p measured before q}`.
pub fn flow_dependencies(n: usize, m: usize) -> (Dependencies, Dependencies) {
    let edges = edge_rule(n, m);
    let mut x_deps = Dependencies::new();
    let mut z_deps = Dependencies::new();
    for x in 1..=n {
        for y in 1..=m {
            let q = Position::new(x, y);
            x_deps.insert(q, BTreeSet::new());
            z_deps.insert(q, BTreeSet::new());
        }
    }
    for p in x_deps.keys().copied().collect::<Vec<_>>() {
        if p.x == n {
            continue;
        }
        let fp = Position::new(p.x + 1, p.y);
        x_deps.get_mut(&fp).expect("flow successor in range").insert(p);
        for q in neighbors(&edges, fp) {
            if q != p && p < q {
                z_deps.get_mut(&q).expect("neighbour in range").insert(p);
            }
        }
    }
    (x_deps, z_deps)
}

/// `φ' = (-1)^{s_X} φ + s_Z π`.
pub fn adapted_angle(phi: Angle8, s_x: bool, s_z: bool) -> Angle8 {
    phi.negate_if(s_x).flip_if(s_z)
}

/// Plain-text pattern description: dimensions plus one angle index per
/// position in measurement order (column-major).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternSpec {
    pub n: usize,
    pub m: usize,
    pub phi: Vec<i64>,
}

/// Brickwork layout with computational angles and flow dependencies.
#[derive(Clone, Debug, PartialEq)]
pub struct BrickworkPattern {
    n: usize,
    m: usize,
    order: Vec<Position>,
    phi: Vec<Angle8>,
    edges: BTreeSet<Edge>,
    x_deps: Vec<Vec<usize>>,
    z_deps: Vec<Vec<usize>>,
}

impl BrickworkPattern {
    /// `phi` lists one angle per position in measurement order.
    pub fn new(n: usize, m: usize, phi: Vec<Angle8>) -> Result<Self> {
        if n == 0 || m == 0 {
            return Err(Error::InvalidParameter(format!(
                "brickwork needs n, m >= 1 (got {n}x{m})"
            )));
        }
        if phi.len() != n * m {
            return Err(Error::LengthMismatch {
                left: phi.len(),
                right: n * m,
            });
        }
        let order: Vec<Position> = (1..=n)
            .flat_map(|x| (1..=m).map(move |y| Position::new(x, y)))
            .collect();
        let (xd, zd) = flow_dependencies(n, m);
        let index_of = |p: &Position| (p.x - 1) * m + (p.y - 1);
        let x_deps = order.iter().map(|p| xd[p].iter().map(index_of).collect()).collect();
        let z_deps = order.iter().map(|p| zd[p].iter().map(index_of).collect()).collect();
        Ok(BrickworkPattern {
            n,
            m,
            order,
            phi,
            edges: edge_rule(n, m),
            x_deps,
            z_deps,
        })
    }

    /// All angles zero.
    pub fn uniform(n: usize, m: usize, phi: Angle8) -> Result<Self> {
        BrickworkPattern::new(n, m, vec![phi; n * m])
    }

    pub fn from_spec(spec: &PatternSpec) -> Result<Self> {
        BrickworkPattern::new(spec.n, spec.m, spec.phi.iter().map(|&k| Angle8::new(k)).collect())
    }

    pub fn to_spec(&self) -> PatternSpec {
        PatternSpec {
            n: self.n,
            m: self.m,
            phi: self.phi.iter().map(|a| i64::from(a.index())).collect(),
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Computation size `S = n · m`.
    pub fn size(&self) -> usize {
        self.n * self.m
    }

    pub fn order(&self) -> &[Position] {
        &self.order
    }

    pub fn phi(&self) -> &[Angle8] {
        &self.phi
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    /// Measurement-order index of `p`.
    pub fn index_of(&self, p: Position) -> usize {
        (p.x - 1) * self.m + (p.y - 1)
    }

    /// Edges as pairs of measurement-order indices.
    pub fn index_edges(&self) -> Vec<(usize, usize)> {
        self.edges
            .iter()
            .map(|&(a, b)| (self.index_of(a), self.index_of(b)))
            .collect()
    }

    pub fn x_deps(&self, index: usize) -> &[usize] {
        &self.x_deps[index]
    }

    pub fn z_deps(&self, index: usize) -> &[usize] {
        &self.z_deps[index]
    }

    /// Whether `index` is in the last column.
    pub fn is_output(&self, index: usize) -> bool {
        self.order[index].x == self.n
    }

    /// Parities `(s_X, s_Z)` for `index` given the (logical) outcomes so far.
    pub fn signal_parities(&self, index: usize, outcomes: &[bool]) -> (bool, bool) {
        let parity = |deps: &[usize]| deps.iter().fold(false, |acc, &d| acc ^ outcomes[d]);
        (parity(&self.x_deps[index]), parity(&self.z_deps[index]))
    }

    /// Adapted angle `φ'` for `index`.
    pub fn adapted_angle(&self, index: usize, outcomes: &[bool]) -> Angle8 {
        let (sx, sz) = self.signal_parities(index, outcomes);
        adapted_angle(self.phi[index], sx, sz)
    }

    /// `|+>^{⊗S}` entangled along every edge; qubit `i` is position `order[i]`.
    pub fn resource_state(&self, thetas: Option<&[Angle8]>) -> Result<PureState> {
        let size = self.size();
        if size > MAX_QUBITS {
            return Err(Error::TooManyQubits {
                requested: size,
                cap: MAX_QUBITS,
            });
        }
        let zeros = vec![Angle8::ZERO; size];
        let thetas = thetas.unwrap_or(&zeros);
        if thetas.len() != size {
            return Err(Error::LengthMismatch {
                left: thetas.len(),
                right: size,
            });
        }
        let mut state = PureState::plus_product(thetas)?;
        for (a, b) in self.index_edges() {
            state = state.apply_cz(a, b)?;
        }
        Ok(state)
    }

    /// Indices of the last column, in row order.
    pub fn output_indices(&self) -> std::ops::Range<usize> {
        (self.n - 1) * self.m..self.n * self.m
    }
}

/// Outcome of one adaptive run.
#[derive(Clone, Debug, PartialEq)]
pub struct MbqcRunResult {
    /// Raw outcome per position, in measurement order.
    pub outcomes: Vec<bool>,
    /// Logical outcomes of the last column.
    pub corrected_outputs: Vec<bool>,
    /// State of unmeasured qubits; the empty register after a full run.
    pub final_state: PureState,
}

/// Executes the pattern on `|+>` inputs with adaptive angles.
pub fn run_plain_mbqc(pattern: &BrickworkPattern, branches: &mut impl BranchStream) -> Result<MbqcRunResult> {
    let mut state = pattern.resource_state(None)?;
    // live[k] = measurement-order index of register qubit k
    let mut live: Vec<usize> = (0..pattern.size()).collect();
    let mut outcomes = Vec::with_capacity(pattern.size());
    for index in 0..pattern.size() {
        let angle = pattern.adapted_angle(index, &outcomes);
        let slot = live.iter().position(|&l| l == index).expect("qubit is live");
        let m = state.measure_rotated(slot, angle, branches.next_select())?;
        outcomes.push(m.bit);
        state = m.post_state;
        live.remove(slot);
    }
    let corrected_outputs = outcomes[pattern.output_indices()].to_vec();
    Ok(MbqcRunResult {
        outcomes,
        corrected_outputs,
        final_state: state,
    })
}

/// One leaf of an exhaustive branch enumeration.
#[derive(Clone, Debug, PartialEq)]
pub struct Branch {
    /// Raw outcomes in measurement order.
    pub outcomes: Vec<bool>,
    pub probability: f64,
}

/// Enumerates every branch of a sequential measurement of `state`, qubit 0
/// first. `angle_for(i, outcomes)` gives the angle of the `i`-th measurement
/// from the raw outcomes so far. Zero-weight branches are pruned.
pub fn enumerate_branches<F>(state: &PureState, mut angle_for: F) -> Result<Vec<Branch>>
where
    F: FnMut(usize, &[bool]) -> Angle8,
{
    let mut leaves = Vec::new();
    let mut stack = vec![(state.clone(), Vec::new(), 1.0f64)];
    while let Some((st, outcomes, prob)) = stack.pop() {
        if st.num_qubits() == 0 {
            leaves.push(Branch {
                outcomes,
                probability: prob,
            });
            continue;
        }
        let angle = angle_for(outcomes.len(), &outcomes);
        for bit in [true, false] {
            let (p, post) = st.project(0, angle, bit)?;
            if let Some(post) = post {
                if p > 1e-15 {
                    let mut next = outcomes.clone();
                    next.push(bit);
                    stack.push((post, next, prob * p));
                }
            }
        }
    }
    leaves.sort_by(|a, b| a.outcomes.cmp(&b.outcomes));
    Ok(leaves)
}

/// Exact distribution of the corrected outputs over all branches.
pub fn plain_output_distribution(pattern: &BrickworkPattern) -> Result<BTreeMap<Vec<bool>, f64>> {
    let state = pattern.resource_state(None)?;
    let leaves = enumerate_branches(&state, |i, outs| pattern.adapted_angle(i, outs))?;
    let mut dist = BTreeMap::new();
    for leaf in leaves {
        *dist
            .entry(leaf.outcomes[pattern.output_indices()].to_vec())
            .or_insert(0.0) += leaf.probability;
    }
    Ok(dist)
}

/// `(history, probability, conditional output distribution)` triples.
pub type ConditionalOutputs = Vec<(Vec<bool>, f64, BTreeMap<Vec<bool>, f64>)>;

/// For every history of non-output outcomes, its probability and the
/// conditional distribution of the corrected outputs.
pub fn conditional_output_distributions(pattern: &BrickworkPattern) -> Result<ConditionalOutputs> {
    let state = pattern.resource_state(None)?;
    let leaves = enumerate_branches(&state, |i, outs| pattern.adapted_angle(i, outs))?;
    let split = pattern.output_indices().start;
    let mut grouped: BTreeMap<Vec<bool>, BTreeMap<Vec<bool>, f64>> = BTreeMap::new();
    for leaf in leaves {
        let (history, outputs) = leaf.outcomes.split_at(split);
        *grouped
            .entry(history.to_vec())
            .or_default()
            .entry(outputs.to_vec())
            .or_insert(0.0) += leaf.probability;
    }
    Ok(grouped
        .into_iter()
        .map(|(history, dist)| {
            let total: f64 = dist.values().sum();
            let conditional = dist.into_iter().map(|(k, v)| (k, v / total)).collect();
            (history, total, conditional)
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::FixedBranches;
    use crate::seed::rng_from_seed;

    fn p(x: usize, y: usize) -> Position {
        Position::new(x, y)
    }

    #[test]
    fn single_column_has_no_edges() {
        for m in 1..6 {
            assert!(edge_rule(1, m).is_empty());
        }
    }

    #[test]
    fn single_row_has_only_horizontals() {
        let e = edge_rule(3, 1);
        assert_eq!(e.len(), 2);
        assert!(e.contains(&(p(1, 1), p(2, 1))));
        assert!(e.contains(&(p(2, 1), p(3, 1))));
    }

    #[test]
    fn five_by_two_layout() {
        let e = edge_rule(5, 2);
        let mut expected = BTreeSet::new();
        for y in 1..=2 {
            for x in 1..5 {
                expected.insert((p(x, y), p(x + 1, y)));
            }
        }
        expected.insert((p(3, 1), p(3, 2)));
        expected.insert((p(5, 1), p(5, 2)));
        assert_eq!(e, expected);
    }

    #[test]
    fn column_seven_uses_even_rows() {
        let e = edge_rule(9, 4);
        assert!(e.contains(&(p(7, 2), p(7, 3))));
        assert!(e.contains(&(p(9, 2), p(9, 3))));
        assert!(!e.contains(&(p(7, 1), p(7, 2))));
        assert!(e.contains(&(p(3, 1), p(3, 2))));
        assert!(e.contains(&(p(3, 3), p(3, 4))));
        assert!(e.contains(&(p(5, 3), p(5, 4))));
        assert!(!e.contains(&(p(3, 2), p(3, 3))));
    }

    #[test]
    fn edges_are_well_formed() {
        for n in 1..12 {
            for m in 1..6 {
                let e = edge_rule(n, m);
                for &(a, b) in &e {
                    assert!(a < b, "self loop or unnormalised pair {a}-{b}");
                    assert!(!e.contains(&(b, a)));
                    assert!(a.x <= n && b.x <= n && a.y <= m && b.y <= m);
                }
            }
        }
    }

    #[test]
    fn first_column_has_no_dependencies() {
        let (xd, zd) = flow_dependencies(5, 2);
        for y in 1..=2 {
            assert!(xd[&p(1, y)].is_empty());
            assert!(zd[&p(1, y)].is_empty());
        }
    }

    #[test]
    fn three_by_one_dependencies() {
        let (xd, zd) = flow_dependencies(3, 1);
        assert_eq!(xd[&p(3, 1)], BTreeSet::from([p(2, 1)]));
        assert_eq!(zd[&p(3, 1)], BTreeSet::from([p(1, 1)]));
        assert_eq!(xd[&p(2, 1)], BTreeSet::from([p(1, 1)]));
        assert!(zd[&p(2, 1)].is_empty());
    }

    #[test]
    fn vertical_edge_gives_cross_row_z_dependency() {
        // (3,1)-(3,2) is vertical; f(2,1) = (3,1) has neighbour (3,2).
        let (xd, zd) = flow_dependencies(5, 2);
        assert_eq!(zd[&p(3, 2)], BTreeSet::from([p(1, 2), p(2, 1)]));
        assert_eq!(zd[&p(3, 1)], BTreeSet::from([p(1, 1), p(2, 2)]));
        assert_eq!(xd[&p(3, 2)], BTreeSet::from([p(2, 2)]));
    }

    #[test]
    fn dependencies_precede_owner() {
        for n in 1..10 {
            for m in 1..4 {
                let (xd, zd) = flow_dependencies(n, m);
                for (q, deps) in xd.iter().chain(zd.iter()) {
                    for d in deps {
                        assert!(d < q && d.x < q.x);
                    }
                }
            }
        }
    }

    #[test]
    fn adapted_angle_examples() {
        let one = Angle8::new(1);
        assert_eq!(adapted_angle(one, false, false), Angle8::new(1));
        assert_eq!(adapted_angle(one, true, false), Angle8::new(7));
        assert_eq!(adapted_angle(one, true, true), Angle8::new(3));
        for a in Angle8::all() {
            assert_eq!(adapted_angle(a, false, false), a);
        }
    }

    #[test]
    fn rejects_bad_patterns() {
        assert!(BrickworkPattern::new(0, 1, vec![]).is_err());
        assert!(BrickworkPattern::new(2, 2, vec![Angle8::ZERO; 3]).is_err());
        let big = BrickworkPattern::uniform(5, 3, Angle8::ZERO).unwrap();
        assert!(matches!(
            run_plain_mbqc(&big, &mut FixedBranches::first()),
            Err(Error::TooManyQubits { .. })
        ));
    }

    #[test]
    fn two_by_one_zero_angles_is_branch_independent() {
        // Measuring (1,1) in the X basis leaves (2,1) in |0> or |1>; the final
        // X measurement is then a fair coin whichever branch occurred.
        let pat = BrickworkPattern::uniform(2, 1, Angle8::ZERO).unwrap();
        let cond = conditional_output_distributions(&pat).unwrap();
        assert_eq!(cond.len(), 2);
        for (_, weight, dist) in &cond {
            assert!((weight - 0.5).abs() < 1e-12);
            assert!((dist[&vec![false]] - 0.5).abs() < 1e-12);
            assert!((dist[&vec![true]] - 0.5).abs() < 1e-12);
        }
    }

    #[test]
    fn replay_is_deterministic() {
        let pat = BrickworkPattern::new(3, 2, (0..6).map(Angle8::new).collect()).unwrap();
        let a = run_plain_mbqc(&pat, &mut rng_from_seed(9)).unwrap();
        let b = run_plain_mbqc(&pat, &mut rng_from_seed(9)).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.outcomes.len(), 6);
        assert_eq!(a.final_state.num_qubits(), 0);
    }

    #[test]
    fn pattern_spec_round_trip() {
        let spec = PatternSpec {
            n: 2,
            m: 2,
            phi: vec![1, 2, 9, -1],
        };
        let pat = BrickworkPattern::from_spec(&spec).unwrap();
        assert_eq!(pat.to_spec().phi, vec![1, 2, 1, 7]);
    }
}
