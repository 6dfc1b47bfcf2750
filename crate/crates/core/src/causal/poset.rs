use std::collections::{BTreeMap, BTreeSet};

use super::CausalError;

/// A finite partial order, stored as its Hasse diagram (the transitive
/// reduction of the order). `x` can signal to `y` iff `x < y`.
#[derive(Debug, Clone)]
pub struct CausalStructure {
    elements: Vec<String>,
    hasse: BTreeSet<(usize, usize)>,
    closure: Vec<Vec<bool>>,
}

impl PartialEq for CausalStructure {
    fn eq(&self, other: &Self) -> bool {
        self.elements == other.elements && self.hasse == other.hasse
    }
}

impl Eq for CausalStructure {}

/// Result of collapsing clusters of elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Quotient {
    pub structure: CausalStructure,
    /// Cluster index of every original element.
    pub cluster_of: Vec<usize>,
}

impl CausalStructure {
    /// Build a structure from named elements and `(lower, upper)` pairs,
    /// rejecting cycles and canonicalising to the transitive reduction.
    pub fn validate_structure<S: AsRef<str>>(
        elements: &[S],
        edges: &[(S, S)],
    ) -> Result<Self, CausalError> {
        let names: Vec<String> = elements.iter().map(|e| e.as_ref().to_string()).collect();
        let mut index = BTreeMap::new();
        for (i, n) in names.iter().enumerate() {
            if index.insert(n.clone(), i).is_some() {
                return Err(CausalError::DuplicateElement(n.clone()));
            }
        }
        let lookup = |n: &str| {
            index
                .get(n)
                .copied()
                .ok_or_else(|| CausalError::UnknownElement(n.to_string()))
        };
        let pairs = edges
            .iter()
            .map(|(x, y)| Ok((lookup(x.as_ref())?, lookup(y.as_ref())?)))
            .collect::<Result<Vec<_>, CausalError>>()?;
        Self::from_relation(names, &pairs)
    }

    /// As [`validate_structure`](Self::validate_structure) with edges given
    /// by element index.
    pub fn from_relation(elements: Vec<String>, edges: &[(usize, usize)]) -> Result<Self, CausalError> {
        let n = elements.len();
        let mut succ = vec![BTreeSet::new(); n];
        for &(x, y) in edges {
            assert!(x < n && y < n, "edge endpoint out of range");
            succ[x].insert(y);
        }
        if let Some(cycle) = find_cycle(&succ) {
            return Err(CausalError::Cycle(
                cycle.into_iter().map(|i| elements[i].clone()).collect(),
            ));
        }
        let closure = transitive_closure(n, edges);
        let hasse = transitive_reduction(&closure);
        Ok(CausalStructure {
            elements,
            hasse,
            closure,
        })
    }

    /// The four-element diamond `bot < a, b < top`.
    pub fn diamond() -> Self {
        Self::validate_structure(
            &["bot", "a", "b", "top"],
            &[("bot", "a"), ("bot", "b"), ("a", "top"), ("b", "top")],
        )
        .expect("the diamond is a partial order")
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn elements(&self) -> &[String] {
        &self.elements
    }

    pub fn index_of(&self, name: &str) -> Result<usize, CausalError> {
        self.elements
            .iter()
            .position(|e| e == name)
            .ok_or_else(|| CausalError::UnknownElement(name.to_string()))
    }

    /// Hasse edges by index, sorted.
    pub fn hasse_edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.hasse.iter().copied()
    }

    pub fn hasse_edge_names(&self) -> Vec<(&str, &str)> {
        self.hasse
            .iter()
            .map(|&(x, y)| (self.elements[x].as_str(), self.elements[y].as_str()))
            .collect()
    }

    /// Strict order by index.
    pub fn less(&self, x: usize, y: usize) -> bool {
        self.closure[x][y]
    }

    pub fn comparable(&self, x: usize, y: usize) -> bool {
        x == y || self.less(x, y) || self.less(y, x)
    }

    pub fn can_signal(&self, x: &str, y: &str) -> Result<bool, CausalError> {
        Ok(self.less(self.index_of(x)?, self.index_of(y)?))
    }

    /// Linear extension; ties go to the lowest index (or highest when
    /// `reverse_ties`).
    pub fn topological_order(&self, reverse_ties: bool) -> Vec<usize> {
        let n = self.len();
        let mut indeg = vec![0usize; n];
        for &(_, y) in &self.hasse {
            indeg[y] += 1;
        }
        let mut ready: BTreeSet<usize> = (0..n).filter(|&i| indeg[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(&next) = if reverse_ties {
            ready.iter().next_back()
        } else {
            ready.iter().next()
        } {
            ready.remove(&next);
            order.push(next);
            for &(x, y) in &self.hasse {
                if x == next {
                    indeg[y] -= 1;
                    if indeg[y] == 0 {
                        ready.insert(y);
                    }
                }
            }
        }
        order
    }

    /// Restriction of the order to `subset` (in the given order).
    pub fn induced(&self, subset: &[usize]) -> CausalStructure {
        let names = subset.iter().map(|&i| self.elements[i].clone()).collect();
        let mut edges = Vec::new();
        for (a, &x) in subset.iter().enumerate() {
            for (b, &y) in subset.iter().enumerate() {
                if self.less(x, y) {
                    edges.push((a, b));
                }
            }
        }
        Self::from_relation(names, &edges).expect("a restricted order is acyclic")
    }

    /// Collapse named clusters. `partition` maps every element to a cluster
    /// name; clusters are ordered by first appearance.
    pub fn coarse_grain(&self, partition: &BTreeMap<String, String>) -> Result<Quotient, CausalError> {
        let mut names: Vec<String> = Vec::new();
        let mut cluster_of = Vec::with_capacity(self.len());
        for e in &self.elements {
            let c = partition
                .get(e)
                .ok_or_else(|| CausalError::PartitionIncomplete(e.clone()))?;
            let idx = match names.iter().position(|n| n == c) {
                Some(i) => i,
                None => {
                    names.push(c.clone());
                    names.len() - 1
                }
            };
            cluster_of.push(idx);
        }
        self.coarse_grain_by(&cluster_of, names)
    }

    /// Quotient order: `C1 < C2` iff some `x ∈ C1`, `y ∈ C2` have `x < y`.
    pub fn coarse_grain_by(&self, cluster_of: &[usize], names: Vec<String>) -> Result<Quotient, CausalError> {
        assert_eq!(cluster_of.len(), self.len(), "partition must be total");
        let mut edges = BTreeSet::new();
        for x in 0..self.len() {
            for y in 0..self.len() {
                let (cx, cy) = (cluster_of[x], cluster_of[y]);
                if cx != cy && self.less(x, y) {
                    edges.insert((cx, cy));
                }
            }
        }
        let edges: Vec<(usize, usize)> = edges.into_iter().collect();
        match Self::from_relation(names.clone(), &edges) {
            Ok(structure) => Ok(Quotient {
                structure,
                cluster_of: cluster_of.to_vec(),
            }),
            Err(CausalError::Cycle(cycle)) => {
                let idx: Vec<usize> = cycle
                    .iter()
                    .map(|c| names.iter().position(|n| n == c).expect("cluster name"))
                    .collect();
                let witnesses = idx
                    .windows(2)
                    .map(|w| {
                        let (cx, cy) = (w[0], w[1]);
                        (0..self.len())
                            .flat_map(|x| (0..self.len()).map(move |y| (x, y)))
                            .find(|&(x, y)| cluster_of[x] == cx && cluster_of[y] == cy && self.less(x, y))
                            .map(|(x, y)| (self.elements[x].clone(), self.elements[y].clone()))
                            .expect("every quotient edge has a witness")
                    })
                    .collect();
                Err(CausalError::QuotientCycle {
                    clusters: cycle,
                    witnesses,
                })
            }
            Err(e) => Err(e),
        }
    }
}

fn transitive_closure(n: usize, edges: &[(usize, usize)]) -> Vec<Vec<bool>> {
    let mut c = vec![vec![false; n]; n];
    for &(x, y) in edges {
        c[x][y] = true;
    }
    for k in 0..n {
        for i in 0..n {
            if c[i][k] {
                for j in 0..n {
                    if c[k][j] {
                        c[i][j] = true;
                    }
                }
            }
        }
    }
    c
}

fn transitive_reduction(closure: &[Vec<bool>]) -> BTreeSet<(usize, usize)> {
    let n = closure.len();
    let mut out = BTreeSet::new();
    for x in 0..n {
        for y in 0..n {
            if closure[x][y] && !(0..n).any(|z| closure[x][z] && closure[z][y]) {
                out.insert((x, y));
            }
        }
    }
    out
}

/// A directed cycle as a closed walk `[v0, v1, …, v0]`, if one exists.
fn find_cycle(succ: &[BTreeSet<usize>]) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Mark {
        New,
        Active,
        Done,
    }
    fn visit(v: usize, succ: &[BTreeSet<usize>], mark: &mut [Mark], stack: &mut Vec<usize>) -> Option<Vec<usize>> {
        mark[v] = Mark::Active;
        stack.push(v);
        for &w in &succ[v] {
            match mark[w] {
                Mark::Active => {
                    let start = stack.iter().position(|&s| s == w).expect("active vertex on stack");
                    let mut cycle = stack[start..].to_vec();
                    cycle.push(w);
                    return Some(cycle);
                }
                Mark::New => {
                    if let Some(c) = visit(w, succ, mark, stack) {
                        return Some(c);
                    }
                }
                Mark::Done => {}
            }
        }
        stack.pop();
        mark[v] = Mark::Done;
        None
    }
    let mut mark = vec![Mark::New; succ.len()];
    let mut stack = Vec::new();
    (0..succ.len()).find_map(|v| {
        if mark[v] == Mark::New {
            visit(v, succ, &mut mark, &mut stack)
        } else {
            None
        }
    })
}
