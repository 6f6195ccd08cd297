//! Connected components of the domain minus the zero set.

use alloc::{collections::BTreeMap, collections::VecDeque, format, vec, vec::Vec};
use core::fmt;

use crate::grid::{Grid, NodeClass};
use crate::weights::ZeroSet;
use crate::{Error, Hypothesis, Result};

const NO_LABEL: u32 = u32::MAX;

/// `A^(i)_l`: the `l`-th component (1-based, scan order) among those whose
/// boundary has `i` connected pieces.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ComponentId {
    pub boundary_manifolds: usize,
    pub ordinal: usize,
}

impl fmt::Display for ComponentId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "A({})_{}", self.boundary_manifolds, self.ordinal)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Component {
    pub id: ComponentId,
    /// Interior nodes, ascending.
    pub nodes: Vec<usize>,
    /// Zero-set and domain-boundary nodes adjacent to the component, ascending.
    pub shell: Vec<usize>,
    pub boundary_manifolds: usize,
}

impl Component {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn contains(&self, node: usize) -> bool {
        self.nodes.binary_search(&node).is_ok()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    /// In order of their first node in scan order.
    pub components: Vec<Component>,
    pub chi: usize,
    /// `i -> j_i`.
    pub j_counts: BTreeMap<usize, usize>,
    labels: Vec<u32>,
}

impl Decomposition {
    /// Index into `components` of the component holding `node`.
    pub fn component_of(&self, node: usize) -> Option<usize> {
        match self.labels[node] {
            NO_LABEL => None,
            l => Some(l as usize),
        }
    }

    pub fn get(&self, id: ComponentId) -> Option<&Component> {
        self.components.iter().find(|c| c.id == id)
    }
}

pub fn decompose_components(grid: &Grid, zero: &ZeroSet) -> Result<Decomposition> {
    if zero.touches_domain_boundary {
        return Err(Error::HypothesisViolation {
            hypothesis: Hypothesis::A1,
            detail: "the zero set of the weight reaches the boundary of the domain".into(),
        });
    }
    let free = |p: usize| grid.class(p) == NodeClass::Interior && !zero.contains(p);

    let mut labels = vec![NO_LABEL; grid.len()];
    let mut raw: Vec<(Vec<usize>, Vec<usize>)> = Vec::new();
    let mut queue = VecDeque::new();
    let mut shell_mark = vec![false; grid.len()];
    for start in 0..grid.len() {
        if !free(start) || labels[start] != NO_LABEL {
            continue;
        }
        let label = raw.len() as u32;
        let mut nodes = Vec::new();
        let mut shell = Vec::new();
        labels[start] = label;
        queue.push_back(start);
        while let Some(p) = queue.pop_front() {
            nodes.push(p);
            for q in grid.neighbors(p) {
                if free(q) {
                    if labels[q] == NO_LABEL {
                        labels[q] = label;
                        queue.push_back(q);
                    }
                } else if !shell_mark[q] {
                    shell_mark[q] = true;
                    shell.push(q);
                }
            }
        }
        for &q in &shell {
            shell_mark[q] = false;
        }
        nodes.sort_unstable();
        shell.sort_unstable();
        raw.push((nodes, shell));
    }
    if raw.is_empty() {
        return Err(Error::EmptyDecomposition);
    }

    let mut j_counts = BTreeMap::new();
    let mut components = Vec::with_capacity(raw.len());
    for (nodes, shell) in raw {
        let i = count_manifolds(grid, &shell);
        let ordinal = j_counts.entry(i).or_insert(0usize);
        *ordinal += 1;
        components.push(Component {
            id: ComponentId { boundary_manifolds: i, ordinal: *ordinal },
            nodes,
            shell,
            boundary_manifolds: i,
        });
    }
    let chi = components.len();
    Ok(Decomposition { components, chi, j_counts, labels })
}

/// Connected pieces of a boundary shell after dilation by one stencil step.
fn count_manifolds(grid: &Grid, shell: &[usize]) -> usize {
    let mut set: Vec<usize> = shell.to_vec();
    for &p in shell {
        set.extend(grid.neighbors(p));
    }
    set.sort_unstable();
    set.dedup();
    let mut seen = vec![false; set.len()];
    let mut pieces = 0;
    let mut stack = Vec::new();
    for s in 0..set.len() {
        if seen[s] {
            continue;
        }
        pieces += 1;
        seen[s] = true;
        stack.push(set[s]);
        while let Some(p) = stack.pop() {
            for q in grid.neighbors(p) {
                if let Ok(k) = set.binary_search(&q) {
                    if !seen[k] {
                        seen[k] = true;
                        stack.push(q);
                    }
                }
            }
        }
    }
    pieces
}

impl fmt::Display for Decomposition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let js: Vec<_> = self.j_counts.iter().map(|(i, j)| format!("j{i}={j}")).collect();
        write!(f, "chi={} {}", self.chi, js.join(" "))
    }
}
