use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Assignment of `n` nodes to `c` non-empty groups.
///
/// Groups are always numbered `0..c` in order of first appearance, so two
/// partitions that group nodes identically compare equal regardless of the
/// labels they were built from.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(into = "Vec<usize>", try_from = "Vec<usize>")]
pub struct Partition {
    assignment: Vec<usize>,
    c: usize,
}

impl Partition {
    /// Canonicalises arbitrary labels.
    pub fn from_labels(labels: &[usize]) -> Self {
        let mut map = std::collections::HashMap::new();
        let assignment = labels
            .iter()
            .map(|&l| {
                let next = map.len();
                *map.entry(l).or_insert(next)
            })
            .collect();
        Partition {
            assignment,
            c: map.len(),
        }
    }

    /// Every node in its own group.
    pub fn singletons(n: usize) -> Self {
        Partition {
            assignment: (0..n).collect(),
            c: n,
        }
    }

    /// All nodes in one group.
    pub fn whole(n: usize) -> Self {
        Partition {
            assignment: vec![0; n],
            c: usize::from(n > 0),
        }
    }

    pub fn len(&self) -> usize {
        self.assignment.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignment.is_empty()
    }

    /// Number of groups.
    pub fn num_groups(&self) -> usize {
        self.c
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn group_of(&self, node: usize) -> usize {
        self.assignment[node]
    }

    /// Node lists of every group, in group order.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.c];
        for (i, &g) in self.assignment.iter().enumerate() {
            out[g].push(i);
        }
        out
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut out = vec![0; self.c];
        for &g in &self.assignment {
            out[g] += 1;
        }
        out
    }

    /// Relabels nodes: node `i` of the result is node `order[i]` of `self`.
    pub fn permuted(&self, order: &[usize]) -> Partition {
        let labels: Vec<usize> = order.iter().map(|&i| self.assignment[i]).collect();
        Partition::from_labels(&labels)
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        if self.len() != n {
            return Err(Error::Input(format!(
                "partition covers {} nodes, expected {n}",
                self.len()
            )));
        }
        Ok(())
    }
}

impl From<Partition> for Vec<usize> {
    fn from(p: Partition) -> Self {
        p.assignment
    }
}

impl TryFrom<Vec<usize>> for Partition {
    type Error = Error;

    fn try_from(labels: Vec<usize>) -> Result<Self> {
        Ok(Partition::from_labels(&labels))
    }
}
